use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::cell::{box_integral, rect_integral};
use crate::discretization::HalfSpaceGrid;
use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use std::sync::OnceLock;

/// Largest kernel table accepted.
pub const MAX_TABLE: usize = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelOptions {
    /// Pairs of cells closer than `near_factor` diameters get the double cell
    /// average; farther pairs the point value.
    pub near_factor: f64,
}

impl KernelOptions {
    pub fn for_dim(n: u32) -> Self {
        Self {
            near_factor: if n == 1 { 6.0 } else { 3.0 },
        }
    }
}

/// Discretized Riesz kernel `|X - Y|^(-lambda)` on a half-space grid.
///
/// Entry `k(i, j)` is the mean of the kernel over the product of cells `i`
/// and `j` (a Galerkin entry), so the discrete functional is the continuous
/// one restricted to cellwise constant functions. Far pairs use the point
/// value. Since the grid is
/// uniform in `x`, entries depend only on `|ix - jx|` (and `|iy - jy|`) and the
/// two t-rows, which is what is stored.
#[derive(Debug, Clone)]
pub struct KernelCore {
    pub grid: Arc<HalfSpaceGrid>,
    pub lambda: f64,
    pub options: KernelOptions,
    table: Vec<f64>,
    spectral: Spectral,
}

/// Circulant embedding of the x-Toeplitz structure: for every pair of t-rows
/// the (real, since the kernel is even) spectrum of the padded kernel.
#[derive(Clone)]
struct Spectral {
    /// Padded period, `2 nx`.
    len: usize,
    /// Points per padded row block, `len` or `len^2`.
    block: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `[it][jt][freq]`.
    symbols: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("len", &self.len).finish()
    }
}

impl KernelCore {
    pub fn new(grid: Arc<HalfSpaceGrid>, lambda: f64) -> Result<Self> {
        let options = KernelOptions::for_dim(grid.n);
        Self::with_options(grid, lambda, options)
    }

    pub fn with_options(grid: Arc<HalfSpaceGrid>, lambda: f64, options: KernelOptions) -> Result<Self> {
        let d = grid.dim() as f64;
        if !lambda.is_finite() {
            return Err(Error::NonFinite("lambda"));
        }
        if !(lambda > 0.0 && lambda < d) {
            return Err(Error::InvalidArgument(format!(
                "lambda = {lambda} outside (0, {d})"
            )));
        }
        let nx = grid.nx;
        let nt = grid.nt;
        let offsets = if grid.n == 1 { nx } else { nx * nx };
        let size = nt
            .checked_mul(offsets)
            .and_then(|v| v.checked_mul(nt))
            .filter(|&v| v <= MAX_TABLE)
            .ok_or_else(|| Error::ResourceLimit("kernel table too large".into()))?;

        let dx = grid.dx();
        let g = grid.clone();
        let table: Vec<f64> = (0..nt * offsets)
            .into_par_iter()
            .flat_map_iter(|block| {
                let it = block / offsets;
                let off = block % offsets;
                let (ox, oy) = if g.n == 1 { (off, 0) } else { (off / nx, off % nx) };
                let g = &g;
                (0..nt).map(move |jt| pair_entry(g, lambda, options, dx, ox, oy, it, jt))
            })
            .collect();
        debug_assert_eq!(table.len(), size);
        let spectral = Spectral::build(&grid, &table, offsets)?;
        Ok(Self {
            grid,
            lambda,
            options,
            table,
            spectral,
        })
    }

    fn offsets(&self) -> usize {
        if self.grid.n == 1 {
            self.grid.nx
        } else {
            self.grid.nx * self.grid.nx
        }
    }

    /// Kernel entry between nodes `i` (target) and `j` (source).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let g = &self.grid;
        let [ix, iy] = g.column_indices(g.column(i));
        let [jx, jy] = g.column_indices(g.column(j));
        let off = if g.n == 1 {
            ix.abs_diff(jx)
        } else {
            ix.abs_diff(jx) * g.nx + iy.abs_diff(jy)
        };
        self.table[(g.row(i) * self.offsets() + off) * g.nt + g.row(j)]
    }

    /// `out_i = sum_j k(i, j) h_j` through the FFT of the padded x-rows. The
    /// work split is by target row, so the result does not depend on the
    /// number of threads.
    pub fn convolve(&self, h: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        assert_eq!(h.len(), g.len(), "input length mismatch");
        let sp = &self.spectral;
        let nt = g.nt;
        let block = sp.block;
        let mut rows = vec![Complex64::new(0.0, 0.0); nt * block];
        rows.par_chunks_mut(block).enumerate().for_each(|(jt, buf)| {
            for col in 0..g.columns() {
                buf[sp.padded_index(g, col)] = Complex64::new(h[col * nt + jt], 0.0);
            }
            sp.transform(buf, &sp.forward);
        });
        let scale = 1.0 / block as f64;
        let mut out_rows = vec![0.0; nt * g.columns()];
        out_rows.par_chunks_mut(g.columns()).enumerate().for_each(|(it, dst)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); block];
            for (jt, src) in rows.chunks(block).enumerate() {
                let sym = &sp.symbols[(it * nt + jt) * block..][..block];
                for ((a, &k), &z) in acc.iter_mut().zip(sym).zip(src) {
                    *a += z * k;
                }
            }
            sp.transform(&mut acc, &sp.inverse);
            for (col, d) in dst.iter_mut().enumerate() {
                *d = acc[sp.padded_index(g, col)].re * scale;
            }
        });
        let mut out = vec![0.0; g.len()];
        for (it, row) in out_rows.chunks(g.columns()).enumerate() {
            for (col, v) in row.iter().enumerate() {
                out[col * nt + it] = *v;
            }
        }
        out
    }

    /// Direct summation reference for [`KernelCore::convolve`].
    pub fn convolve_direct(&self, h: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        assert_eq!(h.len(), g.len(), "input length mismatch");
        let nt = g.nt;
        let nx = g.nx;
        let offsets = self.offsets();
        let mut out = vec![0.0; g.len()];
        out.par_chunks_mut(nt).enumerate().for_each(|(col, chunk)| {
            let [ix, iy] = g.column_indices(col);
            for (it, slot) in chunk.iter_mut().enumerate() {
                let base = it * offsets;
                let mut acc = 0.0;
                if g.n == 1 {
                    for jx in 0..nx {
                        let row = &self.table[(base + ix.abs_diff(jx)) * nt..][..nt];
                        acc += dot(row, &h[jx * nt..][..nt]);
                    }
                } else {
                    for jx in 0..nx {
                        let ox = ix.abs_diff(jx) * nx;
                        for jy in 0..nx {
                            let row = &self.table[(base + ox + iy.abs_diff(jy)) * nt..][..nt];
                            acc += dot(row, &h[(jx * nx + jy) * nt..][..nt]);
                        }
                    }
                }
                *slot = acc;
            }
        });
        out
    }
}

impl Spectral {
    fn build(grid: &HalfSpaceGrid, table: &[f64], offsets: usize) -> Result<Self> {
        let nx = grid.nx;
        let nt = grid.nt;
        let len = 2 * nx;
        let block = if grid.n == 1 { len } else { len * len };
        let size = nt
            .checked_mul(nt)
            .and_then(|v| v.checked_mul(block))
            .filter(|&v| v <= MAX_TABLE)
            .ok_or_else(|| Error::ResourceLimit("kernel spectrum too large".into()))?;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut sp = Self {
            len,
            block,
            forward,
            inverse,
            symbols: Vec::new(),
        };
        // signed offset m in -(nx-1)..=nx-1 sits at m mod len; slot nx stays 0
        let wrap = |k: usize| -> Option<usize> {
            match k.cmp(&nx) {
                std::cmp::Ordering::Less => Some(k),
                std::cmp::Ordering::Equal => None,
                std::cmp::Ordering::Greater => Some(len - k),
            }
        };
        let mut symbols = vec![0.0; size];
        symbols.par_chunks_mut(block).enumerate().for_each(|(pair, dst)| {
            let it = pair / nt;
            let jt = pair % nt;
            let mut buf = vec![Complex64::new(0.0, 0.0); block];
            if grid.n == 1 {
                for (k, b) in buf.iter_mut().enumerate() {
                    if let Some(o) = wrap(k) {
                        *b = Complex64::new(table[(it * offsets + o) * nt + jt], 0.0);
                    }
                }
            } else {
                for kx in 0..len {
                    for ky in 0..len {
                        if let (Some(ox), Some(oy)) = (wrap(kx), wrap(ky)) {
                            buf[kx * len + ky] =
                                Complex64::new(table[(it * offsets + ox * nx + oy) * nt + jt], 0.0);
                        }
                    }
                }
            }
            sp.transform(&mut buf, &sp.forward);
            for (d, b) in dst.iter_mut().zip(&buf) {
                *d = b.re;
            }
        });
        sp.symbols = symbols;
        Ok(sp)
    }

    fn padded_index(&self, g: &HalfSpaceGrid, col: usize) -> usize {
        let [ix, iy] = g.column_indices(col);
        if g.n == 1 {
            ix
        } else {
            ix * self.len + iy
        }
    }

    fn transform(&self, buf: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        plan.process(buf);
        if self.block != self.len {
            transpose_square(buf, self.len);
            plan.process(buf);
            transpose_square(buf, self.len);
        }
    }
}

fn transpose_square(buf: &mut [Complex64], n: usize) {
    for a in 0..n {
        for b in a + 1..n {
            buf.swap(a * n + b, b * n + a);
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        s[0] += a[k] * b[k];
        s[1] += a[k + 1] * b[k + 1];
        s[2] += a[k + 2] * b[k + 2];
        s[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

#[allow(clippy::too_many_arguments)]
fn pair_entry(
    g: &HalfSpaceGrid,
    lambda: f64,
    opts: KernelOptions,
    dx: f64,
    ox: usize,
    oy: usize,
    it: usize,
    jt: usize,
) -> f64 {
    let sx = ox as f64 * dx;
    let sy = oy as f64 * dx;
    let (ti, tj) = (g.t_nodes[it], g.t_nodes[jt]);
    let dist2 = sx * sx + sy * sy + (ti - tj) * (ti - tj);
    let diam2 = cell_diam2(g, dx, it).max(cell_diam2(g, dx, jt));
    if dist2 >= opts.near_factor * opts.near_factor * diam2 {
        return dist2.powf(-0.5 * lambda);
    }
    // the outer average always runs over the lower row, so that the entry
    // for (jt, it) is computed by the very same arithmetic
    let (outer, inner) = (it.min(jt), it.max(jt));
    let rule = if g.n == 1 { gl8() } else { gl4() };
    let h = 0.5 * dx;
    let (t0, t1) = (g.t_edges[outer], g.t_edges[outer + 1]);
    let mut acc = 0.0;
    for (a, wa) in rule.nodes.iter().zip(&rule.weights) {
        let t = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * a;
        for (b, wb) in rule.nodes.iter().zip(&rule.weights) {
            let x = sx + h * b;
            if g.n == 1 {
                acc += wa * wb * cell_mean(g, lambda, dx, [x, 0.0], t, inner);
            } else {
                for (c, wc) in rule.nodes.iter().zip(&rule.weights) {
                    let y = sy + h * c;
                    acc += wa * wb * wc * cell_mean(g, lambda, dx, [x, y], t, inner);
                }
            }
        }
    }
    acc / 2f64.powi(g.dim() as i32)
}

fn cell_diam2(g: &HalfSpaceGrid, dx: f64, row: usize) -> f64 {
    let ht = g.t_width(row);
    g.n as f64 * dx * dx + ht * ht
}

fn gl8() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

fn gl4() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(4))
}

/// Mean of the kernel over the cell in row `row` centred at the x-origin,
/// seen from a point at horizontal offset `s` and height `t`.
fn cell_mean(g: &HalfSpaceGrid, lambda: f64, dx: f64, s: [f64; 2], t: f64, row: usize) -> f64 {
    let t0 = g.t_edges[row];
    let t1 = g.t_edges[row + 1];
    let h = 0.5 * dx;
    if g.n == 1 {
        rect_integral(-h, h, t0, t1, [s[0], t], lambda) / (dx * (t1 - t0))
    } else {
        box_integral([-h, -h, t0], [h, h, t1], [s[0], s[1], t], lambda) / (dx * dx * (t1 - t0))
    }
}
