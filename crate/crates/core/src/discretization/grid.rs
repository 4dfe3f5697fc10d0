use serde::{Deserialize, Serialize};
use std::io::Write;
use std::sync::Arc;

use crate::error::{ensure_finite, Error, Result};

/// Largest node count accepted by [`build_grid`].
pub const MAX_NODES: usize = 10_000_000;

/// Tensor grid on the truncated half space `[-L, L]^n x (0, T]`.
///
/// The x-direction is uniform; the t-direction is graded as
/// `t_j = T (j / nt)^g` so that cells shrink towards the boundary. Nodes are
/// ordered with `t` fastest: `idx = ((ix * nx) + iy) * nt + jt` for `n = 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpaceGrid {
    pub n: u32,
    pub x_extent: f64,
    pub t_max: f64,
    pub nx: usize,
    pub nt: usize,
    pub grading: f64,
    pub x_nodes: Vec<f64>,
    pub t_edges: Vec<f64>,
    pub t_nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n: u32,
    pub x_extent: f64,
    pub t_max: f64,
    pub nx: usize,
    pub nt: usize,
    #[serde(default = "default_grading")]
    pub grading: f64,
}

fn default_grading() -> f64 {
    2.0
}

impl GridSpec {
    pub fn build(&self) -> Result<HalfSpaceGrid> {
        build_grid(self.n, self.x_extent, self.t_max, self.nx, self.nt, self.grading)
    }
}

pub fn build_grid(
    n: u32,
    x_extent: f64,
    t_max: f64,
    nx: usize,
    nt: usize,
    grading: f64,
) -> Result<HalfSpaceGrid> {
    ensure_finite("x_extent", x_extent)?;
    ensure_finite("t_max", t_max)?;
    ensure_finite("grading", grading)?;
    if !(n == 1 || n == 2) {
        return Err(Error::Unsupported(format!(
            "grids are available for n = 1 and n = 2 only, got n = {n}"
        )));
    }
    if nx < 4 || nt < 4 {
        return Err(Error::InvalidArgument(format!("need nx, nt >= 4 (got {nx}, {nt})")));
    }
    if grading < 1.0 {
        return Err(Error::InvalidArgument(format!("grading must be >= 1, got {grading}")));
    }
    if x_extent <= 0.0 || t_max <= 0.0 {
        return Err(Error::InvalidArgument("extents must be positive".into()));
    }
    let count = nx
        .checked_pow(n)
        .and_then(|c| c.checked_mul(nt))
        .filter(|&c| c <= MAX_NODES)
        .ok_or_else(|| Error::ResourceLimit(format!("more than {MAX_NODES} nodes requested")))?;

    let dx = 2.0 * x_extent / nx as f64;
    let x_nodes: Vec<f64> = (0..nx).map(|i| -x_extent + (i as f64 + 0.5) * dx).collect();
    let t_edges: Vec<f64> = (0..=nt)
        .map(|j| t_max * (j as f64 / nt as f64).powf(grading))
        .collect();
    let t_nodes: Vec<f64> = t_edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    let cell_x = dx.powi(n as i32);
    let mut weights = Vec::with_capacity(count);
    for _ in 0..nx.pow(n) {
        for w in t_edges.windows(2) {
            weights.push(cell_x * (w[1] - w[0]));
        }
    }
    Ok(HalfSpaceGrid {
        n,
        x_extent,
        t_max,
        nx,
        nt,
        grading,
        x_nodes,
        t_edges,
        t_nodes,
        weights,
    })
}

impl HalfSpaceGrid {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.n as usize + 1
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.x_extent / self.nx as f64
    }

    /// Number of x-columns (`nx^n`).
    pub fn columns(&self) -> usize {
        self.nx.pow(self.n)
    }

    pub fn row(&self, idx: usize) -> usize {
        idx % self.nt
    }

    pub fn column(&self, idx: usize) -> usize {
        idx / self.nt
    }

    /// x-indices of a column, `[ix, iy]` (the second is zero for `n = 1`).
    pub fn column_indices(&self, col: usize) -> [usize; 2] {
        if self.n == 1 {
            [col, 0]
        } else {
            [col / self.nx, col % self.nx]
        }
    }

    pub fn index(&self, ix: usize, iy: usize, jt: usize) -> usize {
        if self.n == 1 {
            ix * self.nt + jt
        } else {
            (ix * self.nx + iy) * self.nt + jt
        }
    }

    /// Coordinates `[x1, x2, t]` of a node; `x2 = 0` when `n = 1`.
    pub fn point3(&self, idx: usize) -> [f64; 3] {
        let [ix, iy] = self.column_indices(self.column(idx));
        let t = self.t_nodes[self.row(idx)];
        if self.n == 1 {
            [self.x_nodes[ix], 0.0, t]
        } else {
            [self.x_nodes[ix], self.x_nodes[iy], t]
        }
    }

    /// Coordinates of a node as a vector of length `n + 1`, `t` last.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let p = self.point3(idx);
        if self.n == 1 {
            vec![p[0], p[2]]
        } else {
            p.to_vec()
        }
    }

    pub fn t_width(&self, jt: usize) -> f64 {
        self.t_edges[jt + 1] - self.t_edges[jt]
    }

    /// Cell average of `t^{-a}` over t-row `jt`.
    pub fn row_power_average(&self, jt: usize, a: f64) -> f64 {
        let lo = self.t_edges[jt];
        let hi = self.t_edges[jt + 1];
        if a == 0.0 {
            return 1.0;
        }
        let e = 1.0 - a;
        if e.abs() < 1e-14 {
            return (hi.ln() - lo.ln()) / (hi - lo);
        }
        (hi.powf(e) - lo.powf(e)) / (e * (hi - lo))
    }

    pub fn total_measure(&self) -> f64 {
        (2.0 * self.x_extent).powi(self.n as i32) * self.t_max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryHint {
    #[default]
    None,
    EvenInX,
}

/// Values sampled at the nodes of a grid.
#[derive(Debug, Clone)]
pub struct Field {
    pub grid: Arc<HalfSpaceGrid>,
    pub values: Vec<f64>,
    pub symmetry_hint: SymmetryHint,
}

impl Field {
    pub fn new(grid: Arc<HalfSpaceGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("field value"));
        }
        Ok(Self {
            grid,
            values,
            symmetry_hint: SymmetryHint::None,
        })
    }

    pub fn zeros(grid: Arc<HalfSpaceGrid>) -> Self {
        let len = grid.len();
        Self {
            grid,
            values: vec![0.0; len],
            symmetry_hint: SymmetryHint::None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            symmetry_hint: self.symmetry_hint,
        }
    }

    pub fn scaled(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Values on the t-row `jt`, in column order.
    pub fn row_values(&self, jt: usize) -> Vec<f64> {
        let nt = self.grid.nt;
        (0..self.grid.columns()).map(|c| self.values[c * nt + jt]).collect()
    }

    /// Writes `x..., t, value` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        if self.grid.n == 1 {
            writeln!(out, "x,t,value")?;
        } else {
            writeln!(out, "x1,x2,t,value")?;
        }
        for (idx, v) in self.values.iter().enumerate() {
            let p = self.grid.point(idx);
            let cols: Vec<String> = p.iter().chain(std::iter::once(v)).map(|c| fmt17(*c)).collect();
            writeln!(out, "{}", cols.join(","))?;
        }
        Ok(())
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Midpoint quadrature `sum value * weight`.
pub fn quadrature(field: &Field) -> f64 {
    crate::quad::compensated_sum(field.values.iter().zip(&field.grid.weights).map(|(v, w)| v * w))
}
