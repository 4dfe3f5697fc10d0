//! Monte Carlo integration over half-space regions, used as an independent
//! oracle for closed-form constants.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_forms::{ball_volume, sphere_area};
use crate::error::{Error, Result};

/// Fixed number of independent sample streams; results do not depend on the
/// number of worker threads.
pub const MC_CHUNKS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// `B_R(center) ∩ {t > 0}`.
    BallPlus { radius: f64, center: Vec<f64> },
    /// `{|Y| > R, t > 0} ∩ ([-L, L]^n x (0, L])`.
    ComplementBallPlusBox { radius: f64, half_width: f64 },
    /// The grid box `[-L, L]^n x (0, T]`.
    GridBox { x_extent: f64, t_max: f64 },
    /// The unbounded region `{|Y| > R, t > 0}`, sampled with a radial
    /// Pareto density proportional to `|Y|^(-(n+1) - decay)`.
    ComplementBallPlus { radius: f64, decay: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub samples: usize,
    /// Set when the chunk estimates disagree more than their standard errors
    /// allow or a single sample dominates, both symptoms of infinite variance.
    pub warning: bool,
}

fn unit_direction(rng: &mut ChaCha8Rng, dim: usize, out: &mut [f64]) {
    loop {
        let mut s = 0.0;
        for v in out.iter_mut().take(dim) {
            *v = rng.sample::<f64, _>(StandardNormal);
            s += *v * *v;
        }
        if s > 1e-300 {
            let inv = 1.0 / s.sqrt();
            out.iter_mut().take(dim).for_each(|v| *v *= inv);
            return;
        }
    }
}

struct ChunkStats {
    sum: f64,
    sum_sq: f64,
    max_abs: f64,
    sum_abs: f64,
    count: usize,
}

/// Integrates `f` over `region` in `dim = n + 1` dimensions.
pub fn mc_integral<F>(f: F, dim: usize, region: &Region, n_samples: usize, seed: u64) -> Result<McEstimate>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if dim < 2 {
        return Err(Error::InvalidArgument("dimension must be at least 2".into()));
    }
    if n_samples < MC_CHUNKS {
        return Err(Error::InvalidArgument(format!("need at least {MC_CHUNKS} samples")));
    }
    match region {
        Region::BallPlus { radius, center } => {
            if center.len() != dim || !(*radius > 0.0) {
                return Err(Error::InvalidArgument("bad ball region".into()));
            }
        }
        Region::ComplementBallPlusBox { radius, half_width } => {
            if !(*radius > 0.0 && *half_width > 0.0) {
                return Err(Error::InvalidArgument("bad complement region".into()));
            }
        }
        Region::GridBox { x_extent, t_max } => {
            if !(*x_extent > 0.0 && *t_max > 0.0) {
                return Err(Error::InvalidArgument("bad box region".into()));
            }
        }
        Region::ComplementBallPlus { radius, decay } => {
            if !(*radius > 0.0 && *decay > 0.0) {
                return Err(Error::InvalidArgument("unbounded region needs radius, decay > 0".into()));
            }
        }
    }
    let n_dims = dim;
    let per_chunk = n_samples / MC_CHUNKS;
    let extra = n_samples % MC_CHUNKS;

    let chunks: Vec<ChunkStats> = (0..MC_CHUNKS)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let count = per_chunk + usize::from(k < extra);
            let mut y = vec![0.0; n_dims];
            let mut dir = vec![0.0; n_dims];
            let mut st = ChunkStats {
                sum: 0.0,
                sum_sq: 0.0,
                max_abs: 0.0,
                sum_abs: 0.0,
                count,
            };
            for _ in 0..count {
                let v = draw(&f, region, n_dims, &mut rng, &mut y, &mut dir);
                st.sum += v;
                st.sum_sq += v * v;
                st.max_abs = st.max_abs.max(v.abs());
                st.sum_abs += v.abs();
            }
            st
        })
        .collect();

    let total: usize = chunks.iter().map(|c| c.count).sum();
    let sum: f64 = chunks.iter().map(|c| c.sum).sum();
    let sum_sq: f64 = chunks.iter().map(|c| c.sum_sq).sum();
    let nf = total as f64;
    let mean = sum / nf;
    let var = ((sum_sq / nf) - mean * mean).max(0.0) * nf / (nf - 1.0);
    let stderr = (var / nf).sqrt();

    // chunk means should scatter with standard error sqrt(MC_CHUNKS) * stderr
    let chunk_se = stderr * (MC_CHUNKS as f64).sqrt();
    let scatter = if chunk_se <= 1e-12 * mean.abs() {
        0.0
    } else {
        chunks
            .iter()
            .map(|c| ((c.sum / c.count as f64 - mean) / chunk_se).powi(2))
            .sum::<f64>()
            / (MC_CHUNKS as f64 - 1.0)
    };
    let max_abs = chunks.iter().map(|c| c.max_abs).fold(0.0, f64::max);
    let sum_abs: f64 = chunks.iter().map(|c| c.sum_abs).sum();
    let dominated = sum_abs > 0.0 && max_abs / sum_abs > 0.01;
    let warning = !(scatter < 3.0) || dominated;
    Ok(McEstimate {
        estimate: mean,
        stderr,
        samples: total,
        warning,
    })
}

fn draw<F: Fn(&[f64]) -> f64>(
    f: &F,
    region: &Region,
    dim: usize,
    rng: &mut ChaCha8Rng,
    y: &mut [f64],
    dir: &mut [f64],
) -> f64 {
    match region {
        Region::BallPlus { radius, center } => {
            unit_direction(rng, dim, dir);
            let u: f64 = rng.gen();
            let s = radius * u.powf(1.0 / dim as f64);
            for k in 0..dim {
                y[k] = center[k] + s * dir[k];
            }
            let full = ball_volume(dim as u32) * radius.powi(dim as i32);
            if center[dim - 1] == 0.0 {
                // fold onto the upper half; the half ball has half the volume
                y[dim - 1] = y[dim - 1].abs();
                if y[dim - 1] == 0.0 {
                    return 0.0;
                }
                f(y) * full / 2.0
            } else if y[dim - 1] > 0.0 {
                f(y) * full
            } else {
                0.0
            }
        }
        Region::ComplementBallPlusBox { radius, half_width } => {
            for k in 0..dim - 1 {
                y[k] = half_width * (2.0 * rng.gen::<f64>() - 1.0);
            }
            y[dim - 1] = half_width * (1.0 - rng.gen::<f64>());
            let r2: f64 = y.iter().map(|v| v * v).sum();
            if r2 <= radius * radius {
                return 0.0;
            }
            let vol = (2.0 * half_width).powi(dim as i32 - 1) * half_width;
            f(y) * vol
        }
        Region::GridBox { x_extent, t_max } => {
            for k in 0..dim - 1 {
                y[k] = x_extent * (2.0 * rng.gen::<f64>() - 1.0);
            }
            y[dim - 1] = t_max * (1.0 - rng.gen::<f64>());
            let vol = (2.0 * x_extent).powi(dim as i32 - 1) * t_max;
            f(y) * vol
        }
        Region::ComplementBallPlus { radius, decay } => {
            unit_direction(rng, dim, dir);
            dir[dim - 1] = dir[dim - 1].abs();
            if dir[dim - 1] == 0.0 {
                return 0.0;
            }
            // radial density decay * R^decay * s^(-decay - 1) on [R, inf)
            let u: f64 = 1.0 - rng.gen::<f64>();
            let s = radius * u.powf(-1.0 / decay);
            for k in 0..dim {
                y[k] = s * dir[k];
            }
            let half_area = sphere_area(dim as u32) / 2.0;
            let radial_pdf = decay * radius.powf(*decay) * s.powf(-decay - 1.0);
            f(y) * half_area * s.powi(dim as i32 - 1) / radial_pdf
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn half_disk_area() {
        let region = Region::BallPlus {
            radius: 1.0,
            center: vec![0.0, 0.0],
        };
        let est = mc_integral(|_| 1.0, 2, &region, 1_000_000, 7).unwrap();
        // constant integrand with folding has zero variance
        assert!((est.estimate - PI / 2.0).abs() < 1e-12 + 3.0 * est.stderr);
        assert!(!est.warning);
    }

    #[test]
    fn unbounded_tail_matches_closed_form() {
        let region = Region::ComplementBallPlus { radius: 1.0, decay: 2.0 };
        let est = mc_integral(|y| (y[0] * y[0] + y[1] * y[1]).powi(-2), 2, &region, 200_000, 3).unwrap();
        assert!((est.estimate - PI / 2.0).abs() < 1e-10 + 3.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn same_seed_same_estimate() {
        let region = Region::GridBox { x_extent: 1.0, t_max: 1.0 };
        let f = |y: &[f64]| (-y[0] * y[0] - y[1]).exp();
        let a = mc_integral(f, 2, &region, 10_000, 11).unwrap();
        let b = mc_integral(f, 2, &region, 10_000, 11).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        let c = mc_integral(f, 2, &region, 10_000, 12).unwrap();
        assert_ne!(a.estimate.to_bits(), c.estimate.to_bits());
    }

    #[test]
    fn heavy_tail_sets_warning() {
        let region = Region::GridBox { x_extent: 1.0, t_max: 1.0 };
        // t^{-1.5} is not integrable near t = 0
        let est = mc_integral(|y| y[1].powf(-1.5), 2, &region, 100_000, 5).unwrap();
        assert!(est.warning);
    }
}
