//! Exact integrals of `|P - X|^(-lambda)` over axis-aligned cells.
//!
//! Both routines rest on the identity
//! `div((X - P) |X - P|^(-lambda)) = (d - lambda) |X - P|^(-lambda)`, which
//! turns the volume integral into a sum over faces weighted by the signed
//! distance from `P` to each face plane. In three dimensions the face
//! integrals are reduced once more to edge integrals the same way.

use crate::quad::adaptive_gk;

const TOL: f64 = 1e-14;

/// `int_{u0}^{u1} (h^2 + u^2)^(-lambda/2) du` for `h > 0`.
pub fn line_integral(h: f64, u0: f64, u1: f64, lambda: f64) -> f64 {
    debug_assert!(h > 0.0);
    let v0 = (u0 / h).asinh();
    let v1 = (u1 / h).asinh();
    if (lambda - 1.0).abs() < 1e-15 {
        return v1 - v0;
    }
    // u = h sinh(v) gives h^(1-lambda) cosh(v)^(1-lambda) dv
    let e = 1.0 - lambda;
    h.powf(e) * adaptive_gk(|v: f64| (e * v.cosh().ln()).exp(), v0, v1, 0.0, TOL)
}

/// Integral of `|P - X|^(-lambda)` over the rectangle `[x0,x1] x [t0,t1]`.
pub fn rect_integral(x0: f64, x1: f64, t0: f64, t1: f64, p: [f64; 2], lambda: f64) -> f64 {
    let mut acc = 0.0;
    // faces x = x1 (normal +x), x = x0 (normal -x)
    for (h, lo, hi) in [
        (x1 - p[0], t0 - p[1], t1 - p[1]),
        (p[0] - x0, t0 - p[1], t1 - p[1]),
        (t1 - p[1], x0 - p[0], x1 - p[0]),
        (p[1] - t0, x0 - p[0], x1 - p[0]),
    ] {
        if h != 0.0 {
            acc += h * line_integral(h.abs(), lo, hi, lambda);
        }
    }
    acc / (2.0 - lambda)
}

/// `Phi(rho) / rho^2` with `Phi(rho) = int_0^rho s (h^2 + s^2)^(-lambda/2) ds`.
fn phi_over_rho2(h: f64, rho2: f64, lambda: f64) -> f64 {
    let x = rho2 / (h * h);
    let e = 1.0 - 0.5 * lambda;
    let phi = if e.abs() < 1e-15 {
        0.5 * x.ln_1p()
    } else {
        h.powf(2.0 - lambda) * (e * x.ln_1p()).exp_m1() / (2.0 - lambda)
    };
    if rho2 == 0.0 {
        // limit of Phi / rho^2 as rho -> 0
        return 0.5 * h.powf(-lambda);
    }
    phi / rho2
}

/// `int_rect (h^2 + |y|^2)^(-lambda/2) dy` over `[a0,a1] x [b0,b1]` in the
/// plane, for `h > 0`.
pub fn face_integral(h: f64, a0: f64, a1: f64, b0: f64, b1: f64, lambda: f64) -> f64 {
    let mut acc = 0.0;
    for (hh, lo, hi) in [(a1, b0, b1), (-a0, b0, b1), (b1, a0, a1), (-b0, a0, a1)] {
        if hh == 0.0 {
            continue;
        }
        let k = hh.abs();
        let v0 = (lo / k).asinh();
        let v1 = (hi / k).asinh();
        // along the edge rho^2 = k^2 + s^2 = (k cosh v)^2 with s = k sinh v
        let f = |v: f64| {
            let c = v.cosh();
            phi_over_rho2(h, k * k * c * c, lambda) * k * c
        };
        acc += hh * adaptive_gk(f, v0, v1, 0.0, TOL);
    }
    acc
}

/// Integral of `|P - X|^(-lambda)` over the box `lo..hi` in three dimensions.
pub fn box_integral(lo: [f64; 3], hi: [f64; 3], p: [f64; 3], lambda: f64) -> f64 {
    let mut acc = 0.0;
    for axis in 0..3 {
        let (b, c) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for h in [hi[axis] - p[axis], p[axis] - lo[axis]] {
            if h == 0.0 {
                continue;
            }
            let face = face_integral(
                h.abs(),
                lo[b] - p[b],
                hi[b] - p[b],
                lo[c] - p[c],
                hi[c] - p[c],
                lambda,
            );
            acc += h * face;
        }
    }
    acc / (3.0 - lambda)
}
