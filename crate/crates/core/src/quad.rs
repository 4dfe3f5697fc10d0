//! One-dimensional quadrature rules and summation helpers shared by the
//! closed-form, kernel and oracle code paths.

use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `order`-point rule by Newton iteration on the Legendre
    /// polynomial roots.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; order];
        let mut weights = vec![0.0; order];
        let m = order.div_ceil(2);
        let nf = order as f64;
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(order, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(order, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[order - 1 - i] = x;
            weights[i] = w;
            weights[order - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Integrates `f` over `[a, b]` with this rule.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Composite rule over `panels` equal sub-intervals.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached 10-point rule, the workhorse for smooth panel integrals.
pub fn gl10() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(10))
}

/// Cached 20-point rule.
pub fn gl20() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(20))
}

const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK15_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const GK15_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * GK15_WK[7];
    let mut gauss = fc * GK15_WG[3];
    for j in 0..7 {
        let x = h * GK15_NODES[j];
        let s = f(c - x) + f(c + x);
        kron += GK15_WK[j] * s;
        if j % 2 == 1 {
            gauss += GK15_WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration with bisection.
///
/// Stops when the summed error estimate drops below
/// `max(abs_tol, rel_tol * |integral|)` or the panel budget is spent.
pub fn adaptive_gk<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(64);
    let (v, e) = gk15(&mut f, a, b);
    panels.push((a, b, v, e));
    for _ in 0..2000 {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty panel list");
        let (lo, hi, _, _) = panels.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    panels.iter().map(|p| p.2).sum()
}

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`; tolerant of
/// integrable endpoint singularities. `f` receives the abscissa together with
/// its distances to the left and right endpoints, so that singular factors
/// like `(x - a)^(-s)` can be evaluated without cancellation.
pub fn tanh_sinh<F: FnMut(f64, f64, f64) -> f64>(mut f: F, a: f64, b: f64, levels: usize) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut h = 1.0;
    let mut sum = std::f64::consts::FRAC_PI_2 * f(mid, half, half);
    sum += ts_branch(&mut f, mid, half, h, 1, 1);
    let mut estimate = sum * h * half;
    for _ in 1..levels.max(1) {
        h *= 0.5;
        sum += ts_branch(&mut f, mid, half, h, 1, 2);
        let next = sum * h * half;
        let done = (next - estimate).abs() <= 1e-15 * next.abs();
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

fn ts_branch<F: FnMut(f64, f64, f64) -> f64>(
    f: &mut F,
    mid: f64,
    half: f64,
    h: f64,
    start: usize,
    step: usize,
) -> f64 {
    let hpi = std::f64::consts::FRAC_PI_2;
    let mut acc = 0.0;
    let mut k = start;
    loop {
        let t = k as f64 * h;
        if t > 7.0 {
            break;
        }
        let u = hpi * t.sinh();
        let cu = u.cosh();
        // 1 - tanh(u) without cancellation
        let comp = 1.0 / (u.exp() * cu);
        let dl = half * comp;
        if dl <= 0.0 || !cu.is_finite() {
            break;
        }
        let x = 1.0 - comp;
        let w = hpi * t.cosh() / (cu * cu);
        let right = f(mid + half * x, half * (1.0 + x), dl);
        let left = f(mid - half * x, dl, half * (1.0 + x));
        let term = w * (right + left);
        acc += term;
        if t > 2.0 && term.abs() <= 1e-18 * acc.abs() {
            break;
        }
        k += step;
    }
    acc
}

/// Neumaier compensated sum evaluated in slice order; the result depends only
/// on the element order, never on thread scheduling.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(6);
        // degree 11 is the exactness limit for 6 points
        let v = rule.integrate(0.0, 2.0, |x| x.powi(11));
        assert!((v - 2f64.powi(12) / 12.0).abs() < 1e-10);
        let s: f64 = rule.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_gk_handles_peaked_integrand() {
        let eps: f64 = 1e-3;
        let v = adaptive_gk(|x| 1.0 / (x * x + eps * eps), -1.0, 1.0, 1e-13, 1e-12);
        let exact = 2.0 * (1.0 / eps).atan() / eps;
        assert!((v - exact).abs() / exact < 1e-10, "{v} vs {exact}");
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // ∫_0^1 x^{-0.9} dx = 10
        let v = tanh_sinh(|_, dl, _| dl.powf(-0.9), 0.0, 1.0, 12);
        assert!((v - 10.0).abs() / 10.0 < 1e-9, "{v}");
        let v = tanh_sinh(|x, _, _| x.exp(), 0.0, 1.0, 8);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let vals = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(vals), 2.0);
    }
}
