//! Fixed quadrature rules: Gauss-Legendre panels for smooth oscillatory
//! integrands and the tanh-sinh rule for algebraic endpoint behaviour.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

/// Nodes and weights of an `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `(P_n(z), P_n'(z))` by the three-term recurrence.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Points per panel of the composite rule.
pub const PANEL_ORDER: usize = 16;

pub(crate) fn panel_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(PANEL_ORDER))
}

/// Composite Gauss-Legendre sum of `f` over `[a, b]` split into `panels`
/// equal pieces.
pub fn composite(
    a: f64,
    b: f64,
    panels: usize,
    f: impl Fn(f64) -> Complex64,
) -> Complex64 {
    let rule = panel_rule();
    let h = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let mut panel = Complex64::new(0.0, 0.0);
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            panel += f(mid + 0.5 * h * x) * *w;
        }
        acc += panel * (0.5 * h);
    }
    acc
}

/// Tanh-sinh abscissae `tanh(pi/2 sinh(t_k))` for `t_k = k h`, `k >= 0`,
/// returned with `sech(pi/2 sinh t_k)` (so `1 - s^2` is available without
/// cancellation) and the Jacobian `pi/2 cosh(t_k) sech^2(...)`.
#[derive(Clone, Debug)]
pub struct TanhSinh {
    pub h: f64,
    pub abscissae: Vec<f64>,
    pub sech: Vec<f64>,
    pub jacobian: Vec<f64>,
}

impl TanhSinh {
    /// Nodes up to `t = t_max`.
    pub fn new(h: f64, t_max: f64) -> Self {
        let count = (t_max / h).ceil() as usize + 1;
        let mut abscissae = Vec::with_capacity(count);
        let mut sech = Vec::with_capacity(count);
        let mut jacobian = Vec::with_capacity(count);
        for k in 0..count {
            let t = k as f64 * h;
            let u = 0.5 * PI * t.sinh();
            let e = (-u).exp();
            let sech_u = 2.0 * e / (1.0 + e * e);
            abscissae.push(u.tanh());
            sech.push(sech_u);
            jacobian.push(0.5 * PI * t.cosh() * sech_u * sech_u);
        }
        TanhSinh {
            h,
            abscissae,
            sech,
            jacobian,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 64] {
            let g = GaussLegendre::new(n);
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "n={n}");
            let deg = 2 * n - 1;
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            let q: f64 = g
                .nodes
                .iter()
                .zip(&g.weights)
                .map(|(x, w)| w * x.powi(deg as i32 - 1) * x)
                .sum();
            assert!((q - exact).abs() < 1e-13);
            let even = if n > 1 { 2 * n - 2 } else { 0 };
            let q: f64 = g
                .nodes
                .iter()
                .zip(&g.weights)
                .map(|(x, w)| w * x.powi(even as i32))
                .sum();
            assert!((q - 2.0 / (even as f64 + 1.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn composite_oscillatory() {
        // int_0^10 exp(i 20 x) dx
        let v = composite(0.0, 10.0, 64, |x| Complex64::new(0.0, 20.0 * x).exp());
        let exact = (Complex64::new(0.0, 200.0).exp() - 1.0) / Complex64::new(0.0, 20.0);
        assert!((v - exact).norm() < 1e-13);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        // int_{-1}^1 (1 - s^2)^{-1/2} ds = pi
        let ts = TanhSinh::new(1.0 / 16.0, 4.0);
        let f: Vec<f64> = ts.sech.iter().zip(&ts.jacobian).map(|(s, j)| j / s).collect();
        let v = ts.h * (f[0] + 2.0 * f[1..].iter().sum::<f64>());
        assert!((v - PI).abs() < 1e-14);
    }
}
