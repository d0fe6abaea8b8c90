//! The frequency-localized dispersive kernel
//! `I_lambda(x, t) = lambda^d int e^{i lambda x.xi + i t m_beta(lambda xi)} rho(|xi|) dxi`.
//!
//! By radial symmetry only `|x|` matters:
//! `I = lambda^d (2 pi)^{d/2} int_{1/2}^{2} e^{i t m(lambda r)} (lambda r |x|)^{-a} J_a(lambda r |x|) r^{d-1} rho(r) dr`
//! with `a = (d-2)/2`. In one dimension `(2 pi)^{1/2} z^{1/2} J_{-1/2}(z) = 2 cos z`,
//! which gives the cosine form used by [`eval_kernel`].

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::BesselJ;
use crate::dyadic::{rho, DyadicScale};
use crate::error::{domain, Error, Result};
use crate::quadrature::{panel_rule, PANEL_ORDER};
use crate::spectral::Sign;
use crate::symbol::{bracket, m_prime_unchecked, m_unchecked, Beta, SymbolParams};

/// Numerical controls shared by the kernel routines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    /// Quadrature nodes per oscillation of the integrand.
    pub nodes_per_oscillation: f64,
    /// Hard cap on nodes for one integral.
    pub node_cap: usize,
    /// Relative refinement tolerance.
    pub tolerance: f64,
    /// Factor turning `t >> lambda^{-1/2} <sqrt(beta) lambda>^{-1}` into a test.
    pub tcond_factor: f64,
    /// Coarse points of the supremum scan.
    pub scan_points: usize,
    /// Relative accuracy of the golden-section refinement.
    pub scan_rel_tol: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            nodes_per_oscillation: 20.0,
            node_cap: 2_000_000,
            tolerance: 1e-8,
            tcond_factor: 10.0,
            scan_points: 64,
            scan_rel_tol: 1e-6,
        }
    }
}

/// One evaluation of the kernel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelSample {
    pub d: usize,
    pub beta: Beta,
    pub lambda: DyadicScale,
    pub x_radius: f64,
    pub t: f64,
    pub value: Complex64,
    pub quad_points: usize,
    pub est_error: f64,
}

/// Quadrature nodes on `[1/2, 1] u [1, 2]` with the `x`-independent part
/// of the integrand folded into the weights.
struct Nodes {
    r: Vec<f64>,
    weight: Vec<Complex64>,
}

/// Kernel at fixed `(d, beta, lambda, t)`; caches the `x`-independent
/// factors so that many `|x|` can be evaluated cheaply.
pub struct KernelEvaluator {
    d: usize,
    beta: Beta,
    lambda: DyadicScale,
    t: f64,
    cfg: KernelConfig,
    radial: Radial,
    cache: Mutex<HashMap<usize, Arc<Nodes>>>,
}

enum Radial {
    /// `2 cos z`
    Cosine,
    /// `(2 pi)^{1/2} z^{1/2} J_{-1/2}(z)` with `J_{-1/2}` from the recurrence
    /// `J_{-1/2}(z) = J_{1/2}(z) / z - J_{3/2}(z)`.
    Recurrence(BesselJ, BesselJ),
    /// `(2 pi)^{d/2} z^{-a} J_a(z)`
    Bessel(BesselJ, f64),
}

impl Radial {
    fn eval(&self, z: f64) -> f64 {
        match self {
            Radial::Cosine => 2.0 * z.cos(),
            Radial::Recurrence(half, three_halves) => {
                let c = (2.0 * PI).sqrt();
                if z < 1e-8 {
                    return c * (2.0 / PI).sqrt();
                }
                c * z.sqrt() * (half.j_unchecked(z) / z - three_halves.j_unchecked(z))
            }
            Radial::Bessel(j, c) => c * j.tilde_unchecked(z),
        }
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if !(1..=3).contains(&d) {
        return domain(format!("kernel dimension must be 1, 2 or 3, got {d}"));
    }
    Ok(())
}

impl KernelEvaluator {
    pub fn new(
        d: usize,
        params: SymbolParams,
        lambda: DyadicScale,
        t: f64,
        cfg: KernelConfig,
    ) -> Result<Self> {
        check_dimension(d)?;
        let radial = if d == 1 {
            Radial::Cosine
        } else {
            let a = (d as f64 - 2.0) / 2.0;
            Radial::Bessel(BesselJ::new(a)?, (2.0 * PI).powf(d as f64 / 2.0))
        };
        Self::with_radial(d, params, lambda, t, cfg, radial)
    }

    /// One-dimensional kernel through the general radial formula, with the
    /// order `-1/2` Bessel function obtained from orders `1/2` and `3/2`.
    pub fn radial_1d(
        params: SymbolParams,
        lambda: DyadicScale,
        t: f64,
        cfg: KernelConfig,
    ) -> Result<Self> {
        let radial = Radial::Recurrence(BesselJ::new(0.5)?, BesselJ::new(1.5)?);
        Self::with_radial(1, params, lambda, t, cfg, radial)
    }

    fn with_radial(
        d: usize,
        params: SymbolParams,
        lambda: DyadicScale,
        t: f64,
        cfg: KernelConfig,
        radial: Radial,
    ) -> Result<Self> {
        if !t.is_finite() {
            return domain(format!("time must be finite, got {t}"));
        }
        Ok(KernelEvaluator {
            d,
            beta: params.beta,
            lambda,
            t,
            cfg,
            radial,
            cache: Mutex::new(HashMap::new()),
        })
    }

    fn nodes(&self, panels: usize) -> Arc<Nodes> {
        if let Some(n) = self.cache.lock().expect("cache lock").get(&panels) {
            return n.clone();
        }
        let rule = panel_rule();
        let lam = self.lambda.lambda();
        let b = self.beta.value();
        let pref = lam.powi(self.d as i32);
        let mut r = Vec::with_capacity(2 * panels * PANEL_ORDER);
        let mut weight = Vec::with_capacity(2 * panels * PANEL_ORDER);
        for (lo, hi) in [(0.5, 1.0), (1.0, 2.0)] {
            let h = (hi - lo) / panels as f64;
            for p in 0..panels {
                let mid = lo + (p as f64 + 0.5) * h;
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let s = mid + 0.5 * h * x;
                    let amp = pref * 0.5 * h * w * rho(s) * s.powi(self.d as i32 - 1);
                    let phase = self.t * m_unchecked(b, lam * s);
                    r.push(s);
                    weight.push(Complex64::from_polar(amp, phase));
                }
            }
        }
        let nodes = Arc::new(Nodes { r, weight });
        self.cache
            .lock()
            .expect("cache lock")
            .insert(panels, nodes.clone());
        nodes
    }

    fn sum(&self, nodes: &Nodes, x: f64) -> Complex64 {
        let lx = self.lambda.lambda() * x;
        nodes
            .r
            .iter()
            .zip(&nodes.weight)
            .map(|(&s, &w)| w * self.radial.eval(lx * s))
            .sum()
    }

    fn initial_panels(&self, x: f64) -> usize {
        let lam = self.lambda.lambda();
        let b = self.beta.value();
        let phase_range = self.t.abs() * (m_unchecked(b, 2.0 * lam) - m_unchecked(b, 0.5 * lam));
        let oscillations = (phase_range + 1.5 * lam * x) / (2.0 * PI);
        let nodes = self.cfg.nodes_per_oscillation * oscillations;
        // two sub-intervals
        let panels = (nodes / (2.0 * PANEL_ORDER as f64)).ceil() as usize;
        panels.max(4)
    }

    /// `I_lambda` at radius `x >= 0`.
    pub fn eval(&self, x: f64) -> Result<KernelSample> {
        if !(x.is_finite() && x >= 0.0) {
            return domain(format!("|x| must be finite and >= 0, got {x}"));
        }
        let mut panels = self.initial_panels(x);
        let count = |p: usize| 2 * p * PANEL_ORDER;
        let needed = count(2 * panels);
        if needed > self.cfg.node_cap {
            return Err(Error::Unresolved {
                what: format!("kernel at |x|={x}, t={}", self.t),
                needed,
                cap: self.cfg.node_cap,
            });
        }
        let mut coarse = self.sum(&self.nodes(panels), x);
        loop {
            let fine_panels = 2 * panels;
            let fine = self.sum(&self.nodes(fine_panels), x);
            let err = (fine - coarse).norm();
            if err <= self.cfg.tolerance * fine.norm().max(1.0) {
                return Ok(KernelSample {
                    d: self.d,
                    beta: self.beta,
                    lambda: self.lambda,
                    x_radius: x,
                    t: self.t,
                    value: fine,
                    quad_points: count(fine_panels),
                    est_error: err,
                });
            }
            if count(2 * fine_panels) > self.cfg.node_cap {
                return Err(Error::Unresolved {
                    what: format!("kernel at |x|={x}, t={}", self.t),
                    needed: count(2 * fine_panels),
                    cap: self.cfg.node_cap,
                });
            }
            panels = fine_panels;
            coarse = fine;
        }
    }
}

/// `I_lambda(x, t)` for `d in {1, 2, 3}` with the default configuration.
pub fn eval_kernel(
    d: usize,
    params: SymbolParams,
    lambda: DyadicScale,
    x_radius: f64,
    t: f64,
) -> Result<KernelSample> {
    KernelEvaluator::new(d, params, lambda, t, KernelConfig::default())?.eval(x_radius)
}

/// Phase regimes of the kernel of `S(+-t)` along a ray.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Stationary,
    /// `|x|/t` below every value of `m'(lambda r)` on the window.
    NonStationarySmall,
    /// `|x|/t` above every value of `m'(lambda r)` on the window.
    NonStationaryLarge,
    /// `x/t` has the sign for which the phase derivative never vanishes.
    NonStationaryPositive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseRegime {
    pub regime: Regime,
    pub stationary_r: Option<f64>,
}

/// Locates the stationary point of the phase `lambda x r -/+ t m(lambda r)`
/// of the kernel of `S(+-t) = exp(-/+ i t m(D))` on `r in [1/2, 2]`; `x` is a
/// signed coordinate along the ray. The phase is stationary where
/// `x/t = +-m'(lambda r)`; `m'` is monotone on the window, so bisection finds
/// the root whenever it is bracketed.
pub fn classify_phase(
    params: SymbolParams,
    lambda: DyadicScale,
    x: f64,
    t: f64,
    sign: Sign,
) -> Result<PhaseRegime> {
    if t == 0.0 || !t.is_finite() {
        return domain(format!("phase classification needs finite t != 0, got {t}"));
    }
    if !x.is_finite() {
        return domain(format!("x must be finite, got {x}"));
    }
    let slope = sign.value() * x / t;
    if slope <= 0.0 {
        return Ok(PhaseRegime {
            regime: Regime::NonStationaryPositive,
            stationary_r: None,
        });
    }
    let b = params.beta.value();
    let lam = lambda.lambda();
    let g = |r: f64| m_prime_unchecked(b, lam * r) - slope;
    let (ga, gb) = (g(0.5), g(2.0));
    let lo_val = ga.min(gb) + slope;
    let hi_val = ga.max(gb) + slope;
    if slope < lo_val {
        return Ok(PhaseRegime {
            regime: Regime::NonStationarySmall,
            stationary_r: None,
        });
    }
    if slope > hi_val {
        return Ok(PhaseRegime {
            regime: Regime::NonStationaryLarge,
            stationary_r: None,
        });
    }
    let (mut a, mut c) = (0.5, 2.0);
    let mut fa = ga;
    if fa == 0.0 {
        c = a;
    }
    for _ in 0..200 {
        if c - a <= 1e-15 * c {
            break;
        }
        let mid = 0.5 * (a + c);
        let fm = g(mid);
        if fm == 0.0 {
            a = mid;
            c = mid;
            break;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = mid;
            fa = fm;
        } else {
            c = mid;
        }
    }
    Ok(PhaseRegime {
        regime: Regime::Stationary,
        stationary_r: Some(0.5 * (a + c)),
    })
}

/// Smallest admissible time: `factor * lambda^{-1/2} <sqrt(beta) lambda>^{-1}`.
pub fn time_threshold(params: SymbolParams, lambda: DyadicScale, factor: f64) -> f64 {
    let l = lambda.lambda();
    factor * l.powf(-0.5) / bracket(params.beta.value().sqrt() * l)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupEstimate {
    pub t: f64,
    pub sup: f64,
    pub argmax: f64,
}

/// Supremum over `|x|` of `|I_lambda(x, t)|`.
///
/// The coarse scan covers `[t m'_min / 2, 2 t m'_max]`, where `m'_min`,
/// `m'_max` bound `m'(lambda r)` on `r in [1/2, 2]`, so it contains the whole
/// stationary set with an octave of margin on both sides; the best coarse
/// point is then refined by golden-section search.
pub fn sup_scan(
    d: usize,
    params: SymbolParams,
    lambda: DyadicScale,
    t: f64,
    cfg: &KernelConfig,
) -> Result<SupEstimate> {
    check_dimension(d)?;
    let threshold = time_threshold(params, lambda, cfg.tcond_factor);
    if !(t.abs() >= threshold) {
        return domain(format!("|t| = {t} below the dispersive-regime threshold {threshold}"));
    }
    let ev = KernelEvaluator::new(d, params, lambda, t, *cfg)?;
    let b = params.beta.value();
    let lam = lambda.lambda();
    let (pa, pb) = (m_prime_unchecked(b, 0.5 * lam), m_prime_unchecked(b, 2.0 * lam));
    let lo = 0.5 * t.abs() * pa.min(pb);
    let hi = 2.0 * t.abs() * pa.max(pb);
    let n = cfg.scan_points.max(3);
    let xs: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let mut vals = Vec::with_capacity(n);
    for &x in &xs {
        vals.push(ev.eval(x)?.value.norm());
    }
    let best = vals
        .iter()
        .enumerate()
        .fold(0, |bi, (i, v)| if *v > vals[bi] { i } else { bi });
    let a = xs[best.saturating_sub(1)];
    let c = xs[(best + 1).min(n - 1)];
    let f = |x: f64| ev.eval(x).map(|s| s.value.norm());
    let (argmax, sup) = golden_max(f, a, c, cfg.scan_rel_tol)?;
    let (argmax, sup) = if sup >= vals[best] {
        (argmax, sup)
    } else {
        (xs[best], vals[best])
    };
    Ok(SupEstimate { t, sup, argmax })
}

fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, rel: f64) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..200 {
        if (b - a) <= rel * b.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 > f2 { (x1, f1) } else { (x2, f2) })
}

/// Least-squares fit of `log sup` against `log t`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Resolved samples, ordered as the input times.
    pub samples: Vec<SupEstimate>,
    /// Times whose kernel could not be resolved within the node cap.
    pub unresolved: Vec<f64>,
}

/// Minimum number of resolved times in a fit.
pub const MIN_FIT_POINTS: usize = 8;

pub fn decay_fit(
    d: usize,
    params: SymbolParams,
    lambda: DyadicScale,
    t_list: &[f64],
    cfg: &KernelConfig,
) -> Result<DecayFit> {
    if t_list.len() < MIN_FIT_POINTS {
        return domain(format!("need at least {MIN_FIT_POINTS} times, got {}", t_list.len()));
    }
    let results: Vec<Result<SupEstimate>> = t_list
        .par_iter()
        .map(|&t| sup_scan(d, params, lambda, t, cfg))
        .collect();
    let mut samples = Vec::new();
    let mut unresolved = Vec::new();
    for (t, r) in t_list.iter().zip(results) {
        match r {
            Ok(s) => samples.push(s),
            Err(Error::Unresolved { .. }) => unresolved.push(*t),
            Err(e) => return Err(e),
        }
    }
    if samples.len() < MIN_FIT_POINTS {
        return domain(format!(
            "only {} resolved times, need {MIN_FIT_POINTS}",
            samples.len()
        ));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.t.abs().ln(), s.sup.ln())).collect();
    let (slope, intercept) = least_squares(&pts);
    Ok(DecayFit {
        slope,
        intercept,
        samples,
        unresolved,
    })
}

pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `n` log-spaced times on `[lo, hi]`.
pub fn log_times(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    crate::symbol::log_grid(lo, hi, n)
}
