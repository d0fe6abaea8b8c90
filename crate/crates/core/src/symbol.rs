//! The water-wave dispersion symbol
//! `m_beta(r) = sqrt(r (1 + beta r^2) tanh r)` and its derivatives.
//!
//! Derivatives come from Taylor jets. For `r >= 1` the symbol is split as
//! `f_beta(r) * sqrt(tanh r)` with `f_beta(r) = sqrt(r) <sqrt(beta) r>`; the
//! tanh jet is generated by `T' = S^2, S' = -T S` and the two factors are
//! combined by the Leibniz rule. Below `r = 1` that split loses digits (both
//! factors are singular at the origin while `m_beta` is analytic), so there
//! the symbol is written as `r * sqrt((1 + beta r^2) tanh(r) / r)` with the
//! even Maclaurin series of `tanh(r)/r`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicScale;
use crate::error::{domain, Error, Result};
use crate::jet::Jet;

/// Largest derivative order served by [`eval_m_derivative`].
pub const MAX_DERIVATIVE: usize = 6;

const SERIES_SPLIT: f64 = 1.0;
const TANH_SERIES_TERMS: usize = 96;

/// Japanese bracket `<x> = (1 + x^2)^(1/2)`.
pub fn bracket(x: f64) -> f64 {
    1f64.hypot(x)
}

/// Surface-tension switch: `0` for pure gravity waves, `1` for
/// capillary-gravity waves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Beta {
    Zero,
    One,
}

impl Beta {
    pub fn value(self) -> f64 {
        match self {
            Beta::Zero => 0.0,
            Beta::One => 1.0,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Beta::Zero => 0,
            Beta::One => 1,
        }
    }

    pub const ALL: [Beta; 2] = [Beta::Zero, Beta::One];
}

impl TryFrom<u8> for Beta {
    type Error = Error;
    fn try_from(b: u8) -> Result<Self> {
        match b {
            0 => Ok(Beta::Zero),
            1 => Ok(Beta::One),
            other => Err(Error::Domain(format!("beta must be 0 or 1, got {other}"))),
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for Beta {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let b = u8::deserialize(d)?;
        Beta::try_from(b).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolParams {
    pub beta: Beta,
}

impl SymbolParams {
    pub fn new(beta: Beta) -> Self {
        SymbolParams { beta }
    }

    pub fn gravity() -> Self {
        Self::new(Beta::Zero)
    }

    pub fn capillary() -> Self {
        Self::new(Beta::One)
    }

    fn b(&self) -> f64 {
        self.beta.value()
    }
}

/// `m_beta(r)`; zero at the origin, domain error for negative `r`.
pub fn eval_m(params: SymbolParams, r: f64) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return domain(format!("m_beta needs r >= 0, got {r}"));
    }
    Ok(m_unchecked(params.b(), r))
}

#[inline]
pub(crate) fn m_unchecked(beta: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    if r < 1e-4 {
        // keeps r * tanh r from underflowing for tiny r
        let k = tanh_over_x(r);
        return r * (k * (1.0 + beta * r * r)).sqrt();
    }
    (r * (1.0 + beta * r * r) * r.tanh()).sqrt()
}

fn tanh_over_x(r: f64) -> f64 {
    if r < 1e-4 {
        let r2 = r * r;
        1.0 - r2 / 3.0 + 2.0 * r2 * r2 / 15.0
    } else {
        r.tanh() / r
    }
}

/// `k`-th derivative of `m_beta` at `r > 0`, `1 <= k <= 6`.
pub fn eval_m_derivative(params: SymbolParams, r: f64, k: usize) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("derivative needs r > 0, got {r}"));
    }
    if !(1..=MAX_DERIVATIVE).contains(&k) {
        return domain(format!("derivative order must be in 1..=6, got {k}"));
    }
    Ok(m_jet(params.b(), r).derivative(k))
}

/// `[m(r), m'(r), ..., m^(6)(r)]`.
pub fn eval_m_derivatives(params: SymbolParams, r: f64) -> Result<[f64; MAX_DERIVATIVE + 1]> {
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("derivative needs r > 0, got {r}"));
    }
    let jet = m_jet(params.b(), r);
    let mut out = [0.0; MAX_DERIVATIVE + 1];
    for (k, o) in out.iter_mut().enumerate() {
        *o = jet.derivative(k);
    }
    Ok(out)
}

/// First derivative without validation; `r > 0`.
pub(crate) fn m_prime_unchecked(beta: f64, r: f64) -> f64 {
    m_jet(beta, r).0[1]
}

pub(crate) fn m_jet(beta: f64, r: f64) -> Jet {
    if r >= SERIES_SPLIT {
        factored_jet(beta, r)
    } else {
        series_jet(beta, r)
    }
}

fn factored_jet(beta: f64, r: f64) -> Jet {
    let (tanh, _sech) = Jet::tanh_sech(r);
    let t0 = tanh.sqrt();
    let f = if beta == 0.0 {
        Jet::power_of_variable(r, 0.5)
    } else {
        // sqrt(r) <r> = r^{3/2} sqrt(1 + r^{-2}), cancellation-free for r >= 1
        let tail = Jet::constant(1.0) + Jet::power_of_variable(r, -2.0);
        Jet::power_of_variable(r, 1.5) * tail.sqrt()
    };
    f * t0
}

/// Maclaurin coefficients `a_j` of `tanh(x)/x = sum_j a_j x^{2j}`,
/// `a_j = (-1)^j 2 (4^{j+1} - 1) zeta(2j+2) / pi^{2j+2}`.
fn tanh_series() -> &'static [f64; TANH_SERIES_TERMS] {
    static COEFFS: OnceLock<[f64; TANH_SERIES_TERMS]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut a = [0.0; TANH_SERIES_TERMS];
        for (j, slot) in a.iter_mut().enumerate() {
            let n = (j + 1) as i32;
            let four_over_pi2 = (4.0 / (PI * PI)).powi(n);
            let inv_pi2 = (PI * PI).recip().powi(n);
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *slot = sign * 2.0 * zeta_even(2 * n) * (four_over_pi2 - inv_pi2);
        }
        a
    })
}

fn zeta_even(s: i32) -> f64 {
    match s {
        2 => PI * PI / 6.0,
        4 => PI.powi(4) / 90.0,
        6 => PI.powi(6) / 945.0,
        _ => {
            let mut acc = 0.0;
            for k in (1..=64).rev() {
                acc += (k as f64).powi(-s);
            }
            acc + 64.5f64.powi(1 - s) / (s - 1) as f64
        }
    }
}

fn series_jet(beta: f64, r: f64) -> Jet {
    let a = tanh_series();
    // terms decay like (2r/pi)^{2j}; keep those that can reach 1e-20 after
    // seven differentiations
    let x = (2.0 * r / PI).powi(2);
    let mut terms = 1;
    let mut size = 1.0;
    while terms < TANH_SERIES_TERMS && size * ((2 * terms + 1) as f64).powi(7) > 1e-20 {
        size *= x;
        terms += 1;
    }
    // Taylor shift of the even polynomial to r by repeated synthetic division
    let mut poly = vec![0.0; 2 * terms - 1];
    for (j, &aj) in a.iter().take(terms).enumerate() {
        poly[2 * j] = aj;
    }
    let mut k = [0.0; crate::jet::ORDER];
    for slot in k.iter_mut() {
        let mut acc = 0.0;
        for c in poly.iter_mut().rev() {
            acc = acc * r + *c;
            *c = acc;
        }
        *slot = poly[0];
        poly.remove(0);
        if poly.is_empty() {
            break;
        }
    }
    let mut one_plus = [0.0; crate::jet::ORDER];
    one_plus[0] = 1.0 + beta * r * r;
    one_plus[1] = 2.0 * beta * r;
    one_plus[2] = beta;
    let q = Jet(one_plus) * Jet(k);
    Jet::variable(r) * q.sqrt()
}

/// `c_{beta,d}(lambda) = lambda^{d/2-1} <sqrt(beta) lambda>^{-d/2} <lambda>^{d/4+1}`.
pub fn c_coeff(params: SymbolParams, d: usize, lambda: DyadicScale) -> f64 {
    let l = lambda.lambda();
    let df = d as f64;
    l.powf(df / 2.0 - 1.0)
        * bracket(params.b().sqrt() * l).powf(-df / 2.0)
        * bracket(l).powf(df / 4.0 + 1.0)
}

/// Which comparability claim a scan measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantity {
    /// `m ~ r <sqrt(b) r> <r>^{-1/2}`
    M,
    /// `m' ~ <sqrt(b) r> <r>^{-1/2}`
    MPrime,
    /// `|m''| ~ r <sqrt(b) r> <r>^{-5/2}`
    MSecond,
    /// `|m^(k)| <~ r^{1-k} <sqrt(b) r> <r>^{-1/2}`, `3 <= k <= 6`
    MK(usize),
    /// `max_{r in [1/2,2]} |d_r^k (1 / m'_{b,lambda})| <~ lambda^{-1} <sqrt(b) lambda>^{-1} <lambda>^{1/2}`;
    /// the grid holds `lambda` values, `0 <= k <= 5`.
    InvMPrimeK(usize),
}

/// Whether a claim is two-sided (`~`) or one-sided (`<~`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    Comparable,
    Bounded,
}

impl Quantity {
    pub fn claim(&self) -> Claim {
        match self {
            Quantity::M | Quantity::MPrime | Quantity::MSecond => Claim::Comparable,
            Quantity::MK(_) | Quantity::InvMPrimeK(_) => Claim::Bounded,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Quantity::MK(k) if !(3..=6).contains(&k) => {
                domain(format!("m_k needs 3 <= k <= 6, got {k}"))
            }
            Quantity::InvMPrimeK(k) if k > 5 => {
                domain(format!("inv_mprime_k needs k <= 5, got {k}"))
            }
            _ => Ok(()),
        }
    }

    /// Every quantity the scan understands.
    pub fn all() -> Vec<Quantity> {
        let mut v = vec![Quantity::M, Quantity::MPrime, Quantity::MSecond];
        v.extend((3..=6).map(Quantity::MK));
        v.extend((0..=5).map(Quantity::InvMPrimeK));
        v
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::M => write!(f, "m"),
            Quantity::MPrime => write!(f, "m_prime"),
            Quantity::MSecond => write!(f, "m_second"),
            Quantity::MK(k) => write!(f, "m_k{k}"),
            Quantity::InvMPrimeK(k) => write!(f, "inv_mprime_k{k}"),
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let q = match s {
            "m" => Quantity::M,
            "m_prime" => Quantity::MPrime,
            "m_second" => Quantity::MSecond,
            _ => {
                if let Some(k) = s.strip_prefix("inv_mprime_k") {
                    Quantity::InvMPrimeK(parse_order(k, s)?)
                } else if let Some(k) = s.strip_prefix("m_k") {
                    Quantity::MK(parse_order(k, s)?)
                } else {
                    return Err(Error::Config(format!("unknown quantity '{s}'")));
                }
            }
        };
        q.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(q)
    }
}

fn parse_order(k: &str, whole: &str) -> Result<usize> {
    k.parse()
        .map_err(|_| Error::Config(format!("unknown quantity '{whole}'")))
}

impl Serialize for Quantity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Measured ratios of a symbol quantity to its comparator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub quantity: Quantity,
    pub beta: Beta,
    pub claim: Claim,
    pub r_grid: Vec<f64>,
    pub ratios: Vec<f64>,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

impl BoundReport {
    /// `ratio_max / ratio_min`; meaningful for two-sided claims.
    pub fn spread(&self) -> f64 {
        self.ratio_max / self.ratio_min
    }

    /// Checks the report against the frozen envelope of its claim.
    pub fn within(&self, bound: &FrozenBound) -> bool {
        let finite = self.ratio_min.is_finite() && self.ratio_max.is_finite();
        match self.claim {
            Claim::Comparable => {
                finite
                    && self.ratio_min > 0.0
                    && self.spread() <= bound.max_spread
                    && self.ratio_max <= bound.max_ratio
            }
            Claim::Bounded => finite && self.ratio_max <= bound.max_ratio,
        }
    }
}

/// Recorded envelope for one claim.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrozenBound {
    pub max_ratio: f64,
    pub max_spread: f64,
}

/// Envelopes measured over `r in [1e-4, 1e4]` (and `lambda` in the same
/// range for the inverse-derivative claims), with 2x headroom on the ratio
/// maxima. The spread cap for two-sided claims is 10.
pub fn frozen_bound(beta: Beta, quantity: Quantity) -> FrozenBound {
    use Quantity::*;
    let max_ratio = match (beta, quantity) {
        (Beta::Zero, M) => 2.0 * 1.05,
        (Beta::Zero, MPrime) => 2.0 * 1.0,
        (Beta::Zero, MSecond) => 2.0 * 1.03,
        (Beta::Zero, MK(3)) => 2.0 * 1.04,
        (Beta::Zero, MK(4)) => 2.0 * 3.12,
        (Beta::Zero, MK(5)) => 2.0 * 12.7,
        (Beta::Zero, MK(6)) => 2.0 * 64.8,
        (Beta::Zero, InvMPrimeK(0)) => 2.0 * 2.83,
        (Beta::Zero, InvMPrimeK(1)) => 2.0 * 2.01,
        (Beta::Zero, InvMPrimeK(2)) => 2.0 * 3.86,
        (Beta::Zero, InvMPrimeK(3)) => 2.0 * 19.2,
        (Beta::Zero, InvMPrimeK(4)) => 2.0 * 181.0,
        (Beta::Zero, InvMPrimeK(5)) => 2.0 * 2240.0,
        (Beta::One, M) => 2.0 * 1.05,
        (Beta::One, MPrime) => 2.0 * 1.5,
        (Beta::One, MSecond) => 2.0 * 2.0,
        (Beta::One, MK(3)) => 2.0 * 0.39,
        (Beta::One, MK(4)) => 2.0 * 0.92,
        (Beta::One, MK(5)) => 2.0 * 3.74,
        (Beta::One, MK(6)) => 2.0 * 19.4,
        (Beta::One, InvMPrimeK(0)) => 2.0 * 1.0,
        (Beta::One, InvMPrimeK(1)) => 2.0 * 0.98,
        (Beta::One, InvMPrimeK(2)) => 2.0 * 2.96,
        (Beta::One, InvMPrimeK(3)) => 2.0 * 15.0,
        (Beta::One, InvMPrimeK(4)) => 2.0 * 106.0,
        (Beta::One, InvMPrimeK(5)) => 2.0 * 1088.0,
        _ => f64::INFINITY,
    };
    FrozenBound {
        max_ratio,
        max_spread: 10.0,
    }
}

fn comparator(beta: f64, q: Quantity, r: f64) -> f64 {
    let sb = bracket(beta.sqrt() * r);
    let br = bracket(r);
    match q {
        Quantity::M => r * sb / br.sqrt(),
        Quantity::MPrime => sb / br.sqrt(),
        Quantity::MSecond => r * sb * br.powf(-2.5),
        Quantity::MK(k) => r.powi(1 - k as i32) * sb / br.sqrt(),
        Quantity::InvMPrimeK(_) => br.sqrt() / (r * sb),
    }
}

/// `max_{r in [1/2, 2]} |d_r^k (1 / m'(lambda r))|`, sampled on 129 points.
fn inv_mprime_max(beta: f64, lambda: f64, k: usize) -> f64 {
    let mut best: f64 = 0.0;
    let samples = 129;
    for i in 0..samples {
        let r = 0.5 + 1.5 * i as f64 / (samples - 1) as f64;
        let mj = m_jet(beta, lambda * r);
        // jet of g(h) = m'(lambda (r + h)): g_n = lambda^{n+1} (n+1) m_{n+1}
        let mut g = [0.0; crate::jet::ORDER];
        let mut lp = lambda;
        for (n, slot) in g.iter_mut().take(crate::jet::ORDER - 1).enumerate() {
            *slot = lp * (n + 1) as f64 * mj.0[n + 1];
            lp *= lambda;
        }
        let inv = Jet(g).recip();
        best = best.max(inv.derivative(k).abs());
    }
    best
}

/// Ratio of the selected quantity to its comparator at every grid point.
pub fn comparability_scan(
    params: SymbolParams,
    quantity: Quantity,
    r_grid: &[f64],
) -> Result<BoundReport> {
    quantity.validate()?;
    if r_grid.is_empty() {
        return domain("empty grid");
    }
    for w in r_grid.windows(2) {
        if w[1] <= w[0] {
            return domain("grid must be strictly increasing");
        }
    }
    if r_grid[0] <= 0.0 || !r_grid[r_grid.len() - 1].is_finite() {
        return domain("grid entries must lie in (0, inf)");
    }
    let b = params.b();
    let ratios: Vec<f64> = r_grid
        .iter()
        .map(|&r| {
            let value = match quantity {
                Quantity::M => m_unchecked(b, r),
                Quantity::MPrime => m_jet(b, r).derivative(1),
                Quantity::MSecond => m_jet(b, r).derivative(2).abs(),
                Quantity::MK(k) => m_jet(b, r).derivative(k).abs(),
                Quantity::InvMPrimeK(k) => inv_mprime_max(b, r, k),
            };
            value / comparator(b, quantity, r)
        })
        .collect();
    let ratio_min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio_max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(BoundReport {
        quantity,
        beta: params.beta,
        claim: quantity.claim(),
        r_grid: r_grid.to_vec(),
        ratios,
        ratio_min,
        ratio_max,
    })
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}
