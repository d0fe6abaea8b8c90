//! Space-time norms of the free flow of frequency-localized data and probes
//! of the bilinear estimates behind the Whitham-Boussinesq well-posedness
//! argument.

use num_complex::Complex64;
use num_rational::Ratio;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{project, rho, DyadicScale};
use crate::error::{domain, Error, Result};
use crate::spectral::{
    mixed_norm, riesz, riesz_dot, sample_times, Exponent, GridSpec, MixedNormSpec,
    Multiplier, SpectralField, VectorField,
};
use crate::symbol::{bracket, c_coeff, m_unchecked, Beta, SymbolParams};

/// An exponent kept as an exact rational, `None` meaning infinity.
pub type RationalExponent = Option<Ratio<i64>>;

/// `q > 2`, `r >= 2` and `2/q + d/r = d/2`, checked in exact arithmetic.
pub fn admissible(d: usize, q: RationalExponent, r: RationalExponent) -> bool {
    let two = Ratio::from_integer(2);
    let inv = |p: RationalExponent| p.map(|p| p.recip()).unwrap_or_else(|| Ratio::from_integer(0));
    let q_ok = q.is_none_or(|q| q > two);
    let r_ok = r.is_none_or(|r| r >= two);
    if !(q_ok && r_ok) {
        return false;
    }
    let d = Ratio::from_integer(d as i64);
    two * inv(q) + d * inv(r) == d / two
}

/// Rational form of a floating exponent (exact for dyadic and short decimal values).
pub fn to_rational(p: Exponent) -> Result<RationalExponent> {
    if p.is_infinite() {
        return Ok(None);
    }
    let v = p.value();
    for den in [1i64, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 16, 20, 25, 32, 50, 64, 100, 1000] {
        let num = (v * den as f64).round();
        if (num / den as f64 - v).abs() <= 1e-12 * v.abs().max(1.0) {
            return Ok(Some(Ratio::new(num as i64, den)));
        }
    }
    Ratio::approximate_float(v)
        .map(Some)
        .ok_or_else(|| Error::Domain(format!("exponent {v} has no rational form")))
}

/// `[c_{beta,d}(lambda)]^{2/(q d)}`.
pub fn prefactor(params: SymbolParams, d: usize, lambda: DyadicScale, q: Exponent) -> f64 {
    c_coeff(params, d, lambda).powf(2.0 * q.reciprocal() / d as f64)
}

/// Complex Gaussian coefficients on the support of `rho(|xi|/lambda)`,
/// then projected with `P_lambda`.
pub fn random_localized(grid: GridSpec, lambda: DyadicScale, rng: &mut impl Rng) -> SpectralField {
    let lam = lambda.lambda();
    let mut f = SpectralField::zeros(grid);
    for i in 0..grid.size() {
        let xi = grid.frequency(i).norm();
        if rho(xi / lam) > 0.0 {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            f.coeffs_mut()[i] = Complex64::new(re, im);
        }
    }
    project(&f, lambda)
}

/// Parameters of a homogeneous Strichartz measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrichartzSetup {
    pub d: usize,
    pub beta: Beta,
    pub lambda: DyadicScale,
    pub q: Exponent,
    pub r: Exponent,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n_t: usize,
}

impl StrichartzSetup {
    fn norm_spec(&self) -> MixedNormSpec {
        MixedNormSpec {
            q: self.q,
            r: self.r,
            horizon: self.horizon,
            n_t: self.n_t,
        }
    }

    fn check(&self) -> Result<()> {
        if !admissible(self.d, to_rational(self.q)?, to_rational(self.r)?) {
            return domain(format!(
                "(q, r) = ({}, {}) is not admissible in d = {}",
                self.q, self.r, self.d
            ));
        }
        self.norm_spec().validate()
    }
}

/// Free trajectory `S(+t_k) f` at the sample times of `spec`.
pub fn free_trajectory(f: &SpectralField, beta: Beta, spec: &MixedNormSpec) -> Vec<SpectralField> {
    // the symbol is evaluated once, on the nonzero modes only
    let b = beta.value();
    let support: Vec<(usize, f64)> = f
        .coeffs()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
        .map(|(i, _)| (i, m_unchecked(b, f.grid().frequency(i).norm())))
        .collect();
    sample_times(spec)
        .into_iter()
        .map(|t| {
            let mut g = SpectralField::zeros(*f.grid());
            let out = g.coeffs_mut();
            for &(i, m) in &support {
                out[i] = f.coeffs()[i] * Complex64::from_polar(1.0, -t * m);
            }
            g
        })
        .collect()
}

/// `||S(t) P_lambda f||_{L^q_T L^r} / ([c]^{2/(qd)} ||P_lambda f||_{L^2})` for one sample.
pub fn sample_ratio(setup: &StrichartzSetup, sample: &SpectralField) -> Result<f64> {
    setup.check()?;
    if sample.grid().d != setup.d {
        return Err(Error::GridMismatch(format!(
            "sample grid has d = {}, setup has d = {}",
            sample.grid().d,
            setup.d
        )));
    }
    let f = project(sample, setup.lambda);
    let l2 = f.l2_norm();
    if l2 == 0.0 {
        return domain("sample has no mass on the dyadic annulus");
    }
    let spec = setup.norm_spec();
    let traj = free_trajectory(&f, setup.beta, &spec);
    let num = mixed_norm(&traj, &spec)?;
    let params = SymbolParams::new(setup.beta);
    Ok(num / (prefactor(params, setup.d, setup.lambda, setup.q) * l2))
}

/// Largest [`sample_ratio`] over the samples.
pub fn strichartz_ratio(setup: &StrichartzSetup, samples: &[SpectralField]) -> Result<f64> {
    if samples.is_empty() {
        return domain("no samples");
    }
    setup.check()?;
    let ratios: Vec<Result<f64>> = samples.par_iter().map(|s| sample_ratio(setup, s)).collect();
    let mut best: f64 = 0.0;
    for r in ratios {
        best = best.max(r?);
    }
    Ok(best)
}

/// True when the largest two of the three scales are within a factor 4.
pub fn in_lambda_set(l0: DyadicScale, l1: DyadicScale, l2: DyadicScale) -> bool {
    let mut j = [l0.exponent(), l1.exponent(), l2.exponent()];
    j.sort_unstable();
    j[2] - j[1] <= 2
}

/// Space exponent `r = 2qd / (qd - 4)` paired with `q`; needs `q d > 4`.
pub fn paired_r(d: usize, q: f64) -> Result<f64> {
    let qd = q * d as f64;
    if !(q > 2.0 && qd > 4.0) {
        return domain(format!("need q > 2 and q d > 4, got q = {q}, d = {d}"));
    }
    Ok(2.0 * qd / (qd - 4.0))
}

/// `||u||_{X_lambda} = (||P u||^2_{L^inf L^2} + <lambda>^{-3/q} ||P u||^2_{L^q L^r})^{1/2}`
/// with `r` from [`paired_r`].
pub fn x_lambda_norm(
    trajectory: &[SpectralField],
    lambda: DyadicScale,
    q: f64,
    horizon: f64,
) -> Result<f64> {
    let first = trajectory
        .first()
        .ok_or_else(|| Error::Domain("empty trajectory".into()))?;
    let d = first.grid().d;
    let r = paired_r(d, q)?;
    let projected: Vec<SpectralField> = trajectory.iter().map(|f| project(f, lambda)).collect();
    let energy = mixed_norm(
        &projected,
        &MixedNormSpec {
            q: Exponent::infinity(),
            r: Exponent::new(2.0)?,
            horizon,
            n_t: trajectory.len(),
        },
    )?;
    let strichartz = mixed_norm(
        &projected,
        &MixedNormSpec {
            q: Exponent::new(q)?,
            r: Exponent::new(r)?,
            horizon,
            n_t: trajectory.len(),
        },
    )?;
    let weight = bracket(lambda.lambda()).powf(-3.0 / q);
    Ok((energy * energy + weight * strichartz * strichartz).sqrt())
}

/// Which of the two bilinear forms is probed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// `|D| K P_0 R.(u R sqrt(K) v)`
    One,
    /// `|D| sqrt(K) P_0 (R sqrt(K) u . R sqrt(K) v)`
    Two,
}

impl TryFrom<u8> for Variant {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Variant::One),
            2 => Ok(Variant::Two),
            _ => Err(Error::Config(format!("bilinear variant must be 1 or 2, got {v}"))),
        }
    }
}

fn pointwise_vector_product(u: &SpectralField, v: &VectorField) -> Result<VectorField> {
    let comps = v
        .components()
        .iter()
        .map(|c| u.product(c))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(comps)
}

fn dot_product(a: &VectorField, b: &VectorField) -> Result<SpectralField> {
    let mut acc = SpectralField::zeros(*a.grid());
    for (x, y) in a.components().iter().zip(b.components()) {
        acc = &acc + &x.product(y)?;
    }
    Ok(acc)
}

/// The bilinear expression at one time, before the outer `P_{lambda_0}`.
/// `u` and `v` are used as given (callers localize them).
pub fn bilinear_unprojected(variant: Variant, u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.check_grid(v)?;
    match variant {
        Variant::One => {
            let rv = riesz(&Multiplier::SqrtK.apply(v));
            let prod = pointwise_vector_product(u, &rv)?;
            let div = riesz_dot(&prod);
            Ok(Multiplier::AbsD.apply(&Multiplier::K.apply(&div)))
        }
        Variant::Two => {
            let ru = riesz(&Multiplier::SqrtK.apply(u));
            let rv = riesz(&Multiplier::SqrtK.apply(v));
            let dot = dot_product(&ru, &rv)?;
            Ok(Multiplier::AbsD.apply(&Multiplier::SqrtK.apply(&dot)))
        }
    }
}

/// `P_{lambda_0}` applied to [`bilinear_unprojected`] of `P_{lambda_1} u`, `P_{lambda_2} v`.
pub fn bilinear_projected(
    variant: Variant,
    lambdas: [DyadicScale; 3],
    u: &SpectralField,
    v: &SpectralField,
) -> Result<SpectralField> {
    let [l0, l1, l2] = lambdas;
    let b = bilinear_unprojected(variant, &project(u, l1), &project(v, l2))?;
    Ok(project(&b, l0))
}

/// Parameters of a bilinear probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BilinearSetup {
    pub variant: Variant,
    pub lambdas: [DyadicScale; 3],
    pub q: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n_t: usize,
}

/// Right-hand side factor in front of `||u||_{X_1} ||v||_{X_2}`.
pub fn bilinear_rhs_factor(setup: &BilinearSetup, d: usize) -> f64 {
    let [l0, l1, l2] = setup.lambdas.map(|l| bracket(l.lambda()));
    let q = setup.q;
    let base = setup.horizon.powf(1.0 - 1.0 / q) * l1.min(l2).powf(d as f64 / 2.0 - 0.5 / q);
    match setup.variant {
        Variant::One => base / l2.sqrt(),
        Variant::Two => base * l0.sqrt() / (l1.sqrt() * l2.sqrt()),
    }
}

/// Largest `LHS / RHS` over sample pairs, with `u`, `v` evolved by the free
/// flow `S(+t)`. LHS is the `L^1_T L^2` norm of [`bilinear_projected`].
pub fn bilinear_ratio(
    setup: &BilinearSetup,
    u_samples: &[SpectralField],
    v_samples: &[SpectralField],
) -> Result<f64> {
    let [l0, l1, l2] = setup.lambdas;
    if !in_lambda_set(l0, l1, l2) {
        return Err(Error::OutsideLambda(l0.lambda(), l1.lambda(), l2.lambda()));
    }
    if u_samples.is_empty() || u_samples.len() != v_samples.len() {
        return domain("need equally many, and at least one, u and v samples");
    }
    let d = u_samples[0].grid().d;
    paired_r(d, setup.q)?;
    let spec = MixedNormSpec {
        q: Exponent::new(1.0)?,
        r: Exponent::new(2.0)?,
        horizon: setup.horizon,
        n_t: setup.n_t,
    };
    spec.validate()?;
    let factor = bilinear_rhs_factor(setup, d);
    let ratios: Vec<Result<f64>> = u_samples
        .par_iter()
        .zip(v_samples.par_iter())
        .map(|(u, v)| {
            let ut = free_trajectory(&project(u, l1), Beta::Zero, &spec);
            let vt = free_trajectory(&project(v, l2), Beta::Zero, &spec);
            let lhs_traj = ut
                .iter()
                .zip(&vt)
                .map(|(a, b)| bilinear_projected(setup.variant, setup.lambdas, a, b))
                .collect::<Result<Vec<_>>>()?;
            let lhs = mixed_norm(&lhs_traj, &spec)?;
            let xu = x_lambda_norm(&ut, l1, setup.q, setup.horizon)?;
            let xv = x_lambda_norm(&vt, l2, setup.q, setup.horizon)?;
            Ok(lhs / (factor * xu * xv))
        })
        .collect();
    let mut best: f64 = 0.0;
    for r in ratios {
        best = best.max(r?);
    }
    Ok(best)
}
