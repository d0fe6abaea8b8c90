//! Bessel functions of the first kind for real order `alpha > -1/2`.
//!
//! Up to `r = 50` the Poisson integral
//! `J_a(r) = (r/2)^a / (Gamma(a + 1/2) sqrt(pi)) * int_{-1}^{1} cos(r s) (1 - s^2)^{a - 1/2} ds`
//! is evaluated with the tanh-sinh rule, which absorbs the algebraic weight
//! at `s = +-1`. Beyond that the Hankel asymptotic expansion takes over.

use std::f64::consts::PI;
use std::sync::OnceLock;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, Result};
use crate::quadrature::TanhSinh;

/// Switch-over between the integral and the asymptotic expansion.
pub const ASYMPTOTIC_FROM: f64 = 50.0;

const TILDE_SERIES_BELOW: f64 = 1e-6;
const T_MAX: f64 = 4.0;

fn rules() -> &'static [TanhSinh; 3] {
    static RULES: OnceLock<[TanhSinh; 3]> = OnceLock::new();
    RULES.get_or_init(|| {
        [
            TanhSinh::new(1.0 / 8.0, T_MAX),
            TanhSinh::new(1.0 / 16.0, T_MAX),
            TanhSinh::new(1.0 / 32.0, T_MAX),
        ]
    })
}

/// `J_alpha(r)`.
pub fn bessel_j(alpha: f64, r: f64) -> Result<f64> {
    BesselJ::new(alpha)?.j(r)
}

/// `r^{-alpha} J_alpha(r)`, continuous at the origin.
pub fn bessel_tilde(alpha: f64, r: f64) -> Result<f64> {
    BesselJ::new(alpha)?.tilde(r)
}

/// `J_alpha` for one fixed order, with the quadrature weights
/// `(1 - s^2)^{alpha - 1/2}` tabulated once.
#[derive(Clone, Debug)]
pub struct BesselJ {
    alpha: f64,
    weights: [Vec<f64>; 3],
    // Gamma(alpha + 1/2) sqrt(pi)
    norm: f64,
    // 1 / (2^alpha Gamma(alpha + 1))
    tilde_at_zero: f64,
}

impl BesselJ {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha <= -0.5 || alpha > 100.0 {
            return domain(format!("Bessel order must lie in (-1/2, 100], got {alpha}"));
        }
        let p = 2.0 * alpha - 1.0;
        let weights = rules().each_ref().map(|rule| {
            rule.sech
                .iter()
                .zip(&rule.jacobian)
                .enumerate()
                .map(|(k, (s, j))| {
                    let w = s.powf(p) * j * rule.h;
                    if k == 0 {
                        w
                    } else {
                        2.0 * w
                    }
                })
                .collect()
        });
        Ok(BesselJ {
            alpha,
            weights,
            norm: if alpha < 150.0 {
                gamma(alpha + 0.5) * PI.sqrt()
            } else {
                (ln_gamma(alpha + 0.5) + 0.5 * PI.ln()).exp()
            },
            tilde_at_zero: 1.0 / (2f64.powf(alpha) * gamma(alpha + 1.0)),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `J_alpha(r)`, `r >= 0`.
    pub fn j(&self, r: f64) -> Result<f64> {
        check_arg(r)?;
        Ok(self.j_unchecked(r))
    }

    /// `r^{-alpha} J_alpha(r)`, `r >= 0`.
    pub fn tilde(&self, r: f64) -> Result<f64> {
        check_arg(r)?;
        Ok(self.tilde_unchecked(r))
    }

    pub(crate) fn j_unchecked(&self, r: f64) -> f64 {
        if r == 0.0 {
            return if self.alpha == 0.0 { 1.0 } else { 0.0 };
        }
        if r < ASYMPTOTIC_FROM {
            (r / 2.0).powf(self.alpha) * self.poisson(r) / self.norm
        } else {
            hankel(self.alpha, r)
        }
    }

    pub(crate) fn tilde_unchecked(&self, r: f64) -> f64 {
        if r < TILDE_SERIES_BELOW {
            // first two terms of the power series
            return self.tilde_at_zero * (1.0 - r * r / (4.0 * (self.alpha + 1.0)));
        }
        if r < ASYMPTOTIC_FROM {
            self.poisson(r) / (2f64.powf(self.alpha) * self.norm)
        } else {
            hankel(self.alpha, r) * r.powf(-self.alpha)
        }
    }

    /// `int_{-1}^{1} cos(r s) (1 - s^2)^{alpha - 1/2} ds`.
    fn poisson(&self, r: f64) -> f64 {
        let level = if r > 16.0 {
            2
        } else if r > 4.0 {
            1
        } else {
            0
        };
        let nodes = &rules()[level].abscissae;
        let mut acc = 0.0;
        for (s, w) in nodes.iter().zip(&self.weights[level]).rev() {
            acc += (r * s).cos() * w;
        }
        acc
    }
}

fn check_arg(r: f64) -> Result<()> {
    if r.is_nan() || r < 0.0 {
        return domain(format!("Bessel argument must be >= 0, got {r}"));
    }
    Ok(())
}

/// Hankel's expansion `sqrt(2/(pi r)) (P cos w - Q sin w)`, `w = r - alpha pi/2 - pi/4`.
fn hankel(alpha: f64, r: f64) -> f64 {
    let mu = 4.0 * alpha * alpha;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * r);
        }
        let mag = term.abs();
        if mag > prev {
            break;
        }
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if mag < 1e-17 {
            break;
        }
        prev = mag;
    }
    let w = r - (0.5 * alpha + 0.25) * PI;
    (2.0 / (PI * r)).sqrt() * (p * w.cos() - q * w.sin())
}
