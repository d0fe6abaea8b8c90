//! Smooth cutoffs and Littlewood–Paley projections.
//!
//! `chi` is the even bump equal to one on `[-1, 1]` and vanishing outside
//! `[-2, 2]`; the transition on `1 < |s| < 2` is the quotient of two
//! `exp(-1/x)` glue functions, so every derivative vanishes at `|s| = 1, 2`.
//! `rho(s) = chi(s) - chi(2s)` lives on `1/2 <= |s| <= 2`, and the dilates
//! `rho(s / 2^j)` telescope to one away from the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// A dyadic frequency scale `lambda = 2^j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicScale {
    j: i32,
}

impl DyadicScale {
    pub fn new(j: i32) -> Self {
        DyadicScale { j }
    }

    /// Accepts only exact powers of two.
    pub fn from_lambda(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
        }
        let j = lambda.log2().round() as i32;
        if 2f64.powi(j) != lambda {
            return Err(Error::Domain(format!("lambda = {lambda} is not a power of two")));
        }
        Ok(DyadicScale { j })
    }

    pub fn exponent(&self) -> i32 {
        self.j
    }

    pub fn lambda(&self) -> f64 {
        2f64.powi(self.j)
    }

    /// The scaled bump `rho(s / lambda)`.
    pub fn rho(&self, s: f64) -> f64 {
        rho(s / self.lambda())
    }
}

/// Shape of the transition of `chi` on `[1, 2]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transition {
    /// `g(2-|s|) / (g(2-|s|) + g(|s|-1))` with `g(x) = exp(-1/x)`.
    #[default]
    ExpGlue,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub transition: Transition,
    /// Tolerance used when testing plateau/support membership.
    pub tolerance: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec {
            transition: Transition::ExpGlue,
            tolerance: 1e-12,
        }
    }
}

fn glue(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

impl CutoffSpec {
    pub fn chi(&self, s: f64) -> f64 {
        let a = s.abs();
        if a <= 1.0 {
            return 1.0;
        }
        if a >= 2.0 {
            return 0.0;
        }
        match self.transition {
            Transition::ExpGlue => {
                let up = glue(2.0 - a);
                let down = glue(a - 1.0);
                up / (up + down)
            }
        }
    }

    pub fn rho(&self, s: f64) -> f64 {
        self.chi(s) - self.chi(2.0 * s)
    }
}

/// `chi` with the default transition.
pub fn chi(s: f64) -> f64 {
    CutoffSpec::default().chi(s)
}

/// `rho(s) = chi(s) - chi(2s)` with the default transition.
pub fn rho(s: f64) -> f64 {
    CutoffSpec::default().rho(s)
}

/// Littlewood–Paley projection: multiplies the coefficient at `xi` by
/// `rho(|xi| / lambda)`.
pub fn project(field: &SpectralField, lambda: DyadicScale) -> SpectralField {
    let lam = lambda.lambda();
    field.map_with_frequency(|xi, c| c * rho(xi.norm() / lam))
}
