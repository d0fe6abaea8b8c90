use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Frequency, GridSpec, SpectralField};
use crate::error::{Error, Result};
use crate::symbol::{bracket, m_unchecked, Beta};

/// Fourier multipliers acting on torus fields.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Multiplier {
    /// `m_beta(|xi|)`
    M(Beta),
    /// `L_beta = sqrt((1 + beta |xi|^2) K)`
    L(Beta),
    /// `K = tanh|xi| / |xi|`
    K,
    /// `sqrt(K)`
    SqrtK,
    /// `|xi|`
    AbsD,
    /// `<xi>^s`
    Bracket(f64),
    /// Riesz component `i xi_j / |xi|`. Zero at the origin and on the
    /// unpaired Nyquist mode of axis `j`, where an odd symbol has no
    /// real-preserving value.
    Riesz(usize),
}

/// `tanh(x) / x`, equal to one at the origin.
pub(crate) fn k_symbol(x: f64) -> f64 {
    if x < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 3.0 + 2.0 * x2 * x2 / 15.0
    } else {
        x.tanh() / x
    }
}

impl Multiplier {
    /// Symbol value at a lattice frequency.
    pub fn value(&self, f: &Frequency) -> Complex64 {
        let r = f.norm();
        let real = |x: f64| Complex64::new(x, 0.0);
        match *self {
            Multiplier::M(b) => real(m_unchecked(b.value(), r)),
            Multiplier::L(b) => real(((1.0 + b.value() * r * r) * k_symbol(r)).sqrt()),
            Multiplier::K => real(k_symbol(r)),
            Multiplier::SqrtK => real(k_symbol(r).sqrt()),
            Multiplier::AbsD => real(r),
            Multiplier::Bracket(s) => real(bracket(r).powf(s)),
            Multiplier::Riesz(j) => {
                if r == 0.0 || j >= f.d || f.is_nyquist(j) {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(0.0, f.xi[j] / r)
                }
            }
        }
    }

    pub fn apply(&self, field: &SpectralField) -> SpectralField {
        field.map_with_frequency(|f, c| c * self.value(f))
    }

    /// Parses `m`, `L`, `K`, `sqrtK`, `absD`, `bracket:<s>` or `riesz:<j>`;
    /// `beta` is used by `m` and `L`.
    pub fn parse(name: &str, beta: Beta) -> Result<Self> {
        let m = match name {
            "m" => Multiplier::M(beta),
            "L" => Multiplier::L(beta),
            "K" => Multiplier::K,
            "sqrtK" => Multiplier::SqrtK,
            "absD" => Multiplier::AbsD,
            _ => {
                if let Some(s) = name.strip_prefix("bracket:") {
                    Multiplier::Bracket(s.parse().map_err(|_| unknown(name))?)
                } else if let Some(j) = name.strip_prefix("riesz:") {
                    Multiplier::Riesz(j.parse().map_err(|_| unknown(name))?)
                } else {
                    return Err(unknown(name));
                }
            }
        };
        Ok(m)
    }
}

fn unknown(name: &str) -> Error {
    Error::Config(format!("unknown multiplier '{name}'"))
}

impl FromStr for Multiplier {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Multiplier::parse(s, Beta::Zero)
    }
}

/// Direction of the free flow: `S(+t) = exp(-i t m)`, `S(-t) = exp(+i t m)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// Multiplies the coefficient at `xi` by `exp(-/+ i t m_beta(|xi|))`.
pub fn propagate(field: &SpectralField, beta: Beta, sign: Sign, t: f64) -> SpectralField {
    let b = beta.value();
    let s = sign.value();
    field.map_with_frequency(|f, c| {
        let phase = -s * t * m_unchecked(b, f.norm());
        c * Complex64::from_polar(1.0, phase)
    })
}

/// A `d`-component field on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<SpectralField>,
}

impl VectorField {
    pub fn new(components: Vec<SpectralField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Config("vector field needs a component".into()))?;
        if components.len() != first.grid().d {
            return Err(Error::GridMismatch(format!(
                "{} components on a {}-d grid",
                components.len(),
                first.grid().d
            )));
        }
        for c in &components[1..] {
            first.check_grid(c)?;
        }
        Ok(VectorField { components })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        VectorField {
            components: vec![SpectralField::zeros(grid); grid.d],
        }
    }

    pub fn components(&self) -> &[SpectralField] {
        &self.components
    }

    pub fn grid(&self) -> &GridSpec {
        self.components[0].grid()
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> Self {
        VectorField {
            components: self.components.iter().map(f).collect(),
        }
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.sobolev_norm(s).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn reality_defect(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.reality_defect())
            .fold(0.0, f64::max)
    }
}

/// `R f = (R_1 f, ..., R_d f)`.
pub fn riesz(field: &SpectralField) -> VectorField {
    let d = field.grid().d;
    VectorField {
        components: (0..d).map(|j| Multiplier::Riesz(j).apply(field)).collect(),
    }
}

/// `R . v = sum_j R_j v_j`.
pub fn riesz_dot(v: &VectorField) -> SpectralField {
    let grid = *v.grid();
    let coeffs = (0..grid.size())
        .map(|i| {
            let f = grid.frequency(i);
            v.components
                .iter()
                .enumerate()
                .map(|(j, c)| c.coeffs()[i] * Multiplier::Riesz(j).value(&f))
                .sum()
        })
        .collect();
    SpectralField::from_coeffs(grid, coeffs).expect("component grid is valid")
}

/// Largest coefficient of `xi_1 v_2 - xi_2 v_1`; zero in one dimension.
pub fn curl_defect(v: &VectorField) -> f64 {
    if v.components.len() < 2 {
        return 0.0;
    }
    let grid = *v.grid();
    (0..grid.size())
        .map(|i| {
            let f = grid.frequency(i);
            (v.components[1].coeffs()[i] * f.xi[0] - v.components[0].coeffs()[i] * f.xi[1]).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn k_at_zero_is_identity() {
        let g = GridSpec::new(1, 16, 2.0 * PI).unwrap();
        let f = SpectralField::single_mode(g, [0, 0], one()).unwrap();
        assert_eq!(Multiplier::K.apply(&f), f);
        assert_eq!(Multiplier::L(Beta::One).apply(&f), f);
        assert_eq!(Multiplier::AbsD.apply(&f).l2_norm(), 0.0);
        assert_eq!(Multiplier::M(Beta::Zero).apply(&f).l2_norm(), 0.0);
        assert_eq!(Multiplier::Riesz(0).apply(&f).l2_norm(), 0.0);
    }

    #[test]
    fn abs_d_scales_single_mode() {
        let g = GridSpec::new(2, 16, PI).unwrap();
        let f = SpectralField::single_mode(g, [3, -4], one()).unwrap();
        let h = Multiplier::AbsD.apply(&f);
        assert!((h.coeff([3, -4]).re - 10.0).abs() < 1e-13);
    }

    #[test]
    fn l0_squared_is_k() {
        let g = GridSpec::new(1, 32, 5.0).unwrap();
        for i in 0..g.size() {
            let f = g.frequency(i);
            let l = Multiplier::L(Beta::Zero).value(&f).re;
            let k = Multiplier::K.value(&f).re;
            assert!((l * l - k).abs() < 1e-15);
            // m_0 = |D| sqrt(K)
            let m = Multiplier::M(Beta::Zero).value(&f).re;
            assert!((m - f.norm() * k.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!(Multiplier::parse("K", Beta::Zero).unwrap(), Multiplier::K);
        assert_eq!(
            Multiplier::parse("bracket:1.5", Beta::Zero).unwrap(),
            Multiplier::Bracket(1.5)
        );
        assert_eq!(Multiplier::parse("riesz:1", Beta::Zero).unwrap(), Multiplier::Riesz(1));
        assert_eq!(Multiplier::parse("m", Beta::One).unwrap(), Multiplier::M(Beta::One));
        assert!(Multiplier::parse("laplace", Beta::Zero).is_err());
    }

    #[test]
    fn propagate_identity_at_zero_time() {
        let g = GridSpec::new(1, 16, 7.0).unwrap();
        let f = SpectralField::from_fn(g, |x| Complex64::new(x[0].sin(), x[0].cos())).unwrap();
        assert_eq!(propagate(&f, Beta::Zero, Sign::Plus, 0.0), f);
    }

    #[test]
    fn curl_of_gradient_vanishes() {
        let g = GridSpec::new(2, 16, 2.0 * PI).unwrap();
        let phi = SpectralField::from_fn(g, |x| Complex64::new((x[0] + x[1]).sin() + (2.0 * x[1]).cos(), 0.0)).unwrap();
        let v = riesz(&phi);
        assert!(curl_defect(&v) < 1e-14);
    }
}
