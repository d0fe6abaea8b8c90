use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{lp_of_values, SpectralField};
use crate::error::{Error, Result};

/// Lebesgue exponent in `[1, inf]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Domain(format!("exponent must lie in [1, inf], got {p}")));
        }
        Ok(Exponent(p))
    }

    pub fn infinity() -> Self {
        Exponent(f64::INFINITY)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    /// `1/p`, zero for `p = inf`.
    pub fn reciprocal(self) -> f64 {
        if self.is_infinite() {
            0.0
        } else {
            1.0 / self.0
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inf" | "infinity" => Ok(Exponent::infinity()),
            _ => Exponent::new(
                s.parse()
                    .map_err(|_| Error::Config(format!("bad exponent '{s}'")))?,
            ),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::new(p),
            Raw::Text(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// `L^q_T L^r_x` on `n_t` uniform samples of `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    pub q: Exponent,
    pub r: Exponent,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n_t: usize,
}

impl MixedNormSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::Config(format!("horizon must be positive, got {}", self.horizon)));
        }
        if self.n_t < 2 {
            return Err(Error::Config("need at least two time samples".into()));
        }
        Ok(())
    }
}

/// The sample times `t_k = k T / (n_t - 1)`.
pub fn sample_times(spec: &MixedNormSpec) -> Vec<f64> {
    let n = spec.n_t;
    (0..n)
        .map(|k| spec.horizon * k as f64 / (n - 1) as f64)
        .collect()
}

/// `L^r` in space with weight `(L/n)^d`, then `L^q` in time by the
/// trapezoid rule (`q = inf`: max over samples).
pub fn mixed_norm(trajectory: &[SpectralField], spec: &MixedNormSpec) -> Result<f64> {
    spec.validate()?;
    if trajectory.len() != spec.n_t {
        return Err(Error::Config(format!(
            "trajectory has {} samples, spec expects {}",
            trajectory.len(),
            spec.n_t
        )));
    }
    let first = &trajectory[0];
    for f in &trajectory[1..] {
        first.check_grid(f)?;
    }
    let w = first.grid().cell_volume();
    let r = spec.r.value();
    let spatial: Vec<f64> = trajectory
        .iter()
        .map(|f| lp_of_values(&f.to_values(), r, w))
        .collect();
    if spec.q.is_infinite() {
        return Ok(spatial.iter().copied().fold(0.0, f64::max));
    }
    let q = spec.q.value();
    let dt = spec.horizon / (spec.n_t - 1) as f64;
    let last = spatial.len() - 1;
    let sum: f64 = spatial
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let weight = if k == 0 || k == last { 0.5 } else { 1.0 };
            weight * s.powf(q)
        })
        .sum();
    Ok((sum * dt).powf(1.0 / q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use num_complex::Complex64;

    #[test]
    fn plane_wave_closed_form() {
        let g = GridSpec::new(2, 16, 3.0).unwrap();
        let f = SpectralField::single_mode(g, [2, 1], Complex64::new(0.0, 1.0)).unwrap();
        let spec = MixedNormSpec {
            q: Exponent::new(4.0).unwrap(),
            r: Exponent::new(4.0).unwrap(),
            horizon: 2.0,
            n_t: 5,
        };
        let traj = vec![f.clone(); 5];
        let v = mixed_norm(&traj, &spec).unwrap();
        let expect = 2f64.powf(0.25) * 9f64.powf(0.25);
        assert!((v - expect).abs() < 1e-13);
    }

    #[test]
    fn q_infinity_is_max_l2() {
        let g = GridSpec::new(1, 16, 1.0).unwrap();
        let a = SpectralField::single_mode(g, [1, 0], Complex64::new(1.0, 0.0)).unwrap();
        let b = &a * 3.0;
        let spec = MixedNormSpec {
            q: Exponent::infinity(),
            r: Exponent::new(2.0).unwrap(),
            horizon: 1.0,
            n_t: 2,
        };
        let v = mixed_norm(&[a, b.clone()], &spec).unwrap();
        assert!((v - b.l2_norm()).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Exponent::new(0.5).is_err());
        let g = GridSpec::new(1, 16, 1.0).unwrap();
        let spec = MixedNormSpec {
            q: Exponent::infinity(),
            r: Exponent::new(2.0).unwrap(),
            horizon: 1.0,
            n_t: 3,
        };
        assert!(mixed_norm(&[SpectralField::zeros(g)], &spec).is_err());
        let other = GridSpec::new(1, 32, 1.0).unwrap();
        let traj = [SpectralField::zeros(g), SpectralField::zeros(other), SpectralField::zeros(g)];
        assert!(mixed_norm(&traj, &spec).is_err());
    }

    #[test]
    fn exponent_serde() {
        let e: Exponent = serde_json::from_str("\"inf\"").unwrap();
        assert!(e.is_infinite());
        let e: Exponent = serde_json::from_str("4").unwrap();
        assert_eq!(e.value(), 4.0);
        assert_eq!(serde_json::to_string(&Exponent::infinity()).unwrap(), "\"inf\"");
    }
}
