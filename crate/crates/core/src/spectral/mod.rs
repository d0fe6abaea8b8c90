//! Fields on the torus `[0, L)^d`, `d in {1, 2}`, stored by their Fourier
//! coefficients.
//!
//! A field is `f(x) = sum_k c_k exp(i xi_k . x)` with `xi_k = 2 pi k / L` and
//! `k` ranging over `[-n/2, n/2)` on every axis. Coefficients are kept in FFT
//! order (non-negative indices first) and row-major over the axes, so with
//! this normalization `||f||_{L^2}^2 = L^d sum_k |c_k|^2`.

pub(crate) mod fft;
pub mod io;
mod multiplier;
mod norms;

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbol::bracket;

pub use multiplier::{
    curl_defect, propagate, riesz, riesz_dot, Multiplier, Sign, VectorField,
};
pub use norms::{mixed_norm, sample_times, Exponent, MixedNormSpec};

/// Uniform periodic grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "domain_length")]
    pub length: f64,
}

impl GridSpec {
    pub fn new(d: usize, n: usize, length: f64) -> Result<Self> {
        let g = GridSpec { d, n, length };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.d) {
            return Err(Error::Config(format!("grid dimension must be 1 or 2, got {}", self.d)));
        }
        if self.n < 8 || !self.n.is_power_of_two() {
            return Err(Error::Config(format!(
                "points per axis must be a power of two >= 8, got {}",
                self.n
            )));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::Config(format!("domain length must be positive, got {}", self.length)));
        }
        Ok(())
    }

    /// Total number of lattice points.
    pub fn size(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// `2 pi / L`.
    pub fn dk(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    /// `L^d`.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.d as i32)
    }

    /// Quadrature weight `(L/n)^d` of one grid point.
    pub fn cell_volume(&self) -> f64 {
        (self.length / self.n as f64).powi(self.d as i32)
    }

    /// Signed wavenumber of an FFT-ordered position along one axis.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Multi-index (signed wavenumbers) of a flat position.
    pub fn index(&self, flat: usize) -> [i64; 2] {
        match self.d {
            1 => [self.wavenumber(flat), 0],
            _ => [self.wavenumber(flat / self.n), self.wavenumber(flat % self.n)],
        }
    }

    /// Flat position of a multi-index; `None` when it lies outside `[-n/2, n/2)`.
    pub fn flat(&self, k: [i64; 2]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let pos = |k: i64| -> Option<usize> {
            if k < -half || k >= half {
                None
            } else if k >= 0 {
                Some(k as usize)
            } else {
                Some((k + self.n as i64) as usize)
            }
        };
        match self.d {
            1 => {
                if k[1] != 0 {
                    return None;
                }
                pos(k[0])
            }
            _ => Some(pos(k[0])? * self.n + pos(k[1])?),
        }
    }

    pub fn frequency(&self, flat: usize) -> Frequency {
        let index = self.index(flat);
        let dk = self.dk();
        Frequency {
            d: self.d,
            n: self.n,
            index,
            xi: [dk * index[0] as f64, dk * index[1] as f64],
        }
    }

    /// Physical coordinates of a flat grid point.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let h = self.length / self.n as f64;
        match self.d {
            1 => [h * flat as f64, 0.0],
            _ => [h * (flat / self.n) as f64, h * (flat % self.n) as f64],
        }
    }

    fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// A lattice frequency `xi = 2 pi k / L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frequency {
    pub d: usize,
    pub n: usize,
    pub index: [i64; 2],
    pub xi: [f64; 2],
}

impl Frequency {
    /// Euclidean norm `|xi|`.
    pub fn norm(&self) -> f64 {
        self.xi[0].hypot(self.xi[1])
    }

    /// True when the index along `axis` is the unpaired `-n/2` mode.
    pub fn is_nyquist(&self, axis: usize) -> bool {
        self.index[axis] == -((self.n / 2) as i64)
    }
}

/// Complex scalar field on a torus grid, stored by Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.size()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if coeffs.len() != grid.size() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for a grid of {} points",
                coeffs.len(),
                grid.size()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    /// Transforms grid values (row-major, `x_j = j L / n`) to coefficients.
    pub fn from_values(grid: GridSpec, mut values: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.size() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.size()
            )));
        }
        fft::transform(&grid, &mut values, fft::Direction::Forward);
        let scale = 1.0 / grid.size() as f64;
        for c in &mut values {
            *c *= scale;
        }
        Ok(SpectralField { grid, coeffs: values })
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> Complex64) -> Result<Self> {
        let values = (0..grid.size()).map(|i| f(grid.point(i))).collect();
        Self::from_values(grid, values)
    }

    /// `amp * exp(i xi_k . x)`.
    pub fn single_mode(grid: GridSpec, k: [i64; 2], amp: Complex64) -> Result<Self> {
        let pos = grid
            .flat(k)
            .ok_or_else(|| Error::Domain(format!("mode {k:?} not on the grid")))?;
        let mut f = Self::zeros(grid);
        f.coeffs[pos] = amp;
        Ok(f)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at a multi-index, zero off the grid.
    pub fn coeff(&self, k: [i64; 2]) -> Complex64 {
        self.grid
            .flat(k)
            .map(|p| self.coeffs[p])
            .unwrap_or_default()
    }

    /// Values at the grid points.
    pub fn to_values(&self) -> Vec<Complex64> {
        let mut v = self.coeffs.clone();
        fft::transform(&self.grid, &mut v, fft::Direction::Inverse);
        v
    }

    pub fn map_with_frequency(&self, f: impl Fn(&Frequency, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(&self.grid.frequency(i), c))
            .collect();
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn scale(&self, a: Complex64) -> Self {
        SpectralField {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|&c| c * a).collect(),
        }
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: Complex64, other: &SpectralField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(SpectralField {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&x, &y)| x + a * y)
                .collect(),
        })
    }

    /// Pointwise product computed on the grid.
    pub fn product(&self, other: &SpectralField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        let a = self.to_values();
        let b = other.to_values();
        let prod = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Self::from_values(self.grid, prod)
    }

    /// `||f||_{L^2} = (L^d sum |c_k|^2)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `L^p` norm from grid values with weight `(L/n)^d`; `p = inf` gives the max.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_of_values(&self.to_values(), p, self.grid.cell_volume())
    }

    /// `H^s` norm `(L^d sum <xi>^{2s} |c_k|^2)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| bracket(self.grid.frequency(i).norm()).powf(2.0 * s) * c.norm_sqr())
            .sum();
        (self.grid.volume() * sum).sqrt()
    }

    /// Largest `|c(k) - conj(c(-k))|` over the paired modes; zero for a
    /// real-valued field. Unpaired Nyquist modes must themselves be real.
    pub fn reality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, &c) in self.coeffs.iter().enumerate() {
            let k = self.grid.index(i);
            let mirror = self.reflected(k);
            let partner = self.coeffs[mirror];
            worst = worst.max((c - partner.conj()).norm());
        }
        worst
    }

    fn reflected(&self, k: [i64; 2]) -> usize {
        let n = self.grid.n as i64;
        let wrap = |k: i64| -> i64 {
            let m = (-k).rem_euclid(n);
            if m >= n / 2 {
                m - n
            } else {
                m
            }
        };
        let mk = match self.grid.d {
            1 => [wrap(k[0]), 0],
            _ => [wrap(k[0]), wrap(k[1])],
        };
        self.grid.flat(mk).expect("reflected index stays on the grid")
    }

    /// Projects onto real-valued fields: `(f + conj-reflection) / 2`.
    pub fn real_part(&self) -> Self {
        let coeffs = (0..self.coeffs.len())
            .map(|i| {
                let m = self.reflected(self.grid.index(i));
                0.5 * (self.coeffs[i] + self.coeffs[m].conj())
            })
            .collect();
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }

    /// Zero-frequency coefficient (the spatial mean).
    pub fn mean(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Zeros every mode with some `|k_i| > n/3`.
    pub fn dealias(&self) -> Self {
        let cut = (self.grid.n / 3) as i64;
        self.map_with_frequency(|f, c| {
            if f.index.iter().any(|k| k.abs() > cut) {
                Complex64::new(0.0, 0.0)
            } else {
                c
            }
        })
    }

    /// Largest coefficient difference; errors on mismatched grids.
    pub fn max_abs_diff(&self, other: &SpectralField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub(crate) fn check_grid(&self, other: &SpectralField) -> Result<()> {
        self.grid.check_same(&other.grid)
    }
}

pub(crate) fn lp_of_values(values: &[Complex64], p: f64, weight: f64) -> f64 {
    if p.is_infinite() {
        values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    } else {
        // even integer exponents avoid the square root and powf
        let s: f64 = if p.fract() == 0.0 && p as i32 % 2 == 0 && p <= 64.0 {
            let half = p as i32 / 2;
            values.iter().map(|v| v.norm_sqr().powi(half)).sum()
        } else {
            values.iter().map(|v| v.norm().powf(p)).sum()
        };
        (s * weight).powf(1.0 / p)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(Complex64::new(1.0, 0.0), rhs)
            .expect("adding fields on different grids")
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(Complex64::new(-1.0, 0.0), rhs)
            .expect("subtracting fields on different grids")
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(Complex64::new(rhs, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2() -> GridSpec {
        GridSpec::new(2, 16, 2.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(3, 16, 1.0).is_err());
        assert!(GridSpec::new(1, 12, 1.0).is_err());
        assert!(GridSpec::new(1, 4, 1.0).is_err());
        assert!(GridSpec::new(1, 16, 0.0).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let g = grid2();
        for i in 0..g.size() {
            assert_eq!(g.flat(g.index(i)), Some(i));
        }
        assert_eq!(g.flat([8, 0]), None);
        assert!(g.flat([-8, 3]).is_some());
    }

    #[test]
    fn single_mode_values() {
        let g = grid2();
        let f = SpectralField::single_mode(g, [1, -2], Complex64::new(1.0, 0.0)).unwrap();
        let v = f.to_values();
        for (i, val) in v.iter().enumerate() {
            let x = g.point(i);
            let expect = Complex64::new(0.0, x[0] - 2.0 * x[1]).exp();
            assert!((val - expect).norm() < 1e-13);
        }
        let back = SpectralField::from_values(g, v).unwrap();
        assert!(back.max_abs_diff(&f).unwrap() < 1e-15);
    }

    #[test]
    fn plancherel_single_mode() {
        let g = GridSpec::new(1, 32, 3.0).unwrap();
        let f = SpectralField::single_mode(g, [3, 0], Complex64::new(0.0, 2.0)).unwrap();
        assert!((f.l2_norm() - 2.0 * 3f64.sqrt()).abs() < 1e-14);
        assert!((f.lp_norm(2.0) - f.l2_norm()).abs() < 1e-13);
        assert!((f.lp_norm(f64::INFINITY) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn reality_of_cosine() {
        let g = grid2();
        let f = SpectralField::from_fn(g, |x| Complex64::new((x[0] + 2.0 * x[1]).cos(), 0.0)).unwrap();
        assert!(f.reality_defect() < 1e-15);
        let h = SpectralField::single_mode(g, [1, 1], Complex64::new(1.0, 0.0)).unwrap();
        assert!(h.reality_defect() > 0.5);
        assert!(h.real_part().reality_defect() < 1e-16);
    }

    #[test]
    fn dealias_keeps_low_modes() {
        let g = GridSpec::new(1, 24usize.next_power_of_two(), 1.0).unwrap();
        let low = SpectralField::single_mode(g, [10, 0], Complex64::new(1.0, 0.0)).unwrap();
        let high = SpectralField::single_mode(g, [11, 0], Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(low.dealias(), low);
        assert_eq!(high.dealias().l2_norm(), 0.0);
    }

    #[test]
    fn product_of_modes() {
        let g = grid2();
        let a = SpectralField::single_mode(g, [1, 0], Complex64::new(2.0, 0.0)).unwrap();
        let b = SpectralField::single_mode(g, [0, 3], Complex64::new(0.0, 1.0)).unwrap();
        let p = a.product(&b).unwrap();
        assert!((p.coeff([1, 3]) - Complex64::new(0.0, 2.0)).norm() < 1e-14);
        assert!((p.l2_norm() - 2.0 * 2.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn mismatched_grids_error() {
        let a = SpectralField::zeros(grid2());
        let b = SpectralField::zeros(GridSpec::new(2, 32, 1.0).unwrap());
        assert!(matches!(a.axpy(Complex64::new(1.0, 0.0), &b), Err(Error::GridMismatch(_))));
    }
}
