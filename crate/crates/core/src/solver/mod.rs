//! Pseudo-spectral integrator for the gravity (`beta = 0`) Whitham-Boussinesq
//! system
//!
//! ```text
//! d_t eta + div v = -K div(eta v)
//! d_t v + K grad eta = -K grad(|v|^2 / 2)
//! ```
//!
//! on the torus in one or two dimensions, with `v` curl-free.
//!
//! The solver works with the diagonal variables
//! `u_+- = eta/2 -+ i R.v / (2 sqrt K)`, which satisfy
//! `(i d_t -+ m_0(D)) u_+- = B_+-(u_+, u_-)` with `m_0 = |D| sqrt K` and
//!
//! ```text
//! B_+- = -1/2 |D| K R.{(u_+ + u_-) w} -+ 1/4 |D| sqrt K (w . w),   w = R sqrt K (u_+ - u_-).
//! ```
//!
//! `w . w` is the bilinear (unconjugated) square; for real `eta`, `v` it
//! equals `-|v|^2`. `R` has symbol `i xi / |xi|`, so `grad = |D| R`.

pub mod data;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::spectral::{curl_defect, fft, propagate, GridSpec, Multiplier, Sign, SpectralField, VectorField};
use crate::symbol::Beta;

pub use data::{data_size, generate, DataSpec, Generator};

/// Tolerance on curl, mean and reality violations accepted by [`to_diagonal`].
pub const INPUT_TOLERANCE: f64 = 1e-8;

/// Diagonal variables at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub u_plus: SpectralField,
    pub u_minus: SpectralField,
}

/// Surface elevation and velocity at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalState {
    pub t: f64,
    pub eta: SpectralField,
    pub v: VectorField,
}

impl PhysicalState {
    pub fn grid(&self) -> &GridSpec {
        self.eta.grid()
    }

    /// `||u_+||_{H^s} + ||u_-||_{H^s}` of the diagonal variables, which the
    /// free flow conserves.
    pub fn size(&self, s: f64) -> f64 {
        let u = to_diagonal_unchecked(self);
        u.u_plus.sobolev_norm(s) + u.u_minus.sobolev_norm(s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrator {
    /// Integrating-factor (Lawson) form of the classical four-stage Runge-Kutta method.
    #[default]
    #[serde(rename = "exponential-rk4")]
    ExponentialRk4,
    /// Half linear step, RK4 on the nonlinear part, half linear step.
    #[serde(rename = "strang")]
    Strang,
}

fn yes() -> bool {
    true
}

fn default_s() -> f64 {
    1.0
}

fn default_frame_every() -> usize {
    1
}

fn default_blowup() -> f64 {
    1e12
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: GridSpec,
    /// Requested step; shortened so that a whole number of steps ends at `T`.
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default)]
    pub integrator: Integrator,
    /// 2/3-rule truncation of the nonlinearity and the initial data.
    #[serde(default = "yes")]
    pub dealias: bool,
    #[serde(default = "yes")]
    pub nonlinear: bool,
    /// Sobolev index of the diagnostics (`H^s` for `eta`, `H^{s+1/2}` for `v`).
    #[serde(default = "default_s")]
    pub s: f64,
    /// Steps between output frames.
    #[serde(default = "default_frame_every")]
    pub frame_every: usize,
    /// `L^2` size of `(u_+, u_-)` treated as blow-up.
    #[serde(default = "default_blowup")]
    pub blowup_threshold: f64,
}

impl SolverConfig {
    pub fn new(grid: GridSpec, dt: f64, horizon: f64) -> Self {
        SolverConfig {
            grid,
            dt,
            horizon,
            integrator: Integrator::default(),
            dealias: true,
            nonlinear: true,
            s: default_s(),
            frame_every: 1,
            blowup_threshold: default_blowup(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon.is_finite() && self.horizon >= self.dt) {
            return Err(Error::Config(format!(
                "T must be finite and at least dt, got T = {}, dt = {}",
                self.horizon, self.dt
            )));
        }
        if self.frame_every == 0 {
            return Err(Error::Config("frame_every must be at least 1".into()));
        }
        if !self.s.is_finite() {
            return Err(Error::Config("s must be finite".into()));
        }
        if !(self.blowup_threshold > 0.0) {
            return Err(Error::Config("blowup_threshold must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps and the step actually taken.
    pub fn schedule(&self) -> (usize, f64) {
        let steps = ((self.horizon / self.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        (steps, self.horizon / steps as f64)
    }
}

/// Symbol tables on one grid.
#[derive(Clone, Debug)]
struct Operators {
    grid: GridSpec,
    m0: Vec<f64>,
    sqrt_k: Vec<f64>,
    // |xi| K
    abs_d_k: Vec<f64>,
    // |xi| sqrt K
    abs_d_sqrt_k: Vec<f64>,
    riesz: Vec<Vec<Complex64>>,
    // flat index of -k
    mirror: Vec<usize>,
    // modes the state may carry: no Nyquist lines, and within n/3 when dealiasing
    keep: Vec<bool>,
}

impl Operators {
    fn new(grid: GridSpec, dealias: bool) -> Self {
        let size = grid.size();
        let cut = (grid.n / 3) as i64;
        let mut ops = Operators {
            grid,
            m0: Vec::with_capacity(size),
            sqrt_k: Vec::with_capacity(size),
            abs_d_k: Vec::with_capacity(size),
            abs_d_sqrt_k: Vec::with_capacity(size),
            riesz: vec![Vec::with_capacity(size); grid.d],
            mirror: Vec::with_capacity(size),
            keep: Vec::with_capacity(size),
        };
        let n = grid.n as i64;
        let wrap = |k: i64| -> i64 { (-k).rem_euclid(n) };
        for i in 0..size {
            let f = grid.frequency(i);
            let r = f.norm();
            let k = Multiplier::K.value(&f).re;
            let sk = k.sqrt();
            ops.m0.push(r * sk);
            ops.sqrt_k.push(sk);
            ops.abs_d_k.push(r * k);
            ops.abs_d_sqrt_k.push(r * sk);
            for (j, table) in ops.riesz.iter_mut().enumerate() {
                table.push(Multiplier::Riesz(j).value(&f));
            }
            let mirrored = match grid.d {
                1 => wrap(f.index[0]) as usize,
                _ => (wrap(f.index[0]) * n + wrap(f.index[1])) as usize,
            };
            ops.mirror.push(mirrored);
            let nyquist = (0..grid.d).any(|j| f.is_nyquist(j));
            let high = dealias && f.index[..grid.d].iter().any(|k| k.abs() > cut);
            ops.keep.push(!(nyquist || high));
        }
        ops
    }

    fn mask(&self, c: &mut [Complex64]) {
        for (c, keep) in c.iter_mut().zip(&self.keep) {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    fn field(&self, coeffs: Vec<Complex64>) -> SpectralField {
        SpectralField::from_coeffs(self.grid, coeffs).expect("table sizes match the grid")
    }

    fn values(&self, coeffs: Vec<Complex64>) -> Vec<Complex64> {
        self.field(coeffs).to_values()
    }

    fn coeffs(&self, values: Vec<Complex64>) -> Vec<Complex64> {
        SpectralField::from_values(self.grid, values)
            .expect("table sizes match the grid")
            .into_coeffs()
    }

    /// `(B_+, B_-)` on coefficient arrays.
    fn nonlinearity(&self, up: &[Complex64], um: &[Complex64]) -> [Vec<Complex64>; 2] {
        let d = self.grid.d;
        let sum: Vec<Complex64> = up.iter().zip(um).map(|(a, b)| a + b).collect();
        let diff: Vec<Complex64> = up.iter().zip(um).map(|(a, b)| a - b).collect();
        let a = self.values(sum);
        let w: Vec<Vec<Complex64>> = (0..d)
            .into_par_iter()
            .map(|j| {
                let c = diff
                    .iter()
                    .zip(&self.riesz[j])
                    .zip(&self.sqrt_k)
                    .map(|((x, r), s)| x * r * s)
                    .collect();
                self.values(c)
            })
            .collect();
        let mut products: Vec<Vec<Complex64>> = w
            .iter()
            .map(|wj| a.iter().zip(wj).map(|(x, y)| x * y).collect())
            .collect();
        let mut square = vec![Complex64::new(0.0, 0.0); a.len()];
        for wj in &w {
            for (s, x) in square.iter_mut().zip(wj) {
                *s += x * x;
            }
        }
        products.push(square);
        let spectra: Vec<Vec<Complex64>> = products
            .into_par_iter()
            .map(|p| self.coeffs(p))
            .collect();
        let (flux, square) = spectra.split_at(d);
        let square = &square[0];
        let size = self.grid.size();
        let mut bp = Vec::with_capacity(size);
        let mut bm = Vec::with_capacity(size);
        for i in 0..size {
            let div: Complex64 = (0..d).map(|j| self.riesz[j][i] * flux[j][i]).sum();
            let first = -0.5 * self.abs_d_k[i] * div;
            let second = 0.25 * self.abs_d_sqrt_k[i] * square[i];
            if self.keep[i] {
                bp.push(first - second);
                bm.push(first + second);
            } else {
                bp.push(Complex64::new(0.0, 0.0));
                bm.push(Complex64::new(0.0, 0.0));
            }
        }
        [bp, bm]
    }

    /// Same as [`Operators::nonlinearity`] for states with real `eta` and
    /// `v`, packing two real transforms into each complex one.
    fn nonlinearity_real(&self, up: &[Complex64], um: &[Complex64]) -> [Vec<Complex64>; 2] {
        let d = self.grid.d;
        let size = self.grid.size();
        let i = Complex64::new(0.0, 1.0);
        let scale = 1.0 / size as f64;
        // v_j = -i sqrt K R_j (u_+ - u_-)
        let v_hat = |j: usize, idx: usize| -> Complex64 {
            -i * self.sqrt_k[idx] * self.riesz[j][idx] * (up[idx] - um[idx])
        };
        let mut z: Vec<Complex64> = (0..size).map(|k| up[k] + um[k] + i * v_hat(0, k)).collect();
        fft::transform(&self.grid, &mut z, fft::Direction::Inverse);
        let mut y = Vec::new();
        if d == 2 {
            y = (0..size).map(|k| v_hat(1, k)).collect();
            fft::transform(&self.grid, &mut y, fft::Direction::Inverse);
        }
        // (eta v_1 + i |v|^2) and eta v_2 on the grid
        let mut p: Vec<Complex64> = Vec::with_capacity(size);
        let mut r: Vec<Complex64> = Vec::with_capacity(if d == 2 { size } else { 0 });
        for k in 0..size {
            let eta = z[k].re;
            let v1 = z[k].im;
            let v2 = if d == 2 { y[k].re } else { 0.0 };
            p.push(Complex64::new(eta * v1, v1 * v1 + v2 * v2));
            if d == 2 {
                r.push(Complex64::new(eta * v2, 0.0));
            }
        }
        fft::transform(&self.grid, &mut p, fft::Direction::Forward);
        if d == 2 {
            fft::transform(&self.grid, &mut r, fft::Direction::Forward);
        }
        let mut bp = vec![Complex64::new(0.0, 0.0); size];
        let mut bm = vec![Complex64::new(0.0, 0.0); size];
        for k in 0..size {
            if !self.keep[k] {
                continue;
            }
            let a = p[k] * scale;
            let b = p[self.mirror[k]].conj() * scale;
            let flux1 = 0.5 * (a + b);
            let speed2 = (a - b) / (2.0 * i);
            let mut div = self.riesz[0][k] * flux1;
            if d == 2 {
                div += self.riesz[1][k] * r[k] * scale;
            }
            // R.(a w) = i R.(eta v), w.w = -|v|^2
            let first = -0.5 * self.abs_d_k[k] * i * div;
            let second = -0.25 * self.abs_d_sqrt_k[k] * speed2;
            bp[k] = first - second;
            bm[k] = first + second;
        }
        [bp, bm]
    }
}

/// `(B_+, B_-)` of a state; `dealias` restricts the output to `|k_i| <= n/3`.
/// Unpaired Nyquist modes are always dropped.
pub fn nonlinearity(s: &SolverState, dealias: bool) -> Result<(SpectralField, SpectralField)> {
    s.u_plus.check_grid(&s.u_minus)?;
    let ops = Operators::new(*s.u_plus.grid(), dealias);
    let [bp, bm] = ops.nonlinearity(s.u_plus.coeffs(), s.u_minus.coeffs());
    Ok((ops.field(bp), ops.field(bm)))
}

/// `u_+- = eta/2 -+ i R.v / (2 sqrt K)`. Rejects data whose curl, velocity
/// mean or imaginary part exceeds [`INPUT_TOLERANCE`].
pub fn to_diagonal(p: &PhysicalState) -> Result<SolverState> {
    let grid = *p.grid();
    if p.v.grid() != &grid {
        return Err(Error::GridMismatch("eta and v live on different grids".into()));
    }
    let curl = curl_defect(&p.v);
    if curl > INPUT_TOLERANCE {
        return domain(format!("velocity is not curl-free (defect {curl:.3e})"));
    }
    let mean = p.v.components().iter().map(|c| c.mean().norm()).fold(0.0, f64::max);
    if mean > INPUT_TOLERANCE {
        return domain(format!("velocity has nonzero mean ({mean:.3e})"));
    }
    let imag = p.eta.reality_defect().max(p.v.reality_defect());
    if imag > INPUT_TOLERANCE {
        return domain(format!("fields are not real-valued (defect {imag:.3e})"));
    }
    Ok(to_diagonal_unchecked(p))
}

fn to_diagonal_unchecked(p: &PhysicalState) -> SolverState {
    let grid = *p.grid();
    let i = Complex64::new(0.0, 1.0);
    let sqrt_k = Multiplier::SqrtK;
    let mut up = Vec::with_capacity(grid.size());
    let mut um = Vec::with_capacity(grid.size());
    for idx in 0..grid.size() {
        let f = grid.frequency(idx);
        let div: Complex64 = p
            .v
            .components()
            .iter()
            .enumerate()
            .map(|(j, c)| Multiplier::Riesz(j).value(&f) * c.coeffs()[idx])
            .sum();
        let half_eta = 0.5 * p.eta.coeffs()[idx];
        let rot = i * div / (2.0 * sqrt_k.value(&f).re);
        up.push(half_eta - rot);
        um.push(half_eta + rot);
    }
    SolverState {
        t: p.t,
        u_plus: SpectralField::from_coeffs(grid, up).expect("grid already validated"),
        u_minus: SpectralField::from_coeffs(grid, um).expect("grid already validated"),
    }
}

/// `eta = u_+ + u_-`, `v = -i sqrt K R (u_+ - u_-)`.
pub fn from_diagonal(s: &SolverState) -> Result<PhysicalState> {
    s.u_plus.check_grid(&s.u_minus)?;
    let eta = &s.u_plus + &s.u_minus;
    let diff = Multiplier::SqrtK.apply(&(&s.u_plus - &s.u_minus));
    let minus_i = Complex64::new(0.0, -1.0);
    let v = crate::spectral::riesz(&diff).map(|c| c.scale(minus_i));
    Ok(PhysicalState { t: s.t, eta, v })
}

type Pair = [Vec<Complex64>; 2];

fn axpy(x: &Pair, a: f64, y: &Pair) -> Pair {
    let f = |u: &[Complex64], w: &[Complex64]| -> Vec<Complex64> {
        u.iter().zip(w).map(|(p, q)| p + a * q).collect()
    };
    [f(&x[0], &y[0]), f(&x[1], &y[1])]
}

/// Advances states with a fixed step.
#[derive(Clone, Debug)]
pub struct Stepper {
    ops: Operators,
    integrator: Integrator,
    nonlinear: bool,
    real_fields: bool,
    h: f64,
    // exp(-/+ i tau m0) for tau = h and h/2
    full: Pair,
    half: Pair,
}

impl Stepper {
    pub fn new(grid: GridSpec, h: f64, integrator: Integrator, dealias: bool, nonlinear: bool) -> Result<Self> {
        grid.validate()?;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::Config(format!("step must be positive, got {h}")));
        }
        let ops = Operators::new(grid, dealias);
        let phases = |tau: f64| -> Pair {
            let plus = ops.m0.iter().map(|m| Complex64::from_polar(1.0, -tau * m)).collect();
            let minus = ops.m0.iter().map(|m| Complex64::from_polar(1.0, tau * m)).collect();
            [plus, minus]
        };
        let full = phases(h);
        let half = phases(0.5 * h);
        Ok(Stepper {
            ops,
            integrator,
            nonlinear,
            real_fields: false,
            h,
            full,
            half,
        })
    }

    /// A stepper matching `cfg`, using the step from [`SolverConfig::schedule`].
    pub fn from_config(cfg: &SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let (_, h) = cfg.schedule();
        Stepper::new(cfg.grid, h, cfg.integrator, cfg.dealias, cfg.nonlinear)
    }

    /// Assumes every state passed to [`Stepper::step`] has real `eta` and
    /// `v`, which allows a cheaper evaluation of the nonlinearity. The
    /// evaluation then keeps only the real parts of the physical products.
    pub fn assume_real_fields(mut self) -> Self {
        self.real_fields = true;
        self
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    fn linear(&self, u: &Pair, phase: &Pair) -> Pair {
        let f = |u: &[Complex64], p: &[Complex64]| -> Vec<Complex64> {
            u.iter().zip(p).map(|(a, b)| a * b).collect()
        };
        [f(&u[0], &phase[0]), f(&u[1], &phase[1])]
    }

    // d_t u = -i B(u)
    fn rhs(&self, u: &Pair) -> Pair {
        let [bp, bm] = if self.real_fields {
            self.ops.nonlinearity_real(&u[0], &u[1])
        } else {
            self.ops.nonlinearity(&u[0], &u[1])
        };
        let mi = Complex64::new(0.0, -1.0);
        [
            bp.into_iter().map(|b| mi * b).collect(),
            bm.into_iter().map(|b| mi * b).collect(),
        ]
    }

    fn lawson(&self, u: &Pair) -> Pair {
        let h = self.h;
        let k1 = self.rhs(u);
        let eu_half = self.linear(u, &self.half);
        let k2 = self.rhs(&self.linear(&axpy(u, 0.5 * h, &k1), &self.half));
        let k3 = self.rhs(&axpy(&eu_half, 0.5 * h, &k2));
        let k4 = self.rhs(&axpy(&self.linear(u, &self.full), h, &self.linear(&k3, &self.half)));
        // E(h) u + h/6 [E(h) k1 + 2 E(h/2)(k2 + k3) + k4]
        let mid = self.linear(&axpy(&k2, 1.0, &k3), &self.half);
        let mut acc = self.linear(&axpy(u, h / 6.0, &k1), &self.full);
        acc = axpy(&acc, h / 3.0, &mid);
        axpy(&acc, h / 6.0, &k4)
    }

    fn rk4_nonlinear(&self, u: &Pair) -> Pair {
        let h = self.h;
        let k1 = self.rhs(u);
        let k2 = self.rhs(&axpy(u, 0.5 * h, &k1));
        let k3 = self.rhs(&axpy(u, 0.5 * h, &k2));
        let k4 = self.rhs(&axpy(u, h, &k3));
        let mut acc = axpy(u, h / 6.0, &k1);
        acc = axpy(&acc, h / 3.0, &k2);
        acc = axpy(&acc, h / 3.0, &k3);
        axpy(&acc, h / 6.0, &k4)
    }

    fn advance(&self, u: &Pair) -> Pair {
        if !self.nonlinear {
            return self.linear(u, &self.full);
        }
        match self.integrator {
            Integrator::ExponentialRk4 => self.lawson(u),
            Integrator::Strang => {
                let a = self.linear(u, &self.half);
                let b = self.rk4_nonlinear(&a);
                self.linear(&b, &self.half)
            }
        }
    }

    /// One step. Non-finite output, or an `L^2` size above `threshold`,
    /// is reported as blow-up at the input time.
    pub fn step(&self, s: &SolverState, threshold: f64) -> Result<SolverState> {
        s.u_plus.check_grid(&s.u_minus)?;
        if s.u_plus.grid() != &self.ops.grid {
            return Err(Error::GridMismatch("state and stepper grids differ".into()));
        }
        let mut u: Pair = [s.u_plus.coeffs().to_vec(), s.u_minus.coeffs().to_vec()];
        self.ops.mask(&mut u[0]);
        self.ops.mask(&mut u[1]);
        let next = self.advance(&u);
        let finite = next.iter().flatten().all(|c| c.re.is_finite() && c.im.is_finite());
        let size = (self.ops.grid.volume()
            * next.iter().flatten().map(|c| c.norm_sqr()).sum::<f64>())
        .sqrt();
        if !finite || size > threshold {
            return Err(Error::BlowUp { t_last_valid: s.t });
        }
        let [up, um] = next;
        Ok(SolverState {
            t: s.t + self.h,
            u_plus: self.ops.field(up),
            u_minus: self.ops.field(um),
        })
    }
}

/// One step of `cfg`'s integrator with the step from [`SolverConfig::schedule`].
pub fn step(s: &SolverState, cfg: &SolverConfig) -> Result<SolverState> {
    Stepper::from_config(cfg)?.step(s, cfg.blowup_threshold)
}

/// Projects onto states whose `eta` and `v` are real: `eta = u_+ + u_-` and
/// `i (u_+ - u_-)` are replaced by their real parts. Returns the size of
/// the correction.
pub fn reproject(s: &mut SolverState) -> f64 {
    let i = Complex64::new(0.0, 1.0);
    let half = Complex64::new(0.5, 0.0);
    let eta = (&s.u_plus + &s.u_minus).real_part();
    let diff = (&s.u_plus - &s.u_minus).scale(i).real_part().scale(-i);
    let up = (&eta + &diff).scale(half);
    let um = (&eta - &diff).scale(half);
    let change = up
        .max_abs_diff(&s.u_plus)
        .and_then(|a| Ok(a.max(um.max_abs_diff(&s.u_minus)?)))
        .unwrap_or(f64::INFINITY);
    s.u_plus = up;
    s.u_minus = um;
    change
}

/// Per-frame monitors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub t: f64,
    #[serde(rename = "Hs_eta")]
    pub hs_eta: f64,
    #[serde(rename = "Hs_v")]
    pub hs_v: f64,
    /// `||u_+||_{H^s} + ||u_-||_{H^s}`.
    #[serde(rename = "Hs_u")]
    pub hs_u: f64,
    /// Fraction of `||eta||^2 + ||v||^2` in modes with some `|k_i| > n/4`.
    pub tail_mass: f64,
    pub curl_defect: f64,
    pub reality_defect: f64,
    /// Size of the reality re-projection applied at this frame.
    pub reprojection: f64,
}

impl FrameDiagnostics {
    pub fn size(&self) -> f64 {
        self.hs_u
    }
}

/// Energy fraction of `eta`, `v` in modes with some `|k_i| > n/4`.
pub fn tail_mass(p: &PhysicalState) -> f64 {
    let grid = *p.grid();
    let cut = (grid.n / 4) as i64;
    let mut total = 0.0;
    let mut tail = 0.0;
    for i in 0..grid.size() {
        let e = p.eta.coeffs()[i].norm_sqr()
            + p.v.components().iter().map(|c| c.coeffs()[i].norm_sqr()).sum::<f64>();
        total += e;
        if grid.index(i)[..grid.d].iter().any(|k| k.abs() > cut) {
            tail += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

pub fn diagnostics(p: &PhysicalState, s: f64, reprojection: f64) -> FrameDiagnostics {
    FrameDiagnostics {
        t: p.t,
        hs_eta: p.eta.sobolev_norm(s),
        hs_v: p.v.sobolev_norm(s + 0.5),
        hs_u: p.size(s),
        tail_mass: tail_mass(p),
        curl_defect: curl_defect(&p.v),
        reality_defect: p.eta.reality_defect().max(p.v.reality_defect()),
        reprojection,
    }
}

/// Observer verdict after each frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Outcome of [`run_with`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSummary {
    pub t_end: f64,
    pub steps: usize,
    pub stopped_early: bool,
}

/// Integrates from `p0` to `T`, calling `observe` on the initial frame and
/// every `frame_every` steps (and at `T`). The state is re-projected onto
/// real fields at each frame.
pub fn run_with(
    p0: &PhysicalState,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&PhysicalState, &FrameDiagnostics) -> Result<Control>,
) -> Result<RunSummary> {
    cfg.validate()?;
    if p0.grid() != &cfg.grid {
        return Err(Error::GridMismatch("initial data and config grids differ".into()));
    }
    let stepper = Stepper::from_config(cfg)?.assume_real_fields();
    let (steps, h) = cfg.schedule();
    let mut state = to_diagonal(p0)?;
    stepper.ops.mask(state.u_plus.coeffs_mut());
    stepper.ops.mask(state.u_minus.coeffs_mut());
    let t0 = state.t;

    let mut frame = |state: &mut SolverState| -> Result<Control> {
        let change = reproject(state);
        let p = from_diagonal(state)?;
        let diag = diagnostics(&p, cfg.s, change);
        observe(&p, &diag)
    };

    if frame(&mut state)? == Control::Stop {
        return Ok(RunSummary {
            t_end: state.t,
            steps: 0,
            stopped_early: true,
        });
    }
    for k in 1..=steps {
        state = stepper.step(&state, cfg.blowup_threshold)?;
        // avoid drift in the time stamp
        state.t = t0 + k as f64 * h;
        if (k % cfg.frame_every == 0 || k == steps) && frame(&mut state)? == Control::Stop {
            return Ok(RunSummary {
                t_end: state.t,
                steps: k,
                stopped_early: k < steps,
            });
        }
    }
    Ok(RunSummary {
        t_end: state.t,
        steps,
        stopped_early: false,
    })
}

/// Frames and diagnostics of a full run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub frames: Vec<PhysicalState>,
    pub diagnostics: Vec<FrameDiagnostics>,
}

impl Trajectory {
    pub fn last(&self) -> &PhysicalState {
        self.frames.last().expect("a run records at least the initial frame")
    }
}

pub fn run(p0: &PhysicalState, cfg: &SolverConfig) -> Result<Trajectory> {
    let mut frames = Vec::new();
    let mut diagnostics = Vec::new();
    run_with(p0, cfg, |p, d| {
        frames.push(p.clone());
        diagnostics.push(*d);
        Ok(Control::Continue)
    })?;
    Ok(Trajectory {
        frames,
        diagnostics,
    })
}

/// First time the data size `||u_+||_{H^s} + ||u_-||_{H^s}` reaches
/// `growth` times its initial value, linearly interpolated between frames.
/// Blow-up counts as reaching it at the last valid time. `None` when the
/// run ends at `T` first.
pub fn validity_horizon(p0: &PhysicalState, cfg: &SolverConfig, growth: f64) -> Result<Option<f64>> {
    let mut initial = None;
    first_crossing(p0, cfg, |_, d| {
        let size = d.size();
        let initial = *initial.get_or_insert(size);
        Ok(size / initial - growth)
    })
}

/// First time the nonlinear solution departs from the free flow of its data
/// by `theta` in relative size:
/// `sum_pm ||u_pm(t) - S(pm t) u_pm(0)||_{H^s} >= theta sum_pm ||u_pm(0)||_{H^s}`.
/// Interpolation, blow-up and `None` as in [`validity_horizon`].
pub fn departure_horizon(p0: &PhysicalState, cfg: &SolverConfig, theta: f64) -> Result<Option<f64>> {
    let mut u0: Option<(SolverState, f64)> = None;
    let s = cfg.s;
    first_crossing(p0, cfg, |p, d| {
        let u = to_diagonal_unchecked(p);
        let (u0, size0) = u0.get_or_insert_with(|| {
            let size = u.u_plus.sobolev_norm(s) + u.u_minus.sobolev_norm(s);
            (u.clone(), size)
        });
        if *size0 == 0.0 {
            return Ok(-theta);
        }
        let tau = d.t - u0.t;
        let free_p = propagate(&u0.u_plus, Beta::Zero, Sign::Plus, tau);
        let free_m = propagate(&u0.u_minus, Beta::Zero, Sign::Minus, tau);
        let dev = (&u.u_plus - &free_p).sobolev_norm(s) + (&u.u_minus - &free_m).sobolev_norm(s);
        Ok(dev / *size0 - theta)
    })
}

// First frame time at which `level` turns non-negative, interpolated linearly
// from the previous frame.
fn first_crossing(
    p0: &PhysicalState,
    cfg: &SolverConfig,
    mut level: impl FnMut(&PhysicalState, &FrameDiagnostics) -> Result<f64>,
) -> Result<Option<f64>> {
    let mut prev: Option<(f64, f64)> = None;
    let mut hit = None;
    let outcome = run_with(p0, cfg, |p, d| {
        let g = level(p, d)?;
        if g >= 0.0 {
            hit = Some(match prev {
                Some((t0, g0)) => t0 + (-g0 / (g - g0)).clamp(0.0, 1.0) * (d.t - t0),
                None => d.t,
            });
            return Ok(Control::Stop);
        }
        prev = Some((d.t, g));
        Ok(Control::Continue)
    });
    match outcome {
        Ok(_) => Ok(hit),
        Err(Error::BlowUp { t_last_valid }) => Ok(Some(t_last_valid)),
        Err(e) => Err(e),
    }
}

/// One row of a data-size scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub d0: f64,
    pub horizon: Option<f64>,
}

/// Applies `horizon` to the data of `spec` rescaled to each size in `d0s`.
/// Runs execute concurrently; output order follows `d0s`.
pub fn horizon_scan<F>(spec: &DataSpec, cfg: &SolverConfig, d0s: &[f64], horizon: F) -> Result<Vec<ScanPoint>>
where
    F: Fn(&PhysicalState, &SolverConfig) -> Result<Option<f64>> + Sync,
{
    d0s.par_iter()
        .map(|&d0| {
            let mut spec = spec.clone();
            spec.d0 = Some(d0);
            let p0 = generate(&spec, cfg.grid, cfg.s)?;
            Ok(ScanPoint {
                d0,
                horizon: horizon(&p0, cfg)?,
            })
        })
        .collect()
}

/// [`horizon_scan`] with [`validity_horizon`] at growth factor 2.
pub fn d0_scan(spec: &DataSpec, cfg: &SolverConfig, d0s: &[f64]) -> Result<Vec<ScanPoint>> {
    horizon_scan(spec, cfg, d0s, |p0, c| validity_horizon(p0, c, 2.0))
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;
    use std::f64::consts::PI;

    use super::*;
    use crate::spectral::{propagate, Sign};
    use crate::symbol::Beta;

    fn grid(d: usize, n: usize) -> GridSpec {
        GridSpec::new(d, n, 2.0 * PI * 4.0).unwrap()
    }

    fn smooth(d: usize, n: usize, seed: u64, amplitude: f64) -> PhysicalState {
        let spec = DataSpec {
            generator: Generator::RandomSmooth { seed, cutoff: 2.0 },
            amplitude,
            d0: None,
        };
        generate(&spec, grid(d, n), 1.0).unwrap()
    }

    #[test]
    fn zero_state_maps_to_zero() {
        let p = generate(&DataSpec::new(Generator::Zero), grid(2, 16), 1.0).unwrap();
        let s = to_diagonal(&p).unwrap();
        assert!(s.u_plus.coeffs().iter().all(|c| c.norm() == 0.0));
        let (bp, bm) = nonlinearity(&s, true).unwrap();
        assert!(bp.coeffs().iter().chain(bm.coeffs()).all(|c| c.norm() == 0.0));
        let cfg = SolverConfig::new(*p.grid(), 0.1, 0.1);
        let next = step(&s, &cfg).unwrap();
        assert!(next.u_minus.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn still_water_splits_evenly() {
        let g = grid(2, 16);
        let spec = DataSpec::new(Generator::Gaussian { width: 2.0 });
        let p = generate(&spec, g, 1.0).unwrap();
        let s = to_diagonal(&p).unwrap();
        let half = p.eta.scale(Complex64::new(0.5, 0.0));
        assert!(s.u_plus.max_abs_diff(&half).unwrap() == 0.0);
        assert!(s.u_minus.max_abs_diff(&half).unwrap() == 0.0);
    }

    #[test]
    fn round_trip_is_identity() {
        for d in [1, 2] {
            let p = smooth(d, 32, 11, 1.0);
            let back = from_diagonal(&to_diagonal(&p).unwrap()).unwrap();
            assert!(back.eta.max_abs_diff(&p.eta).unwrap() < 1e-12);
            for (a, b) in back.v.components().iter().zip(p.v.components()) {
                assert!(a.max_abs_diff(b).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_rotational_or_drifting_velocity() {
        let g = grid(2, 16);
        let eta = SpectralField::zeros(g);
        let swirl = VectorField::new(vec![
            SpectralField::zeros(g),
            SpectralField::from_fn(g, |x| Complex64::new((2.0 * PI * x[0] / g.length).cos(), 0.0)).unwrap(),
        ])
        .unwrap();
        let p = PhysicalState { t: 0.0, eta: eta.clone(), v: swirl };
        assert!(matches!(to_diagonal(&p), Err(Error::Domain(_))));
        let drift = VectorField::new(vec![
            SpectralField::single_mode(g, [0, 0], Complex64::new(0.1, 0.0)).unwrap(),
            SpectralField::zeros(g),
        ])
        .unwrap();
        let p = PhysicalState { t: 0.0, eta, v: drift };
        assert!(matches!(to_diagonal(&p), Err(Error::Domain(_))));
    }

    fn grad(f: &SpectralField, j: usize) -> SpectralField {
        f.map_with_frequency(|q, c| c * Complex64::new(0.0, q.xi[j]))
    }

    // (B_+, B_-) from the physical equations: B = i d_t u -+ m0 u.
    fn physical_oracle(p: &PhysicalState) -> (SpectralField, SpectralField) {
        let g = *p.grid();
        let d = g.d;
        let v = p.v.components();
        let mut div_v = SpectralField::zeros(g);
        let mut div_flux = SpectralField::zeros(g);
        let mut speed2 = SpectralField::zeros(g);
        for (j, vj) in v.iter().enumerate() {
            div_v = &div_v + &grad(vj, j);
            div_flux = &div_flux + &grad(&p.eta.product(vj).unwrap(), j);
            speed2 = &speed2 + &vj.product(vj).unwrap();
        }
        let k = Multiplier::K;
        let eta_t = &(&SpectralField::zeros(g) - &div_v) - &k.apply(&div_flux);
        let pressure = &p.eta + &speed2.scale(Complex64::new(0.5, 0.0));
        let v_t: Vec<SpectralField> = (0..d)
            .map(|j| k.apply(&grad(&pressure, j)).scale(Complex64::new(-1.0, 0.0)))
            .collect();
        let u = to_diagonal(p).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let out = |sign: f64, u: &SpectralField| {
            let coeffs = (0..g.size())
                .map(|idx| {
                    let f = g.frequency(idx);
                    let rv: Complex64 = (0..d)
                        .map(|j| Multiplier::Riesz(j).value(&f) * v_t[j].coeffs()[idx])
                        .sum();
                    let sk = Multiplier::SqrtK.value(&f).re;
                    let ut = 0.5 * eta_t.coeffs()[idx] - sign * i * rv / (2.0 * sk);
                    i * ut - sign * f.norm() * sk * u.coeffs()[idx]
                })
                .collect();
            SpectralField::from_coeffs(g, coeffs).unwrap()
        };
        (out(1.0, &u.u_plus), out(-1.0, &u.u_minus))
    }

    #[test]
    fn nonlinearity_matches_physical_equations() {
        for d in [1, 2] {
            let p = smooth(d, 32, 5, 0.3);
            let (bp, bm) = nonlinearity(&to_diagonal(&p).unwrap(), false).unwrap();
            let (op, om) = physical_oracle(&p);
            let g = *p.grid();
            for i in 0..g.size() {
                let f = g.frequency(i);
                if (0..d).any(|j| f.is_nyquist(j)) {
                    continue;
                }
                assert!((bp.coeffs()[i] - op.coeffs()[i]).norm() < 1e-10, "d={d} +");
                assert!((bm.coeffs()[i] - om.coeffs()[i]).norm() < 1e-10, "d={d} -");
            }
        }
    }

    #[test]
    fn two_mode_hand_convolution() {
        let g = grid(2, 32);
        let modes = [([2i64, -1i64], Complex64::new(0.3, 0.1)), ([1, 3], Complex64::new(-0.2, 0.25))];
        let mut up = SpectralField::zeros(g);
        for (k, a) in modes {
            up.coeffs_mut()[g.flat(k).unwrap()] = a;
        }
        let um = SpectralField::zeros(g);
        let (bp, bm) = nonlinearity(&SolverState { t: 0.0, u_plus: up, u_minus: um }, true).unwrap();

        let dk = g.dk();
        let symbols = |k: [i64; 2]| {
            let xi = [dk * k[0] as f64, dk * k[1] as f64];
            let r = xi[0].hypot(xi[1]);
            let kk = if r == 0.0 { 1.0 } else { r.tanh() / r };
            let riesz = if r == 0.0 {
                [Complex64::new(0.0, 0.0); 2]
            } else {
                [Complex64::new(0.0, xi[0] / r), Complex64::new(0.0, xi[1] / r)]
            };
            (r, kk, riesz)
        };
        let mut flux: HashMap<[i64; 2], [Complex64; 2]> = HashMap::new();
        let mut square: HashMap<[i64; 2], Complex64> = HashMap::new();
        for (k, a) in modes {
            for (k2, a2) in modes {
                let (_, kk2, r2) = symbols(k2);
                let w2 = [a2 * r2[0] * kk2.sqrt(), a2 * r2[1] * kk2.sqrt()];
                let (_, kk1, r1) = symbols(k);
                let w1 = [a * r1[0] * kk1.sqrt(), a * r1[1] * kk1.sqrt()];
                let p = [k[0] + k2[0], k[1] + k2[1]];
                let e = flux.entry(p).or_default();
                e[0] += a * w2[0];
                e[1] += a * w2[1];
                *square.entry(p).or_default() += w1[0] * w2[0] + w1[1] * w2[1];
            }
        }
        let mut checked = 0;
        for i in 0..g.size() {
            let k = g.index(i);
            let (r, kk, rz) = symbols(k);
            let f = flux.get(&k).copied().unwrap_or_default();
            let q = square.get(&k).copied().unwrap_or_default();
            let first = -0.5 * r * kk * (rz[0] * f[0] + rz[1] * f[1]);
            let second = 0.25 * r * kk.sqrt() * q;
            assert!((bp.coeffs()[i] - (first - second)).norm() <= 1e-10, "{k:?}");
            assert!((bm.coeffs()[i] - (first + second)).norm() <= 1e-10, "{k:?}");
            if q.norm() > 0.0 {
                checked += 1;
            }
        }
        assert_eq!(checked, 3);
    }

    #[test]
    fn packed_real_evaluation_matches_general_one() {
        for d in [1, 2] {
            let p = smooth(d, 32, 21, 0.7);
            let u = to_diagonal(&p).unwrap();
            for dealias in [false, true] {
                let ops = Operators::new(*p.grid(), dealias);
                let general = ops.nonlinearity(u.u_plus.coeffs(), u.u_minus.coeffs());
                let packed = ops.nonlinearity_real(u.u_plus.coeffs(), u.u_minus.coeffs());
                for (g, q) in general.iter().zip(&packed) {
                    let diff = g.iter().zip(q).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                    assert!(diff < 1e-13, "d={d}: {diff:e}");
                }
            }
        }
    }

    #[test]
    fn linear_step_is_the_free_flow() {
        let p = smooth(2, 32, 3, 0.5);
        let s = to_diagonal(&p).unwrap();
        for integrator in [Integrator::ExponentialRk4, Integrator::Strang] {
            let mut cfg = SolverConfig::new(*p.grid(), 0.25, 0.25);
            cfg.nonlinear = false;
            cfg.dealias = false;
            cfg.integrator = integrator;
            let next = step(&s, &cfg).unwrap();
            let exact = propagate(&s.u_plus, Beta::Zero, Sign::Plus, 0.25);
            assert!(next.u_plus.max_abs_diff(&exact).unwrap() < 1e-12);
            let exact = propagate(&s.u_minus, Beta::Zero, Sign::Minus, 0.25);
            assert!(next.u_minus.max_abs_diff(&exact).unwrap() < 1e-12);
        }
    }

    #[test]
    fn step_keeps_fields_real() {
        let p = smooth(2, 32, 9, 0.5);
        let cfg = SolverConfig::new(*p.grid(), 0.05, 0.05);
        let next = step(&to_diagonal(&p).unwrap(), &cfg).unwrap();
        let q = from_diagonal(&next).unwrap();
        assert!(q.eta.reality_defect() < 1e-10);
        assert!(q.v.reality_defect() < 1e-10);
    }

    #[test]
    fn blow_up_reports_last_valid_time() {
        let p = smooth(1, 32, 2, 1.0);
        let mut cfg = SolverConfig::new(*p.grid(), 0.1, 1.0);
        cfg.blowup_threshold = 1e-3;
        match run(&p, &cfg) {
            Err(Error::BlowUp { t_last_valid }) => assert_eq!(t_last_valid, 0.0),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn schedule_lands_on_horizon() {
        let cfg = SolverConfig::new(grid(1, 16), 0.3, 1.0);
        let (n, h) = cfg.schedule();
        assert_eq!(n, 4);
        assert!((n as f64 * h - 1.0).abs() < 1e-15);
        let cfg = SolverConfig::new(grid(1, 16), 0.25, 1.0);
        assert_eq!(cfg.schedule().0, 4);
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = SolverConfig::new(grid(2, 32), 0.01, 1.0);
        let text = serde_json::to_string(&cfg).unwrap();
        assert!(text.contains("\"T\"") && text.contains("exponential-rk4"));
        let back: SolverConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let minimal: SolverConfig = serde_json::from_str(
            r#"{"grid": {"d": 1, "n": 64, "domain_length": 10.0}, "dt": 0.1, "T": 2.0}"#,
        )
        .unwrap();
        assert!(minimal.dealias && minimal.nonlinear);
    }
}
