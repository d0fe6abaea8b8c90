//! Solver oracles shared by the convergence tests and the acceptance suite.
#![allow(dead_code)]

use std::f64::consts::PI;

use dispersive_core::solver::{
    generate, run_with, to_diagonal, Control, DataSpec, Generator, Integrator, PhysicalState, SolverConfig,
    SolverState, Stepper,
};
use dispersive_core::spectral::{propagate, GridSpec, Sign, SpectralField};
use dispersive_core::symbol::Beta;

pub fn grid(d: usize, n: usize) -> GridSpec {
    GridSpec::new(d, n, 4.0 * PI).unwrap()
}

pub fn smooth_data(g: GridSpec, d0: f64) -> PhysicalState {
    let mut spec = DataSpec::new(Generator::RandomSmooth { seed: 3, cutoff: 1.5 });
    spec.d0 = Some(d0);
    generate(&spec, g, 1.0).unwrap()
}

pub fn final_state(p0: &PhysicalState, cfg: &SolverConfig) -> SolverState {
    let mut cfg = *cfg;
    cfg.frame_every = usize::MAX;
    let mut last = None;
    run_with(p0, &cfg, |p, _| {
        last = Some(p.clone());
        Ok(Control::Continue)
    })
    .unwrap();
    to_diagonal(&last.unwrap()).unwrap()
}

// relative l2 distance of the coefficients, matched by wavenumber
fn field_distance(a: &SpectralField, b: &SpectralField) -> (f64, f64) {
    let (small, large) = if a.grid().n <= b.grid().n { (a, b) } else { (b, a) };
    let g = *small.grid();
    let mut diff = 0.0;
    for i in 0..g.size() {
        let k = g.index(i);
        diff += (small.coeff(k) - large.coeff(k)).norm_sqr();
    }
    // modes only the larger grid carries
    let lg = *large.grid();
    let mut extra = 0.0;
    for i in 0..lg.size() {
        let k = lg.index(i);
        if g.flat(k).is_none() {
            extra += large.coeffs()[i].norm_sqr();
        }
    }
    let norm: f64 = large.coeffs().iter().map(|c| c.norm_sqr()).sum();
    (diff + extra, norm)
}

pub fn relative_distance(a: &SolverState, b: &SolverState) -> f64 {
    let (d1, n1) = field_distance(&a.u_plus, &b.u_plus);
    let (d2, n2) = field_distance(&a.u_minus, &b.u_minus);
    ((d1 + d2) / (n1 + n2)).sqrt()
}

fn config(g: GridSpec, dt: f64, t: f64) -> SolverConfig {
    SolverConfig::new(g, dt, t)
}

/// Observed order `log2(e(dt) / e(dt/2))` from three step sizes against a
/// fine reference.
pub fn temporal_orders(integrator: Integrator) -> Vec<f64> {
    let g = grid(1, 64);
    let p0 = smooth_data(g, 2.0);
    let horizon = 2.0;
    let mut reference_cfg = config(g, 0.2 / 64.0, horizon);
    reference_cfg.integrator = integrator;
    let reference = final_state(&p0, &reference_cfg);
    let errors: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&dt| {
            let mut cfg = config(g, dt, horizon);
            cfg.integrator = integrator;
            relative_distance(&final_state(&p0, &cfg), &reference)
        })
        .collect();
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

// same coefficients on a finer grid
fn embed(f: &SpectralField, fine: GridSpec) -> SpectralField {
    let mut out = SpectralField::zeros(fine);
    for i in 0..f.grid().size() {
        let k = f.grid().index(i);
        let j = fine.flat(k).expect("fine grid contains the coarse modes");
        out.coeffs_mut()[j] = f.coeffs()[i];
    }
    out
}

/// Relative change of the `T`-time solution under `n -> 2n`, `dt -> dt/2`.
pub fn self_convergence(d: usize) -> f64 {
    let (n, dt, horizon) = if d == 1 { (64, 0.02, 2.0) } else { (64, 0.02, 1.0) };
    let coarse = grid(d, n);
    let fine = grid(d, 2 * n);
    let spec = {
        let mut s = DataSpec::new(Generator::RandomSmooth { seed: 3, cutoff: 1.5 });
        s.d0 = Some(0.5);
        s
    };
    let p_coarse = generate(&spec, coarse, 1.0).unwrap();
    let p_fine = PhysicalState {
        t: 0.0,
        eta: embed(&p_coarse.eta, fine),
        v: p_coarse.v.map(|c| embed(c, fine)),
    };
    let a = final_state(&p_coarse, &config(coarse, dt, horizon));
    let b = final_state(&p_fine, &config(fine, dt / 2.0, horizon));
    relative_distance(&a, &b)
}

fn free_flow(u0: &SolverState, t: f64) -> SolverState {
    SolverState {
        t,
        u_plus: propagate(&u0.u_plus, Beta::Zero, Sign::Plus, t),
        u_minus: propagate(&u0.u_minus, Beta::Zero, Sign::Minus, t),
    }
}

/// `L^2` deviation from the free flow at `T` for data of size `eps`.
pub fn deviation(eps: f64) -> f64 {
    let g = grid(1, 64);
    let p0 = smooth_data(g, eps);
    let cfg = config(g, 0.05, 4.0);
    let u0 = to_diagonal(&p0).unwrap();
    let u = final_state(&p0, &cfg);
    let free = free_flow(&u0, cfg.horizon);
    (&u.u_plus - &free.u_plus).l2_norm() + (&u.u_minus - &free.u_minus).l2_norm()
}

/// One-step errors against a 256-substep reference for `h` and `h/2`.
pub fn local_errors(h: f64) -> (f64, f64) {
    let g = grid(1, 64);
    let p0 = smooth_data(g, 2.0);
    let u0 = to_diagonal(&p0).unwrap();
    let one = |h: f64| {
        let single = Stepper::new(g, h, Integrator::ExponentialRk4, true, true).unwrap();
        let fine = Stepper::new(g, h / 256.0, Integrator::ExponentialRk4, true, true).unwrap();
        let a = single.step(&u0, 1e12).unwrap();
        let mut b = u0.clone();
        for _ in 0..256 {
            b = fine.step(&b, 1e12).unwrap();
        }
        relative_distance(&a, &b)
    };
    (one(h), one(h / 2.0))
}
