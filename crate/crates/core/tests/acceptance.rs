//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs without the libtest harness so the report is always printed.

mod common;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dispersive_core::bessel::{bessel_j, bessel_tilde};
use dispersive_core::cli::{check_resolved, default_decade};
use dispersive_core::dyadic::{rho, DyadicScale};
use dispersive_core::kernel::{decay_fit, KernelConfig};
use dispersive_core::solver::{
    departure_horizon, horizon_scan, nonlinearity, DataSpec, Generator, Integrator, SolverConfig, SolverState,
    Stepper,
};
use dispersive_core::spectral::{propagate, Exponent, GridSpec, Sign, SpectralField};
use dispersive_core::strichartz::{
    bilinear_projected, in_lambda_set, prefactor, random_localized, sample_ratio, StrichartzSetup, Variant,
};
use dispersive_core::symbol::{
    bracket, c_coeff, comparability_scan, eval_m, eval_m_derivative, frozen_bound, log_grid, Beta, Claim,
    Quantity, SymbolParams,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn params(b: Beta) -> SymbolParams {
    SymbolParams::new(b)
}

fn symbol_bounds() -> Verdict {
    let grid = log_grid(1e-4, 1e4, 400);
    let mut worst_spread: f64 = 0.0;
    let mut failures = Vec::new();
    let mut count = 0;
    for b in Beta::ALL {
        for q in Quantity::all() {
            let report = comparability_scan(params(b), q, &grid).unwrap();
            count += 1;
            let ok = report.within(&frozen_bound(b, q));
            if report.claim == Claim::Comparable {
                worst_spread = worst_spread.max(report.spread());
                if report.spread() > 10.0 {
                    failures.push(format!("{q}/{}", b.as_u8()));
                    continue;
                }
            }
            if !ok {
                failures.push(format!("{q}/{}", b.as_u8()));
            }
        }
    }
    verdict(
        failures.is_empty(),
        format!("{count} claims, largest two-sided spread {worst_spread:.3}, failures {failures:?}"),
    )
}

// fourth-order central difference
fn central(f: impl Fn(f64) -> f64, r: f64, h: f64) -> f64 {
    (f(r - 2.0 * h) - 8.0 * f(r - h) + 8.0 * f(r + h) - f(r + 2.0 * h)) / (12.0 * h)
}

fn derivative_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let b = if rng.gen_bool(0.5) { Beta::Zero } else { Beta::One };
        let r = 10f64.powf(rng.gen_range(-1.3..1.3));
        let p = params(b);
        let h = 1e-3 * r;
        for k in 1..=4 {
            let lower = |x: f64| {
                if k == 1 {
                    eval_m(p, x).unwrap()
                } else {
                    eval_m_derivative(p, x, k - 1).unwrap()
                }
            };
            let exact = eval_m_derivative(p, r, k).unwrap();
            let fd = central(lower, r, h);
            worst = worst.max((fd - exact).abs() / exact.abs());
        }
    }
    verdict(worst <= 1e-6, format!("max relative error {worst:.2e} (tolerance 1e-6)"))
}

fn dispersive_decay() -> Verdict {
    let cfg = KernelConfig::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for (d, b) in [(1, Beta::Zero), (1, Beta::One), (2, Beta::Zero)] {
        let p = params(b);
        let mut scaled_min = f64::INFINITY;
        let mut scaled_max: f64 = 0.0;
        let mut slopes = Vec::new();
        for lam in [0.5, 1.0, 2.0] {
            let lambda = DyadicScale::from_lambda(lam).unwrap();
            let times = default_decade(p, lambda, &cfg);
            let fit = match decay_fit(d, p, lambda, &times, &cfg) {
                Ok(f) => f,
                Err(e) => return verdict(false, format!("d = {d}, lambda = {lam}: {e}")),
            };
            pass &= (fit.slope + d as f64 / 2.0).abs() <= 0.1;
            slopes.push(format!("{:.3}", fit.slope));
            let c = c_coeff(p, d, lambda);
            for s in &fit.samples {
                let scaled = s.sup * s.t.powf(d as f64 / 2.0) / c;
                scaled_min = scaled_min.min(scaled);
                scaled_max = scaled_max.max(scaled);
            }
        }
        let spread = scaled_max / scaled_min;
        pass &= spread < 20.0;
        parts.push(format!("(d={d},beta={}) slopes [{}] spread {spread:.2}", b.as_u8(), slopes.join(", ")));
    }
    verdict(pass, parts.join("; "))
}

fn bessel_properties() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut closed: f64 = 0.0;
    for i in 1..=200 {
        let r = 0.25 * i as f64;
        let exact = (2.0 / (PI * r)).sqrt() * r.sin();
        closed = closed.max((bessel_j(0.5, r).unwrap() - exact).abs());
    }
    let mut identity: f64 = 0.0;
    for _ in 0..100 {
        let alpha = rng.gen_range(0.0..3.0);
        let r = rng.gen_range(0.2..30.0);
        let fd = central(|x| bessel_tilde(alpha, x).unwrap(), r, 1e-3);
        let exact = -r.powf(-alpha) * bessel_j(alpha + 1.0, r).unwrap();
        identity = identity.max((fd - exact).abs());
    }
    verdict(
        closed <= 1e-10 && identity <= 1e-6,
        format!("J_1/2 closed form {closed:.2e} (1e-10), derivative identity {identity:.2e} (1e-6)"),
    )
}

fn partition_of_unity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let s = 10f64.powf(rng.gen_range(-4.0..4.0));
        let sum: f64 = (-40..=40).map(|j| rho(s / 2f64.powi(j))).sum();
        worst = worst.max((sum - 1.0).abs());
    }
    verdict(worst <= 1e-12, format!("max |sum - 1| {worst:.2e} over 1e4 points in [1e-4, 1e4]"))
}

fn random_field(grid: GridSpec, rng: &mut ChaCha8Rng) -> SpectralField {
    let coeffs = (0..grid.size())
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    SpectralField::from_coeffs(grid, coeffs).unwrap()
}

fn propagator() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut iso: f64 = 0.0;
    let mut group: f64 = 0.0;
    for grid in [GridSpec::new(1, 256, 20.0).unwrap(), GridSpec::new(2, 32, 7.0).unwrap()] {
        for b in Beta::ALL {
            for _ in 0..5 {
                let f = random_field(grid, &mut rng);
                let t1 = rng.gen_range(-10.0..10.0);
                let t2 = rng.gen_range(-10.0..10.0);
                let n0 = f.l2_norm();
                let g = propagate(&f, b, Sign::Plus, t1);
                iso = iso.max((g.l2_norm() - n0).abs() / n0);
                let two = propagate(&g, b, Sign::Plus, t2);
                let one = propagate(&f, b, Sign::Plus, t1 + t2);
                let scale = f.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
                let diff = two
                    .coeffs()
                    .iter()
                    .zip(one.coeffs())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                group = group.max(diff / scale);
            }
        }
    }
    verdict(
        iso <= 1e-12 && group <= 1e-12,
        format!("isometry {iso:.2e}, group law {group:.2e} (1e-12)"),
    )
}

fn strichartz_envelope() -> Verdict {
    let cases = [
        (1usize, 8.0, 4.0, GridSpec::new(1, 1024, 32.0 * PI).unwrap()),
        (2, 4.0, 4.0, GridSpec::new(2, 128, 32.0 * PI).unwrap()),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (d, q, r, grid) in cases {
        for (i, lam) in [0.5, 1.0, 2.0].into_iter().enumerate() {
            let lambda = DyadicScale::from_lambda(lam).unwrap();
            let setup = StrichartzSetup {
                d,
                beta: Beta::Zero,
                lambda,
                q: Exponent::new(q).unwrap(),
                r: Exponent::new(r).unwrap(),
                horizon: 10.0,
                n_t: 64,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(100 + 10 * d as u64 + i as u64);
            // the first 200 samples are a prefix of the 400
            let ratios: Vec<f64> = (0..400)
                .map(|_| sample_ratio(&setup, &random_localized(grid, lambda, &mut rng)).unwrap())
                .collect();
            let r200 = ratios[..200].iter().copied().fold(0.0, f64::max);
            let r400 = ratios.iter().copied().fold(0.0, f64::max);
            let change = (r400 / r200 - 1.0).abs();
            pass &= r200.is_finite() && r400.is_finite() && change <= 0.2;
            parts.push(format!("({d},{q},{r}) lambda {lam}: {r200:.4} -> {r400:.4}"));
        }
    }
    let mut identity: f64 = 0.0;
    for j in -6..=6 {
        let lambda = DyadicScale::new(j);
        let lhs = prefactor(params(Beta::Zero), 2, lambda, Exponent::new(4.0).unwrap());
        let rhs = bracket(lambda.lambda()).powf(3.0 / 8.0);
        identity = identity.max((lhs / rhs - 1.0).abs());
    }
    pass &= identity <= 1e-12;
    verdict(pass, format!("{}; prefactor identity {identity:.2e}", parts.join("; ")))
}

fn bilinear_vanishing() -> Verdict {
    let grid = GridSpec::new(2, 256, 4.0 * PI).unwrap();
    let triples = [
        [16.0, 1.0, 1.0],
        [1.0, 16.0, 1.0],
        [1.0, 1.0, 16.0],
        [0.5, 8.0, 0.5],
        [16.0, 2.0, 0.5],
        [2.0, 0.5, 16.0],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for variant in [Variant::One, Variant::Two] {
        for t in &triples {
            check_resolved(grid, t).unwrap();
            let l = t.map(|x| DyadicScale::from_lambda(x).unwrap());
            assert!(!in_lambda_set(l[0], l[1], l[2]));
            for _ in 0..3 {
                let u = random_localized(grid, l[1], &mut rng);
                let v = random_localized(grid, l[2], &mut rng);
                let denom = u.l2_norm() * v.l2_norm();
                assert!(denom > 0.0, "empty annulus for {t:?}");
                let p = bilinear_projected(variant, l, &u, &v).unwrap();
                worst = worst.max(p.l2_norm() / denom);
            }
        }
    }
    verdict(worst < 1e-10, format!("largest relative projected product {worst:.2e} (1e-10)"))
}

// B_pm by direct convolution of two Fourier modes
fn hand_nonlinearity(
    grid: GridSpec,
    modes: &[([i64; 2], Complex64, Complex64)],
) -> HashMap<[i64; 2], (Complex64, Complex64)> {
    let i = Complex64::new(0.0, 1.0);
    let d = grid.d;
    let xi = |k: [i64; 2]| -> [f64; 2] { [k[0] as f64 * grid.dk(), k[1] as f64 * grid.dk()] };
    let norm = |x: [f64; 2]| (x[0] * x[0] + x[1] * x[1]).sqrt();
    let k_symbol = |r: f64| if r == 0.0 { 1.0 } else { r.tanh() / r };
    let riesz = |k: [i64; 2], j: usize| {
        let x = xi(k);
        let r = norm(x);
        if r == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            i * x[j] / r
        }
    };
    // sum = u_+ + u_-, w_j = R_j sqrt(K) (u_+ - u_-)
    let mut sum: HashMap<[i64; 2], Complex64> = HashMap::new();
    let mut w: Vec<HashMap<[i64; 2], Complex64>> = vec![HashMap::new(); d];
    for &(k, up, um) in modes {
        *sum.entry(k).or_default() += up + um;
        let sk = k_symbol(norm(xi(k))).sqrt();
        for (j, wj) in w.iter_mut().enumerate() {
            *wj.entry(k).or_default() += riesz(k, j) * sk * (up - um);
        }
    }
    let add = |a: [i64; 2], b: [i64; 2]| [a[0] + b[0], a[1] + b[1]];
    let mut flux: Vec<HashMap<[i64; 2], Complex64>> = vec![HashMap::new(); d];
    let mut ww: HashMap<[i64; 2], Complex64> = HashMap::new();
    for (j, wj) in w.iter().enumerate() {
        for (&p, &a) in &sum {
            for (&q, &b) in wj {
                *flux[j].entry(add(p, q)).or_default() += a * b;
            }
        }
        for (&p, &a) in wj {
            for (&q, &b) in wj {
                *ww.entry(add(p, q)).or_default() += a * b;
            }
        }
    }
    let mut keys: Vec<[i64; 2]> = ww.keys().copied().collect();
    for f in &flux {
        keys.extend(f.keys().copied());
    }
    let mut out = HashMap::new();
    for k in keys {
        let r = norm(xi(k));
        let kk = k_symbol(r);
        let div: Complex64 = (0..d).map(|j| riesz(k, j) * flux[j].get(&k).copied().unwrap_or_default()).sum();
        let first = -0.5 * r * kk * div;
        let second = 0.25 * r * kk.sqrt() * ww.get(&k).copied().unwrap_or_default();
        out.insert(k, (first - second, first + second));
    }
    out
}

fn two_mode_error() -> f64 {
    let grid = GridSpec::new(2, 32, 2.0 * PI).unwrap();
    let modes = [
        ([1, 2], Complex64::new(0.3, -0.2), Complex64::new(0.0, 0.0)),
        ([-3, 1], Complex64::new(0.0, 0.0), Complex64::new(-0.1, 0.25)),
    ];
    let mut up = SpectralField::zeros(grid);
    let mut um = SpectralField::zeros(grid);
    for &(k, a, b) in &modes {
        let idx = grid.flat(k).unwrap();
        up.coeffs_mut()[idx] = a;
        um.coeffs_mut()[idx] = b;
    }
    let state = SolverState {
        t: 0.0,
        u_plus: up,
        u_minus: um,
    };
    let (bp, bm) = nonlinearity(&state, false).unwrap();
    let hand = hand_nonlinearity(grid, &modes);
    let mut worst: f64 = 0.0;
    for idx in 0..grid.size() {
        let k = grid.index(idx);
        let (hp, hm) = hand.get(&k).copied().unwrap_or_default();
        worst = worst.max((bp.coeffs()[idx] - hp).norm()).max((bm.coeffs()[idx] - hm).norm());
    }
    worst
}

fn linear_limit_error() -> f64 {
    let mut worst: f64 = 0.0;
    for d in [1, 2] {
        let g = common::grid(d, if d == 1 { 128 } else { 32 });
        let p0 = common::smooth_data(g, 1.0);
        let u0 = dispersive_core::solver::to_diagonal(&p0).unwrap();
        for integrator in [Integrator::ExponentialRk4, Integrator::Strang] {
            let stepper = Stepper::new(g, 0.1, integrator, false, false).unwrap();
            let mut u = u0.clone();
            for _ in 0..20 {
                u = stepper.step(&u, 1e12).unwrap();
            }
            let fp = propagate(&u0.u_plus, Beta::Zero, Sign::Plus, 2.0);
            let fm = propagate(&u0.u_minus, Beta::Zero, Sign::Minus, 2.0);
            let scale = u0.u_plus.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
            worst = worst
                .max(u.u_plus.max_abs_diff(&fp).unwrap() / scale)
                .max(u.u_minus.max_abs_diff(&fm).unwrap() / scale);
        }
    }
    worst
}

fn solver_correctness() -> Verdict {
    let linear = linear_limit_error();
    let hand = two_mode_error();
    let orders = common::temporal_orders(Integrator::ExponentialRk4);
    let order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let refine = common::self_convergence(1).max(common::self_convergence(2));
    verdict(
        linear <= 1e-12 && hand <= 1e-10 && order >= 3.5 && refine <= 1e-6,
        format!(
            "linear limit {linear:.2e} (1e-12), two-mode {hand:.2e} (1e-10), order {order:.3} (3.5), refinement {refine:.2e} (1e-6)"
        ),
    )
}

fn existence_time_scaling() -> Verdict {
    let grid = GridSpec::new(1, 128, 4.0 * PI).unwrap();
    let mut cfg = SolverConfig::new(grid, 0.05, 40_000.0);
    cfg.frame_every = 20;
    let spec = DataSpec::new(Generator::RandomSmooth { seed: 3, cutoff: 1.5 });
    let ladder = [0.05, 0.1, 0.2];
    let points = match horizon_scan(&spec, &cfg, &ladder, |p0, c| departure_horizon(p0, c, 0.25)) {
        Ok(p) => p,
        Err(e) => return verdict(false, e.to_string()),
    };
    let horizons: Vec<Option<f64>> = points.iter().map(|p| p.horizon).collect();
    let Some(h) = horizons.iter().copied().collect::<Option<Vec<f64>>>() else {
        return verdict(false, format!("horizon not reached within T: {horizons:?}"));
    };
    let ratios = [h[0] / h[1], h[1] / h[2]];
    verdict(
        ratios.iter().all(|r| (2.5..=6.0).contains(r)),
        format!(
            "D0 {ladder:?}: departure horizons [{:.0}, {:.0}, {:.0}], ratios [{:.2}, {:.2}] (within [2.5, 6])",
            h[0], h[1], h[2], ratios[0], ratios[1]
        ),
    )
}

type Criterion = (&'static str, Option<f64>, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("symbol bounds", Some(1.0), symbol_bounds),
        ("derivative oracle", Some(1.0), derivative_oracle),
        ("dispersive decay", None, dispersive_decay),
        ("Bessel properties", Some(1.0), bessel_properties),
        ("partition of unity", Some(1.0), partition_of_unity),
        ("propagator", Some(1.0), propagator),
        ("Strichartz envelope", None, strichartz_envelope),
        ("bilinear vanishing", Some(10.0), bilinear_vanishing),
        ("solver correctness", None, solver_correctness),
        ("existence-time scaling", None, existence_time_scaling),
    ];
    let filter = std::env::args().nth(1).filter(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (n, (name, budget, run)) in criteria.iter().enumerate() {
        if let Some(f) = &filter {
            if !name.contains(f.as_str()) {
                continue;
            }
        }
        let start = Instant::now();
        let v = run();
        let secs = start.elapsed().as_secs_f64();
        let in_time = budget.is_none_or(|b| secs < b);
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = budget.map_or(String::new(), |b| format!(", budget {b} s"));
        println!(
            "{} {:>2}. {name}: {} [{secs:.2} s{budget}]",
            if pass { "PASS" } else { "FAIL" },
            n + 1,
            v.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
