//! Batch driver: one subcommand per experiment, JSON configs in, CSV out.
//!
//! Exit codes: `0` pass, `1` a check failed (or the computation could not
//! be carried out), `2` bad usage or configuration.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::dyadic::DyadicScale;
use crate::error::{Error, Result};
use crate::kernel::{decay_fit, log_times, time_threshold, KernelConfig};
use crate::solver::{self, Control, DataSpec, Generator, SolverConfig};
use crate::spectral::{io, Exponent, GridSpec, SpectralField};
use crate::strichartz::{
    bilinear_projected, bilinear_ratio, in_lambda_set, prefactor, random_localized,
    strichartz_ratio, BilinearSetup, StrichartzSetup, Variant,
};
use crate::symbol::{c_coeff, comparability_scan, frozen_bound, log_grid, Beta, Quantity, SymbolParams};

/// Relative size below which a projected bilinear term counts as zero.
pub const VANISHING_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(name = "dispersive", version, about = "Dispersive estimates and Whitham-Boussinesq experiments")]
pub struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "DISPERSIVE_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ratio envelopes of the symbol bounds.
    SymbolCheck(SymbolCheckArgs),
    /// Supremum of the localized kernel and its decay rate.
    KernelDecay(KernelDecayArgs),
    /// Homogeneous Strichartz ratios on random localized data.
    Strichartz(CommonArgs),
    /// Bilinear probes and the vanishing check outside the admissible triples.
    Bilinear(CommonArgs),
    /// Runs the Whitham-Boussinesq solver.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the resolved config and exit.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Debug, Args)]
pub struct SymbolCheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Restrict to one quantity (`m`, `m_prime`, `m_second`, `m_k<k>`, `inv_mprime_k<k>`).
    #[arg(long)]
    pub quantity: Option<Quantity>,
    /// Restrict to one surface-tension switch (0 or 1).
    #[arg(long)]
    pub beta: Option<u8>,
}

#[derive(Debug, Args)]
pub struct KernelDecayArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also write a long-format table (`lambda,t,quantity,value`) for plotting.
    #[arg(long)]
    pub emit_plot_table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for diagnostics, frames and scan tables.
    #[arg(long, default_value = "solve-out")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub dry_run: bool,
}

/// Log-spaced grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogGrid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl LogGrid {
    fn values(&self) -> Result<Vec<f64>> {
        if !(self.lo > 0.0 && self.hi > self.lo && self.points >= 2) {
            return Err(Error::Config(format!("bad log grid {self:?}")));
        }
        Ok(log_grid(self.lo, self.hi, self.points))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolCheckConfig {
    #[serde(default = "all_betas")]
    pub beta: Vec<Beta>,
    #[serde(default = "Quantity::all")]
    pub quantities: Vec<Quantity>,
    #[serde(default = "default_symbol_grid")]
    pub grid: LogGrid,
}

fn all_betas() -> Vec<Beta> {
    Beta::ALL.to_vec()
}

fn default_symbol_grid() -> LogGrid {
    LogGrid {
        lo: 1e-4,
        hi: 1e4,
        points: 400,
    }
}

impl Default for SymbolCheckConfig {
    fn default() -> Self {
        SymbolCheckConfig {
            beta: all_betas(),
            quantities: Quantity::all(),
            grid: default_symbol_grid(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDecayConfig {
    pub d: usize,
    pub beta: Beta,
    pub lambda_list: Vec<f64>,
    /// Fit times; when absent each `lambda` uses [`default_decade`].
    #[serde(default)]
    pub t_list: Option<Vec<f64>>,
    #[serde(default)]
    pub kernel: KernelConfig,
}

impl Default for KernelDecayConfig {
    fn default() -> Self {
        KernelDecayConfig {
            d: 1,
            beta: Beta::Zero,
            lambda_list: vec![0.5, 1.0, 2.0],
            t_list: None,
            kernel: KernelConfig::default(),
        }
    }
}

/// Twelve log-spaced times over the decade starting at four times the
/// dispersive-regime threshold, pushed out by `lambda^{-2}` below `lambda = 1`
/// where the curvature of the phase is weak.
pub fn default_decade(params: SymbolParams, lambda: DyadicScale, cfg: &KernelConfig) -> Vec<f64> {
    let l = lambda.lambda();
    let t0 = 4.0 * time_threshold(params, lambda, cfg.tcond_factor) * (1.0 / l).max(1.0).powi(2);
    log_times(t0, 10.0 * t0, 12)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrichartzConfig {
    pub beta: Beta,
    pub q: Exponent,
    pub r: Exponent,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n_t: usize,
    pub grid: GridSpec,
    pub lambdas: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for StrichartzConfig {
    fn default() -> Self {
        StrichartzConfig {
            beta: Beta::Zero,
            q: Exponent::new(4.0).expect("finite exponent"),
            r: Exponent::new(4.0).expect("finite exponent"),
            horizon: 10.0,
            n_t: 64,
            grid: GridSpec {
                d: 2,
                n: 128,
                length: 32.0 * std::f64::consts::PI,
            },
            lambdas: vec![0.5, 1.0, 2.0],
            samples: 200,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BilinearConfig {
    pub variant: u8,
    pub q: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub n_t: usize,
    pub grid: GridSpec,
    /// `(lambda_0, lambda_1, lambda_2)` triples.
    pub triples: Vec<[f64; 3]>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for BilinearConfig {
    fn default() -> Self {
        BilinearConfig {
            variant: 1,
            q: 4.0,
            horizon: 2.0,
            n_t: 16,
            grid: GridSpec {
                d: 2,
                n: 128,
                length: 4.0 * std::f64::consts::PI,
            },
            triples: vec![[1.0, 1.0, 1.0], [2.0, 1.0, 1.0], [0.5, 1.0, 2.0], [16.0, 1.0, 1.0], [1.0, 8.0, 0.5]],
            samples: 4,
            seed: 1,
        }
    }
}

/// How a data-size scan measures the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HorizonRule {
    /// First time the data size has grown by `growth`.
    Growth { growth: f64 },
    /// First time the distance from the free flow reaches `theta` times the data size.
    Departure { theta: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(flatten)]
    pub solver: SolverConfig,
    pub data: DataSpec,
    /// Write every frame in the binary field format.
    #[serde(default)]
    pub write_frames: bool,
    /// Data sizes for a horizon scan; the single run is skipped when present.
    #[serde(default)]
    pub d0_scan: Option<Vec<f64>>,
    #[serde(default = "default_rule")]
    pub horizon_rule: HorizonRule,
}

fn default_rule() -> HorizonRule {
    HorizonRule::Growth { growth: 2.0 }
}

impl Default for SolveConfig {
    fn default() -> Self {
        let grid = GridSpec {
            d: 1,
            n: 256,
            length: 32.0 * std::f64::consts::PI,
        };
        let mut solver = SolverConfig::new(grid, 0.05, 10.0);
        solver.frame_every = 20;
        SolveConfig {
            solver,
            data: DataSpec {
                generator: Generator::Gaussian { width: 2.0 },
                amplitude: 0.1,
                d0: None,
            },
            write_frames: false,
            d0_scan: None,
            horizon_rule: default_rule(),
        }
    }
}

/// Result of a subcommand that ran to completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Violation(String),
}

/// Fixed 15-significant-digit rendering used in every CSV.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.14e}")
    } else {
        format!("{x}")
    }
}

fn load<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn dry_run<T: Serialize>(cfg: &T) -> Result<Outcome> {
    println!("{}", serde_json::to_string_pretty(cfg)?);
    Ok(Outcome::Pass)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn out_path(args: &CommonArgs, default: &str) -> PathBuf {
    args.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn scale(lambda: f64) -> Result<DyadicScale> {
    DyadicScale::from_lambda(lambda).map_err(|e| Error::Config(e.to_string()))
}

pub fn symbol_check(args: &SymbolCheckArgs) -> Result<Outcome> {
    let mut cfg: SymbolCheckConfig = load(&args.common.config)?;
    if let Some(q) = args.quantity {
        cfg.quantities = vec![q];
    }
    if let Some(b) = args.beta {
        cfg.beta = vec![Beta::try_from(b).map_err(|e| Error::Config(e.to_string()))?];
    }
    if cfg.beta.is_empty() || cfg.quantities.is_empty() {
        return Err(Error::Config("need at least one beta and one quantity".into()));
    }
    if args.common.dry_run {
        return dry_run(&cfg);
    }
    let grid = cfg.grid.values()?;
    let mut out = create(&out_path(&args.common, "symbol_check.csv"))?;
    writeln!(out, "quantity,beta,claim,ratio_min,ratio_max,spread,max_ratio,max_spread,pass")?;
    let mut failed = Vec::new();
    for &q in &cfg.quantities {
        for &b in &cfg.beta {
            let report = comparability_scan(SymbolParams::new(b), q, &grid)?;
            let bound = frozen_bound(b, q);
            let pass = report.within(&bound);
            if !pass {
                failed.push(format!("{q} (beta = {b})"));
            }
            writeln!(
                out,
                "{q},{},{:?},{},{},{},{},{},{pass}",
                b.as_u8(),
                report.claim,
                num(report.ratio_min),
                num(report.ratio_max),
                num(report.spread()),
                num(bound.max_ratio),
                num(bound.max_spread),
            )?;
        }
    }
    out.flush()?;
    Ok(if failed.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Violation(format!("envelope exceeded for {}", failed.join(", ")))
    })
}

pub fn kernel_decay(args: &KernelDecayArgs) -> Result<Outcome> {
    let cfg: KernelDecayConfig = load(&args.common.config)?;
    if cfg.lambda_list.is_empty() {
        return Err(Error::Config("lambda_list is empty".into()));
    }
    if !(1..=3).contains(&cfg.d) {
        return Err(Error::Config(format!("d must be 1, 2 or 3, got {}", cfg.d)));
    }
    if args.common.dry_run {
        return dry_run(&cfg);
    }
    let params = SymbolParams::new(cfg.beta);
    let d = cfg.d as f64;
    let mut out = create(&out_path(&args.common, "kernel_decay.csv"))?;
    writeln!(out, "d,beta,lambda,t,sup,scaled,slope")?;
    let mut plot = match &args.emit_plot_table {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "lambda,t,quantity,value")?;
            Some(w)
        }
        None => None,
    };
    let mut failed = Vec::new();
    for &lam in &cfg.lambda_list {
        let lambda = scale(lam)?;
        let times = match &cfg.t_list {
            Some(t) => t.clone(),
            None => default_decade(params, lambda, &cfg.kernel),
        };
        let fit = decay_fit(cfg.d, params, lambda, &times, &cfg.kernel)?;
        let c = c_coeff(params, cfg.d, lambda);
        if (fit.slope + d / 2.0).abs() > 0.1 {
            failed.push(format!("lambda = {lam}: slope {:.4}", fit.slope));
        }
        for s in &fit.samples {
            let scaled = s.sup * s.t.abs().powf(d / 2.0) / c;
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                cfg.d,
                cfg.beta.as_u8(),
                num(lam),
                num(s.t),
                num(s.sup),
                num(scaled),
                num(fit.slope)
            )?;
            if let Some(w) = plot.as_mut() {
                writeln!(w, "{},{},sup,{}", num(lam), num(s.t), num(s.sup))?;
                writeln!(w, "{},{},scaled,{}", num(lam), num(s.t), num(scaled))?;
                let fitted = (fit.intercept + fit.slope * s.t.abs().ln()).exp();
                writeln!(w, "{},{},fit,{}", num(lam), num(s.t), num(fitted))?;
            }
        }
    }
    out.flush()?;
    if let Some(mut w) = plot {
        w.flush()?;
    }
    Ok(if failed.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Violation(format!("slope outside -d/2 +- 0.1: {}", failed.join("; ")))
    })
}

pub fn strichartz(args: &CommonArgs) -> Result<Outcome> {
    let cfg: StrichartzConfig = load(&args.config)?;
    cfg.grid.validate()?;
    if cfg.lambdas.is_empty() || cfg.samples == 0 {
        return Err(Error::Config("need at least one lambda and one sample".into()));
    }
    if args.dry_run {
        return dry_run(&cfg);
    }
    let mut out = create(&out_path(args, "strichartz.csv"))?;
    writeln!(out, "d,beta,q,r,lambda,samples,ratio,prefactor")?;
    let params = SymbolParams::new(cfg.beta);
    let mut failed = Vec::new();
    for (i, &lam) in cfg.lambdas.iter().enumerate() {
        let lambda = scale(lam)?;
        let setup = StrichartzSetup {
            d: cfg.grid.d,
            beta: cfg.beta,
            lambda,
            q: cfg.q,
            r: cfg.r,
            horizon: cfg.horizon,
            n_t: cfg.n_t,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
        let samples: Vec<SpectralField> = (0..cfg.samples)
            .map(|_| random_localized(cfg.grid, lambda, &mut rng))
            .collect();
        let ratio = strichartz_ratio(&setup, &samples)?;
        if !ratio.is_finite() {
            failed.push(format!("lambda = {lam}"));
        }
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cfg.grid.d,
            cfg.beta.as_u8(),
            cfg.q,
            cfg.r,
            num(lam),
            cfg.samples,
            num(ratio),
            num(prefactor(params, cfg.grid.d, lambda, cfg.q))
        )?;
    }
    out.flush()?;
    Ok(if failed.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Violation(format!("non-finite ratio at {}", failed.join(", ")))
    })
}

/// Rejects triples whose output annulus or product support exceeds the
/// grid's Nyquist frequency: an unresolved product would alias, and an
/// empty annulus would make the vanishing check vacuous.
pub fn check_resolved(grid: GridSpec, triple: &[f64; 3]) -> Result<()> {
    let nyquist = std::f64::consts::PI * grid.n as f64 / grid.length;
    let needed = (2.0 * triple[0]).max(2.0 * (triple[1] + triple[2]));
    if needed > nyquist {
        return Err(Error::Config(format!(
            "triple {triple:?} needs frequencies up to {needed}, grid resolves {nyquist}"
        )));
    }
    Ok(())
}

pub fn bilinear(args: &CommonArgs) -> Result<Outcome> {
    let cfg: BilinearConfig = load(&args.config)?;
    cfg.grid.validate()?;
    let variant = Variant::try_from(cfg.variant)?;
    if cfg.triples.is_empty() || cfg.samples == 0 {
        return Err(Error::Config("need at least one triple and one sample".into()));
    }
    if args.dry_run {
        return dry_run(&cfg);
    }
    let mut out = create(&out_path(args, "bilinear.csv"))?;
    writeln!(out, "variant,lambda0,lambda1,lambda2,in_lambda,kind,value")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut failed = Vec::new();
    for triple in &cfg.triples {
        let lambdas = [scale(triple[0])?, scale(triple[1])?, scale(triple[2])?];
        check_resolved(cfg.grid, triple)?;
        let u: Vec<SpectralField> = (0..cfg.samples)
            .map(|_| random_localized(cfg.grid, lambdas[1], &mut rng))
            .collect();
        let v: Vec<SpectralField> = (0..cfg.samples)
            .map(|_| random_localized(cfg.grid, lambdas[2], &mut rng))
            .collect();
        let inside = in_lambda_set(lambdas[0], lambdas[1], lambdas[2]);
        let (kind, value) = if inside {
            let setup = BilinearSetup {
                variant,
                lambdas,
                q: cfg.q,
                horizon: cfg.horizon,
                n_t: cfg.n_t,
            };
            ("ratio", bilinear_ratio(&setup, &u, &v)?)
        } else {
            let mut worst: f64 = 0.0;
            for (a, b) in u.iter().zip(&v) {
                let p = bilinear_projected(variant, lambdas, a, b)?;
                worst = worst.max(p.l2_norm() / (a.l2_norm() * b.l2_norm()));
            }
            if worst >= VANISHING_TOLERANCE {
                failed.push(format!("{triple:?}: {worst:e}"));
            }
            ("vanishing", worst)
        };
        writeln!(
            out,
            "{},{},{},{},{inside},{kind},{}",
            cfg.variant,
            num(triple[0]),
            num(triple[1]),
            num(triple[2]),
            num(value)
        )?;
    }
    out.flush()?;
    Ok(if failed.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Violation(format!("projected product does not vanish: {}", failed.join("; ")))
    })
}

/// Reality and curl tolerances checked on every frame of `solve`.
pub const REALITY_TOLERANCE: f64 = 1e-10;
pub const CURL_TOLERANCE: f64 = 1e-9;

pub fn solve(args: &SolveArgs) -> Result<Outcome> {
    let cfg: SolveConfig = load(&args.config)?;
    cfg.solver.validate()?;
    if args.dry_run {
        return dry_run(&cfg);
    }
    fs::create_dir_all(&args.out_dir)?;
    if let Some(d0s) = &cfg.d0_scan {
        return solve_scan(&cfg, d0s, &args.out_dir);
    }
    let p0 = solver::generate(&cfg.data, cfg.solver.grid, cfg.solver.s)?;
    let mut diag = create(&args.out_dir.join("diagnostics.csv"))?;
    writeln!(
        diag,
        "t,Hs_eta,Hs_v,Hs_u,tail_mass,curl_defect,reality_defect,reprojection"
    )?;
    let frames_dir = args.out_dir.join("frames");
    if cfg.write_frames {
        fs::create_dir_all(&frames_dir)?;
    }
    let mut worst_reality: f64 = 0.0;
    let mut worst_curl: f64 = 0.0;
    let mut index = 0usize;
    let outcome = solver::run_with(&p0, &cfg.solver, |p, d| {
        worst_reality = worst_reality.max(d.reality_defect);
        worst_curl = worst_curl.max(d.curl_defect);
        writeln!(
            diag,
            "{},{},{},{},{},{},{},{}",
            num(d.t),
            num(d.hs_eta),
            num(d.hs_v),
            num(d.hs_u),
            num(d.tail_mass),
            num(d.curl_defect),
            num(d.reality_defect),
            num(d.reprojection)
        )?;
        if cfg.write_frames {
            let mut fields = vec![p.eta.clone()];
            fields.extend(p.v.components().iter().cloned());
            let w = create(&frames_dir.join(format!("frame_{index:06}.dspf")))?;
            io::write_binary(w, &fields)?;
        }
        index += 1;
        Ok(Control::Continue)
    });
    diag.flush()?;
    match outcome {
        Ok(_) => {}
        Err(Error::BlowUp { t_last_valid }) => {
            return Ok(Outcome::Violation(format!("blow-up after t = {t_last_valid}")));
        }
        Err(e) => return Err(e),
    }
    if worst_reality > REALITY_TOLERANCE || worst_curl > CURL_TOLERANCE {
        return Ok(Outcome::Violation(format!(
            "invariant drift: reality {worst_reality:e}, curl {worst_curl:e}"
        )));
    }
    Ok(Outcome::Pass)
}

fn solve_scan(cfg: &SolveConfig, d0s: &[f64], dir: &Path) -> Result<Outcome> {
    if d0s.is_empty() {
        return Err(Error::Config("d0_scan is empty".into()));
    }
    let points = match cfg.horizon_rule {
        HorizonRule::Growth { growth } => {
            if !(growth > 1.0) {
                return Err(Error::Config(format!("growth must exceed 1, got {growth}")));
            }
            solver::horizon_scan(&cfg.data, &cfg.solver, d0s, |p0, c| {
                solver::validity_horizon(p0, c, growth)
            })?
        }
        HorizonRule::Departure { theta } => {
            if !(theta > 0.0) {
                return Err(Error::Config(format!("theta must be positive, got {theta}")));
            }
            solver::horizon_scan(&cfg.data, &cfg.solver, d0s, |p0, c| {
                solver::departure_horizon(p0, c, theta)
            })?
        }
    };
    let mut out = create(&dir.join("scan.csv"))?;
    writeln!(out, "d0,horizon")?;
    for p in &points {
        let h = p.horizon.map(num).unwrap_or_else(|| "none".into());
        writeln!(out, "{},{h}", num(p.d0))?;
    }
    out.flush()?;
    Ok(Outcome::Pass)
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::SymbolCheck(a) => symbol_check(a),
        Command::KernelDecay(a) => kernel_decay(a),
        Command::Strichartz(a) => strichartz(a),
        Command::Bilinear(a) => bilinear(a),
        Command::Solve(a) => solve(a),
    }
}

/// Exit code for an error: configuration problems are usage errors.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Json(_) | Error::Io(_) | Error::Format(_) | Error::Domain(_) => 2,
        _ => 1,
    }
}

/// Runs a parsed command line and maps the result to an exit code.
pub fn execute(cli: &Cli) -> ExitCode {
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        // the global pool can only be set once per process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    match dispatch(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Violation(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Entry point of the `dispersive` binary.
pub fn main() -> ExitCode {
    execute(&Cli::parse())
}
