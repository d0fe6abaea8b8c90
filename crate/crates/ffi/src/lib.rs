//! C ABI over `dispersive-core`.
//!
//! Every function returns a [`DspStatus`]; results come back through out
//! pointers. Fields and solvers are opaque handles owned by the caller and
//! released with their `_free` function. After a failure,
//! [`dsp_last_error`] copies the message of the most recent error on the
//! calling thread.
//!
//! Arrays of grid values are row-major with `n^d` entries per component;
//! vector fields are component-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use dispersive_core::bessel::bessel_j;
use dispersive_core::dyadic::DyadicScale;
use dispersive_core::solver::{self, PhysicalState, SolverConfig, SolverState, Stepper};
use dispersive_core::spectral::{propagate, GridSpec, Sign, SpectralField, VectorField};
use dispersive_core::symbol::{c_coeff, eval_m, eval_m_derivative, Beta, SymbolParams};
use dispersive_core::Error;
use num_complex::Complex64;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DspStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Config = 3,
    GridMismatch = 4,
    Unresolved = 5,
    BlowUp = 6,
    OutsideLambda = 7,
    Io = 8,
    Format = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

impl From<&Error> for DspStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) => DspStatus::Domain,
            Error::Unresolved { .. } => DspStatus::Unresolved,
            Error::Config(_) | Error::Json(_) => DspStatus::Config,
            Error::GridMismatch(_) => DspStatus::GridMismatch,
            Error::BlowUp { .. } => DspStatus::BlowUp,
            Error::OutsideLambda(..) => DspStatus::OutsideLambda,
            Error::Io(_) => DspStatus::Io,
            Error::Format(_) => DspStatus::Format,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(DspStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(DspStatus::from(&e), e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn null(what: &str) -> Failure {
    Failure(DspStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Outcome) -> DspStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DspStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DspStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

fn beta(b: u8) -> Result<Beta, Failure> {
    Beta::try_from(b).map_err(Failure::from)
}

fn grid(d: usize, n: usize, length: f64) -> Result<GridSpec, Failure> {
    Ok(GridSpec::new(d, n, length)?)
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, needed: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len < needed {
        return Err(Failure(
            DspStatus::BufferTooSmall,
            format!("{what} holds {len} values, {needed} needed"),
        ));
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts_mut(p, needed))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn dsp_status_message(status: DspStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        DspStatus::Ok => b"ok\0",
        DspStatus::NullPointer => b"null pointer\0",
        DspStatus::Domain => b"argument outside the domain\0",
        DspStatus::Config => b"invalid configuration\0",
        DspStatus::GridMismatch => b"grid mismatch\0",
        DspStatus::Unresolved => b"quadrature unresolved\0",
        DspStatus::BlowUp => b"solution blew up\0",
        DspStatus::OutsideLambda => b"frequency triple outside the nonvanishing set\0",
        DspStatus::Io => b"i/o error\0",
        DspStatus::Format => b"malformed data\0",
        DspStatus::BufferTooSmall => b"output buffer too small\0",
        DspStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dsp_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr(), buf.cast(), n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// `m_beta(r)` for `beta` in {0, 1}.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsp_eval_m(beta_switch: u8, r: f64, result: *mut f64) -> DspStatus {
    guard(|| {
        let result = out(result, "result")?;
        *result = eval_m(SymbolParams::new(beta(beta_switch)?), r)?;
        Ok(())
    })
}

/// `k`-th derivative of `m_beta` at `r`.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsp_eval_m_derivative(beta_switch: u8, r: f64, k: usize, result: *mut f64) -> DspStatus {
    guard(|| {
        let result = out(result, "result")?;
        *result = eval_m_derivative(SymbolParams::new(beta(beta_switch)?), r, k)?;
        Ok(())
    })
}

/// Dispersive constant `c_{beta,d}(lambda)`; `lambda` must be a power of two.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsp_c_coeff(beta_switch: u8, d: usize, lambda: f64, result: *mut f64) -> DspStatus {
    guard(|| {
        let result = out(result, "result")?;
        let lambda = DyadicScale::from_lambda(lambda)?;
        if !(1..=3).contains(&d) {
            return Err(Failure(DspStatus::Domain, format!("d must be 1, 2 or 3, got {d}")));
        }
        *result = c_coeff(SymbolParams::new(beta(beta_switch)?), d, lambda);
        Ok(())
    })
}

/// Bessel function `J_alpha(r)`.
///
/// # Safety
/// `result` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsp_bessel_j(alpha: f64, r: f64, result: *mut f64) -> DspStatus {
    guard(|| {
        let result = out(result, "result")?;
        *result = bessel_j(alpha, r)?;
        Ok(())
    })
}

/// Opaque complex field on a periodic grid.
pub struct DspField(SpectralField);

/// Builds a field from grid values. `im` may be null for a real field.
///
/// # Safety
/// `re` (and `im` when not null) must hold `len` values; `field` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsp_field_from_values(
    d: usize,
    n: usize,
    length: f64,
    re: *const f64,
    im: *const f64,
    len: usize,
    field: *mut *mut DspField,
) -> DspStatus {
    guard(|| {
        let field = out(field, "field")?;
        let grid = grid(d, n, length)?;
        if len != grid.size() {
            return Err(Failure(
                DspStatus::GridMismatch,
                format!("{len} values for a grid of {}", grid.size()),
            ));
        }
        let re = input(re, len, "re")?;
        let im = if im.is_null() { None } else { Some(input(im, len, "im")?) };
        let values = (0..len)
            .map(|i| Complex64::new(re[i], im.map_or(0.0, |v| v[i])))
            .collect();
        let f = SpectralField::from_values(grid, values)?;
        *field = Box::into_raw(Box::new(DspField(f)));
        Ok(())
    })
}

/// Number of grid values `n^d` of a field.
///
/// # Safety
/// `field` must be a handle from this library and `size` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsp_field_size(field: *const DspField, size: *mut usize) -> DspStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        *out(size, "size")? = f.0.grid().size();
        Ok(())
    })
}

/// Copies the grid values of a field. `im` may be null.
///
/// # Safety
/// `re` (and `im` when not null) must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn dsp_field_values(field: *const DspField, re: *mut f64, im: *mut f64, len: usize) -> DspStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        let values = f.0.to_values();
        let re = output(re, len, values.len(), "re")?;
        for (o, v) in re.iter_mut().zip(&values) {
            *o = v.re;
        }
        if !im.is_null() {
            let im = output(im, len, values.len(), "im")?;
            for (o, v) in im.iter_mut().zip(&values) {
                *o = v.im;
            }
        }
        Ok(())
    })
}

/// `L^2` norm of a field over the box.
///
/// # Safety
/// `field` must be a handle from this library and `result` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsp_field_l2_norm(field: *const DspField, result: *mut f64) -> DspStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        *out(result, "result")? = f.0.l2_norm();
        Ok(())
    })
}

/// Free flow `exp(-i sign t m_beta(|D|)) f` into a new field; `sign` is `+1`
/// or `-1`.
///
/// # Safety
/// `field` must be a handle from this library and `result` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsp_field_propagate(
    field: *const DspField,
    beta_switch: u8,
    sign: i32,
    t: f64,
    result: *mut *mut DspField,
) -> DspStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        let result = out(result, "result")?;
        let sign = match sign {
            1 => Sign::Plus,
            -1 => Sign::Minus,
            _ => return Err(Failure(DspStatus::Domain, format!("sign must be +1 or -1, got {sign}"))),
        };
        if !t.is_finite() {
            return Err(Failure(DspStatus::Domain, format!("time must be finite, got {t}")));
        }
        let g = propagate(&f.0, beta(beta_switch)?, sign, t);
        *result = Box::into_raw(Box::new(DspField(g)));
        Ok(())
    })
}

/// Releases a field; null is ignored.
///
/// # Safety
/// `field` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dsp_field_free(field: *mut DspField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Opaque Whitham-Boussinesq integrator with its current state.
pub struct DspSolver {
    config: SolverConfig,
    stepper: Stepper,
    state: SolverState,
}

impl DspSolver {
    fn physical(&self) -> Result<PhysicalState, Failure> {
        Ok(solver::from_diagonal(&self.state)?)
    }
}

/// Creates a solver from a JSON config (the `solve` config fields `grid`,
/// `dt`, `T`, `integrator`, `dealias`, `nonlinear`, `s`, `frame_every`,
/// `blowup_threshold`) and real initial data: `eta` with `n^d` values and
/// curl-free, mean-zero `v` with `d n^d` values.
///
/// # Safety
/// `config_json` must be a NUL-terminated string, the arrays must hold the
/// stated counts and `solver` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsp_solver_new(
    config_json: *const c_char,
    eta: *const f64,
    v: *const f64,
    len: usize,
    solver: *mut *mut DspSolver,
) -> DspStatus {
    guard(|| {
        let solver = out(solver, "solver")?;
        if config_json.is_null() {
            return Err(null("config_json"));
        }
        let text = CStr::from_ptr(config_json)
            .to_str()
            .map_err(|e| Failure(DspStatus::Config, format!("config is not UTF-8: {e}")))?;
        let config: SolverConfig = serde_json::from_str(text).map_err(Error::from)?;
        config.validate()?;
        let g = config.grid;
        let size = g.size();
        if len != size {
            return Err(Failure(
                DspStatus::GridMismatch,
                format!("{len} values per component for a grid of {size}"),
            ));
        }
        let real = |vals: &[f64]| SpectralField::from_values(g, vals.iter().map(|&x| Complex64::new(x, 0.0)).collect());
        let eta = real(input(eta, size, "eta")?)?;
        let v_vals = input(v, g.d * size, "v")?;
        let v = VectorField::new(v_vals.chunks(size).map(real).collect::<Result<Vec<_>, _>>()?)?;
        let state = solver::to_diagonal(&PhysicalState { t: 0.0, eta, v })?;
        let (_, h) = config.schedule();
        let stepper = Stepper::new(g, h, config.integrator, config.dealias, config.nonlinear)?.assume_real_fields();
        *solver = Box::into_raw(Box::new(DspSolver { config, stepper, state }));
        Ok(())
    })
}

/// Advances by `steps` steps of the configured size, re-projecting onto
/// real fields after each. On blow-up the state is left at the last valid
/// step.
///
/// # Safety
/// `solver` must be a handle from this library.
#[no_mangle]
pub unsafe extern "C" fn dsp_solver_advance(solver: *mut DspSolver, steps: usize) -> DspStatus {
    guard(|| {
        let s = solver.as_mut().ok_or_else(|| null("solver"))?;
        let h = s.stepper.step_size();
        for _ in 0..steps {
            let mut next = s.stepper.step(&s.state, s.config.blowup_threshold)?;
            next.t = s.state.t + h;
            solver::reproject(&mut next);
            s.state = next;
        }
        Ok(())
    })
}

/// Current time.
///
/// # Safety
/// `solver` must be a handle from this library and `t` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsp_solver_time(solver: *const DspSolver, t: *mut f64) -> DspStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        *out(t, "t")? = s.state.t;
        Ok(())
    })
}

/// Current size `||u_+||_{H^s} + ||u_-||_{H^s}` with the configured `s`.
///
/// # Safety
/// `solver` must be a handle from this library and `size` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dsp_solver_size(solver: *const DspSolver, size: *mut f64) -> DspStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        let sob = s.config.s;
        *out(size, "size")? = s.state.u_plus.sobolev_norm(sob) + s.state.u_minus.sobolev_norm(sob);
        Ok(())
    })
}

/// Copies the current surface elevation (`n^d` values).
///
/// # Safety
/// `eta` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn dsp_solver_eta(solver: *const DspSolver, eta: *mut f64, len: usize) -> DspStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        let p = s.physical()?;
        let values = p.eta.to_values();
        for (o, v) in output(eta, len, values.len(), "eta")?.iter_mut().zip(&values) {
            *o = v.re;
        }
        Ok(())
    })
}

/// Copies the current velocity (`d n^d` values, component-major).
///
/// # Safety
/// `v` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn dsp_solver_velocity(solver: *const DspSolver, v: *mut f64, len: usize) -> DspStatus {
    guard(|| {
        let s = solver.as_ref().ok_or_else(|| null("solver"))?;
        let p = s.physical()?;
        let size = p.grid().size();
        let dst = output(v, len, p.v.components().len() * size, "v")?;
        for (chunk, c) in dst.chunks_mut(size).zip(p.v.components()) {
            for (o, x) in chunk.iter_mut().zip(c.to_values()) {
                *o = x.re;
            }
        }
        Ok(())
    })
}

/// Releases a solver; null is ignored.
///
/// # Safety
/// `solver` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dsp_solver_free(solver: *mut DspSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}
