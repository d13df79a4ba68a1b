//! C ABI over `gchlab`.
//!
//! Every function returns a [`GchStatus`]. On failure the message is kept in a
//! thread-local buffer readable through [`gch_last_error`]. Handles are opaque
//! and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use gchlab::euler::{simulate, Form, TimeControls, Trajectory};
use gchlab::harness::{run_command, Command, RunConfig};
use gchlab::lagrange::{init_particles, simulate_lagrange, to_eulerian, LagrangeControls, LagrangeRun};
use gchlab::spectral::{dyadic_block, BesovMeter, GridFunction, GridSpec};
use gchlab::GchError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GchStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GchForm {
    Momentum = 0,
    Velocity = 1,
}

/// Grid, filter bank and critical Besov norm.
pub struct GchMeter {
    meter: BesovMeter,
}

/// A finished Eulerian run.
pub struct GchEulerRun {
    trajectory: Trajectory,
}

/// A finished particle run.
pub struct GchEnsemble {
    run: LagrangeRun,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(GchStatus, String);

impl From<GchError> for Failure {
    fn from(e: GchError) -> Self {
        let status = match e {
            GchError::InvalidGrid(_)
            | GchError::GridMismatch { .. }
            | GchError::BlockOutOfRange { .. }
            | GchError::InvalidParameter(_)
            | GchError::Unresolvable(_) => GchStatus::InvalidArgument,
            GchError::Config(_) => GchStatus::Config,
            GchError::Io(_) | GchError::Csv(_) | GchError::Json(_) => GchStatus::Io,
            _ => GchStatus::Numerical,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GchStatus::NullPointer, format!("{what} is null"))
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GchStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GchStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            GchStatus::Panic
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn path<'a>(p: *const c_char, what: &str) -> Result<&'a Path, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Path::new)
        .map_err(|_| Failure(GchStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn copy_out(src: &[f64], dst: &mut [f64]) -> Result<(), Failure> {
    if dst.len() < src.len() {
        return Err(Failure(
            GchStatus::BufferTooSmall,
            format!("buffer holds {} values, need {}", dst.len(), src.len()),
        ));
    }
    dst[..src.len()].copy_from_slice(src);
    Ok(())
}

fn grid_function(grid: GridSpec, values: &[f64]) -> Result<GridFunction, Failure> {
    Ok(GridFunction::new(grid, values.to_vec())?)
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gch_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gch_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Meter for the critical norm `B^{1/p}_{p,1}` on `n_points` nodes of `[-L, L)`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn gch_meter_new(
    half_length: f64,
    n_points: usize,
    p: f64,
    out: *mut *mut GchMeter,
) -> GchStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let meter = BesovMeter::critical(GridSpec::new(half_length, n_points)?, p)?;
        *out = Box::into_raw(Box::new(GchMeter { meter }));
        Ok(())
    })
}

/// # Safety
/// `meter` must come from [`gch_meter_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gch_meter_free(meter: *mut GchMeter) {
    if !meter.is_null() {
        drop(Box::from_raw(meter));
    }
}

/// Number of grid nodes.
///
/// # Safety
/// `meter` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gch_meter_n_points(meter: *const GchMeter, out: *mut usize) -> GchStatus {
    guard(|| {
        let m = handle(meter, "meter")?;
        *out.as_mut().ok_or_else(|| null("out"))? = m.meter.bank().grid().n_points();
        Ok(())
    })
}

/// Highest dyadic block index of the bank.
///
/// # Safety
/// `meter` must be a live handle and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gch_meter_j_max(meter: *const GchMeter, out: *mut i32) -> GchStatus {
    guard(|| {
        let m = handle(meter, "meter")?;
        *out.as_mut().ok_or_else(|| null("out"))? = m.meter.bank().j_max();
        Ok(())
    })
}

/// Besov norm of the nodal values `values[0..len]`.
///
/// # Safety
/// `values` must hold `len` doubles and `out` be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gch_meter_norm(
    meter: *const GchMeter,
    values: *const f64,
    len: usize,
    out: *mut f64,
) -> GchStatus {
    guard(|| {
        let m = handle(meter, "meter")?;
        let u = grid_function(*m.meter.bank().grid(), slice(values, len, "values")?)?;
        *out.as_mut().ok_or_else(|| null("out"))? = m.meter.norm(&u)?;
        Ok(())
    })
}

/// Dyadic block `j` of `values`, written to `block[0..len]`.
///
/// # Safety
/// `values` and `block` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gch_meter_block(
    meter: *const GchMeter,
    j: i32,
    values: *const f64,
    block: *mut f64,
    len: usize,
) -> GchStatus {
    guard(|| {
        let m = handle(meter, "meter")?;
        let u = grid_function(*m.meter.bank().grid(), slice(values, len, "values")?)?;
        let b = dyadic_block(&u, j, m.meter.bank())?;
        copy_out(b.values(), slice_mut(block, len, "block")?)
    })
}

/// Eulerian run from momentum `m0` with the default controls for step `dt`.
/// An aborted run still succeeds; query it with [`gch_euler_run_abort`].
///
/// # Safety
/// `meter` must be live, `m0` hold `len` doubles and `out` be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gch_euler_run_new(
    meter: *const GchMeter,
    m0: *const f64,
    len: usize,
    dt: f64,
    t_end: f64,
    form: GchForm,
    out: *mut *mut GchEulerRun,
) -> GchStatus {
    guard(|| {
        let m = handle(meter, "meter")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m0 = grid_function(*m.meter.bank().grid(), slice(m0, len, "m0")?)?;
        let form = match form {
            GchForm::Momentum => Form::Momentum,
            GchForm::Velocity => Form::Velocity,
        };
        let trajectory = simulate(&m0, &TimeControls::new(dt, t_end), form, &m.meter)?;
        *out = Box::into_raw(Box::new(GchEulerRun { trajectory }));
        Ok(())
    })
}

/// # Safety
/// `run` must come from [`gch_euler_run_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gch_euler_run_free(run: *mut GchEulerRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Number of stored snapshots, the initial state included.
///
/// # Safety
/// `run` must be live and `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gch_euler_run_snapshot_count(
    run: *const GchEulerRun,
    out: *mut usize,
) -> GchStatus {
    guard(|| {
        let r = handle(run, "run")?;
        *out.as_mut().ok_or_else(|| null("out"))? = r.trajectory.snapshots.len();
        Ok(())
    })
}

/// Time and velocity of snapshot `k`; `u` receives `len` values.
///
/// # Safety
/// `run` must be live, `t` valid for a write and `u` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gch_euler_run_snapshot(
    run: *const GchEulerRun,
    k: usize,
    t: *mut f64,
    u: *mut f64,
    len: usize,
) -> GchStatus {
    guard(|| {
        let r = handle(run, "run")?;
        let s = r.trajectory.snapshots.get(k).ok_or_else(|| {
            Failure(GchStatus::InvalidArgument, format!("snapshot {k} out of range"))
        })?;
        *t.as_mut().ok_or_else(|| null("t"))? = s.t;
        copy_out(s.fields.u.values(), slice_mut(u, len, "u")?)
    })
}

/// `*aborted` tells whether the run stopped early and `*t` when it stopped.
///
/// # Safety
/// `run` must be live; `aborted` and `t` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gch_euler_run_abort(
    run: *const GchEulerRun,
    aborted: *mut bool,
    t: *mut f64,
) -> GchStatus {
    guard(|| {
        let r = handle(run, "run")?;
        let aborted = aborted.as_mut().ok_or_else(|| null("aborted"))?;
        let t = t.as_mut().ok_or_else(|| null("t"))?;
        *aborted = r.trajectory.abort.is_some();
        *t = match &r.trajectory.abort {
            Some(a) => a.t,
            None => r.trajectory.last().t,
        };
        Ok(())
    })
}

/// Particle run from momentum `m0` on `n_points` nodes of `[-L, L)`, with
/// one particle per node.
///
/// # Safety
/// `m0` must hold `n_points` doubles and `out` be valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gch_ensemble_new(
    half_length: f64,
    m0: *const f64,
    n_points: usize,
    dt: f64,
    t_end: f64,
    out: *mut *mut GchEnsemble,
) -> GchStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = GridSpec::new(half_length, n_points)?;
        let m0 = grid_function(grid, slice(m0, n_points, "m0")?)?;
        let run = simulate_lagrange(init_particles(&m0, n_points)?, &LagrangeControls::new(dt, t_end))?;
        *out = Box::into_raw(Box::new(GchEnsemble { run }));
        Ok(())
    })
}

/// # Safety
/// `ens` must come from [`gch_ensemble_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn gch_ensemble_free(ens: *mut GchEnsemble) {
    if !ens.is_null() {
        drop(Box::from_raw(ens));
    }
}

/// Smallest `y_xi` seen, whether it fell below one half, and the crossing
/// time (NaN when it did not).
///
/// # Safety
/// `ens` must be live; the three outputs valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gch_ensemble_breaking(
    ens: *const GchEnsemble,
    min_yxi: *mut f64,
    breached: *mut bool,
    t_breach: *mut f64,
) -> GchStatus {
    guard(|| {
        let r = &handle(ens, "ensemble")?.run.report;
        *min_yxi.as_mut().ok_or_else(|| null("min_yxi"))? = r.min_yxi;
        *breached.as_mut().ok_or_else(|| null("breached"))? = r.breached;
        *t_breach.as_mut().ok_or_else(|| null("t_breach"))? = r.t_breach.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Final time and the final velocity interpolated back to the label grid.
///
/// # Safety
/// `ens` must be live, `t` valid for a write and `u` hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gch_ensemble_velocity(
    ens: *const GchEnsemble,
    t: *mut f64,
    u: *mut f64,
    len: usize,
) -> GchStatus {
    guard(|| {
        let last = handle(ens, "ensemble")?.run.last();
        let fields = to_eulerian(last, *last.labels())?;
        *t.as_mut().ok_or_else(|| null("t"))? = last.t;
        copy_out(fields.u.values(), slice_mut(u, len, "u")?)
    })
}

/// Runs the experiment named in the TOML file at `config_path` and writes its
/// outputs under `out_dir`. `*passed` receives the overall verdict.
///
/// # Safety
/// `config_path` and `out_dir` must be NUL-terminated; `passed` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn gch_run_experiment(
    config_path: *const c_char,
    out_dir: *const c_char,
    passed: *mut bool,
) -> GchStatus {
    guard(|| {
        let cfg = RunConfig::from_path(path(config_path, "config_path")?)?;
        let dir = path(out_dir, "out_dir")?;
        let passed = passed.as_mut().ok_or_else(|| null("passed"))?;
        *passed = run_command(Command::Experiment, &cfg, dir)?.passed();
        Ok(())
    })
}

