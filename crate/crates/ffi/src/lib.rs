//! C ABI over the isoembed library.
//!
//! Every function returns an [`IsoStatus`]; on failure the message is kept
//! per thread and read back with [`iso_last_error_message`]. Families and
//! run reports cross the boundary as opaque handles that the caller frees.
//! Matrices are dense, row-major and `n × n`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use isoembed::bounds::sample_point;
use isoembed::cli::{execute, Command, RunConfig, RunReport};
use isoembed::matmap::{cone_report, phi, phi_inverse, SymMatrix};
use isoembed::surfaces::{Chart, ChartPoint, Family};
use isoembed::symfun::sigma;
use isoembed::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Precondition = 4,
    Domain = 5,
    Convergence = 6,
    Obstruction = 7,
    ChartOverflow = 8,
    FrameDrift = 9,
    Disconnected = 10,
    Io = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoChart {
    North = 0,
    South = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsoCommand {
    Verify = 0,
    Solve = 1,
    Reconstruct = 2,
    Family = 3,
}

/// Scalar quantities at one surface point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IsoPointValues {
    pub mean_curvature: f64,
    pub scalar_curvature: f64,
    pub laplacian_scalar: f64,
    pub chi_norm: f64,
    pub ricci_norm: f64,
    pub sectional_min: f64,
    pub sectional_max: f64,
    pub support: f64,
    pub gauss_residual: f64,
    pub codazzi_residual: f64,
    pub support_residual: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IsoConeReport {
    pub is_spd: bool,
    pub member: bool,
    pub eps_gap: f64,
}

/// Opaque surface family.
pub struct IsoFamily {
    inner: Family,
}

/// Opaque run report.
pub struct IsoReport {
    inner: RunReport,
    json: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: IsoStatus, msg: impl Into<String>) -> IsoStatus {
    set_last_error(msg.into());
    status
}

fn from_error(err: Error) -> IsoStatus {
    let status = match &err {
        Error::Precondition(_) => IsoStatus::Precondition,
        Error::Domain(_) => IsoStatus::Domain,
        Error::Convergence { .. } => IsoStatus::Convergence,
        Error::Obstruction { .. } => IsoStatus::Obstruction,
        Error::ChartOverflow { .. } => IsoStatus::ChartOverflow,
        Error::FrameDrift { .. } => IsoStatus::FrameDrift,
        Error::Disconnected { .. } => IsoStatus::Disconnected,
        Error::Config(_) => IsoStatus::Config,
        Error::Io(_) => IsoStatus::Io,
    };
    fail(status, err.to_string())
}

/// Runs `f`, turning errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), IsoStatus>) -> IsoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IsoStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(IsoStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn lift<T>(r: isoembed::Result<T>) -> Result<T, IsoStatus> {
    r.map_err(from_error)
}

unsafe fn input<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], IsoStatus> {
    if p.is_null() {
        return Err(fail(IsoStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], IsoStatus> {
    if p.is_null() {
        return Err(fail(IsoStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts_mut(p, len))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, IsoStatus> {
    if p.is_null() {
        return Err(fail(IsoStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(IsoStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn check_out<T>(p: *mut T, what: &str) -> Result<(), IsoStatus> {
    if p.is_null() {
        Err(fail(IsoStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn sym_matrix(a: *const f64, n: usize) -> Result<SymMatrix, IsoStatus> {
    if n == 0 {
        return Err(fail(IsoStatus::InvalidArgument, "matrix dimension is zero"));
    }
    let entries = input(a, n * n, "matrix")?;
    lift(SymMatrix::from_row_major(n, entries))
}

fn write_matrix(m: &SymMatrix, out: &mut [f64]) {
    let n = m.dim();
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = m.get(i, j);
        }
    }
}

/// Message of the most recent failure on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn iso_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn iso_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `σ_k(x)` for `x` of length `n`.
///
/// # Safety
/// `x` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iso_sigma(k: usize, x: *const f64, n: usize, out: *mut f64) -> IsoStatus {
    guard(|| {
        let x = input(x, n, "x")?;
        check_out(out, "out")?;
        *out = sigma(k, x);
        Ok(())
    })
}

/// `Φ(A) = tr(A)A − A²`.
///
/// # Safety
/// `a` and `out` must each hold `n·n` doubles.
#[no_mangle]
pub unsafe extern "C" fn iso_phi(a: *const f64, n: usize, out: *mut f64) -> IsoStatus {
    guard(|| {
        let a = sym_matrix(a, n)?;
        write_matrix(&phi(&a), output(out, n * n, "out")?);
        Ok(())
    })
}

/// The SPD solution of `Φ(A) = B`; fails with `Domain` when `B` is outside
/// the cone.
///
/// # Safety
/// `b` and `out` must each hold `n·n` doubles.
#[no_mangle]
pub unsafe extern "C" fn iso_phi_inverse(b: *const f64, n: usize, tol: f64, out: *mut f64) -> IsoStatus {
    guard(|| {
        let b = sym_matrix(b, n)?;
        if tol.is_nan() || tol <= 0.0 {
            return Err(fail(IsoStatus::InvalidArgument, "tolerance must be positive"));
        }
        let a = lift(phi_inverse(&b, tol))?;
        write_matrix(&a, output(out, n * n, "out")?);
        Ok(())
    })
}

/// Cone membership and ε-gap of `B`.
///
/// # Safety
/// `b` must hold `n·n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iso_cone_report(b: *const f64, n: usize, out: *mut IsoConeReport) -> IsoStatus {
    guard(|| {
        let b = sym_matrix(b, n)?;
        check_out(out, "out")?;
        let r = cone_report(&b);
        *out = IsoConeReport {
            is_spd: r.is_spd,
            member: r.member(),
            eps_gap: r.eps_gap,
        };
        Ok(())
    })
}

fn new_family(family: Family, out: *mut *mut IsoFamily) -> Result<(), IsoStatus> {
    check_out(out, "out")?;
    lift(family.validate())?;
    // SAFETY: checked non-null above; the caller owns the written handle.
    unsafe { *out = Box::into_raw(Box::new(IsoFamily { inner: family })) };
    Ok(())
}

/// Round sphere of dimension 2 or 3.
///
/// # Safety
/// `out` must be writable; the handle is released with [`iso_family_free`].
#[no_mangle]
pub unsafe extern "C" fn iso_family_sphere(dim: usize, radius: f64, out: *mut *mut IsoFamily) -> IsoStatus {
    guard(|| new_family(Family::sphere(dim, radius), out))
}

/// Ellipsoid with `len` semi-axes, `len` = dimension + 1.
///
/// # Safety
/// `axes` must hold `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iso_family_ellipsoid(
    axes: *const f64,
    len: usize,
    out: *mut *mut IsoFamily,
) -> IsoStatus {
    guard(|| {
        let axes = input(axes, len, "axes")?;
        new_family(Family::ellipsoid(axes), out)
    })
}

/// Family taken from the `[family]` table of a run configuration.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iso_family_from_config(config_toml: *const c_char, out: *mut *mut IsoFamily) -> IsoStatus {
    guard(|| {
        let config = lift(RunConfig::from_toml(text(config_toml, "config_toml")?))?;
        new_family(config.family, out)
    })
}

/// # Safety
/// `family` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iso_family_free(family: *mut IsoFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// # Safety
/// `family` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iso_family_dim(family: *const IsoFamily) -> usize {
    family.as_ref().map_or(0, |f| f.inner.dim())
}

/// Curvature quantities and identity residuals at chart coordinates
/// `coords` (length = family dimension).
///
/// # Safety
/// `family` must be a live handle, `coords` must hold `len` doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn iso_family_evaluate(
    family: *const IsoFamily,
    chart: IsoChart,
    coords: *const f64,
    len: usize,
    out: *mut IsoPointValues,
) -> IsoStatus {
    guard(|| {
        let family = family
            .as_ref()
            .ok_or_else(|| fail(IsoStatus::NullPointer, "family is null"))?;
        if len != family.inner.dim() {
            return Err(fail(
                IsoStatus::InvalidArgument,
                format!("expected {} coordinates, got {len}", family.inner.dim()),
            ));
        }
        let coords = input(coords, len, "coords")?;
        check_out(out, "out")?;
        let chart = match chart {
            IsoChart::North => Chart::North,
            IsoChart::South => Chart::South,
        };
        let s = lift(sample_point(&family.inner, &ChartPoint::new(chart, coords.to_vec())))?;
        *out = IsoPointValues {
            mean_curvature: s.mean_curvature,
            scalar_curvature: s.scalar,
            laplacian_scalar: s.laplacian_scalar,
            chi_norm: s.chi_norm_sq.max(0.0).sqrt(),
            ricci_norm: s.ricci_norm,
            sectional_min: s.sectional_min,
            sectional_max: s.sectional_max,
            support: s.support,
            gauss_residual: s.gauss_residual,
            codazzi_residual: s.codazzi_residual,
            support_residual: s.support_residuals.max(),
        };
        Ok(())
    })
}

/// Runs a command on a TOML configuration. Output paths named in the
/// configuration are written as by the command-line tool.
///
/// # Safety
/// `config_toml` must be a NUL-terminated string; `out` must be writable.
/// The handle is released with [`iso_report_free`].
#[no_mangle]
pub unsafe extern "C" fn iso_run(command: IsoCommand, config_toml: *const c_char, out: *mut *mut IsoReport) -> IsoStatus {
    guard(|| {
        check_out(out, "out")?;
        let config = lift(RunConfig::from_toml(text(config_toml, "config_toml")?))?;
        let command = match command {
            IsoCommand::Verify => Command::Verify,
            IsoCommand::Solve => Command::Solve,
            IsoCommand::Reconstruct => Command::Reconstruct,
            IsoCommand::Family => Command::Family,
        };
        let report = lift(execute(command, &config))?;
        let json = lift(report.to_json())?;
        let json = CString::new(json).map_err(|_| fail(IsoStatus::Io, "report contains NUL"))?;
        *out = Box::into_raw(Box::new(IsoReport { inner: report, json }));
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from [`iso_run`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn iso_report_free(report: *mut IsoReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Overall verdict of a report.
///
/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iso_report_pass(report: *const IsoReport) -> bool {
    report.as_ref().is_some_and(|r| r.inner.pass)
}

/// # Safety
/// `report` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn iso_report_section_count(report: *const IsoReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.sections.len())
}

/// JSON form of the report, owned by the handle.
///
/// # Safety
/// `report` must be a live handle; the string lives as long as it does.
#[no_mangle]
pub unsafe extern "C" fn iso_report_json(report: *const IsoReport) -> *const c_char {
    report.as_ref().map_or(ptr::null(), |r| r.json.as_ptr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, IsoStatus::Panic);
        let msg = unsafe { CStr::from_ptr(iso_last_error_message()) };
        assert!(msg.to_str().unwrap().contains("boom"));
    }

    #[test]
    fn error_variants_map_to_distinct_codes() {
        let cases = [
            (Error::precondition("p"), IsoStatus::Precondition),
            (Error::domain("d"), IsoStatus::Domain),
            (Error::Config("c".into()), IsoStatus::Config),
            (Error::Io("i".into()), IsoStatus::Io),
            (
                Error::Convergence {
                    iterations: 3,
                    residual: 1.0,
                },
                IsoStatus::Convergence,
            ),
            (
                Error::Disconnected {
                    reachable: 1,
                    total: 2,
                },
                IsoStatus::Disconnected,
            ),
        ];
        for (err, status) in cases {
            assert_eq!(from_error(err), status);
        }
    }

    #[test]
    fn interior_nul_is_replaced() {
        set_last_error("a\0b".into());
        let msg = unsafe { CStr::from_ptr(iso_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "a b");
    }
}
