//! C ABI over `emrates`.
//!
//! Objects are opaque heap handles created by `em_*_new` style functions and
//! released with the matching `em_*_free`. Every fallible call returns an
//! `EmStatus`; on failure a description is kept per thread and can be read
//! with `em_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use emrates::domain::{AtomSpec, InitialState, Scenario};
use emrates::dynamics::analytic_relaxation;
use emrates::rates::{energy_rates, spectral_rates, RateMethod, SpectralRates};
use emrates::spectral::{f_accelerated, f_static, OracleControls};
use emrates::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    ImageSumTruncation = 3,
    StepUnderflow = 4,
    UnsupportedPolarization = 5,
    OracleNonConvergence = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmMethod {
    ClosedForm = 0,
    Oracle = 1,
}

pub struct EmAtom(AtomSpec);

pub struct EmScenario(Scenario);

pub struct EmRates(SpectralRates);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EmSpectralRates {
    pub g_plus: f64,
    pub g_minus: f64,
    pub a_down: f64,
    pub a_up: f64,
    pub g_plus_error: f64,
    pub g_minus_error: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EmEnergyRates {
    pub vf_excited: f64,
    pub vf_ground: f64,
    pub rr_any_state: f64,
    pub total_excited: f64,
    pub total_ground: f64,
}

/// `f_y` and `f_z` are NaN for accelerated scenarios.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EmBoundary {
    pub f_x: f64,
    pub f_y: f64,
    pub f_z: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EmStatus {
    match e {
        Error::InvalidParameter { .. } => EmStatus::InvalidParameter,
        Error::ImageSumTruncation { .. } => EmStatus::ImageSumTruncation,
        Error::StepUnderflow { .. } => EmStatus::StepUnderflow,
        Error::UnsupportedPolarization { .. } => EmStatus::UnsupportedPolarization,
        Error::OracleNonConvergence { .. } => EmStatus::OracleNonConvergence,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            EmStatus::Ok
        }
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer passed as `{name}`"));
            EmStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            EmStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn put<T>(out: *mut T, name: &'static str, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(name));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn em_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn em_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version string"),
        };
    VERSION.as_ptr()
}

/// `alpha_*` are the polarization weights; each in [0, 1], summing to 1.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn em_atom_new(
    omega0: f64,
    gamma0: f64,
    alpha_x: f64,
    alpha_y: f64,
    alpha_z: f64,
    out: *mut *mut EmAtom,
) -> EmStatus {
    guard(|| {
        let atom = AtomSpec::new(omega0, gamma0, [alpha_x, alpha_y, alpha_z])?;
        put(out, "out", Box::into_raw(Box::new(EmAtom(atom))))
    })
}

/// # Safety
/// `atom` must come from `em_atom_new` and not be used afterwards. NULL is
/// ignored.
#[no_mangle]
pub unsafe extern "C" fn em_atom_free(atom: *mut EmAtom) {
    if !atom.is_null() {
        drop(Box::from_raw(atom));
    }
}

unsafe fn new_scenario(s: emrates::Result<Scenario>, out: *mut *mut EmScenario) -> EmStatus {
    guard(|| put(out, "out", Box::into_raw(Box::new(EmScenario(s?)))))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn em_scenario_free_space(out: *mut *mut EmScenario) -> EmStatus {
    new_scenario(Ok(Scenario::StaticFreeSpace), out)
}

/// `beta = INFINITY` is zero temperature.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn em_scenario_static_mirror(
    z0: f64,
    beta: f64,
    out: *mut *mut EmScenario,
) -> EmStatus {
    new_scenario(Scenario::static_mirror(z0, beta), out)
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn em_scenario_accelerated(
    a: f64,
    z0: f64,
    out: *mut *mut EmScenario,
) -> EmStatus {
    new_scenario(Scenario::accelerated(a, z0), out)
}

/// # Safety
/// `scenario` must come from an `em_scenario_*` constructor and not be used
/// afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn em_scenario_free(scenario: *mut EmScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Spectral rates with the default oracle controls when `method` is
/// `Oracle`.
///
/// # Safety
/// `scenario` and `atom` must be live handles, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn em_rates_compute(
    scenario: *const EmScenario,
    atom: *const EmAtom,
    method: EmMethod,
    out: *mut *mut EmRates,
) -> EmStatus {
    guard(|| {
        let s = get(scenario, "scenario")?;
        let a = get(atom, "atom")?;
        let m = match method {
            EmMethod::ClosedForm => RateMethod::ClosedForm,
            EmMethod::Oracle => RateMethod::Oracle(OracleControls::default()),
        };
        let rates = spectral_rates(&s.0, &a.0, &m)?;
        put(out, "out", Box::into_raw(Box::new(EmRates(rates))))
    })
}

/// # Safety
/// `rates` must come from `em_rates_compute` and not be used afterwards.
/// NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn em_rates_free(rates: *mut EmRates) {
    if !rates.is_null() {
        drop(Box::from_raw(rates));
    }
}

/// # Safety
/// `rates` must be a live handle, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn em_rates_get(
    rates: *const EmRates,
    out: *mut EmSpectralRates,
) -> EmStatus {
    guard(|| {
        let r = get(rates, "rates")?.0;
        put(
            out,
            "out",
            EmSpectralRates {
                g_plus: r.g_plus,
                g_minus: r.g_minus,
                a_down: r.a_down,
                a_up: r.a_up,
                g_plus_error: r.g_plus_error,
                g_minus_error: r.g_minus_error,
            },
        )
    })
}

/// # Safety
/// `rates` must be a live handle, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn em_energy_rates(
    rates: *const EmRates,
    omega0: f64,
    out: *mut EmEnergyRates,
) -> EmStatus {
    guard(|| {
        let r = get(rates, "rates")?;
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidParameter {
                name: "omega0",
                reason: format!("must be finite and > 0, got {omega0}"),
            }
            .into());
        }
        let e = energy_rates(&r.0, omega0);
        put(
            out,
            "out",
            EmEnergyRates {
                vf_excited: e.vf_excited,
                vf_ground: e.vf_ground,
                rr_any_state: e.rr_any_state,
                total_excited: e.total_excited,
                total_ground: e.total_ground,
            },
        )
    })
}

/// Boundary functions of `scenario` at transition frequency `omega0`; all
/// zero in free space.
///
/// # Safety
/// `scenario` must be a live handle, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn em_boundary_functions(
    scenario: *const EmScenario,
    omega0: f64,
    out: *mut EmBoundary,
) -> EmStatus {
    guard(|| {
        let f = match get(scenario, "scenario")?.0 {
            Scenario::StaticFreeSpace => EmBoundary::default(),
            Scenario::StaticMirrorThermal { z0, .. } => {
                let f = f_static(omega0, z0)?;
                EmBoundary {
                    f_x: f.f_x,
                    f_y: f.f_y,
                    f_z: f.f_z,
                }
            }
            Scenario::AcceleratedMirror { a, z0 } => {
                let f = f_accelerated(omega0, z0, a)?;
                EmBoundary {
                    f_x: f.f_x,
                    f_y: f.f_y,
                    f_z: f.f_z,
                }
            }
        };
        put(out, "out", f)
    })
}

/// Mean energy at `n` times for an ensemble starting with the given excited
/// fraction, written to `energy_out[0..n]`.
///
/// # Safety
/// `rates` must be a live handle; `times` and `energy_out` must point to `n`
/// readable and writable doubles respectively.
#[no_mangle]
pub unsafe extern "C" fn em_relaxation(
    rates: *const EmRates,
    omega0: f64,
    excited_fraction: f64,
    times: *const f64,
    n: usize,
    energy_out: *mut f64,
) -> EmStatus {
    guard(|| {
        let r = get(rates, "rates")?;
        if n > 0 && times.is_null() {
            return Err(Failure::Null("times"));
        }
        if n > 0 && energy_out.is_null() {
            return Err(Failure::Null("energy_out"));
        }
        let times = if n == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(times, n)
        };
        let initial = InitialState::mixed(excited_fraction)?;
        let curve = analytic_relaxation(&r.0, omega0, initial, times)?;
        if n > 0 {
            std::slice::from_raw_parts_mut(energy_out, n).copy_from_slice(&curve.energy);
        }
        Ok(())
    })
}
