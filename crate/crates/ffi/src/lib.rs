//! C ABI for quadtrap.
//!
//! Objects are opaque heap handles released with their `*_free` function.
//! Every fallible call returns a [`QtStatus`]; the message of the last failure
//! on the calling thread is available from [`qt_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use quadtrap::analytic::{radial_turning_points, z_axis_solution};
use quadtrap::dynamics::{
    export, integrate, CartesianState, DynamicsError, IntegrateOptions, PhaseState, Trajectory,
};
use quadtrap::integrability::{morales_ramis_verdict, Rational, Verdict};
use quadtrap::poincare::{compute_section, default_seeds, SectionSpec, SeedSection};
use quadtrap::potential::{DeltaSource, PotentialParams};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NumericFailure = 3,
    OutOfRange = 4,
    Panic = 5,
}

/// Selects the delta of [`qt_params_published`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QtDeltaSource {
    Caption = 0,
    Text = 1,
    Computed = 2,
}

pub struct QtParams(PotentialParams);
pub struct QtTrajectory(Trajectory);
pub struct QtSection(Vec<SeedSection>);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

fn fail(status: QtStatus, msg: impl Into<String>) -> QtStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> QtStatus) -> QtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(QtStatus::Panic, "internal panic"),
    }
}

macro_rules! deref {
    ($p:expr) => {
        match unsafe { $p.as_ref() } {
            Some(v) => v,
            None => return fail(QtStatus::NullPointer, concat!(stringify!($p), " is null")),
        }
    };
}

macro_rules! out {
    ($p:expr) => {
        match unsafe { $p.as_mut() } {
            Some(v) => v,
            None => return fail(QtStatus::NullPointer, concat!(stringify!($p), " is null")),
        }
    };
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len - 1` bytes). Returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn qt_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Published sigma with the selected delta.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qt_params_published(
    source: QtDeltaSource,
    out: *mut *mut QtParams,
) -> QtStatus {
    guard(|| {
        let out = out!(out);
        let src = match source {
            QtDeltaSource::Caption => DeltaSource::Caption,
            QtDeltaSource::Text => DeltaSource::Text,
            QtDeltaSource::Computed => DeltaSource::Computed,
        };
        *out = Box::into_raw(Box::new(QtParams(PotentialParams::published(src))));
        QtStatus::Ok
    })
}

/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qt_params_raw(
    sigma: f64,
    delta: f64,
    out: *mut *mut QtParams,
) -> QtStatus {
    guard(|| {
        let out = out!(out);
        match PotentialParams::raw(sigma, delta) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(QtParams(p)));
                QtStatus::Ok
            }
            Err(e) => fail(QtStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Writes sigma, delta and eta.
///
/// # Safety
/// `p` must be a live handle; `out` must point to three doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_params_values(p: *const QtParams, out: *mut f64) -> QtStatus {
    guard(|| {
        let p = deref!(p);
        if out.is_null() {
            return fail(QtStatus::NullPointer, "out is null");
        }
        let v = [p.0.sigma, p.0.delta, p.0.eta];
        ptr::copy_nonoverlapping(v.as_ptr(), out, 3);
        QtStatus::Ok
    })
}

/// # Safety
/// `p` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qt_params_free(p: *mut QtParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Integrates the Cartesian state `(x, y, z, px, py, pz)` to `tau_end`.
/// Tolerances <= 0 select the defaults. On `NumericFailure` the partial
/// trajectory is still returned in `out`.
///
/// # Safety
/// `p` must be a live handle, `state` must point to six doubles, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qt_orbit_integrate(
    p: *const QtParams,
    state: *const f64,
    tau_end: f64,
    rel_tol: f64,
    abs_tol: f64,
    out: *mut *mut QtTrajectory,
) -> QtStatus {
    guard(|| {
        let p = deref!(p);
        let out = out!(out);
        *out = ptr::null_mut();
        if state.is_null() {
            return fail(QtStatus::NullPointer, "state is null");
        }
        let mut s = [0.0; 6];
        ptr::copy_nonoverlapping(state, s.as_mut_ptr(), 6);
        let mut opts = IntegrateOptions::default();
        if rel_tol > 0.0 {
            opts.stepper.rel_tol = rel_tol;
        }
        if abs_tol > 0.0 {
            opts.stepper.abs_tol = abs_tol;
        }
        let start = PhaseState::Cartesian(CartesianState::from_array(s));
        match integrate(&start, &p.0, tau_end, &opts) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(QtTrajectory(t)));
                QtStatus::Ok
            }
            Err(DynamicsError::Aborted(a)) => {
                let msg = format!("integration aborted: {}", a.diagnostic);
                *out = Box::into_raw(Box::new(QtTrajectory(a.partial)));
                fail(QtStatus::NumericFailure, msg)
            }
            Err(e) => fail(QtStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Number of stored samples; 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qt_trajectory_len(t: *const QtTrajectory) -> usize {
    t.as_ref().map_or(0, |t| t.0.samples.len())
}

/// Sample `i` as `(tau, r, z, p_r, p_z, phi, x, y, energy)`.
///
/// # Safety
/// `t` must be a live handle; `out` must point to nine doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_trajectory_sample(
    t: *const QtTrajectory,
    i: usize,
    out: *mut f64,
) -> QtStatus {
    guard(|| {
        let t = deref!(t);
        if out.is_null() {
            return fail(QtStatus::NullPointer, "out is null");
        }
        match t.0.samples.get(i) {
            Some(s) => {
                let r = export::record(s);
                ptr::copy_nonoverlapping(r.as_ptr(), out, 9);
                QtStatus::Ok
            }
            None => fail(
                QtStatus::OutOfRange,
                format!("sample {i} of {}", t.0.samples.len()),
            ),
        }
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qt_trajectory_free(t: *mut QtTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Section `z = 0, p_z > 0` of `n_seeds` default seeds, `n_crossings` each.
///
/// # Safety
/// `p` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qt_section_compute(
    p: *const QtParams,
    h: f64,
    p_phi: f64,
    n_seeds: usize,
    n_crossings: usize,
    out: *mut *mut QtSection,
) -> QtStatus {
    guard(|| {
        let p = deref!(p);
        let out = out!(out);
        *out = ptr::null_mut();
        if n_seeds == 0 {
            return fail(QtStatus::InvalidArgument, "n_seeds must be positive");
        }
        let spec = match SectionSpec::new(h, p_phi, n_crossings) {
            Ok(s) => s,
            Err(e) => return fail(QtStatus::InvalidArgument, e.to_string()),
        };
        let seeds = match default_seeds(h, p_phi, n_seeds, &p.0) {
            Ok(s) => s,
            Err(e) => return fail(QtStatus::InvalidArgument, e.to_string()),
        };
        let sec = compute_section(&spec, &seeds, &p.0, &IntegrateOptions::default());
        let aborted = sec.iter().filter(|s| s.aborted.is_some()).count();
        *out = Box::into_raw(Box::new(QtSection(sec)));
        if aborted > 0 {
            return fail(QtStatus::NumericFailure, format!("{aborted} seeds aborted"));
        }
        QtStatus::Ok
    })
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qt_section_seed_count(s: *const QtSection) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qt_section_point_count(s: *const QtSection, seed: usize) -> usize {
    s.as_ref()
        .and_then(|s| s.0.get(seed))
        .map_or(0, |s| s.points.len())
}

/// Crossing `i` of seed `seed` as `(tau, r, p_r)`.
///
/// # Safety
/// `s` must be a live handle; `out` must point to three doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_section_point(
    s: *const QtSection,
    seed: usize,
    i: usize,
    out: *mut f64,
) -> QtStatus {
    guard(|| {
        let s = deref!(s);
        if out.is_null() {
            return fail(QtStatus::NullPointer, "out is null");
        }
        match s.0.get(seed).and_then(|x| x.points.get(i)) {
            Some(pt) => {
                let v = [pt.tau, pt.r, pt.p_r];
                ptr::copy_nonoverlapping(v.as_ptr(), out, 3);
                QtStatus::Ok
            }
            None => fail(
                QtStatus::OutOfRange,
                format!("no crossing {i} for seed {seed}"),
            ),
        }
    })
}

/// # Safety
/// `s` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qt_section_free(s: *mut QtSection) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Closed-form `(z, z')` on the axis at rescaled energy `h_z` and time `t`.
///
/// # Safety
/// `out` must point to two doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_zaxis_state(h_z: f64, t: f64, out: *mut f64) -> QtStatus {
    guard(|| {
        if out.is_null() {
            return fail(QtStatus::NullPointer, "out is null");
        }
        match z_axis_solution(h_z) {
            Ok(m) => {
                *out = m.z(t);
                *out.add(1) = m.velocity(t);
                QtStatus::Ok
            }
            Err(e) => fail(QtStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Inner and outer turning radius of the rescaled planar problem.
///
/// # Safety
/// `out` must point to two doubles.
#[no_mangle]
pub unsafe extern "C" fn qt_radial_turning_points(h_r: f64, c_z: f64, out: *mut f64) -> QtStatus {
    guard(|| {
        if out.is_null() {
            return fail(QtStatus::NullPointer, "out is null");
        }
        match radial_turning_points(h_r, c_z) {
            Ok(tp) => {
                *out = tp.r1;
                *out.add(1) = tp.r2;
                QtStatus::Ok
            }
            Err(e) => fail(QtStatus::InvalidArgument, e.to_string()),
        }
    })
}

fn ratio(n: i64, d: i64) -> Option<Rational> {
    (d != 0).then(|| Rational::new(BigInt::from(n), BigInt::from(d)))
}

/// Morales-Ramis test for degree `k_num/k_den` and eigenvalues
/// `num[i]/den[i]`. `verdict` receives 1 for pass, 0 for fail; on fail the
/// witness eigenvalue is written to `witness_num/witness_den`.
///
/// # Safety
/// `num` and `den` must point to `n` integers; the outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn qt_galois_check(
    k_num: i64,
    k_den: i64,
    num: *const i64,
    den: *const i64,
    n: usize,
    verdict: *mut c_int,
    witness_num: *mut i64,
    witness_den: *mut i64,
) -> QtStatus {
    guard(|| {
        let verdict = out!(verdict);
        let witness_num = out!(witness_num);
        let witness_den = out!(witness_den);
        if n > 0 && (num.is_null() || den.is_null()) {
            return fail(QtStatus::NullPointer, "eigenvalue arrays are null");
        }
        let Some(k) = ratio(k_num, k_den) else {
            return fail(QtStatus::InvalidArgument, "zero denominator in k");
        };
        let mut lambdas = Vec::with_capacity(n);
        for i in 0..n {
            match ratio(*num.add(i), *den.add(i)) {
                Some(l) => lambdas.push(l),
                None => {
                    return fail(
                        QtStatus::InvalidArgument,
                        format!("zero denominator in eigenvalue {i}"),
                    )
                }
            }
        }
        match morales_ramis_verdict(&k, &lambdas) {
            Ok(r) => {
                match r.verdict {
                    Verdict::Pass { .. } => *verdict = 1,
                    Verdict::Fail { witness } => {
                        *verdict = 0;
                        match (witness.numer().to_i64(), witness.denom().to_i64()) {
                            (Some(a), Some(b)) => (*witness_num, *witness_den) = (a, b),
                            _ => {
                                return fail(
                                    QtStatus::OutOfRange,
                                    "witness does not fit in 64 bits",
                                )
                            }
                        }
                    }
                }
                QtStatus::Ok
            }
            Err(e) => fail(QtStatus::InvalidArgument, e.to_string()),
        }
    })
}
