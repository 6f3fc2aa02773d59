//! C ABI over the spinchaos core: opaque state handles, integer status
//! codes, and flat-buffer outputs. Every entry point is panic-safe.

use num_complex::Complex64;
use spinchaos::analytic;
use spinchaos::dicke::DickeBasis;
use spinchaos::evolve::{ConstStepper, KickedPropagator};
use spinchaos::mf;
use spinchaos::params::{KickedDrive, ModelParams, SpinError};
use spinchaos::qfi;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinStatus {
    Ok = 0,
    InvalidArg = 1,
    NullPtr = 2,
    NumericalError = 3,
}

/// Opaque quantum state handle: a Dicke basis plus amplitudes.
pub struct SpinState {
    basis: DickeBasis,
    psi: Vec<Complex64>,
}

fn status_of(e: &SpinError) -> SpinStatus {
    match e {
        SpinError::InvalidParams(_) | SpinError::Config(_) | SpinError::Io(_) => {
            SpinStatus::InvalidArg
        }
        _ => SpinStatus::NumericalError,
    }
}

fn guarded(f: impl FnOnce() -> SpinStatus) -> SpinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => SpinStatus::NumericalError,
    }
}

/// Library version as a NUL-terminated static string.
#[no_mangle]
pub extern "C" fn spinchaos_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn emit_state(
    out: *mut *mut SpinState,
    basis: DickeBasis,
    psi: Vec<Complex64>,
) -> SpinStatus {
    *out = Box::into_raw(Box::new(SpinState { basis, psi }));
    SpinStatus::Ok
}

/// New spin-coherent state of N spins along (theta, phi).
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn spinchaos_state_new_coherent(
    n: usize,
    theta: f64,
    phi: f64,
    out: *mut *mut SpinState,
) -> SpinStatus {
    if out.is_null() {
        return SpinStatus::NullPtr;
    }
    guarded(|| {
        if n < 2 || !theta.is_finite() || !phi.is_finite() {
            return SpinStatus::InvalidArg;
        }
        let basis = DickeBasis::new(n);
        let psi = basis.coherent(theta, phi);
        emit_state(out, basis, psi)
    })
}

/// New J_z eigenstate |mu>, index 0 meaning mu = -N/2.
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn spinchaos_state_new_fock(
    n: usize,
    index: usize,
    out: *mut *mut SpinState,
) -> SpinStatus {
    if out.is_null() {
        return SpinStatus::NullPtr;
    }
    guarded(|| {
        if n < 2 {
            return SpinStatus::InvalidArg;
        }
        let basis = DickeBasis::new(n);
        match basis.fock(index) {
            Ok(psi) => emit_state(out, basis, psi),
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `state` must come from a spinchaos constructor; NULL is a no-op.
#[no_mangle]
pub unsafe extern "C" fn spinchaos_state_free(state: *mut SpinState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// # Safety
/// `state` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn spinchaos_state_dim(state: *const SpinState, out: *mut usize) -> SpinStatus {
    if state.is_null() || out.is_null() {
        return SpinStatus::NullPtr;
    }
    *out = (*state).psi.len();
    SpinStatus::Ok
}

/// Copies the amplitudes into caller buffers of length `len` (= N+1).
///
/// # Safety
/// `re` and `im` must hold at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn spinchaos_state_amplitudes(
    state: *const SpinState,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> SpinStatus {
    if state.is_null() || re.is_null() || im.is_null() {
        return SpinStatus::NullPtr;
    }
    let s = &*state;
    if len != s.psi.len() {
        return SpinStatus::InvalidArg;
    }
    for (k, z) in s.psi.iter().enumerate() {
        *re.add(k) = z.re;
        *im.add(k) = z.im;
    }
    SpinStatus::Ok
}

/// Quantum Fisher information of the state (largest eigenvalue of the
/// 4x covariance matrix over J_x, J_y, J_z).
///
/// # Safety
/// `state` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn spinchaos_qfi(state: *const SpinState, out: *mut f64) -> SpinStatus {
    if state.is_null() || out.is_null() {
        return SpinStatus::NullPtr;
    }
    guarded(|| {
        let s = &*state;
        let m = s.basis.moments(&s.psi);
        *out = qfi::fq_from_moments(&m);
        SpinStatus::Ok
    })
}

/// First moments <J_i> (3 doubles) and symmetrised second moments
/// (9 doubles, row-major) of the state.
///
/// # Safety
/// `first` must hold 3 doubles and `second` 9 doubles.
#[no_mangle]
pub unsafe extern "C" fn spinchaos_moments(
    state: *const SpinState,
    first: *mut f64,
    second: *mut f64,
) -> SpinStatus {
    if state.is_null() || first.is_null() || second.is_null() {
        return SpinStatus::NullPtr;
    }
    guarded(|| {
        let s = &*state;
        let m = s.basis.moments(&s.psi);
        for i in 0..3 {
            *first.add(i) = m.first[i];
            for j in 0..3 {
                *second.add(3 * i + j) = m.second[i][j];
            }
        }
        SpinStatus::Ok
    })
}

/// Entanglement depth witnessed by QFI value `f` for `n` spins.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spinchaos_depth_witness(f: f64, n: usize, out: *mut usize) -> SpinStatus {
    if out.is_null() {
        return SpinStatus::NullPtr;
    }
    guarded(|| match qfi::depth_witness(f, n) {
        Ok(k) => {
            *out = k;
            SpinStatus::Ok
        }
        Err(e) => status_of(&e),
    })
}

/// Evolves the state in place under H = a J_x + sign (c/N) J_z^2 for
/// time `t` in steps of `dt`.
///
/// # Safety
/// `state` must come from a spinchaos constructor.
#[no_mangle]
pub unsafe extern "C" fn spinchaos_evolve_const(
    state: *mut SpinState,
    a: f64,
    c: f64,
    sign: f64,
    t: f64,
    dt: f64,
) -> SpinStatus {
    if state.is_null() {
        return SpinStatus::NullPtr;
    }
    guarded(|| {
        let s = &mut *state;
        if !(t >= 0.0 && dt > 0.0) {
            return SpinStatus::InvalidArg;
        }
        let p = match ModelParams::new(s.basis.n, a, c, sign) {
            Ok(p) => p,
            Err(e) => return status_of(&e),
        };
        let mut stepper = match ConstStepper::new(&p, &s.basis) {
            Ok(st) => st,
            Err(e) => return status_of(&e),
        };
        let steps = (t / dt).round() as usize;
        for _ in 0..steps {
            if let Err(e) = stepper.step(&mut s.psi, dt) {
                return status_of(&e);
            }
        }
        SpinStatus::Ok
    })
}

/// Evolves the state in place through `periods` rectangular kicks of
/// strength `amp` (width 0.01, free interval 1) on a grid of step `dt`.
///
/// # Safety
/// `state` must come from a spinchaos constructor.
#[no_mangle]
pub unsafe extern "C" fn spinchaos_evolve_kicked(
    state: *mut SpinState,
    amp: f64,
    c: f64,
    sign: f64,
    periods: usize,
    dt: f64,
) -> SpinStatus {
    if state.is_null() {
        return SpinStatus::NullPtr;
    }
    guarded(|| {
        let s = &mut *state;
        if !(dt > 0.0) {
            return SpinStatus::InvalidArg;
        }
        let p = match ModelParams::new(s.basis.n, amp, c, sign) {
            Ok(p) => p,
            Err(e) => return status_of(&e),
        };
        let drive = KickedDrive::standard(amp);
        let mut prop = match KickedPropagator::new(&p, &drive, &s.basis, dt) {
            Ok(pr) => pr,
            Err(e) => return status_of(&e),
        };
        let per_period = (drive.period() / dt).round() as usize;
        for k in 0..periods * per_period {
            prop.step_at(&mut s.psi, k as f64 * dt);
        }
        SpinStatus::Ok
    })
}

/// Closed-form one-axis-twisting QFI at time t.
#[no_mangle]
pub extern "C" fn spinchaos_fq_oat_closed(n: usize, c: f64, t: f64) -> f64 {
    if n < 2 {
        return f64::NAN;
    }
    analytic::fq_oat_exact(n, c, t)
}

/// Closed-form moment-truncation QFI at time t.
#[no_mangle]
pub extern "C" fn spinchaos_fb_oat_closed(n: usize, c: f64, t: f64) -> f64 {
    if n < 2 {
        return f64::NAN;
    }
    analytic::fb_oat_exact(n, c, t)
}

/// Largest Lyapunov exponent of the kicked classical limit from the
/// x-pole seed, `m` periods, initial separation `delta0`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn spinchaos_lyapunov(
    amp: f64,
    c: f64,
    m: usize,
    delta0: f64,
    out: *mut f64,
) -> SpinStatus {
    if out.is_null() {
        return SpinStatus::NullPtr;
    }
    guarded(|| {
        let drive = KickedDrive::standard(amp);
        let s0: mf::Bloch = [1.0, 0.0, 0.0];
        match mf::lyapunov(&drive, c, &s0, m, delta0) {
            Ok(r) => {
                *out = r.lambda;
                SpinStatus::Ok
            }
            Err(e) => status_of(&e),
        }
    })
}
