//! C ABI for the population-recovery toolkit.
//!
//! Handles are opaque pointers owned by this library; every constructor has
//! a matching `_free`, statuses are plain error codes, and all outputs go
//! through out-parameters. The generated header lands in `include/poprec.h`.

use std::ffi::c_char;

use poprec::estimators::EstimatorCoefficients;
use poprec::minimax::{
    delta_of_t, delta_tilde_of_t, risk_bounds, synthesize_estimator, t_of_delta,
    FunctionalVector, SynthesisResult,
};
use poprec::model::{ChannelKind, ChannelModel, TransitionMatrix};
use poprec::Error;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoprecStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SolverFailure = 3,
    Infeasible = 4,
    BufferTooSmall = 5,
}

fn status_of(e: &Error) -> PoprecStatus {
    match e {
        Error::SolverStalled(_) | Error::Unbounded => PoprecStatus::SolverFailure,
        Error::Infeasible(_) => PoprecStatus::Infeasible,
        _ => PoprecStatus::InvalidArgument,
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn poprec_status_message(status: PoprecStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        PoprecStatus::Ok => b"ok\0",
        PoprecStatus::NullPointer => b"null pointer argument\0",
        PoprecStatus::InvalidArgument => b"invalid argument\0",
        PoprecStatus::SolverFailure => b"solver failure\0",
        PoprecStatus::Infeasible => b"linear program infeasible\0",
        PoprecStatus::BufferTooSmall => b"output buffer too small\0",
    };
    msg.as_ptr() as *const c_char
}

/// Channel selector: 0 = lossy (erasure), 1 = noisy (bit flip).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoprecModel {
    Lossy = 0,
    Noisy = 1,
}

/// Opaque weight-transition matrix handle.
pub struct PoprecPhi(TransitionMatrix);

/// Opaque synthesized-estimator handle.
pub struct PoprecSynthesis(SynthesisResult);

/// Build the `(d+1) x (d+1)` transition matrix for the given channel.
///
/// # Safety
/// `out` must be a valid pointer; on `Ok` it receives a handle that must be
/// released with [`poprec_phi_free`].
#[no_mangle]
pub unsafe extern "C" fn poprec_phi_new(
    model: PoprecModel,
    eps: f64,
    d: usize,
    out: *mut *mut PoprecPhi,
) -> PoprecStatus {
    if out.is_null() {
        return PoprecStatus::NullPointer;
    }
    let kind = match model {
        PoprecModel::Lossy => ChannelKind::Lossy,
        PoprecModel::Noisy => ChannelKind::Noisy,
    };
    let channel = match ChannelModel::new(kind, eps) {
        Ok(c) => c,
        Err(e) => return status_of(&e),
    };
    match channel.build_phi(d) {
        Ok(phi) => {
            *out = Box::into_raw(Box::new(PoprecPhi(phi)));
            PoprecStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Release a transition-matrix handle. Null is ignored.
///
/// # Safety
/// `phi` must be null or a pointer from [`poprec_phi_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn poprec_phi_free(phi: *mut PoprecPhi) {
    if !phi.is_null() {
        drop(Box::from_raw(phi));
    }
}

/// Dimension `d` of the handle (the matrix is `(d+1) x (d+1)`).
///
/// # Safety
/// `phi` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn poprec_phi_dim(phi: *const PoprecPhi) -> usize {
    if phi.is_null() {
        return usize::MAX;
    }
    (*phi).0.d()
}

/// Entry `Phi[i][j]` (output weight `i`, input weight `j`).
///
/// # Safety
/// `phi` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn poprec_phi_entry(
    phi: *const PoprecPhi,
    i: usize,
    j: usize,
    out: *mut f64,
) -> PoprecStatus {
    if phi.is_null() || out.is_null() {
        return PoprecStatus::NullPointer;
    }
    let m = &(*phi).0;
    if i > m.d() || j > m.d() {
        return PoprecStatus::InvalidArgument;
    }
    *out = m.entry(i, j);
    PoprecStatus::Ok
}

/// Dual LP value `delta(t)` for the functional `pi(0)`; `centered` adds the
/// `<Delta, 1> = 0` constraint.
///
/// # Safety
/// `phi` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn poprec_delta_of_t(
    phi: *const PoprecPhi,
    t: f64,
    centered: bool,
    out: *mut f64,
) -> PoprecStatus {
    if phi.is_null() || out.is_null() {
        return PoprecStatus::NullPointer;
    }
    let m = &(*phi).0;
    let h = FunctionalVector::e0(m.d());
    let r = if centered {
        delta_tilde_of_t(m, &h, t)
    } else {
        delta_of_t(m, &h, t)
    };
    match r {
        Ok(res) => {
            *out = res.value;
            PoprecStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Min-TV LP value `t(delta)`.
///
/// # Safety
/// `phi` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn poprec_t_of_delta(
    phi: *const PoprecPhi,
    delta: f64,
    out: *mut f64,
) -> PoprecStatus {
    if phi.is_null() || out.is_null() {
        return PoprecStatus::NullPointer;
    }
    match t_of_delta(&(*phi).0, delta) {
        Ok(res) => {
            *out = res.value;
            PoprecStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Minimax risk bracket `((1/64) delta(1/n)^2, delta(1/sqrt n)^2)`.
///
/// # Safety
/// `phi` must be a live handle; `lower` and `upper` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn poprec_risk_bounds(
    phi: *const PoprecPhi,
    n: u64,
    lower: *mut f64,
    upper: *mut f64,
) -> PoprecStatus {
    if phi.is_null() || lower.is_null() || upper.is_null() {
        return PoprecStatus::NullPointer;
    }
    let h = FunctionalVector::e0((*phi).0.d());
    match risk_bounds(&(*phi).0, &h, n) {
        Ok((lo, hi)) => {
            *lower = lo;
            *upper = hi;
            PoprecStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Synthesize the minimax estimator for `P_0` at sample size `n`.
///
/// # Safety
/// `phi` must be a live handle; on `Ok`, `out` receives a handle to free
/// with [`poprec_synthesis_free`].
#[no_mangle]
pub unsafe extern "C" fn poprec_synthesize(
    phi: *const PoprecPhi,
    n: u64,
    out: *mut *mut PoprecSynthesis,
) -> PoprecStatus {
    if phi.is_null() || out.is_null() {
        return PoprecStatus::NullPointer;
    }
    let m = &(*phi).0;
    let h = FunctionalVector::e0(m.d());
    match synthesize_estimator(m, &h, n) {
        Ok(s) => {
            *out = Box::into_raw(Box::new(PoprecSynthesis(s)));
            PoprecStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Release a synthesis handle. Null is ignored.
///
/// # Safety
/// `s` must be null or a pointer from [`poprec_synthesize`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn poprec_synthesis_free(s: *mut PoprecSynthesis) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Objective value, bias bound and sup norm of a synthesis.
///
/// # Safety
/// `s` must be a live handle; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn poprec_synthesis_stats(
    s: *const PoprecSynthesis,
    value: *mut f64,
    bias_bound: *mut f64,
    sup_norm: *mut f64,
) -> PoprecStatus {
    if s.is_null() || value.is_null() || bias_bound.is_null() || sup_norm.is_null() {
        return PoprecStatus::NullPointer;
    }
    let r = &(*s).0;
    *value = r.value;
    *bias_bound = r.bias_bound;
    *sup_norm = r.sup_norm;
    PoprecStatus::Ok
}

/// Number of coefficients (`d + 1`).
///
/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn poprec_synthesis_len(s: *const PoprecSynthesis) -> usize {
    if s.is_null() {
        return 0;
    }
    (*s).0.g.g.len()
}

/// Copy the coefficient vector into `buf` (capacity `len`).
///
/// # Safety
/// `s` must be a live handle; `buf` must point to at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn poprec_synthesis_coefficients(
    s: *const PoprecSynthesis,
    buf: *mut f64,
    len: usize,
) -> PoprecStatus {
    if s.is_null() || buf.is_null() {
        return PoprecStatus::NullPointer;
    }
    let g = &(*s).0.g.g;
    if len < g.len() {
        return PoprecStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(g.as_ptr(), buf, g.len());
    PoprecStatus::Ok
}

/// Unbiased lossy coefficients `g_j = (-eps/(1-eps))^j` into `buf`.
///
/// # Safety
/// `buf` must point to at least `len >= d + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn poprec_unbiased_coefficients(
    d: usize,
    eps: f64,
    buf: *mut f64,
    len: usize,
) -> PoprecStatus {
    if buf.is_null() {
        return PoprecStatus::NullPointer;
    }
    if len < d + 1 {
        return PoprecStatus::BufferTooSmall;
    }
    match poprec::estimators::unbiased_coefficients(d, eps) {
        Ok(EstimatorCoefficients { g, .. }) => {
            std::ptr::copy_nonoverlapping(g.as_ptr(), buf, g.len());
            PoprecStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Apply a linear estimator to a weight histogram: `(1/n) sum g_j counts_j`.
///
/// # Safety
/// `g` and `counts` must point to `len` readable elements; `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn poprec_apply_estimator(
    g: *const f64,
    counts: *const u64,
    len: usize,
    out: *mut f64,
) -> PoprecStatus {
    if g.is_null() || counts.is_null() || out.is_null() {
        return PoprecStatus::NullPointer;
    }
    if len == 0 {
        return PoprecStatus::InvalidArgument;
    }
    let g = std::slice::from_raw_parts(g, len);
    let counts = std::slice::from_raw_parts(counts, len);
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return PoprecStatus::InvalidArgument;
    }
    *out = g
        .iter()
        .zip(counts)
        .map(|(gj, &c)| gj * c as f64)
        .sum::<f64>()
        / n as f64;
    PoprecStatus::Ok
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_round_trip_through_the_c_abi() {
        unsafe {
            let mut phi: *mut PoprecPhi = std::ptr::null_mut();
            let st = poprec_phi_new(PoprecModel::Lossy, 0.5, 2, &mut phi);
            assert_eq!(st, PoprecStatus::Ok);
            assert_eq!(poprec_phi_dim(phi), 2);
            let mut e = 0.0;
            assert_eq!(poprec_phi_entry(phi, 0, 2, &mut e), PoprecStatus::Ok);
            assert_eq!(e, 0.25);
            assert_eq!(poprec_phi_entry(phi, 3, 0, &mut e), PoprecStatus::InvalidArgument);
            poprec_phi_free(phi);
        }
    }

    #[test]
    fn lp_values_and_synthesis() {
        unsafe {
            let mut phi: *mut PoprecPhi = std::ptr::null_mut();
            assert_eq!(
                poprec_phi_new(PoprecModel::Lossy, 0.3, 5, &mut phi),
                PoprecStatus::Ok
            );
            let mut t = 0.0;
            assert_eq!(poprec_t_of_delta(phi, 0.1, &mut t), PoprecStatus::Ok);
            assert!((t - 0.1).abs() < 1e-9);
            assert_eq!(
                poprec_t_of_delta(phi, 1.5, &mut t),
                PoprecStatus::Infeasible
            );

            let mut s: *mut PoprecSynthesis = std::ptr::null_mut();
            assert_eq!(poprec_synthesize(phi, 100, &mut s), PoprecStatus::Ok);
            let (mut v, mut b, mut sup) = (0.0, 0.0, 0.0);
            assert_eq!(
                poprec_synthesis_stats(s, &mut v, &mut b, &mut sup),
                PoprecStatus::Ok
            );
            let mut dual = 0.0;
            assert_eq!(poprec_delta_of_t(phi, 0.1, false, &mut dual), PoprecStatus::Ok);
            assert!((v - dual).abs() <= 1e-7 * v.max(1.0));

            let len = poprec_synthesis_len(s);
            assert_eq!(len, 6);
            let mut buf = vec![0.0; len];
            assert_eq!(
                poprec_synthesis_coefficients(s, buf.as_mut_ptr(), len),
                PoprecStatus::Ok
            );
            assert_eq!(
                poprec_synthesis_coefficients(s, buf.as_mut_ptr(), 2),
                PoprecStatus::BufferTooSmall
            );
            poprec_synthesis_free(s);
            poprec_phi_free(phi);
        }
    }

    #[test]
    fn estimator_application() {
        unsafe {
            let mut buf = vec![0.0; 3];
            assert_eq!(
                poprec_unbiased_coefficients(2, 0.5, buf.as_mut_ptr(), 3),
                PoprecStatus::Ok
            );
            assert_eq!(buf, vec![1.0, -1.0, 1.0]);
            let counts = [2u64, 1, 0];
            let mut out = 0.0;
            assert_eq!(
                poprec_apply_estimator(buf.as_ptr(), counts.as_ptr(), 3, &mut out),
                PoprecStatus::Ok
            );
            assert!((out - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn null_handling() {
        unsafe {
            assert_eq!(
                poprec_phi_new(PoprecModel::Lossy, 0.5, 2, std::ptr::null_mut()),
                PoprecStatus::NullPointer
            );
            poprec_phi_free(std::ptr::null_mut());
            poprec_synthesis_free(std::ptr::null_mut());
            let mut e = 0.0;
            assert_eq!(
                poprec_phi_entry(std::ptr::null(), 0, 0, &mut e),
                PoprecStatus::NullPointer
            );
            assert!(!poprec_status_message(PoprecStatus::Infeasible).is_null());
        }
    }
}
