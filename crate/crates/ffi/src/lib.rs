//! C interface to covsel.
//!
//! Matrices and reports are opaque handles created by `covsel_*_new` /
//! `covsel_analyze` and released with the matching `*_free`. Every fallible
//! call returns a [`CovselStatus`]; on failure the message is available from
//! [`covsel_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use covsel::graph::EdgeSet;
use covsel::matrix::{CamSpectrum, CorrelationMatrix};
use covsel::report::{analyze, QualityReport};
use covsel::{chow_liu_tree, feasible_region_curve, Error, QuadratureConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovselStatus {
    Ok = 0,
    NullPointer = 1,
    /// Input failed validation (shape, symmetry, definiteness, structure).
    InvalidInput = 2,
    /// Quadrature, eigensolver or root finder did not converge.
    NumericalFailure = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// Validated correlation matrix.
pub struct CovselMatrix(CorrelationMatrix);

/// Result of [`covsel_analyze`].
pub struct CovselReport(QualityReport);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CovselSummary {
    pub n: usize,
    pub kl: f64,
    pub reverse_kl: f64,
    pub jeffreys: f64,
    pub auc: f64,
    pub one_minus_auc: f64,
    pub auc_lower: f64,
    pub auc_upper: f64,
    pub auc_lower_asymptotic: f64,
    pub auc_upper_asymptotic: f64,
    pub d_star: f64,
    pub cam_trace: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(e: Error) -> CovselStatus {
    let status = if e.exit_code() == 3 {
        CovselStatus::NumericalFailure
    } else {
        CovselStatus::InvalidInput
    };
    set_error(e.to_string());
    status
}

fn guard<F: FnOnce() -> CovselStatus>(f: F) -> CovselStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            CovselStatus::Panic
        }
    }
}

macro_rules! require {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            set_error("null pointer argument".into());
            return CovselStatus::NullPointer;
        }
    };
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn covsel_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn covsel_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Validates the row-major `n × n` matrix at `data` and stores a new handle
/// in `*out`.
///
/// # Safety
/// `data` must point to `n * n` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covsel_matrix_new(data: *const f64, n: usize, out: *mut *mut CovselMatrix) -> CovselStatus {
    require!(data, out);
    guard(|| {
        let Some(len) = n.checked_mul(n) else {
            return fail(Error::OutOfDomain(format!("dimension {n} overflows")));
        };
        // SAFETY: the caller guarantees `n * n` readable doubles.
        let values = unsafe { slice::from_raw_parts(data, len) };
        let rows: Vec<Vec<f64>> = values.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        match CorrelationMatrix::from_rows(&rows) {
            Ok(m) => {
                // SAFETY: `out` is non-null and writable per the contract.
                unsafe { *out = Box::into_raw(Box::new(CovselMatrix(m))) };
                CovselStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `m` must be NULL or a handle from [`covsel_matrix_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn covsel_matrix_free(m: *mut CovselMatrix) {
    if !m.is_null() {
        // SAFETY: created by Box::into_raw in covsel_matrix_new.
        drop(unsafe { Box::from_raw(m) });
    }
}

/// Dimension of the matrix, or 0 for NULL.
///
/// # Safety
/// `m` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn covsel_matrix_dim(m: *const CovselMatrix) -> usize {
    // SAFETY: live handle or NULL per the contract.
    unsafe { m.as_ref() }.map_or(0, |m| m.0.dim())
}

/// Writes the `n − 1` Chow–Liu edges as `u0, v0, u1, v1, …` into `edges`,
/// which must hold `capacity` entries (at least `2(n − 1)`).
///
/// # Safety
/// `m` must be a live handle and `edges` must point to `capacity` writable
/// `size_t` values.
#[no_mangle]
pub unsafe extern "C" fn covsel_chow_liu(m: *const CovselMatrix, edges: *mut usize, capacity: usize) -> CovselStatus {
    require!(m, edges);
    guard(|| {
        // SAFETY: checked non-null; live per the contract.
        let m = unsafe { &*m };
        let tree = match chow_liu_tree(&m.0) {
            Ok(t) => t,
            Err(e) => return fail(e),
        };
        let flat: Vec<usize> = tree.canonical().into_iter().flat_map(|(u, v)| [u, v]).collect();
        if flat.len() > capacity {
            set_error(format!("need {} entries, buffer holds {capacity}", flat.len()));
            return CovselStatus::BufferTooSmall;
        }
        // SAFETY: `edges` holds at least `capacity >= flat.len()` entries.
        unsafe { ptr::copy_nonoverlapping(flat.as_ptr(), edges, flat.len()) };
        CovselStatus::Ok
    })
}

/// Selects the model for the `n_edges` edges `u0, v0, u1, v1, …` and
/// evaluates divergences, the exact AUC and the bounds.
///
/// # Safety
/// `m` must be a live handle, `edges` must point to `2 * n_edges` readable
/// `size_t` values (it may be NULL when `n_edges` is 0) and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn covsel_analyze(
    m: *const CovselMatrix,
    edges: *const usize,
    n_edges: usize,
    out: *mut *mut CovselReport,
) -> CovselStatus {
    require!(m, out);
    if n_edges > 0 {
        require!(edges);
    }
    guard(|| {
        // SAFETY: checked non-null; live per the contract.
        let m = unsafe { &*m };
        let flat = if n_edges == 0 {
            &[][..]
        } else {
            // SAFETY: `2 * n_edges` readable values per the contract.
            unsafe { slice::from_raw_parts(edges, 2 * n_edges) }
        };
        let pairs = flat.chunks(2).map(|p| (p[0], p[1])).collect();
        let result = EdgeSet::new(m.0.dim(), pairs).and_then(|s| analyze(&m.0, &s, &QuadratureConfig::default()));
        match result {
            Ok(r) => {
                // SAFETY: `out` is non-null and writable.
                unsafe { *out = Box::into_raw(Box::new(CovselReport(r))) };
                CovselStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// # Safety
/// `r` must be NULL or a handle from [`covsel_analyze`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn covsel_report_free(r: *mut CovselReport) {
    if !r.is_null() {
        // SAFETY: created by Box::into_raw in covsel_analyze.
        drop(unsafe { Box::from_raw(r) });
    }
}

/// # Safety
/// `r` must be a live report handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn covsel_report_summary(r: *const CovselReport, out: *mut CovselSummary) -> CovselStatus {
    require!(r, out);
    // SAFETY: both checked non-null; valid per the contract.
    let r = unsafe { &(*r).0 };
    let s = CovselSummary {
        n: r.n,
        kl: r.kl,
        reverse_kl: r.reverse_kl,
        jeffreys: r.jeffreys,
        auc: r.auc,
        one_minus_auc: r.one_minus_auc,
        auc_lower: r.auc_lower,
        auc_upper: r.auc_upper,
        auc_lower_asymptotic: r.auc_lower_asymptotic,
        auc_upper_asymptotic: r.auc_upper_asymptotic,
        d_star: r.d_star,
        cam_trace: r.cam_trace,
    };
    unsafe { *out = s };
    CovselStatus::Ok
}

/// Copies the CAM eigenvalues (descending) into `buf`. `*len` receives the
/// count even when the buffer is too small.
///
/// # Safety
/// `r` must be a live report handle, `buf` must hold `capacity` writable
/// doubles and `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covsel_report_eigenvalues(
    r: *const CovselReport,
    buf: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> CovselStatus {
    require!(r, buf, len);
    // SAFETY: checked non-null; valid per the contract.
    let lambdas = unsafe { &(*r).0.lambdas };
    unsafe { *len = lambdas.len() };
    if lambdas.len() > capacity {
        set_error(format!("need {} entries, buffer holds {capacity}", lambdas.len()));
        return CovselStatus::BufferTooSmall;
    }
    // SAFETY: `buf` holds at least `capacity` doubles.
    unsafe { ptr::copy_nonoverlapping(lambdas.as_ptr(), buf, lambdas.len()) };
    CovselStatus::Ok
}

/// Exact AUC for the spectrum with dissimilarities `alphas[0..n]`.
///
/// # Safety
/// `alphas` must point to `n` readable doubles (NULL allowed when `n` is 0)
/// and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covsel_auc_from_alphas(alphas: *const f64, n: usize, out: *mut f64) -> CovselStatus {
    require!(out);
    if n > 0 {
        require!(alphas);
    }
    guard(|| {
        let a = if n == 0 {
            &[][..]
        } else {
            // SAFETY: `n` readable doubles per the contract.
            unsafe { slice::from_raw_parts(alphas, n) }
        };
        match CamSpectrum::from_alphas(a).and_then(|s| covsel::auc_exact(&s, &QuadratureConfig::default())) {
            Ok(v) => {
                // SAFETY: `out` is non-null and writable.
                unsafe { *out = v };
                CovselStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Point on the feasible (AUC, KL) boundary at parameter `a > 0`.
///
/// # Safety
/// `auc` and `kl` must be writable.
#[no_mangle]
pub unsafe extern "C" fn covsel_feasible_region_point(a: f64, auc: *mut f64, kl: *mut f64) -> CovselStatus {
    require!(auc, kl);
    match feasible_region_curve(a) {
        Ok((x, d)) => {
            // SAFETY: both checked non-null.
            unsafe {
                *auc = x;
                *kl = d;
            }
            CovselStatus::Ok
        }
        Err(e) => fail(e),
    }
}
