//! C ABI over the cplab engines.
//!
//! Every function returns a [`CplabStatus`]. Results go through out-pointers, and on
//! failure the message is kept per thread for [`cplab_last_error`]. Ensembles, kernels
//! and factors are opaque handles released by their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cplab::delta_bose;
use cplab::gmc::{self, GaussianDraw, SpectralFactor, WeightedInnerProduct};
use cplab::paths::{self, io, IntersectionMatrix, IntersectionMode, LatticeScale, StartBox, WeightedPathEnsemble};
use cplab::rng::SeedStreams;
use cplab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CplabStatus {
    Ok = 0,
    Domain = 1,
    NonConvergence = 2,
    Overflow = 3,
    Guard = 4,
    DimensionMismatch = 5,
    NotPositive = 6,
    InvalidWindow = 7,
    Format = 8,
    Io = 9,
    /// A required pointer was null or a string was not UTF-8.
    InvalidArgument = 10,
    /// The output buffer is too short; the needed length was written.
    BufferTooSmall = 11,
    Panic = 12,
    /// Any other engine error; see the message.
    Other = 13,
}

/// Per-coincidence normalization of the intersection kernel.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CplabKernelMode {
    ErdosTaylor = 0,
    Continuum = 1,
    Renewal = 2,
    /// Indicator of distance at most `epsilon`.
    Epsilon = 3,
}

pub struct CplabEnsemble(WeightedPathEnsemble);
pub struct CplabKernel(IntersectionMatrix);
pub struct CplabFactor(SpectralFactor);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> CplabStatus {
    match e {
        Error::Domain(_) => CplabStatus::Domain,
        Error::NonConvergence { .. } => CplabStatus::NonConvergence,
        Error::Overflow(_) => CplabStatus::Overflow,
        Error::Guard(_) => CplabStatus::Guard,
        Error::DimensionMismatch { .. } => CplabStatus::DimensionMismatch,
        Error::NotPositive { .. } => CplabStatus::NotPositive,
        Error::InvalidWindow(_) => CplabStatus::InvalidWindow,
        Error::Format(_) => CplabStatus::Format,
        Error::Io(_) => CplabStatus::Io,
        _ => CplabStatus::Other,
    }
}

enum Fail {
    Engine(Error),
    Status(CplabStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Engine(e)
    }
}

fn invalid(msg: &str) -> Fail {
    Fail::Status(CplabStatus::InvalidArgument, msg.to_string())
}

/// Runs `f`, turning errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<CplabStatus, Fail>) -> CplabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(Fail::Engine(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside cplab".into());
            CplabStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| invalid("null output pointer"))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| invalid("null handle"))
}

unsafe fn path_arg(p: *const c_char) -> Result<String, Fail> {
    if p.is_null() {
        return Err(invalid("null path"));
    }
    CStr::from_ptr(p).to_str().map(String::from).map_err(|_| invalid("path is not UTF-8"))
}

unsafe fn points(p: *const f64) -> Result<[[f64; 2]; 2], Fail> {
    if p.is_null() {
        return Err(invalid("null point array"));
    }
    let s = std::slice::from_raw_parts(p, 4);
    Ok([[s[0], s[1]], [s[2], s[3]]])
}

/// Copies `src` into `buf`; `len` holds the capacity on entry and the needed length on exit.
unsafe fn fill(src: &[f64], buf: *mut f64, len: *mut usize) -> Result<CplabStatus, Fail> {
    let len = out(len)?;
    let cap = *len;
    *len = src.len();
    if cap < src.len() {
        return Ok(CplabStatus::BufferTooSmall);
    }
    if src.is_empty() {
        return Ok(CplabStatus::Ok);
    }
    if buf.is_null() {
        return Err(invalid("null buffer"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(CplabStatus::Ok)
}

fn converged(ok: bool) -> CplabStatus {
    if ok {
        CplabStatus::Ok
    } else {
        set_error("quadrature did not reach the tolerance; the value is the best estimate".into());
        CplabStatus::NonConvergence
    }
}

/// Copies the last error message of this thread, NUL-terminated and truncated to `cap`
/// bytes. Returns the full message length without the terminator.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn cplab_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = msg.len().min(cap - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// `j^θ(t)` with absolute tolerance `tol`. On `NON_CONVERGENCE` the outputs hold the best
/// estimate.
///
/// # Safety
/// Output pointers must be valid; `abs_error` may be null.
#[no_mangle]
pub unsafe extern "C" fn cplab_j_theta(theta: f64, t: f64, tol: f64, value: *mut f64, abs_error: *mut f64) -> CplabStatus {
    guard(|| {
        let r = delta_bose::j_theta(theta, t, tol)?;
        *out(value)? = r.value;
        if let Some(e) = abs_error.as_mut() {
            *e = r.abs_error_estimate;
        }
        Ok(converged(r.converged))
    })
}

/// The `j`-fold time convolution of `j^θ` at `t`.
///
/// # Safety
/// Output pointers must be valid; `abs_error` may be null.
#[no_mangle]
pub unsafe extern "C" fn cplab_j_convolution_power(
    theta: f64,
    t: f64,
    j: u32,
    tol: f64,
    value: *mut f64,
    abs_error: *mut f64,
) -> CplabStatus {
    guard(|| {
        let r = delta_bose::j_convolution_power(theta, t, j, tol)?;
        *out(value)? = r.value;
        if let Some(e) = abs_error.as_mut() {
            *e = r.abs_error_estimate;
        }
        Ok(converged(r.converged))
    })
}

/// Partial sum `Σ_{j ≤ J} a^{j−1} j^{θ,*j}(t)`; `terms` receives the number of terms used.
/// An overflowing series returns `OVERFLOW` with the last finite partial sum.
///
/// # Safety
/// `value` must be valid; `terms` may be null.
#[no_mangle]
pub unsafe extern "C" fn cplab_j_resummed(
    theta: f64,
    a: f64,
    t: f64,
    max_terms: u32,
    tol: f64,
    value: *mut f64,
    terms: *mut u32,
) -> CplabStatus {
    guard(|| {
        let r = delta_bose::j_resummed(theta, a, t, max_terms, tol)?;
        *out(value)? = r.value;
        if let Some(n) = terms.as_mut() {
            *n = r.terms;
        }
        Ok(match r.truncation {
            delta_bose::Truncation::Overflow => {
                set_error("partial sums left the representable range".into());
                CplabStatus::Overflow
            }
            _ => CplabStatus::Ok,
        })
    })
}

/// Two-particle kernel from `x = {x1, y1, x2, y2}` to `xp` at time `t`; with `centered`
/// nonzero the heat product is subtracted.
///
/// # Safety
/// `x` and `xp` must point to four doubles; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cplab_semigroup2(
    theta: f64,
    t: f64,
    x: *const f64,
    xp: *const f64,
    tol: f64,
    centered: i32,
    value: *mut f64,
) -> CplabStatus {
    guard(|| {
        let (x, xp) = (points(x)?, points(xp)?);
        let r = if centered != 0 {
            delta_bose::centered_moment2(theta, t, x, xp, tol)?
        } else {
            delta_bose::semigroup2(theta, t, x, xp, tol)?
        };
        *out(value)? = r.value;
        Ok(converged(r.converged))
    })
}

fn boxed<T>(v: T, dst: *mut *mut T) -> Result<CplabStatus, Fail> {
    // SAFETY: callers pass a pointer checked by `out`
    let slot = unsafe { out(dst)? };
    *slot = Box::into_raw(Box::new(v));
    Ok(CplabStatus::Ok)
}

/// Reads a path CSV at lattice horizon `lattice_n`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `ensemble` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cplab_ensemble_read_csv(path: *const c_char, lattice_n: u64, ensemble: *mut *mut CplabEnsemble) -> CplabStatus {
    guard(|| {
        let f = File::open(path_arg(path)?).map_err(Error::from)?;
        boxed(CplabEnsemble(io::read_csv(BufReader::new(f), lattice_n)?), ensemble)
    })
}

/// Reads the binary ensemble format.
///
/// # Safety
/// As [`cplab_ensemble_read_csv`].
#[no_mangle]
pub unsafe extern "C" fn cplab_ensemble_read_binary(path: *const c_char, ensemble: *mut *mut CplabEnsemble) -> CplabStatus {
    guard(|| {
        let f = File::open(path_arg(path)?).map_err(Error::from)?;
        boxed(CplabEnsemble(io::read_binary(BufReader::new(f))?), ensemble)
    })
}

/// Writes the path CSV (`binary` zero) or the binary format.
///
/// # Safety
/// `ensemble` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cplab_ensemble_write(ensemble: *const CplabEnsemble, path: *const c_char, binary: i32) -> CplabStatus {
    guard(|| {
        let e = handle(ensemble)?;
        let w = BufWriter::new(File::create(path_arg(path)?).map_err(Error::from)?);
        if binary != 0 {
            io::write_binary(&e.0, w)?;
        } else {
            io::write_csv(&e.0, w)?;
        }
        Ok(CplabStatus::Ok)
    })
}

/// `count` lazy walks on `(s, t]` at horizon `n`, all started at the origin.
///
/// # Safety
/// `ensemble` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cplab_ensemble_sample_walks(
    count: usize,
    s: i64,
    t: i64,
    n: u64,
    seed: u64,
    ensemble: *mut *mut CplabEnsemble,
) -> CplabStatus {
    guard(|| {
        let start = StartBox::new((0, 0), (0, 0))?;
        let seed = SeedStreams::new(seed).derive("sampling", 0);
        boxed(CplabEnsemble(paths::sample_reference_walks(count, (s, t), n, start, seed)?), ensemble)
    })
}

/// Number of paths; 0 for a null handle.
///
/// # Safety
/// `ensemble` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cplab_ensemble_len(ensemble: *const CplabEnsemble) -> usize {
    ensemble.as_ref().map_or(0, |e| e.0.len())
}

/// Copies the path weights; see [`cplab_kernel_entries`] for the buffer protocol.
///
/// # Safety
/// `ensemble` must be a live handle; `buf` must hold `*len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cplab_ensemble_weights(ensemble: *const CplabEnsemble, buf: *mut f64, len: *mut usize) -> CplabStatus {
    guard(|| fill(handle(ensemble)?.0.weights(), buf, len))
}

/// # Safety
/// `ensemble` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cplab_ensemble_free(ensemble: *mut CplabEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}

/// Intersection kernel of the ensemble over `(s, t]`; `epsilon` is read only in
/// `EPSILON` mode.
///
/// # Safety
/// `ensemble` must be a live handle; `kernel` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cplab_intersection_matrix(
    ensemble: *const CplabEnsemble,
    s: i64,
    t: i64,
    mode: CplabKernelMode,
    epsilon: f64,
    kernel: *mut *mut CplabKernel,
) -> CplabStatus {
    guard(|| {
        let mode = match mode {
            CplabKernelMode::ErdosTaylor => IntersectionMode::Lattice(LatticeScale::ErdosTaylor),
            CplabKernelMode::Continuum => IntersectionMode::Lattice(LatticeScale::Continuum),
            CplabKernelMode::Renewal => IntersectionMode::Lattice(LatticeScale::Renewal),
            CplabKernelMode::Epsilon => IntersectionMode::Epsilon(epsilon),
        };
        boxed(CplabKernel(paths::intersection_matrix(&handle(ensemble)?.0, (s, t), mode)?), kernel)
    })
}

/// Side length of the kernel matrix; 0 for a null handle.
///
/// # Safety
/// `kernel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cplab_kernel_size(kernel: *const CplabKernel) -> usize {
    kernel.as_ref().map_or(0, |k| k.0.n())
}

/// Copies the kernel in column-major order. On entry `*len` is the capacity of `buf`; on
/// exit it is the number of entries. A short buffer returns `BUFFER_TOO_SMALL` and copies
/// nothing.
///
/// # Safety
/// `kernel` must be a live handle; `buf` must hold `*len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cplab_kernel_entries(kernel: *const CplabKernel, buf: *mut f64, len: *mut usize) -> CplabStatus {
    guard(|| fill(handle(kernel)?.0.entries().as_slice(), buf, len))
}

/// # Safety
/// `kernel` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cplab_kernel_free(kernel: *mut CplabKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Standard factor of the kernel in the inner product weighted by the ensemble's
/// localized masses, or the uniform one when `localized` is zero.
///
/// # Safety
/// Handles must be live; `factor` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cplab_spectral_factorize(
    ensemble: *const CplabEnsemble,
    kernel: *const CplabKernel,
    localized: i32,
    factor: *mut *mut CplabFactor,
) -> CplabStatus {
    guard(|| {
        let e = &handle(ensemble)?.0;
        let w = if localized != 0 { WeightedInnerProduct::localized(e)? } else { WeightedInnerProduct::uniform(e.len()) };
        boxed(CplabFactor(gmc::spectral_factorize(&handle(kernel)?.0, &w)?), factor)
    })
}

/// Number of retained modes; 0 for a null handle.
///
/// # Safety
/// `factor` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cplab_factor_rank(factor: *const CplabFactor) -> usize {
    factor.as_ref().map_or(0, |f| f.0.rank())
}

/// Copies the retained eigenvalues, largest first.
///
/// # Safety
/// As [`cplab_kernel_entries`].
#[no_mangle]
pub unsafe extern "C" fn cplab_factor_eigenvalues(factor: *const CplabFactor, buf: *mut f64, len: *mut usize) -> CplabStatus {
    guard(|| fill(&handle(factor)?.0.eigenvalues, buf, len))
}

/// # Safety
/// `factor` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cplab_factor_free(factor: *mut CplabFactor) {
    if !factor.is_null() {
        drop(Box::from_raw(factor));
    }
}

/// One Kahane GMC draw at strength `a`: the reweighted path weights. Draw `index` of
/// master seed `seed` matches the CLI's `gmc-sim`.
///
/// # Safety
/// Handles must be live; `buf` must hold `*len` doubles.
#[no_mangle]
pub unsafe extern "C" fn cplab_kahane_gmc(
    ensemble: *const CplabEnsemble,
    factor: *const CplabFactor,
    a: f64,
    seed: u64,
    index: u64,
    buf: *mut f64,
    len: *mut usize,
) -> CplabStatus {
    guard(|| {
        let (e, f) = (&handle(ensemble)?.0, &handle(factor)?.0);
        let draw = GaussianDraw::sample(a, f.rank(), &mut SeedStreams::new(seed).stream("gmc", index))?;
        fill(&gmc::kahane_gmc(e, f, &draw)?.new_weights, buf, len)
    })
}

/// `E[(M 1)^n]` at strength `a`, exactly, for `n ≤ 4`.
///
/// # Safety
/// Handles must be live; `value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn cplab_gmc_moment(
    ensemble: *const CplabEnsemble,
    kernel: *const CplabKernel,
    a: f64,
    n: usize,
    value: *mut f64,
) -> CplabStatus {
    guard(|| {
        let (e, k) = (&handle(ensemble)?.0, &handle(kernel)?.0);
        *out(value)? = gmc::gmc_moment_oracle(e.weights(), k.entries(), a, n, &|_| 1.0)?;
        Ok(CplabStatus::Ok)
    })
}
