//! C ABI over the heightlab library.
//!
//! Handles are opaque and owned by the caller: every `*_new`/`hl_sample`
//! result must be released with the matching `*_free`. Functions return an
//! [`HlStatus`]; on failure the message is available through
//! [`hl_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use heightlab::cutsets::level_set;
use heightlab::height::range_of;
use heightlab::oracle::count;
use heightlab::sampler::{cftp_sample, RandomSource};
use heightlab::walls::detect_walls;
use heightlab::{BoundaryCondition, Error, HeightFunction, Model, TorusSpec};

pub const HL_MODEL_HOM: u32 = 0;
pub const HL_MODEL_LIP: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Infeasible = 3,
    BudgetExceeded = 4,
    NotSupported = 5,
    Internal = 6,
    Panic = 7,
}

pub struct HlTorus(TorusSpec);

pub struct HlBc(BoundaryCondition);

pub struct HlFunction(HeightFunction);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> HlStatus {
    match err {
        Error::BudgetExceeded { .. } | Error::CoalescenceBudgetExceeded(_) => HlStatus::BudgetExceeded,
        Error::InfeasibleBC(_) | Error::IllegalParity(_) | Error::NoAllowedValue(_) => HlStatus::Infeasible,
        Error::NotLinearLayout | Error::NoFixedValues | Error::PositiveBoundary | Error::NotLifted => {
            HlStatus::NotSupported
        }
        Error::Io(_) => HlStatus::Internal,
        _ => HlStatus::InvalidArgument,
    }
}

/// Runs `body`, converting errors and panics into a status code.
fn guard<F>(body: F) -> HlStatus
where
    F: FnOnce() -> Result<(), HlStatus>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => HlStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            HlStatus::Panic
        }
    }
}

fn fail(err: Error) -> HlStatus {
    set_error(err.to_string());
    status_of(&err)
}

fn null(what: &str) -> HlStatus {
    set_error(format!("{what} is null"));
    HlStatus::NullPointer
}

fn model_of(model: u32) -> Result<Model, HlStatus> {
    match model {
        HL_MODEL_HOM => Ok(Model::Hom),
        HL_MODEL_LIP => Ok(Model::Lip),
        other => {
            set_error(format!("unknown model {other}"));
            Err(HlStatus::InvalidArgument)
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, HlStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), HlStatus> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length plus one.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn hl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len() + 1
    })
}

/// Builds a torus from `len` side lengths.
///
/// # Safety
/// `dims` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_torus_new(dims: *const usize, len: usize, out: *mut *mut HlTorus) -> HlStatus {
    guard(|| {
        if dims.is_null() {
            return Err(null("dims"));
        }
        let sides = std::slice::from_raw_parts(dims, len);
        let torus = TorusSpec::new(sides).map_err(fail)?;
        put(out, Box::into_raw(Box::new(HlTorus(torus))), "out")
    })
}

/// # Safety
/// `torus` must be null or a handle from `hl_torus_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_torus_free(torus: *mut HlTorus) {
    if !torus.is_null() {
        drop(Box::from_raw(torus));
    }
}

/// Number of vertices; 0 for a null handle.
///
/// # Safety
/// `torus` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_torus_vertex_count(torus: *const HlTorus) -> usize {
    torus.as_ref().map_or(0, |t| t.0.vertex_count())
}

/// One-point boundary condition f(v) = 0.
///
/// # Safety
/// `torus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_bc_one_point(torus: *const HlTorus, vertex: usize, out: *mut *mut HlBc) -> HlStatus {
    guard(|| {
        let t = borrow(torus, "torus")?;
        let bc = BoundaryCondition::one_point(&t.0, vertex).map_err(fail)?;
        put(out, Box::into_raw(Box::new(HlBc(bc))), "out")
    })
}

/// Zero boundary condition.
///
/// # Safety
/// `torus` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_bc_zero(torus: *const HlTorus, out: *mut *mut HlBc) -> HlStatus {
    guard(|| {
        let t = borrow(torus, "torus")?;
        let bc = BoundaryCondition::zero(&t.0).map_err(fail)?;
        put(out, Box::into_raw(Box::new(HlBc(bc))), "out")
    })
}

/// # Safety
/// `bc` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_bc_free(bc: *mut HlBc) {
    if !bc.is_null() {
        drop(Box::from_raw(bc));
    }
}

/// Exact number of functions, by enumeration. Fails with
/// `BudgetExceeded` past the node budget or when the count exceeds 2^64 - 1.
///
/// # Safety
/// `bc` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_count(bc: *const HlBc, model: u32, out: *mut u64) -> HlStatus {
    guard(|| {
        let bc = borrow(bc, "bc")?;
        let model = model_of(model)?;
        let n = count(&bc.0, model).map_err(fail)?;
        let n: u64 = n.try_into().map_err(|_| {
            set_error("count does not fit in 64 bits".into());
            HlStatus::BudgetExceeded
        })?;
        put(out, n, "out")
    })
}

/// Exact uniform sample by coupling from the past.
///
/// # Safety
/// `bc` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_sample(bc: *const HlBc, model: u32, seed: u64, out: *mut *mut HlFunction) -> HlStatus {
    guard(|| {
        let bc = borrow(bc, "bc")?;
        let model = model_of(model)?;
        let f = cftp_sample(&bc.0, model, RandomSource::new(seed)).map_err(fail)?;
        put(out, Box::into_raw(Box::new(HlFunction(f))), "out")
    })
}

/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_function_free(f: *mut HlFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of values; 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_function_len(f: *const HlFunction) -> usize {
    f.as_ref().map_or(0, |f| f.0.values.len())
}

/// Copies the values into `buf`, which must hold `hl_function_len(f)` entries.
///
/// # Safety
/// `f` must be a live handle; `buf` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn hl_function_values(f: *const HlFunction, buf: *mut i64, len: usize) -> HlStatus {
    guard(|| {
        let f = borrow(f, "f")?;
        if buf.is_null() {
            return Err(null("buf"));
        }
        if len < f.0.values.len() {
            set_error(format!("buffer holds {len} values, need {}", f.0.values.len()));
            return Err(HlStatus::InvalidArgument);
        }
        ptr::copy_nonoverlapping(f.0.values.as_ptr(), buf, f.0.values.len());
        Ok(())
    })
}

/// Number of distinct values.
///
/// # Safety
/// `f` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_function_range(f: *const HlFunction, out: *mut usize) -> HlStatus {
    guard(|| {
        let f = borrow(f, "f")?;
        put(out, range_of(&f.0), "out")
    })
}

/// Number of edges of the level set around `x`; 0 when it is empty.
///
/// # Safety
/// `f` and `bc` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_level_set_length(
    f: *const HlFunction,
    bc: *const HlBc,
    x: usize,
    out: *mut usize,
) -> HlStatus {
    guard(|| {
        let f = borrow(f, "f")?;
        let bc = borrow(bc, "bc")?;
        f.0.torus.check_vertex(x).map_err(fail)?;
        let len = level_set(&f.0, x, &bc.0).map_err(fail)?.map_or(0, |g| g.len());
        put(out, len, "out")
    })
}

/// Number of walls on a linear torus with the one-point condition at 0.
///
/// # Safety
/// `f` and `bc` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn hl_wall_count(f: *const HlFunction, bc: *const HlBc, out: *mut usize) -> HlStatus {
    guard(|| {
        let f = borrow(f, "f")?;
        let bc = borrow(bc, "bc")?;
        put(out, detect_walls(&f.0, &bc.0).map_err(fail)?.len(), "out")
    })
}
