//! C ABI over `basislift`.
//!
//! Every object is an opaque handle created by a `bl_*_new`-style function and
//! released by the matching `bl_*_free`. Functions return a [`BlStatus`]; on
//! failure a message is available from [`bl_last_error_message`] on the same
//! thread. Integers cross the boundary as `int64_t`; values that do not fit
//! report [`BlStatus::Overflow`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use basislift::cli::LiftDocument;
use basislift::finite::{get_basis_finite, LiftResult};
use basislift::oracle::{verify_lift, LiftedBasis};
use basislift::stream::{lift_stream_finite, EliminationState, StreamLiftReport};
use basislift::{Error, IntMatrix, Modulus, RowStream};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotPrime = 3,
    NotAPrimePower = 4,
    ShapeMismatch = 5,
    NotABasisModP = 6,
    StabilizationTimeout = 7,
    StreamError = 8,
    Overflow = 9,
    ParseError = 10,
    Panic = 11,
    Internal = 12,
}

/// How a finite matrix continues past its last row when streamed.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlExtension {
    /// The stream ends after the matrix rows.
    ZeroPadded = 0,
    /// The matrix rows are followed by unit rows `e_n, e_{n+1}, ...`.
    Identity = 1,
}

/// Outcome of checking a lift.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BlVerifyReport {
    pub all_ok: bool,
    pub units_ok: bool,
    pub unimodular_ok: bool,
    pub basis_mod_q_ok: bool,
    /// Number of rows whose congruence check failed.
    pub congruence_failures: usize,
}

pub struct BlModulus(Modulus);

pub struct BlMatrix(IntMatrix);

pub struct BlStream(EliminationState);

enum LiftInner {
    Finite { input: IntMatrix, result: LiftResult },
    Stream(StreamLiftReport),
}

pub struct BlLift(LiftInner);

impl BlLift {
    fn basis(&self) -> &dyn LiftedBasis {
        match &self.0 {
            LiftInner::Finite { result, .. } => result,
            LiftInner::Stream(r) => r,
        }
    }

    fn input(&self) -> &IntMatrix {
        match &self.0 {
            LiftInner::Finite { input, .. } => input,
            LiftInner::Stream(r) => &r.input,
        }
    }

    fn pivots(&self) -> &[usize] {
        match &self.0 {
            LiftInner::Finite { result, .. } => result.pivots.columns(),
            LiftInner::Stream(r) => r.pivots.columns(),
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> BlStatus {
    match err {
        Error::NotPrime { .. } | Error::ZeroExponent => BlStatus::NotPrime,
        Error::NotAPrimePower { .. } => BlStatus::NotAPrimePower,
        Error::DimensionMismatch { .. }
        | Error::NotSquare { .. }
        | Error::ShapeMismatch(_)
        | Error::TooManyRows { .. } => BlStatus::ShapeMismatch,
        Error::NotABasisModP { .. } => BlStatus::NotABasisModP,
        Error::StabilizationTimeout(_) => BlStatus::StabilizationTimeout,
        Error::StreamExhausted { .. } | Error::StreamTruncated { .. } | Error::Io(_) => BlStatus::StreamError,
        Error::Parse { .. } => BlStatus::ParseError,
        Error::IndexOutOfRange { .. } | Error::InvalidOrder(_) | Error::TooManyAtoms { .. } => BlStatus::InvalidArgument,
        _ => BlStatus::Internal,
    }
}

fn fail(status: BlStatus, message: impl Into<String>) -> BlStatus {
    set_error(message.into());
    status
}

/// Runs `f`, converting panics and errors into a status.
fn guard(f: impl FnOnce() -> Result<(), BlStatus>) -> BlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BlStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(BlStatus::Panic, "internal panic"),
    }
}

fn lib_err(err: Error) -> BlStatus {
    fail(status_of(&err), err.to_string())
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, BlStatus> {
    p.as_ref().ok_or_else(|| fail(BlStatus::NullPointer, "null handle"))
}

unsafe fn deref_mut<'a, T>(p: *mut T) -> Result<&'a mut T, BlStatus> {
    p.as_mut().ok_or_else(|| fail(BlStatus::NullPointer, "null handle"))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), BlStatus> {
    if out.is_null() {
        return Err(fail(BlStatus::NullPointer, "null output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), BlStatus> {
    if out.is_null() {
        return Err(fail(BlStatus::NullPointer, "null output pointer"));
    }
    *out = value;
    Ok(())
}

fn to_i64(x: &BigInt) -> Result<i64, BlStatus> {
    x.to_i64().ok_or_else(|| fail(BlStatus::Overflow, format!("{x} does not fit in int64_t")))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

unsafe fn drop_handle<T>(p: *mut T) {
    if !p.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(p))));
    }
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be NULL or a pointer returned by a `bl_*_to_*` function.
#[no_mangle]
pub unsafe extern "C" fn bl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Modulus `p^nu` with `p` checked for primality.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_modulus_new(p: u64, nu: u32, out: *mut *mut BlModulus) -> BlStatus {
    guard(|| put(out, BlModulus(Modulus::new(p, nu).map_err(lib_err)?)))
}

/// Modulus from a prime power `q`; composite non-prime-powers are rejected.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_modulus_from_prime_power(q: u64, out: *mut *mut BlModulus) -> BlStatus {
    guard(|| put(out, BlModulus(Modulus::from_prime_power(q).map_err(lib_err)?)))
}

/// # Safety
/// `m` must be a valid handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_modulus_value(m: *const BlModulus, out: *mut i64) -> BlStatus {
    guard(|| write(out, to_i64(deref(m)?.0.value())?))
}

/// # Safety
/// `m` must be NULL or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_modulus_free(m: *mut BlModulus) {
    drop_handle(m)
}

/// Matrix from `rows * cols` row-major entries.
///
/// # Safety
/// `entries` must point to `rows * cols` values (may be NULL if that is 0);
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_matrix_new(rows: usize, cols: usize, entries: *const i64, out: *mut *mut BlMatrix) -> BlStatus {
    guard(|| {
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| fail(BlStatus::InvalidArgument, "matrix size overflows"))?;
        let values: Vec<BigInt> = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(deref(entries)?, len).iter().map(|&x| BigInt::from(x)).collect()
        };
        put(out, BlMatrix(IntMatrix::new(rows, cols, values).map_err(lib_err)?))
    })
}

/// Matrix from the text format: a `rows cols` header then one row per line.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_matrix_parse(text: *const c_char, out: *mut *mut BlMatrix) -> BlStatus {
    guard(|| {
        let text = CStr::from_ptr(deref(text)?)
            .to_str()
            .map_err(|_| fail(BlStatus::ParseError, "input is not UTF-8"))?;
        put(out, BlMatrix(text.parse().map_err(lib_err)?))
    })
}

/// # Safety
/// `m` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn bl_matrix_rows(m: *const BlMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.rows())
}

/// # Safety
/// `m` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn bl_matrix_cols(m: *const BlMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.cols())
}

/// # Safety
/// `m` must be a valid handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_matrix_get(m: *const BlMatrix, row: usize, col: usize, out: *mut i64) -> BlStatus {
    guard(|| {
        let m = &deref(m)?.0;
        let x = m
            .get(row, col)
            .ok_or_else(|| fail(BlStatus::InvalidArgument, format!("entry ({row}, {col}) out of range")))?;
        write(out, to_i64(x)?)
    })
}

/// Matrix in the text format. Free with [`bl_string_free`].
///
/// # Safety
/// `m` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn bl_matrix_to_string(m: *const BlMatrix) -> *mut c_char {
    catch_unwind(AssertUnwindSafe(|| m.as_ref().map_or(ptr::null_mut(), |m| to_c_string(m.0.to_string()))))
        .unwrap_or(ptr::null_mut())
}

/// # Safety
/// `m` must be NULL or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_matrix_free(m: *mut BlMatrix) {
    drop_handle(m)
}

/// Lifts the rows of `a` with the finite engine.
///
/// # Safety
/// `a` and `modulus` must be valid handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_lift_finite(a: *const BlMatrix, modulus: *const BlModulus, out: *mut *mut BlLift) -> BlStatus {
    guard(|| {
        let a = &deref(a)?.0;
        let result = get_basis_finite(a, &deref(modulus)?.0).map_err(lib_err)?;
        put(out, BlLift(LiftInner::Finite { input: a.clone(), result }))
    })
}

/// Lifts the rows of `a` with the streaming engine on the zero-padded stream.
///
/// # Safety
/// `a` and `modulus` must be valid handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_lift_stream(a: *const BlMatrix, modulus: *const BlModulus, out: *mut *mut BlLift) -> BlStatus {
    guard(|| {
        let report = lift_stream_finite(&deref(a)?.0, &deref(modulus)?.0).map_err(lib_err)?;
        put(out, BlLift(LiftInner::Stream(report)))
    })
}

/// Number of lifted rows.
///
/// # Safety
/// `lift` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn bl_lift_rows(lift: *const BlLift) -> usize {
    lift.as_ref().map_or(0, |l| l.basis().lifted().rows())
}

/// Copy of the lifted basis. Free with [`bl_matrix_free`].
///
/// # Safety
/// `lift` must be a valid handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_lift_basis(lift: *const BlLift, out: *mut *mut BlMatrix) -> BlStatus {
    guard(|| put(out, BlMatrix(deref(lift)?.basis().lifted().clone())))
}

/// Unit multiplier of row `row`.
///
/// # Safety
/// `lift` must be a valid handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_lift_unit(lift: *const BlLift, row: usize, out: *mut i64) -> BlStatus {
    guard(|| {
        let units = deref(lift)?.basis().units();
        let u = units
            .get(row)
            .ok_or_else(|| fail(BlStatus::InvalidArgument, format!("row {row} out of range")))?;
        write(out, to_i64(u)?)
    })
}

/// Pivot column of row `row`.
///
/// # Safety
/// `lift` must be a valid handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_lift_pivot(lift: *const BlLift, row: usize, out: *mut usize) -> BlStatus {
    guard(|| {
        let col = *deref(lift)?
            .pivots()
            .get(row)
            .ok_or_else(|| fail(BlStatus::InvalidArgument, format!("row {row} out of range")))?;
        write(out, col)
    })
}

/// Checks the lift against its input with exact arithmetic.
///
/// # Safety
/// `lift` must be a valid handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_lift_verify(lift: *const BlLift, out: *mut BlVerifyReport) -> BlStatus {
    guard(|| {
        let lift = deref(lift)?;
        let v = verify_lift(lift.input(), &BasisRef(lift.basis())).map_err(lib_err)?;
        write(
            out,
            BlVerifyReport {
                all_ok: v.all_ok(),
                units_ok: v.units_ok,
                unimodular_ok: v.unimodular_ok,
                basis_mod_q_ok: v.basis_mod_q_ok,
                congruence_failures: v.congruence_ok.iter().filter(|&&b| !b).count(),
            },
        )
    })
}

/// The lift as a structured JSON document. Free with [`bl_string_free`].
///
/// # Safety
/// `lift` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn bl_lift_to_json(lift: *const BlLift) -> *mut c_char {
    let render = || {
        let lift = lift.as_ref()?;
        let doc = match &lift.0 {
            LiftInner::Finite { input, result } => LiftDocument::new("finite", input, result),
            LiftInner::Stream(r) => LiftDocument::new("stream", &r.input, r),
        };
        Some(to_c_string(doc.to_json()))
    };
    catch_unwind(AssertUnwindSafe(render)).ok().flatten().unwrap_or(ptr::null_mut())
}

/// # Safety
/// `lift` must be NULL or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_lift_free(lift: *mut BlLift) {
    drop_handle(lift)
}

struct BasisRef<'a>(&'a dyn LiftedBasis);

impl LiftedBasis for BasisRef<'_> {
    fn lifted(&self) -> &IntMatrix {
        self.0.lifted()
    }
    fn units(&self) -> &[BigInt] {
        self.0.units()
    }
    fn modulus(&self) -> &Modulus {
        self.0.modulus()
    }
}

/// Streaming elimination over the rows of `a`, continued per `extension`.
///
/// # Safety
/// `a` and `modulus` must be valid handles; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_stream_new(
    a: *const BlMatrix,
    modulus: *const BlModulus,
    extension: BlExtension,
    out: *mut *mut BlStream,
) -> BlStatus {
    guard(|| {
        let a = &deref(a)?.0;
        let source = match extension {
            BlExtension::ZeroPadded => RowStream::from_matrix(a),
            BlExtension::Identity => RowStream::identity_extended(a),
        };
        put(out, BlStream(EliminationState::new(source, deref(modulus)?.0.clone()).map_err(lib_err)?))
    })
}

/// Executes one elimination loop.
///
/// # Safety
/// `s` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn bl_stream_step(s: *mut BlStream) -> BlStatus {
    guard(|| deref_mut(s)?.0.step_loop().map_err(lib_err))
}

/// # Safety
/// `s` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn bl_stream_loops(s: *const BlStream) -> usize {
    s.as_ref().map_or(0, |s| s.0.loops())
}

/// Length of the longest prefix of rows reported stable.
///
/// # Safety
/// `s` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn bl_stream_stable_prefix(s: *const BlStream) -> usize {
    s.as_ref().map_or(0, |s| s.0.stable_prefix())
}

/// Runs until the first `rows` rows are stable or `max_loops` loops have run.
///
/// # Safety
/// `s` must be a valid handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_stream_run_until(s: *mut BlStream, rows: usize, max_loops: usize, out: *mut *mut BlLift) -> BlStatus {
    guard(|| {
        let report = deref_mut(s)?.0.run_until(rows, max_loops).map_err(lib_err)?;
        put(out, BlLift(LiftInner::Stream(report)))
    })
}

/// # Safety
/// `s` must be NULL or a handle from this library, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bl_stream_free(s: *mut BlStream) {
    drop_handle(s)
}
