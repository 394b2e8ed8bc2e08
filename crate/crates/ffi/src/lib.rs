//! C ABI over the `granular` library.
//!
//! Every fallible function returns a [`GranularStatus`] and writes its result
//! through an out-pointer. On failure, [`granular_last_error`] describes what
//! went wrong on the calling thread. Handles are opaque and must be released
//! with their matching `_free` function; strings returned by the library are
//! released with [`granular_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use granular::dyadic::{angle_to_pi, cos_exact, ExactCos};
use granular::epr::{build_s0, chsh, chsh_settings, corr_curve, reality_condition_check};
use granular::hypercomplex::{build_root, quaternion_triple};
use granular::qubits::{ket_up, superpose};
use granular::{
    AngleCos, AnglePi, BitString, Dyadic, Mode, OperatorLabel, SignedPermutation, SinSign,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GranularStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    /// The exact answer exists but is not a dyadic value, or not at this level.
    NotRepresentable = 5,
    Internal = 6,
}

/// A ±1 string.
pub struct GranularBitString(BitString);

/// A signed permutation operator.
pub struct GranularOperator(SignedPermutation);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(GranularStatus, String);

impl Failure {
    fn arg(msg: impl ToString) -> Failure {
        Failure(GranularStatus::InvalidArgument, msg.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard(body: impl FnOnce() -> FfiResult<()>) -> GranularStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => GranularStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GranularStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure(GranularStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(GranularStatus::InvalidUtf8, e.to_string()))
}

fn parse<T: std::str::FromStr>(s: &str) -> FfiResult<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| Failure(GranularStatus::Parse, e.to_string()))
}

unsafe fn out<'a, T>(p: *mut T) -> FfiResult<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Failure(GranularStatus::NullPointer, "null out-pointer".into()))
}

unsafe fn handle<'a, T>(p: *const T) -> FfiResult<&'a T> {
    p.as_ref()
        .ok_or_else(|| Failure(GranularStatus::NullPointer, "null handle".into()))
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).expect("library strings have no nul").into_raw()
}

fn sin_sign(v: i32) -> FfiResult<Option<SinSign>> {
    match v {
        1 => Ok(Some(SinSign::Positive)),
        -1 => Ok(Some(SinSign::Negative)),
        0 => Ok(None),
        _ => Err(Failure::arg(format!("sine sign must be -1, 0 or 1, got {v}"))),
    }
}

/// `sin_sign` 0 means "upper half-plane" (the sign implied by the cosine).
fn angle_cos(cos: &str, sign: i32) -> FfiResult<AngleCos> {
    let c: Dyadic = parse(cos)?;
    match sin_sign(sign)? {
        Some(s) => AngleCos::new(c, s),
        None => AngleCos::upper(c),
    }
    .map_err(Failure::arg)
}

fn mode(strict: bool) -> Mode {
    if strict {
        Mode::Strict
    } else {
        Mode::Permissive
    }
}

/// Message for the last failed call on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn granular_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn granular_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn granular_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Canonical `m/2^k` form of a dyadic literal.
///
/// # Safety
/// `input` must be a nul-terminated string; `out_str` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn granular_dyadic_normalize(input: *const c_char, out_str: *mut *mut c_char) -> GranularStatus {
    guard(|| {
        let d: Dyadic = parse(text(input)?)?;
        *out(out_str)? = c_string(d.to_pow2_string());
        Ok(())
    })
}

/// Exact cosine of an angle written `m/2^k pi`; `NotRepresentable` when it is not dyadic.
///
/// # Safety
/// `angle` must be a nul-terminated string; `out_str` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn granular_cos_exact(angle: *const c_char, out_str: *mut *mut c_char) -> GranularStatus {
    guard(|| {
        let a: AnglePi = parse(text(angle)?)?;
        let slot = out(out_str)?;
        match cos_exact(&a) {
            ExactCos::Dyadic(c) => {
                *slot = c_string(c.to_pow2_string());
                Ok(())
            }
            ExactCos::NotDyadic => Err(Failure(
                GranularStatus::NotRepresentable,
                format!("cos({a}) is not dyadic"),
            )),
        }
    })
}

/// The angle with this cosine as a multiple of pi; `NotRepresentable` when incommensurable.
///
/// # Safety
/// `cos` must be a nul-terminated string; `out_str` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn granular_angle_to_pi(
    cos: *const c_char,
    sin_sign: i32,
    out_str: *mut *mut c_char,
) -> GranularStatus {
    guard(|| {
        let a = angle_cos(text(cos)?, sin_sign)?;
        let slot = out(out_str)?;
        let p = angle_to_pi(&a).map_err(|e| Failure(GranularStatus::NotRepresentable, e.to_string()))?;
        *slot = c_string(p.to_string());
        Ok(())
    })
}

/// Champernowne segment of `len` entries from bit `offset`.
///
/// # Safety
/// `out_handle` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn granular_bitstring_champernowne(
    len: usize,
    offset: u64,
    out_handle: *mut *mut GranularBitString,
) -> GranularStatus {
    guard(|| {
        let slot = out(out_handle)?;
        let s = granular::bitstring::champernowne_spins(len, offset).map_err(Failure::arg)?;
        *slot = Box::into_raw(Box::new(GranularBitString(s)));
        Ok(())
    })
}

/// A string from `len` entries of `+1`/`-1`.
///
/// # Safety
/// `spins` must point to `len` readable bytes; `out_handle` must be valid.
#[no_mangle]
pub unsafe extern "C" fn granular_bitstring_from_spins(
    spins: *const i8,
    len: usize,
    out_handle: *mut *mut GranularBitString,
) -> GranularStatus {
    guard(|| {
        let slot = out(out_handle)?;
        if spins.is_null() {
            return Err(Failure(GranularStatus::NullPointer, "null spins".into()));
        }
        let s = BitString::from_spins(std::slice::from_raw_parts(spins, len)).map_err(Failure::arg)?;
        *slot = Box::into_raw(Box::new(GranularBitString(s)));
        Ok(())
    })
}

/// # Safety
/// `h` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn granular_bitstring_len(h: *const GranularBitString) -> usize {
    h.as_ref().map_or(0, |h| h.0.len())
}

/// Entry `i` as `+1` or `-1`.
///
/// # Safety
/// `h` must be a live handle; `out_spin` valid.
#[no_mangle]
pub unsafe extern "C" fn granular_bitstring_get(
    h: *const GranularBitString,
    i: usize,
    out_spin: *mut i8,
) -> GranularStatus {
    guard(|| {
        let s = &handle(h)?.0;
        if i >= s.len() {
            return Err(Failure::arg(format!("index {i} out of range for length {}", s.len())));
        }
        *out(out_spin)? = s.get(i).value();
        Ok(())
    })
}

/// Exact correlation of two strings of equal power-of-two length, as `m/2^k`.
///
/// # Safety
/// Both handles must be live; `out_str` valid.
#[no_mangle]
pub unsafe extern "C" fn granular_bitstring_correlation(
    a: *const GranularBitString,
    b: *const GranularBitString,
    out_str: *mut *mut c_char,
) -> GranularStatus {
    guard(|| {
        let c = handle(a)?.0.correlation(&handle(b)?.0).map_err(Failure::arg)?;
        *out(out_str)? = c_string(c.to_pow2_string());
        Ok(())
    })
}

/// Applies the flip rule at dyadic fraction `f`.
///
/// # Safety
/// `h` must be live, `fraction` nul-terminated, `out_handle` valid.
#[no_mangle]
pub unsafe extern "C" fn granular_bitstring_flip_fraction(
    h: *const GranularBitString,
    fraction: *const c_char,
    out_handle: *mut *mut GranularBitString,
) -> GranularStatus {
    guard(|| {
        let f: Dyadic = parse(text(fraction)?)?;
        let s = handle(h)?.0.flip_fraction(&f).map_err(Failure::arg)?;
        *out(out_handle)? = Box::into_raw(Box::new(GranularBitString(s)));
        Ok(())
    })
}

/// Entries as `0`/`1` characters, first entry first.
///
/// # Safety
/// `h` must be live; `out_str` valid.
#[no_mangle]
pub unsafe extern "C" fn granular_bitstring_to_string(
    h: *const GranularBitString,
    out_str: *mut *mut c_char,
) -> GranularStatus {
    guard(|| {
        let s = handle(h)?.0.to_bit_string();
        *out(out_str)? = c_string(s);
        Ok(())
    })
}

/// # Safety
/// `h` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn granular_bitstring_free(h: *mut GranularBitString) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// The square root of `-Id` with index `1 <= index < 2^level`.
///
/// # Safety
/// `out_handle` must be valid.
#[no_mangle]
pub unsafe extern "C" fn granular_operator_root(
    level: u32,
    index: u64,
    out_handle: *mut *mut GranularOperator,
) -> GranularStatus {
    guard(|| {
        let slot = out(out_handle)?;
        let op = OperatorLabel::new(level, index)
            .and_then(build_root)
            .map_err(Failure::arg)?;
        *slot = Box::into_raw(Box::new(GranularOperator(op)));
        Ok(())
    })
}

/// Matrix product `a * b`.
///
/// # Safety
/// Both handles must be live; `out_handle` valid.
#[no_mangle]
pub unsafe extern "C" fn granular_operator_product(
    a: *const GranularOperator,
    b: *const GranularOperator,
    out_handle: *mut *mut GranularOperator,
) -> GranularStatus {
    guard(|| {
        let p = handle(a)?.0.product(&handle(b)?.0).map_err(Failure::arg)?;
        *out(out_handle)? = Box::into_raw(Box::new(GranularOperator(p)));
        Ok(())
    })
}

/// The operator applied to a string.
///
/// # Safety
/// Both handles must be live; `out_handle` valid.
#[no_mangle]
pub unsafe extern "C" fn granular_operator_apply(
    op: *const GranularOperator,
    s: *const GranularBitString,
    out_handle: *mut *mut GranularBitString,
) -> GranularStatus {
    guard(|| {
        let r = handle(op)?.0.apply(&handle(s)?.0).map_err(Failure::arg)?;
        *out(out_handle)? = Box::into_raw(Box::new(GranularBitString(r)));
        Ok(())
    })
}

/// 1 for the identity, -1 for minus the identity, 0 otherwise.
///
/// # Safety
/// `op` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn granular_operator_identity_sign(op: *const GranularOperator) -> i32 {
    match op.as_ref() {
        Some(o) if o.0.is_identity() => 1,
        Some(o) if o.0.is_minus_identity() => -1,
        _ => 0,
    }
}

/// # Safety
/// `op` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn granular_operator_free(op: *mut GranularOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// `(cos θ E_a + sin θ E_b)(1s)` for the triple containing `E_triple` at `level`.
///
/// # Safety
/// `cos` must be nul-terminated; `out_handle` valid.
#[no_mangle]
pub unsafe extern "C" fn granular_superpose(
    level: u32,
    triple: u64,
    cos: *const c_char,
    sin_sign: i32,
    strict: bool,
    out_handle: *mut *mut GranularBitString,
) -> GranularStatus {
    guard(|| {
        let theta = angle_cos(text(cos)?, sin_sign)?;
        let slot = out(out_handle)?;
        let t = OperatorLabel::new(level, triple)
            .and_then(quaternion_triple)
            .map_err(Failure::arg)?;
        let s = superpose(&t, &theta, &ket_up(level), mode(strict)).map_err(|e| {
            Failure(GranularStatus::NotRepresentable, e.to_string())
        })?;
        *slot = Box::into_raw(Box::new(GranularBitString(s.string)));
        Ok(())
    })
}

/// Measured EPR correlation `C(θ)` over the whole level-`level` grid, as `m/2^k`.
///
/// # Safety
/// `cos` must be nul-terminated; `out_str` valid.
#[no_mangle]
pub unsafe extern "C" fn granular_epr_correlation(
    level: u32,
    offset: u64,
    cos: *const c_char,
    strict: bool,
    out_str: *mut *mut c_char,
) -> GranularStatus {
    guard(|| {
        let theta = angle_cos(text(cos)?, 0)?;
        let slot = out(out_str)?;
        let s0 = build_s0(level, offset).map_err(Failure::arg)?;
        let pts = corr_curve(&s0, &[theta], mode(strict))
            .map_err(|e| Failure(GranularStatus::NotRepresentable, e.to_string()))?;
        *slot = c_string(pts[0].measured.to_pow2_string());
        Ok(())
    })
}

/// Share of grid points where both counterfactual outcomes exist, as `m/2^k`.
///
/// # Safety
/// `cos` must be nul-terminated; `out_str` valid.
#[no_mangle]
pub unsafe extern "C" fn granular_epr_defined_fraction(
    level: u32,
    offset: u64,
    cos: *const c_char,
    out_str: *mut *mut c_char,
) -> GranularStatus {
    guard(|| {
        let theta = angle_cos(text(cos)?, 0)?;
        let slot = out(out_str)?;
        let r = reality_condition_check(&theta, level, offset, Mode::Strict)
            .map_err(|e| Failure(GranularStatus::NotRepresentable, e.to_string()))?;
        *slot = c_string(r.defined_fraction.to_pow2_string());
        Ok(())
    })
}

/// CHSH report for the settings `(θ, 3θ, θ, θ)` as a JSON document.
///
/// # Safety
/// `cos` must be nul-terminated; `out_json` valid.
#[no_mangle]
pub unsafe extern "C" fn granular_epr_chsh(
    level: u32,
    offset: u64,
    cos: *const c_char,
    strict: bool,
    out_json: *mut *mut c_char,
) -> GranularStatus {
    guard(|| {
        let theta = angle_cos(text(cos)?, 0)?;
        let slot = out(out_json)?;
        let r = chsh(&chsh_settings(&theta), level, offset, mode(strict))
            .map_err(|e| Failure(GranularStatus::NotRepresentable, e.to_string()))?;
        let doc = serde_json::to_string(&r).map_err(|e| Failure(GranularStatus::Internal, e.to_string()))?;
        *slot = c_string(doc);
        Ok(())
    })
}
