//! C ABI for lassokit.
//!
//! Objects cross the boundary as opaque handles created from JSON and
//! released with the matching `*_free`. Every fallible call returns an
//! [`LkStatus`]; the message for the last failure on the calling thread is
//! available from [`lk_last_error`]. Strings returned by the library are
//! owned by the caller and released with [`lk_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lassokit::cli::{bounds_within, schema_for, CliError, Config, Exit};
use lassokit::contraction::{contract, pushforward_images, pushforward_span, Contraction};
use lassokit::cset::{Hom, Instance};
use lassokit::decomposition::{decomposition_colimit, pullback_decomposition, StructuredDecomposition};
use lassokit::io::{
    contraction_to_json, decomposition_to_json, hom_to_json, instance_to_json, parse_decomposition,
    parse_hom, parse_instance, IoError,
};
use lassokit::lasso::{check_lasso_axioms, check_strong, resolve_name};
use lassokit::universe::Bounds;

/// Result of every fallible call. Codes 0 to 6 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LkStatus {
    Ok = 0,
    CheckFailed = 1,
    Parse = 2,
    Precondition = 3,
    SchemaMismatch = 4,
    Misaligned = 5,
    BoundExceeded = 6,
    /// A null pointer or a string that is not UTF-8.
    InvalidArgument = 7,
    Panic = 8,
}

impl From<Exit> for LkStatus {
    fn from(e: Exit) -> Self {
        match e {
            Exit::Ok => LkStatus::Ok,
            Exit::CheckFailed => LkStatus::CheckFailed,
            Exit::Parse => LkStatus::Parse,
            Exit::Precondition => LkStatus::Precondition,
            Exit::SchemaMismatch => LkStatus::SchemaMismatch,
            Exit::Misaligned => LkStatus::Misaligned,
            Exit::BoundExceeded => LkStatus::BoundExceeded,
        }
    }
}

/// How `lk_pushforward` builds the contracted decomposition.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LkMethod {
    Images = 0,
    Span = 1,
}

pub struct LkInstance(Instance);
pub struct LkHom(Hom);
pub struct LkDecomposition(StructuredDecomposition);
pub struct LkContraction(Contraction);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Invalid(String),
    Cli(CliError),
}

impl<E: Into<CliError>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Cli(e.into())
    }
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `body`, recording any failure, and converts the outcome to a status.
fn guard(body: impl FnOnce() -> Result<LkStatus, Failure>) -> LkStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(status)) => status,
        Ok(Err(Failure::Invalid(msg))) => {
            set_error(msg);
            LkStatus::InvalidArgument
        }
        Ok(Err(Failure::Cli(e))) => {
            set_error(e.to_string());
            e.exit().into()
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal panic".into());
            set_error(msg);
            LkStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Invalid(format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Invalid(format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::Invalid(format!("{what} is null")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<LkStatus, Failure> {
    if out.is_null() {
        return Err(Failure::Invalid("output pointer is null".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(LkStatus::Ok)
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<LkStatus, Failure> {
    if out.is_null() {
        return Err(Failure::Invalid("output pointer is null".into()));
    }
    *out = CString::new(s).expect("JSON has no nul bytes").into_raw();
    Ok(LkStatus::Ok)
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn lk_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn lk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lk_instance_from_json(json: *const c_char, out: *mut *mut LkInstance) -> LkStatus {
    guard(|| put(out, LkInstance(parse_instance(text(json, "json")?)?)))
}

/// # Safety
/// `x` must be a live instance handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lk_instance_to_json(x: *const LkInstance, out: *mut *mut c_char) -> LkStatus {
    guard(|| put_string(out, instance_to_json(&handle(x, "instance")?.0)))
}

/// # Safety
/// `x` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lk_instance_free(x: *mut LkInstance) {
    free(x)
}

/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lk_hom_from_json(json: *const c_char, out: *mut *mut LkHom) -> LkStatus {
    guard(|| put(out, LkHom(parse_hom(text(json, "json")?)?)))
}

/// # Safety
/// `h` must be a live hom handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lk_hom_to_json(h: *const LkHom, out: *mut *mut c_char) -> LkStatus {
    guard(|| put_string(out, hom_to_json(&handle(h, "hom")?.0)))
}

/// # Safety
/// `h` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lk_hom_free(h: *mut LkHom) {
    free(h)
}

/// # Safety
/// `json` must be a nul-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lk_decomposition_from_json(
    json: *const c_char,
    out: *mut *mut LkDecomposition,
) -> LkStatus {
    guard(|| put(out, LkDecomposition(parse_decomposition(text(json, "json")?)?)))
}

/// # Safety
/// `d` must be a live decomposition handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lk_decomposition_to_json(d: *const LkDecomposition, out: *mut *mut c_char) -> LkStatus {
    guard(|| put_string(out, decomposition_to_json(&handle(d, "decomposition")?.0)))
}

/// # Safety
/// `d` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lk_decomposition_free(d: *mut LkDecomposition) {
    free(d)
}

/// Contracts the base instance along the mono `sub` with the named lasso.
///
/// # Safety
/// `sub` must be a live hom handle, `lasso` a nul-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lk_contract(
    sub: *const LkHom,
    lasso: *const c_char,
    out: *mut *mut LkContraction,
) -> LkStatus {
    guard(|| {
        let f = &handle(sub, "sub")?.0;
        let lasso = resolve_name(text(lasso, "lasso")?, f.cod().schema())?.into_lasso()?;
        put(out, LkContraction(contract(f, &lasso)?))
    })
}

/// # Safety
/// `c` must be a live contraction handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lk_contraction_result(c: *const LkContraction, out: *mut *mut LkInstance) -> LkStatus {
    guard(|| put(out, LkInstance(handle(c, "contraction")?.0.result.clone())))
}

/// # Safety
/// `c` must be a live contraction handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lk_contraction_to_json(c: *const LkContraction, out: *mut *mut c_char) -> LkStatus {
    guard(|| put_string(out, contraction_to_json(&handle(c, "contraction")?.0)))
}

/// # Safety
/// `c` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lk_contraction_free(c: *mut LkContraction) {
    free(c)
}

/// Pushes a decomposition of the codomain of `sub` forward along the
/// contraction of `sub`, keeping the shape.
///
/// # Safety
/// `d` and `sub` must be live handles, `lasso` a nul-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lk_pushforward(
    d: *const LkDecomposition,
    sub: *const LkHom,
    lasso: *const c_char,
    method: LkMethod,
    out: *mut *mut LkDecomposition,
) -> LkStatus {
    guard(|| {
        let d = &handle(d, "decomposition")?.0;
        let f = &handle(sub, "sub")?.0;
        if f.dom().schema() != &d.schema {
            return Err(IoError::SchemaMismatch.into());
        }
        let lasso = resolve_name(text(lasso, "lasso")?, &d.schema)?.into_lasso()?;
        let r = match method {
            LkMethod::Images => pushforward_images(d, f, &lasso)?,
            LkMethod::Span => pushforward_span(d, f, &lasso)?,
        };
        put(out, LkDecomposition(r.output))
    })
}

/// Pulls a decomposition of the codomain of `hom` back to its domain.
///
/// # Safety
/// `d` and `hom` must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lk_pullback(
    d: *const LkDecomposition,
    hom: *const LkHom,
    out: *mut *mut LkDecomposition,
) -> LkStatus {
    guard(|| {
        let d = &handle(d, "decomposition")?.0;
        let h = &handle(hom, "hom")?.0;
        if h.dom().schema() != &d.schema {
            return Err(IoError::SchemaMismatch.into());
        }
        put(out, LkDecomposition(pullback_decomposition(d, h)?.decomposition))
    })
}

/// The instance a decomposition glues to.
///
/// # Safety
/// `d` must be a live decomposition handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lk_colimit(d: *const LkDecomposition, out: *mut *mut LkInstance) -> LkStatus {
    guard(|| put(out, LkInstance(decomposition_colimit(&handle(d, "decomposition")?.0).apex)))
}

/// Checks the lasso axioms (and strength, if `strong`) over every instance
/// within the bounds. Writes the JSON report to `report` and returns
/// `CheckFailed` when an axiom fails. `schema` may be null to infer it from
/// the lasso name. Bounds above the carrier ceiling are refused.
///
/// # Safety
/// `lasso` must be a nul-terminated string, `schema` null or one, and
/// `report` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn lk_check(
    lasso: *const c_char,
    schema: *const c_char,
    max_vertices: usize,
    max_edges: usize,
    strong: bool,
    report: *mut *mut c_char,
) -> LkStatus {
    guard(|| {
        let name = text(lasso, "lasso")?;
        let explicit = if schema.is_null() { None } else { Some(text(schema, "schema")?) };
        let schema = schema_for(explicit, Some(name))?;
        let bounds = Bounds::graph_like(&schema, max_vertices, max_edges);
        bounds_within(&bounds, Config::default().ceiling()?)?;
        let named = resolve_name(name, &schema)?;
        let r = if strong {
            check_strong(named.functor(), &bounds)?
        } else {
            check_lasso_axioms(named.functor(), &bounds)?
        };
        let json = serde_json::to_string_pretty(&r).expect("reports always serialize");
        put_string(report, json)?;
        Ok(if r.passed() { LkStatus::Ok } else { LkStatus::CheckFailed })
    })
}
