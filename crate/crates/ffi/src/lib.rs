//! C ABI for the qpalg engine.
//!
//! Values are held behind the opaque handle [`QpalgValue`]; every operation
//! returns an error code and leaves a human-readable message retrievable via
//! [`qpalg_last_error`]. Strings returned by the library must be released
//! with [`qpalg_string_free`], handles with [`qpalg_value_free`].
//!
//! Error codes: 0 success, 1 verification failure, 2 parse error,
//! 3 precondition violation, 4 null argument or invalid UTF-8.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use qpalg::error::Error;
use qpalg::parse::{parse_expr, to_diffop, to_symbol, to_trigop, Value};
use qpalg::poly::SymbolPoly;
use qpalg::quantize::{q_affine, sigma_aff, star};
use qpalg::symbols::poisson_bracket;
use qpalg::verify::{run_all, run_suite};

pub const QPALG_OK: i32 = 0;
pub const QPALG_ERR_VERIFY: i32 = 1;
pub const QPALG_ERR_PARSE: i32 = 2;
pub const QPALG_ERR_PRECONDITION: i32 = 3;
pub const QPALG_ERR_ARGUMENT: i32 = 4;

/// Opaque handle to a parsed value (symbol, operator, trigonometric
/// polynomial, circle operator, or rational constant).
pub struct QpalgValue {
    src: String,
    value: Value,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::Parse { .. } => QPALG_ERR_PARSE,
        _ => QPALG_ERR_PRECONDITION,
    }
}

fn fail(e: Error) -> i32 {
    set_error(&e.to_string());
    code_of(&e)
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, i32> {
    if p.is_null() {
        set_error("null string argument");
        return Err(QPALG_ERR_ARGUMENT);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        QPALG_ERR_ARGUMENT
    })
}

unsafe fn read_handle<'a>(p: *const QpalgValue) -> Result<&'a QpalgValue, i32> {
    if p.is_null() {
        set_error("null value handle");
        return Err(QPALG_ERR_ARGUMENT);
    }
    Ok(&*p)
}

fn value_dim(v: &Value) -> usize {
    match v {
        Value::Num(_) => 1,
        Value::Sym(s) => s.dim(),
        Value::Op(d) => d.dim(),
        Value::Trig(_) | Value::CircleOp(_) => 1,
    }
}

fn emit_value(src: String, value: Value, out: *mut *mut QpalgValue) -> i32 {
    if out.is_null() {
        set_error("null output pointer");
        return QPALG_ERR_ARGUMENT;
    }
    unsafe {
        *out = Box::into_raw(Box::new(QpalgValue { src, value }));
    }
    QPALG_OK
}

fn emit_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(ptr::null_mut())
}

/// Message describing the most recent error on this thread. The pointer is
/// owned by the library and stays valid until the next failing call.
#[no_mangle]
pub extern "C" fn qpalg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parse an expression. `n_hint` forces a minimum dimension (pass 0 to infer
/// it from the variable indices). On success writes a fresh handle to `out`.
#[no_mangle]
pub unsafe extern "C" fn qpalg_parse(
    src: *const c_char,
    n_hint: usize,
    out: *mut *mut QpalgValue,
) -> i32 {
    let src = match read_str(src) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let hint = if n_hint == 0 { None } else { Some(n_hint) };
    match parse_expr(src, hint) {
        Ok(v) => emit_value(src.to_string(), v, out),
        Err(e) => fail(e),
    }
}

/// Release a value handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qpalg_value_free(v: *mut QpalgValue) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Canonical text form of a value. Release with `qpalg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn qpalg_value_to_string(v: *const QpalgValue) -> *mut c_char {
    match read_handle(v) {
        Ok(h) => {
            let s = match &h.value {
                Value::Num(r) => r.to_string(),
                Value::Sym(s) => s.to_string(),
                Value::Op(d) => d.to_string(),
                Value::Trig(t) => t.to_string(),
                Value::CircleOp(op) => op.to_string(),
            };
            emit_string(s)
        }
        Err(_) => ptr::null_mut(),
    }
}

/// Release a string returned by the library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn qpalg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Re-parse both operands at a shared dimension so mixed inputs such as
/// `d1` and `x2` land in the same algebra.
fn align(a: &QpalgValue, b: &QpalgValue) -> Result<(Value, Value, usize), Error> {
    let n = value_dim(&a.value).max(value_dim(&b.value));
    Ok((
        parse_expr(&a.src, Some(n))?,
        parse_expr(&b.src, Some(n))?,
        n,
    ))
}

fn is_circle(v: &Value) -> bool {
    matches!(v, Value::Trig(_) | Value::CircleOp(_))
}

unsafe fn binary_op(
    a: *const QpalgValue,
    b: *const QpalgValue,
    out: *mut *mut QpalgValue,
    f: impl FnOnce(Value, Value, usize) -> Result<(String, Value), Error>,
) -> i32 {
    let (a, b) = match (read_handle(a), read_handle(b)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(c), _) | (_, Err(c)) => return c,
    };
    match align(a, b).and_then(|(va, vb, n)| f(va, vb, n)) {
        Ok((src, v)) => emit_value(src, v, out),
        Err(e) => fail(e),
    }
}

/// Operator composition (differential or circle operators).
#[no_mangle]
pub unsafe extern "C" fn qpalg_compose(
    a: *const QpalgValue,
    b: *const QpalgValue,
    out: *mut *mut QpalgValue,
) -> i32 {
    binary_op(a, b, out, |va, vb, n| {
        let v = if is_circle(&va) || is_circle(&vb) {
            Value::CircleOp(to_trigop(va)?.compose(&to_trigop(vb)?)?)
        } else {
            Value::Op(to_diffop(va, n)?.compose(&to_diffop(vb, n)?)?)
        };
        Ok((display(&v), v))
    })
}

/// Operator commutator (differential or circle operators).
#[no_mangle]
pub unsafe extern "C" fn qpalg_bracket(
    a: *const QpalgValue,
    b: *const QpalgValue,
    out: *mut *mut QpalgValue,
) -> i32 {
    binary_op(a, b, out, |va, vb, n| {
        let v = if is_circle(&va) || is_circle(&vb) {
            Value::CircleOp(to_trigop(va)?.commutator(&to_trigop(vb)?)?)
        } else {
            Value::Op(to_diffop(va, n)?.commutator(&to_diffop(vb, n)?)?)
        };
        Ok((display(&v), v))
    })
}

/// Poisson bracket of two symbols.
#[no_mangle]
pub unsafe extern "C" fn qpalg_poisson(
    a: *const QpalgValue,
    b: *const QpalgValue,
    out: *mut *mut QpalgValue,
) -> i32 {
    binary_op(a, b, out, |va, vb, n| {
        let v = Value::Sym(poisson_bracket(&to_symbol(va, n)?, &to_symbol(vb, n)?)?);
        Ok((display(&v), v))
    })
}

fn display(v: &Value) -> String {
    match v {
        Value::Num(r) => r.to_string(),
        Value::Sym(s) => s.to_string(),
        Value::Op(d) => d.to_string(),
        Value::Trig(t) => t.to_string(),
        Value::CircleOp(op) => op.to_string(),
    }
}

unsafe fn unary_op(
    v: *const QpalgValue,
    out: *mut *mut QpalgValue,
    f: impl FnOnce(Value, usize) -> Result<Value, Error>,
) -> i32 {
    let h = match read_handle(v) {
        Ok(h) => h,
        Err(c) => return c,
    };
    let n = value_dim(&h.value);
    match f(h.value.clone(), n) {
        Ok(v) => {
            let src = display(&v);
            emit_value(src, v, out)
        }
        Err(e) => fail(e),
    }
}

/// Full affine symbol of a differential operator.
#[no_mangle]
pub unsafe extern "C" fn qpalg_symbol(
    v: *const QpalgValue,
    out: *mut *mut QpalgValue,
) -> i32 {
    unary_op(v, out, |v, n| Ok(Value::Sym(sigma_aff(&to_diffop(v, n)?))))
}

/// Normal-ordering quantization of a symbol.
#[no_mangle]
pub unsafe extern "C" fn qpalg_quantize(
    v: *const QpalgValue,
    out: *mut *mut QpalgValue,
) -> i32 {
    unary_op(v, out, |v, n| Ok(Value::Op(q_affine(&to_symbol(v, n)?))))
}

/// Apply an operator to a polynomial.
#[no_mangle]
pub unsafe extern "C" fn qpalg_apply(
    op: *const QpalgValue,
    arg: *const QpalgValue,
    out: *mut *mut QpalgValue,
) -> i32 {
    binary_op(op, arg, out, |vop, varg, n| {
        let p = to_diffop(vop, n)?.apply(&to_symbol(varg, n)?.to_poly()?)?;
        let v = Value::Sym(SymbolPoly::from_poly(&p));
        Ok((display(&v), v))
    })
}

/// Star product of two symbols truncated to `order` powers of hbar, as a
/// newline-separated coefficient list. Release with `qpalg_string_free`;
/// returns null on error (see `qpalg_last_error`).
#[no_mangle]
pub unsafe extern "C" fn qpalg_star(
    a: *const QpalgValue,
    b: *const QpalgValue,
    order: usize,
) -> *mut c_char {
    let (a, b) = match (read_handle(a), read_handle(b)) {
        (Ok(a), Ok(b)) => (a, b),
        _ => return ptr::null_mut(),
    };
    let r = align(a, b).and_then(|(va, vb, n)| {
        let series = star(&to_symbol(va, n)?, &to_symbol(vb, n)?, order)?;
        Ok(series
            .coeffs()
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join("\n"))
    });
    match r {
        Ok(s) => emit_string(s),
        Err(e) => {
            fail(e);
            ptr::null_mut()
        }
    }
}

/// Run a named verification suite, or all of them when `suite` is "all".
/// Returns 0 when every suite passes, 1 on a verification failure, 3 for an
/// unknown suite name.
#[no_mangle]
pub unsafe extern "C" fn qpalg_verify(suite: *const c_char, seed: u64) -> i32 {
    let suite = match read_str(suite) {
        Ok(s) => s,
        Err(c) => return c,
    };
    let reports = if suite == "all" {
        run_all(seed)
    } else {
        match run_suite(suite, seed) {
            Ok(r) => vec![r],
            Err(e) => return fail(e),
        }
    };
    match reports.iter().find(|r| !r.passed) {
        None => QPALG_OK,
        Some(r) => {
            set_error(&format!("suite {} failed: {}", r.name, r.detail));
            QPALG_ERR_VERIFY
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    unsafe fn parse(src: &str) -> *mut QpalgValue {
        let c = CString::new(src).unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(qpalg_parse(c.as_ptr(), 0, &mut out), QPALG_OK);
        out
    }

    unsafe fn text(v: *const QpalgValue) -> String {
        let p = qpalg_value_to_string(v);
        let s = CStr::from_ptr(p).to_str().unwrap().to_string();
        qpalg_string_free(p);
        s
    }

    #[test]
    fn round_trip_and_ops() {
        unsafe {
            let a = parse("d1^2");
            let b = parse("x1");
            assert_eq!(text(a), "d1^2");
            let mut out = ptr::null_mut();
            assert_eq!(qpalg_bracket(a, b, &mut out), QPALG_OK);
            assert_eq!(text(out), "2*d1");
            qpalg_value_free(out);

            let mut out = ptr::null_mut();
            assert_eq!(qpalg_compose(a, b, &mut out), QPALG_OK);
            assert_eq!(text(out), "x1*d1^2 + 2*d1");
            qpalg_value_free(out);

            let s = parse("x1*xi1");
            let mut q = ptr::null_mut();
            assert_eq!(qpalg_quantize(s, &mut q), QPALG_OK);
            assert_eq!(text(q), "x1*d1");
            let mut back = ptr::null_mut();
            assert_eq!(qpalg_symbol(q, &mut back), QPALG_OK);
            assert_eq!(text(back), "x1*xi1");

            let star = qpalg_star(s, s, 3);
            assert!(!star.is_null());
            let lines = CStr::from_ptr(star).to_str().unwrap().to_string();
            assert_eq!(lines.lines().count(), 3);
            assert_eq!(lines.lines().next().unwrap(), "x1^2*xi1^2");
            qpalg_string_free(star);

            for p in [a, b, s, q, back] {
                qpalg_value_free(p);
            }
        }
    }

    #[test]
    fn errors_set_code_and_message() {
        unsafe {
            let c = CString::new("x1 +").unwrap();
            let mut out = ptr::null_mut();
            assert_eq!(qpalg_parse(c.as_ptr(), 0, &mut out), QPALG_ERR_PARSE);
            let msg = CStr::from_ptr(qpalg_last_error()).to_str().unwrap();
            assert!(msg.contains("parse"), "{msg}");

            // mixing modes is a precondition violation
            let a = parse("cos(t)");
            let b = parse("x1");
            let mut out = ptr::null_mut();
            assert_eq!(qpalg_compose(a, b, &mut out), QPALG_ERR_PRECONDITION);
            qpalg_value_free(a);
            qpalg_value_free(b);

            assert_eq!(qpalg_parse(ptr::null(), 0, &mut out), QPALG_ERR_ARGUMENT);
        }
    }

    #[test]
    fn verify_through_the_abi() {
        unsafe {
            let ok = CString::new("roundtrip").unwrap();
            assert_eq!(qpalg_verify(ok.as_ptr(), 5), QPALG_OK);
            let bad = CString::new("nonsense").unwrap();
            assert_eq!(qpalg_verify(bad.as_ptr(), 5), QPALG_ERR_PRECONDITION);
        }
    }
}
