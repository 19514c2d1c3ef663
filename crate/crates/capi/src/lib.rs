//! C bindings for the fly-automaton library.
//!
//! The surface follows the usual conventions for C APIs over Rust: opaque
//! handles created and released by paired functions, status codes instead of
//! exceptions, strings returned as NUL-terminated buffers the caller frees
//! with [`fly_string_free`], and a thread-local last-error message queried
//! with [`fly_last_error`]. Every entry point catches panics and reports
//! them as [`FlyStatus::Panic`] rather than unwinding across the boundary.
//!
//! The build script generates `include/flyaut.h` with cbindgen.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use flyaut::mso::{compile, parse_formula, CompiledAutomaton};
use flyaut::solve::{
    check_sat, count_assignments, min_card, multispectrum, spectrum, Tropical,
};
use flyaut::term::{parse_term, Term};

// ============================================================================
// Status codes and handles
// ============================================================================

/// Result of every fallible call. Anything but `Ok` leaves a message for
/// [`fly_last_error`].
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FlyStatus {
    /// The call succeeded.
    Ok = 0,
    /// A pointer was NULL, a string was not UTF-8, or the arguments don't
    /// fit together (wrong annotation width, missing free variable, ...).
    InvalidArgument = 1,
    /// The term or formula text didn't parse.
    ParseError = 2,
    /// The formula parsed but couldn't be compiled into an automaton.
    CompileError = 3,
    /// Evaluating or running over the term failed.
    RunError = 4,
    /// An internal panic was caught at the boundary.
    Panic = 5,
}

/// An owned clique-width term (opaque).
pub struct FlyTerm {
    inner: Term,
}

/// A compiled automaton together with its free-variable context (opaque).
pub struct FlyAutomaton {
    inner: CompiledAutomaton,
}

// ============================================================================
// Error plumbing
// ============================================================================

thread_local! {
    static LAST_ERROR: RefCell<CString> =
        RefCell::new(CString::new("").expect("empty string has no NUL"));
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(clean).expect("NUL bytes were replaced");
    });
}

fn fail(status: FlyStatus, msg: &str) -> FlyStatus {
    set_error(msg);
    status
}

/// Runs a body, converting panics into [`FlyStatus::Panic`].
fn guarded<F: FnOnce() -> FlyStatus>(body: F) -> FlyStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(FlyStatus::Panic, "internal panic caught at the C boundary"),
    }
}

/// Message for the most recent failure on this thread, as a NUL-terminated
/// string. The pointer stays valid until the next failing call on the same
/// thread; copy it if you need it longer. Never NULL.
#[no_mangle]
pub extern "C" fn fly_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// The library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fly_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

// ============================================================================
// Argument helpers
// ============================================================================

/// Reads a borrowed C string argument.
///
/// # Safety
/// `p` must be NULL or point to a NUL-terminated buffer that outlives the
/// call.
unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, FlyStatus> {
    if p.is_null() {
        return Err(fail(
            FlyStatus::InvalidArgument,
            &format!("{what} is NULL"),
        ));
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| {
        fail(
            FlyStatus::InvalidArgument,
            &format!("{what} is not valid UTF-8"),
        )
    })
}

/// Borrows a handle argument.
///
/// # Safety
/// `p` must be NULL or a live handle produced by this library.
unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, FlyStatus> {
    if p.is_null() {
        Err(fail(
            FlyStatus::InvalidArgument,
            &format!("{what} is NULL"),
        ))
    } else {
        Ok(unsafe { &*p })
    }
}

/// Hands a string to the caller.
///
/// # Safety
/// `out` must be a valid location for one pointer.
unsafe fn give_string(s: String, out: *mut *mut c_char) -> FlyStatus {
    if out.is_null() {
        return fail(FlyStatus::InvalidArgument, "out is NULL");
    }
    let clean = s.replace('\0', " ");
    let c = CString::new(clean).expect("NUL bytes were replaced");
    unsafe { *out = c.into_raw() };
    FlyStatus::Ok
}

/// The context width the automaton expects versus what the term carries:
/// plain terms are always fine, annotated ones must match exactly.
fn width_check(a: &FlyAutomaton, t: &Term) -> Result<bool, FlyStatus> {
    let width = t
        .annotation_width()
        .map_err(|e| fail(FlyStatus::RunError, &e.to_string()))?;
    let vars = a.inner.vars.len();
    if width != 0 && width != vars {
        return Err(fail(
            FlyStatus::InvalidArgument,
            &format!("term carries {width} annotation bits but the context has {vars} variables"),
        ));
    }
    Ok(width == 0)
}

fn needs_vars(a: &FlyAutomaton, what: &str) -> Result<(), FlyStatus> {
    if a.inner.vars.is_empty() {
        Err(fail(
            FlyStatus::InvalidArgument,
            &format!("{what} needs at least one free variable in the context"),
        ))
    } else {
        Ok(())
    }
}

// ============================================================================
// Terms
// ============================================================================

/// Parses a clique-width term (the same syntax `flyaut gen` prints, e.g.
/// `add(1,2,oplus(port(1),port(2)))`, with optional `port(1,[01])`
/// annotations).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid location for one
/// pointer. On `Ok`, `*out` owns a term to release with [`fly_term_free`];
/// on any other status `*out` is untouched.
#[no_mangle]
pub unsafe extern "C" fn fly_term_parse(
    text: *const c_char,
    out: *mut *mut FlyTerm,
) -> FlyStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FlyStatus::InvalidArgument, "out is NULL");
        }
        let text = match unsafe { read_str(text, "text") } {
            Ok(s) => s,
            Err(status) => return status,
        };
        match parse_term(text) {
            Ok(t) => {
                unsafe { *out = Box::into_raw(Box::new(FlyTerm { inner: t })) };
                FlyStatus::Ok
            }
            Err(e) => fail(FlyStatus::ParseError, &e.to_string()),
        }
    })
}

/// Releases a term handle. NULL is a no-op.
///
/// # Safety
/// `t` must be NULL or a handle from [`fly_term_parse`] that is not used
/// again afterwards.
#[no_mangle]
pub unsafe extern "C" fn fly_term_free(t: *mut FlyTerm) {
    if !t.is_null() {
        drop(unsafe { Box::from_raw(t) });
    }
}

/// Renders a term back to its textual syntax.
///
/// # Safety
/// `t` must be a live term handle; `out` receives a string to release with
/// [`fly_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fly_term_render(
    t: *const FlyTerm,
    out: *mut *mut c_char,
) -> FlyStatus {
    guarded(|| {
        let t = match unsafe { borrow(t, "term") } {
            Ok(t) => t,
            Err(status) => return status,
        };
        unsafe { give_string(t.inner.to_string(), out) }
    })
}

/// Evaluates a term to its port-labeled graph, in the text format
/// `n m` header, `vertex port` lines, then `endpoint endpoint` lines.
///
/// # Safety
/// `t` must be a live term handle; `out` receives a string to release with
/// [`fly_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fly_term_eval(
    t: *const FlyTerm,
    out: *mut *mut c_char,
) -> FlyStatus {
    guarded(|| {
        let t = match unsafe { borrow(t, "term") } {
            Ok(t) => t,
            Err(status) => return status,
        };
        unsafe { give_string(t.inner.eval().to_text(), out) }
    })
}

// ============================================================================
// Automata
// ============================================================================

/// Compiles a formula into an automaton.
///
/// `vars` fixes the free-variable context order (variables separated by
/// spaces or commas); pass NULL or an empty string to use the formula's
/// free variables in first-occurrence order. Every free variable must be in
/// the context.
///
/// # Safety
/// `formula` must be a NUL-terminated string, `vars` NULL or the same, and
/// `out` a valid location for one pointer. On `Ok`, `*out` owns an
/// automaton to release with [`fly_automaton_free`].
#[no_mangle]
pub unsafe extern "C" fn fly_formula_compile(
    formula: *const c_char,
    vars: *const c_char,
    out: *mut *mut FlyAutomaton,
) -> FlyStatus {
    guarded(|| {
        if out.is_null() {
            return fail(FlyStatus::InvalidArgument, "out is NULL");
        }
        let text = match unsafe { read_str(formula, "formula") } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let phi = match parse_formula(text) {
            Ok(f) => f,
            Err(e) => return fail(FlyStatus::ParseError, &e.to_string()),
        };
        let free = phi.free_vars();
        let ctx: Vec<String> = if vars.is_null() {
            free.clone()
        } else {
            let spec = match unsafe { read_str(vars, "vars") } {
                Ok(s) => s,
                Err(status) => return status,
            };
            let listed: Vec<String> = spec
                .split([' ', ','])
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect();
            if listed.is_empty() {
                free.clone()
            } else {
                listed
            }
        };
        for x in &free {
            if !ctx.contains(x) {
                return fail(
                    FlyStatus::InvalidArgument,
                    &format!(
                        "free variable {x} is not in the context (have: {})",
                        ctx.join(" ")
                    ),
                );
            }
        }
        match compile(&phi, &ctx) {
            Ok(a) => {
                unsafe { *out = Box::into_raw(Box::new(FlyAutomaton { inner: a })) };
                FlyStatus::Ok
            }
            Err(e) => fail(FlyStatus::CompileError, &e.to_string()),
        }
    })
}

/// Releases an automaton handle. NULL is a no-op.
///
/// # Safety
/// `a` must be NULL or a handle from [`fly_formula_compile`] that is not
/// used again afterwards.
#[no_mangle]
pub unsafe extern "C" fn fly_automaton_free(a: *mut FlyAutomaton) {
    if !a.is_null() {
        drop(unsafe { Box::from_raw(a) });
    }
}

// ============================================================================
// Running automata over terms
// ============================================================================

/// Decides the formula on the term and writes 1 (true) or 0 (false).
///
/// A plain term under free variables asks for satisfiability; an annotated
/// term is checked against its own assignment, and must carry exactly one
/// bit per context variable.
///
/// # Safety
/// `a` and `t` must be live handles; `out` must be a valid location for one
/// `int32_t`.
#[no_mangle]
pub unsafe extern "C" fn fly_check(
    a: *const FlyAutomaton,
    t: *const FlyTerm,
    out: *mut i32,
) -> FlyStatus {
    guarded(|| {
        let (a, t) = match unsafe { (borrow(a, "automaton"), borrow(t, "term")) } {
            (Ok(a), Ok(t)) => (a, t),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        if out.is_null() {
            return fail(FlyStatus::InvalidArgument, "out is NULL");
        }
        let plain = match width_check(a, &t.inner) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let verdict = if plain && !a.inner.vars.is_empty() {
            check_sat(&a.inner.dfa, &t.inner).map_err(|e| e.to_string())
        } else {
            a.inner.dfa.accepts(&t.inner).map_err(|e| e.to_string())
        };
        match verdict {
            Ok(b) => {
                unsafe { *out = i32::from(b) };
                FlyStatus::Ok
            }
            Err(e) => fail(FlyStatus::RunError, &e),
        }
    })
}

/// Counts satisfying assignments of the free variables, as a decimal string
/// (counts outgrow every fixed-width integer quickly).
///
/// # Safety
/// `a` and `t` must be live handles; `out` receives a string to release
/// with [`fly_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fly_count(
    a: *const FlyAutomaton,
    t: *const FlyTerm,
    out: *mut *mut c_char,
) -> FlyStatus {
    guarded(|| {
        let (a, t) = match unsafe { (borrow(a, "automaton"), borrow(t, "term")) } {
            (Ok(a), Ok(t)) => (a, t),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        if let Err(status) = needs_vars(a, "count") {
            return status;
        }
        if let Err(status) = width_check(a, &t.inner) {
            return status;
        }
        match count_assignments(&a.inner.dfa, &t.inner) {
            Ok(c) => unsafe { give_string(c.to_string(), out) },
            Err(e) => fail(FlyStatus::RunError, &e.to_string()),
        }
    })
}

/// Satisfiable cardinality tuples, rendered like `[(1,1),(2,0)]` (or `[]`).
///
/// # Safety
/// `a` and `t` must be live handles; `out` receives a string to release
/// with [`fly_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fly_spectrum(
    a: *const FlyAutomaton,
    t: *const FlyTerm,
    out: *mut *mut c_char,
) -> FlyStatus {
    guarded(|| {
        let (a, t) = match unsafe { (borrow(a, "automaton"), borrow(t, "term")) } {
            (Ok(a), Ok(t)) => (a, t),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        if let Err(status) = needs_vars(a, "spectrum") {
            return status;
        }
        if let Err(status) = width_check(a, &t.inner) {
            return status;
        }
        match spectrum(&a.inner.dfa, &t.inner) {
            Ok(s) => {
                let mut text = String::from("[");
                for (i, tuple) in s.iter().enumerate() {
                    if i > 0 {
                        text.push(',');
                    }
                    text.push_str(&render_tuple(tuple));
                }
                text.push(']');
                unsafe { give_string(text, out) }
            }
            Err(e) => fail(FlyStatus::RunError, &e.to_string()),
        }
    })
}

/// Cardinality tuples with multiplicities, rendered like `(1,1):6 (2,0):3`
/// (or `[]` when nothing satisfies the formula).
///
/// # Safety
/// `a` and `t` must be live handles; `out` receives a string to release
/// with [`fly_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fly_multispectrum(
    a: *const FlyAutomaton,
    t: *const FlyTerm,
    out: *mut *mut c_char,
) -> FlyStatus {
    guarded(|| {
        let (a, t) = match unsafe { (borrow(a, "automaton"), borrow(t, "term")) } {
            (Ok(a), Ok(t)) => (a, t),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        if let Err(status) = needs_vars(a, "multispectrum") {
            return status;
        }
        if let Err(status) = width_check(a, &t.inner) {
            return status;
        }
        match multispectrum(&a.inner.dfa, &t.inner) {
            Ok(m) => {
                let mut text = String::new();
                for (tuple, count) in &m {
                    if !text.is_empty() {
                        text.push(' ');
                    }
                    text.push_str(&format!("{}:{count}", render_tuple(tuple)));
                }
                if text.is_empty() {
                    text.push_str("[]");
                }
                unsafe { give_string(text, out) }
            }
            Err(e) => fail(FlyStatus::RunError, &e.to_string()),
        }
    })
}

/// Minimal cardinality of the first context variable over satisfying
/// assignments: a decimal string, or `infinity` when nothing satisfies the
/// formula.
///
/// # Safety
/// `a` and `t` must be live handles; `out` receives a string to release
/// with [`fly_string_free`].
#[no_mangle]
pub unsafe extern "C" fn fly_min_card(
    a: *const FlyAutomaton,
    t: *const FlyTerm,
    out: *mut *mut c_char,
) -> FlyStatus {
    guarded(|| {
        let (a, t) = match unsafe { (borrow(a, "automaton"), borrow(t, "term")) } {
            (Ok(a), Ok(t)) => (a, t),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        if let Err(status) = needs_vars(a, "mincard") {
            return status;
        }
        if let Err(status) = width_check(a, &t.inner) {
            return status;
        }
        match min_card(&a.inner.dfa, &t.inner) {
            Ok(Tropical::Finite(n)) => unsafe { give_string(n.to_string(), out) },
            Ok(Tropical::Infinity) => unsafe { give_string("infinity".to_string(), out) },
            Err(e) => fail(FlyStatus::RunError, &e.to_string()),
        }
    })
}

fn render_tuple(t: &[u64]) -> String {
    let inner = t
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",");
    format!("({inner})")
}

/// Releases a string returned by this library. NULL is a no-op.
///
/// # Safety
/// `s` must be NULL or a string obtained from this library that is not used
/// again afterwards.
#[no_mangle]
pub unsafe extern "C" fn fly_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

// ============================================================================
// Tests
// ============================================================================
