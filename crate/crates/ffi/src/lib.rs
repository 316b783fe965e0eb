//! C ABI over `cadorder`.
//!
//! Every fallible function returns a [`CadorderStatus`] and writes its result
//! through an out-pointer. On failure a message is kept per thread and can be
//! read with [`cadorder_last_error_message`]. Handles are opaque and must be
//! released with the matching `_free` function; strings returned by the
//! library are released with [`cadorder_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use cadorder::evalharness::{markup, parse_selector, Selector};
use cadorder::features::{evaluate_feature, parse_feature_name, VarSlot};
use cadorder::heuristics::{greedy_ordering, mods_ordering, HeuristicChain, TiePolicy};
use cadorder::poly::{lazard_projection, parse_system};
use cadorder::PolySystem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CadorderStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    Internal = 5,
}

/// Polynomial system together with its variable names.
pub struct CadorderSystem {
    names: Vec<String>,
    system: PolySystem,
}

/// Parsed heuristic: a feature chain or `mods`.
pub struct CadorderHeuristic {
    selector: Selector,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(CadorderStatus, String);

impl From<cadorder::Error> for Failure {
    fn from(e: cadorder::Error) -> Self {
        use cadorder::Error as E;
        let status = match &e {
            E::Syntax { .. } | E::UnknownVariable { .. } | E::InvalidExponent { .. } => CadorderStatus::Parse,
            E::UnknownFeature(_) | E::UnknownHeuristic(_) | E::EmptyHeuristic => CadorderStatus::Parse,
            e if e.is_internal() => CadorderStatus::Internal,
            _ => CadorderStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CadorderStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CadorderStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            CadorderStatus::Internal
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(CadorderStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(CadorderStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn read_strs(p: *const *const c_char, n: usize, what: &str) -> Result<Vec<String>, Failure> {
    if n == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(null(what));
    }
    (0..n).map(|i| read_str(*p.add(i), what).map(str::to_string)).collect()
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Parses `npolys` polynomials over the `nvars` named variables.
///
/// # Safety
/// `polys` and `vars` must point to arrays of that many NUL-terminated
/// strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cadorder_system_parse(
    polys: *const *const c_char,
    npolys: usize,
    vars: *const *const c_char,
    nvars: usize,
    out: *mut *mut CadorderSystem,
) -> CadorderStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let polys = read_strs(polys, npolys, "polys")?;
        let names = read_strs(vars, nvars, "vars")?;
        if names.is_empty() {
            return Err(Failure(CadorderStatus::InvalidArgument, "at least one variable is required".into()));
        }
        let system = parse_system(&polys, &names)?;
        *out = Box::into_raw(Box::new(CadorderSystem { names, system }));
        Ok(())
    })
}

/// Releases a system handle. Null is ignored.
///
/// # Safety
/// `system` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cadorder_system_free(system: *mut CadorderSystem) {
    if !system.is_null() {
        drop(Box::from_raw(system));
    }
}

/// Number of polynomials in the system.
///
/// # Safety
/// `system` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cadorder_system_len(
    system: *const CadorderSystem,
    out: *mut usize,
) -> CadorderStatus {
    guard(|| {
        *out_ref(out, "out")? = borrow(system, "system")?.system.len();
        Ok(())
    })
}

/// Number of variables of the system.
///
/// # Safety
/// `system` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cadorder_system_nvars(
    system: *const CadorderSystem,
    out: *mut usize,
) -> CadorderStatus {
    guard(|| {
        *out_ref(out, "out")? = borrow(system, "system")?.system.nvars();
        Ok(())
    })
}

/// Renders polynomial `index` with the system's variable names. Free the
/// result with [`cadorder_string_free`].
///
/// # Safety
/// `system` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cadorder_system_poly_string(
    system: *const CadorderSystem,
    index: usize,
    out: *mut *mut c_char,
) -> CadorderStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let s = borrow(system, "system")?;
        let p = s.system.polys().get(index).ok_or_else(|| {
            Failure(
                CadorderStatus::InvalidArgument,
                format!("index {index} out of range for {} polynomials", s.system.len()),
            )
        })?;
        *out = into_c_string(p.to_string_with(&s.names));
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cadorder_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Lazard projection eliminating variable `var` (0-based), as a new system
/// over the same variables.
///
/// # Safety
/// `system` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cadorder_project(
    system: *const CadorderSystem,
    var: usize,
    out: *mut *mut CadorderSystem,
) -> CadorderStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let s = borrow(system, "system")?;
        let projected = lazard_projection(&s.system, var)?;
        *out = Box::into_raw(Box::new(CadorderSystem { names: s.names.clone(), system: projected }));
        Ok(())
    })
}

/// Evaluates a feature such as `sum(max(v_1(S)))`. The value is written to
/// `out_value`; if `out_exact` is not null it receives the exact rational as
/// a string such as `5/4`.
///
/// # Safety
/// `system` must be a live handle; `name` a NUL-terminated string;
/// `out_value` writable; `out_exact` null or writable.
#[no_mangle]
pub unsafe extern "C" fn cadorder_feature_value(
    system: *const CadorderSystem,
    name: *const c_char,
    out_value: *mut f64,
    out_exact: *mut *mut c_char,
) -> CadorderStatus {
    guard(|| {
        let out_value = out_ref(out_value, "out_value")?;
        let s = borrow(system, "system")?;
        let name = read_str(name, "name")?;
        let descriptor = match parse_feature_name(name)? {
            (f, VarSlot::Index(v)) => f.at(v),
            (_, VarSlot::Merged) => {
                return Err(Failure(
                    CadorderStatus::InvalidArgument,
                    format!("`{name}` needs a concrete variable index"),
                ))
            }
        };
        let value = evaluate_feature(&descriptor, &s.system)?;
        *out_value = cadorder::xai_rank::ratio_to_f64(&value);
        if let Some(exact) = out_exact.as_mut() {
            *exact = into_c_string(value.to_string());
        }
        Ok(())
    })
}

/// Parses a heuristic name: a feature chain such as `SumMaxV>AvgAvgV`, an
/// alias (`Brown`, `gmods`, `T1`, `T2`, `random`) or `mods`.
/// `lowest_index_ties` nonzero breaks final ties by lowest variable index
/// instead of at random.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cadorder_heuristic_parse(
    name: *const c_char,
    lowest_index_ties: i32,
    out: *mut *mut CadorderHeuristic,
) -> CadorderStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let name = read_str(name, "name")?;
        let selector = match parse_selector(name)?.selector {
            Selector::VirtualBest => {
                return Err(Failure(CadorderStatus::InvalidArgument, "virtual-best needs timings".into()))
            }
            Selector::Heuristic(chain) if lowest_index_ties != 0 => {
                Selector::Heuristic(chain.with_tie_policy(TiePolicy::LowestIndex))
            }
            other => other,
        };
        *out = Box::into_raw(Box::new(CadorderHeuristic { selector }));
        Ok(())
    })
}

/// Releases a heuristic handle. Null is ignored.
///
/// # Safety
/// `heuristic` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn cadorder_heuristic_free(heuristic: *mut CadorderHeuristic) {
    if !heuristic.is_null() {
        drop(Box::from_raw(heuristic));
    }
}

/// Chooses a variable ordering. `order` receives the projection order
/// (variable indices, first projected first) and must hold `order_len`
/// entries, at least the number of variables. `class_label` receives the
/// 1-based class of the ordering. `seed` drives random tie-breaking.
///
/// # Safety
/// Handles must be live; `order` must be writable for `order_len` entries;
/// `class_label` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cadorder_choose_ordering(
    system: *const CadorderSystem,
    heuristic: *const CadorderHeuristic,
    seed: u64,
    order: *mut usize,
    order_len: usize,
    class_label: *mut usize,
) -> CadorderStatus {
    guard(|| {
        let s = borrow(system, "system")?;
        let h = borrow(heuristic, "heuristic")?;
        let class_label = out_ref(class_label, "class_label")?;
        let n = s.system.nvars();
        if order.is_null() {
            return Err(null("order"));
        }
        if order_len < n {
            return Err(Failure(
                CadorderStatus::InvalidArgument,
                format!("order holds {order_len} entries, need {n}"),
            ));
        }
        let ordering = match &h.selector {
            Selector::Mods => mods_ordering(&s.system)?.0,
            Selector::Heuristic(chain) => choose_greedy(&s.system, chain, seed)?,
            Selector::VirtualBest => {
                return Err(Failure(CadorderStatus::Internal, "virtual-best handle".into()))
            }
        };
        std::slice::from_raw_parts_mut(order, n).copy_from_slice(ordering.projection_order());
        *class_label = ordering.class_label();
        Ok(())
    })
}

fn choose_greedy(
    system: &PolySystem,
    chain: &HeuristicChain,
    seed: u64,
) -> cadorder::Result<cadorder::heuristics::VariableOrdering> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(greedy_ordering(system, chain, &mut rng)?.0)
}

/// Markup `(t - best) / (1 + best)` of a time against the best time.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cadorder_markup(time: f64, best: f64, out: *mut f64) -> CadorderStatus {
    guard(|| {
        *out_ref(out, "out")? = markup(time, best)?;
        Ok(())
    })
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn cadorder_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cadorder_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
