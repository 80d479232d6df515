//! C ABI over `lcm_sunflower`.
//!
//! Every fallible function returns an [`LcmsfStatus`]; on failure the
//! message is available from [`lcmsf_last_error`] on the same thread.
//! Families and prime tables are opaque handles released with their
//! `_free` functions. Strings returned through `char **` out-parameters are
//! owned by the caller and released with [`lcmsf_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lcm_sunflower::capacity::{max_pattern_free, SearchConfig};
use lcm_sunflower::harmonic::{g_constant_with, h_ell, OmegaSieve, EXACT_SUM_LIMIT};
use lcm_sunflower::lcmfree::{exact_fk, is_lcm_k_free, LcmInstance};
use lcm_sunflower::primes::{PrimeTable, SumMode};
use lcm_sunflower::rational::format_rational;
use lcm_sunflower::setfam::{blow_up, find_k_cosunflower, find_k_sunflower, Blocks, Pattern, SetFamily};
use lcm_sunflower::Error;

/// Result codes shared by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LcmsfStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    OutOfRange = 3,
    Resource = 4,
    Domain = 5,
    Parse = 6,
    CapExceeded = 7,
    Shortfall = 8,
    GroundOverflow = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 99,
}

/// A family of subsets of a ground set of at most 64 elements.
pub struct LcmsfFamily(SetFamily);

/// Primes up to a limit.
pub struct LcmsfPrimeTable(PrimeTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> LcmsfStatus {
    match e {
        Error::InvalidInput(_) => LcmsfStatus::InvalidArgument,
        Error::OutOfRange { .. } => LcmsfStatus::OutOfRange,
        Error::Resource(_) => LcmsfStatus::Resource,
        Error::GroundSetOverflow(_) => LcmsfStatus::GroundOverflow,
        Error::Domain(_) => LcmsfStatus::Domain,
        Error::Shortfall { .. } => LcmsfStatus::Shortfall,
        Error::CapExceeded { .. } => LcmsfStatus::CapExceeded,
        Error::Parse(_) => LcmsfStatus::Parse,
        Error::Io(_) => LcmsfStatus::Io,
    }
}

struct Fail(LcmsfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(LcmsfStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LcmsfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LcmsfStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            LcmsfStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn family_ref<'a>(p: *const LcmsfFamily) -> Result<&'a SetFamily, Fail> {
    p.as_ref().map(|f| &f.0).ok_or_else(|| null("family"))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn lcmsf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a family from bitmasks over `ground_size` elements.
///
/// # Safety
/// `masks` must point to `len` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_family_new(
    ground_size: usize,
    masks: *const u64,
    len: usize,
    out: *mut *mut LcmsfFamily,
) -> LcmsfStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let masks = slice(masks, len, "masks")?;
        let fam = SetFamily::new(ground_size, masks.iter().copied())?;
        *out = Box::into_raw(Box::new(LcmsfFamily(fam)));
        Ok(())
    })
}

/// Parses a family from its JSON form
/// `{"ground_size": n, "members": [[...], ...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_family_from_json(json: *const c_char, out: *mut *mut LcmsfFamily) -> LcmsfStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(LcmsfStatus::Parse, e.to_string()))?;
        *out = Box::into_raw(Box::new(LcmsfFamily(SetFamily::from_json_str(text)?)));
        Ok(())
    })
}

/// # Safety
/// `family` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_family_free(family: *mut LcmsfFamily) {
    if !family.is_null() {
        drop(Box::from_raw(family));
    }
}

/// Number of members, or 0 for NULL.
///
/// # Safety
/// `family` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_family_len(family: *const LcmsfFamily) -> usize {
    family.as_ref().map_or(0, |f| f.0.len())
}

/// Ground set size, or 0 for NULL.
///
/// # Safety
/// `family` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_family_ground_size(family: *const LcmsfFamily) -> usize {
    family.as_ref().map_or(0, |f| f.0.ground_size())
}

/// Copies the member bitmasks (ascending) into `buf`. `written` receives
/// the member count even when `capacity` is too small.
///
/// # Safety
/// `buf` must have room for `capacity` values; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_family_members(
    family: *const LcmsfFamily,
    buf: *mut u64,
    capacity: usize,
    written: *mut usize,
) -> LcmsfStatus {
    guard(|| {
        let fam = family_ref(family)?;
        let written = out_ref(written, "written")?;
        *written = fam.len();
        if capacity < fam.len() {
            return Err(Fail(
                LcmsfStatus::BufferTooSmall,
                format!("need room for {} members, got {capacity}", fam.len()),
            ));
        }
        if !fam.is_empty() {
            if buf.is_null() {
                return Err(null("buf"));
            }
            ptr::copy_nonoverlapping(fam.members().as_ptr(), buf, fam.len());
        }
        Ok(())
    })
}

/// JSON form of the family, to be released with [`lcmsf_string_free`].
///
/// # Safety
/// `family` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_family_to_json(family: *const LcmsfFamily, out: *mut *mut c_char) -> LcmsfStatus {
    guard(|| {
        let fam = family_ref(family)?;
        *out_ref(out, "out")? = into_c_string(fam.to_json_string());
        Ok(())
    })
}

/// Looks for `k` members forming a sunflower (or, with `cosunflower`
/// nonzero, a cosunflower). On success `found` is set, and when it is 1
/// the member indices are written to `witness`, which must hold `k`
/// entries.
///
/// # Safety
/// `family` must be a live handle; `witness` must have room for `k`
/// values; `found` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_find_sunflower(
    family: *const LcmsfFamily,
    k: usize,
    cosunflower: c_int,
    witness: *mut usize,
    found: *mut c_int,
) -> LcmsfStatus {
    guard(|| {
        let fam = family_ref(family)?;
        let found = out_ref(found, "found")?;
        let w = if cosunflower != 0 { find_k_cosunflower(fam, k)? } else { find_k_sunflower(fam, k)? };
        *found = w.is_some() as c_int;
        if let Some(w) = w {
            if witness.is_null() {
                return Err(null("witness"));
            }
            ptr::copy_nonoverlapping(w.as_ptr(), witness, w.len());
        }
        Ok(())
    })
}

/// Blows `family` up over consecutive blocks of the given sizes followed
/// by `rest` unused elements.
///
/// # Safety
/// `block_sizes` must point to `nblocks` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_blow_up(
    family: *const LcmsfFamily,
    block_sizes: *const usize,
    nblocks: usize,
    rest: usize,
    out: *mut *mut LcmsfFamily,
) -> LcmsfStatus {
    guard(|| {
        let fam = family_ref(family)?;
        let out = out_ref(out, "out")?;
        let sizes = slice(block_sizes, nblocks, "block_sizes")?;
        let blocks = Blocks::from_sizes(sizes, rest)?;
        *out = Box::into_raw(Box::new(LcmsfFamily(blow_up(fam, &blocks)?)));
        Ok(())
    })
}

/// Largest k-sunflower-free (or k-cosunflower-free) family on `n` points.
/// `exact` is 0 when the node budget ran out. `witness` may be NULL; if
/// not, it receives a new handle holding an optimal family.
///
/// # Safety
/// `value` and `exact` must be writable; `witness` must be NULL or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_max_sunflower_free(
    n: usize,
    k: usize,
    budget: u64,
    cosunflower: c_int,
    value: *mut usize,
    exact: *mut c_int,
    witness: *mut *mut LcmsfFamily,
) -> LcmsfStatus {
    guard(|| {
        let value = out_ref(value, "value")?;
        let exact = out_ref(exact, "exact")?;
        let pattern = if cosunflower != 0 { Pattern::Cosunflower } else { Pattern::Sunflower };
        let r = max_pattern_free(n, k, pattern, &SearchConfig { budget, ..SearchConfig::default() })?;
        *value = r.f_value;
        *exact = r.exact as c_int;
        if let Some(w) = witness.as_mut() {
            *w = Box::into_raw(Box::new(LcmsfFamily(r.witness)));
        }
        Ok(())
    })
}

/// Sets `is_free` to 1 when the distinct positive integers in `xs` contain
/// no k elements with all pairwise lcms equal.
///
/// # Safety
/// `xs` must point to `len` values; `is_free` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_is_lcm_k_free(xs: *const u64, len: usize, k: usize, is_free: *mut c_int) -> LcmsfStatus {
    guard(|| {
        let is_free = out_ref(is_free, "is_free")?;
        let inst = LcmInstance::new(slice(xs, len, "xs")?.iter().copied())?;
        *is_free = is_lcm_k_free(&inst, k)? as c_int;
        Ok(())
    })
}

/// Exact `f_k(N)` as JSON: `{"N", "k", "value": "p/q", "set", "exact",
/// "nodes"}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_exact_fk_json(n: u64, k: usize, budget: u64, out: *mut *mut c_char) -> LcmsfStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = exact_fk(n, k, budget)?;
        let text = serde_json::to_string(&r).map_err(|e| Fail(LcmsfStatus::Parse, e.to_string()))?;
        *out = into_c_string(text);
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_prime_table_new(limit: u64, out: *mut *mut LcmsfPrimeTable) -> LcmsfStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = Box::into_raw(Box::new(LcmsfPrimeTable(PrimeTable::new(limit)?)));
        Ok(())
    })
}

/// # Safety
/// `table` must be NULL or a handle from this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_prime_table_free(table: *mut LcmsfPrimeTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of primes in the table, or 0 for NULL.
///
/// # Safety
/// `table` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_prime_table_len(table: *const LcmsfPrimeTable) -> usize {
    table.as_ref().map_or(0, |t| t.0.len())
}

/// Copies the primes into `buf`; `written` receives the count even when
/// `capacity` is too small.
///
/// # Safety
/// `buf` must have room for `capacity` values; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_prime_table_primes(
    table: *const LcmsfPrimeTable,
    buf: *mut u64,
    capacity: usize,
    written: *mut usize,
) -> LcmsfStatus {
    guard(|| {
        let t = &table.as_ref().ok_or_else(|| null("table"))?.0;
        let written = out_ref(written, "written")?;
        *written = t.len();
        if capacity < t.len() {
            return Err(Fail(LcmsfStatus::BufferTooSmall, format!("need room for {} primes, got {capacity}", t.len())));
        }
        if !t.is_empty() {
            if buf.is_null() {
                return Err(null("buf"));
            }
            ptr::copy_nonoverlapping(t.primes().as_ptr(), buf, t.len());
        }
        Ok(())
    })
}

/// `Σ 1/p` over primes `lo < p ≤ hi` of the table, in floating point.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_prime_harmonic_sum(
    table: *const LcmsfPrimeTable,
    lo: f64,
    hi: f64,
    out: *mut f64,
) -> LcmsfStatus {
    guard(|| {
        let t = &table.as_ref().ok_or_else(|| null("table"))?.0;
        *out_ref(out, "out")? = t.harmonic_sum(lo, hi, SumMode::Float)?.to_f64();
        Ok(())
    })
}

/// `H_ℓ(N)`: `Σ 1/n` over squarefree `n ≤ N` with exactly `ℓ` prime
/// factors. `value` receives the float sum; if `exact` is not NULL and
/// `N ≤ 100000` it receives the exact value as a `"p/q"` string.
///
/// # Safety
/// `value` must be writable; `exact` must be NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_h_ell(n: u64, ell: u32, value: *mut f64, exact: *mut *mut c_char) -> LcmsfStatus {
    guard(|| {
        let value = out_ref(value, "value")?;
        let sieve = OmegaSieve::new(n)?;
        let mode = if !exact.is_null() && n <= EXACT_SUM_LIMIT { SumMode::Exact } else { SumMode::Float };
        let l = h_ell(&sieve, n, ell, mode)?;
        *value = l.value;
        if let Some(e) = exact.as_mut() {
            *e = l.exact.as_ref().map_or(ptr::null_mut(), |q| into_c_string(format_rational(q)));
        }
        Ok(())
    })
}

/// `G(z)` truncated at the primes of `table`, with a bound on the
/// truncation error. Requires `0 ≤ z < 2`.
///
/// # Safety
/// `table` must be a live handle; `value` and `tail_bound` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn lcmsf_g_constant(
    table: *const LcmsfPrimeTable,
    z: f64,
    value: *mut f64,
    tail_bound: *mut f64,
) -> LcmsfStatus {
    guard(|| {
        let t = &table.as_ref().ok_or_else(|| null("table"))?.0;
        let value = out_ref(value, "value")?;
        let tail_bound = out_ref(tail_bound, "tail_bound")?;
        let g = g_constant_with(t, z)?;
        *value = g.value;
        *tail_bound = g.tail_bound;
        Ok(())
    })
}
