//! C ABI over `simdiag`.
//!
//! Objects are opaque heap handles created by `simdiag_*_new`/`_parse`/...
//! functions and released with the matching `_free`. Every fallible call
//! returns a [`SimdiagStatus`]; on failure a message is kept per thread and
//! can be read with [`simdiag_last_error`]. Panics never cross the boundary.
//!
//! Amplitude buffers are interleaved `re, im` pairs of `double`, so a state
//! of `n` qubits needs `2 * 2^n` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use simdiag::error::Error;
use simdiag::evolution::{self, EvolutionPlan, Method, TermOrder};
use simdiag::hamiltonian::{partition_stats, Hamiltonian};
use simdiag::models;
use simdiag::statevec::{StateVector, C64};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimdiagStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    TooManyQubits = 5,
    NotDiagonalized = 6,
    Invariant = 7,
    Panic = 8,
}

/// Opaque Pauli Hamiltonian.
pub struct SimdiagHamiltonian(Hamiltonian);

/// Opaque partitioned and diagonalized Hamiltonian.
pub struct SimdiagGrouped(evolution::GroupedHamiltonian);

/// Opaque state vector.
pub struct SimdiagState(StateVector);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SimdiagStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::InvalidPauliChar { .. } | Error::LengthMismatch { .. } | Error::Parse { .. } => {
                SimdiagStatus::Parse
            }
            Error::Io { .. } | Error::Stream(_) => SimdiagStatus::Io,
            Error::TooManyQubits { .. } => SimdiagStatus::TooManyQubits,
            Error::NotDiagonalized { .. } => SimdiagStatus::NotDiagonalized,
            Error::Invariant(_) => SimdiagStatus::Invariant,
            _ => SimdiagStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn run(f: impl FnOnce() -> Result<(), Failure>) -> SimdiagStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure(SimdiagStatus::Panic, format!("panic: {msg}")))
    });
    match outcome {
        Ok(()) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            SimdiagStatus::Ok
        }
        Err(Failure(status, msg)) => {
            set_last_error(msg);
            status
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(SimdiagStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SimdiagStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Message of the last failed call on this thread, or NULL after a
/// successful one. Valid until the next `simdiag_*` call on the thread.
#[no_mangle]
pub extern "C" fn simdiag_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static NUL-terminated version string.
#[no_mangle]
pub extern "C" fn simdiag_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- Hamiltonian ----

/// Parses the text format: one `<coeff> <pauli>` pair per line.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn simdiag_hamiltonian_parse(
    text: *const c_char,
    out: *mut *mut SimdiagHamiltonian,
) -> SimdiagStatus {
    run(|| {
        let h = Hamiltonian::parse_str(c_str(text, "text")?)?;
        put(out, SimdiagHamiltonian(h))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn simdiag_hamiltonian_load(
    path: *const c_char,
    out: *mut *mut SimdiagHamiltonian,
) -> SimdiagStatus {
    run(|| {
        let h = Hamiltonian::load(c_str(path, "path")?)?;
        put(out, SimdiagHamiltonian(h))
    })
}

/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn simdiag_hamiltonian_tfim(
    n_qubits: usize,
    seed: u64,
    out: *mut *mut SimdiagHamiltonian,
) -> SimdiagStatus {
    run(|| put(out, SimdiagHamiltonian(models::gen_tfim(n_qubits, seed)?)))
}

/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn simdiag_hamiltonian_syk(
    n_qubits: usize,
    seed: u64,
    out: *mut *mut SimdiagHamiltonian,
) -> SimdiagStatus {
    run(|| put(out, SimdiagHamiltonian(models::gen_syk(n_qubits, seed)?)))
}

/// Qubit count, or 0 for a NULL handle.
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simdiag_hamiltonian_n_qubits(h: *const SimdiagHamiltonian) -> usize {
    h.as_ref().map_or(0, |h| h.0.n_qubits())
}

/// Term count, or 0 for a NULL handle.
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simdiag_hamiltonian_n_terms(h: *const SimdiagHamiltonian) -> usize {
    h.as_ref().map_or(0, |h| h.0.len())
}

/// # Safety
/// `h` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn simdiag_hamiltonian_free(h: *mut SimdiagHamiltonian) {
    free(h)
}

// ---- grouped Hamiltonian ----

/// Partitions `h` into commuting groups and diagonalizes each one.
///
/// # Safety
/// `h` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn simdiag_grouped_build(
    h: *const SimdiagHamiltonian,
    out: *mut *mut SimdiagGrouped,
) -> SimdiagStatus {
    run(|| {
        let h = borrow(h, "hamiltonian")?;
        put(out, SimdiagGrouped(evolution::GroupedHamiltonian::build(&h.0)?))
    })
}

/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simdiag_grouped_n_groups(g: *const SimdiagGrouped) -> usize {
    g.as_ref().map_or(0, |g| g.0.groups.len())
}

/// `m / (n * n_g)`, or 0 for a NULL handle.
///
/// # Safety
/// `g` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simdiag_grouped_predicted_speedup(g: *const SimdiagGrouped) -> f64 {
    g.as_ref()
        .map_or(0.0, |g| partition_stats(&g.0.groups, g.0.n_qubits).predicted_speedup)
}

/// # Safety
/// `g` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn simdiag_grouped_free(g: *mut SimdiagGrouped) {
    free(g)
}

// ---- state ----

/// `|0...0>`
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn simdiag_state_zero(n_qubits: usize, out: *mut *mut SimdiagState) -> SimdiagStatus {
    run(|| put(out, SimdiagState(StateVector::zero(n_qubits)?)))
}

/// Normalized random state, reproducible from `seed`.
///
/// # Safety
/// `out` must be a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn simdiag_state_random(
    n_qubits: usize,
    seed: u64,
    out: *mut *mut SimdiagState,
) -> SimdiagStatus {
    run(|| put(out, SimdiagState(StateVector::random(n_qubits, seed)?)))
}

/// Copies `len` interleaved doubles (`len / 2` amplitudes, a power of two).
///
/// # Safety
/// `data` must point to `len` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn simdiag_state_from_amplitudes(
    data: *const f64,
    len: usize,
    out: *mut *mut SimdiagState,
) -> SimdiagStatus {
    run(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if len % 2 != 0 {
            return Err(Failure(
                SimdiagStatus::InvalidArgument,
                format!("odd buffer length {len}"),
            ));
        }
        let raw = std::slice::from_raw_parts(data, len);
        let amps = raw.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect();
        put(out, SimdiagState(StateVector::from_amplitudes(amps)?))
    })
}

/// Qubit count, or 0 for a NULL handle.
///
/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn simdiag_state_n_qubits(s: *const SimdiagState) -> usize {
    s.as_ref().map_or(0, |s| s.0.n_qubits())
}

/// Copies the amplitudes into `data`, which must hold `2 * 2^n` doubles;
/// `len` is its capacity in doubles.
///
/// # Safety
/// `s` must be a live handle and `data` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn simdiag_state_amplitudes(
    s: *const SimdiagState,
    data: *mut f64,
    len: usize,
) -> SimdiagStatus {
    run(|| {
        let s = borrow(s, "state")?;
        if data.is_null() {
            return Err(null("data"));
        }
        let need = 2 * s.0.dim();
        if len < need {
            return Err(Failure(
                SimdiagStatus::InvalidArgument,
                format!("buffer holds {len} doubles, need {need}"),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(data, need);
        for (pair, a) in dst.chunks_exact_mut(2).zip(s.0.amplitudes()) {
            pair[0] = a.re;
            pair[1] = a.im;
        }
        Ok(())
    })
}

/// `|<a|b>|`
///
/// # Safety
/// `a`, `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simdiag_state_fidelity(
    a: *const SimdiagState,
    b: *const SimdiagState,
    out: *mut f64,
) -> SimdiagStatus {
    run(|| {
        let f = borrow(a, "a")?.0.fidelity(&borrow(b, "b")?.0)?;
        *borrow_mut(out, "output pointer")? = f;
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn simdiag_state_free(s: *mut SimdiagState) {
    free(s)
}

// ---- evolution ----

/// `n_steps` grouped Trotter steps of size `total_time / n_steps`.
///
/// # Safety
/// `g` and `s` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn simdiag_evolve_grouped(
    g: *const SimdiagGrouped,
    s: *mut SimdiagState,
    total_time: f64,
    n_steps: usize,
) -> SimdiagStatus {
    run(|| {
        let g = borrow(g, "grouped")?;
        let s = borrow_mut(s, "state")?;
        let plan = EvolutionPlan::new(total_time, n_steps, Method::Grouped)?;
        if g.0.n_qubits != s.0.n_qubits() {
            return Err(Error::DimensionMismatch {
                left: g.0.n_qubits,
                right: s.0.n_qubits(),
            }
            .into());
        }
        evolution::evolve_grouped(&g.0.diagonal, &mut s.0, &plan)?;
        Ok(())
    })
}

/// Per-term baseline; terms in input order, or grouped order when
/// `group_major` is true.
///
/// # Safety
/// `h` and `s` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn simdiag_evolve_baseline(
    h: *const SimdiagHamiltonian,
    s: *mut SimdiagState,
    total_time: f64,
    n_steps: usize,
    group_major: bool,
) -> SimdiagStatus {
    run(|| {
        let h = borrow(h, "hamiltonian")?;
        let s = borrow_mut(s, "state")?;
        let order = if group_major { TermOrder::GroupMajor } else { TermOrder::Input };
        let plan = EvolutionPlan::new(total_time, n_steps, Method::Baseline)?.with_order(order);
        evolution::evolve_baseline(&h.0, &mut s.0, &plan)?;
        Ok(())
    })
}

/// `<s|H|s>`
///
/// # Safety
/// `h`, `s` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn simdiag_expectation(
    h: *const SimdiagHamiltonian,
    s: *const SimdiagState,
    out: *mut f64,
) -> SimdiagStatus {
    run(|| {
        let e = evolution::expectation(&borrow(h, "hamiltonian")?.0, &borrow(s, "state")?.0)?;
        *borrow_mut(out, "output pointer")? = e;
        Ok(())
    })
}
