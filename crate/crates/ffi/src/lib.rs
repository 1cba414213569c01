//! C ABI over the ctapf solvers.
//!
//! Problems and solutions cross the boundary as opaque handles created from
//! and rendered to the JSON formats the CLI uses. Every fallible call returns
//! a [`CtapfStatus`]; the message of the last failure on the calling thread
//! is available from [`ctapf_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ctapf::bench::{run_solver, Budget, SolverKind};
use ctapf::scenario::{problem_from_json, solution_to_json};
use ctapf::{validate_solution, Error, Problem, Solution, ValidationMode};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtapfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Malformed JSON, or a scenario that violates the problem contract.
    Format = 3,
    /// No collision-free plan exists (or a task is unreachable).
    Infeasible = 4,
    /// A search budget ran out before a plan was found.
    Budget = 5,
    /// Bad argument value, such as an unknown solver.
    InvalidArgument = 6,
    /// A bug: an internal error or a caught panic.
    Internal = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CtapfSolver {
    Tcbs = 0,
    TcbsNn2 = 1,
    Greedy = 2,
    Decoupled = 3,
    Oracle = 4,
}

/// Opaque problem handle.
pub struct CtapfProblem {
    inner: Problem,
}

/// Opaque solution handle.
pub struct CtapfSolution {
    inner: Solution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn fail(status: CtapfStatus, msg: impl Into<String>) -> CtapfStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> CtapfStatus {
    match e {
        Error::Format(_) | Error::Domain(_) | Error::Contract(_) | Error::Ambiguity { .. } => CtapfStatus::Format,
        Error::Infeasible(_) | Error::Unreachable { .. } => CtapfStatus::Infeasible,
        Error::Budget(_) => CtapfStatus::Budget,
        Error::Generation(_) | Error::Io(_) => CtapfStatus::Internal,
    }
}

/// Runs `f`, turning panics into `Internal` so they never unwind into C.
fn guarded(f: impl FnOnce() -> CtapfStatus) -> CtapfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(CtapfStatus::Internal, "panic inside ctapf"),
    }
}

/// # Safety
/// `s` must be null or a NUL-terminated string valid for reads.
unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, CtapfStatus> {
    if s.is_null() {
        return Err(fail(CtapfStatus::NullArgument, "null string argument"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(CtapfStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

/// Message of the last failed call on this thread, or null if none failed.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ctapf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a scenario JSON document into a new problem handle.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer to
/// write the handle to. Free the handle with [`ctapf_problem_free`].
#[no_mangle]
pub unsafe extern "C" fn ctapf_problem_from_json(json: *const c_char, out: *mut *mut CtapfProblem) -> CtapfStatus {
    guarded(|| {
        if out.is_null() {
            return fail(CtapfStatus::NullArgument, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match problem_from_json(text, None) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(CtapfProblem { inner: p }));
                CtapfStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `problem` must be null or a handle from [`ctapf_problem_from_json`] that
/// has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ctapf_problem_free(problem: *mut CtapfProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// # Safety
/// The handle must be null or live.
#[no_mangle]
pub unsafe extern "C" fn ctapf_problem_agent_count(problem: *const CtapfProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.n_agents())
}

/// # Safety
/// The handle must be null or live.
#[no_mangle]
pub unsafe extern "C" fn ctapf_problem_task_count(problem: *const CtapfProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.inner.n_tasks())
}

/// Solves `problem` with `solver`, one of the [`CtapfSolver`] values.
/// `node_budget` caps high-level expansions
/// (0 means the default of two million) and `time_limit_ms` caps wall time
/// (0 means unlimited).
///
/// # Safety
/// `problem` must be a live problem handle and `out` a valid pointer. Free
/// the result with [`ctapf_solution_free`].
#[no_mangle]
pub unsafe extern "C" fn ctapf_solve(
    problem: *const CtapfProblem,
    solver: u32,
    node_budget: u64,
    time_limit_ms: u64,
    out: *mut *mut CtapfSolution,
) -> CtapfStatus {
    guarded(|| {
        if out.is_null() || problem.is_null() {
            return fail(CtapfStatus::NullArgument, "null problem or output pointer");
        }
        *out = ptr::null_mut();
        // Taken as an integer: an out-of-range enum from C would be UB.
        let kind = match solver {
            x if x == CtapfSolver::Tcbs as u32 => SolverKind::Tcbs,
            x if x == CtapfSolver::TcbsNn2 as u32 => SolverKind::TcbsNn2,
            x if x == CtapfSolver::Greedy as u32 => SolverKind::Greedy,
            x if x == CtapfSolver::Decoupled as u32 => SolverKind::Decoupled,
            x if x == CtapfSolver::Oracle as u32 => SolverKind::Oracle,
            other => return fail(CtapfStatus::InvalidArgument, format!("unknown solver {other}")),
        };
        let defaults = Budget::default();
        let budget = Budget {
            node_budget: if node_budget == 0 { defaults.node_budget } else { node_budget },
            time_limit: (time_limit_ms > 0).then(|| std::time::Duration::from_millis(time_limit_ms)),
        };
        match run_solver(&(*problem).inner, kind, budget) {
            Ok(o) => {
                *out = Box::into_raw(Box::new(CtapfSolution { inner: o.solution }));
                CtapfStatus::Ok
            }
            Err(e) => fail(status_of(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `solution` must be null or a live handle from [`ctapf_solve`].
#[no_mangle]
pub unsafe extern "C" fn ctapf_solution_free(solution: *mut CtapfSolution) {
    if !solution.is_null() {
        drop(Box::from_raw(solution));
    }
}

/// Sum of task completion times, or 0 for a null handle.
///
/// # Safety
/// The handle must be null or live.
#[no_mangle]
pub unsafe extern "C" fn ctapf_solution_total_cost(solution: *const CtapfSolution) -> u64 {
    solution.as_ref().map_or(0, |s| s.inner.total_cost)
}

/// Number of time steps in every (padded) path.
///
/// # Safety
/// The handle must be null or live.
#[no_mangle]
pub unsafe extern "C" fn ctapf_solution_horizon(solution: *const CtapfSolution) -> u32 {
    solution.as_ref().map_or(0, |s| s.inner.horizon)
}

/// Renders the solution JSON into a newly allocated string.
///
/// # Safety
/// `solution` must be a live handle and `out` a valid pointer. Free the
/// string with [`ctapf_string_free`].
#[no_mangle]
pub unsafe extern "C" fn ctapf_solution_to_json(solution: *const CtapfSolution, out: *mut *mut c_char) -> CtapfStatus {
    guarded(|| {
        if out.is_null() || solution.is_null() {
            return fail(CtapfStatus::NullArgument, "null solution or output pointer");
        }
        match CString::new(solution_to_json(&(*solution).inner)) {
            Ok(s) => {
                *out = s.into_raw();
                CtapfStatus::Ok
            }
            Err(_) => fail(CtapfStatus::Internal, "solution JSON contains NUL"),
        }
    })
}

/// Checks `solution` against `problem` and writes the number of violations
/// to `violations` (0 means valid). With `strict`, task fulfilment is derived
/// from the paths alone.
///
/// # Safety
/// Both handles must be live and `violations` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ctapf_validate(
    problem: *const CtapfProblem,
    solution: *const CtapfSolution,
    strict: bool,
    violations: *mut usize,
) -> CtapfStatus {
    guarded(|| {
        if problem.is_null() || solution.is_null() || violations.is_null() {
            return fail(CtapfStatus::NullArgument, "null argument");
        }
        let mode = if strict { ValidationMode::Strict } else { ValidationMode::Relaxed };
        let report = validate_solution(&(*problem).inner, &(*solution).inner, mode);
        *violations = report.violations.len();
        CtapfStatus::Ok
    })
}

/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ctapf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
