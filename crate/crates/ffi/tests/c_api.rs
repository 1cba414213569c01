use std::ffi::{CStr, CString};
use std::ptr;

use ctapf_ffi::*;

const SCENARIO: &str = r#"{"map": {"width": 5, "height": 1, "obstacles": []},
    "agents": [[0,0]], "tasks": [{"start": [2,0], "goal": [4,0]}]}"#;

fn problem(json: &str) -> *mut CtapfProblem {
    let text = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { ctapf_problem_from_json(text.as_ptr(), &mut p) }, CtapfStatus::Ok);
    p
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ctapf_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn solve_and_render() {
    let p = problem(SCENARIO);
    unsafe {
        assert_eq!(ctapf_problem_agent_count(p), 1);
        assert_eq!(ctapf_problem_task_count(p), 1);
        let mut s = ptr::null_mut();
        assert_eq!(ctapf_solve(p, CtapfSolver::Tcbs as u32, 0, 0, &mut s), CtapfStatus::Ok);
        assert_eq!(ctapf_solution_total_cost(s), 4);
        assert_eq!(ctapf_solution_horizon(s), 4);

        let mut violations = usize::MAX;
        assert_eq!(ctapf_validate(p, s, true, &mut violations), CtapfStatus::Ok);
        assert_eq!(violations, 0);

        let mut json = ptr::null_mut();
        assert_eq!(ctapf_solution_to_json(s, &mut json), CtapfStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        assert!(text.contains("\"total_cost\":4"), "{text}");
        ctapf_string_free(json);
        ctapf_solution_free(s);
        ctapf_problem_free(p);
    }
}

#[test]
fn every_solver_agrees_on_a_single_agent() {
    let p = problem(SCENARIO);
    for solver in [CtapfSolver::Tcbs, CtapfSolver::TcbsNn2, CtapfSolver::Greedy, CtapfSolver::Decoupled, CtapfSolver::Oracle] {
        let mut s = ptr::null_mut();
        unsafe {
            assert_eq!(ctapf_solve(p, solver as u32, 0, 0, &mut s), CtapfStatus::Ok, "{solver:?}");
            assert_eq!(ctapf_solution_total_cost(s), 4);
            ctapf_solution_free(s);
        }
    }
    unsafe { ctapf_problem_free(p) };
}

#[test]
fn error_codes() {
    let mut p = ptr::null_mut();
    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { ctapf_problem_from_json(bad.as_ptr(), &mut p) }, CtapfStatus::Format);
    assert!(p.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { ctapf_problem_from_json(ptr::null(), &mut p) }, CtapfStatus::NullArgument);

    let blocked = CString::new(
        r#"{"map": {"width": 3, "height": 1, "obstacles": [[1,0]]},
            "agents": [[0,0]], "tasks": [{"start": [2,0], "goal": [0,0]}]}"#,
    )
    .unwrap();
    assert_eq!(unsafe { ctapf_problem_from_json(blocked.as_ptr(), &mut p) }, CtapfStatus::Ok);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(ctapf_solve(p, CtapfSolver::Tcbs as u32, 0, 0, &mut s), CtapfStatus::Infeasible);
        assert!(s.is_null());
        assert_eq!(ctapf_solve(p, 99, 0, 0, &mut s), CtapfStatus::InvalidArgument);
        assert!(last_error().contains("99"));
        ctapf_problem_free(p);
    }
}

#[test]
fn budget_exhaustion() {
    let p = problem(
        r#"{"map": {"width": 4, "height": 4, "obstacles": []},
            "agents": [[0,0],[3,3]], "tasks": [{"start": [3,0], "goal": [0,3]}, {"start": [0,2], "goal": [3,1]}]}"#,
    );
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(ctapf_solve(p, CtapfSolver::Tcbs as u32, 1, 0, &mut s), CtapfStatus::Budget);
        ctapf_problem_free(p);
    }
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        ctapf_problem_free(ptr::null_mut());
        ctapf_solution_free(ptr::null_mut());
        ctapf_string_free(ptr::null_mut());
        assert_eq!(ctapf_solution_total_cost(ptr::null()), 0);
        assert_eq!(ctapf_problem_agent_count(ptr::null()), 0);
        let mut n = 0;
        assert_eq!(ctapf_validate(ptr::null(), ptr::null(), false, &mut n), CtapfStatus::NullArgument);
    }
}
