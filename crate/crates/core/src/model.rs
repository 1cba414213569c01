//! Problem data, collision and task-fulfilment semantics, and an independent
//! solution checker.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::grid::{Cell, GridMap};
use crate::planner::Path;

/// A transport task: pick up at `start`, deliver at `goal`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Task {
    pub start: Cell,
    pub goal: Cell,
}

impl Task {
    pub fn new(start: Cell, goal: Cell) -> Self {
        Task { start, goal }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub map: GridMap,
    pub agents: Vec<Cell>,
    pub tasks: Vec<Task>,
    /// Per-agent task lists that are already running. Empty means none;
    /// otherwise one (possibly empty) list per agent, used as a fixed prefix.
    pub initial_assignments: Vec<Vec<usize>>,
}

impl Problem {
    pub fn new(map: GridMap, agents: Vec<Cell>, tasks: Vec<Task>) -> Result<Self> {
        Self::with_initial_assignments(map, agents, tasks, Vec::new())
    }

    pub fn with_initial_assignments(
        map: GridMap,
        agents: Vec<Cell>,
        tasks: Vec<Task>,
        initial_assignments: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let p = Problem { map, agents, tasks, initial_assignments };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if self.agents.is_empty() || self.tasks.is_empty() {
            return Err(Error::Contract("need at least one agent and one task".into()));
        }
        let mut seen = HashSet::new();
        for &a in &self.agents {
            self.map.require_free(a)?;
            if !seen.insert(a) {
                return Err(Error::Contract(format!("two agents start at {a}")));
            }
        }
        for (i, t) in self.tasks.iter().enumerate() {
            self.map.require_free(t.start)?;
            self.map.require_free(t.goal)?;
            if t.start == t.goal {
                return Err(Error::Contract(format!("task {i} starts at its goal {}", t.start)));
            }
        }
        if !self.initial_assignments.is_empty() {
            if self.initial_assignments.len() != self.agents.len() {
                return Err(Error::Contract(format!(
                    "{} initial assignment lists for {} agents",
                    self.initial_assignments.len(),
                    self.agents.len()
                )));
            }
            let mut used = HashSet::new();
            for &t in self.initial_assignments.iter().flatten() {
                if t >= self.tasks.len() || !used.insert(t) {
                    return Err(Error::Contract(format!("bad initial assignment of task {t}")));
                }
            }
        }
        Ok(())
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn n_tasks(&self) -> usize {
        self.tasks.len()
    }

    /// Initial per-agent task lists, one per agent.
    pub fn initial_tau(&self) -> Vec<Vec<usize>> {
        if self.initial_assignments.is_empty() {
            vec![Vec::new(); self.agents.len()]
        } else {
            self.initial_assignments.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConflictKind {
    /// Both agents occupy `cell` at `time`.
    Vertex { cell: Cell },
    /// The lower-indexed agent moves `from -> to` while the other moves
    /// `to -> from` during step `time -> time + 1`.
    Edge { from: Cell, to: Cell },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Conflict {
    pub time: u32,
    /// Always ordered `(lower, higher)`.
    pub agents: (usize, usize),
    pub kind: ConflictKind,
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.agents;
        match self.kind {
            ConflictKind::Vertex { cell } => {
                write!(f, "agents {a} and {b} both at {cell} at t={}", self.time)
            }
            ConflictKind::Edge { from, to } => {
                write!(f, "agents {a} and {b} swap {from}<->{to} at t={}", self.time)
            }
        }
    }
}

/// Every vertex and swap conflict among equal-length paths, ordered by time
/// then agent pair (vertex before edge within a pair and step).
pub fn detect_conflicts(paths: &[Path]) -> Result<Vec<Conflict>> {
    if let Some(first) = paths.first() {
        if paths.iter().any(|p| p.cells.len() != first.cells.len()) {
            return Err(Error::Contract("conflict detection needs padded paths".into()));
        }
    }
    let refs: Vec<&Path> = paths.iter().collect();
    Ok(scan_conflicts(&refs, false))
}

/// The earliest conflict, treating shorter paths as resting on their last cell.
pub fn first_conflict(paths: &[&Path]) -> Option<Conflict> {
    scan_conflicts(paths, true).into_iter().next()
}

fn scan_conflicts(paths: &[&Path], first_only: bool) -> Vec<Conflict> {
    let horizon = paths.iter().map(|p| p.final_time()).max().unwrap_or(0);
    let mut out = Vec::new();
    for t in 0..=horizon {
        for a in 0..paths.len() {
            for b in a + 1..paths.len() {
                let (pa, pb) = (paths[a], paths[b]);
                if pa.at(t) == pb.at(t) {
                    out.push(Conflict {
                        time: t,
                        agents: (a, b),
                        kind: ConflictKind::Vertex { cell: pa.at(t) },
                    });
                } else if t < horizon
                    && pa.at(t) == pb.at(t + 1)
                    && pa.at(t + 1) == pb.at(t)
                {
                    out.push(Conflict {
                        time: t,
                        agents: (a, b),
                        kind: ConflictKind::Edge { from: pa.at(t), to: pa.at(t + 1) },
                    });
                }
                if first_only && !out.is_empty() {
                    return out;
                }
            }
        }
    }
    out
}

/// One task occurrence on a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskActivity {
    pub task: usize,
    pub started: u32,
    pub completed: Option<u32>,
}

/// Replays the implicit assignment rule on one path: an idle agent standing
/// on an unconsumed task's start begins that task, and it stays bound until it
/// reaches the goal. Completion is checked before activation at each step.
pub fn implicit_activity(path: &Path, tasks: &[Task]) -> Result<Vec<TaskActivity>> {
    let mut out: Vec<TaskActivity> = Vec::new();
    let mut consumed = vec![false; tasks.len()];
    let mut running: Option<usize> = None;
    for (t, &cell) in path.cells.iter().enumerate() {
        let t = t as u32;
        if let Some(i) = running {
            if tasks[out[i].task].goal == cell {
                out[i].completed = Some(t);
                running = None;
            }
        }
        if running.is_none() {
            let mut candidates = (0..tasks.len()).filter(|&k| !consumed[k] && tasks[k].start == cell);
            if let Some(task) = candidates.next() {
                if let Some(second) = candidates.next() {
                    return Err(Error::Ambiguity { cell, first: task, second });
                }
                consumed[task] = true;
                running = Some(out.len());
                out.push(TaskActivity { task, started: t, completed: None });
            }
        }
    }
    Ok(out)
}

/// Tasks activated along `path` under the implicit rule, in activation order.
pub fn implicit_assignment(path: &Path, tasks: &[Task]) -> Result<Vec<usize>> {
    Ok(implicit_activity(path, tasks)?.into_iter().map(|a| a.task).collect())
}

/// Replays the implicit rule over all paths at once. Tasks are consumed
/// globally, so a start already taken by another agent no longer binds. At
/// each step completions are checked first, then idle agents bind in index
/// order. An agent with unfinished initial assignments may only bind the next
/// one, and nobody else may take tasks named in those lists. When several
/// tasks share a start, the stated list (if any) breaks the tie.
pub fn joint_implicit_activity(problem: &Problem, paths: &[Path], stated: &[Vec<usize>]) -> Result<Vec<Vec<TaskActivity>>> {
    joint_replay(problem, paths, stated).map_err(|(_, e)| e)
}

fn joint_replay(
    problem: &Problem,
    paths: &[Path],
    stated: &[Vec<usize>],
) -> std::result::Result<Vec<Vec<TaskActivity>>, (usize, Error)> {
    if let Some(a) = paths.iter().position(|p| p.cells.is_empty()) {
        return Err((a, Error::Contract(format!("agent {a} has an empty path"))));
    }
    let tasks = &problem.tasks;
    let prefix = problem.initial_tau();
    let reserved: Vec<bool> = (0..tasks.len()).map(|t| prefix.iter().any(|p| p.contains(&t))).collect();
    let mut out: Vec<Vec<TaskActivity>> = vec![Vec::new(); paths.len()];
    let mut consumed = vec![false; tasks.len()];
    let mut finished = vec![false; tasks.len()];
    let mut running: Vec<Option<usize>> = vec![None; paths.len()];
    let horizon = paths.iter().map(|p| p.cells.len()).max().unwrap_or(0);
    for t in 0..horizon {
        let at = |a: usize| paths[a].cells[t.min(paths[a].cells.len() - 1)];
        for a in 0..paths.len() {
            if let Some(i) = running[a] {
                let act = &mut out[a][i];
                if tasks[act.task].goal == at(a) {
                    act.completed = Some(t as u32);
                    finished[act.task] = true;
                    running[a] = None;
                }
            }
        }
        for a in 0..paths.len() {
            if running[a].is_some() {
                continue;
            }
            let cell = at(a);
            let next_prefix = prefix.get(a).and_then(|p| p.iter().copied().find(|&k| !finished[k]));
            let options: Vec<usize> = (0..tasks.len())
                .filter(|&k| !consumed[k] && tasks[k].start == cell)
                .filter(|&k| match next_prefix {
                    Some(p) => k == p,
                    None => !reserved[k],
                })
                .collect();
            let task = match options[..] {
                [] => continue,
                [k] => k,
                [first, second, ..] => {
                    let hint = stated.get(a).and_then(|s| s.get(out[a].len())).copied();
                    match hint {
                        Some(k) if options.contains(&k) => k,
                        _ => return Err((a, Error::Ambiguity { cell, first, second })),
                    }
                }
            };
            consumed[task] = true;
            running[a] = Some(out[a].len());
            out[a].push(TaskActivity { task, started: t as u32, completed: None });
        }
    }
    Ok(out)
}

/// Completion time of each task in `sequence` when `path` executes them in
/// that order: first visit of the start at or after the previous completion,
/// then first visit of the goal. `None` if the path falls short.
pub fn realize_sequence(path: &Path, tasks: &[Task], sequence: &[usize]) -> Option<Vec<u32>> {
    let mut cursor = 0usize;
    let mut out = Vec::with_capacity(sequence.len());
    for &i in sequence {
        let task = tasks.get(i)?;
        let s = cursor + path.cells[cursor..].iter().position(|&c| c == task.start)?;
        let g = s + path.cells[s..].iter().position(|&c| c == task.goal)?;
        out.push(g as u32);
        cursor = g;
    }
    Some(out)
}

/// Per-task completion times for paths realizing per-agent task lists.
pub fn task_completion_times(
    paths: &[Path],
    tasks: &[Task],
    assignments: &[Vec<usize>],
) -> Result<Vec<Option<u32>>> {
    if paths.len() != assignments.len() {
        return Err(Error::Contract("one assignment list per path required".into()));
    }
    let mut completion = vec![None; tasks.len()];
    for (j, (path, seq)) in paths.iter().zip(assignments).enumerate() {
        let times = realize_sequence(path, tasks, seq).ok_or_else(|| {
            Error::Contract(format!("path of agent {j} does not realize tasks {seq:?}"))
        })?;
        for (&i, &t) in seq.iter().zip(&times) {
            completion[i] = Some(t);
        }
    }
    Ok(completion)
}

/// Sum of task completion times; agents without tasks add nothing.
pub fn solution_cost(paths: &[Path], tasks: &[Task], assignments: &[Vec<usize>]) -> Result<u64> {
    Ok(task_completion_times(paths, tasks, assignments)?
        .into_iter()
        .flatten()
        .map(u64::from)
        .sum())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Solution {
    /// Equal-length per-agent paths.
    pub paths: Vec<Path>,
    pub task_completion: Vec<u32>,
    pub total_cost: u64,
    pub horizon: u32,
    /// Per-agent task lists. Empty when unknown (e.g. read from a file that
    /// omits them); the validator then derives them from the paths.
    pub assignments: Vec<Vec<usize>>,
}

impl Solution {
    /// Pads `paths` and derives completion times and cost from `assignments`.
    pub fn from_assigned_paths(
        paths: &[Path],
        tasks: &[Task],
        assignments: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let paths = crate::planner::pad_paths(paths);
        let completion = task_completion_times(&paths, tasks, &assignments)?;
        let task_completion = completion
            .iter()
            .enumerate()
            .map(|(i, t)| t.ok_or_else(|| Error::Contract(format!("task {i} is not assigned"))))
            .collect::<Result<Vec<_>>>()?;
        let total_cost = task_completion.iter().map(|&t| u64::from(t)).sum();
        let horizon = paths.first().map_or(0, Path::final_time);
        Ok(Solution { paths, task_completion, total_cost, horizon, assignments })
    }

    /// Agents that carry at least one task.
    pub fn busy_agents(&self) -> usize {
        self.assignments.iter().filter(|a| !a.is_empty()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValidationMode {
    /// Stated assignments are authoritative; crossing another task's start
    /// cell on the way is allowed.
    #[default]
    Relaxed,
    /// Fulfilment is derived purely from the implicit assignment rule on
    /// each path; stated assignments that disagree are flagged.
    Strict,
}

/// Coarse category of a [`Violation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationClass {
    Shape,
    Step,
    Start,
    VertexCollision,
    EdgeCollision,
    Unfulfilled,
    Duplicated,
    Cost,
    Incidental,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    AgentCount { expected: usize, found: usize },
    CompletionCount { expected: usize, found: usize },
    EmptyPath { agent: usize },
    UnequalLengths,
    BlockedCell { agent: usize, time: u32, cell: Cell },
    BadStep { agent: usize, time: u32, from: Cell, to: Cell },
    StartMismatch { agent: usize, expected: Cell, found: Cell },
    Collision(Conflict),
    Unfulfilled { task: usize },
    Duplicated { task: usize },
    PrefixMismatch { agent: usize },
    AmbiguousStart { agent: usize, detail: String },
    CompletionMismatch { task: usize, expected: u32, found: Option<u32> },
    CostMismatch { expected: u64, found: u64 },
    Incidental { agent: usize, stated: Vec<usize>, implicit: Vec<usize> },
}

impl Violation {
    pub fn class(&self) -> ViolationClass {
        use Violation::*;
        match self {
            AgentCount { .. } | CompletionCount { .. } | EmptyPath { .. } | UnequalLengths => ViolationClass::Shape,
            BlockedCell { .. } | BadStep { .. } => ViolationClass::Step,
            StartMismatch { .. } => ViolationClass::Start,
            Collision(c) => match c.kind {
                ConflictKind::Vertex { .. } => ViolationClass::VertexCollision,
                ConflictKind::Edge { .. } => ViolationClass::EdgeCollision,
            },
            Unfulfilled { .. } | PrefixMismatch { .. } | AmbiguousStart { .. } => {
                ViolationClass::Unfulfilled
            }
            Duplicated { .. } => ViolationClass::Duplicated,
            CompletionMismatch { .. } | CostMismatch { .. } => ViolationClass::Cost,
            Incidental { .. } => ViolationClass::Incidental,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            AgentCount { expected, found } => write!(f, "expected {expected} paths, found {found}"),
            CompletionCount { expected, found } => {
                write!(f, "expected {expected} completion times, found {found}")
            }
            EmptyPath { agent } => write!(f, "agent {agent} has an empty path"),
            UnequalLengths => write!(f, "paths have unequal lengths"),
            BlockedCell { agent, time, cell } => {
                write!(f, "agent {agent} is on blocked cell {cell} at t={time}")
            }
            BadStep { agent, time, from, to } => {
                write!(f, "agent {agent} jumps {from}->{to} at t={time}")
            }
            StartMismatch { agent, expected, found } => {
                write!(f, "agent {agent} starts at {found}, expected {expected}")
            }
            Collision(c) => write!(f, "collision: {c}"),
            Unfulfilled { task } => write!(f, "task {task} is never fulfilled"),
            Duplicated { task } => write!(f, "task {task} is fulfilled by more than one agent"),
            PrefixMismatch { agent } => {
                write!(f, "agent {agent} does not start with its running tasks")
            }
            AmbiguousStart { agent, detail } => write!(f, "agent {agent}: {detail}"),
            CompletionMismatch { task, expected, found } => match found {
                Some(t) => write!(f, "task {task} completes at t={t}, reported {expected}"),
                None => write!(f, "task {task} has no completion, reported {expected}"),
            },
            CostMismatch { expected, found } => {
                write!(f, "total cost recomputes to {expected}, reported {found}")
            }
            Incidental { agent, stated, implicit } => write!(
                f,
                "agent {agent} is implicitly bound to {implicit:?}, stated {stated:?}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn classes(&self) -> Vec<ViolationClass> {
        let mut c: Vec<_> = self.violations.iter().map(Violation::class).collect();
        c.sort();
        c.dedup();
        c
    }
}

/// Checks a solution against every problem constraint. Violations are data;
/// this never fails.
pub fn validate_solution(
    problem: &Problem,
    solution: &Solution,
    mode: ValidationMode,
) -> ValidationReport {
    let mut v = Vec::new();
    let paths = &solution.paths;
    let tasks = &problem.tasks;
    if paths.len() != problem.n_agents() {
        v.push(Violation::AgentCount { expected: problem.n_agents(), found: paths.len() });
        return ValidationReport { violations: v };
    }
    if let Some(agent) = paths.iter().position(|p| p.cells.is_empty()) {
        v.push(Violation::EmptyPath { agent });
        return ValidationReport { violations: v };
    }
    if paths.iter().any(|p| p.cells.len() != paths[0].cells.len()) {
        v.push(Violation::UnequalLengths);
    }

    let map = &problem.map;
    for (agent, path) in paths.iter().enumerate() {
        if path.cells[0] != problem.agents[agent] {
            v.push(Violation::StartMismatch {
                agent,
                expected: problem.agents[agent],
                found: path.cells[0],
            });
        }
        for (t, &cell) in path.cells.iter().enumerate() {
            if !map.is_free(cell) {
                v.push(Violation::BlockedCell { agent, time: t as u32, cell });
            }
        }
        for (t, w) in path.cells.windows(2).enumerate() {
            let (from, to) = (w[0], w[1]);
            if from != to && crate::grid::manhattan(from, to) != 1 {
                v.push(Violation::BadStep { agent, time: t as u32, from, to });
            }
        }
    }

    let refs: Vec<&Path> = paths.iter().collect();
    v.extend(scan_conflicts(&refs, false).into_iter().map(Violation::Collision));

    // Per-task completion as recomputed from the paths.
    let mut completion: Vec<Option<u32>> = vec![None; tasks.len()];
    let mut owners = vec![0usize; tasks.len()];
    let stated = &solution.assignments;
    let use_stated = mode == ValidationMode::Relaxed && stated.len() == paths.len();
    if use_stated {
        for (agent, (path, seq)) in paths.iter().zip(stated).enumerate() {
            let prefix = problem.initial_assignments.get(agent);
            if prefix.is_some_and(|p| !seq.starts_with(p)) {
                v.push(Violation::PrefixMismatch { agent });
            }
            let mut cursor = 0usize;
            for &i in seq {
                if i >= tasks.len() {
                    v.push(Violation::Unfulfilled { task: i });
                    continue;
                }
                owners[i] += 1;
                let task = tasks[i];
                let done = path.cells[cursor..]
                    .iter()
                    .position(|&c| c == task.start)
                    .map(|s| cursor + s)
                    .and_then(|s| path.cells[s..].iter().position(|&c| c == task.goal).map(|g| s + g));
                match done {
                    Some(g) => {
                        if completion[i].is_none() {
                            completion[i] = Some(g as u32);
                        }
                        cursor = g;
                    }
                    None => v.push(Violation::Unfulfilled { task: i }),
                }
            }
        }
    } else {
        match joint_replay(problem, paths, stated) {
            Ok(all) => {
                for (agent, acts) in all.iter().enumerate() {
                    for a in acts {
                        owners[a.task] += 1;
                        if let Some(t) = a.completed {
                            completion[a.task].get_or_insert(t);
                        }
                    }
                    let imp: Vec<usize> = acts.iter().map(|a| a.task).collect();
                    if stated.len() == paths.len() && imp != stated[agent] {
                        v.push(Violation::Incidental { agent, stated: stated[agent].clone(), implicit: imp });
                    }
                }
            }
            Err((agent, e)) => v.push(Violation::AmbiguousStart { agent, detail: e.to_string() }),
        }
    }

    for i in 0..tasks.len() {
        if owners[i] > 1 {
            v.push(Violation::Duplicated { task: i });
        }
        if completion[i].is_none() && !v.contains(&Violation::Unfulfilled { task: i }) {
            v.push(Violation::Unfulfilled { task: i });
        }
        if let Some(&reported) = solution.task_completion.get(i) {
            if completion[i] != Some(reported) {
                v.push(Violation::CompletionMismatch { task: i, expected: reported, found: completion[i] });
            }
        }
    }
    if solution.task_completion.len() != tasks.len() {
        v.push(Violation::CompletionCount { expected: tasks.len(), found: solution.task_completion.len() });
    }
    let recomputed: u64 = completion.iter().flatten().map(|&t| u64::from(t)).sum();
    if recomputed != solution.total_cost {
        v.push(Violation::CostMismatch { expected: recomputed, found: solution.total_cost });
    }
    ValidationReport { violations: v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::parse_map;

    fn c(x: u16, y: u16) -> Cell {
        Cell::new(x, y)
    }

    fn path(cells: &[(u16, u16)]) -> Path {
        Path { cells: cells.iter().map(|&(x, y)| c(x, y)).collect(), waypoint_arrivals: vec![] }
    }

    #[test]
    fn vertex_conflict() {
        let cs = detect_conflicts(&[path(&[(0, 0), (1, 0)]), path(&[(2, 0), (1, 0)])]).unwrap();
        assert_eq!(
            cs,
            vec![Conflict { time: 1, agents: (0, 1), kind: ConflictKind::Vertex { cell: c(1, 0) } }]
        );
    }

    #[test]
    fn edge_conflict() {
        let cs = detect_conflicts(&[path(&[(0, 0), (1, 0)]), path(&[(1, 0), (0, 0)])]).unwrap();
        assert_eq!(
            cs,
            vec![Conflict {
                time: 0,
                agents: (0, 1),
                kind: ConflictKind::Edge { from: c(0, 0), to: c(1, 0) }
            }]
        );
    }

    #[test]
    fn disjoint_and_unpadded() {
        assert!(detect_conflicts(&[path(&[(0, 0), (0, 1)]), path(&[(2, 2), (2, 1)])])
            .unwrap()
            .is_empty());
        assert!(matches!(
            detect_conflicts(&[path(&[(0, 0)]), path(&[(2, 2), (2, 1)])]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn implicit_rules() {
        let tasks = [Task::new(c(1, 0), c(2, 0))];
        assert_eq!(implicit_assignment(&path(&[(0, 0), (1, 0), (2, 0)]), &tasks).unwrap(), vec![0]);
        assert!(implicit_assignment(&path(&[(0, 1), (1, 1)]), &tasks).unwrap().is_empty());

        // Task A = (0,0)->(3,0); B starts at (1,0), crossed while A runs.
        let tasks = [Task::new(c(0, 0), c(3, 0)), Task::new(c(1, 0), c(1, 1))];
        let p = path(&[(0, 0), (1, 0), (2, 0), (3, 0)]);
        assert_eq!(implicit_assignment(&p, &tasks).unwrap(), vec![0]);
        let p = path(&[(0, 0), (1, 0), (2, 0), (3, 0), (2, 0), (1, 0), (1, 1)]);
        assert_eq!(implicit_assignment(&p, &tasks).unwrap(), vec![0, 1]);
    }

    #[test]
    fn implicit_ambiguity() {
        let tasks = [Task::new(c(1, 0), c(2, 0)), Task::new(c(1, 0), c(0, 0))];
        assert_eq!(
            implicit_assignment(&path(&[(0, 0), (1, 0)]), &tasks),
            Err(Error::Ambiguity { cell: c(1, 0), first: 0, second: 1 })
        );
    }

    #[test]
    fn costs() {
        let line = |n: u16| path(&(0..=n).map(|x| (x, 0)).collect::<Vec<_>>());
        let t1 = [Task::new(c(2, 0), c(4, 0))];
        assert_eq!(solution_cost(&[line(4)], &t1, &[vec![0]]).unwrap(), 4);

        let two = [Task::new(c(2, 0), c(4, 0)), Task::new(c(1, 0), c(6, 0))];
        assert_eq!(solution_cost(&[line(4), line(6)], &two, &[vec![0], vec![1]]).unwrap(), 10);

        // One agent chaining two tasks that end at t=6 and t=15.
        let mut cells: Vec<(u16, u16)> = (0..=6).map(|x| (x, 0)).collect();
        cells.extend((1..=9).map(|y| (6, y)));
        let chained = [Task::new(c(3, 0), c(6, 0)), Task::new(c(6, 2), c(6, 9))];
        assert_eq!(solution_cost(&[path(&cells)], &chained, &[vec![0, 1]]).unwrap(), 21);

        assert_eq!(solution_cost(&[line(4), line(0)], &t1, &[vec![0], vec![]]).unwrap(), 4);
        assert!(matches!(solution_cost(&[line(1)], &t1, &[vec![0]]), Err(Error::Contract(_))));
    }

    fn fixture() -> (Problem, Solution) {
        let map = parse_map("...\n...\n...").unwrap();
        let p = Problem::new(map, vec![c(0, 0), c(2, 2)], vec![Task::new(c(1, 0), c(2, 0))]).unwrap();
        let s = Solution::from_assigned_paths(
            &[path(&[(0, 0), (1, 0), (2, 0)]), path(&[(2, 2)])],
            &p.tasks,
            vec![vec![0], vec![]],
        )
        .unwrap();
        (p, s)
    }

    #[test]
    fn validator_accepts_clean_solution() {
        let (p, s) = fixture();
        assert_eq!(s.total_cost, 2);
        assert!(validate_solution(&p, &s, ValidationMode::Relaxed).is_valid());
        assert!(validate_solution(&p, &s, ValidationMode::Strict).is_valid());
    }

    #[test]
    fn validator_flags_teleport_and_swap() {
        let (p, mut s) = fixture();
        s.paths[0].cells[1] = c(2, 2);
        s.paths[0].cells[2] = c(0, 0);
        let r = validate_solution(&p, &s, ValidationMode::Relaxed);
        assert!(r.classes().contains(&ViolationClass::Step));

        let (p, mut s) = fixture();
        s.paths[0] = path(&[(0, 0), (1, 0), (2, 0), (2, 1)]);
        s.paths[1] = path(&[(2, 2), (2, 2), (2, 2), (2, 1)]);
        s.paths[1].cells[2] = c(2, 1);
        s.paths[1].cells[3] = c(2, 0);
        let r = validate_solution(&p, &s, ValidationMode::Relaxed);
        assert!(r.classes().contains(&ViolationClass::EdgeCollision), "{r:?}");
    }

    #[test]
    fn strict_flags_incidental_traversal() {
        let map = parse_map("....\n....").unwrap();
        let tasks = vec![Task::new(c(2, 0), c(3, 0)), Task::new(c(1, 0), c(1, 1))];
        let p = Problem::new(map, vec![c(0, 0), c(0, 1)], tasks).unwrap();
        // Agent 0 crosses task 1's start on the way to task 0.
        let s = Solution::from_assigned_paths(
            &[path(&[(0, 0), (1, 0), (2, 0), (3, 0)]), path(&[(0, 1), (1, 1), (1, 0), (1, 1)])],
            &p.tasks,
            vec![vec![0], vec![1]],
        )
        .unwrap();
        assert!(validate_solution(&p, &s, ValidationMode::Relaxed).is_valid());
        let strict = validate_solution(&p, &s, ValidationMode::Strict);
        assert!(strict.classes().contains(&ViolationClass::Incidental), "{strict:?}");
    }

    #[test]
    fn strict_replay_is_joint_across_agents() {
        let map = parse_map("....\n....").unwrap();
        let tasks = vec![Task::new(c(1, 0), c(1, 1)), Task::new(c(3, 0), c(3, 1))];
        let p = Problem::new(map, vec![c(0, 0), c(1, 0)], tasks).unwrap();
        // Agent 1 takes task 0 at t=0; agent 0 crosses its start later and
        // must not be bound to it.
        let s = Solution::from_assigned_paths(
            &[path(&[(0, 0), (0, 0), (1, 0), (2, 0), (3, 0), (3, 1)]), path(&[(1, 0), (1, 1), (1, 1), (1, 1), (1, 1), (1, 1)])],
            &p.tasks,
            vec![vec![1], vec![0]],
        )
        .unwrap();
        let acts = joint_implicit_activity(&p, &s.paths, &[]).unwrap();
        assert_eq!(acts[0].iter().map(|a| a.task).collect::<Vec<_>>(), vec![1]);
        assert_eq!(acts[1][0], TaskActivity { task: 0, started: 0, completed: Some(1) });
        assert!(validate_solution(&p, &s, ValidationMode::Strict).is_valid());
        // Each path replayed alone would bind agent 0 to task 0 as well.
        assert_eq!(implicit_assignment(&s.paths[0], &p.tasks).unwrap(), vec![0]);
    }
}
