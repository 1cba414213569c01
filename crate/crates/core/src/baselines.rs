//! Sub-optimal comparison solvers that decide the task allocation first and
//! then plan collision-free paths for that fixed allocation with classic
//! conflict-based search.

use std::collections::{BTreeMap, BinaryHeap, HashSet};
use std::cmp::Ordering;
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::{Cell, DistanceTable};
use crate::model::{first_conflict, Conflict, ConflictKind, Problem, Solution};
use crate::planner::{Constraint, ConstraintSet, Path};
use crate::tcbs::{path_cost, SearchContext, SearchStats, SolveOutcome, SolverConfig};

/// Task allocation as chains: each agent's first new task, then successors.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssignmentPlan {
    pub agent_task: BTreeMap<usize, usize>,
    pub consecutive: BTreeMap<usize, usize>,
}

impl AssignmentPlan {
    /// Per-agent task lists: the problem's running tasks followed by the
    /// chain this plan attaches to them. Fails unless every task appears
    /// exactly once.
    pub fn to_tau(&self, problem: &Problem) -> Result<Vec<Vec<usize>>> {
        let mut tau = problem.initial_tau();
        let mut seen = vec![false; problem.n_tasks()];
        for &t in tau.iter().flatten() {
            seen[t] = true;
        }
        for (j, list) in tau.iter_mut().enumerate() {
            let mut next = match list.last() {
                Some(tail) => self.consecutive.get(tail).copied(),
                None => self.agent_task.get(&j).copied(),
            };
            while let Some(t) = next {
                if t >= seen.len() || seen[t] {
                    return Err(Error::Contract(format!("task {t} appears twice or is unknown")));
                }
                seen[t] = true;
                list.push(t);
                next = self.consecutive.get(&t).copied();
            }
        }
        if let Some(t) = seen.iter().position(|&s| !s) {
            return Err(Error::Contract(format!("plan leaves task {t} unassigned")));
        }
        Ok(tau)
    }

    /// Inverse of [`AssignmentPlan::to_tau`] for lists without running tasks.
    pub fn from_tau(tau: &[Vec<usize>]) -> Self {
        let mut plan = AssignmentPlan::default();
        for (j, list) in tau.iter().enumerate() {
            if let Some(&first) = list.first() {
                plan.agent_task.insert(j, first);
            }
            for w in list.windows(2) {
                plan.consecutive.insert(w[0], w[1]);
            }
        }
        plan
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Pose {
    Agent(usize),
    TaskEnd(usize),
}

/// Greedy nearest-pair allocation. While tasks remain, the closest (pose,
/// free task) pair by true distance to the task start is matched, where the
/// poses are the free agents plus, when free tasks outnumber free agents, the
/// goals of chain-tail tasks. Ties go to agents before task ends, then the
/// lower pose index, then the lower task index.
pub fn greedy_assign(problem: &Problem) -> Result<AssignmentPlan> {
    let distances = DistanceTable::new(problem.map.clone());
    greedy_assign_with(problem, &distances)
}

pub fn greedy_assign_with(problem: &Problem, distances: &DistanceTable) -> Result<AssignmentPlan> {
    let prefix = problem.initial_tau();
    let mut free_agents: Vec<usize> = (0..problem.n_agents()).filter(|&j| prefix[j].is_empty()).collect();
    let mut tails: Vec<usize> = prefix.iter().filter_map(|p| p.last().copied()).collect();
    let running: HashSet<usize> = prefix.iter().flatten().copied().collect();
    let mut free_tasks: Vec<usize> = (0..problem.n_tasks()).filter(|t| !running.contains(t)).collect();
    let mut plan = AssignmentPlan::default();

    let cell_of = |pose: Pose| -> Cell {
        match pose {
            Pose::Agent(j) => problem.agents[j],
            Pose::TaskEnd(t) => problem.tasks[t].goal,
        }
    };

    while !free_tasks.is_empty() {
        let mut poses: Vec<Pose> = free_agents.iter().map(|&j| Pose::Agent(j)).collect();
        if free_tasks.len() > free_agents.len() {
            poses.extend(tails.iter().map(|&t| Pose::TaskEnd(t)));
        }
        let best = poses
            .iter()
            .flat_map(|&pose| free_tasks.iter().map(move |&t| (pose, t)))
            .filter_map(|(pose, t)| {
                distances.true_distance(cell_of(pose), problem.tasks[t].start).ok().map(|d| (d, pose, t))
            })
            .min();
        let Some((_, pose, task)) = best else {
            return Err(Error::Infeasible(format!("no free agent or task end reaches tasks {free_tasks:?}")));
        };
        free_tasks.retain(|&t| t != task);
        match pose {
            Pose::TaskEnd(prev) => {
                plan.consecutive.insert(prev, task);
                tails.retain(|&t| t != prev);
            }
            Pose::Agent(j) => {
                plan.agent_task.insert(j, task);
                free_agents.retain(|&a| a != j);
            }
        }
        tails.push(task);
        tails.sort_unstable();
    }
    Ok(plan)
}

/// Default guard for [`decoupled_assign`]: `n^m * m!` sequence evaluations.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 50_000_000;

/// Exactly optimal allocation under the collision-free relaxation: each task
/// ends at the agent's previous end time plus true-distance legs, and the
/// sum of end times is minimized by branch and bound over ordered task
/// partitions. Returns the plan and its relaxed cost.
pub fn decoupled_assign(problem: &Problem, budget: u64) -> Result<(AssignmentPlan, u64)> {
    let distances = DistanceTable::new(problem.map.clone());
    decoupled_assign_with(problem, &distances, budget)
}

pub fn decoupled_assign_with(
    problem: &Problem,
    distances: &DistanceTable,
    budget: u64,
) -> Result<(AssignmentPlan, u64)> {
    let (n, m) = (problem.n_agents() as u64, problem.n_tasks() as u64);
    let size = (1..=m)
        .try_fold(1u64, |acc, k| acc.checked_mul(n)?.checked_mul(k))
        .unwrap_or(u64::MAX);
    if size > budget {
        return Err(Error::Budget(format!("{n}^{m}*{m}! = {size} assignments exceed {budget}")));
    }

    let prefix = problem.initial_tau();
    let mut state = Vec::with_capacity(prefix.len());
    let mut base_cost = 0u64;
    for (j, list) in prefix.iter().enumerate() {
        let (mut pos, mut time) = (problem.agents[j], 0u64);
        for &t in list {
            time += leg(distances, pos, problem, t)?;
            pos = problem.tasks[t].goal;
            base_cost += time;
        }
        state.push((pos, time));
    }
    let running: HashSet<usize> = prefix.iter().flatten().copied().collect();
    let remaining: Vec<usize> = (0..problem.n_tasks()).filter(|t| !running.contains(t)).collect();

    struct Search<'p> {
        problem: &'p Problem,
        distances: &'p DistanceTable,
        best: Option<(u64, Vec<Vec<usize>>)>,
    }
    impl Search<'_> {
        fn dfs(
            &mut self,
            agent: usize,
            state: &mut [(Cell, u64)],
            remaining: &mut Vec<usize>,
            chosen: &mut Vec<Vec<usize>>,
            cost: u64,
        ) {
            if self.best.as_ref().is_some_and(|(b, _)| cost >= *b) {
                return;
            }
            if remaining.is_empty() {
                self.best = Some((cost, chosen.clone()));
                return;
            }
            if agent >= state.len() {
                return;
            }
            let (pos, time) = state[agent];
            for k in 0..remaining.len() {
                let t = remaining[k];
                let Ok(l) = leg(self.distances, pos, self.problem, t) else { continue };
                remaining.remove(k);
                chosen[agent].push(t);
                state[agent] = (self.problem.tasks[t].goal, time + l);
                self.dfs(agent, state, remaining, chosen, cost + time + l);
                state[agent] = (pos, time);
                chosen[agent].pop();
                remaining.insert(k, t);
            }
            self.dfs(agent + 1, state, remaining, chosen, cost);
        }
    }

    let mut search = Search { problem, distances, best: None };
    let mut chosen = vec![Vec::new(); prefix.len()];
    let mut remaining = remaining;
    search.dfs(0, &mut state, &mut remaining, &mut chosen, base_cost);
    let (cost, chosen) = search
        .best
        .ok_or_else(|| Error::Infeasible("no allocation reaches every task".into()))?;

    let mut plan = AssignmentPlan::default();
    for (j, list) in chosen.iter().enumerate() {
        let mut prev = prefix[j].last().copied();
        for &t in list {
            match prev {
                Some(p) => plan.consecutive.insert(p, t),
                None => plan.agent_task.insert(j, t),
            };
            prev = Some(t);
        }
    }
    Ok((plan, cost))
}

fn leg(distances: &DistanceTable, from: Cell, problem: &Problem, task: usize) -> Result<u64> {
    let t = problem.tasks[task];
    Ok(u64::from(distances.true_distance(from, t.start)? + distances.true_distance(t.start, t.goal)?))
}

struct CbsNode {
    beta: Vec<ConstraintSet>,
    paths: Vec<Arc<Path>>,
    g: u64,
    conflict: Option<Conflict>,
}

#[derive(PartialEq, Eq)]
struct CbsEntry {
    g: u64,
    constraints: usize,
    seq: usize,
}

impl Ord for CbsEntry {
    fn cmp(&self, o: &Self) -> Ordering {
        (o.g, o.constraints, o.seq).cmp(&(self.g, self.constraints, self.seq))
    }
}

impl PartialOrd for CbsEntry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Conflict-based search with the allocation fixed by `plan`: nodes carry
/// only avoidance constraints and the first collision-free node popped is
/// optimal for that allocation.
pub fn cbs_solve(problem: &Problem, plan: &AssignmentPlan, config: &SolverConfig) -> Result<SolveOutcome> {
    let tau = plan.to_tau(problem)?;
    cbs_solve_tau(problem, &tau, config)
}

pub fn cbs_solve_tau(problem: &Problem, tau: &[Vec<usize>], config: &SolverConfig) -> Result<SolveOutcome> {
    let clock = Instant::now();
    let mut ctx = SearchContext::new(problem)?;
    ctx.check_reachability()?;
    let mut stats = SearchStats::default();

    let evaluate = |ctx: &mut SearchContext<'_>, node: &mut CbsNode, changed: Option<usize>| -> Result<()> {
        match changed {
            Some(j) => node.paths[j] = ctx.plan_agent(j, &tau[j], &node.beta[j])?,
            None => {
                node.paths = (0..tau.len())
                    .map(|j| ctx.plan_agent(j, &tau[j], &node.beta[j]))
                    .collect::<Result<_>>()?
            }
        }
        node.g = node.paths.iter().map(|p| path_cost(p)).sum();
        let refs: Vec<&Path> = node.paths.iter().map(|p| p.as_ref()).collect();
        node.conflict = first_conflict(&refs);
        Ok(())
    };

    let mut root = CbsNode { beta: vec![ConstraintSet::default(); tau.len()], paths: Vec::new(), g: 0, conflict: None };
    evaluate(&mut ctx, &mut root, None)?;
    let mut nodes = vec![root];
    let mut open = BinaryHeap::new();
    open.push(CbsEntry { g: nodes[0].g, constraints: 0, seq: 0 });
    let mut seen: HashSet<Vec<ConstraintSet>> = HashSet::new();
    stats.nodes_generated = 1;

    while let Some(CbsEntry { seq: id, .. }) = open.pop() {
        let Some(conflict) = nodes[id].conflict else {
            let paths: Vec<Path> = nodes[id].paths.iter().map(|p| Path::clone(p)).collect();
            let solution = Solution::from_assigned_paths(&paths, &problem.tasks, tau.to_vec())?;
            stats.low_level_expansions = ctx.low_level_expansions;
            stats.wall_time = clock.elapsed();
            return Ok(SolveOutcome { solution, stats });
        };
        if stats.nodes_expanded >= config.node_budget {
            return Err(Error::Budget(format!("{} CBS expansions", config.node_budget)));
        }
        if config.time_limit.is_some_and(|limit| clock.elapsed() > limit) {
            return Err(Error::Budget("CBS time limit".into()));
        }
        stats.nodes_expanded += 1;

        let (a, b) = conflict.agents;
        let t = conflict.time;
        let split = match conflict.kind {
            ConflictKind::Vertex { cell } => {
                [(a, Constraint::Vertex { cell, time: t }), (b, Constraint::Vertex { cell, time: t })]
            }
            ConflictKind::Edge { from, to } => [
                (a, Constraint::Edge { from, to, time: t }),
                (b, Constraint::Edge { from: to, to: from, time: t }),
            ],
        };
        for (agent, c) in split {
            let mut child = CbsNode {
                beta: nodes[id].beta.clone(),
                paths: nodes[id].paths.clone(),
                g: 0,
                conflict: None,
            };
            child.beta[agent] = child.beta[agent].with(c);
            if config.dedup && !seen.insert(child.beta.clone()) {
                continue;
            }
            match evaluate(&mut ctx, &mut child, Some(agent)) {
                Ok(()) => {}
                Err(e) if e.is_no_solution() => continue,
                Err(e) => return Err(e),
            }
            let entry = CbsEntry {
                g: child.g,
                constraints: child.beta.iter().map(|b| b.len()).sum(),
                seq: nodes.len(),
            };
            nodes.push(child);
            open.push(entry);
            stats.nodes_generated += 1;
        }
    }
    Err(Error::Infeasible("no collision-free paths for the fixed allocation".into()))
}

/// Greedy allocation followed by conflict-based search.
pub fn solve_greedy(problem: &Problem, config: &SolverConfig) -> Result<SolveOutcome> {
    let clock = Instant::now();
    let plan = greedy_assign(problem)?;
    let mut out = cbs_solve(problem, &plan, config)?;
    out.stats.wall_time = clock.elapsed();
    Ok(out)
}

/// Collision-blind optimal allocation followed by conflict-based search.
pub fn solve_decoupled(problem: &Problem, config: &SolverConfig) -> Result<SolveOutcome> {
    let clock = Instant::now();
    let (plan, _) = decoupled_assign(problem, DEFAULT_ENUMERATION_BUDGET)?;
    let mut out = cbs_solve(problem, &plan, config)?;
    out.stats.wall_time = clock.elapsed();
    Ok(out)
}
