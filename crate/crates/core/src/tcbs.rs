//! Task conflict-based search.
//!
//! A best-first search over a tree whose nodes fix, per agent, an ordered
//! task list (`tau`) and a list of avoidance constraints (`beta`). A node
//! without collisions is expanded by appending one unassigned task to one
//! agent; a node with a collision is expanded by forbidding the colliding
//! cell or move for each of the two agents involved. The cost of a node is
//! the sum of task completion times under its single-agent paths, and the
//! heuristic adds an optimistic per-task estimate for every unassigned task,
//! so the first goal node popped is optimal.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::grid::DistanceTable;
use crate::model::{first_conflict, Conflict, ConflictKind, Problem, Solution};
use crate::planner::{plan_with_stats, Constraint, ConstraintSet, Path, Waypoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Optimal,
    /// Keep only the `nn_k` best assignment children per expansion and
    /// inflate the heuristic by `h_weight`.
    NearestNeighbor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mode: Mode,
    pub nn_k: usize,
    pub h_weight: f64,
    /// Maximum number of high-level expansions.
    pub node_budget: u64,
    pub time_limit: Option<Duration>,
    /// Expand identical `(tau, beta)` nodes only once.
    pub dedup: bool,
}

impl SolverConfig {
    pub fn optimal() -> Self {
        SolverConfig {
            mode: Mode::Optimal,
            nn_k: 2,
            h_weight: 1.0,
            node_budget: 2_000_000,
            time_limit: None,
            dedup: true,
        }
    }

    pub fn nn2() -> Self {
        SolverConfig { mode: Mode::NearestNeighbor, h_weight: 1.2, ..Self::optimal() }
    }

    fn check(&self) -> Result<()> {
        if self.nn_k == 0 || self.h_weight.is_nan() || self.h_weight < 1.0 {
            return Err(Error::Contract(format!(
                "need nn_k >= 1 and h_weight >= 1, got {} and {}",
                self.nn_k, self.h_weight
            )));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::optimal()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub nodes_generated: u64,
    pub low_level_expansions: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct SearchNode {
    pub tau: Vec<Vec<usize>>,
    pub beta: Vec<ConstraintSet>,
    pub g_cost: u64,
    pub h_cost: u64,
    pub first_conflict: Option<Conflict>,
    /// Per-agent paths realizing `(tau, beta)`; empty until evaluated.
    pub paths: Vec<Arc<Path>>,
    pub parent: Option<usize>,
    /// Agent whose path no longer matches `(tau, beta)`.
    stale: Option<usize>,
    /// `(agent, task)` appended by the assignment expansion that made this node.
    added: Option<(usize, usize)>,
}

impl SearchNode {
    pub fn root(problem: &Problem) -> Self {
        SearchNode {
            tau: problem.initial_tau(),
            beta: vec![ConstraintSet::default(); problem.n_agents()],
            g_cost: 0,
            h_cost: 0,
            first_conflict: None,
            paths: Vec::new(),
            parent: None,
            stale: None,
            added: None,
        }
    }

    pub fn unassigned(&self, n_tasks: usize) -> Vec<usize> {
        let mut assigned = vec![false; n_tasks];
        for &t in self.tau.iter().flatten() {
            assigned[t] = true;
        }
        (0..n_tasks).filter(|&t| !assigned[t]).collect()
    }

    pub fn constraint_count(&self) -> usize {
        self.beta.iter().map(|b| b.len()).sum()
    }

    fn key(&self) -> (Vec<Vec<usize>>, Vec<ConstraintSet>) {
        (self.tau.clone(), self.beta.clone())
    }

    fn child(&self, parent: Option<usize>, agent: usize) -> Self {
        SearchNode {
            tau: self.tau.clone(),
            beta: self.beta.clone(),
            g_cost: 0,
            h_cost: 0,
            first_conflict: None,
            paths: self.paths.clone(),
            parent,
            stale: Some(agent),
            added: None,
        }
    }
}

/// Per-search planning state: the distance memo and a cache of constrained
/// single-agent plans.
pub struct SearchContext<'a> {
    problem: &'a Problem,
    distances: DistanceTable,
    cache: HashMap<(usize, Vec<usize>, ConstraintSet), Result<Arc<Path>>>,
    pub low_level_expansions: u64,
}

impl<'a> SearchContext<'a> {
    /// Warms the distance memo for every task cell, so distance estimates
    /// between agents and task endpoints are exact from the first node on.
    pub fn new(problem: &'a Problem) -> Result<Self> {
        let distances = DistanceTable::new(problem.map.clone());
        for t in &problem.tasks {
            distances.field(t.start)?;
            distances.field(t.goal)?;
        }
        Ok(SearchContext { problem, distances, cache: HashMap::new(), low_level_expansions: 0 })
    }

    pub fn problem(&self) -> &'a Problem {
        self.problem
    }

    pub fn distances(&self) -> &DistanceTable {
        &self.distances
    }

    /// Fails with an infeasibility error if some task cannot be carried out
    /// by any agent at all.
    pub fn check_reachability(&self) -> Result<()> {
        let p = self.problem;
        for (i, t) in p.tasks.iter().enumerate() {
            let from_agent = p.agents.iter().any(|&a| self.distances.true_distance(a, t.start).is_ok());
            if !from_agent || self.distances.true_distance(t.start, t.goal).is_err() {
                return Err(Error::Infeasible(format!("task {i} cannot be reached or delivered")));
            }
        }
        Ok(())
    }

    /// Optimal path for `agent` through its tasks in order under `beta`.
    pub fn plan_agent(&mut self, agent: usize, tau: &[usize], beta: &ConstraintSet) -> Result<Arc<Path>> {
        let key = (agent, tau.to_vec(), beta.clone());
        if let Some(hit) = self.cache.get(&key) {
            return hit.clone();
        }
        let waypoints: Vec<Waypoint> = tau
            .iter()
            .flat_map(|&i| {
                let t = self.problem.tasks[i];
                [Waypoint::via(t.start), Waypoint::scored(t.goal)]
            })
            .collect();
        let result = plan_with_stats(&self.distances, self.problem.agents[agent], &waypoints, &key.2)
            .map(|(path, expanded)| {
                self.low_level_expansions += expanded;
                Arc::new(path)
            });
        self.cache.insert(key, result.clone());
        result
    }
}

/// Sum of the scored (goal) arrival times on one agent's path.
pub(crate) fn path_cost(path: &Path) -> u64 {
    path.waypoint_arrivals
        .iter()
        .filter(|(w, _)| w % 2 == 1)
        .map(|&(_, t)| u64::from(t))
        .sum()
}

/// Children of an evaluated node: one per colliding agent if the node has a
/// conflict, otherwise one per (unassigned task, agent) pair. Children are
/// not evaluated.
pub fn expand(node: &SearchNode, problem: &Problem) -> Vec<SearchNode> {
    expand_from(node, None, problem)
}

fn expand_from(node: &SearchNode, id: Option<usize>, problem: &Problem) -> Vec<SearchNode> {
    if let Some(conflict) = node.first_conflict {
        let (a, b) = conflict.agents;
        let t = conflict.time;
        let (ca, cb) = match conflict.kind {
            ConflictKind::Vertex { cell } => {
                (Constraint::Vertex { cell, time: t }, Constraint::Vertex { cell, time: t })
            }
            ConflictKind::Edge { from, to } => (
                Constraint::Edge { from, to, time: t },
                Constraint::Edge { from: to, to: from, time: t },
            ),
        };
        return [(a, ca), (b, cb)]
            .into_iter()
            .map(|(agent, c)| {
                let mut child = node.child(id, agent);
                child.beta[agent] = child.beta[agent].with(c);
                child
            })
            .collect();
    }
    let mut children = Vec::new();
    for task in node.unassigned(problem.n_tasks()) {
        for agent in 0..problem.n_agents() {
            let mut child = node.child(id, agent);
            child.tau[agent].push(task);
            child.added = Some((agent, task));
            children.push(child);
        }
    }
    children
}

pub fn goal_test(node: &SearchNode, problem: &Problem) -> bool {
    node.first_conflict.is_none() && node.unassigned(problem.n_tasks()).is_empty()
}

/// Optimistic cost of the unassigned tasks: for each, the distance from the
/// nearest position an agent could take it up from (an agent's current end
/// position or any other task's goal) to its start, plus its own length.
pub fn heuristic(node: &SearchNode, problem: &Problem, distances: &DistanceTable) -> u64 {
    let unassigned = node.unassigned(problem.n_tasks());
    if unassigned.is_empty() {
        return 0;
    }
    let ends: Vec<_> = node
        .tau
        .iter()
        .zip(&problem.agents)
        .map(|(tau, &start)| tau.last().map_or(start, |&t| problem.tasks[t].goal))
        .collect();
    unassigned
        .into_iter()
        .map(|t| {
            let task = problem.tasks[t];
            let from_agents = ends.iter().map(|&e| distances.estimate(e, task.start));
            let from_tasks = problem
                .tasks
                .iter()
                .enumerate()
                .filter(|&(o, _)| o != t)
                .map(|(_, o)| distances.estimate(o.goal, task.start));
            let approach = from_agents.chain(from_tasks).min().unwrap_or(0);
            u64::from(approach) + u64::from(distances.estimate(task.start, task.goal))
        })
        .sum()
}

/// Plans the paths a node's `(tau, beta)` calls for, then records its cost and
/// earliest conflict. Only the stale agent is replanned when the node has a
/// parent's paths. Infeasible plans propagate as errors.
pub fn evaluate(node: &mut SearchNode, ctx: &mut SearchContext<'_>) -> Result<()> {
    let n = ctx.problem().n_agents();
    if node.paths.len() != n {
        node.paths = (0..n)
            .map(|j| ctx.plan_agent(j, &node.tau[j], &node.beta[j]))
            .collect::<Result<_>>()?;
    } else if let Some(j) = node.stale {
        node.paths[j] = ctx.plan_agent(j, &node.tau[j], &node.beta[j])?;
    }
    node.stale = None;
    node.g_cost = node.paths.iter().map(|p| path_cost(p)).sum();
    let refs: Vec<&Path> = node.paths.iter().map(|p| p.as_ref()).collect();
    node.first_conflict = first_conflict(&refs);
    Ok(())
}

/// The `k` children with the smallest `g + h`, ties broken by the (agent,
/// task) pair each child added.
pub fn prune_assignments(children: Vec<SearchNode>, k: usize) -> Vec<SearchNode> {
    let mut keyed: Vec<_> = children
        .into_iter()
        .map(|c| ((c.g_cost + c.h_cost, c.added.unwrap_or((usize::MAX, usize::MAX))), c))
        .collect();
    keyed.sort_by_key(|a| a.0);
    keyed.into_iter().take(k).map(|(_, c)| c).collect()
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub solution: Solution,
    pub stats: SearchStats,
}

struct OpenEntry {
    f: f64,
    h: u64,
    constraints: usize,
    seq: u64,
    id: usize,
}

impl OpenEntry {
    fn order(&self, o: &Self) -> Ordering {
        self.f
            .total_cmp(&o.f)
            .then(self.h.cmp(&o.h))
            .then(self.constraints.cmp(&o.constraints))
            .then(self.seq.cmp(&o.seq))
    }
}

impl PartialEq for OpenEntry {
    fn eq(&self, o: &Self) -> bool {
        self.order(o) == Ordering::Equal
    }
}
impl Eq for OpenEntry {}
impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for OpenEntry {
    fn cmp(&self, o: &Self) -> Ordering {
        // BinaryHeap is a max-heap.
        o.order(self)
    }
}

/// Best-first search over assignments and avoidance constraints.
pub fn solve(problem: &Problem, config: &SolverConfig) -> Result<SolveOutcome> {
    config.check()?;
    let clock = Instant::now();
    let mut ctx = SearchContext::new(problem)?;
    ctx.check_reachability()?;
    let mut stats = SearchStats::default();

    let mut root = SearchNode::root(problem);
    evaluate(&mut root, &mut ctx)?;
    root.h_cost = heuristic(&root, problem, ctx.distances());

    let weight = match config.mode {
        Mode::Optimal => 1.0,
        Mode::NearestNeighbor => config.h_weight,
    };
    let mut arena: Vec<SearchNode> = Vec::new();
    let mut open = BinaryHeap::new();
    let mut seen: HashSet<(Vec<Vec<usize>>, Vec<ConstraintSet>)> = HashSet::new();
    let mut seq = 0u64;
    let mut push = |node: SearchNode, arena: &mut Vec<SearchNode>, open: &mut BinaryHeap<OpenEntry>| {
        let entry = OpenEntry {
            f: node.g_cost as f64 + weight * node.h_cost as f64,
            h: node.h_cost,
            constraints: node.constraint_count(),
            seq,
            id: arena.len(),
        };
        seq += 1;
        arena.push(node);
        open.push(entry);
    };
    if config.dedup {
        seen.insert(root.key());
    }
    push(root, &mut arena, &mut open);
    stats.nodes_generated = 1;

    while let Some(entry) = open.pop() {
        let id = entry.id;
        if goal_test(&arena[id], problem) {
            let node = &arena[id];
            let paths: Vec<Path> = node.paths.iter().map(|p| Path::clone(p)).collect();
            let solution = Solution::from_assigned_paths(&paths, &problem.tasks, node.tau.clone())?;
            stats.low_level_expansions = ctx.low_level_expansions;
            stats.wall_time = clock.elapsed();
            return Ok(SolveOutcome { solution, stats });
        }
        if stats.nodes_expanded >= config.node_budget {
            return Err(Error::Budget(format!("{} high-level expansions", config.node_budget)));
        }
        if config.time_limit.is_some_and(|limit| clock.elapsed() > limit) {
            return Err(Error::Budget(format!("time limit {:?}", config.time_limit.unwrap())));
        }
        stats.nodes_expanded += 1;

        let resolving = arena[id].first_conflict.is_some();
        let mut children = Vec::new();
        for mut child in expand_from(&arena[id], Some(id), problem) {
            if config.dedup && seen.contains(&child.key()) {
                continue;
            }
            match evaluate(&mut child, &mut ctx) {
                Ok(()) => {}
                Err(e) if e.is_no_solution() => continue,
                Err(e) => return Err(e),
            }
            child.h_cost = heuristic(&child, problem, ctx.distances());
            children.push(child);
        }
        if config.mode == Mode::NearestNeighbor && !resolving {
            children = prune_assignments(children, config.nn_k);
        }
        for child in children {
            if config.dedup && !seen.insert(child.key()) {
                continue;
            }
            stats.nodes_generated += 1;
            push(child, &mut arena, &mut open);
        }
    }
    Err(Error::Infeasible("search tree exhausted without a collision-free assignment".into()))
}
