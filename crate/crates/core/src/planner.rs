//! Single-agent planning in space-time under avoidance constraints.
//!
//! States are `(cell, next waypoint, time)`. The objective is the sum of the
//! arrival times at the *scored* waypoints (task goals); it is charged per
//! step as the number of scored waypoints still pending, which makes it
//! additive and lets a plain best-first search find the joint optimum over
//! all legs. Once every waypoint has been visited the agent must reach a cell
//! it can rest on for the rest of time without violating a vertex constraint;
//! those trailing steps cost nothing.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{manhattan, Cell, DistanceField, DistanceTable};

/// One avoidance entry for a single agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Constraint {
    /// The agent must not occupy `cell` at `time`.
    Vertex { cell: Cell, time: u32 },
    /// The agent must not move `from -> to` during step `time -> time + 1`.
    Edge { from: Cell, to: Cell, time: u32 },
}

impl Constraint {
    pub fn time(&self) -> u32 {
        match *self {
            Constraint::Vertex { time, .. } | Constraint::Edge { time, .. } => time,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Vertex { cell, time } => write!(f, "avoid {cell}@{time}"),
            Constraint::Edge { from, to, time } => write!(f, "avoid {from}->{to}@{time}"),
        }
    }
}

/// A cell the path must visit, in order. Scored waypoints contribute their
/// arrival time to the objective.
/// One agent's constraints, kept sorted and shared between search nodes so
/// that siblings only pay for the list they extend.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintSet(Arc<Vec<Constraint>>);

impl ConstraintSet {
    pub fn new(constraints: impl IntoIterator<Item = Constraint>) -> Self {
        let mut v: Vec<Constraint> = constraints.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        ConstraintSet(Arc::new(v))
    }

    /// A copy with `c` inserted in order.
    pub fn with(&self, c: Constraint) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        if let Err(at) = v.binary_search(&c) {
            v.insert(at, c);
        }
        ConstraintSet(Arc::new(v))
    }
}

impl std::ops::Deref for ConstraintSet {
    type Target = [Constraint];

    fn deref(&self) -> &[Constraint] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Waypoint {
    pub cell: Cell,
    pub scored: bool,
}

impl Waypoint {
    pub fn scored(cell: Cell) -> Self {
        Waypoint { cell, scored: true }
    }

    pub fn via(cell: Cell) -> Self {
        Waypoint { cell, scored: false }
    }
}

impl From<Cell> for Waypoint {
    fn from(cell: Cell) -> Self {
        Waypoint::via(cell)
    }
}

/// A time-indexed cell sequence; `cells[t]` is the position at time `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path {
    pub cells: Vec<Cell>,
    /// `(waypoint index, arrival time)` in visiting order.
    pub waypoint_arrivals: Vec<(usize, u32)>,
}

impl Path {
    pub fn stationary(cell: Cell) -> Self {
        Path { cells: vec![cell], waypoint_arrivals: Vec::new() }
    }

    pub fn final_time(&self) -> u32 {
        (self.cells.len() - 1) as u32
    }

    pub fn last(&self) -> Cell {
        *self.cells.last().expect("path has at least one cell")
    }

    /// Position at `t`; after the end the agent rests on its last cell.
    pub fn at(&self, t: u32) -> Cell {
        self.cells.get(t as usize).copied().unwrap_or_else(|| self.last())
    }

    pub fn arrival(&self, waypoint: usize) -> Option<u32> {
        self.waypoint_arrivals.iter().find(|&&(w, _)| w == waypoint).map(|&(_, t)| t)
    }
}

/// Extends every path with its final cell up to the longest one.
pub fn pad_paths(paths: &[Path]) -> Vec<Path> {
    let len = paths.iter().map(|p| p.cells.len()).max().unwrap_or(0);
    paths
        .iter()
        .map(|p| {
            let mut p = p.clone();
            let last = p.last();
            p.cells.resize(len, last);
            p
        })
        .collect()
}

/// Minimum-cost path from `start` through `waypoints` in order, honouring
/// every constraint. If no waypoint is scored the last one is, so a plain
/// list of cells yields the earliest arrival at the final waypoint.
pub fn plan_constrained(
    distances: &DistanceTable,
    start: Cell,
    waypoints: &[Waypoint],
    constraints: &[Constraint],
) -> Result<Path> {
    plan_with_stats(distances, start, waypoints, constraints).map(|(p, _)| p)
}

/// Like [`plan_constrained`], also returning the number of expanded states.
pub fn plan_with_stats(
    distances: &DistanceTable,
    start: Cell,
    waypoints: &[Waypoint],
    constraints: &[Constraint],
) -> Result<(Path, u64)> {
    let map = distances.map();
    map.require_free(start)?;
    let mut waypoints = waypoints.to_vec();
    if !waypoints.is_empty() && !waypoints.iter().any(|w| w.scored) {
        waypoints.last_mut().unwrap().scored = true;
    }

    let mut fields: Vec<Arc<DistanceField>> = Vec::with_capacity(waypoints.len());
    let mut legs = Vec::with_capacity(waypoints.len());
    let mut from = start;
    for w in &waypoints {
        let field = distances.field(w.cell)?;
        legs.push(field.get(map, from).ok_or(Error::Unreachable { from, to: w.cell })?);
        fields.push(field);
        from = w.cell;
    }

    // Heuristic parts: with the agent `d` moves from waypoint k, the remaining
    // cost is at least pending[k] * d + offset[k].
    let n = waypoints.len();
    let mut pending = vec![0u64; n + 1];
    let mut offset = vec![0u64; n + 1];
    for k in (0..n).rev() {
        let scored = u64::from(waypoints[k].scored);
        let next_leg = if k + 1 < n { u64::from(legs[k + 1]) } else { 0 };
        pending[k] = pending[k + 1] + scored;
        offset[k] = offset[k + 1] + pending[k + 1] * next_leg;
    }

    let vertex: HashSet<(Cell, u32)> = constraints
        .iter()
        .filter_map(|c| match *c {
            Constraint::Vertex { cell, time } => Some((cell, time)),
            _ => None,
        })
        .collect();
    let edge: HashSet<(Cell, Cell, u32)> = constraints
        .iter()
        .filter_map(|c| match *c {
            Constraint::Edge { from, to, time } => Some((from, to, time)),
            _ => None,
        })
        .collect();
    let mut last_block: HashMap<Cell, u32> = HashMap::new();
    for &(cell, time) in &vertex {
        let e = last_block.entry(cell).or_insert(time);
        *e = (*e).max(time);
    }

    let mut manhattan_legs = 0u32;
    let mut from = start;
    for w in &waypoints {
        manhattan_legs += manhattan(from, w.cell);
        from = w.cell;
    }
    let max_constraint_time = constraints.iter().map(Constraint::time).max().unwrap_or(0);
    let horizon = manhattan_legs
        + constraints.len() as u32
        + map.area() as u32
        + max_constraint_time;

    let advance = |cell: Cell, mut k: usize| {
        while k < n && waypoints[k].cell == cell {
            k += 1;
        }
        k
    };
    let heuristic = |cell: Cell, k: usize| -> u64 {
        if k == n {
            0
        } else {
            let d = fields[k].get(map, cell).map_or(u64::MAX / 4, u64::from);
            pending[k].saturating_mul(d).saturating_add(offset[k])
        }
    };

    if vertex.contains(&(start, 0)) {
        return Err(Error::Infeasible(format!("start {start} is blocked at time 0")));
    }

    struct Node {
        cell: Cell,
        k: usize,
        t: u32,
        g: u64,
        parent: Option<usize>,
    }
    #[derive(PartialEq, Eq)]
    struct Entry {
        f: u64,
        t: u32,
        y: u16,
        x: u16,
        seq: usize,
    }
    impl Ord for Entry {
        fn cmp(&self, o: &Self) -> Ordering {
            (self.f, self.t, self.y, self.x, self.seq).cmp(&(o.f, o.t, o.y, o.x, o.seq))
        }
    }
    impl PartialOrd for Entry {
        fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
            Some(self.cmp(o))
        }
    }

    let mut nodes = vec![Node { cell: start, k: advance(start, 0), t: 0, g: 0, parent: None }];
    let mut open = BinaryHeap::new();
    open.push(Reverse(Entry {
        f: heuristic(start, nodes[0].k),
        t: 0,
        y: start.y,
        x: start.x,
        seq: 0,
    }));
    let mut closed: HashSet<(Cell, usize, u32)> = HashSet::new();
    let mut expansions = 0u64;

    while let Some(Reverse(entry)) = open.pop() {
        let id = entry.seq;
        let (cell, k, t, g) = (nodes[id].cell, nodes[id].k, nodes[id].t, nodes[id].g);
        if !closed.insert((cell, k, t)) {
            continue;
        }
        if k == n && last_block.get(&cell).is_none_or(|&b| b < t) {
            return Ok((reconstruct(&nodes, id, &waypoints, |n| (n.cell, n.parent)), expansions));
        }
        expansions += 1;
        if t >= horizon {
            continue;
        }
        let step_cost = pending[k];
        for next in std::iter::once(cell).chain(map.free_neighbors(cell)) {
            let t1 = t + 1;
            if vertex.contains(&(next, t1)) || edge.contains(&(cell, next, t)) {
                continue;
            }
            let k1 = advance(next, k);
            if closed.contains(&(next, k1, t1)) {
                continue;
            }
            let h = heuristic(next, k1);
            let g1 = g + step_cost;
            let seq = nodes.len();
            nodes.push(Node { cell: next, k: k1, t: t1, g: g1, parent: Some(id) });
            open.push(Reverse(Entry { f: g1 + h, t: t1, y: next.y, x: next.x, seq }));
        }
    }

    Err(Error::Infeasible(format!(
        "no path from {start} through {n} waypoint(s) within horizon {horizon} under {} constraint(s)",
        constraints.len()
    )))
}

fn reconstruct<N>(
    nodes: &[N],
    mut id: usize,
    waypoints: &[Waypoint],
    link: impl Fn(&N) -> (Cell, Option<usize>),
) -> Path {
    let mut cells = Vec::new();
    loop {
        let (cell, parent) = link(&nodes[id]);
        cells.push(cell);
        match parent {
            Some(p) => id = p,
            None => break,
        }
    }
    cells.reverse();
    let mut waypoint_arrivals = Vec::with_capacity(waypoints.len());
    let mut k = 0;
    for (t, &cell) in cells.iter().enumerate() {
        while k < waypoints.len() && waypoints[k].cell == cell {
            waypoint_arrivals.push((k, t as u32));
            k += 1;
        }
    }
    Path { cells, waypoint_arrivals }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::parse_map;

    fn c(x: u16, y: u16) -> Cell {
        Cell::new(x, y)
    }

    fn table(text: &str) -> DistanceTable {
        DistanceTable::new(parse_map(text).unwrap())
    }

    /// Earliest arrival at `goal` by exhaustive enumeration of every
    /// wait/move sequence up to `horizon` steps (only end-of-search resting
    /// is ignored, which these fixtures never exercise).
    fn brute_force_arrival(
        t: &DistanceTable,
        start: Cell,
        goal: Cell,
        cons: &[Constraint],
        horizon: u32,
    ) -> Option<u32> {
        let mut frontier = vec![start];
        if start == goal {
            return Some(0);
        }
        for time in 0..horizon {
            let mut next = Vec::new();
            for &cell in &frontier {
                let mut moves = vec![cell];
                moves.extend(t.map().neighbors(cell).unwrap());
                for m in moves {
                    let blocked = cons.iter().any(|k| match *k {
                        Constraint::Vertex { cell: vc, time: vt } => vc == m && vt == time + 1,
                        Constraint::Edge { from, to, time: et } => {
                            from == cell && to == m && et == time
                        }
                    });
                    if !blocked {
                        next.push(m);
                    }
                }
            }
            next.sort();
            next.dedup();
            if next.contains(&goal) {
                return Some(time + 1);
            }
            frontier = next;
        }
        None
    }

    #[test]
    fn two_waypoints_on_open_map() {
        let t = table("...\n...\n...");
        let p = plan_constrained(&t, c(0, 0), &[c(2, 0).into(), c(2, 2).into()], &[]).unwrap();
        assert_eq!(p.waypoint_arrivals, vec![(0, 2), (1, 4)]);
        assert_eq!(p.cells.len(), 5);
        assert_eq!(p.last(), c(2, 2));
    }

    #[test]
    fn vertex_constraint_forces_wait() {
        let t = table("...");
        let cons = [Constraint::Vertex { cell: c(1, 0), time: 1 }];
        let expected = brute_force_arrival(&t, c(0, 0), c(2, 0), &cons, 6).unwrap();
        assert_eq!(expected, 3);
        let p = plan_constrained(&t, c(0, 0), &[c(2, 0).into()], &cons).unwrap();
        assert_eq!(p.arrival(0), Some(expected));
        assert_eq!(p.cells, vec![c(0, 0), c(0, 0), c(1, 0), c(2, 0)]);
    }

    #[test]
    fn idle_agent_stays_put() {
        let t = table("...\n...\n...");
        let p = plan_constrained(&t, c(1, 1), &[], &[]).unwrap();
        assert_eq!(p.cells, vec![c(1, 1)]);
        assert_eq!(p.final_time(), 0);
    }

    #[test]
    fn idle_agent_dodges_vertex_constraint() {
        let t = table("...\n...\n...");
        let cons = [Constraint::Vertex { cell: c(1, 1), time: 2 }];
        let p = plan_constrained(&t, c(1, 1), &[], &cons).unwrap();
        // Steps aside once and rests there; `at` clamps to the resting cell.
        assert_ne!(p.at(2), c(1, 1));
        assert_eq!(p.cells.len(), 2);
    }

    #[test]
    fn edge_constraint_is_directional() {
        let t = table("...");
        let cons = [Constraint::Edge { from: c(0, 0), to: c(1, 0), time: 0 }];
        let p = plan_constrained(&t, c(0, 0), &[c(2, 0).into()], &cons).unwrap();
        assert_eq!(p.arrival(0), Some(3));
        assert_eq!(brute_force_arrival(&t, c(0, 0), c(2, 0), &cons, 6), Some(3));
        let rev = [Constraint::Edge { from: c(1, 0), to: c(0, 0), time: 0 }];
        let p = plan_constrained(&t, c(0, 0), &[c(2, 0).into()], &rev).unwrap();
        assert_eq!(p.arrival(0), Some(2));
    }

    #[test]
    fn constraint_after_arrival_moves_rested_agent() {
        let t = table("...\n...");
        let cons = [Constraint::Vertex { cell: c(2, 0), time: 5 }];
        let p = plan_constrained(&t, c(0, 0), &[Waypoint::scored(c(2, 0))], &cons).unwrap();
        // Task completes on first arrival; the agent then steps off for good.
        assert_eq!(p.arrival(0), Some(2));
        assert_ne!(p.at(5), c(2, 0));
    }

    #[test]
    fn errors() {
        let t = table(".#.\n.#.\n.#.");
        assert_eq!(
            plan_constrained(&t, c(0, 0), &[c(2, 0).into()], &[]),
            Err(Error::Unreachable { from: c(0, 0), to: c(2, 0) })
        );
        assert_eq!(plan_constrained(&t, c(1, 0), &[], &[]), Err(Error::Domain(c(1, 0))));
        let boxed = table(".");
        let cons = [Constraint::Vertex { cell: c(0, 0), time: 3 }];
        assert!(matches!(plan_constrained(&boxed, c(0, 0), &[], &cons), Err(Error::Infeasible(_))));
    }

    #[test]
    fn repeated_waypoint_cells_arrive_together() {
        let t = table("....");
        let p = plan_constrained(
            &t,
            c(0, 0),
            &[Waypoint::via(c(2, 0)), Waypoint::scored(c(3, 0)), Waypoint::via(c(3, 0)), Waypoint::scored(c(1, 0))],
            &[],
        )
        .unwrap();
        assert_eq!(p.waypoint_arrivals, vec![(0, 2), (1, 3), (2, 3), (3, 5)]);
    }

    #[test]
    fn sum_objective_not_final_arrival() {
        // Scoring both goals: the first goal must not be delayed to help the
        // second one.
        let t = table(".....");
        let p = plan_constrained(
            &t,
            c(0, 0),
            &[Waypoint::via(c(1, 0)), Waypoint::scored(c(2, 0)), Waypoint::via(c(3, 0)), Waypoint::scored(c(4, 0))],
            &[],
        )
        .unwrap();
        assert_eq!(p.arrival(1), Some(2));
        assert_eq!(p.arrival(3), Some(4));
    }

    #[test]
    fn padding() {
        let a = Path { cells: vec![c(0, 0), c(1, 0), c(2, 0)], waypoint_arrivals: vec![(0, 2)] };
        let b = Path {
            cells: vec![c(0, 1), c(1, 1), c(2, 1), c(3, 1), c(4, 1)],
            waypoint_arrivals: vec![],
        };
        let padded = pad_paths(&[a.clone(), b.clone()]);
        assert_eq!(padded[0].cells, vec![c(0, 0), c(1, 0), c(2, 0), c(2, 0), c(2, 0)]);
        assert_eq!(padded[0].waypoint_arrivals, a.waypoint_arrivals);
        assert_eq!(padded[1], b);
        assert_eq!(pad_paths(std::slice::from_ref(&a)), vec![a.clone()]);
        let a2 = Path { cells: vec![c(0, 0); 4], waypoint_arrivals: vec![] };
        assert_eq!(pad_paths(&[a2.clone(), a2.clone()]), vec![a2.clone(), a2]);
    }
}
