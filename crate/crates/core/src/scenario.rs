//! Random scenario generation and the scenario / solution JSON formats.
//!
//! Scenario: `{"map": {"width", "height", "obstacles": [[x,y],..]},
//! "agents": [[x,y],..], "tasks": [{"start": [x,y], "goal": [x,y]},..]}`,
//! optionally with `"initial_assignments": [[task,..],..]`.
//!
//! Solution: `{"paths": [[[x,y],..],..], "task_completion": [..],
//! "total_cost": n}`, optionally with `"assignments": [[task,..],..]`.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, DistanceTable, GridMap};
use crate::model::{Problem, Solution, Task};
use crate::planner::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub seed: u64,
    pub width: u16,
    pub height: u16,
    pub obstacle_density: f64,
    pub n_agents: usize,
    pub m_tasks: usize,
}

impl ScenarioSpec {
    /// Obstacle count: `floor(width * height * density)`. The tiny epsilon
    /// keeps products like `100 * 0.29` from rounding down past an integer.
    pub fn obstacle_count(&self) -> usize {
        let area = f64::from(self.width) * f64::from(self.height);
        (area * self.obstacle_density + 1e-9).floor() as usize
    }

    fn check(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.obstacle_density) {
            return Err(Error::Generation(format!("density {} not in [0, 1)", self.obstacle_density)));
        }
        if self.width == 0 || self.height == 0 || self.n_agents == 0 || self.m_tasks == 0 {
            return Err(Error::Generation("need a non-empty map, agents and tasks".into()));
        }
        let area = usize::from(self.width) * usize::from(self.height);
        let needed = self.n_agents + 2 * self.m_tasks;
        if area - self.obstacle_count() < needed {
            return Err(Error::Generation(format!(
                "{} free cells cannot hold {needed} distinct agent and task cells",
                area - self.obstacle_count()
            )));
        }
        Ok(())
    }
}

pub const MAX_GENERATION_ATTEMPTS: u64 = 1000;

/// Deterministic random instance: obstacles sampled without replacement, then
/// distinct free cells for agent starts, task starts and task goals. Attempts
/// whose cells are not mutually reachable are redrawn from the next stream of
/// the seeded generator.
pub fn gen_scenario(spec: &ScenarioSpec) -> Result<Problem> {
    spec.check()?;
    let area = usize::from(spec.width) * usize::from(spec.height);
    let needed = spec.n_agents + 2 * spec.m_tasks;
    for attempt in 0..MAX_GENERATION_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(attempt);
        let obstacles: Vec<usize> = sample(&mut rng, area, spec.obstacle_count()).into_vec();
        let width = usize::from(spec.width);
        let to_cell = |i: usize| Cell::new((i % width) as u16, (i / width) as u16);
        let map = GridMap::new(spec.width, spec.height, obstacles.iter().map(|&i| to_cell(i)))?;
        let free: Vec<Cell> = map.free_cells().collect();
        let picked: Vec<Cell> = sample(&mut rng, free.len(), needed).into_iter().map(|i| free[i]).collect();

        let distances = DistanceTable::new(map.clone());
        let anchor = distances.field(picked[0])?;
        if picked.iter().any(|&c| anchor.get(&map, c).is_none()) {
            continue;
        }
        let agents = picked[..spec.n_agents].to_vec();
        let starts = &picked[spec.n_agents..spec.n_agents + spec.m_tasks];
        let goals = &picked[spec.n_agents + spec.m_tasks..];
        let tasks = starts.iter().zip(goals).map(|(&s, &g)| Task::new(s, g)).collect();
        return Problem::new(map, agents, tasks);
    }
    Err(Error::Generation(format!(
        "no mutually reachable placement after {MAX_GENERATION_ATTEMPTS} attempts"
    )))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MapJson {
    width: u16,
    height: u16,
    obstacles: Vec<Cell>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScenarioJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    map: Option<MapJson>,
    agents: Vec<Cell>,
    tasks: Vec<Task>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    initial_assignments: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SolutionJson {
    paths: Vec<Vec<Cell>>,
    task_completion: Vec<u32>,
    total_cost: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    assignments: Vec<Vec<usize>>,
}

pub fn problem_to_json(problem: &Problem) -> String {
    let dto = ScenarioJson {
        map: Some(MapJson {
            width: problem.map.width(),
            height: problem.map.height(),
            obstacles: problem.map.obstacles().collect(),
        }),
        agents: problem.agents.clone(),
        tasks: problem.tasks.clone(),
        initial_assignments: problem.initial_assignments.clone(),
    };
    let mut s = serde_json::to_string_pretty(&dto).expect("scenario serializes");
    s.push('\n');
    s
}

/// Parses a scenario. `map_override` (e.g. from a map text file) replaces
/// the embedded map, which may then be omitted.
pub fn problem_from_json(text: &str, map_override: Option<GridMap>) -> Result<Problem> {
    let dto: ScenarioJson = serde_json::from_str(text)?;
    let map = match (map_override, dto.map) {
        (Some(m), _) => m,
        (None, Some(m)) => GridMap::new(m.width, m.height, m.obstacles)?,
        (None, None) => return Err(Error::Format("scenario has no map".into())),
    };
    Problem::with_initial_assignments(map, dto.agents, dto.tasks, dto.initial_assignments)
        .map_err(|e| match e {
            Error::Contract(msg) => Error::Format(msg),
            Error::Domain(c) => Error::Format(format!("cell {c} is blocked or outside the map")),
            other => other,
        })
}

pub fn solution_to_json(solution: &Solution) -> String {
    let dto = SolutionJson {
        paths: solution.paths.iter().map(|p| p.cells.clone()).collect(),
        task_completion: solution.task_completion.clone(),
        total_cost: solution.total_cost,
        assignments: solution.assignments.clone(),
    };
    let mut s = serde_json::to_string(&dto).expect("solution serializes");
    s.push('\n');
    s
}

pub fn solution_from_json(text: &str) -> Result<Solution> {
    let dto: SolutionJson = serde_json::from_str(text)?;
    let horizon = dto.paths.iter().map(|p| p.len().saturating_sub(1)).max().unwrap_or(0) as u32;
    Ok(Solution {
        paths: dto.paths.into_iter().map(|cells| Path { cells, waypoint_arrivals: Vec::new() }).collect(),
        task_completion: dto.task_completion,
        total_cost: dto.total_cost,
        horizon,
        assignments: dto.assignments,
    })
}
