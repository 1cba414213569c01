//! The roadmap: a 4-connected occupancy grid with unit-cost moves, plus a
//! memoized shortest-distance table over it.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A grid cell. `x` is the column, `y` the row (row 0 is the first text line).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[u16; 2]", into = "[u16; 2]")]
pub struct Cell {
    pub x: u16,
    pub y: u16,
}

impl Cell {
    pub const fn new(x: u16, y: u16) -> Self {
        Cell { x, y }
    }
}

impl From<[u16; 2]> for Cell {
    fn from([x, y]: [u16; 2]) -> Self {
        Cell { x, y }
    }
}

impl From<Cell> for [u16; 2] {
    fn from(c: Cell) -> Self {
        [c.x, c.y]
    }
}

impl From<(u16, u16)> for Cell {
    fn from((x, y): (u16, u16)) -> Self {
        Cell { x, y }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Number of moves between two cells ignoring obstacles.
pub fn manhattan(a: Cell, b: Cell) -> u32 {
    u32::from(a.x.abs_diff(b.x)) + u32::from(a.y.abs_diff(b.y))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap {
    width: u16,
    height: u16,
    blocked: Vec<bool>,
}

impl GridMap {
    /// Builds a map from explicit obstacles. At least one cell must stay free.
    pub fn new(width: u16, height: u16, obstacles: impl IntoIterator<Item = Cell>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Format(format!("map must be non-empty, got {width}x{height}")));
        }
        let mut blocked = vec![false; usize::from(width) * usize::from(height)];
        for c in obstacles {
            if c.x >= width || c.y >= height {
                return Err(Error::Format(format!("obstacle {c} outside {width}x{height} map")));
            }
            blocked[usize::from(c.y) * usize::from(width) + usize::from(c.x)] = true;
        }
        if blocked.iter().all(|&b| b) {
            return Err(Error::Format("map has no free cells".into()));
        }
        Ok(GridMap { width, height, blocked })
    }

    pub fn width(&self) -> u16 {
        self.width
    }

    pub fn height(&self) -> u16 {
        self.height
    }

    pub fn area(&self) -> usize {
        self.blocked.len()
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    /// Dense row-major index of an in-bounds cell.
    pub fn index(&self, c: Cell) -> usize {
        usize::from(c.y) * usize::from(self.width) + usize::from(c.x)
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        let w = usize::from(self.width);
        Cell::new((index % w) as u16, (index / w) as u16)
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.in_bounds(c) && !self.blocked[self.index(c)]
    }

    pub fn obstacles(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.blocked.len()).filter(|&i| self.blocked[i]).map(|i| self.cell_at(i))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.blocked.len()).filter(|&i| !self.blocked[i]).map(|i| self.cell_at(i))
    }

    pub fn require_free(&self, c: Cell) -> Result<()> {
        if self.is_free(c) {
            Ok(())
        } else {
            Err(Error::Domain(c))
        }
    }

    /// Free N/E/S/W neighbours of a free cell, in that order. Never includes
    /// `c` itself.
    pub fn neighbors(&self, c: Cell) -> Result<Vec<Cell>> {
        self.require_free(c)?;
        Ok(self.free_neighbors(c).collect())
    }

    /// Unchecked variant of [`GridMap::neighbors`] for hot loops; `c` must be
    /// in bounds.
    pub(crate) fn free_neighbors(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        let Cell { x, y } = c;
        let north = y.checked_sub(1).map(|y| Cell::new(x, y));
        let east = (x + 1 < self.width).then(|| Cell::new(x + 1, y));
        let south = (y + 1 < self.height).then(|| Cell::new(x, y + 1));
        let west = x.checked_sub(1).map(|x| Cell::new(x, y));
        [north, east, south, west]
            .into_iter()
            .flatten()
            .filter(move |&n| !self.blocked[self.index(n)])
    }

    /// Renders the map in the text format accepted by [`parse_map`].
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.blocked.len() + usize::from(self.height));
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(if self.blocked[self.index(Cell::new(x, y))] { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }
}

/// Parses rows of `.` (free) and `#` (obstacle). The first line is row 0.
/// A single trailing newline is allowed; blank interior lines are not.
pub fn parse_map(text: &str) -> Result<GridMap> {
    let text = text.strip_suffix('\n').unwrap_or(text);
    let text = text.strip_suffix('\r').unwrap_or(text);
    if text.is_empty() {
        return Err(Error::Format("empty map text".into()));
    }
    let rows: Vec<&str> = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
    let width = rows[0].chars().count();
    if width == 0 {
        return Err(Error::Format("map row 0 is empty".into()));
    }
    let too_big = |n: usize| n > usize::from(u16::MAX);
    if too_big(width) || too_big(rows.len()) {
        return Err(Error::Format("map dimensions exceed 65535".into()));
    }
    let mut obstacles = Vec::new();
    for (y, row) in rows.iter().enumerate() {
        if row.chars().count() != width {
            return Err(Error::Format(format!(
                "ragged map: row {y} has {} cells, expected {width}",
                row.chars().count()
            )));
        }
        for (x, ch) in row.chars().enumerate() {
            match ch {
                '.' => {}
                '#' => obstacles.push(Cell::new(x as u16, y as u16)),
                other => {
                    return Err(Error::Format(format!("illegal map character {other:?} at ({x},{y})")))
                }
            }
        }
    }
    GridMap::new(width as u16, rows.len() as u16, obstacles)
}

/// Breadth-first distances from one source to every cell of a map.
#[derive(Debug, Clone)]
pub struct DistanceField {
    dist: Vec<u32>,
}

impl DistanceField {
    pub const UNREACHABLE: u32 = u32::MAX;

    fn compute(map: &GridMap, source: Cell) -> Self {
        let mut dist = vec![Self::UNREACHABLE; map.area()];
        let mut queue = VecDeque::new();
        dist[map.index(source)] = 0;
        queue.push_back(source);
        while let Some(c) = queue.pop_front() {
            let d = dist[map.index(c)] + 1;
            for n in map.free_neighbors(c) {
                let slot = &mut dist[map.index(n)];
                if *slot == Self::UNREACHABLE {
                    *slot = d;
                    queue.push_back(n);
                }
            }
        }
        DistanceField { dist }
    }

    /// `None` when `c` cannot reach the field's source.
    pub fn get(&self, map: &GridMap, c: Cell) -> Option<u32> {
        let d = self.dist[map.index(c)];
        (d != Self::UNREACHABLE).then_some(d)
    }
}

/// Memoized obstacle-aware shortest distances for one map.
///
/// Distances are stored as whole breadth-first fields per source cell, so a
/// memo hit for `(a, b)` exists as soon as either endpoint has been used as a
/// source. Readers share the table; inserting a field takes the write lock.
#[derive(Debug)]
pub struct DistanceTable {
    map: GridMap,
    fields: RwLock<HashMap<Cell, Arc<DistanceField>>>,
}

impl DistanceTable {
    pub fn new(map: GridMap) -> Self {
        DistanceTable { map, fields: RwLock::new(HashMap::new()) }
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    fn cached(&self, c: Cell) -> Option<Arc<DistanceField>> {
        self.fields.read().expect("distance memo poisoned").get(&c).cloned()
    }

    /// Distance field towards (equivalently from) `source`, computing and
    /// memoizing it on first use.
    pub fn field(&self, source: Cell) -> Result<Arc<DistanceField>> {
        self.map.require_free(source)?;
        if let Some(f) = self.cached(source) {
            return Ok(f);
        }
        let field = Arc::new(DistanceField::compute(&self.map, source));
        let mut fields = self.fields.write().expect("distance memo poisoned");
        Ok(fields.entry(source).or_insert(field).clone())
    }

    /// Length of the shortest obstacle-respecting path between two free cells.
    pub fn true_distance(&self, a: Cell, b: Cell) -> Result<u32> {
        self.map.require_free(a)?;
        self.map.require_free(b)?;
        let field = match self.cached(a) {
            Some(f) => return f.get(&self.map, b).ok_or(Error::Unreachable { from: a, to: b }),
            None => self.field(b)?,
        };
        field.get(&self.map, a).ok_or(Error::Unreachable { from: a, to: b })
    }

    /// The memoized true distance if either endpoint's field is cached,
    /// otherwise the Manhattan distance. Never exceeds the true distance.
    pub fn estimate(&self, a: Cell, b: Cell) -> u32 {
        let memo = self.cached(b).map(|f| (f, a)).or_else(|| self.cached(a).map(|f| (f, b)));
        match memo.and_then(|(f, other)| f.get(&self.map, other)) {
            Some(d) => d,
            None => manhattan(a, b),
        }
    }

    pub fn is_memoized(&self, a: Cell, b: Cell) -> bool {
        self.cached(a).is_some() || self.cached(b).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: u16, y: u16) -> Cell {
        Cell::new(x, y)
    }

    fn sorted(mut v: Vec<Cell>) -> Vec<Cell> {
        v.sort();
        v
    }

    #[test]
    fn parses_free_map() {
        let m = parse_map("...\n...\n...").unwrap();
        assert_eq!((m.width(), m.height()), (3, 3));
        assert_eq!(m.obstacles().count(), 0);
    }

    #[test]
    fn parses_obstacle_at_row_zero() {
        let m = parse_map(".#.\n...\n...").unwrap();
        assert_eq!(m.obstacles().collect::<Vec<_>>(), vec![c(1, 0)]);
    }

    #[test]
    fn parsing_is_deterministic() {
        assert_eq!(parse_map("..\n..").unwrap(), parse_map("..\n..").unwrap());
        assert_eq!(parse_map("..\n..\n").unwrap(), parse_map("..\n..").unwrap());
    }

    #[test]
    fn parse_rejects_bad_input() {
        assert!(matches!(parse_map(""), Err(Error::Format(_))));
        assert!(matches!(parse_map("..\n..."), Err(Error::Format(_))));
        assert!(matches!(parse_map(".x\n.."), Err(Error::Format(_))));
        assert!(matches!(parse_map("##\n##"), Err(Error::Format(_))));
    }

    #[test]
    fn text_round_trip() {
        let text = ".#..\n....\n##.#\n";
        assert_eq!(parse_map(text).unwrap().to_text(), text);
    }

    #[test]
    fn neighbors_interior_corner_and_blocked() {
        let open = parse_map("...\n...\n...").unwrap();
        assert_eq!(
            sorted(open.neighbors(c(1, 1)).unwrap()),
            sorted(vec![c(0, 1), c(2, 1), c(1, 0), c(1, 2)])
        );
        assert_eq!(sorted(open.neighbors(c(0, 0)).unwrap()), sorted(vec![c(1, 0), c(0, 1)]));
        let walled = parse_map(".#.\n...\n...").unwrap();
        assert_eq!(walled.neighbors(c(0, 0)).unwrap(), vec![c(0, 1)]);
    }

    #[test]
    fn neighbors_of_obstacle_or_outside_is_domain_error() {
        let m = parse_map(".#.\n...\n...").unwrap();
        assert_eq!(m.neighbors(c(1, 0)), Err(Error::Domain(c(1, 0))));
        assert_eq!(m.neighbors(c(3, 0)), Err(Error::Domain(c(3, 0))));
    }

    #[test]
    fn manhattan_examples() {
        assert_eq!(manhattan(c(0, 0), c(2, 3)), 5);
        assert_eq!(manhattan(c(1, 1), c(1, 1)), 0);
        assert_eq!(manhattan(c(2, 0), c(0, 2)), 4);
    }

    #[test]
    fn true_distance_examples() {
        let open = DistanceTable::new(parse_map("...\n...\n...").unwrap());
        assert_eq!(open.true_distance(c(0, 0), c(2, 2)), Ok(4));
        // Hand enumeration: (1,0)->(0,0)->(0,1)->(0,2)->(1,2), the pillar
        // at (1,1) forbids the straight 2-step route.
        let pillar = DistanceTable::new(parse_map("...\n.#.\n...").unwrap());
        assert_eq!(pillar.true_distance(c(1, 0), c(1, 2)), Ok(4));
        let wall = DistanceTable::new(parse_map("#..\n#..\n...").unwrap());
        assert_eq!(wall.true_distance(c(1, 0), c(1, 0)), Ok(0));
    }

    #[test]
    fn true_distance_unreachable_and_memo() {
        let t = DistanceTable::new(parse_map(".#.\n.#.\n.#.").unwrap());
        assert_eq!(
            t.true_distance(c(0, 0), c(2, 2)),
            Err(Error::Unreachable { from: c(0, 0), to: c(2, 2) })
        );
        let t = DistanceTable::new(parse_map("....\n.##.\n....").unwrap());
        assert!(!t.is_memoized(c(0, 0), c(3, 2)));
        assert_eq!(t.estimate(c(1, 0), c(1, 2)), 2);
        assert_eq!(t.true_distance(c(1, 0), c(1, 2)), Ok(4));
        assert!(t.is_memoized(c(1, 0), c(1, 2)));
        assert_eq!(t.estimate(c(1, 0), c(1, 2)), 4);
        assert_eq!(t.estimate(c(1, 2), c(1, 0)), 4);
    }
}
