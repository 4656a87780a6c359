//! Procedural indoor rooms.
//!
//! A room is the rectangle `[0, width] x [0, height]` of free floor,
//! surrounded by four wall slabs of [`WALL_THICKNESS`] placed just outside
//! it, and populated with axis-aligned rectangular obstacles. Obstacles are
//! placed by rejection sampling from the seeded ChaCha8 stream
//! [`crate::rng::streams::WORLD`].

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::geometry::{Rect, Vec2};
use crate::rng;
use crate::{Error, Result};

pub const WALL_THICKNESS: f64 = 0.1;
pub const TRUTH_CELL: f64 = 0.05;
/// Total number of rejected placements before generation gives up.
pub const PLACEMENT_BUDGET: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldSpec {
    pub seed: u64,
    pub width: f64,
    pub height: f64,
    pub min_obstacles: u32,
    pub max_obstacles: u32,
    pub min_obstacle_size: f64,
    pub max_obstacle_size: f64,
    pub min_clearance: f64,
}

impl Default for WorldSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            width: 8.0,
            height: 6.0,
            min_obstacles: 4,
            max_obstacles: 10,
            min_obstacle_size: 0.3,
            max_obstacle_size: 1.5,
            min_clearance: 0.4,
        }
    }
}

impl WorldSpec {
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(format!("world spec: {m}")));
        if !(self.width.is_finite() && self.height.is_finite()) {
            return bad("non-finite room size");
        }
        if self.min_clearance < 0.0 || !self.min_clearance.is_finite() {
            return bad("min_clearance must be >= 0");
        }
        if self.width <= 2.0 * self.min_clearance || self.height <= 2.0 * self.min_clearance {
            return bad("room must be wider and taller than twice min_clearance");
        }
        if self.min_obstacles > self.max_obstacles {
            return bad("empty obstacle count range");
        }
        if !(self.min_obstacle_size > 0.0 && self.min_obstacle_size <= self.max_obstacle_size) {
            return bad("obstacle size range must be positive and non-empty");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Obstacle {
    pub id: u32,
    pub rect: Rect,
}

/// Which kind of solid a point or ray touches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolidKind {
    Wall,
    Obstacle,
}

/// Boolean raster; `true` = occupied. Row `r` spans
/// `[origin.y + r*cell, origin.y + (r+1)*cell)`, column `c` likewise in x.
#[derive(Debug, Clone, PartialEq)]
pub struct BoolRaster {
    pub origin: Vec2,
    pub cell: f64,
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<bool>,
}

impl BoolRaster {
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col]
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + (col as f64 + 0.5) * self.cell,
            self.origin.y + (row as f64 + 0.5) * self.cell,
        )
    }

    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let c = ((p.x - self.origin.x) / self.cell).floor();
        let r = ((p.y - self.origin.y) / self.cell).floor();
        if c < 0.0 || r < 0.0 || c >= self.cols as f64 || r >= self.rows as f64 {
            return None;
        }
        Some((r as usize, c as usize))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloorPlan {
    pub seed: u64,
    /// Free interior of the room.
    pub boundary: Rect,
    pub walls: [Rect; 4],
    pub obstacles: Vec<Obstacle>,
    /// Fine raster covering the room plus its walls.
    pub truth_grid: BoolRaster,
}

/// Number of cells needed to cover `extent`, treating near-integer ratios as
/// exact so that 8.0 / 0.2 gives 40 rather than 41.
pub fn cells_for(extent: f64, cell: f64) -> usize {
    let ratio = extent / cell;
    let rounded = ratio.round();
    if (ratio - rounded).abs() < 1e-9 {
        rounded as usize
    } else {
        ratio.ceil() as usize
    }
}

impl FloorPlan {
    /// Assemble a plan from explicit geometry and rasterize it.
    pub fn from_parts(seed: u64, boundary: Rect, obstacles: Vec<Obstacle>) -> Result<Self> {
        if !(boundary.width() > 0.0 && boundary.height() > 0.0) {
            return Err(Error::InvalidArgument("empty room boundary".into()));
        }
        let mut ids = BTreeSet::new();
        for o in &obstacles {
            if !boundary.encloses_strict(&o.rect) {
                return Err(Error::InvalidArgument(format!(
                    "obstacle {} is not strictly inside the room",
                    o.id
                )));
            }
            if !ids.insert(o.id) {
                return Err(Error::InvalidArgument(format!("duplicate obstacle id {}", o.id)));
            }
        }
        let t = WALL_THICKNESS;
        let b = boundary;
        let walls = [
            Rect::new(b.min_x - t, b.min_y - t, b.max_x + t, b.min_y),
            Rect::new(b.min_x - t, b.max_y, b.max_x + t, b.max_y + t),
            Rect::new(b.min_x - t, b.min_y, b.min_x, b.max_y),
            Rect::new(b.max_x, b.min_y, b.max_x + t, b.max_y),
        ];
        let mut plan = FloorPlan {
            seed,
            boundary,
            walls,
            obstacles,
            truth_grid: BoolRaster {
                origin: Vec2::default(),
                cell: TRUTH_CELL,
                rows: 0,
                cols: 0,
                cells: Vec::new(),
            },
        };
        let outer = Rect::new(b.min_x - t, b.min_y - t, b.max_x + t, b.max_y + t);
        plan.truth_grid = plan.rasterize(outer, TRUTH_CELL);
        Ok(plan)
    }

    pub fn solids(&self) -> impl Iterator<Item = (SolidKind, &Rect)> {
        self.walls
            .iter()
            .map(|w| (SolidKind::Wall, w))
            .chain(self.obstacles.iter().map(|o| (SolidKind::Obstacle, &o.rect)))
    }

    /// Point covered by a wall or obstacle (closed rectangles).
    pub fn is_solid(&self, p: Vec2) -> bool {
        self.solids().any(|(_, r)| r.contains(p))
    }

    /// Point is inside the room and not covered by any solid.
    pub fn is_free(&self, p: Vec2) -> bool {
        self.boundary.contains(p) && !self.is_solid(p)
    }

    /// Rasterize `area` at `cell` resolution: a cell is occupied iff its
    /// center is covered by a solid.
    pub fn rasterize(&self, area: Rect, cell: f64) -> BoolRaster {
        let cols = cells_for(area.width(), cell);
        let rows = cells_for(area.height(), cell);
        let mut r = BoolRaster {
            origin: Vec2::new(area.min_x, area.min_y),
            cell,
            rows,
            cols,
            cells: vec![false; rows * cols],
        };
        for row in 0..rows {
            for col in 0..cols {
                let c = r.cell_center(row, col);
                r.cells[row * cols + col] = self.is_solid(c);
            }
        }
        r
    }

    /// Raster of the room interior only, as used for navigation grids.
    pub fn interior_raster(&self, cell: f64) -> BoolRaster {
        self.rasterize(self.boundary, cell)
    }

    /// Human-readable description used for replay.
    pub fn to_description(&self) -> String {
        let b = &self.boundary;
        let mut s = String::from("# occnav floor plan\n");
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "boundary = {} {} {} {}", b.min_x, b.min_y, b.max_x, b.max_y);
        let _ = writeln!(s, "wall_thickness = {WALL_THICKNESS}");
        let _ = writeln!(s, "truth_cell = {TRUTH_CELL}");
        for o in &self.obstacles {
            let r = &o.rect;
            let _ = writeln!(s, "obstacle = {} {} {} {} {}", o.id, r.min_x, r.min_y, r.max_x, r.max_y);
        }
        s
    }

    pub fn from_description(text: &str) -> Result<Self> {
        let mut seed = None;
        let mut boundary = None;
        let mut obstacles = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |m: &str| Error::Format(format!("floor plan line {}: {m}", lineno + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key = value"))?;
            let nums = |n: usize| -> Result<Vec<f64>> {
                let v: Vec<f64> = value
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|_| err("bad number")))
                    .collect::<Result<_>>()?;
                if v.len() != n {
                    return Err(err(&format!("expected {n} numbers")));
                }
                Ok(v)
            };
            match key.trim() {
                "seed" => seed = Some(value.trim().parse::<u64>().map_err(|_| err("bad seed"))?),
                "boundary" => {
                    let v = nums(4)?;
                    boundary = Some(Rect::new(v[0], v[1], v[2], v[3]));
                }
                "wall_thickness" => {
                    if nums(1)?[0] != WALL_THICKNESS {
                        return Err(err("unsupported wall thickness"));
                    }
                }
                "truth_cell" => {
                    if nums(1)?[0] != TRUTH_CELL {
                        return Err(err("unsupported truth cell"));
                    }
                }
                "obstacle" => {
                    let v = nums(5)?;
                    if v[0] < 0.0 || v[0].fract() != 0.0 {
                        return Err(err("bad obstacle id"));
                    }
                    obstacles.push(Obstacle {
                        id: v[0] as u32,
                        rect: Rect::new(v[1], v[2], v[3], v[4]),
                    });
                }
                other => return Err(err(&format!("unknown key {other:?}"))),
            }
        }
        let seed = seed.ok_or_else(|| Error::Format("floor plan: missing seed".into()))?;
        let boundary = boundary.ok_or_else(|| Error::Format("floor plan: missing boundary".into()))?;
        Self::from_parts(seed, boundary, obstacles)
    }
}

pub fn generate_world(spec: &WorldSpec) -> Result<FloorPlan> {
    spec.validate()?;
    let mut rng = rng::seeded(spec.seed, rng::streams::WORLD);
    let target = rng.random_range(spec.min_obstacles..=spec.max_obstacles) as usize;
    let clear = spec.min_clearance;
    let mut obstacles: Vec<Obstacle> = Vec::with_capacity(target);
    let mut failures = 0usize;
    while obstacles.len() < target {
        let w = rng.random_range(spec.min_obstacle_size..=spec.max_obstacle_size);
        let h = rng.random_range(spec.min_obstacle_size..=spec.max_obstacle_size);
        let x_hi = spec.width - clear - w;
        let y_hi = spec.height - clear - h;
        let placed = if x_hi > clear && y_hi > clear {
            let x = rng.random_range(clear..x_hi);
            let y = rng.random_range(clear..y_hi);
            let rect = Rect::new(x, y, x + w, y + h);
            let ok = obstacles.iter().all(|o| o.rect.gap(&rect) >= clear);
            ok.then_some(rect)
        } else {
            None
        };
        match placed {
            Some(rect) => obstacles.push(Obstacle {
                id: obstacles.len() as u32,
                rect,
            }),
            None => {
                failures += 1;
                if failures >= PLACEMENT_BUDGET {
                    return Err(Error::WorldGeneration { attempts: failures });
                }
            }
        }
    }
    FloorPlan::from_parts(spec.seed, Rect::new(0.0, 0.0, spec.width, spec.height), obstacles)
}

/// 4-connected flood fill of free interior cells at `cell_size`, starting
/// from the cell that contains `start`. Cells are `(row, col)`.
pub fn reachable_cells(plan: &FloorPlan, cell_size: f64, start: Vec2) -> Result<BTreeSet<(usize, usize)>> {
    if !(cell_size > 0.0) {
        return Err(Error::InvalidArgument("cell size must be positive".into()));
    }
    let raster = plan.interior_raster(cell_size);
    let (r0, c0) = raster
        .cell_of(start)
        .ok_or(Error::PoseInSolid { x: start.x, y: start.y })?;
    if plan.is_solid(start) || raster.get(r0, c0) {
        return Err(Error::PoseInSolid { x: start.x, y: start.y });
    }
    Ok(flood_fill(&raster, (r0, c0)))
}

pub(crate) fn flood_fill(raster: &BoolRaster, start: (usize, usize)) -> BTreeSet<(usize, usize)> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([start]);
    seen.insert(start);
    while let Some((r, c)) = queue.pop_front() {
        let mut visit = |nr: usize, nc: usize| {
            if !raster.get(nr, nc) && seen.insert((nr, nc)) {
                queue.push_back((nr, nc));
            }
        };
        if r > 0 {
            visit(r - 1, c);
        }
        if r + 1 < raster.rows {
            visit(r + 1, c);
        }
        if c > 0 {
            visit(r, c - 1);
        }
        if c + 1 < raster.cols {
            visit(r, c + 1);
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_obstacles_only_walls() {
        let spec = WorldSpec {
            seed: 3,
            min_obstacles: 0,
            max_obstacles: 0,
            ..WorldSpec::default()
        };
        let plan = generate_world(&spec).unwrap();
        assert!(plan.obstacles.is_empty());
        let g = &plan.truth_grid;
        for r in 0..g.rows {
            for c in 0..g.cols {
                let on_wall = r < 2 || c < 2 || r >= g.rows - 2 || c >= g.cols - 2;
                assert_eq!(g.get(r, c), on_wall, "cell {r},{c}");
            }
        }
    }

    #[test]
    fn deterministic() {
        let spec = WorldSpec { seed: 42, ..WorldSpec::default() };
        let a = generate_world(&spec).unwrap();
        let b = generate_world(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.truth_grid.cells, b.truth_grid.cells);
    }

    #[test]
    fn seed_one_respects_count_and_clearance() {
        let spec = WorldSpec { seed: 1, ..WorldSpec::default() };
        let plan = generate_world(&spec).unwrap();
        let n = plan.obstacles.len();
        assert!((4..=10).contains(&n));
        // brute-force pairwise check using corner/edge distances
        for (i, a) in plan.obstacles.iter().enumerate() {
            for b in &plan.obstacles[i + 1..] {
                let dx = (b.rect.min_x - a.rect.max_x).max(a.rect.min_x - b.rect.max_x);
                let dy = (b.rect.min_y - a.rect.max_y).max(a.rect.min_y - b.rect.max_y);
                let d = if dx > 0.0 && dy > 0.0 {
                    (dx * dx + dy * dy).sqrt()
                } else {
                    dx.max(dy)
                };
                assert!(d >= 0.4, "obstacles {} and {} are {d} apart", a.id, b.id);
            }
            assert!(a.rect.min_x >= 0.4 && a.rect.min_y >= 0.4);
            assert!(a.rect.max_x <= 8.0 - 0.4 && a.rect.max_y <= 6.0 - 0.4);
        }
    }

    #[test]
    fn impossible_spec_fails_with_budget() {
        let spec = WorldSpec {
            width: 1.0,
            height: 1.0,
            min_obstacles: 3,
            max_obstacles: 3,
            min_obstacle_size: 0.9,
            max_obstacle_size: 0.9,
            min_clearance: 0.1,
            ..WorldSpec::default()
        };
        match generate_world(&spec) {
            Err(Error::WorldGeneration { attempts }) => assert_eq!(attempts, PLACEMENT_BUDGET),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let spec = WorldSpec { width: 0.5, ..WorldSpec::default() };
        assert!(matches!(generate_world(&spec), Err(Error::Config(_))));
        let spec = WorldSpec { min_obstacles: 5, max_obstacles: 2, ..WorldSpec::default() };
        assert!(matches!(generate_world(&spec), Err(Error::Config(_))));
    }

    #[test]
    fn description_round_trip() {
        let plan = generate_world(&WorldSpec { seed: 9, ..WorldSpec::default() }).unwrap();
        let text = plan.to_description();
        let back = FloorPlan::from_description(&text).unwrap();
        assert_eq!(plan, back);
        assert!(FloorPlan::from_description("seed = 1\n").is_err());
        assert!(FloorPlan::from_description("seed = 1\nboundary = 0 0 2 2\nbogus = 1\n").is_err());
    }

    #[test]
    fn reachable_in_empty_room_is_everything() {
        let plan = FloorPlan::from_parts(0, Rect::new(0.0, 0.0, 2.0, 2.0), vec![]).unwrap();
        let cells = reachable_cells(&plan, 0.2, Vec2::new(1.0, 1.0)).unwrap();
        assert_eq!(cells.len(), 100);
    }

    #[test]
    fn reachable_respects_dividing_wall() {
        let wall = Obstacle { id: 0, rect: Rect::new(0.85, 0.01, 1.15, 1.99) };
        // strictly inside the room; the slivers at both ends contain no cell center
        let plan = FloorPlan::from_parts(0, Rect::new(0.0, 0.0, 2.0, 2.0), vec![wall]).unwrap();
        let cells = reachable_cells(&plan, 0.2, Vec2::new(0.3, 1.0)).unwrap();
        assert_eq!(cells.len(), 40);
        assert!(cells.iter().all(|&(_, c)| c < 4));
    }

    #[test]
    fn reachable_start_in_obstacle_errors() {
        let o = Obstacle { id: 0, rect: Rect::new(0.5, 0.5, 1.5, 1.5) };
        let plan = FloorPlan::from_parts(0, Rect::new(0.0, 0.0, 2.0, 2.0), vec![o]).unwrap();
        assert!(matches!(
            reachable_cells(&plan, 0.2, Vec2::new(1.0, 1.0)),
            Err(Error::PoseInSolid { .. })
        ));
    }

    #[test]
    fn cells_for_handles_float_ratios() {
        assert_eq!(cells_for(8.0, 0.2), 40);
        assert_eq!(cells_for(6.0, 0.2), 30);
        assert_eq!(cells_for(8.2, 0.05), 164);
        assert_eq!(cells_for(1.05, 0.2), 6);
    }
}
