use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::{build_costmap, compute_speed, plan, update_global, CostMapConfig, GlobalMap, NavConfig};
use crate::geometry::{normalize_angle, Vec2};
use crate::models::{predict_inpaint, Predictor};
use crate::occupancy::{
    fuse3, logodds_to_prob, observe, rig_poses, CameraRig, CellState, GridSpec, LogOddsGrid, OccupancyConfig,
};
use crate::rng::{seeded, streams};
use crate::sensor::{CameraIntrinsics, Pose2D};
use crate::worldgen::{reachable_cells, FloorPlan};
use crate::{Error, Result};

/// Resampling budget per episode when drawing specs.
const SPEC_ATTEMPTS: usize = 1000;
/// Spacing of collision samples along a move.
const SWEEP_STEP: f64 = 0.01;
/// Distance from a cell center below which the robot counts as centered.
const CENTER_EPS: f64 = 1e-9;

/// Every setting an episode depends on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NavContext {
    pub nav: NavConfig,
    pub costmap: CostMapConfig,
    pub occ: OccupancyConfig,
    /// Local map geometry; must match the predictor's training grid.
    pub grid: GridSpec,
    pub intr: CameraIntrinsics,
    pub rig: CameraRig,
}

impl NavContext {
    pub fn validate(&self) -> Result<()> {
        self.nav.validate()?;
        self.costmap.validate()?;
        self.occ.validate()?;
        self.grid.validate()?;
        self.intr.validate()?;
        self.rig.validate()
    }
}

#[derive(Clone, Copy)]
pub enum NavMethod<'a> {
    /// Center camera only, no prediction.
    Normal,
    /// All three rig cameras fused per step.
    GroundTruth3Cam,
    /// Center camera with the inpainted map feeding the predicted layer.
    Predicted { name: &'a str, predictor: &'a dyn Predictor },
}

impl NavMethod<'_> {
    pub fn name(&self) -> &str {
        match self {
            NavMethod::Normal => "normal",
            NavMethod::GroundTruth3Cam => "ground-truth",
            NavMethod::Predicted { name, .. } => name,
        }
    }
}

enum Mode<'a> {
    Sense(NavMethod<'a>),
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSpec {
    pub index: usize,
    pub world: u64,
    pub src: Vec2,
    pub dst: Vec2,
    pub yaw: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Reached,
    StepBudget,
    Error,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Reached => "reached",
            Termination::StepBudget => "step_budget",
            Termination::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Run {
    termination: Termination,
    duration: f64,
    actions: usize,
    trajectory: Vec<Pose2D>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub spec: EpisodeSpec,
    pub method: String,
    pub success: bool,
    /// Seconds taken by the method.
    pub duration: f64,
    /// Seconds taken by the full-knowledge run; `None` when even that run
    /// misses the goal.
    pub reference: Option<f64>,
    pub actions: usize,
    pub termination: Termination,
    pub trajectory: Vec<Pose2D>,
}

impl EpisodeResult {
    /// One JSON object on a single line.
    pub fn to_json_line(&self) -> String {
        let s = &self.spec;
        let traj: Vec<[f64; 3]> = self.trajectory.iter().map(|p| [p.x, p.y, p.yaw]).collect();
        json!({
            "index": s.index,
            "world": s.world,
            "method": self.method,
            "src": [s.src.x, s.src.y],
            "dst": [s.dst.x, s.dst.y],
            "yaw": s.yaw,
            "seed": s.seed,
            "success": self.success,
            "duration": self.duration,
            "reference": self.reference,
            "actions": self.actions,
            "termination": self.termination.as_str(),
            "trajectory": traj,
        })
        .to_string()
    }
}

fn chebyshev(a: (usize, usize), b: (usize, usize)) -> usize {
    a.0.abs_diff(b.0).max(a.1.abs_diff(b.1))
}

/// Log-odds view of one camera, or an empty grid when the camera position
/// is not free.
fn observe_or_empty(plan: &FloorPlan, camera: Pose2D, robot: Pose2D, ctx: &NavContext) -> Result<LogOddsGrid> {
    let p = camera.position();
    if !plan.boundary.contains_strict(p) || plan.is_solid(p) {
        return Ok(LogOddsGrid::unknown(ctx.grid));
    }
    observe(plan, camera, robot, &ctx.intr, &ctx.grid, &ctx.occ)
}

fn sense(g: &mut GlobalMap, plan: &FloorPlan, pose: Pose2D, method: NavMethod<'_>, ctx: &NavContext) -> Result<()> {
    let center = observe(plan, pose, pose, &ctx.intr, &ctx.grid, &ctx.occ)?;
    let (obs, inpainted) = match method {
        NavMethod::Normal => {
            let p = logodds_to_prob(&center);
            (center, p)
        }
        NavMethod::GroundTruth3Cam => {
            let (_, l, r) = rig_poses(pose, &ctx.rig);
            let ol = observe_or_empty(plan, l, pose, ctx)?;
            let or = observe_or_empty(plan, r, pose, ctx)?;
            let fused = fuse3(&center, &ol, &or)?;
            let p = logodds_to_prob(&fused);
            (fused, p)
        }
        NavMethod::Predicted { predictor, .. } => {
            let p = predict_inpaint(predictor, &logodds_to_prob(&center), &ctx.occ)?;
            (center, p)
        }
    };
    update_global(g, &obs, &inpainted, pose, &ctx.occ)
}

/// Distance from `origin` to the first solid along `dir`.
fn free_distance(plan: &FloorPlan, origin: Vec2, dir: Vec2) -> f64 {
    let dir = dir * (1.0 / dir.norm());
    plan.solids()
        .filter_map(|(_, r)| r.ray_entry(origin, dir))
        .fold(f64::INFINITY, f64::min)
}

/// True when any point of the straight move hits a solid or leaves the room.
fn move_collides(plan: &FloorPlan, from: Vec2, to: Vec2) -> bool {
    let d = from.dist(to);
    let n = (d / SWEEP_STEP).ceil().max(1.0) as usize;
    (1..=n).any(|k| {
        let p = from + (to - from) * (k as f64 / n as f64);
        !plan.boundary.contains(p) || plan.is_solid(p)
    })
}

fn simulate(plan: &FloorPlan, spec: &EpisodeSpec, mode: Mode<'_>, ctx: &NavContext) -> Result<Run> {
    let nav = &ctx.nav;
    let mut g = match mode {
        Mode::Reference => GlobalMap::from_truth(plan, nav.cell, &ctx.occ),
        Mode::Sense(_) => GlobalMap::unknown(plan, nav.cell),
    };
    let outside = |p: Vec2| Error::InvalidArgument(format!("({:.3}, {:.3}) is outside the room", p.x, p.y));
    let dst_cell = g.cell_of(spec.dst).ok_or_else(|| outside(spec.dst))?;
    if plan.is_solid(spec.src) || g.cell_of(spec.src).is_none() {
        return Err(Error::PoseInSolid { x: spec.src.x, y: spec.src.y });
    }
    let tol = nav.los_tolerance_deg.to_radians();
    let omega = nav.omega_max_deg.to_radians();
    let mut pose = Pose2D::new(spec.src.x, spec.src.y, spec.yaw);
    let mut run = Run {
        termination: Termination::StepBudget,
        duration: 0.0,
        actions: 0,
        trajectory: vec![pose],
    };
    // cells the depth guard refused; they stay occupied whatever sensing says
    let mut blocked = vec![false; g.len()];
    let mut waypoint: Option<(usize, usize)> = None;
    let occupied = |g: &GlobalMap, (r, c): (usize, usize)| g.observed_state(r * g.cols + c, &ctx.occ) == CellState::Occupied;
    loop {
        let cell = g.cell_of(pose.position()).ok_or_else(|| outside(pose.position()))?;
        if chebyshev(cell, dst_cell) <= 1 {
            run.termination = Termination::Reached;
            break;
        }
        if run.actions >= nav.s_max {
            run.termination = Termination::StepBudget;
            break;
        }
        if let Mode::Sense(method) = mode {
            sense(&mut g, plan, pose, method, ctx)?;
            for (v, _) in g.observed.iter_mut().zip(&blocked).filter(|(_, b)| **b) {
                *v = ctx.occ.max_logodds();
            }
        }
        let cost = build_costmap(&g, &ctx.costmap, &ctx.occ);
        let path = plan_path(&cost, cell, dst_cell)?;
        // the robot keeps the waypoint it turned toward until it stands on
        // that cell's center, unless the waypoint turned out to be occupied
        let centered = g.cell_center(cell.0, cell.1).dist(pose.position()) <= CENTER_EPS;
        waypoint = waypoint.filter(|&w| if w == cell { !centered } else { !occupied(&g, w) });
        let next = *waypoint.get_or_insert(path[1]);
        let ahead = if next == path[1] { &path[1..] } else { std::slice::from_ref(&next) };
        let target = g.cell_center(next.0, next.1);
        let delta = target - pose.position();
        let bearing = delta.y.atan2(delta.x);
        let turn = normalize_angle(bearing - pose.yaw);
        run.actions += 1;
        if turn.abs() > tol {
            run.duration += turn.abs() / omega;
            pose = Pose2D::new(pose.x, pose.y, bearing);
            run.trajectory.push(pose);
            continue;
        }
        let step = nav.move_step.min(delta.norm());
        let end = pose.position() + delta * (step / delta.norm());
        let end_cell = g.cell_of(end).unwrap_or(next);
        if [next, end_cell].iter().any(|&c| c != cell && occupied(&g, c)) {
            // wait in place; the action still counts against the budget
            waypoint = None;
            run.trajectory.push(pose);
            continue;
        }
        if !matches!(mode, Mode::Reference) && free_distance(plan, pose.position(), delta) < delta.norm() {
            // the depth reading along the heading shows the waypoint is out of reach
            let i = next.0 * g.cols + next.1;
            blocked[i] = true;
            g.observed[i] = ctx.occ.max_logodds();
            run.trajectory.push(pose);
            continue;
        }
        if move_collides(plan, pose.position(), end) {
            run.termination = Termination::Error;
            break;
        }
        let look = nav.lookahead_cells.min(ahead.len());
        let v = compute_speed(&ahead[..look], &g, nav, &ctx.occ);
        run.duration += step / v;
        pose = Pose2D::new(end.x, end.y, bearing);
        run.trajectory.push(pose);
    }
    Ok(run)
}

fn plan_path(cost: &super::CostGrid, from: (usize, usize), to: (usize, usize)) -> Result<Vec<(usize, usize)>> {
    let p = plan(cost, from, to)?.ok_or_else(|| Error::Numeric("planner found no path".into()))?;
    Ok(p.cells)
}

/// Duration of the full-knowledge run, or `None` when it does not reach the
/// goal.
pub fn reference_duration(plan: &FloorPlan, spec: &EpisodeSpec, ctx: &NavContext) -> Result<Option<f64>> {
    let run = simulate(plan, spec, Mode::Reference, ctx)?;
    Ok((run.termination == Termination::Reached).then_some(run.duration))
}

pub fn run_episode(
    plan: &FloorPlan,
    spec: &EpisodeSpec,
    method: NavMethod<'_>,
    ctx: &NavContext,
) -> Result<EpisodeResult> {
    if plan.seed != spec.world {
        return Err(Error::InvalidArgument(format!(
            "episode {} belongs to world {}, got world {}",
            spec.index, spec.world, plan.seed
        )));
    }
    let reference = reference_duration(plan, spec, ctx)?;
    let run = simulate(plan, spec, Mode::Sense(method), ctx)?;
    Ok(EpisodeResult {
        spec: *spec,
        method: method.name().to_string(),
        success: run.termination == Termination::Reached && run.actions <= ctx.nav.s_max,
        duration: run.duration,
        reference,
        actions: run.actions,
        termination: run.termination,
        trajectory: run.trajectory,
    })
}

/// Draw `n` episodes spread round-robin over `worlds`. Starts and goals
/// are centers of free navigation cells in one connected region, at least
/// `min_goal_distance` apart, and the full-knowledge run must succeed.
pub fn generate_specs(worlds: &[FloorPlan], n: usize, seed: u64, ctx: &NavContext) -> Result<Vec<EpisodeSpec>> {
    ctx.validate()?;
    if worlds.is_empty() {
        return Err(Error::InvalidArgument("no worlds to run episodes in".into()));
    }
    let mut rng = seeded(seed, streams::EPISODES);
    let mut specs = Vec::with_capacity(n);
    for index in 0..n {
        let plan = &worlds[index % worlds.len()];
        let g = GlobalMap::unknown(plan, ctx.nav.cell);
        let raster = plan.interior_raster(ctx.nav.cell);
        let free: Vec<(usize, usize)> = (0..g.rows)
            .flat_map(|r| (0..g.cols).map(move |c| (r, c)))
            .filter(|&(r, c)| !raster.get(r, c))
            .collect();
        if free.is_empty() {
            return Err(Error::InvalidArgument(format!("world {} has no free cells", plan.seed)));
        }
        let mut accepted = None;
        for _ in 0..SPEC_ATTEMPTS {
            let (sr, sc) = free[rng.random_range(0..free.len())];
            let src = g.cell_center(sr, sc);
            let reach: Vec<(usize, usize)> = reachable_cells(plan, ctx.nav.cell, src)?
                .into_iter()
                .filter(|&(r, c)| g.cell_center(r, c).dist(src) >= ctx.nav.min_goal_distance)
                .collect();
            let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            if reach.is_empty() {
                continue;
            }
            let (dr, dc) = reach[rng.random_range(0..reach.len())];
            let spec = EpisodeSpec {
                index,
                world: plan.seed,
                src,
                dst: g.cell_center(dr, dc),
                yaw: normalize_angle(yaw),
                seed,
            };
            if reference_duration(plan, &spec, ctx)?.is_some() {
                accepted = Some(spec);
                break;
            }
        }
        specs.push(accepted.ok_or_else(|| {
            Error::InvalidArgument(format!("could not draw a feasible episode {index} in world {}", plan.seed))
        })?);
    }
    Ok(specs)
}

/// `(1/N) * sum S_i * l_i / max(p_i, l_i)`; `None` for no episodes. An
/// episode without a reference duration contributes 0.
pub fn spd(results: &[EpisodeResult]) -> Option<f64> {
    if results.is_empty() {
        return None;
    }
    let total: f64 = results
        .iter()
        .map(|r| {
            let Some(l) = r.reference.filter(|_| r.success) else {
                return 0.0;
            };
            let denom = r.duration.max(l);
            if denom > 0.0 {
                l / denom
            } else {
                1.0
            }
        })
        .sum();
    Some(total / results.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub method: String,
    pub episodes: Vec<EpisodeResult>,
    pub spd: Option<f64>,
    pub success_rate: Option<f64>,
}

impl SuiteResult {
    pub fn log_lines(&self) -> String {
        let mut s = String::new();
        for e in &self.episodes {
            s.push_str(&e.to_json_line());
            s.push('\n');
        }
        s
    }
}

/// Run every spec with one method. Episodes run in parallel; results keep
/// spec order.
pub fn run_suite(
    worlds: &[FloorPlan],
    specs: &[EpisodeSpec],
    method: NavMethod<'_>,
    ctx: &NavContext,
) -> Result<SuiteResult> {
    ctx.validate()?;
    let episodes = specs
        .par_iter()
        .map(|spec| {
            let plan = worlds
                .iter()
                .find(|w| w.seed == spec.world)
                .ok_or_else(|| Error::InvalidArgument(format!("world {} not loaded", spec.world)))?;
            run_episode(plan, spec, method, ctx)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = episodes.len();
    let success_rate = (n > 0).then(|| episodes.iter().filter(|e| e.success).count() as f64 / n as f64);
    Ok(SuiteResult {
        method: method.name().to_string(),
        spd: spd(&episodes),
        success_rate,
        episodes,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:.6}"))
}

/// Summary with fixed field names, one `key = value` per line.
pub fn suite_report(r: &SuiteResult, config_hash: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "method = {}", r.method);
    let _ = writeln!(s, "spd = {}", opt(r.spd));
    let _ = writeln!(s, "success_rate = {}", opt(r.success_rate));
    let _ = writeln!(s, "n_episodes = {}", r.episodes.len());
    let _ = writeln!(s, "config_hash = {config_hash}");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(success: bool, duration: f64, reference: f64) -> EpisodeResult {
        EpisodeResult {
            spec: EpisodeSpec { index: 0, world: 0, src: Vec2::new(0.0, 0.0), dst: Vec2::new(1.0, 0.0), yaw: 0.0, seed: 0 },
            method: "normal".into(),
            success,
            duration,
            reference: Some(reference),
            actions: 0,
            termination: if success { Termination::Reached } else { Termination::StepBudget },
            trajectory: vec![],
        }
    }

    #[test]
    fn spd_hand_cases() {
        assert_eq!(spd(&[]), None);
        assert_eq!(spd(&[result(true, 5.0, 5.0), result(true, 3.0, 3.0)]), Some(1.0));
        assert_eq!(spd(&[result(true, 20.0, 10.0), result(false, 1.0, 10.0)]), Some(0.25));
        assert_eq!(spd(&[result(true, 0.0, 0.0)]), Some(1.0));
    }
}
