//! C interface to the occnav toolkit.
//!
//! Every function returns an [`OccnavStatus`]; results travel through out
//! pointers. Configs, worlds and models are opaque handles created by the
//! library and released with the matching `_free` function. After a non-OK
//! status, `occnav_last_error_message` describes the failure on the calling
//! thread. Panics never cross the boundary; they surface as
//! `OCCNAV_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use occnav::config::RunConfig;
use occnav::dataset::build_pair;
use occnav::models::{inpaint_accuracy, inpainted_fraction, load_weights_for, predict_inpaint, ModelWeights};
use occnav::navsim::{generate_specs, run_suite, NavMethod};
use occnav::occupancy::ProbGrid;
use occnav::sensor::Pose2D;
use occnav::worldgen::FloorPlan;
use occnav::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccnavStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Io = 4,
    Format = 5,
    ShapeMismatch = 6,
    Numeric = 7,
    PoseInSolid = 8,
    WorldGeneration = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccnavNavMethod {
    Normal = 0,
    GroundTruth = 1,
    Predicted = 2,
}

/// Aggregate of one navigation suite.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OccnavSuiteSummary {
    pub episodes: usize,
    pub spd: f64,
    pub success_rate: f64,
}

/// Run configuration handle.
pub struct OccnavConfig(RunConfig);

/// Generated room handle.
pub struct OccnavWorld(FloorPlan);

/// Trained generator handle.
pub struct OccnavModel(ModelWeights);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> OccnavStatus {
    match e {
        Error::InvalidArgument(_) => OccnavStatus::InvalidArgument,
        Error::Config(_) => OccnavStatus::Config,
        Error::WorldGeneration { .. } => OccnavStatus::WorldGeneration,
        Error::PoseInSolid { .. } => OccnavStatus::PoseInSolid,
        Error::ShapeMismatch(_) | Error::ArchitectureMismatch(_) => OccnavStatus::ShapeMismatch,
        Error::Io { .. } => OccnavStatus::Io,
        Error::BadMagic { .. }
        | Error::BadVersion { .. }
        | Error::Truncated(_)
        | Error::Format(_)
        | Error::EmptyDataset => OccnavStatus::Format,
        Error::Numeric(_) => OccnavStatus::Numeric,
    }
}

/// Internal failure carrying its status and message.
struct Fail(OccnavStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(OccnavStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OccnavStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            OccnavStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            OccnavStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(OccnavStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// Box `v` into a new handle, checking the slot first so nothing leaks.
unsafe fn put<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(Box::into_raw(Box::new(v)));
    Ok(())
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Copy `s` plus a terminating NUL into `buf`.
unsafe fn copy_str(s: &str, buf: *mut c_char, len: usize) -> Result<(), Fail> {
    let dst = slice_mut(buf.cast::<u8>(), len, "buffer")?;
    if dst.len() <= s.len() {
        return Err(Fail(OccnavStatus::BufferTooSmall, format!("need {} bytes, got {len}", s.len() + 1)));
    }
    dst[..s.len()].copy_from_slice(s.as_bytes());
    dst[s.len()] = 0;
    Ok(())
}

fn grid_from(cfg: &RunConfig, values: &[f32]) -> Result<ProbGrid, Fail> {
    Ok(ProbGrid::from_values(cfg.grid, values.to_vec())?)
}

fn check_len(cfg: &RunConfig, len: usize) -> Result<(), Fail> {
    if len != cfg.grid.len() {
        return Err(Fail(
            OccnavStatus::ShapeMismatch,
            format!("grid buffers hold {} cells, got {len}", cfg.grid.len()),
        ));
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn occnav_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Bytes needed for the last error message, including the NUL.
#[no_mangle]
pub extern "C" fn occnav_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len() + 1)
}

/// Copy the calling thread's last error message into `buf`. The message is
/// empty after a successful call.
///
/// # Safety
/// `buf` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn occnav_last_error_message(buf: *mut c_char, len: usize) -> OccnavStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match copy_str(&msg, buf, len) {
        Ok(()) => OccnavStatus::Ok,
        Err(Fail(s, _)) => s,
    }
}

/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn occnav_config_default(out: *mut *mut OccnavConfig) -> OccnavStatus {
    guard(|| put(out, OccnavConfig(RunConfig::default())))
}

/// Parse a TOML run configuration.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn occnav_config_from_toml(text: *const c_char, out: *mut *mut OccnavConfig) -> OccnavStatus {
    guard(|| {
        let cfg = RunConfig::from_toml(c_str(text, "text")?)?;
        put(out, OccnavConfig(cfg))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn occnav_config_load(path: *const c_char, out: *mut *mut OccnavConfig) -> OccnavStatus {
    guard(|| {
        let cfg = RunConfig::load(Path::new(c_str(path, "path")?))?;
        put(out, OccnavConfig(cfg))
    })
}

/// Sixteen hex digits identifying the configuration; `len` must be at
/// least 17.
///
/// # Safety
/// `cfg` must be a live handle and `buf` point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn occnav_config_hash(cfg: *const OccnavConfig, buf: *mut c_char, len: usize) -> OccnavStatus {
    guard(|| copy_str(&deref(cfg, "cfg")?.0.hash(), buf, len))
}

/// Cells per side of the local grid.
///
/// # Safety
/// `cfg` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn occnav_config_grid_resolution(cfg: *const OccnavConfig, out: *mut usize) -> OccnavStatus {
    guard(|| write(out, deref(cfg, "cfg")?.0.grid.resolution, "out"))
}

/// # Safety
/// `cfg` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn occnav_config_free(cfg: *mut OccnavConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Generate the room with the given world id from the config's template.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn occnav_world_generate(
    cfg: *const OccnavConfig,
    id: u64,
    out: *mut *mut OccnavWorld,
) -> OccnavStatus {
    guard(|| {
        let plan = deref(cfg, "cfg")?.0.world(id)?;
        put(out, OccnavWorld(plan))
    })
}

/// Interior width and height in meters.
///
/// # Safety
/// `world` must be a live handle; both out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn occnav_world_size(world: *const OccnavWorld, width: *mut f64, height: *mut f64) -> OccnavStatus {
    guard(|| {
        let b = deref(world, "world")?.0.boundary;
        write(width, b.width(), "width")?;
        write(height, b.height(), "height")
    })
}

/// Whether a point lies inside the room and outside every obstacle.
///
/// # Safety
/// `world` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn occnav_world_is_free(world: *const OccnavWorld, x: f64, y: f64, out: *mut bool) -> OccnavStatus {
    guard(|| {
        let plan = &deref(world, "world")?.0;
        let p = occnav::geometry::Vec2::new(x, y);
        write(out, plan.boundary.contains(p) && plan.is_free(p), "out")
    })
}

/// # Safety
/// `world` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn occnav_world_free(world: *mut OccnavWorld) {
    if !world.is_null() {
        drop(Box::from_raw(world));
    }
}

/// Sense from a robot pose: `input` receives the center-camera probability
/// grid and `target` the three-camera fusion, both row-major with `len`
/// equal to resolution squared.
///
/// # Safety
/// Handles must be live; `input` and `target` must each hold `len` floats.
#[no_mangle]
pub unsafe extern "C" fn occnav_observe(
    cfg: *const OccnavConfig,
    world: *const OccnavWorld,
    x: f64,
    y: f64,
    yaw: f64,
    input: *mut f32,
    target: *mut f32,
    len: usize,
) -> OccnavStatus {
    guard(|| {
        let cfg = &deref(cfg, "cfg")?.0;
        let plan = &deref(world, "world")?.0;
        check_len(cfg, len)?;
        let input = slice_mut(input, len, "input")?;
        let target = slice_mut(target, len, "target")?;
        let pair = build_pair(plan, Pose2D::new(x, y, yaw), &cfg.rig, &cfg.camera, &cfg.grid, &cfg.occupancy)?;
        input.copy_from_slice(&pair.input.values);
        target.copy_from_slice(&pair.target.values);
        Ok(())
    })
}

/// Load generator weights; the architecture must match the config.
///
/// # Safety
/// `cfg` must be a live handle, `path` NUL-terminated, `out` a valid slot.
#[no_mangle]
pub unsafe extern "C" fn occnav_model_load(
    cfg: *const OccnavConfig,
    path: *const c_char,
    out: *mut *mut OccnavModel,
) -> OccnavStatus {
    guard(|| {
        let cfg = &deref(cfg, "cfg")?.0;
        let arch = cfg.train_config().arch(&cfg.occupancy);
        let w = load_weights_for(Path::new(c_str(path, "path")?), &arch)?;
        put(out, OccnavModel(w))
    })
}

/// # Safety
/// `model` must be null or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn occnav_model_free(model: *mut OccnavModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Predict a full map from a partial one. Known input cells are copied to
/// the output unchanged.
///
/// # Safety
/// Handles must be live; `input` and `output` must each hold `len` floats.
#[no_mangle]
pub unsafe extern "C" fn occnav_predict_inpaint(
    model: *const OccnavModel,
    cfg: *const OccnavConfig,
    input: *const f32,
    output: *mut f32,
    len: usize,
) -> OccnavStatus {
    guard(|| {
        let model = &deref(model, "model")?.0;
        let cfg = &deref(cfg, "cfg")?.0;
        check_len(cfg, len)?;
        let grid = grid_from(cfg, slice(input, len, "input")?)?;
        let out = predict_inpaint(model, &grid, &cfg.occupancy)?;
        slice_mut(output, len, "output")?.copy_from_slice(&out.values);
        Ok(())
    })
}

/// Agreement of free/occupied labels over jointly known cells, in [0, 1].
/// `defined` is false, and `out` untouched, when no cell is known in both.
///
/// # Safety
/// `cfg` must be live; the grids must hold `len` floats; out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn occnav_inpaint_accuracy(
    cfg: *const OccnavConfig,
    pred: *const f32,
    target: *const f32,
    len: usize,
    out: *mut f64,
    defined: *mut bool,
) -> OccnavStatus {
    guard(|| {
        let cfg = &deref(cfg, "cfg")?.0;
        check_len(cfg, len)?;
        let p = grid_from(cfg, slice(pred, len, "pred")?)?;
        let t = grid_from(cfg, slice(target, len, "target")?)?;
        let v = inpaint_accuracy(&p, &t, &cfg.occupancy)?;
        write(defined, v.is_some(), "defined")?;
        if let Some(v) = v {
            write(out, v, "out")?;
        }
        Ok(())
    })
}

/// Percentage of cells unknown in `input` and known in `pred`, relative to
/// the known input cells. `defined` is false without known input cells.
///
/// # Safety
/// `cfg` must be live; the grids must hold `len` floats; out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn occnav_inpainted_fraction(
    cfg: *const OccnavConfig,
    input: *const f32,
    pred: *const f32,
    len: usize,
    out: *mut f64,
    defined: *mut bool,
) -> OccnavStatus {
    guard(|| {
        let cfg = &deref(cfg, "cfg")?.0;
        check_len(cfg, len)?;
        let i = grid_from(cfg, slice(input, len, "input")?)?;
        let p = grid_from(cfg, slice(pred, len, "pred")?)?;
        let v = inpainted_fraction(&i, &p, &cfg.occupancy)?;
        write(defined, v.is_some(), "defined")?;
        if let Some(v) = v {
            write(out, v, "out")?;
        }
        Ok(())
    })
}

/// Run `episodes` seeded navigation episodes over the config's test worlds.
/// `method` is an `OccnavNavMethod` value. `model` is required for
/// `OCCNAV_NAV_METHOD_PREDICTED` and must be null otherwise.
///
/// # Safety
/// `cfg` must be live, `model` null or live, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn occnav_simulate(
    cfg: *const OccnavConfig,
    method: u32,
    model: *const OccnavModel,
    episodes: usize,
    out: *mut OccnavSuiteSummary,
) -> OccnavStatus {
    guard(|| {
        let cfg = &deref(cfg, "cfg")?.0;
        if episodes == 0 {
            return Err(Fail(OccnavStatus::InvalidArgument, "episodes must be at least 1".into()));
        }
        let method = match method {
            0 => OccnavNavMethod::Normal,
            1 => OccnavNavMethod::GroundTruth,
            2 => OccnavNavMethod::Predicted,
            m => return Err(Fail(OccnavStatus::InvalidArgument, format!("unknown navigation method {m}"))),
        };
        let model = model.as_ref().map(|m| &m.0);
        let name = model.map(|m| m.method.to_string()).unwrap_or_default();
        let nav = match (method, model) {
            (OccnavNavMethod::Normal, None) => NavMethod::Normal,
            (OccnavNavMethod::GroundTruth, None) => NavMethod::GroundTruth3Cam,
            (OccnavNavMethod::Predicted, Some(m)) => NavMethod::Predicted { name: &name, predictor: m },
            (OccnavNavMethod::Predicted, None) => return Err(null("model")),
            (_, Some(_)) => {
                return Err(Fail(OccnavStatus::InvalidArgument, "a model only applies to the predicted method".into()))
            }
        };
        let ctx = cfg.nav_context();
        let worlds = cfg.nav_worlds()?;
        let specs = generate_specs(&worlds, episodes, cfg.seed, &ctx)?;
        let suite = run_suite(&worlds, &specs, nav, &ctx)?;
        let summary = OccnavSuiteSummary {
            episodes: suite.episodes.len(),
            spd: suite.spd.unwrap_or(0.0),
            success_rate: suite.success_rate.unwrap_or(0.0),
        };
        write(out, summary, "out")
    })
}
