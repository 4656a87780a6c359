//! The `occnav` command-line tool.
//!
//! Exit codes: 0 success, 1 usage, 2 config, 3 io, 4 data format, 5 numeric
//! failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::RunConfig;
use crate::dataset::{build_split, load_dataset, save_dataset, Dataset, OCCD_MAGIC};
use crate::geometry::Vec2;
use crate::models::{
    evaluate_inpainting, load_weights, load_weights_for, save_weights, split_validation, train, InpaintReport,
    Method, ModelWeights,
};
use crate::navsim::{generate_specs, run_suite, suite_report, NavMethod};
use crate::render::{episode_image, grid_image, pair_image, save_image};
use crate::worldgen::FloorPlan;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "occnav", version, about = "Occupancy-map inpainting and navigation benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NavChoice {
    Normal,
    GroundTruth,
    Predicted,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a description file for every train and test world.
    GenWorld {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the train/test datasets (train.occd, test.occd, metadata.txt).
    GenData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a generator; also writes `<out>.history.txt`.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// Dataset file, or a directory holding train.occd.
        #[arg(long)]
        data: PathBuf,
        /// pred-bce, pred-mse, pred-l1 or gan.
        #[arg(long)]
        method: Method,
        #[arg(long)]
        out: PathBuf,
    },
    /// Accuracy, inpainted fraction and accuracy histogram of a model.
    EvalInpaint {
        #[arg(long)]
        weights: PathBuf,
        /// Dataset file, or a directory holding test.occd.
        #[arg(long)]
        data: PathBuf,
        /// Occupancy thresholds come from here; defaults otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write the report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a navigation suite over the test worlds.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        method: NavChoice,
        /// Required for `--method predicted`.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        episodes: usize,
        /// Directory for episodes.jsonl and report.txt.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a dataset pair, a world, or one episode of a log as an image.
    Render {
        /// OCCD dataset, world description, or episode log (.jsonl).
        #[arg(long = "in")]
        input: PathBuf,
        /// Output image, .pgm or .png.
        #[arg(long)]
        out: PathBuf,
        /// Pair or episode index.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// `input`, `target` or `both` for dataset pairs.
        #[arg(long, default_value = "both")]
        which: String,
        /// Needed to rebuild the world of an episode log.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 40.0)]
        px_per_m: f64,
    },
}

/// Parse `args` (program name first), run, and return the exit code.
/// Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn dataset_path(data: &Path, default_name: &str) -> PathBuf {
    if data.is_dir() {
        data.join(default_name)
    } else {
        data.to_path_buf()
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::GenWorld { config, out: dir } => {
            let cfg = RunConfig::load(&config)?;
            create_dir(&dir)?;
            let mut ids = cfg.dataset.train_worlds.clone();
            ids.extend(&cfg.dataset.test_worlds);
            for id in ids {
                let plan = cfg.world(id)?;
                write_file(&dir.join(format!("world_{id}.txt")), plan.to_description().as_bytes())?;
            }
            emit(out, &format!("worlds = {}\nconfig_hash = {}\n", cfg.dataset.train_worlds.len() + cfg.dataset.test_worlds.len(), cfg.hash()))
        }
        Command::GenData { config, out: dir } => {
            let cfg = RunConfig::load(&config)?;
            let (tr, te) = build_split(cfg.build_inputs())?;
            create_dir(&dir)?;
            save_dataset(&tr, &dir.join("train.occd"))?;
            save_dataset(&te, &dir.join("test.occd"))?;
            let meta = data_metadata(&cfg, &tr, &te);
            write_file(&dir.join("metadata.txt"), meta.as_bytes())?;
            emit(out, &meta)
        }
        Command::Train { config, data, method, out: path } => {
            let cfg = RunConfig::load(&config)?;
            let ds = load_dataset(&dataset_path(&data, "train.occd"))?;
            check_grid(&cfg, &ds)?;
            let tc = cfg.train_config();
            let (tr, val) = split_validation(&ds.pairs, tc.val_fraction, tc.seed);
            let result = train(method, &tr, &val, &tc, &cfg.occupancy)?;
            let weights = ModelWeights {
                generator: result.generator,
                method,
                seed: tc.seed,
                config_hash: cfg.hash(),
            };
            save_weights(&weights, &path)?;
            let mut hist = path.clone().into_os_string();
            hist.push(".history.txt");
            write_file(Path::new(&hist), result.history.to_text().as_bytes())?;
            let h = &result.history;
            let mut s = String::new();
            let _ = writeln!(s, "method = {method}");
            let _ = writeln!(s, "train_pairs = {}", tr.len());
            let _ = writeln!(s, "val_pairs = {}", val.len());
            let _ = writeln!(s, "epochs = {}", h.epochs.len());
            let _ = writeln!(s, "iterations = {}", h.iterations.len());
            let _ = writeln!(s, "best_epoch = {}", h.best_epoch.map_or_else(|| "none".into(), |e| e.to_string()));
            let _ = writeln!(s, "stop = {:?}", h.stop);
            let _ = writeln!(s, "config_hash = {}", cfg.hash());
            emit(out, &s)
        }
        Command::EvalInpaint { weights, data, config, report } => {
            let cfg = match config {
                Some(p) => RunConfig::load(&p)?,
                None => RunConfig::default(),
            };
            let w = load_weights(&weights)?;
            let ds = load_dataset(&dataset_path(&data, "test.occd"))?;
            if ds.is_empty() {
                return Err(Error::EmptyDataset);
            }
            let r = evaluate_inpainting(&w, &ds.pairs, &cfg.occupancy)?;
            let text = inpaint_report(&w, &r);
            if let Some(p) = report {
                write_file(&p, text.as_bytes())?;
            }
            emit(out, &text)
        }
        Command::Simulate { config, method, weights, episodes, out: dir } => {
            if episodes == 0 {
                return Err(Error::InvalidArgument("--episodes must be at least 1".into()));
            }
            let cfg = RunConfig::load(&config)?;
            let ctx = cfg.nav_context();
            let loaded = match (method, weights) {
                (NavChoice::Predicted, Some(p)) => Some(load_weights_for(&p, &cfg.train_config().arch(&cfg.occupancy))?),
                (NavChoice::Predicted, None) => {
                    return Err(Error::InvalidArgument("--method predicted needs --weights".into()))
                }
                (_, Some(_)) => return Err(Error::InvalidArgument("--weights only applies to --method predicted".into())),
                (_, None) => None,
            };
            let name = loaded.as_ref().map(|w| w.method.to_string());
            let nav_method = match (method, &loaded, &name) {
                (NavChoice::Normal, ..) => NavMethod::Normal,
                (NavChoice::GroundTruth, ..) => NavMethod::GroundTruth3Cam,
                (NavChoice::Predicted, Some(w), Some(n)) => NavMethod::Predicted { name: n, predictor: w },
                _ => unreachable!("predicted always has weights"),
            };
            let worlds = cfg.nav_worlds()?;
            let specs = generate_specs(&worlds, episodes, cfg.seed, &ctx)?;
            let suite = run_suite(&worlds, &specs, nav_method, &ctx)?;
            let report = suite_report(&suite, &cfg.hash());
            if let Some(d) = dir {
                create_dir(&d)?;
                write_file(&d.join("episodes.jsonl"), suite.log_lines().as_bytes())?;
                write_file(&d.join("report.txt"), report.as_bytes())?;
            }
            emit(out, &report)
        }
        Command::Render { input, out: image, index, which, config, px_per_m } => {
            let img = render_input(&input, index, &which, config.as_deref(), px_per_m)?;
            save_image(&img, &image)?;
            emit(out, &format!("image = {}\nsize = {}x{}\n", image.display(), img.width, img.height))
        }
    }
}

fn check_grid(cfg: &RunConfig, ds: &Dataset) -> Result<()> {
    if ds.grid != cfg.grid {
        return Err(Error::ShapeMismatch(format!("dataset grid {:?} differs from config grid {:?}", ds.grid, cfg.grid)));
    }
    Ok(())
}

fn ids(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

fn data_metadata(cfg: &RunConfig, tr: &Dataset, te: &Dataset) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "train_pairs = {}", tr.len());
    let _ = writeln!(s, "test_pairs = {}", te.len());
    let _ = writeln!(s, "train_worlds = {}", ids(&cfg.dataset.train_worlds));
    let _ = writeln!(s, "test_worlds = {}", ids(&cfg.dataset.test_worlds));
    let _ = writeln!(s, "resolution = {}", cfg.grid.resolution);
    let _ = writeln!(s, "config_hash = {}", cfg.hash());
    s
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| format!("{x:.6}"))
}

/// Fixed-field text report of an inpainting evaluation.
pub fn inpaint_report(w: &ModelWeights, r: &InpaintReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "method = {}", w.method);
    let _ = writeln!(s, "n_pairs = {}", r.n_pairs);
    let _ = writeln!(s, "accuracy_pct = {}", opt(r.accuracy_pct));
    let _ = writeln!(s, "inpainted_pct = {}", opt(r.inpainted_pct));
    let _ = writeln!(s, "target_gain_pct = {}", opt(r.target_gain_pct));
    let bins: Vec<String> = r.histogram.iter().map(usize::to_string).collect();
    let _ = writeln!(s, "accuracy_histogram = {}", bins.join(" "));
    let _ = writeln!(s, "config_hash = {}", w.config_hash);
    s
}

fn render_input(
    input: &Path,
    index: usize,
    which: &str,
    config: Option<&Path>,
    px_per_m: f64,
) -> Result<crate::render::GrayImage> {
    let bytes = std::fs::read(input).map_err(|e| Error::io(input, e))?;
    if bytes.starts_with(OCCD_MAGIC.as_bytes()) {
        let ds = crate::dataset::decode_dataset(&bytes)?;
        let pair = ds
            .pairs
            .get(index)
            .ok_or_else(|| Error::InvalidArgument(format!("pair {index} out of range ({} pairs)", ds.len())))?;
        return match which {
            "both" => Ok(pair_image(pair)),
            "input" => Ok(grid_image(&pair.input)),
            "target" => Ok(grid_image(&pair.target)),
            other => Err(Error::InvalidArgument(format!("--which must be input, target or both, got {other}"))),
        };
    }
    let text = String::from_utf8(bytes).map_err(|_| Error::Format(format!("{}: not a known input", input.display())))?;
    if input.extension().is_some_and(|e| e == "jsonl") {
        let cfg = RunConfig::load(config.ok_or_else(|| Error::InvalidArgument("episode logs need --config".into()))?)?;
        let line = text
            .lines()
            .nth(index)
            .ok_or_else(|| Error::InvalidArgument(format!("episode {index} not in log")))?;
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| Error::Format(e.to_string()))?;
        let world = v["world"].as_u64().ok_or_else(|| Error::Format("episode without world".into()))?;
        let point = |a: &serde_json::Value| -> Result<Vec2> {
            match (a[0].as_f64(), a[1].as_f64()) {
                (Some(x), Some(y)) => Ok(Vec2::new(x, y)),
                _ => Err(Error::Format("bad point in episode log".into())),
            }
        };
        let path = v["trajectory"]
            .as_array()
            .ok_or_else(|| Error::Format("episode without trajectory".into()))?
            .iter()
            .map(point)
            .collect::<Result<Vec<_>>>()?;
        return episode_image(&cfg.world(world)?, &path, point(&v["src"])?, point(&v["dst"])?, px_per_m);
    }
    let plan = FloorPlan::from_description(&text)?;
    episode_image(&plan, &[], Vec2::new(-1.0, -1.0), Vec2::new(-1.0, -1.0), px_per_m)
}
