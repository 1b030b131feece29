//! Command-line front end: argument parsing, settings resolution and the
//! subcommands.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mutual_shape_core::baselines::{intersection, majority_vote, staple_em, union, StapleConfig};
use mutual_shape_core::evolution::{evolve_with, EvolutionConfig, Initializer, Outcome, DEFAULT_CIRCLE_FRACTION};
use mutual_shape_core::grid::{average_image, dice};
use mutual_shape_core::synthetic::make_lozenge_set;
use mutual_shape_core::velocity::FusionMode;
use mutual_shape_core::{BinaryMask, LevelSetField, ShapeSet};

use crate::config::{pick, ConfigFile};
use crate::dump;
use crate::error::AppError;
use crate::pgm::{self, Threshold};
use crate::report::{self, fmt_g6};

const OUTPUT_HELP: &str = "\
Outputs (under --out DIR):
  consensus.pgm   consensus mask, P5, 255 = foreground
  pq.csv          index,name,p,q              final sensitivity/specificity per input
  trace.csv       iteration,jh,mi,sd,reg,total,area,changed,p_1..p_n,q_1..q_n
  ranking.csv     rank,name,p,q,score[,dice]  (evaluate; score = p + q, descending)
  summary.txt     key=value run summary
  run.cfg         resolved parameters; `--config run.cfg` reproduces the run
  snapshots/      iter_NNNNN.pgm contour overlays (--snapshot-every)
  dumps/          u_NNNNN / F_NNNNN float32 fields + .hdr (--dump-every)
Floats in CSV files have 6 significant digits.

Exit codes: 0 ok, 1 numerical failure or vanished contour, 2 I/O, format or
argument error, 3 input masks of different sizes, 4 fewer than two inputs.";

#[derive(Parser, Debug)]
#[command(name = "mutual-shape", version, about = "Consensus shapes from several binary segmentations", after_long_help = OUTPUT_HELP)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate the consensus shape of a set of masks
    Fuse(FuseArgs),
    /// Fuse, then rank the inputs by p + q
    Evaluate(EvaluateArgs),
    /// Majority vote, union, intersection or STAPLE
    Baseline(BaselineArgs),
    /// Write a synthetic fixture set
    Synth(SynthArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct InputArgs {
    /// Input masks (PGM, P2 or P5)
    #[arg(long, num_args = 1.., value_name = "PGM")]
    pub inputs: Vec<PathBuf>,
    /// Gray level at or above which a pixel is foreground [default: (maxval+1)/2]
    #[arg(long)]
    pub threshold: Option<u16>,
    /// Treat dark pixels as foreground
    #[arg(long)]
    pub invert: bool,
    /// Output directory, created if missing
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file supplying any option; command-line flags win
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct FuseArgs {
    #[command(flatten)]
    pub io: InputArgs,
    /// Fusion criterion [default: mutual]
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Contour-length weight [default: 10]
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Label-matching kernel width [default: 0.1]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Fraction of a pixel the fastest point may move per step [default: 0.45]
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Iteration cap [default: 1000]
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Redistance the level set every R iterations [default: 20]
    #[arg(long)]
    pub reinit_every: Option<usize>,
    /// Stop after this many consecutive stationary iterations [default: 25]
    #[arg(long)]
    pub conv_window: Option<usize>,
    /// Pixel flips per iteration still counted as stationary [default: 0]
    #[arg(long)]
    pub conv_tol: Option<usize>,
    /// circle | circle:CX,CY,R | bubbles | bubbles:SPACING,RADIUS | mask:PATH [default: circle]
    #[arg(long)]
    pub init: Option<InitSpec>,
    /// Restrict statistics and motion to this mask
    #[arg(long)]
    pub working_mask: Option<PathBuf>,
    /// Write a contour overlay every S iterations (0 = never)
    #[arg(long)]
    pub snapshot_every: Option<usize>,
    /// Dump the level-set and speed fields every S iterations (0 = never)
    #[arg(long)]
    pub dump_every: Option<usize>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub fuse: FuseArgs,
    /// Gold-standard mask; adds Dice scores to the report
    #[arg(long)]
    pub reference: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub io: InputArgs,
    /// Fusion rule (required)
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Gold-standard mask; adds a Dice score to the summary
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// STAPLE iteration cap [default: 100]
    #[arg(long)]
    pub staple_iters: Option<usize>,
    /// STAPLE stopping tolerance on p/q changes [default: 1e-8]
    #[arg(long)]
    pub staple_tol: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub kind: SynthKind,
    /// Grid side in pixels (at least 64)
    #[arg(long, default_value_t = 128)]
    pub size: usize,
    /// Add a disjoint outlier mask
    #[arg(long)]
    pub outlier: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Lozenge,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Mutual,
    Sd,
}

impl From<ModeArg> for FusionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Mutual => FusionMode::Mutual,
            ModeArg::Sd => FusionMode::Sd,
        }
    }
}

impl FromStr for ModeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <ModeArg as ValueEnum>::from_str(s, false)
    }
}

impl fmt::Display for ModeArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeArg::Mutual => "mutual",
            ModeArg::Sd => "sd",
        })
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Vote,
    Union,
    Intersection,
    Staple,
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        <Method as ValueEnum>::from_str(s, false)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Vote => "vote",
            Method::Union => "union",
            Method::Intersection => "intersection",
            Method::Staple => "staple",
        })
    }
}

pub const DEFAULT_BUBBLE_SPACING: f64 = 16.0;
pub const DEFAULT_BUBBLE_RADIUS: f64 = 4.0;

/// Initial contour as given on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    Circle(Option<(f64, f64, f64)>),
    Bubbles(Option<(f64, f64)>),
    Mask(PathBuf),
}

impl Default for InitSpec {
    fn default() -> Self {
        InitSpec::Circle(None)
    }
}

fn numbers(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

impl FromStr for InitSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        match (head, rest) {
            ("circle", None) => Ok(InitSpec::Circle(None)),
            ("circle", Some(r)) => numbers(r, 3).map(|v| InitSpec::Circle(Some((v[0], v[1], v[2])))),
            ("bubbles", None) => Ok(InitSpec::Bubbles(None)),
            ("bubbles", Some(r)) => numbers(r, 2).map(|v| InitSpec::Bubbles(Some((v[0], v[1])))),
            ("mask", Some(p)) if !p.is_empty() => Ok(InitSpec::Mask(PathBuf::from(p))),
            _ => Err(format!(
                "unknown initializer {s:?} (circle, circle:CX,CY,R, bubbles, bubbles:SPACING,RADIUS, mask:PATH)"
            )),
        }
    }
}

impl fmt::Display for InitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSpec::Circle(None) => write!(f, "circle"),
            InitSpec::Circle(Some((x, y, r))) => write!(f, "circle:{x},{y},{r}"),
            InitSpec::Bubbles(None) => write!(f, "bubbles"),
            InitSpec::Bubbles(Some((s, r))) => write!(f, "bubbles:{s},{r}"),
            InitSpec::Mask(p) => write!(f, "mask:{}", p.display()),
        }
    }
}

/// Threshold level as written in config files: a number or `auto`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Level(Option<u16>);

impl FromStr for Level {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            Ok(Level(None))
        } else {
            s.parse().map(|v| Level(Some(v))).map_err(|e| format!("{e}"))
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(v) => write!(f, "{v}"),
            None => f.write_str("auto"),
        }
    }
}

const INPUT_KEYS: &[&str] = &["input", "threshold", "invert", "out"];
const FUSE_KEYS: &[&str] = &[
    "mode",
    "lambda",
    "sigma",
    "cfl",
    "max_iters",
    "reinit_every",
    "conv_window",
    "conv_tol",
    "init",
    "working_mask",
    "snapshot_every",
    "dump_every",
];
const BASELINE_KEYS: &[&str] = &["method", "staple_iters", "staple_tol"];

fn load_config(path: Option<&Path>, extra: &[&[&str]]) -> Result<ConfigFile, AppError> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let cfg = ConfigFile::load(path)?;
    let allowed: Vec<&str> = INPUT_KEYS.iter().chain(extra.iter().flat_map(|k| k.iter())).copied().collect();
    cfg.check_keys(&allowed)?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputSettings {
    pub inputs: Vec<PathBuf>,
    pub threshold: Threshold,
    pub out: PathBuf,
}

impl InputSettings {
    fn resolve(a: &InputArgs, cfg: &ConfigFile) -> Result<Self, AppError> {
        let inputs = if a.inputs.is_empty() {
            cfg.get_all("input").into_iter().map(PathBuf::from).collect()
        } else {
            a.inputs.clone()
        };
        let level = match a.threshold {
            Some(v) => Some(v),
            None => cfg.get::<Level>("threshold")?.and_then(|l| l.0),
        };
        let invert = a.invert || cfg.get::<bool>("invert")?.unwrap_or(false);
        let out = a
            .out
            .clone()
            .or_else(|| cfg.get_str("out").map(PathBuf::from))
            .ok_or_else(|| AppError::Usage("missing --out DIR".into()))?;
        Ok(Self {
            inputs,
            threshold: Threshold { level, invert },
            out,
        })
    }

    fn echo(&self, out: &mut String) {
        out.push_str(&format!("threshold={}\n", Level(self.threshold.level)));
        out.push_str(&format!("invert={}\n", self.threshold.invert));
        out.push_str(&format!("out={}\n", self.out.display()));
        for p in &self.inputs {
            out.push_str(&format!("input={}\n", p.display()));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuseSettings {
    pub io: InputSettings,
    pub mode: ModeArg,
    pub lambda: f64,
    pub sigma: f64,
    pub cfl: f64,
    pub max_iters: usize,
    pub reinit_every: usize,
    pub conv_window: usize,
    pub conv_tol: usize,
    pub init: InitSpec,
    pub working_mask: Option<PathBuf>,
    pub snapshot_every: usize,
    pub dump_every: usize,
    pub reference: Option<PathBuf>,
}

impl FuseSettings {
    pub fn resolve(a: &FuseArgs, reference: Option<&PathBuf>, with_reference: bool) -> Result<Self, AppError> {
        let extra: &[&[&str]] = if with_reference { &[FUSE_KEYS, &["reference"]] } else { &[FUSE_KEYS] };
        let cfg = load_config(a.io.config.as_deref(), extra)?;
        let d = EvolutionConfig::default();
        Ok(Self {
            io: InputSettings::resolve(&a.io, &cfg)?,
            mode: pick(a.mode, cfg.get("mode")?, ModeArg::Mutual),
            lambda: pick(a.lambda, cfg.get("lambda")?, d.lambda),
            sigma: pick(a.sigma, cfg.get("sigma")?, d.sigma),
            cfl: pick(a.cfl, cfg.get("cfl")?, d.cfl),
            max_iters: pick(a.max_iters, cfg.get("max_iters")?, d.max_iters),
            reinit_every: pick(a.reinit_every, cfg.get("reinit_every")?, d.reinit_every),
            conv_window: pick(a.conv_window, cfg.get("conv_window")?, d.conv_window),
            conv_tol: pick(a.conv_tol, cfg.get("conv_tol")?, d.conv_tol),
            init: pick(a.init.clone(), cfg.get("init")?, InitSpec::default()),
            working_mask: a.working_mask.clone().or_else(|| cfg.get_str("working_mask").map(PathBuf::from)),
            snapshot_every: pick(a.snapshot_every, cfg.get("snapshot_every")?, 0),
            dump_every: pick(a.dump_every, cfg.get("dump_every")?, 0),
            reference: reference.cloned().or_else(|| {
                with_reference.then(|| cfg.get_str("reference").map(PathBuf::from)).flatten()
            }),
        })
    }

    /// `key=value` lines that reproduce this run through `--config`.
    pub fn echo(&self, command: &str) -> String {
        let mut s = format!("# mutual-shape {command}\n");
        s.push_str(&format!("mode={}\n", self.mode));
        s.push_str(&format!("lambda={}\n", self.lambda));
        s.push_str(&format!("sigma={}\n", self.sigma));
        s.push_str(&format!("cfl={}\n", self.cfl));
        s.push_str(&format!("max_iters={}\n", self.max_iters));
        s.push_str(&format!("reinit_every={}\n", self.reinit_every));
        s.push_str(&format!("conv_window={}\n", self.conv_window));
        s.push_str(&format!("conv_tol={}\n", self.conv_tol));
        s.push_str(&format!("init={}\n", self.init));
        if let Some(w) = &self.working_mask {
            s.push_str(&format!("working_mask={}\n", w.display()));
        }
        s.push_str(&format!("snapshot_every={}\n", self.snapshot_every));
        s.push_str(&format!("dump_every={}\n", self.dump_every));
        if let Some(r) = &self.reference {
            s.push_str(&format!("reference={}\n", r.display()));
        }
        self.io.echo(&mut s);
        s
    }
}

fn load(path: &Path, t: Threshold) -> Result<BinaryMask, AppError> {
    pgm::load_mask(path, t).map_err(|e| match e {
        pgm::LoadError::Io(source) => AppError::Io {
            path: path.to_path_buf(),
            source,
        },
        pgm::LoadError::Format(source) => AppError::Pgm {
            path: path.to_path_buf(),
            source,
        },
    })
}

fn load_matching(path: &Path, t: Threshold, like: &BinaryMask) -> Result<BinaryMask, AppError> {
    let m = load(path, t)?;
    let (g, e) = (m.grid(), like.grid());
    if g != e {
        return Err(AppError::DimMismatch {
            path: path.to_path_buf(),
            width: g.width(),
            height: g.height(),
            expected_width: e.width(),
            expected_height: e.height(),
        });
    }
    Ok(m)
}

/// Input names from file stems, made unique with a numeric suffix.
pub fn input_names(paths: &[PathBuf]) -> Vec<String> {
    let mut names: Vec<String> = Vec::with_capacity(paths.len());
    for p in paths {
        let stem = p
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "mask".into());
        let mut name = stem.clone();
        let mut k = 2;
        while names.contains(&name) {
            name = format!("{stem}_{k}");
            k += 1;
        }
        names.push(name);
    }
    names
}

pub fn load_shape_set(io: &InputSettings) -> Result<ShapeSet, AppError> {
    if io.inputs.len() < 2 {
        return Err(AppError::TooFewInputs(io.inputs.len()));
    }
    let first = load(&io.inputs[0], io.threshold)?;
    let mut masks = vec![first];
    for p in &io.inputs[1..] {
        masks.push(load_matching(p, io.threshold, &masks[0])?);
    }
    Ok(ShapeSet::new(masks, input_names(&io.inputs))?)
}

fn create_dir(dir: &Path) -> Result<(), AppError> {
    fs::create_dir_all(dir).map_err(AppError::io(dir))
}

fn write(path: PathBuf, data: impl AsRef<[u8]>) -> Result<(), AppError> {
    fs::write(&path, data).map_err(AppError::io(path))
}

/// Average image in `[0, 127]` with the contour (inside pixels next to the
/// outside) drawn at 255.
pub fn overlay(avg: &[f64], ls: &LevelSetField) -> Vec<u8> {
    let g = ls.grid();
    let mask = ls.extract_mask();
    (0..g.len())
        .map(|i| {
            if mask.get(i) && g.neighbors4(i).any(|j| !mask.get(j)) {
                255
            } else {
                (avg[i] * 127.0).round() as u8
            }
        })
        .collect()
}

/// Everything a fuse run produced, for callers that want more than files.
pub struct FuseRun {
    pub shapes: ShapeSet,
    pub outcome: Outcome,
    pub reference: Option<BinaryMask>,
}

pub fn run_fuse(st: &FuseSettings, command: &str) -> Result<FuseRun, AppError> {
    let s = load_shape_set(&st.io)?;
    let like = &s.masks()[0];
    let t = st.io.threshold;
    let reference = st.reference.as_deref().map(|p| load_matching(p, t, like)).transpose()?;
    let init = match &st.init {
        InitSpec::Circle(None) => Initializer::CenteredCircle {
            fraction: DEFAULT_CIRCLE_FRACTION,
        },
        InitSpec::Circle(Some((x, y, r))) => Initializer::Circle {
            center: (*x, *y),
            radius: *r,
        },
        InitSpec::Bubbles(b) => {
            let (spacing, radius) = b.unwrap_or((DEFAULT_BUBBLE_SPACING, DEFAULT_BUBBLE_RADIUS));
            Initializer::Bubbles { spacing, radius }
        }
        InitSpec::Mask(p) => Initializer::Mask(load_matching(p, t, like)?),
    };
    let working_mask = st.working_mask.as_deref().map(|p| load_matching(p, t, like)).transpose()?;
    let cfg = EvolutionConfig {
        lambda: st.lambda,
        sigma: st.sigma,
        cfl: st.cfl,
        max_iters: st.max_iters,
        reinit_every: st.reinit_every,
        conv_window: st.conv_window,
        conv_tol: st.conv_tol,
        mode: st.mode.into(),
        init,
        working_mask,
        ..EvolutionConfig::default()
    };
    cfg.validate()?;

    let out = &st.io.out;
    create_dir(out)?;
    write(out.join("run.cfg"), st.echo(command))?;
    let snap_dir = out.join("snapshots");
    let dump_dir = out.join("dumps");
    if st.snapshot_every > 0 {
        create_dir(&snap_dir)?;
    }
    if st.dump_every > 0 {
        create_dir(&dump_dir)?;
    }

    let avg = average_image(&s);
    let g = s.grid();
    let mut side_error: Option<AppError> = None;
    let result = evolve_with(&s, &cfg, |view| {
        if side_error.is_some() {
            return;
        }
        let it = view.iteration;
        let res = (|| {
            if st.snapshot_every > 0 && it % st.snapshot_every == 0 {
                let path = snap_dir.join(format!("iter_{it:05}.pgm"));
                pgm::save_gray(&path, g.width(), g.height(), &overlay(&avg, view.levelset))
                    .map_err(AppError::io(path))?;
            }
            if st.dump_every > 0 && it % st.dump_every == 0 {
                dump::write_field(&dump_dir, &format!("u_{it:05}"), g, view.levelset.values())
                    .map_err(AppError::io(&dump_dir))?;
                dump::write_field(&dump_dir, &format!("F_{it:05}"), g, view.speed).map_err(AppError::io(&dump_dir))?;
            }
            Ok(())
        })();
        side_error = res.err();
    });
    if let Some(e) = side_error {
        return Err(e);
    }
    let outcome = match result {
        Ok(o) => o,
        Err(failure) => {
            write(out.join("trace.csv"), report::trace_csv(&failure.trace, s.len()))?;
            return Err(AppError::Evolution(Box::new(failure)));
        }
    };

    write(out.join("consensus.pgm"), pgm::encode_mask(&outcome.mask, pgm::Encoding::Binary))?;
    write(out.join("pq.csv"), report::pq_csv(s.names(), &outcome.quality))?;
    write(out.join("trace.csv"), report::trace_csv(&outcome.trace, s.len()))?;
    let mut summary = format!(
        "iterations={}\nconverged={}\narea={}\nenergy={}\n",
        outcome.trace.len(),
        outcome.converged,
        outcome.mask.area(),
        fmt_g6(outcome.energy.total)
    );
    if let Some(r) = &reference {
        summary.push_str(&format!("dice={}\n", fmt_g6(dice(&outcome.mask, r)?)));
    }
    write(out.join("summary.txt"), summary)?;
    Ok(FuseRun {
        shapes: s,
        outcome,
        reference,
    })
}

fn cmd_fuse(a: &FuseArgs) -> Result<(), AppError> {
    let st = FuseSettings::resolve(a, None, false)?;
    let run = run_fuse(&st, "fuse")?;
    let o = &run.outcome;
    println!(
        "{} after {} iterations, consensus area {} -> {}",
        if o.converged { "converged" } else { "stopped" },
        o.trace.len(),
        o.mask.area(),
        st.io.out.display()
    );
    Ok(())
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<(), AppError> {
    let st = FuseSettings::resolve(&a.fuse, a.reference.as_ref(), true)?;
    let run = run_fuse(&st, "evaluate")?;
    let s = &run.shapes;
    let dices = run
        .reference
        .as_ref()
        .map(|r| s.masks().iter().map(|m| dice(m, r)).collect::<Result<Vec<_>, _>>())
        .transpose()?;
    let ranking = report::rank(s.names(), &run.outcome.quality, dices.as_deref());
    write(st.io.out.join("ranking.csv"), report::ranking_csv(&ranking))?;
    for (k, e) in ranking.iter().enumerate() {
        let d = e.dice.map(|d| format!("  dice {}", fmt_g6(d))).unwrap_or_default();
        println!("{:>3}. {:<24} p {:.2}  q {:.2}{d}", k + 1, e.name, e.p, e.q);
    }
    if let Some(r) = &run.reference {
        println!("consensus dice {}", fmt_g6(dice(&run.outcome.mask, r)?));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSettings {
    pub io: InputSettings,
    pub method: Method,
    pub reference: Option<PathBuf>,
    pub staple: StapleConfig,
}

impl BaselineSettings {
    pub fn resolve(a: &BaselineArgs) -> Result<Self, AppError> {
        let cfg = load_config(a.io.config.as_deref(), &[BASELINE_KEYS, &["reference"]])?;
        let d = StapleConfig::default();
        let method = a
            .method
            .or(cfg.get("method")?)
            .ok_or_else(|| AppError::Usage("missing --method (vote, union, intersection, staple)".into()))?;
        Ok(Self {
            io: InputSettings::resolve(&a.io, &cfg)?,
            method,
            reference: a.reference.clone().or_else(|| cfg.get_str("reference").map(PathBuf::from)),
            staple: StapleConfig {
                max_iters: pick(a.staple_iters, cfg.get("staple_iters")?, d.max_iters),
                tol: pick(a.staple_tol, cfg.get("staple_tol")?, d.tol),
                ..d
            },
        })
    }

    pub fn echo(&self) -> String {
        let mut s = String::from("# mutual-shape baseline\n");
        s.push_str(&format!("method={}\n", self.method));
        s.push_str(&format!("staple_iters={}\n", self.staple.max_iters));
        s.push_str(&format!("staple_tol={}\n", self.staple.tol));
        if let Some(r) = &self.reference {
            s.push_str(&format!("reference={}\n", r.display()));
        }
        self.io.echo(&mut s);
        s
    }
}

pub fn run_baseline(st: &BaselineSettings) -> Result<BinaryMask, AppError> {
    let s = load_shape_set(&st.io)?;
    let reference = st
        .reference
        .as_deref()
        .map(|p| load_matching(p, st.io.threshold, &s.masks()[0]))
        .transpose()?;
    let out = &st.io.out;
    create_dir(out)?;
    write(out.join("run.cfg"), st.echo())?;
    let mut summary = format!("method={}\n", st.method);
    let consensus = match st.method {
        Method::Vote => majority_vote(&s),
        Method::Union => union(&s),
        Method::Intersection => intersection(&s),
        Method::Staple => {
            let r = staple_em(&s, &st.staple)?;
            write(out.join("pq.csv"), report::pq_csv(s.names(), &r.quality))?;
            summary.push_str(&format!(
                "iterations={}\nconverged={}\nambiguous={}\nprior={}\n",
                r.iterations,
                r.converged,
                r.ambiguous,
                fmt_g6(r.prior)
            ));
            r.consensus
        }
    };
    summary.push_str(&format!("area={}\n", consensus.area()));
    if let Some(r) = &reference {
        summary.push_str(&format!("dice={}\n", fmt_g6(dice(&consensus, r)?)));
    }
    write(out.join("consensus.pgm"), pgm::encode_mask(&consensus, pgm::Encoding::Binary))?;
    write(out.join("summary.txt"), summary)?;
    Ok(consensus)
}

fn cmd_baseline(a: &BaselineArgs) -> Result<(), AppError> {
    let st = BaselineSettings::resolve(a)?;
    let m = run_baseline(&st)?;
    println!("{} consensus area {} -> {}", st.method, m.area(), st.io.out.display());
    Ok(())
}

/// Writes the fixture masks plus `manifest.txt` (one file name per line, in
/// set order; the first entry is the ground truth).
pub fn run_synth(a: &SynthArgs) -> Result<Vec<PathBuf>, AppError> {
    let SynthKind::Lozenge = a.kind;
    let (_, s) = make_lozenge_set(a.size, a.outlier)?;
    create_dir(&a.out)?;
    let mut manifest = format!("# lozenge size={} outlier={}\n", a.size, a.outlier);
    let mut paths = Vec::new();
    for (m, name) in s.masks().iter().zip(s.names()) {
        let file = format!("{name}.pgm");
        let path = a.out.join(&file);
        write(path.clone(), pgm::encode_mask(m, pgm::Encoding::Binary))?;
        manifest.push_str(&file);
        manifest.push('\n');
        paths.push(path);
    }
    write(a.out.join("manifest.txt"), manifest)?;
    Ok(paths)
}

fn cmd_synth(a: &SynthArgs) -> Result<(), AppError> {
    let paths = run_synth(a)?;
    println!("wrote {} masks to {}", paths.len(), a.out.display());
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), AppError> {
    match &cli.command {
        Command::Fuse(a) => cmd_fuse(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Baseline(a) => cmd_baseline(a),
        Command::Synth(a) => cmd_synth(a),
    }
}
