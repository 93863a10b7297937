//! Command-line front end. Exit codes: 0 success, 1 pipeline or model
//! failure, 2 usage or configuration error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::image::{Alphabet, BinaryMask, GrayImage, LabelMap, CP};
use crate::io;
use crate::metrics::evaluate_labelmap;
use crate::phantoms::{make_brain_phantom, make_cardiac_phantom, make_fetal_phantom, PhantomTask};
use crate::ph::{export, persistence, top_dim, Direction, Filtration, PersistenceDiagram};
use crate::pipeline::{
    segment_cardiac_2d, segment_cardiac_3d, segment_fetal_slice, segment_fetal_volume, segment_glioblastoma, Config,
    RunReport,
};
use crate::validation::{check_acdc, check_brats, check_sta_volume, AcdcMode, HypothesisReport};

#[derive(Debug, Parser)]
#[command(name = "toposeg", version, about = "Topology-guided segmentation of grey 2D/3D images")]
pub struct Cli {
    /// TOML configuration; defaults apply to anything it leaves out.
    #[arg(long, global = true, env = "TOPOSEG_CONFIG")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a segmentation pipeline.
    Segment(SegmentArgs),
    /// Compute a persistence diagram.
    Ph(PhArgs),
    /// Check the anatomical model on a reference segmentation.
    Validate(ValidateArgs),
    /// Dice of a prediction against a reference.
    Eval(EvalArgs),
    /// Write a synthetic phantom and its ground truth.
    Phantom(PhantomArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    Brain,
    Cardiac2d,
    Cardiac3d,
    Fetal,
}

impl Task {
    fn alphabet(self) -> Alphabet {
        match self {
            Task::Brain => Alphabet::Brats,
            Task::Cardiac2d | Task::Cardiac3d => Alphabet::Acdc,
            Task::Fetal => Alphabet::Sta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Nifti,
    Raw,
}

impl Format {
    fn file(self, stem: &str) -> String {
        match self {
            Format::Nifti => format!("{stem}.nii.gz"),
            Format::Raw => format!("{stem}.raw"),
        }
    }
}

/// `AXIS:INDEX`, e.g. `2:17`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SliceSpec {
    pub axis: usize,
    pub index: usize,
}

impl std::str::FromStr for SliceSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, i) = s.split_once(':').ok_or_else(|| format!("expected AXIS:INDEX, got {s:?}"))?;
        let axis: usize = a.parse().map_err(|_| format!("bad axis {a:?}"))?;
        let index: usize = i.parse().map_err(|_| format!("bad index {i:?}"))?;
        if axis > 2 {
            return Err(format!("axis must be 0, 1 or 2, got {axis}"));
        }
        Ok(SliceSpec { axis, index })
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long, value_enum)]
    pub task: Task,
    /// FLAIR volume (brain).
    #[arg(long)]
    pub flair: Option<PathBuf>,
    /// T1ce volume (brain).
    #[arg(long)]
    pub t1ce: Option<PathBuf>,
    /// Input image (cardiac, fetal).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Take one slice of a volume before running a 2D pipeline.
    #[arg(long)]
    pub slice: Option<SliceSpec>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct PhArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `sub` or `super`.
    #[arg(long, default_value = "super")]
    pub direction: Direction,
    /// Highest homology degree; clamped to what the grid carries.
    #[arg(long)]
    pub maxdim: Option<usize>,
    #[arg(long)]
    pub slice: Option<SliceSpec>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub task: Task,
    /// Reference label map.
    #[arg(long)]
    pub seg: PathBuf,
    #[arg(long)]
    pub flair: Option<PathBuf>,
    #[arg(long)]
    pub t1ce: Option<PathBuf>,
    /// Intensity image (cardiac).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Myocardium dilation radius before the separation checks.
    #[arg(long, default_value_t = 1)]
    pub myo_dilation_radius: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub task: Task,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    /// Overrides the task of the `[phantom]` table.
    #[arg(long, value_enum)]
    pub task: Option<Task>,
    /// Overrides the noise seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: msg.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.root() {
            Error::Config(_)
            | Error::Nifti(_)
            | Error::Fixture(_)
            | Error::Io(_)
            | Error::Rank { .. }
            | Error::DimMismatch(..)
            | Error::InvalidDims(_)
            | Error::SliceIndex { .. }
            | Error::Alphabet(_)
            | Error::NonFinite(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

#[derive(Debug, Serialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

/// Record of one command: inputs, configuration digest and outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub config_digest: String,
    pub tool_version: String,
    pub timing: Vec<StageTime>,
    pub outputs: Vec<String>,
}

struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        if let Some(stem) = name.strip_suffix(".raw") {
            self.written.push(format!("{stem}.json"));
        }
        self.dir.join(name)
    }

    fn text(&mut self, name: &str, body: &str) -> CliResult<()> {
        let p = self.path(name);
        std::fs::write(&p, body).map_err(|e| Failure::from(Error::Io(e)))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let body = serde_json::to_string_pretty(value).expect("serialisable") + "\n";
        self.text(name, &body)
    }

    fn finish(self, command: &str, inputs: &[&Path], cfg: &Config, timing: Vec<(String, f64)>) -> CliResult<()> {
        let manifest = RunManifest {
            command: command.into(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            config_digest: cfg.digest(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            timing: timing
                .into_iter()
                .map(|(stage, seconds)| StageTime { stage, seconds })
                .collect(),
            outputs: self.written.clone(),
        };
        let body = serde_json::to_string_pretty(&manifest).expect("serialisable") + "\n";
        std::fs::write(self.dir.join("manifest.json"), body).map_err(|e| Failure::from(Error::Io(e)))
    }
}

fn load_config(path: Option<&Path>) -> CliResult<Config> {
    match path {
        Some(p) => Ok(Config::load(p)?),
        None => Ok(Config::default()),
    }
}

fn need<'a>(arg: &'a Option<PathBuf>, flag: &str, task: Task) -> CliResult<&'a Path> {
    arg.as_deref()
        .ok_or_else(|| usage(format!("--{flag} is required for task {task:?}").to_lowercase()))
}

fn load_input(path: &Path, slice: Option<SliceSpec>) -> CliResult<GrayImage> {
    let img = io::load_image(path)?;
    match slice {
        None => Ok(img),
        Some(s) if img.rank() == 3 => Ok(img.extract_slice(s.axis, s.index)?),
        Some(_) => Err(usage("--slice needs a 3D input")),
    }
}

fn write_diagram(out: &mut Outputs, diag: &PersistenceDiagram, dims: crate::image::Dims) -> CliResult<()> {
    out.text("diagram.csv", &export::to_csv(diag, dims))?;
    out.text("diagram.svg", &export::to_svg(diag))
}

fn cmd_segment(a: &SegmentArgs, cfg: &Config) -> CliResult<()> {
    let mut out = Outputs::new(&a.out)?;
    let labels_name = a.format.file("labels");
    let (inputs, report, labels): (Vec<&Path>, RunReport, LabelMap) = match a.task {
        Task::Brain => {
            let (fp, tp) = (need(&a.flair, "flair", a.task)?, need(&a.t1ce, "t1ce", a.task)?);
            let (flair, t1ce) = (load_input(fp, a.slice)?, load_input(tp, a.slice)?);
            let seg = segment_glioblastoma(&flair, &t1ce, &cfg.pipeline)?;
            write_diagram(&mut out, &seg.diagram, seg.diagram_dims)?;
            (vec![fp, tp], seg.report, seg.labels)
        }
        Task::Cardiac2d | Task::Cardiac3d => {
            let ip = need(&a.input, "input", a.task)?;
            let img = load_input(ip, a.slice)?;
            let seg = if a.task == Task::Cardiac2d {
                if img.rank() != 2 {
                    return Err(usage("expected 2D input; pass --slice AXIS:INDEX for volumes"));
                }
                segment_cardiac_2d(&img, &cfg.pipeline)?
            } else {
                if img.rank() != 3 {
                    return Err(usage("expected 3D input"));
                }
                segment_cardiac_3d(&img, &cfg.pipeline)?
            };
            write_diagram(&mut out, &seg.diagram, seg.diagram_dims)?;
            (vec![ip], seg.report, seg.labels)
        }
        Task::Fetal => {
            let ip = need(&a.input, "input", a.task)?;
            let img = load_input(ip, a.slice)?;
            let (mask, report): (BinaryMask, RunReport) = if img.rank() == 2 {
                let r = segment_fetal_slice(&img, &cfg.pipeline)?;
                let mut report = RunReport::new("fetal");
                for p in &r.points {
                    report.points.push(crate::pipeline::report::ReportPoint::new("CP", Direction::Sublevel, p));
                }
                report.slices.push(r.outcome);
                (r.mask, report)
            } else {
                let r = segment_fetal_volume(&img, &cfg.pipeline)?;
                (r.mask, r.report)
            };
            let labels = LabelMap::from_masks(mask.dims(), Alphabet::Sta, &[(CP, &mask)])?;
            (vec![ip], report, labels)
        }
    };
    io::save_labels(&labels, out.path(&labels_name))?;
    out.json("report.json", &report)?;
    let timing = report.timing.clone();
    out.finish("segment", &inputs, cfg, timing)
}

fn cmd_ph(a: &PhArgs, cfg: &Config) -> CliResult<()> {
    let img = load_input(&a.input, a.slice)?;
    let top = top_dim(img.dims());
    let max_dim = a.maxdim.unwrap_or(top);
    if max_dim > top {
        eprintln!("warning: --maxdim {max_dim} exceeds what this grid carries; computing up to {top}");
    }
    let start = Instant::now();
    let filt = Filtration::new(&img, a.direction)?;
    let diag = persistence(&filt, max_dim.min(top));
    let seconds = start.elapsed().as_secs_f64();
    let mut out = Outputs::new(&a.out)?;
    write_diagram(&mut out, &diag, img.dims())?;
    out.finish("ph", &[&a.input], cfg, vec![("persistence".into(), seconds)])
}

fn cmd_validate(a: &ValidateArgs, cfg: &Config) -> CliResult<HypothesisReport> {
    let seg = io::load_labels(&a.seg, a.task.alphabet())?;
    let report = match a.task {
        Task::Brain => {
            let flair = io::load_image(need(&a.flair, "flair", a.task)?)?;
            let t1ce = io::load_image(need(&a.t1ce, "t1ce", a.task)?)?;
            check_brats(&seg, &flair, &t1ce)?
        }
        Task::Cardiac2d | Task::Cardiac3d => {
            let img = io::load_image(need(&a.input, "input", a.task)?)?;
            let mode = if a.task == Task::Cardiac2d {
                AcdcMode::Slice
            } else {
                AcdcMode::Volume
            };
            check_acdc(&seg, &img, mode, a.myo_dilation_radius)?
        }
        Task::Fetal => {
            let cp = seg.class_mask(CP);
            check_sta_volume(&cp, cfg.pipeline.fetal_axis)?
        }
    };
    Ok(report)
}

#[derive(Serialize)]
struct EvalRow<'a> {
    pred: String,
    truth: String,
    #[serde(flatten)]
    eval: &'a crate::metrics::Evaluation,
}

fn cmd_eval(a: &EvalArgs) -> CliResult<String> {
    let alphabet = a.task.alphabet();
    let pred = io::load_labels(&a.pred, alphabet)?;
    let truth = io::load_labels(&a.truth, alphabet)?;
    let e = evaluate_labelmap(&pred, &truth)?;
    let mut text = String::new();
    for c in e.classes.iter().chain(&e.unions) {
        text += &format!("{:<6}{:.6}\n", c.class, c.dice);
    }
    text += &format!("{:<6}{:.6}\n", "mean", e.macro_dice);
    let row = EvalRow {
        pred: a.pred.display().to_string(),
        truth: a.truth.display().to_string(),
        eval: &e,
    };
    text += &serde_json::to_string(&row).expect("serialisable");
    text.push('\n');
    Ok(text)
}

fn cmd_phantom(a: &PhantomArgs, cfg: &Config) -> CliResult<()> {
    let mut spec = cfg.phantom.clone();
    if let Some(t) = a.task {
        spec.task = match t {
            Task::Brain => PhantomTask::Brain,
            Task::Cardiac2d => PhantomTask::Cardiac2d,
            Task::Cardiac3d => PhantomTask::Cardiac3d,
            Task::Fetal => PhantomTask::Fetal,
        };
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    spec.validate()?;
    let start = Instant::now();
    let mut out = Outputs::new(&a.out)?;
    let f = |stem: &str| a.format.file(stem);
    match spec.task {
        PhantomTask::Brain => {
            let p = make_brain_phantom(&spec)?;
            io::save_image(&p.flair, out.path(&f("flair")))?;
            io::save_image(&p.t1ce, out.path(&f("t1ce")))?;
            io::save_labels(&p.truth, out.path(&f("truth")))?;
        }
        PhantomTask::Cardiac2d | PhantomTask::Cardiac3d => {
            let p = make_cardiac_phantom(&spec, spec.task == PhantomTask::Cardiac3d)?;
            io::save_image(&p.image, out.path(&f("image")))?;
            io::save_labels(&p.truth, out.path(&f("truth")))?;
        }
        PhantomTask::Fetal => {
            let p = make_fetal_phantom(&spec)?;
            io::save_image(&p.volume, out.path(&f("image")))?;
            let truth = LabelMap::from_masks(p.truth.dims(), Alphabet::Sta, &[(CP, &p.truth)])?;
            io::save_labels(&truth, out.path(&f("truth")))?;
        }
    }
    let used = Config {
        pipeline: cfg.pipeline.clone(),
        phantom: spec,
    };
    out.text("config.toml", &used.to_toml())?;
    out.finish("phantom", &[], &used, vec![("phantom".into(), start.elapsed().as_secs_f64())])
}

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli) -> CliResult<()> {
    let cfg = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Segment(a) => cmd_segment(a, &cfg),
        Command::Ph(a) => cmd_ph(a, &cfg),
        Command::Validate(a) => {
            let report = cmd_validate(a, &cfg)?;
            println!("{}", serde_json::to_string_pretty(&report).expect("serialisable"));
            if report.overall {
                Ok(())
            } else {
                Err(Failure {
                    code: 1,
                    message: format!("model check failed: {}", report.failed_names().join(", ")),
                })
            }
        }
        Command::Eval(a) => {
            print!("{}", cmd_eval(a)?);
            Ok(())
        }
        Command::Phantom(a) => cmd_phantom(a, &cfg),
    }
}
