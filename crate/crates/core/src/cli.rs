//! Command-line front end. Every subcommand writes a JSON report; the
//! `loss` subcommand additionally prints its value as a bare JSON number.
//!
//! Exit codes: 0 on success, 1 on I/O failures and failed self-tests,
//! 2 on invalid arguments or inputs.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::components::instances_from_labels;
use crate::container::{self, read_tensor, write_tensor};
use crate::contour;
use crate::embed::{self, PyramidSpec};
use crate::error::{Error, Result};
use crate::gsd::{self, DescriptorTensor, GsdConfig};
use crate::loss::{self, LogitMap, LossWeights, RefineSchedule};
use crate::metrics::{self, ConfusionMatrix, DistancePair};
use crate::raster::{self, load_instance_maps, load_label_map, ClassSidecar, LabelMap};
use crate::selftest::{self, SelftestOptions};

pub const TOOL: &str = "gsdkit";

#[derive(Debug, Parser)]
#[command(name = TOOL, version, about = "Log-polar contour descriptors, embeddings, metrics and loss oracles")]
pub struct Args {
    /// Worker threads; 1 gives the fully sequential path. Defaults to the
    /// available parallelism.
    #[arg(long, global = true, env = "GSD_THREADS")]
    pub threads: Option<usize>,

    /// Write the JSON report here instead of standard output.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Descriptor computation.
    #[command(subcommand)]
    Gsd(GsdCommand),
    /// Hybrid embedding at one or more scales.
    Embed(EmbedArgs),
    /// Dump instance contours as JSON.
    Contour(ContourArgs),
    /// Fréchet distance between two feature sets.
    Fid(FidArgs),
    /// mIoU, pixel accuracy and FWIoU over a directory of predictions.
    SegMetrics(SegArgs),
    /// LPIPS mean, mCSD and mOCD from per-pixel distance maps.
    Diversity(DiversityArgs),
    /// Forward value of one training loss.
    Loss(LossArgs),
    /// Run the built-in verification suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Subcommand)]
pub enum GsdCommand {
    Compute(ComputeArgs),
}

#[derive(Debug, clap::Args)]
pub struct ComputeArgs {
    /// Instance raster (PNG) or GSDT container of shape (H, W) or (B, H, W).
    #[arg(long)]
    pub instances: PathBuf,
    /// JSON file with any of n_rho, n_theta, r_inner, r_outer, epsilon,
    /// standardization.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Treat the input as class labels and split each class into
    /// 8-connected instances.
    #[arg(long)]
    pub from_labels: bool,
    /// With --from-labels, leave this class out of every instance.
    #[arg(long, requires = "from_labels")]
    pub skip_class: Option<u32>,
    /// Write unstandardised histograms.
    #[arg(long)]
    pub raw: bool,
}

#[derive(Debug, clap::Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub labels: PathBuf,
    /// Descriptor container (1, C, H, W) or (C, H, W).
    #[arg(long)]
    pub gsd: PathBuf,
    /// Comma-separated square sizes, finest first.
    #[arg(long, value_delimiter = ',', required = true)]
    pub scales: Vec<usize>,
    #[arg(long)]
    pub out_prefix: PathBuf,
    #[arg(long)]
    pub num_classes: Option<usize>,
    /// Class sidecar JSON; supplies num_classes.
    #[arg(long)]
    pub classes: Option<PathBuf>,
    /// Descriptor config the container was computed with.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct ContourArgs {
    #[arg(long)]
    pub instances: PathBuf,
    /// Only this instance id.
    #[arg(long)]
    pub id: Option<u32>,
}

#[derive(Debug, clap::Args)]
pub struct FidArgs {
    /// (n, dim) feature container.
    #[arg(long)]
    pub real: PathBuf,
    #[arg(long)]
    pub fake: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct SegArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Class whose true pixels are excluded.
    #[arg(long)]
    pub ignore: Option<usize>,
    #[arg(long)]
    pub num_classes: Option<usize>,
}

#[derive(Debug, clap::Args)]
pub struct DiversityArgs {
    /// Manifest JSON listing {"distance": container, "labels": raster} pairs.
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long)]
    pub num_classes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum LossOp {
    AdvD,
    AdvG,
    Fm,
    Perc,
    RefCe,
    RefCons,
    RefTotal,
    Total,
}

#[derive(Debug, clap::Args)]
pub struct LossArgs {
    #[arg(long, value_enum)]
    pub op: LossOp,
    /// Input containers. fm/perc take the real stack followed by the fake
    /// stack; ref_ce takes logits then mask.
    #[arg(long, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Scalar components for ref_total (real, fake, consistency) and total
    /// (adv_g, fm, perc, ref).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Vec<f64>,
    /// Loss weights as a JSON file or inline JSON object.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub epoch: Option<u32>,
    #[arg(long, default_value_t = loss::DEFAULT_WARMUP_EPOCHS)]
    pub gamma: u32,
    /// Divide each perceptual layer by its element count.
    #[arg(long)]
    pub per_element: bool,
}

#[derive(Debug, clap::Args)]
pub struct SelftestArgs {
    /// Perturb the named suite to confirm failures are reported.
    #[arg(long)]
    pub inject_fault: Option<String>,
}

/// Machine-readable result of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub values: Value,
    pub warnings: Vec<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl Report {
    fn new(command: &str) -> Self {
        Report {
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config: Value::Null,
            values: Value::Null,
            warnings: Vec::new(),
            timings_ms: BTreeMap::new(),
        }
    }
}

struct Outcome {
    report: Report,
    /// Printed to stdout regardless of where the report goes.
    primary: Option<String>,
    exit: i32,
}

impl Outcome {
    fn ok(report: Report) -> Self {
        Outcome {
            report,
            primary: None,
            exit: 0,
        }
    }
}

/// Parses `argv` and runs the command, printing to the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// As [`run`], with explicit output and diagnostic streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(&args) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
            if let Some(primary) = &outcome.primary {
                let _ = writeln!(out, "{primary}");
            }
            match &args.report {
                Some(path) => {
                    if let Err(e) = fs::write(path, format!("{text}\n")) {
                        let _ = writeln!(err, "error: cannot write report {}: {e}", path.display());
                        return 1;
                    }
                }
                None if outcome.primary.is_none() => {
                    let _ = writeln!(out, "{text}");
                }
                None => {}
            }
            outcome.exit
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_io() {
                1
            } else {
                2
            }
        }
    }
}

fn execute(args: &Args) -> Result<Outcome> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    pool.install(|| match &args.command {
        Command::Gsd(GsdCommand::Compute(a)) => gsd_compute(a),
        Command::Embed(a) => embed_cmd(a),
        Command::Contour(a) => contour_cmd(a),
        Command::Fid(a) => fid_cmd(a),
        Command::SegMetrics(a) => seg_cmd(a),
        Command::Diversity(a) => diversity_cmd(a),
        Command::Loss(a) => loss_cmd(a),
        Command::Selftest(a) => selftest_cmd(a),
    })
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn load_gsd_config(path: Option<&Path>) -> Result<GsdConfig> {
    match path {
        None => Ok(GsdConfig::default()),
        Some(p) => GsdConfig::from_json(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?),
    }
}

fn gsd_compute(a: &ComputeArgs) -> Result<Outcome> {
    let cfg = load_gsd_config(a.config.as_deref())?;
    let mut report = Report::new("gsd compute");
    let t0 = Instant::now();
    let batch = if a.from_labels {
        let labels = load_label_map(&a.instances, None)?;
        vec![instances_from_labels(&labels, a.skip_class)]
    } else {
        load_instance_maps(&a.instances)?
    };
    report.timings_ms.insert("load".into(), elapsed_ms(t0));

    let t1 = Instant::now();
    let raw = gsd::compute_raw_batch(&batch, &cfg)?;
    let out = if a.raw {
        raw
    } else {
        gsd::standardize(&raw, cfg.standardization)
    };
    report.timings_ms.insert("compute".into(), elapsed_ms(t1));
    write_tensor(&a.out, &out.to_tensor())?;

    if out.clamped_radial > 0 {
        report.warnings.push(format!(
            "{} contour points fell past the outer radius and were clamped into the last radial bin",
            out.clamped_radial
        ));
    }
    let instances: usize = batch.iter().map(|m| m.instance_ids().len()).sum();
    report.config = json!({
        "gsd": cfg,
        "instances_path": path_str(&a.instances),
        "from_labels": a.from_labels,
        "skip_class": a.skip_class,
        "raw": a.raw,
    });
    report.values = json!({
        "out": path_str(&a.out),
        "shape": [out.batch, out.channels(), out.height, out.width],
        "instances": instances,
        "clamped_radial": out.clamped_radial,
    });
    Ok(Outcome::ok(report))
}

fn embed_cmd(a: &EmbedArgs) -> Result<Outcome> {
    let cfg = load_gsd_config(a.config.as_deref())?;
    let k = match (&a.classes, a.num_classes) {
        (_, Some(k)) => Some(k),
        (Some(p), None) => Some(ClassSidecar::load(p)?.num_classes),
        (None, None) => None,
    };
    let labels = load_label_map(&a.labels, k)?;
    let tensor = read_tensor(&a.gsd)?;
    let tensor = match *tensor.shape() {
        [c, h, w] => {
            let (_, data) = tensor.into_parts();
            raster::Tensor::new(vec![1, c, h, w], data)?
        }
        _ => tensor,
    };
    let gsd = DescriptorTensor::from_tensor(&tensor, cfg)?;
    let e = embed::assemble(&raster::one_hot(&labels), &gsd)?;
    let spec = PyramidSpec::square(&a.scales)?;
    let levels = embed::downsample(&e, &spec)?;
    let mut outputs = Vec::new();
    for level in &levels {
        let path = PathBuf::from(format!(
            "{}_{}x{}.gsdt",
            a.out_prefix.display(),
            level.height,
            level.width
        ));
        write_tensor(&path, &level.to_tensor())?;
        outputs.push(json!({
            "path": path_str(&path),
            "shape": [level.batch, level.channels(), level.height, level.width],
        }));
    }
    let mut report = Report::new("embed");
    report.config = json!({
        "labels": path_str(&a.labels),
        "gsd": path_str(&a.gsd),
        "scales": a.scales,
        "num_classes": labels.num_classes(),
    });
    report.values = json!({ "split_index": e.split_index(), "outputs": outputs });
    Ok(Outcome::ok(report))
}

fn contour_cmd(a: &ContourArgs) -> Result<Outcome> {
    let maps = load_instance_maps(&a.instances)?;
    let mut items = Vec::new();
    for map in &maps {
        let sets = match a.id {
            Some(id) => vec![contour::extract_contours(map, id)?],
            None => contour::all_contours(map),
        };
        items.push(sets);
    }
    let mut report = Report::new("contour");
    report.config = json!({ "instances": path_str(&a.instances), "id": a.id });
    report.values = json!({ "contours": items });
    Ok(Outcome::ok(report))
}

fn fid_cmd(a: &FidArgs) -> Result<Outcome> {
    let t0 = Instant::now();
    let real = metrics::fit_gaussian(&read_tensor(&a.real)?)?;
    let fake = metrics::fit_gaussian(&read_tensor(&a.fake)?)?;
    let d = metrics::frechet_distance(&real, &fake)?;
    let mut report = Report::new("fid");
    report.config = json!({ "real": path_str(&a.real), "fake": path_str(&a.fake) });
    report.values = json!({
        "fid": d,
        "dim": real.dim(),
        "n_real": real.samples,
        "n_fake": fake.samples,
    });
    report.timings_ms.insert("total".into(), elapsed_ms(t0));
    Ok(Outcome::ok(report))
}

fn sorted_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    Ok(files)
}

fn seg_cmd(a: &SegArgs) -> Result<Outcome> {
    let truths = sorted_files(&a.truth)?;
    if truths.is_empty() {
        return Err(Error::Empty("truth directory"));
    }
    let mut pairs = Vec::with_capacity(truths.len());
    for t in &truths {
        let name = t.file_name().expect("listed files have names");
        let p = a.pred.join(name);
        if !p.is_file() {
            return Err(Error::Invalid(format!(
                "no prediction for {} in {}",
                name.to_string_lossy(),
                a.pred.display()
            )));
        }
        pairs.push((load_label_map(&p, None)?, load_label_map(t, None)?));
    }
    let k = match a.num_classes {
        Some(k) => k,
        None => pairs
            .iter()
            .map(|(p, t)| p.num_classes().max(t.num_classes()))
            .max()
            .unwrap_or(1),
    };
    let mut cm = ConfusionMatrix::new(k, a.ignore);
    for (p, t) in &pairs {
        cm.accumulate(&p.with_num_classes(k)?, &t.with_num_classes(k)?)?;
    }
    let scores = metrics::segmentation_scores(&cm)?;
    let mut report = Report::new("seg-metrics");
    report.config = json!({
        "pred": path_str(&a.pred),
        "truth": path_str(&a.truth),
        "ignore": a.ignore,
        "num_classes": k,
    });
    report.values = json!({
        "miou": scores.miou,
        "accuracy": scores.accuracy,
        "fwiou": scores.fwiou,
        "class_iou": cm.class_iou(),
        "images": pairs.len(),
        "pixels": cm.total(),
    });
    Ok(Outcome::ok(report))
}

/// Diversity manifest. Relative paths resolve against the manifest's
/// directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairManifest {
    #[serde(default)]
    pub num_classes: Option<usize>,
    pub pairs: Vec<PairEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairEntry {
    pub distance: PathBuf,
    pub labels: PathBuf,
}

fn diversity_cmd(a: &DiversityArgs) -> Result<Outcome> {
    let text = fs::read_to_string(&a.pairs).map_err(|e| Error::io(&a.pairs, e))?;
    let manifest: PairManifest = serde_json::from_str(&text)?;
    let base = a.pairs.parent().unwrap_or(Path::new("."));
    let mut pairs = Vec::with_capacity(manifest.pairs.len());
    for entry in &manifest.pairs {
        let labels = load_label_map(&base.join(&entry.labels), None)?;
        let dist = read_tensor(&base.join(&entry.distance))?;
        pairs.push(DistancePair::from_tensor(&dist, labels)?);
    }
    let k = a
        .num_classes
        .or(manifest.num_classes)
        .unwrap_or_else(|| pairs.iter().map(|p| p.labels.num_classes()).max().unwrap_or(1));
    let r = metrics::diversity(&pairs, k)?;
    let mut report = Report::new("diversity");
    if !r.skipped_classes.is_empty() {
        report.warnings.push(format!(
            "{} classes have no pixels and were skipped: {:?}",
            r.skipped_classes.len(),
            r.skipped_classes
        ));
    }
    if !r.empty_complements.is_empty() {
        report.warnings.push(format!(
            "classes {:?} cover every pixel; left out of mOCD",
            r.empty_complements
        ));
    }
    report.config = json!({ "pairs": path_str(&a.pairs), "num_classes": k });
    report.values = serde_json::to_value(&r)?;
    Ok(Outcome::ok(report))
}

fn load_masks(path: &Path, k: usize) -> Result<Vec<LabelMap>> {
    if container::is_container(path)? {
        let t = read_tensor(path)?;
        if let [b, h, w] = *t.shape() {
            let ids = t.to_ids()?;
            return (0..b)
                .map(|i| LabelMap::new(h, w, ids[i * h * w..(i + 1) * h * w].to_vec(), Some(k)))
                .collect();
        }
    }
    Ok(vec![load_label_map(path, Some(k))?])
}

fn parse_weights(spec: Option<&str>) -> Result<LossWeights> {
    let w: LossWeights = match spec {
        None => LossWeights::default(),
        Some(s) if s.trim_start().starts_with('{') => serde_json::from_str(s)?,
        Some(s) => {
            let p = Path::new(s);
            serde_json::from_str(&fs::read_to_string(p).map_err(|e| Error::io(p, e))?)?
        }
    };
    w.validate()?;
    Ok(w)
}

fn scalars(a: &LossArgs, n: usize, what: &str) -> Result<Vec<f64>> {
    let values = if !a.values.is_empty() {
        a.values.clone()
    } else {
        a.inputs
            .iter()
            .map(|p| {
                let t = read_tensor(p)?;
                match t.len() {
                    1 => Ok(t.to_f64_vec()[0]),
                    n => Err(Error::Shape(format!("{} holds {n} values, expected a scalar", p.display()))),
                }
            })
            .collect::<Result<_>>()?
    };
    if values.len() != n || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid(format!("{what} needs {n} finite values, got {values:?}")));
    }
    Ok(values)
}

fn inputs(a: &LossArgs, n: usize) -> Result<Vec<raster::Tensor>> {
    if a.inputs.len() != n {
        return Err(Error::Invalid(format!(
            "{:?} takes {n} input containers, got {}",
            a.op,
            a.inputs.len()
        )));
    }
    a.inputs.iter().map(|p| read_tensor(p)).collect()
}

fn stacks(a: &LossArgs) -> Result<(Vec<raster::Tensor>, Vec<raster::Tensor>)> {
    let n = a.inputs.len();
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::Invalid(format!(
            "feature losses take an even, non-zero number of inputs, got {n}"
        )));
    }
    let mut all = inputs(a, n)?;
    let fake = all.split_off(n / 2);
    Ok((all, fake))
}

fn loss_cmd(a: &LossArgs) -> Result<Outcome> {
    let mut report = Report::new("loss");
    let value = match a.op {
        LossOp::AdvD => {
            let t = inputs(a, 2)?;
            loss::adv_d(&t[0], &t[1])?
        }
        LossOp::AdvG => loss::adv_g(&inputs(a, 1)?[0])?,
        LossOp::Fm => {
            let (r, f) = stacks(a)?;
            loss::feature_match(&r, &f)?
        }
        LossOp::Perc => {
            let (r, f) = stacks(a)?;
            if r.len() != loss::PERCEPTUAL_LAYERS {
                report.warnings.push(format!(
                    "perceptual loss over {} layers; the reference setting uses {}",
                    r.len(),
                    loss::PERCEPTUAL_LAYERS
                ));
            }
            loss::perceptual(&r, &f, a.per_element)?
        }
        LossOp::RefCe => {
            if a.inputs.len() != 2 {
                return Err(Error::Invalid("ref_ce takes logits and a mask".into()));
            }
            let logits = LogitMap::from_tensor(&read_tensor(&a.inputs[0])?)?;
            let masks = load_masks(&a.inputs[1], logits.classes)?;
            loss::ref_ce(&logits, &masks)?
        }
        LossOp::RefCons => {
            let t = inputs(a, 2)?;
            loss::ref_consistency(&LogitMap::from_tensor(&t[0])?, &LogitMap::from_tensor(&t[1])?)?
        }
        LossOp::RefTotal => {
            let epoch = a
                .epoch
                .ok_or_else(|| Error::Invalid("ref_total needs --epoch".into()))?;
            let v = scalars(a, 3, "ref_total")?;
            loss::ref_total(
                RefineSchedule {
                    gamma: a.gamma,
                    epoch,
                },
                v[0],
                v[1],
                v[2],
            )
        }
        LossOp::Total => {
            let w = parse_weights(a.weights.as_deref())?;
            let v = scalars(a, 4, "total")?;
            report.config = json!({ "weights": w });
            loss::total(&w, v[0], v[1], v[2], v[3])
        }
    };
    let op = a.op.to_possible_value().expect("no skipped variants");
    let mut config = json!({
        "op": op.get_name(),
        "inputs": a.inputs.iter().map(|p| path_str(p)).collect::<Vec<_>>(),
        "epoch": a.epoch,
        "gamma": a.gamma,
        "per_element": a.per_element,
    });
    if let (Value::Object(dst), Value::Object(src)) = (&mut config, report.config.take()) {
        dst.extend(src);
    }
    report.config = config;
    report.values = json!({ "value": value });
    Ok(Outcome {
        primary: Some(serde_json::to_string(&value)?),
        report,
        exit: 0,
    })
}

fn selftest_cmd(a: &SelftestArgs) -> Result<Outcome> {
    if let Some(name) = &a.inject_fault {
        if !selftest::suite_names().contains(&name.as_str()) {
            return Err(Error::Invalid(format!(
                "unknown suite {name}; expected one of {:?}",
                selftest::suite_names()
            )));
        }
    }
    let t0 = Instant::now();
    let summary = selftest::run_selftest(&SelftestOptions {
        inject_fault: a.inject_fault.clone(),
    });
    let mut report = Report::new("selftest");
    report.timings_ms.insert("total".into(), elapsed_ms(t0));
    report.config = json!({ "inject_fault": a.inject_fault });
    for s in summary.suites.iter().filter(|s| !s.passed) {
        report
            .warnings
            .push(format!("{}::{} failed: {}", s.module, s.name, s.detail));
    }
    let exit = if summary.all_passed() { 0 } else { 1 };
    report.values = serde_json::to_value(&summary)?;
    Ok(Outcome {
        report,
        primary: None,
        exit,
    })
}
