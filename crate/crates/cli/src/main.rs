use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use handcue::background::{train_codebook, CodebookModel, CodebookParams};
use handcue::cpdh::{build_gesture_db, DescriptorParams, Gesture, GestureDb};
use handcue::harness::{
    evaluate, format_report, format_roc, gen_synthetic, load_frames, match_intervals, parse_intervals, parse_truth,
    read_pnm, recognition_scores, roc_points, roc_thresholds, FrameSource, Interval, ScenarioSpec,
};
use handcue::imgcore::{threshold, Frame, Rect};
use handcue::pipeline::{
    run_session, EventSink, IndicatorParams, Pipeline, PipelineConfig, SessionSummary, TcpBroadcastSink, WriterSink,
};
use handcue::skintrack::{
    build_skin_model, BlobDetector, CascadeDetector, CascadeModel, HandDetector, SkinModel, SkinParams,
};

#[derive(Parser)]
#[command(name = "handcue", version, about = "Hand-raise detection and participation indicators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a codebook background model from actor-free frames.
    TrainBg {
        frames_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Chroma radius used while training.
        #[arg(long, default_value_t = 10.0)]
        eps: f64,
        /// Chroma radius used while detecting.
        #[arg(long, default_value_t = 12.0)]
        eps_detect: f64,
        #[arg(long, default_value_t = 0.7)]
        alpha: f64,
        #[arg(long, default_value_t = 1.3)]
        beta: f64,
    },
    /// Build a gesture database from labelled silhouette masks
    /// (`palm_*.pgm`, `fist_*.pgm`, or `palm/` and `fist/` subdirectories).
    BuildDb {
        masks_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Contour samples.
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Radial bins.
        #[arg(long, default_value_t = 5)]
        u: usize,
        /// Angular bins.
        #[arg(long, default_value_t = 12)]
        v: usize,
    },
    /// Process a frame directory and stream gesture and indicator records.
    Run {
        frames_dir: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Serve records to TCP clients at host:port.
        #[arg(long, conflicts_with = "out")]
        listen: Option<String>,
        /// Write records to a file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "L1")]
        learner: String,
        /// With --listen, wait for this many clients before starting.
        #[arg(long, default_value_t = 0)]
        wait_clients: usize,
        /// Pace frames at the stream frame rate.
        #[arg(long)]
        realtime: bool,
    },
    /// Run the pipeline against ground truth and write recall/precision and ROC tables.
    Eval {
        frames_dir: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Raise intervals for the event-level row of the report.
        #[arg(long)]
        raises: Option<PathBuf>,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        roc: PathBuf,
        /// Minimum interval IoU for an event-level match.
        #[arg(long, default_value_t = 0.5)]
        event_iou: f64,
    },
    /// Render a synthetic scenario with ground truth.
    GenSynth {
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    bg: PathBuf,
    #[arg(long)]
    db: PathBuf,
    /// Cascade model for hand (re-)detection; motion blobs are used otherwise.
    #[arg(long)]
    cascade: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    fps: f64,
    /// Face box `x,y,w,h` in the first frame to sample the skin model from.
    #[arg(long, value_parser = parse_rect)]
    face: Option<Rect>,
    #[arg(long, default_value_t = 5)]
    debounce: usize,
    /// Indicator window, seconds.
    #[arg(long, default_value_t = 300.0)]
    window: f64,
    /// Events per minute below which the indicator goes red.
    #[arg(long, default_value_t = 0.5)]
    red_threshold: f64,
    /// Seconds of low participation before going red.
    #[arg(long, default_value_t = 120.0)]
    grace: f64,
    /// 1-NN acceptance distance; derived from the database when omitted.
    #[arg(long)]
    max_distance: Option<f64>,
    #[arg(long, default_value_t = 150)]
    min_area: usize,
}

fn parse_rect(s: &str) -> std::result::Result<Rect, String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("bad number {p:?}")))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [x, y, w, h] => Ok(Rect::new(x, y, w, h)),
        _ => Err("expected x,y,w,h".into()),
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::TrainBg {
            frames_dir,
            out,
            eps,
            eps_detect,
            alpha,
            beta,
        } => train_bg(&frames_dir, &out, eps, eps_detect, alpha, beta),
        Command::BuildDb { masks_dir, out, n, u, v } => build_db(&masks_dir, &out, n, u, v),
        Command::Run {
            frames_dir,
            pipeline,
            listen,
            out,
            learner,
            wait_clients,
            realtime,
        } => run(&frames_dir, &pipeline, listen, out, &learner, wait_clients, realtime),
        Command::Eval {
            frames_dir,
            truth,
            pipeline,
            raises,
            report,
            roc,
            event_iou,
        } => eval(&frames_dir, &truth, &pipeline, raises.as_deref(), &report, &roc, event_iou),
        Command::GenSynth { spec, seed, out } => gen_synth(&spec, seed, &out),
    }
}

fn train_bg(dir: &Path, out: &Path, eps: f64, eps_detect: f64, alpha: f64, beta: f64) -> Result<()> {
    let frames = load_frames(dir, 1.0)?.read_all()?;
    let params = CodebookParams {
        eps_train: eps,
        eps_detect,
        alpha,
        beta,
        ..CodebookParams::default()
    };
    let started = Instant::now();
    let model = train_codebook(&frames, params)?;
    model.write_to(BufWriter::new(File::create(out)?))?;
    log::info!(
        "trained on {} frames in {:.2?}: {} codewords ({:.2} per pixel)",
        frames.len(),
        started.elapsed(),
        model.total_codewords(),
        model.total_codewords() as f64 / (model.width() * model.height()) as f64
    );
    Ok(())
}

fn mask_label(path: &Path, masks_dir: &Path) -> Option<Gesture> {
    let parent = path.parent()?;
    if parent != masks_dir {
        return parent.file_name()?.to_str()?.parse().ok();
    }
    let stem = path.file_stem()?.to_str()?;
    stem.split(['_', '-', '.']).next()?.parse().ok()
}

fn collect_masks(dir: &Path, root: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if path.is_dir() && dir == root {
            collect_masks(&path, root, out)?;
        } else if matches!(path.extension().and_then(|e| e.to_str()), Some("pgm" | "ppm")) {
            out.push(path);
        }
    }
    Ok(())
}

fn build_db(masks_dir: &Path, out: &Path, n: usize, u: usize, v: usize) -> Result<()> {
    let mut paths = Vec::new();
    collect_masks(masks_dir, masks_dir, &mut paths)?;
    paths.sort();
    let mut masks = Vec::new();
    for path in &paths {
        let Some(label) = mask_label(path, masks_dir) else {
            log::warn!("skipping {}: no palm/fist label in its name", path.display());
            continue;
        };
        let frame = read_pnm(path)?;
        masks.push((threshold(&frame.to_gray(), 128), label));
    }
    if masks.is_empty() {
        bail!("no labelled masks found in {}", masks_dir.display());
    }
    let params = DescriptorParams {
        samples: n,
        radial_bins: u,
        angular_bins: v,
        ..DescriptorParams::default()
    };
    let built = build_gesture_db(&masks, &params)?;
    fs::write(out, built.db.to_text())?;
    log::info!(
        "{} entries ({} palm, {} fist), {} skipped; 95th percentile intra-class distance {}",
        built.db.len(),
        built.db.count(Gesture::Palm),
        built.db.count(Gesture::Fist),
        built.skipped,
        built
            .db
            .intra_class_percentile(0.95)
            .map_or("n/a".to_string(), |d| format!("{d:.3}"))
    );
    Ok(())
}

fn load_pipeline(args: &PipelineArgs, source: &FrameSource) -> Result<Pipeline> {
    let background = CodebookModel::read_from(io::BufReader::new(
        File::open(&args.bg).with_context(|| format!("opening {}", args.bg.display()))?,
    ))?;
    let db = GestureDb::parse(&fs::read_to_string(&args.db).with_context(|| format!("reading {}", args.db.display()))?)?;
    let detector: Box<dyn HandDetector> = match &args.cascade {
        Some(path) => Box::new(CascadeDetector {
            model: CascadeModel::parse(&fs::read_to_string(path)?)?,
            scale_factor: 1.1,
            min_neighbors: 3,
        }),
        None => Box::new(BlobDetector { min_area: args.min_area }),
    };
    let skin = match args.face {
        Some(face) => build_skin_model(&source.read(0)?, face, &SkinParams::default())?,
        None => SkinModel::default_prior(),
    };
    let config = PipelineConfig {
        debounce_k: args.debounce,
        indicator: IndicatorParams {
            window_w: args.window,
            red_threshold: args.red_threshold,
            grace: args.grace,
        },
        max_distance: args.max_distance,
        min_area: args.min_area,
        ..PipelineConfig::default()
    };
    let pipeline = Pipeline::new(background, db, detector, skin, config)?;
    log::info!("max_distance {:.3}", pipeline.max_distance());
    Ok(pipeline)
}

fn paced<'a>(source: &'a FrameSource, realtime: bool) -> impl Iterator<Item = handcue::Result<Frame>> + 'a {
    let start = Instant::now();
    let first = source.first_index() as f64 / source.fps();
    source.frames().inspect(move |f| {
        if let (true, Ok(f)) = (realtime, f) {
            let due = Duration::from_secs_f64((f.timestamp() - first).max(0.0));
            if let Some(wait) = due.checked_sub(start.elapsed()) {
                std::thread::sleep(wait);
            }
        }
    })
}

fn log_summary(summary: &SessionSummary, elapsed: Duration) {
    let n = summary.events.len();
    log::info!(
        "{n} frames in {:.2?} ({:.1} fps), {} raise events",
        elapsed,
        n as f64 / elapsed.as_secs_f64().max(1e-9),
        summary.raises.len()
    );
}

fn run(
    dir: &Path,
    args: &PipelineArgs,
    listen: Option<String>,
    out: Option<PathBuf>,
    learner: &str,
    wait_clients: usize,
    realtime: bool,
) -> Result<()> {
    let source = load_frames(dir, args.fps)?;
    let pipeline = load_pipeline(args, &source)?;
    let sink: Box<dyn EventSink> = match (listen, out) {
        (Some(addr), _) => {
            let sink = TcpBroadcastSink::bind(&addr).with_context(|| format!("binding {addr}"))?;
            log::info!("serving records on {}", sink.local_addr());
            if wait_clients > 0 && !sink.wait_for_clients(wait_clients, Duration::from_secs(600)) {
                bail!("timed out waiting for {wait_clients} client(s)");
            }
            Box::new(sink)
        }
        (None, Some(path)) => Box::new(WriterSink::new(BufWriter::new(File::create(&path)?))),
        (None, None) => Box::new(WriterSink::new(io::stdout())),
    };
    let started = Instant::now();
    let summary = run_session(&pipeline, learner, paced(&source, realtime), sink.as_ref())?;
    log_summary(&summary, started.elapsed());
    Ok(())
}

fn eval(
    dir: &Path,
    truth_path: &Path,
    args: &PipelineArgs,
    raises: Option<&Path>,
    report_path: &Path,
    roc_path: &Path,
    event_iou: f64,
) -> Result<()> {
    let source = load_frames(dir, args.fps)?;
    let pipeline = load_pipeline(args, &source)?;
    let rows = parse_truth(&fs::read_to_string(truth_path)?)?;
    let mut truth = vec![None; source.len()];
    for r in rows {
        let Some(slot) = r.index.checked_sub(source.first_index()).and_then(|i| truth.get_mut(i)) else {
            bail!("truth row for frame {} has no matching frame file", r.index);
        };
        *slot = r.label;
    }
    let sink = WriterSink::new(io::sink());
    let started = Instant::now();
    let summary = run_session(&pipeline, "eval", source.frames(), &sink)?;
    log_summary(&summary, started.elapsed());
    let pred: Vec<Option<Gesture>> = summary.events.iter().map(|e| e.gesture).collect();
    let palm = evaluate(&pred, &truth, Gesture::Palm)?;
    let fist = evaluate(&pred, &truth, Gesture::Fist)?;
    let mut rows: Vec<(&str, &_)> = vec![("palm", &palm), ("fist", &fist)];
    let events;
    if let Some(path) = raises {
        let truth_raises = parse_intervals(&fs::read_to_string(path)?)?;
        let found: Vec<Interval> = summary.raises.iter().map(|r| Interval::new(r.t_start, r.t_end)).collect();
        events = match_intervals(&found, &truth_raises, event_iou);
        rows.push(("raise_events", &events));
    }
    fs::write(report_path, format_report(&rows))?;
    let scored = recognition_scores(&summary.nearest, &truth);
    match roc_points(&scored, &roc_thresholds(&scored)) {
        Ok(points) => fs::write(roc_path, format_roc(&points))?,
        Err(e) => {
            log::warn!("{e}; writing an empty ROC table");
            fs::write(roc_path, format_roc(&[]))?;
        }
    }
    print!("{}", format_report(&rows));
    Ok(())
}

fn gen_synth(spec_path: &Path, seed: u64, out: &Path) -> Result<()> {
    let spec = ScenarioSpec::parse(&fs::read_to_string(spec_path)?)
        .with_context(|| format!("reading {}", spec_path.display()))?;
    let summary = gen_synthetic(&spec, seed, out)?;
    log::info!(
        "wrote {} frames, {} training frames, {} masks, {} raise intervals to {}",
        summary.frames,
        summary.train_frames,
        summary.masks,
        summary.raises.len(),
        out.display()
    );
    Ok(())
}
