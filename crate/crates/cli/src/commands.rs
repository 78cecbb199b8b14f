use std::path::{Path, PathBuf};

use ampnet_core::audio::{read_wav, write_wav};
use ampnet_core::checkpoint::{Checkpoint, ModelDescriptor};
use ampnet_core::dataset::MANIFEST_FILE;
use ampnet_core::engine::{benchmark_throughput, loudness_match, CabinetIR, ControlAutomation, StreamSession};
use ampnet_core::nn::gradcheck::{check_conv, check_lstm, ConvCheckSpec, LstmCheckSpec};
use ampnet_core::nn::{AdamConfig, LstmModel};
use ampnet_core::plan::{plan_session, Session};
use ampnet_core::rig::{capture_session, verify_capture, ExcitationCorpus};
use ampnet_core::train::{control_interpolation_eval, train, validate, LossKind, TrainConfig};
use ampnet_core::{ControlSpace, Dataset, Split};
use anyhow::{bail, Context, Result};
use log::{info, warn};
use rand::SeedableRng;

use crate::summary::{Status, Summary};
use crate::{BenchArgs, CaptureArgs, Cli, Command, EvalArgs, GradcheckArgs, PlanArgs, RunArgs, TrainArgs};

/// Synthetic corpus used when no excitation directory is given.
const SYNTHETIC_CLIP_SECONDS: f64 = 10.0;
const SYNTHETIC_CLIPS_PER_KIND: usize = 4;

pub fn dispatch(cli: &Cli) -> Result<Summary> {
    match &cli.command {
        Command::Plan(a) => plan(a, cli.seed),
        Command::Capture(a) => capture(a, cli.seed),
        Command::Train(a) => train_cmd(a, cli.seed),
        Command::Eval(a) => eval(a, cli.seed),
        Command::Run(a) => run(a),
        Command::Gradcheck(a) => gradcheck(a, cli.seed),
        Command::Bench(a) => bench(a, cli.seed),
    }
}

fn parse_space(spec: &str) -> Result<ControlSpace> {
    if spec.eq_ignore_ascii_case("amp") {
        return Ok(ControlSpace::amp_knobs());
    }
    Ok(spec.parse()?)
}

fn manifest_path(p: PathBuf) -> PathBuf {
    if p.is_dir() {
        p.join(MANIFEST_FILE)
    } else {
        p
    }
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn corpus(dir: Option<&Path>, sample_rate: u32, seed: u64) -> Result<ExcitationCorpus> {
    match dir {
        Some(d) => Ok(ExcitationCorpus::load_dir(d, sample_rate)?),
        None => Ok(ExcitationCorpus::synthetic(
            sample_rate,
            SYNTHETIC_CLIP_SECONDS,
            SYNTHETIC_CLIPS_PER_KIND,
            seed,
        )),
    }
}

fn plan(a: &PlanArgs, seed: u64) -> Result<Summary> {
    let space = parse_space(&a.controls)?;
    if a.count == 0 {
        bail!("--count must be at least 1");
    }
    let out = a.out.clone().unwrap_or_else(|| a.dir.data_dir.join("session.jsonl"));
    let session = plan_session(&space, a.count, seed)?;
    create_parent(&out)?;
    session.write(&out)?;
    let h = &session.header;
    info!("wrote {} steps to {}", h.steps, out.display());
    let mut s = Summary::ok("plan")
        .with("steps", h.steps)
        .float("tour_length", h.tour_length)
        .float("return_travel", h.return_travel);
    for (name, travel) in space.names().iter().zip(&h.per_control_travel) {
        s = s.float(&format!("travel_{name}"), *travel);
    }
    Ok(s.with("session", out.display()))
}

fn capture(a: &CaptureArgs, seed: u64) -> Result<Summary> {
    let session_path = a.session.clone().unwrap_or_else(|| a.dir.data_dir.join("session.jsonl"));
    let out = a.out.clone().unwrap_or_else(|| a.dir.data_dir.join("dataset"));
    let session = Session::read(&session_path)?;
    if !(a.segment_seconds > 0.0) || a.sample_rate == 0 {
        bail!("sample rate and segment length must be positive");
    }
    if a.train + a.val > session.steps.len() {
        bail!(
            "--train {} + --val {} exceeds the {} session steps",
            a.train,
            a.val,
            session.steps.len()
        );
    }
    let segment_length = (a.segment_seconds * a.sample_rate as f64).round() as usize;
    let corpus = corpus(a.corpus_dir.as_deref(), a.sample_rate, seed)?;
    let mut ds = capture_session(&session, &corpus, segment_length, seed)?;
    let mismatches = verify_capture(&ds)?;
    ds.random_split(a.train, a.val, seed)?;
    let manifest = ds.write(&out)?;
    info!("wrote {} examples to {}", ds.len(), manifest.display());
    let mut s = Summary::ok("capture")
        .with("examples", ds.len())
        .with("train", a.train)
        .with("val", a.val)
        .with("segment_length", segment_length)
        .with("mismatches", mismatches.len())
        .with("manifest", manifest.display());
    if !mismatches.is_empty() {
        warn!("capture is not reproducible for {mismatches:?}");
        s.set_status(Status::Fail);
    }
    Ok(s)
}

fn train_cmd(a: &TrainArgs, seed: u64) -> Result<Summary> {
    let manifest = manifest_path(a.dataset.clone().unwrap_or_else(|| a.dir.data_dir.join("dataset")));
    let out = a.out.clone().unwrap_or_else(|| a.dir.data_dir.join("model.ampnet"));
    let report_dir = a.report_dir.clone().unwrap_or_else(|| a.dir.data_dir.join("train"));
    let ds = Dataset::read(&manifest)?;
    create_parent(&out)?;
    let config = TrainConfig {
        hidden_size: a.hidden,
        batch_size: a.batch_size,
        iterations: a.iterations,
        adam: AdamConfig {
            learning_rate: a.lr,
            beta1: a.beta1,
            beta2: a.beta2,
            epsilon: a.eps,
        },
        loss: a.loss.parse::<LossKind>()?,
        warmup_samples: a.warmup,
        seed,
        validate_every: a.validate_every,
        checkpoint_every: a.checkpoint_every,
        checkpoint_path: (a.checkpoint_every > 0).then(|| out.clone()),
        truncation: a.truncation,
        head_init_scale: a.head_init_scale,
        grad_clip: a.grad_clip,
        lr_final_fraction: a.lr_final_fraction,
        strict_deterministic: a.strict_deterministic,
    };
    let (checkpoint, report) = train(&ds, &config)?;
    checkpoint.save(&out)?;
    report.write(&report_dir)?;
    let mut s = Summary::ok("train")
        .with("iterations", a.iterations)
        .with("best_iteration", report.best_iteration);
    if let Some(esr) = report.best_validation_esr {
        s = s.float("esr", esr);
    }
    if let Some(last) = report.final_validation_esr() {
        s = s.float("final_esr", last);
    }
    if let Some(loss) = report.train_loss.last() {
        s = s.float("train_loss", *loss);
    }
    Ok(s.with("seconds", format!("{:.1}", report.total_seconds))
        .with("checkpoint", out.display()))
}

fn parse_split(s: &str) -> Result<Split> {
    match s {
        "validation" | "val" => Ok(Split::Validation),
        "train" => Ok(Split::Train),
        "unassigned" => Ok(Split::Unassigned),
        other => bail!("unknown split {other:?} (expected validation, train or unassigned)"),
    }
}

fn eval(a: &EvalArgs, seed: u64) -> Result<Summary> {
    let ck_path = a.checkpoint.clone().unwrap_or_else(|| a.dir.data_dir.join("model.ampnet"));
    let manifest = manifest_path(a.dataset.clone().unwrap_or_else(|| a.dir.data_dir.join("dataset")));
    let checkpoint = Checkpoint::load(&ck_path)?;
    let ds = Dataset::read(&manifest)?;
    let split = parse_split(&a.split)?;
    let report = validate(&checkpoint, &ds, split)?;
    for e in report.examples.iter().take(a.show) {
        info!("{:>12} esr {:.6}", e.id, e.esr);
    }
    let worst = &report.examples[0];
    let mut s = Summary::ok("eval")
        .with("split", &a.split)
        .with("examples", report.examples.len())
        .float("esr", report.mean_esr)
        .float("median_esr", report.median_esr)
        .float("pooled_esr", report.pooled_esr)
        .with("worst_id", &worst.id)
        .float("worst_esr", worst.esr);
    let mut json = serde_json::json!({ "validation": report });
    if a.probes > 0 {
        // A different seed from capture so the probe audio is fresh.
        let fresh = corpus(a.corpus_dir.as_deref(), ds.sample_rate, seed.wrapping_add(0x5eed))?;
        let interp = control_interpolation_eval(&checkpoint, &ds, &fresh, a.probes, seed)?;
        s = s.float("seen_esr", interp.seen_mean_esr);
        if let (Some(u), Some(r)) = (interp.unseen_mean_esr, interp.ratio) {
            s = s.float("unseen_esr", u).float("interp_ratio", r);
        }
        json["interpolation"] = serde_json::to_value(&interp)?;
    }
    if let Some(p) = &a.report {
        create_parent(p)?;
        std::fs::write(p, serde_json::to_vec_pretty(&json)?).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(s)
}

fn parse_settings(spec: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let Some((name, value)) = part.split_once('=') else {
            bail!("control setting {part:?} is not name=value");
        };
        let v: f64 = value.trim().parse().with_context(|| format!("control {name}: bad value {value:?}"))?;
        out.push((name.trim().to_string(), v));
    }
    Ok(out)
}

fn run(a: &RunArgs) -> Result<Summary> {
    let checkpoint = Checkpoint::load(&a.checkpoint)?;
    let input = read_wav(&a.input)?;
    let mut session = StreamSession::new(&checkpoint, input.sample_rate)?;
    for (name, v) in parse_settings(&a.set)? {
        session.set_control_by_name(&name, v)?;
    }
    session.set_smoothing(a.smoothing)?;
    if let Some(p) = &a.ir {
        session.set_cabinet(Some(&CabinetIR::load(p)?))?;
    }
    let automation = match &a.automation {
        Some(p) => ControlAutomation::load(p, session.control_space())?,
        None => ControlAutomation::default(),
    };
    let mut output = session.process_automated(&input.samples, &automation, a.block_size)?;
    if let Some(p) = &a.loudness_reference {
        output = loudness_match(&output, &read_wav(p)?.samples)?;
    }
    let peak = output.iter().fold(0.0f32, |m, v| m.max(v.abs()));
    if peak > 1.0 {
        warn!("output peaks at {peak:.3}; float WAV keeps it, but playback may clip");
    }
    create_parent(&a.output)?;
    write_wav(&a.output, input.sample_rate, &output)?;
    Ok(Summary::ok("run")
        .with("samples", output.len())
        .with("sample_rate", input.sample_rate)
        .with("events", automation.events.len())
        .float("peak", peak as f64)
        .with("output", a.output.display()))
}

fn gradcheck(a: &GradcheckArgs, seed: u64) -> Result<Summary> {
    let lstm = check_lstm(
        LstmCheckSpec { hidden_size: a.hidden, input_size: a.inputs, steps: a.steps },
        a.step,
        a.tolerance,
        seed,
    );
    let conv = check_conv(
        ConvCheckSpec { out_channels: a.channels, in_channels: a.channels, order: a.order, steps: 10 },
        a.step,
        a.tolerance,
        seed,
    );
    let worst = lstm.max_rel_error.max(conv.max_rel_error);
    let mut s = Summary::ok("gradcheck")
        .float("max_grad_rel_err", worst)
        .float("lstm_rel_err", lstm.max_rel_error)
        .float("conv_rel_err", conv.max_rel_error)
        .float("tolerance", a.tolerance)
        .with("components", lstm.components + conv.components);
    if !(lstm.passed && conv.passed) {
        s.set_status(Status::Fail);
    }
    Ok(s)
}

fn bench(a: &BenchArgs, seed: u64) -> Result<Summary> {
    let checkpoint = match &a.checkpoint {
        Some(p) => Checkpoint::load(p)?,
        None => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let names: Vec<String> = (0..a.control_count).map(|i| format!("c{i}")).collect();
            let controls: ControlSpace = if names.is_empty() { ControlSpace::empty() } else { names.join(",").parse()? };
            Checkpoint::new(
                ModelDescriptor {
                    hidden_size: a.hidden,
                    input_size: 1 + a.control_count,
                    control_count: a.control_count,
                    controls,
                    sample_rate: 48_000,
                    warmup_samples: 0,
                    iterations: 0,
                    best_validation_esr: None,
                },
                LstmModel::init(a.hidden, 1 + a.control_count, 1.0, &mut rng),
            )?
        }
    };
    let r = benchmark_throughput(&checkpoint, a.seconds, a.block_size)?;
    let mut s = Summary::ok("bench")
        .with("hidden", r.hidden_size)
        .with("block_size", r.block_size)
        .with("samples", r.samples)
        .float("samples_per_second", r.samples_per_second)
        .with("rtf", format!("{:.3}", r.realtime_factor));
    if r.realtime_factor <= 1.0 {
        warn!("slower than real time at 48 kHz");
        s = s.with("realtime", false);
    } else {
        s = s.with("realtime", true);
    }
    Ok(s)
}
