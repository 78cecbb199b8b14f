use ampnet_core::engine::StreamSession;
use ampnet_core::nn::AdamConfig;
use ampnet_core::plan::{plan_session, Session};
use ampnet_core::rig::{capture_session, verify_capture, ExcitationCorpus};
use ampnet_core::train::{predict, train, validate};
use ampnet_core::{Checkpoint, ControlSpace, Dataset, Split, TrainConfig};

fn small_run(dir: &std::path::Path) -> (Dataset, Checkpoint) {
    let space: ControlSpace = "volume,master,tone_cut".parse().unwrap();
    let session = plan_session(&space, 10, 4).unwrap();
    let session_path = dir.join("session.jsonl");
    session.write(&session_path).unwrap();
    let session = Session::read(&session_path).unwrap();

    let corpus = ExcitationCorpus::synthetic(8000, 1.0, 1, 4);
    let mut ds = capture_session(&session, &corpus, 1200, 4).unwrap();
    ds.random_split(8, 2, 4).unwrap();
    let manifest = ds.write(&dir.join("dataset")).unwrap();
    let ds = Dataset::read(&manifest).unwrap();
    assert!(verify_capture(&ds).unwrap().is_empty());

    let config = TrainConfig {
        hidden_size: 8,
        batch_size: 2,
        iterations: 60,
        warmup_samples: 200,
        validate_every: 20,
        adam: AdamConfig { learning_rate: 1e-2, ..AdamConfig::default() },
        ..TrainConfig::default()
    };
    let (ck, report) = train(&ds, &config).unwrap();
    assert_eq!(report.train_loss.len(), 60);
    assert_eq!(report.validation.len(), 3);
    assert!(report.train_loss.iter().all(|l| l.is_finite() && *l >= 0.0));
    (ds, ck)
}

#[test]
fn plan_capture_train_stream() {
    let dir = tempfile::tempdir().unwrap();
    let (ds, ck) = small_run(dir.path());

    let path = dir.path().join("model.ampnet");
    ck.save(&path).unwrap();
    let loaded = Checkpoint::load(&path).unwrap();
    assert_eq!(loaded, ck);
    assert_eq!(loaded.descriptor.controls, ds.controls);
    assert_eq!(
        validate(&loaded, &ds, Split::Validation).unwrap().mean_esr,
        loaded.descriptor.best_validation_esr.unwrap()
    );

    // Streaming with the example's controls reproduces the batch prediction.
    let ex = &ds.examples[0];
    let batch = predict(&loaded.model, &ex.input, &ex.controls).unwrap();
    let mut session = StreamSession::new(&loaded, ds.sample_rate).unwrap();
    session.set_controls(ex.controls.values()).unwrap();
    let mut streamed = vec![0.0; ex.input.len()];
    for (i, o) in ex.input.chunks(64).zip(streamed.chunks_mut(64)) {
        session.process_block(i, o).unwrap();
    }
    assert_eq!(streamed, batch);
}

#[test]
fn identical_seeds_give_identical_models() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (_, ca) = small_run(a.path());
    let (_, cb) = small_run(b.path());
    assert_eq!(ca.to_bytes(), cb.to_bytes());
}
