use ampnet_bench::{amp_checkpoint, noise};
use ampnet_core::controls::ControlSpace;
use ampnet_core::engine::StreamSession;
use ampnet_core::nn::{LstmModel, LstmState};
use ampnet_core::plan::{l1_distance_matrix, sample_configs, solve_tour};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn lstm_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("lstm_step");
    for h in [8usize, 32, 64] {
        let model: LstmModel<f32> = amp_checkpoint(h, 1).model;
        let frame = [0.1f32, 0.5, 0.5, 0.5, 0.5, 0.5];
        let mut state = LstmState::zeros(h);
        let mut gates = vec![0.0f32; 5 * h];
        g.bench_with_input(BenchmarkId::from_parameter(h), &h, |b, _| {
            b.iter(|| {
                model.lstm.advance(black_box(&frame), &mut state.hidden, &mut state.cell, &mut gates);
                black_box(model.head.apply(&state.hidden))
            })
        });
    }
    g.finish();
}

fn process_block(c: &mut Criterion) {
    let ck = amp_checkpoint(32, 2);
    let mut g = c.benchmark_group("process_block");
    for n in [64usize, 4096] {
        let input = noise(n, 3);
        let mut out = vec![0.0; n];
        let mut session = StreamSession::new(&ck, 48_000).unwrap();
        g.throughput(Throughput::Elements(n as u64));
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| session.process_block(black_box(&input), &mut out).unwrap())
        });
    }
    g.finish();
}

fn tour(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_tour");
    g.sample_size(10);
    for (k, n) in [(2usize, 500usize), (5, 500)] {
        let space: ControlSpace = (0..k).map(|i| format!("c{i}")).collect::<Vec<_>>().join(",").parse().unwrap();
        let configs = sample_configs(&space, n, 1);
        let m = l1_distance_matrix(&configs).unwrap();
        g.bench_function(format!("k{k}_n{n}"), |b| b.iter(|| solve_tour(black_box(&m), 0).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, lstm_step, process_block, tour);
criterion_main!(benches);
