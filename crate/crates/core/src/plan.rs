//! Measurement planning: random sampling of the control space and an
//! ordering of the samples that keeps total knob travel short.
//!
//! The session starts and ends with every control at zero, so ordering the
//! samples is a travelling-salesman problem over the L1 metric with the
//! all-zeros configuration as home node. Tours are built by nearest neighbour
//! and then improved with first-improvement 2-opt.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controls::{ControlKind, ControlSpace, ControlVector};
use crate::error::{Error, Result};

pub const SESSION_FORMAT: &str = "ampnet-session";
pub const SESSION_VERSION: u32 = 1;
pub const MAX_TWO_OPT_PASSES: usize = 50;
/// Moves must shorten the tour by more than this to be accepted.
const IMPROVEMENT_EPS: f64 = 1e-12;

/// Uniform i.i.d. samples: continuous controls on `[0, 1]`, switches
/// uniformly over their levels.
pub fn sample_configs(space: &ControlSpace, n: usize, seed: u64) -> Vec<ControlVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let values = space
                .controls()
                .iter()
                .map(|c| match c.kind {
                    ControlKind::Continuous => rng.gen::<f64>(),
                    ControlKind::Discrete { levels } => {
                        rng.gen_range(0..levels) as f64 / (levels - 1) as f64
                    }
                })
                .collect();
            ControlVector::new(values).expect("samples lie in [0, 1]")
        })
        .collect()
}

/// Symmetric distances between tour nodes.
pub trait Metric {
    fn len(&self) -> usize;
    fn dist(&self, i: usize, j: usize) -> f64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Dense `N x N` L1 distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major data, checking that it is square,
    /// symmetric, nonnegative and zero on the diagonal.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::shape("distance matrix", n * n, data.len()));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("D[{i},{i}] is not zero")));
            }
            for j in 0..n {
                let d = data[i * n + j];
                if !(d >= 0.0) || d != data[j * n + i] {
                    return Err(Error::InvalidArgument(format!(
                        "D[{i},{j}] = {d} breaks symmetry or nonnegativity"
                    )));
                }
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

impl Metric for DistanceMatrix {
    fn len(&self) -> usize {
        self.n
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// L1 metric evaluated on demand; for plans too large for a dense matrix.
pub struct L1Points<'a>(pub &'a [ControlVector]);

impl Metric for L1Points<'_> {
    fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    fn dist(&self, i: usize, j: usize) -> f64 {
        self.0[i].l1_distance(&self.0[j])
    }
}

fn check_dims(configs: &[ControlVector]) -> Result<()> {
    if configs.is_empty() {
        return Err(Error::InvalidArgument("no control configurations".into()));
    }
    let k = configs[0].len();
    if let Some((i, c)) = configs.iter().enumerate().find(|(_, c)| c.len() != k) {
        return Err(Error::InvalidArgument(format!(
            "configuration {i} has {} controls, expected {k}",
            c.len()
        )));
    }
    Ok(())
}

pub fn l1_distance_matrix(configs: &[ControlVector]) -> Result<DistanceMatrix> {
    check_dims(configs)?;
    let n = configs.len();
    let mut data = vec![0.0; n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, d) in row.iter_mut().enumerate() {
            *d = configs[i].l1_distance(&configs[j]);
        }
    });
    Ok(DistanceMatrix { n, data })
}

/// Closed tour over all nodes: `order[0]` is home and the tour returns there
/// after the last entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    pub order: Vec<usize>,
}

impl Tour {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn is_permutation_of(&self, n: usize) -> bool {
        let mut seen = vec![false; n];
        self.order.len() == n
            && self.order.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
    }
}

/// Total length including the closing edge back to `order[0]`.
pub fn tour_length<M: Metric>(tour: &Tour, metric: &M) -> f64 {
    let o = &tour.order;
    if o.len() < 2 {
        return 0.0;
    }
    let open: f64 = o.windows(2).map(|w| metric.dist(w[0], w[1])).sum();
    open + metric.dist(o[o.len() - 1], o[0])
}

/// Greedy construction from `home`; ties go to the lowest index.
pub fn nearest_neighbor_tour<M: Metric>(metric: &M, home: usize) -> Result<Tour> {
    let n = metric.len();
    if n == 0 {
        return Err(Error::InvalidArgument("cannot plan a tour over zero nodes".into()));
    }
    if home >= n {
        return Err(Error::InvalidArgument(format!("home index {home} out of range for {n} nodes")));
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = home;
    visited[cur] = true;
    order.push(cur);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for j in 0..n {
            if !visited[j] {
                let d = metric.dist(cur, j);
                if d < best_d {
                    best_d = d;
                    best = j;
                }
            }
        }
        visited[best] = true;
        order.push(best);
        cur = best;
    }
    Ok(Tour { order })
}

/// First-improvement 2-opt with `order[0]` pinned. Stops after a pass with no
/// improving move or after `max_passes` passes. Returns the number of passes.
pub fn two_opt<M: Metric>(tour: &mut Tour, metric: &M, max_passes: usize) -> usize {
    let n = tour.order.len();
    if n < 4 {
        return 0;
    }
    let o = &mut tour.order;
    let mut passes = 0;
    while passes < max_passes {
        passes += 1;
        let mut improved = false;
        for i in 1..n - 1 {
            for j in i + 1..n {
                let (a, b) = (o[i - 1], o[i]);
                let (c, d) = (o[j], o[(j + 1) % n]);
                let delta = metric.dist(a, c) + metric.dist(b, d) - metric.dist(a, b) - metric.dist(c, d);
                if delta < -IMPROVEMENT_EPS {
                    o[i..=j].reverse();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    passes
}

/// Best improving 2-opt move still available, as `(i, j, delta)`.
pub fn best_two_opt_move<M: Metric>(tour: &Tour, metric: &M) -> Option<(usize, usize, f64)> {
    let o = &tour.order;
    let n = o.len();
    let mut best = None;
    for i in 1..n.saturating_sub(1) {
        for j in i + 1..n {
            let (a, b) = (o[i - 1], o[i]);
            let (c, d) = (o[j], o[(j + 1) % n]);
            let delta = metric.dist(a, c) + metric.dist(b, d) - metric.dist(a, b) - metric.dist(c, d);
            if delta < -IMPROVEMENT_EPS && best.is_none_or(|(_, _, bd)| delta < bd) {
                best = Some((i, j, delta));
            }
        }
    }
    best
}

/// Nearest neighbour followed by 2-opt. Never longer than the nearest
/// neighbour tour it starts from.
pub fn solve_tour<M: Metric>(metric: &M, home: usize) -> Result<Tour> {
    let mut tour = nearest_neighbor_tour(metric, home)?;
    two_opt(&mut tour, metric, MAX_TWO_OPT_PASSES);
    Ok(tour)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub format: String,
    pub version: u32,
    pub controls: ControlSpace,
    pub steps: usize,
    /// Sum of all step travels plus `return_travel`.
    pub tour_length: f64,
    /// L1 travel from the last step back to all-zeros.
    pub return_travel: f64,
    /// Total distance moved by each control over the closed tour.
    pub per_control_travel: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStep {
    pub step: usize,
    pub controls: ControlVector,
    /// L1 travel from the previous step (from all-zeros for step 0).
    pub travel: f64,
}

/// An ordered measurement plan.
///
/// Stored as JSON lines: a [`SessionHeader`] followed by one [`SessionStep`]
/// per line.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub header: SessionHeader,
    pub steps: Vec<SessionStep>,
}

/// Turns a tour over `nodes` into a session. `nodes[home]` must be the
/// all-zeros configuration; it is not emitted as a step.
pub fn export_session(tour: &Tour, nodes: &[ControlVector], home: usize, space: &ControlSpace) -> Result<Session> {
    if tour.is_empty() {
        return Err(Error::InvalidArgument("cannot export an empty tour".into()));
    }
    if !tour.is_permutation_of(nodes.len()) {
        return Err(Error::InvalidArgument("tour is not a permutation of the nodes".into()));
    }
    if tour.order[0] != home {
        return Err(Error::InvalidArgument("tour must start at the home node".into()));
    }
    let k = space.len();
    let zero = ControlVector::zeros(k);
    let mut per_control = vec![0.0; k];
    let mut prev = &zero;
    let mut steps = Vec::with_capacity(tour.len() - 1);
    for &node in &tour.order[1..] {
        let c = &nodes[node];
        space.validate(c)?;
        for (acc, (a, b)) in per_control.iter_mut().zip(prev.values().iter().zip(c.values())) {
            *acc += (a - b).abs();
        }
        steps.push(SessionStep {
            step: steps.len(),
            controls: c.clone(),
            travel: prev.l1_distance(c),
        });
        prev = c;
    }
    for (acc, v) in per_control.iter_mut().zip(prev.values()) {
        *acc += v.abs();
    }
    let return_travel = prev.l1_distance(&zero);
    let tour_length = steps.iter().map(|s| s.travel).sum::<f64>() + return_travel;
    Ok(Session {
        header: SessionHeader {
            format: SESSION_FORMAT.to_string(),
            version: SESSION_VERSION,
            controls: space.clone(),
            steps: steps.len(),
            tour_length,
            return_travel,
            per_control_travel: per_control,
        },
        steps,
    })
}

/// Full planning pipeline: sample, append the all-zeros home node, order.
pub fn plan_session(space: &ControlSpace, n: usize, seed: u64) -> Result<Session> {
    if n == 0 {
        return Err(Error::InvalidArgument("a plan needs at least one configuration".into()));
    }
    let mut nodes = sample_configs(space, n, seed);
    nodes.push(ControlVector::zeros(space.len()));
    let home = n;
    // A dense matrix costs 8 N^2 bytes; fall back to on-demand distances.
    let tour = if nodes.len() <= 5000 {
        solve_tour(&l1_distance_matrix(&nodes)?, home)?
    } else {
        solve_tour(&L1Points(&nodes), home)?
    };
    export_session(&tour, &nodes, home, space)
}

impl Session {
    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(out, "{}", serde_json::to_string(&self.header).expect("serializes")).map_err(io)?;
        for s in &self.steps {
            writeln!(out, "{}", serde_json::to_string(s).expect("serializes")).map_err(io)?;
        }
        out.flush().map_err(io)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::format(path, "empty session file"))?
            .map_err(|e| Error::io(path, e))?;
        let header: SessionHeader =
            serde_json::from_str(&first).map_err(|e| Error::format(path, format!("bad header: {e}")))?;
        if header.format != SESSION_FORMAT || header.version != SESSION_VERSION {
            return Err(Error::format(
                path,
                format!("unsupported session format {:?} v{}", header.format, header.version),
            ));
        }
        let mut steps = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let s: SessionStep =
                serde_json::from_str(&line).map_err(|e| Error::format(path, format!("line {}: {e}", n + 2)))?;
            header.controls.validate(&s.controls)?;
            if s.step != steps.len() {
                return Err(Error::format(path, format!("step {} out of order", s.step)));
            }
            steps.push(s);
        }
        if steps.len() != header.steps {
            return Err(Error::format(
                path,
                format!("header declares {} steps, found {}", header.steps, steps.len()),
            ));
        }
        Ok(Session { header, steps })
    }

    pub fn total_travel(&self) -> f64 {
        self.steps.iter().map(|s| s.travel).sum::<f64>() + self.header.return_travel
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn points(vals: &[&[f64]]) -> Vec<ControlVector> {
        vals.iter().map(|v| ControlVector::new(v.to_vec()).unwrap()).collect()
    }

    /// Optimal closed tour length from node 0 by trying every ordering.
    fn exhaustive_optimum<M: Metric>(m: &M, home: usize) -> f64 {
        fn rec<M: Metric>(m: &M, home: usize, cur: usize, left: &mut Vec<usize>, acc: f64, best: &mut f64) {
            if left.is_empty() {
                *best = best.min(acc + m.dist(cur, home));
                return;
            }
            for k in 0..left.len() {
                let nxt = left.swap_remove(k);
                rec(m, home, nxt, left, acc + m.dist(cur, nxt), best);
                left.push(nxt);
                let last = left.len() - 1;
                left.swap(k, last);
            }
        }
        let mut left: Vec<usize> = (0..m.len()).filter(|&i| i != home).collect();
        let mut best = f64::INFINITY;
        rec(m, home, home, &mut left, 0.0, &mut best);
        best
    }

    #[test]
    fn fig3_setting_is_reproducible() {
        let space: ControlSpace = "a,b".parse().unwrap();
        let a = sample_configs(&space, 500, 1);
        assert_eq!(a.len(), 500);
        assert!(a.iter().all(|c| c.values().iter().all(|v| (0.0..=1.0).contains(v))));
        assert_eq!(a, sample_configs(&space, 500, 1));
        assert_ne!(a, sample_configs(&space, 500, 2));
    }

    #[test]
    fn switches_take_only_their_levels() {
        let space: ControlSpace = "mode:3".parse().unwrap();
        for c in sample_configs(&space, 300, 4) {
            assert!([0.0, 0.5, 1.0].contains(&c.values()[0]));
        }
    }

    #[test]
    fn marginal_means_are_near_half() {
        let space: ControlSpace = "a,b,c".parse().unwrap();
        let s = sample_configs(&space, 10_000, 9);
        for k in 0..3 {
            let mean = s.iter().map(|c| c.values()[k]).sum::<f64>() / s.len() as f64;
            assert!((mean - 0.5).abs() < 0.05, "dim {k}: {mean}");
        }
    }

    #[test]
    fn marginals_pass_kolmogorov_smirnov() {
        let space: ControlSpace = "a,b,c,d,e".parse().unwrap();
        let s = sample_configs(&space, 10_000, 42);
        for k in 0..5 {
            let mut xs: Vec<f64> = s.iter().map(|c| c.values()[k]).collect();
            xs.sort_by(f64::total_cmp);
            let n = xs.len() as f64;
            let d = xs
                .iter()
                .enumerate()
                .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
                .fold(0.0, f64::max);
            assert!(d < 0.02, "dim {k}: KS = {d}");
        }
    }

    #[test]
    fn matrix_basics() {
        let m = l1_distance_matrix(&points(&[&[0.0, 0.0], &[1.0, 1.0], &[0.0, 0.0]])).unwrap();
        assert_eq!(m.get(0, 1), 2.0);
        assert_eq!(m.get(0, 2), 0.0);
        assert!(l1_distance_matrix(&points(&[&[0.0], &[1.0, 1.0]])).is_err());
        assert!(l1_distance_matrix(&[]).is_err());
    }

    #[test]
    fn matrix_matches_double_loop() {
        let space: ControlSpace = "a,b,c".parse().unwrap();
        let c = sample_configs(&space, 10, 3);
        let m = l1_distance_matrix(&c).unwrap();
        for i in 0..10 {
            for j in 0..10 {
                let mut want = 0.0;
                for k in 0..3 {
                    want += (c[i].values()[k] - c[j].values()[k]).abs();
                }
                assert_eq!(m.get(i, j), want);
                assert_eq!(m.get(i, j), m.get(j, i));
            }
        }
    }

    #[test]
    fn line_tour_goes_out_and_back() {
        let data = (0..16).map(|k| ((k / 4) as f64 - (k % 4) as f64).abs()).collect();
        let m = DistanceMatrix::from_row_major(4, data).unwrap();
        assert_eq!(exhaustive_optimum(&m, 0), 6.0);
        let t = solve_tour(&m, 0).unwrap();
        assert_eq!(tour_length(&t, &m), 6.0);
        assert_eq!(t.order[0], 0);
    }

    #[test]
    fn malformed_matrices_are_rejected() {
        assert!(DistanceMatrix::from_row_major(2, vec![0.0, 1.0, 2.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_row_major(2, vec![1.0, 1.0, 1.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_row_major(2, vec![0.0, -1.0, -1.0, 0.0]).is_err());
        assert!(DistanceMatrix::from_row_major(2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn tour_length_edge_cases() {
        let m = l1_distance_matrix(&points(&[&[0.3, 0.1]])).unwrap();
        let t = solve_tour(&m, 0).unwrap();
        assert_eq!(tour_length(&t, &m), 0.0);
        let m = l1_distance_matrix(&points(&[&[0.0, 0.0], &[0.25, 0.5]])).unwrap();
        let t = solve_tour(&m, 0).unwrap();
        assert_eq!(tour_length(&t, &m), 1.5);
        let empty = l1_distance_matrix(&points(&[&[0.0]])).unwrap();
        assert!(solve_tour(&empty, 3).is_err());
    }

    #[test]
    fn small_instances_are_near_optimal() {
        let space: ControlSpace = "a,b,c".parse().unwrap();
        let mut good = 0;
        for seed in 0..100u64 {
            let n = 4 + (seed as usize % 4); // 4..=7 samples + home = up to 8 nodes
            let mut nodes = sample_configs(&space, n, seed);
            nodes.push(ControlVector::zeros(3));
            let m = l1_distance_matrix(&nodes).unwrap();
            let t = solve_tour(&m, n).unwrap();
            assert!(t.is_permutation_of(n + 1));
            let opt = exhaustive_optimum(&m, n);
            let got = tour_length(&t, &m);
            assert!(got >= opt - 1e-12);
            if got <= 1.05 * opt {
                good += 1;
            }
        }
        assert!(good >= 90, "{good}/100 within 5%");
    }

    #[test]
    fn sorted_fig3_tour_beats_random_orders() {
        let space: ControlSpace = "a,b".parse().unwrap();
        let mut nodes = sample_configs(&space, 500, 1);
        nodes.push(ControlVector::zeros(2));
        let m = l1_distance_matrix(&nodes).unwrap();
        let nn = nearest_neighbor_tour(&m, 500).unwrap();
        let t = solve_tour(&m, 500).unwrap();
        let len = tour_length(&t, &m);
        assert!(len <= tour_length(&nn, &m));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut mean = 0.0;
        for _ in 0..100 {
            use rand::seq::SliceRandom;
            let mut order: Vec<usize> = (0..500).collect();
            order.shuffle(&mut rng);
            order.insert(0, 500);
            mean += tour_length(&Tour { order }, &m) / 100.0;
        }
        assert!(len < mean, "{len} vs {mean}");
        assert!(best_two_opt_move(&t, &m).is_none());
    }

    #[test]
    fn session_round_trips_and_sums_to_tour_length() {
        let space: ControlSpace = "a,b".parse().unwrap();
        let s = plan_session(&space, 3, 5).unwrap();
        assert_eq!(s.steps.len(), 3);
        assert!((s.total_travel() - s.header.tour_length).abs() < 1e-12);
        let per: f64 = s.header.per_control_travel.iter().sum();
        assert!((per - s.header.tour_length).abs() < 1e-12);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.jsonl");
        s.write(&p).unwrap();
        assert_eq!(Session::read(&p).unwrap(), s);
    }

    #[test]
    fn export_rejects_empty_tour() {
        let space: ControlSpace = "a".parse().unwrap();
        let e = export_session(&Tour { order: vec![] }, &[], 0, &space);
        assert!(e.is_err());
    }

    #[test]
    fn single_sample_session() {
        let space: ControlSpace = "a,b".parse().unwrap();
        let s = plan_session(&space, 1, 0).unwrap();
        assert_eq!(s.steps.len(), 1);
        let c = &s.steps[0].controls;
        assert!((s.header.tour_length - 2.0 * c.values().iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn lazy_metric_agrees_with_matrix() {
        let space: ControlSpace = "a,b,c".parse().unwrap();
        let nodes = sample_configs(&space, 60, 8);
        let m = l1_distance_matrix(&nodes).unwrap();
        let a = solve_tour(&m, 0).unwrap();
        let b = solve_tour(&L1Points(&nodes), 0).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn solver_never_loses_to_identity_or_greedy(seed in 0u64..10_000, n in 1usize..40) {
            let space: ControlSpace = "a,b,c".parse().unwrap();
            let mut nodes = sample_configs(&space, n, seed);
            nodes.push(ControlVector::zeros(3));
            let m = l1_distance_matrix(&nodes).unwrap();
            let t = solve_tour(&m, n).unwrap();
            prop_assert!(t.is_permutation_of(n + 1));
            let len = tour_length(&t, &m);
            let mut ident: Vec<usize> = (0..n).collect();
            ident.insert(0, n);
            let ident = Tour { order: ident };
            prop_assert!(len <= tour_length(&ident, &m) + 1e-9);
            prop_assert!(len <= tour_length(&nearest_neighbor_tour(&m, n).unwrap(), &m) + 1e-9);
            prop_assert!(best_two_opt_move(&t, &m).is_none());
        }

        #[test]
        fn accepted_moves_strictly_shorten(seed in 0u64..10_000) {
            let space: ControlSpace = "a,b".parse().unwrap();
            let mut nodes = sample_configs(&space, 25, seed);
            nodes.push(ControlVector::zeros(2));
            let m = l1_distance_matrix(&nodes).unwrap();
            let mut t = nearest_neighbor_tour(&m, 25).unwrap();
            let mut len = tour_length(&t, &m);
            while let Some((i, j, delta)) = best_two_opt_move(&t, &m) {
                t.order[i..=j].reverse();
                let next = tour_length(&t, &m);
                prop_assert!(next < len);
                prop_assert!((next - len - delta).abs() < 1e-9);
                len = next;
            }
        }

        #[test]
        fn l1_is_a_metric(seed in 0u64..10_000) {
            let space: ControlSpace = "a,b,c,d".parse().unwrap();
            let c = sample_configs(&space, 6, seed);
            let m = l1_distance_matrix(&c).unwrap();
            for i in 0..6 {
                prop_assert_eq!(m.get(i, i), 0.0);
                for j in 0..6 {
                    prop_assert_eq!(m.get(i, j), m.get(j, i));
                    for k in 0..6 {
                        prop_assert!(m.get(i, k) <= m.get(i, j) + m.get(j, k) + 1e-12);
                    }
                }
            }
        }
    }
}
