// Copyright 2026 The qlga-opt developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Classical references: exact expectations from the statevector,
//! brute-force lattice-gas enumeration, gap and baseline analytics, and
//! repetition-with-median error reduction.
//!
//! The enumeration implements the stream/reflect/collide semantics
//! directly on occupancy bitstrings, independently of the circuit
//! builders, so the two routes check each other. Ground truth for
//! acceptance is the statevector expectation; the enumeration is a
//! cross-check where branching has not yet interfered (deterministic
//! collisions, or one nondeterministic step).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float; // f64 math on no_std targets

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{CollisionModel, LatticeSpec, QoISpec};
use crate::search::{
    nearest_estimate_outcome, qae_error_bound, run_durr_hoyer, MinFindResult, Pipeline,
};
use crate::sim::RegisterId;

/// Classical streaming: every particle moves along its channel velocity
/// with periodic wrap.
pub fn stream_occupancy(spec: &LatticeSpec, occ: u64) -> u64 {
    let mut out = 0u64;
    for g in 0..spec.n_gridpoints() {
        for c in 0..spec.q {
            if occ & (1 << (g * spec.q + c)) == 0 {
                continue;
            }
            let v = spec.channel_velocities[c];
            let coords = spec.grid_coords(g);
            let mut moved = coords.clone();
            for d in 0..spec.dims {
                let extent = spec.shape[d] as i64;
                moved[d] = ((coords[d] as i64 + v[d]).rem_euclid(extent)) as usize;
            }
            let target = spec.grid_index(&moved).expect("wrapped coordinate");
            out |= 1 << (target * spec.q + c);
        }
    }
    out
}

/// Classical boundary step: paired channel occupancies exchanged at each
/// boundary gridpoint.
pub fn reflect_occupancy(spec: &LatticeSpec, occ: u64) -> u64 {
    let mut out = occ;
    for link in &spec.boundary_links {
        let a = link.gridpoint * spec.q + link.channel_a;
        let b = link.gridpoint * spec.q + link.channel_b;
        let bit_a = (occ >> a) & 1;
        let bit_b = (occ >> b) & 1;
        if bit_a != bit_b {
            out ^= (1 << a) | (1 << b);
        }
    }
    out
}

/// Occupancy bitstring of the initial conditions.
pub fn initial_occupancy_bits(spec: &LatticeSpec) -> u64 {
    let mut occ = 0u64;
    for &(g, c) in &spec.initial_occupancy {
        occ |= 1 << (g * spec.q + c);
    }
    occ
}

/// Weighted occupancy sum over the region and channel set.
pub fn qoi_value(spec: &LatticeSpec, qoi: &QoISpec, occ: u64) -> u64 {
    let mut f = 0u64;
    for &g in &qoi.region {
        for &c in &qoi.channels {
            if occ & (1 << (g * spec.q + c)) != 0 {
                f += qoi.weights[&c];
            }
        }
    }
    f
}

/// Branches one collision step: per gridpoint, the amplitudes of the
/// collision column on the current occupancy give Born weights over
/// outcome patterns.
fn collision_branches(
    spec: &LatticeSpec,
    model: &CollisionModel,
    occ: u64,
) -> Result<Vec<(u64, f64)>> {
    let Some(u) = model.matrix(spec)? else {
        return Ok(alloc::vec![(occ, 1.0)]);
    };
    let dim = u.dim();
    let mut states = alloc::vec![(occ & 0, 1.0f64)];
    for g in 0..spec.n_gridpoints() {
        let local = ((occ >> (g * spec.q)) & ((1 << spec.q) - 1)) as usize;
        let mut next = Vec::new();
        for out_pattern in 0..dim {
            let w = u.get(out_pattern, local).norm_sqr();
            if w < 1e-15 {
                continue;
            }
            for &(partial, p) in &states {
                next.push((partial | ((out_pattern as u64) << (g * spec.q)), p * w));
            }
        }
        states = next;
    }
    Ok(states)
}

/// Branch-weighted distribution of the accumulated quantity after `n_t`
/// classical lattice-gas steps.
pub fn classical_lga_enumerate(
    spec: &LatticeSpec,
    model: &CollisionModel,
    n_t: usize,
    qoi: &QoISpec,
) -> Result<BTreeMap<u64, f64>> {
    if spec.base_width() > 20 {
        return Err(Error::Capacity {
            qubits: spec.base_width(),
            cap: 20,
        });
    }
    for &t in &qoi.acc_steps {
        if t == 0 || t > n_t {
            return Err(Error::AccStepOutOfRange { step: t, steps: n_t });
        }
    }
    // (occupancy, accumulated f) -> probability.
    let mut states: BTreeMap<(u64, u64), f64> = BTreeMap::new();
    states.insert((initial_occupancy_bits(spec), 0), 1.0);
    for t in 1..=n_t {
        let mut next: BTreeMap<(u64, u64), f64> = BTreeMap::new();
        for (&(occ, f), &p) in &states {
            for (collided, w) in collision_branches(spec, model, occ)? {
                let streamed = stream_occupancy(spec, collided);
                let reflected = reflect_occupancy(spec, streamed);
                let f_next = if qoi.acc_steps.contains(&t) {
                    f + qoi_value(spec, qoi, reflected)
                } else {
                    f
                };
                *next.entry((reflected, f_next)).or_insert(0.0) += p * w;
            }
        }
        next.retain(|_, p| *p > 1e-14);
        states = next;
    }
    let mut dist: BTreeMap<u64, f64> = BTreeMap::new();
    for (&(_, f), &p) in &states {
        *dist.entry(f).or_insert(0.0) += p;
    }
    Ok(dist)
}

/// Exact per-marker coin-1 probabilities of the prepared pipeline,
/// straight from the statevector marginals: the ground-truth objective
/// table.
pub fn exact_expectation(pipeline: &Pipeline) -> Result<BTreeMap<u64, f64>> {
    let st = pipeline.state_after_prep()?;
    let joint = st.joint_marginal(RegisterId::Marker, RegisterId::Coin);
    let mut mass: BTreeMap<u64, f64> = BTreeMap::new();
    let mut coin1: BTreeMap<u64, f64> = BTreeMap::new();
    for (&(m, c), &p) in &joint {
        *mass.entry(m).or_insert(0.0) += p;
        if c == 1 {
            *coin1.entry(m).or_insert(0.0) += p;
        }
    }
    let mut out = BTreeMap::new();
    for (j, &mv) in pipeline.marker_values().iter().enumerate() {
        let total = mass.get(&mv).copied().unwrap_or(0.0);
        if total <= 1e-15 {
            continue;
        }
        let ones = coin1.get(&mv).copied().unwrap_or(0.0);
        out.insert(j as u64, ones / total);
    }
    Ok(out)
}

/// Separation between the optimum and the rest, with resolvability flags
/// for a given estimation width.
#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub phi: Vec<f64>,
    pub argmin: usize,
    /// Smallest excess of any other configuration over the optimum.
    pub delta: f64,
    /// Two or more configurations share the optimum exactly.
    pub degenerate: bool,
    /// Nearest e-bit grid estimates still order the optimum strictly
    /// below every other configuration.
    pub grid_resolvable: bool,
    /// The estimation error bound at `l = 2^e` exceeds half the gap.
    pub bound_exceeds_half_gap: bool,
}

/// Gap and resolvability analysis over an exact objective table.
pub fn compute_gap(phi: &[f64], e: usize) -> Result<GapReport> {
    if phi.len() < 2 {
        return Err(Error::InvalidArgument("gap needs at least two markers"));
    }
    let argmin = phi
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite phi"))
        .map(|(i, _)| i)
        .expect("nonempty");
    let best = phi[argmin];
    let mut delta = f64::INFINITY;
    for (i, &p) in phi.iter().enumerate() {
        if i != argmin {
            delta = delta.min(p - best);
        }
    }
    let degenerate = delta <= 0.0;
    let best_grid = nearest_estimate_outcome(best, e);
    let grid_resolvable = !degenerate
        && phi
            .iter()
            .enumerate()
            .all(|(i, &p)| i == argmin || nearest_estimate_outcome(p, e) > best_grid);
    let bound = qae_error_bound(best, 1u64 << e);
    Ok(GapReport {
        phi: phi.to_vec(),
        argmin,
        delta,
        degenerate,
        grid_resolvable,
        bound_exceeds_half_gap: bound > delta / 2.0,
    })
}

/// Expected draws without replacement until a marked item:
/// `(N + 1) / (t + 1)`.
pub fn classical_query_baseline(n: u64, t: u64) -> Result<f64> {
    if t == 0 || t > n {
        return Err(Error::InvalidArgument("need 1 <= t <= N"));
    }
    Ok((n + 1) as f64 / (t + 1) as f64)
}

/// Aggregate of independent minimum-finding runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RepeatedMinFind {
    /// Plurality winner with its median estimate and summed query counts.
    pub result: MinFindResult,
    /// Votes per marker.
    pub votes: BTreeMap<u64, usize>,
    /// Median of the measured best estimates per marker.
    pub medians: BTreeMap<u64, f64>,
    /// The plurality or the winning median is not unique.
    pub degenerate: bool,
    pub runs: Vec<MinFindResult>,
}

/// Deterministic per-run seeds drawn from one generator.
pub fn repetition_seeds<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<u64> {
    (0..k).map(|_| rng.random()).collect()
}

/// Merges independent runs by plurality vote over returned markers, with
/// per-marker medians of the measured estimates; ties break toward the
/// lower median, then the lower marker.
pub fn aggregate_repeated(runs: Vec<MinFindResult>) -> Result<RepeatedMinFind> {
    if runs.is_empty() {
        return Err(Error::InvalidArgument("no runs to aggregate"));
    }
    let mut votes: BTreeMap<u64, usize> = BTreeMap::new();
    let mut estimates: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for run in &runs {
        *votes.entry(run.best_marker).or_insert(0) += 1;
        estimates
            .entry(run.best_marker)
            .or_default()
            .push(run.best_estimate);
    }
    let mut medians: BTreeMap<u64, f64> = BTreeMap::new();
    for (&marker, vals) in estimates.iter_mut() {
        vals.sort_by(|a, b| a.partial_cmp(b).expect("finite estimate"));
        medians.insert(marker, vals[vals.len() / 2]);
    }
    let winner = *votes
        .iter()
        .max_by(|a, b| {
            a.1.cmp(b.1).then_with(|| {
                medians[b.0]
                    .partial_cmp(&medians[a.0])
                    .expect("finite median")
            })
        })
        .expect("nonempty votes")
        .0;
    let top_votes = votes[&winner];
    let degenerate = votes
        .iter()
        .any(|(&m, &v)| m != winner && (v == top_votes || medians[&m] == medians[&winner]));

    let best_run = runs
        .iter()
        .filter(|r| r.best_marker == winner)
        .min_by(|a, b| a.best_estimate.partial_cmp(&b.best_estimate).unwrap())
        .expect("winner has runs")
        .clone();
    let result = MinFindResult {
        best_marker: winner,
        best_outcome: best_run.best_outcome,
        best_estimate: medians[&winner],
        threshold_trace: best_run.threshold_trace,
        grover_iterations_total: runs.iter().map(|r| r.grover_iterations_total).sum(),
        oracle_queries_total: runs.iter().map(|r| r.oracle_queries_total).sum(),
        rounds: runs.iter().map(|r| r.rounds).sum(),
    };
    Ok(RepeatedMinFind {
        result,
        votes,
        medians,
        degenerate,
        runs,
    })
}

/// Runs the minimum finder `k` times (odd `k`) on independent seeds and
/// returns the plurality winner with per-marker medians.
pub fn repeated_median_minfind<R: Rng + ?Sized>(
    pipeline: &Pipeline,
    k: usize,
    rng: &mut R,
) -> Result<RepeatedMinFind> {
    if k == 0 || k % 2 == 0 {
        return Err(Error::InvalidArgument("repetition count must be odd"));
    }
    let seeds = repetition_seeds(rng, k);
    let mut runs = Vec::with_capacity(k);
    for seed in seeds {
        let mut run_rng = ChaCha8Rng::seed_from_u64(seed);
        runs.push(run_durr_hoyer(pipeline, &mut run_rng)?);
    }
    aggregate_repeated(runs)
}
