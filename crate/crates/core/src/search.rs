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

//! Grover primitives, canonical amplitude estimation over the coin qubit,
//! and the threshold-tracking minimum-finding loop over the marker and
//! estimation registers.
//!
//! The state preparation `A` excludes marker preparation, and the
//! zero reflection of the estimation iterator covers the work registers
//! (base, data, mapping ancilla, coin) only; this keeps the iterator
//! block-diagonal over marker values, so estimation runs in parallel for
//! every configuration. Minimum finding reflects about the full prepared
//! state instead.
//!
//! Signs matter under control: the iterator is emitted so that its matrix
//! is exactly `A S0 Adag ST` with `S0 = 2|0><0| - I` and `ST = Z` on the
//! coin. A controlled global sign would shift every estimation outcome by
//! half the grid.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float; // f64 math on no_std targets

use rand::Rng;

use crate::accumulate::build_accumulation_schedule;
use crate::error::{Error, Result};
use crate::lattice::{CollisionModel, QoISpec};
use crate::mapping::{build_constant_comparator, build_mapping, MappingSpec};
use crate::parallel::{
    build_compact_uniform_prep, build_layout, build_marker_prep, build_parallel_initial,
    build_parallel_step, ConfigurationSet,
};
use crate::sim::{
    qft_block, CircuitBlock, CircuitOp, Control, RegisterId, RegisterLayout, StateVector,
};
use crate::DEFAULT_QUBIT_CAP;

const PI: f64 = core::f64::consts::PI;

/// Predicted Grover amplitudes for `t` marked of `N` items:
/// after `j` iterations the good and bad coefficients are
/// `sin((2j+1) theta) / sqrt(t)` and `cos((2j+1) theta) / sqrt(N - t)`
/// with `sin^2 theta = t / N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroverDiagnostics {
    pub n_total: u64,
    pub n_marked: u64,
    pub theta: f64,
}

impl GroverDiagnostics {
    pub fn new(n_marked: u64, n_total: u64) -> Result<Self> {
        if n_total == 0 || n_marked > n_total {
            return Err(Error::InvalidArgument("need 0 <= t <= N with N > 0"));
        }
        Ok(GroverDiagnostics {
            n_total,
            n_marked,
            theta: (n_marked as f64 / n_total as f64).sqrt().asin(),
        })
    }

    pub fn good_coefficient(&self, iterations: u64) -> f64 {
        ((2 * iterations + 1) as f64 * self.theta).sin() / (self.n_marked as f64).sqrt()
    }

    pub fn bad_coefficient(&self, iterations: u64) -> f64 {
        ((2 * iterations + 1) as f64 * self.theta).cos()
            / ((self.n_total - self.n_marked) as f64).sqrt()
    }

    /// Total probability mass on the marked set after `j` iterations.
    pub fn good_probability(&self, iterations: u64) -> f64 {
        let s = ((2 * iterations + 1) as f64 * self.theta).sin();
        s * s
    }
}

/// Exponential-search parameters of the minimum-finding loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinFindParams {
    /// Growth factor of the iteration window; must lie in (1, 4/3).
    pub lambda: f64,
    /// Budget constant: the default iteration budget is
    /// `ceil(budget_c * sqrt(|L|))` total Grover iterations.
    pub budget_c: f64,
    /// Explicit budget override in total Grover iterations.
    pub budget_override: Option<u64>,
}

impl Default for MinFindParams {
    fn default() -> Self {
        MinFindParams {
            lambda: 1.2,
            budget_c: 3.0,
            budget_override: None,
        }
    }
}

/// Everything needed to build and run the full pipeline.
#[derive(Debug, Clone)]
pub struct PipelineSpec {
    pub configs: ConfigurationSet,
    pub collision: CollisionModel,
    pub n_t: usize,
    pub qoi: QoISpec,
    pub mapping: MappingSpec,
    pub e: usize,
    pub minfind: MinFindParams,
    pub qubit_cap: usize,
}

impl PipelineSpec {
    pub fn validate(&self) -> Result<()> {
        if self.e == 0 {
            return Err(Error::InvalidArgument(
                "estimation register needs at least one qubit",
            ));
        }
        Ok(())
    }
}

/// The work-register preparation: marker-controlled initial conditions,
/// the time-stepped parallel evolution with its accumulation schedule, and
/// the amplitude mapping. Marker preparation and anything on the
/// estimation or flag registers are excluded.
pub fn build_state_prep_a(spec: &PipelineSpec) -> Result<(RegisterLayout, CircuitBlock)> {
    spec.validate()?;
    let layout = build_layout(&spec.configs, &spec.qoi, spec.e, spec.mapping.kind);
    let lat = spec.configs.lattice(0);
    let schedule = build_accumulation_schedule(&layout, &spec.qoi, lat, spec.n_t)?;
    let step = build_parallel_step(&spec.configs, &spec.collision, &layout)?;

    let mut prep = CircuitBlock::new("state-prep-a");
    prep.extend_from(&build_parallel_initial(&spec.configs, &layout)?);
    prep.extend_from(&schedule.pre);
    for t in 1..=spec.n_t {
        prep.extend_from(&step);
        if schedule.fires_after(t) {
            prep.extend_from(&schedule.mhwa);
        }
    }
    prep.extend_from(&schedule.post);
    prep.extend_from(&build_mapping(&layout, &spec.mapping)?);
    Ok((layout, prep))
}

/// Phase -1 on the all-zero state of the given qubits (`I - 2|0><0|`),
/// which is the zero reflection up to a global sign.
pub fn build_reflection_about_zero(qubits: &[usize]) -> CircuitBlock {
    let mut block = CircuitBlock::new("reflect-zero");
    if qubits.is_empty() {
        return block;
    }
    let target = qubits[0];
    let controls: Vec<Control> = qubits[1..].iter().map(|&q| Control::negative(q)).collect();
    block.push(CircuitOp::x(target));
    block.push(CircuitOp::z(target).controlled(&controls).unwrap());
    block.push(CircuitOp::x(target));
    block
}

/// `-Z` on one qubit: the phase-query gate and the global sign of the
/// zero reflection folded together.
fn push_minus_z(block: &mut CircuitBlock, qubit: usize) {
    block.push(CircuitOp::x(qubit));
    block.push(CircuitOp::z(qubit));
    block.push(CircuitOp::x(qubit));
}

fn work_qubits(layout: &RegisterLayout) -> Vec<usize> {
    let mut qs = Vec::new();
    for reg in [
        RegisterId::Base,
        RegisterId::Data,
        RegisterId::MapAncilla,
        RegisterId::Coin,
    ] {
        qs.extend(layout.qubits(reg));
    }
    qs
}

/// The estimation iterator `Q = A S0 Adag ST` with `ST = Z` on the coin
/// and `S0` the zero reflection over the work registers only, emitted
/// sign-exact so controlled powers estimate the right phase.
pub fn build_grover_iterator(a: &CircuitBlock, layout: &RegisterLayout) -> CircuitBlock {
    let coin = layout.qubit(RegisterId::Coin, 0);
    let work = work_qubits(layout);
    let mut block = CircuitBlock::new("grover-iterator");
    // -Z on the coin, then Adag, then I - 2|0><0| on work, then A;
    // the two folded signs cancel, leaving exactly A S0 Adag ST.
    push_minus_z(&mut block, coin);
    block.extend_from(&a.adjoint());
    block.extend_from(&build_reflection_about_zero(&work));
    block.extend_from(a);
    block
}

/// Canonical amplitude estimation: Hadamards on the estimation register,
/// controlled `Q^(2^k)` powers, inverse QFT.
pub fn build_qae_block(
    grover: &CircuitBlock,
    layout: &RegisterLayout,
    e: usize,
) -> Result<CircuitBlock> {
    let est = layout.qubits(RegisterId::Estimation);
    if est.len() != e {
        return Err(Error::WidthMismatch {
            left: est.len(),
            right: e,
        });
    }
    let mut block = CircuitBlock::new("qae");
    for &q in &est {
        block.push(CircuitOp::h(q));
    }
    for (k, &q) in est.iter().enumerate() {
        let controlled = grover.controlled(&[Control::positive(q)], "grover-ctl")?;
        for _ in 0..1usize << k {
            block.extend_from(&controlled);
        }
    }
    block.extend_from(&qft_block(layout, RegisterId::Estimation, true));
    Ok(block)
}

/// `sin^2(pi y / 2^e)`, the amplitude associated with estimation outcome y.
pub fn qae_estimate_from_outcome(y: u64, e: usize) -> Result<f64> {
    if y >= 1u64 << e {
        return Err(Error::ConstantOutOfRange {
            constant: y,
            width: e,
        });
    }
    let s = (PI * y as f64 / (1u64 << e) as f64).sin();
    Ok(s * s)
}

/// Canonical-estimation error bound attained with probability at least
/// `8 / pi^2`: `2 pi sqrt(phi (1 - phi)) / l + (pi / l)^2`.
pub fn qae_error_bound(phi: f64, l: u64) -> f64 {
    let l = l as f64;
    2.0 * PI * (phi * (1.0 - phi)).max(0.0).sqrt() / l + (PI / l) * (PI / l)
}

/// Canonical grid outcome whose estimate is closest to `phi`.
pub fn nearest_estimate_outcome(phi: f64, e: usize) -> u64 {
    let mut best = 0u64;
    let mut best_err = f64::INFINITY;
    for y in 0..=(1u64 << e) / 2 {
        let err = (qae_estimate_from_outcome(y, e).unwrap_or(0.0) - phi).abs();
        if err < best_err {
            best_err = err;
            best = y;
        }
    }
    best
}

/// Phase -1 on basis states whose estimation value lies strictly below
/// `tau`: a constant comparator onto the flag, Z on the flag, uncompute.
/// `tau = 2^e` marks everything (a global -1).
pub fn build_threshold_oracle(layout: &RegisterLayout, tau: u64) -> Result<CircuitBlock> {
    let est = layout.qubits(RegisterId::Estimation);
    let flag = layout.qubit(RegisterId::Flag, 0);
    let comparator = build_constant_comparator(&est, tau, flag)?;
    let mut block = CircuitBlock::new("threshold-oracle");
    if comparator.is_empty() {
        return Ok(block);
    }
    block.extend_from(&comparator);
    block.push(CircuitOp::z(flag));
    block.extend_from(&comparator.adjoint());
    Ok(block)
}

/// Phase -1 on the listed basis values of a register; the synthetic-oracle
/// side of the Grover amplitude checks.
pub fn build_marked_set_oracle(qubits: &[usize], marked: &[u64]) -> CircuitBlock {
    let mut block = CircuitBlock::new("marked-set-oracle");
    for &v in marked {
        let target = qubits[0];
        let controls: Vec<Control> = qubits[1..]
            .iter()
            .enumerate()
            .map(|(i, &q)| Control {
                qubit: q,
                value: v & (1 << (i + 1)) != 0,
            })
            .collect();
        if v & 1 != 0 {
            block.push(CircuitOp::z(target).controlled(&controls).unwrap());
        } else {
            block.push(CircuitOp::x(target));
            block.push(CircuitOp::z(target).controlled(&controls).unwrap());
            block.push(CircuitOp::x(target));
        }
    }
    block
}

/// Uniform draw from `{0, ..., ceil(m) - 1}`; the caller grows
/// `m <- min(lambda m, sqrt(N))` after failed rounds.
pub fn grover_schedule<R: Rng + ?Sized>(m: f64, lambda: f64, rng: &mut R) -> Result<u64> {
    if m < 1.0 {
        return Err(Error::InvalidArgument("iteration window must be >= 1"));
    }
    if lambda <= 1.0 || lambda >= 4.0 / 3.0 {
        return Err(Error::InvalidArgument("lambda must lie in (1, 4/3)"));
    }
    let hi = m.ceil() as u64;
    Ok(rng.random_range(0..hi))
}

/// One measured sample of the minimum-finding loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRow {
    /// Threshold in force during the round (`2^e` for the unfiltered
    /// initial sample).
    pub tau: u64,
    /// Lattice index decoded from the measured marker.
    pub marker: u64,
    /// Raw measured estimation outcome.
    pub outcome: u64,
    /// Grover iterations applied this round.
    pub iterations: u64,
}

/// Outcome of the threshold-tracking search.
#[derive(Debug, Clone, PartialEq)]
pub struct MinFindResult {
    pub best_marker: u64,
    /// Canonical (folded) estimation outcome of the best measurement.
    pub best_outcome: u64,
    /// `sin^2(pi y / 2^e)` of the best outcome.
    pub best_estimate: f64,
    pub threshold_trace: Vec<TraceRow>,
    pub grover_iterations_total: u64,
    pub oracle_queries_total: u64,
    pub rounds: u64,
}

/// Per-marker distribution over estimation outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub e: usize,
    /// Lattice index -> list of (outcome, probability), each summing to 1.
    pub per_marker: BTreeMap<u64, Vec<(u64, f64)>>,
}

impl EstimateResult {
    pub fn phi_hat(&self, y: u64) -> f64 {
        qae_estimate_from_outcome(y, self.e).unwrap_or(0.0)
    }
}

/// A built pipeline: layout plus the preparation, estimation, and
/// reflection blocks the search loop replays.
#[derive(Debug, Clone)]
pub struct Pipeline {
    layout: RegisterLayout,
    marker_prep: CircuitBlock,
    /// The work-register preparation `A` (evolution + mapping).
    prep: CircuitBlock,
    /// Evolution only, without the amplitude mapping; what the simulate
    /// command inspects.
    evolution: CircuitBlock,
    qae: CircuitBlock,
    full_prep: CircuitBlock,
    full_prep_adjoint: CircuitBlock,
    reflect_all: CircuitBlock,
    marker_values: Vec<u64>,
    e: usize,
    minfind: MinFindParams,
    qubit_cap: usize,
}

impl Pipeline {
    pub fn build(spec: &PipelineSpec) -> Result<Self> {
        let (layout, prep) = build_state_prep_a(spec)?;
        if layout.total_qubits() > spec.qubit_cap {
            return Err(Error::Capacity {
                qubits: layout.total_qubits(),
                cap: spec.qubit_cap,
            });
        }
        // Evolution-only block (no mapping) for data-register inspection.
        let lat = spec.configs.lattice(0);
        let schedule = build_accumulation_schedule(&layout, &spec.qoi, lat, spec.n_t)?;
        let step = build_parallel_step(&spec.configs, &spec.collision, &layout)?;
        let mut evolution = CircuitBlock::new("evolution");
        evolution.extend_from(&build_parallel_initial(&spec.configs, &layout)?);
        evolution.extend_from(&schedule.pre);
        for t in 1..=spec.n_t {
            evolution.extend_from(&step);
            if schedule.fires_after(t) {
                evolution.extend_from(&schedule.mhwa);
            }
        }
        evolution.extend_from(&schedule.post);

        let marker_prep = build_marker_prep(&spec.configs, &layout);
        let grover = build_grover_iterator(&prep, &layout);
        let qae = build_qae_block(&grover, &layout, spec.e)?;
        let marker_values = (0..spec.configs.len())
            .map(|j| spec.configs.marker_value(j))
            .collect();
        Ok(Pipeline::assemble(
            layout,
            marker_prep,
            prep,
            evolution,
            qae,
            marker_values,
            spec.e,
            spec.minfind,
            spec.qubit_cap,
        ))
    }

    /// Pipeline with hardwired per-marker coin probabilities instead of a
    /// lattice evolution; markers use the compact encoding.
    pub fn synthetic(phis: &[f64], e: usize, minfind: MinFindParams) -> Result<Self> {
        if phis.is_empty() {
            return Err(Error::InvalidArgument("need at least one marker"));
        }
        if e == 0 {
            return Err(Error::InvalidArgument(
                "estimation register needs at least one qubit",
            ));
        }
        if phis.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidArgument("phi values must lie in [0, 1]"));
        }
        let k = phis.len();
        let width = (usize::BITS - (k - 1).leading_zeros()) as usize;
        let layout = RegisterLayout::new(&[
            (RegisterId::Base, 0),
            (RegisterId::Marker, width),
            (RegisterId::Data, 0),
            (RegisterId::MapAncilla, 0),
            (RegisterId::Coin, 1),
            (RegisterId::Estimation, e),
            (RegisterId::Flag, 1),
        ]);
        let mqs = layout.qubits(RegisterId::Marker);
        let coin = layout.qubit(RegisterId::Coin, 0);
        let mut prep = CircuitBlock::new("synthetic-prep");
        for (j, &phi) in phis.iter().enumerate() {
            let theta = 2.0 * phi.sqrt().asin();
            let controls: Vec<Control> = mqs
                .iter()
                .enumerate()
                .map(|(b, &q)| Control {
                    qubit: q,
                    value: (j >> b) & 1 == 1,
                })
                .collect();
            prep.push(CircuitOp::ry(coin, theta).controlled(&controls).unwrap());
        }
        let marker_prep = build_compact_uniform_prep(&mqs, k);
        let grover = build_grover_iterator(&prep, &layout);
        let qae = build_qae_block(&grover, &layout, e)?;
        let evolution = CircuitBlock::new("evolution");
        Ok(Pipeline::assemble(
            layout,
            marker_prep,
            prep,
            evolution,
            qae,
            (0..k as u64).collect(),
            e,
            minfind,
            DEFAULT_QUBIT_CAP,
        ))
    }

    /// Pipeline whose prepared state hardwires definite per-marker
    /// estimation outcomes, the idealized post-estimation form the
    /// minimum finder searches; markers use the compact encoding.
    pub fn synthetic_estimates(outcomes: &[u64], e: usize, minfind: MinFindParams) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidArgument("need at least one marker"));
        }
        if e == 0 {
            return Err(Error::InvalidArgument(
                "estimation register needs at least one qubit",
            ));
        }
        if outcomes.iter().any(|&y| y > 1u64 << (e - 1)) {
            return Err(Error::InvalidArgument(
                "estimates must lie on the canonical half of the grid",
            ));
        }
        let k = outcomes.len();
        let width = (usize::BITS - (k - 1).leading_zeros()) as usize;
        let layout = RegisterLayout::new(&[
            (RegisterId::Base, 0),
            (RegisterId::Marker, width),
            (RegisterId::Data, 0),
            (RegisterId::MapAncilla, 0),
            (RegisterId::Coin, 1),
            (RegisterId::Estimation, e),
            (RegisterId::Flag, 1),
        ]);
        let mqs = layout.qubits(RegisterId::Marker);
        let eqs = layout.qubits(RegisterId::Estimation);
        let mut prep = CircuitBlock::new("synthetic-estimates");
        for (j, &y) in outcomes.iter().enumerate() {
            let controls: Vec<Control> = mqs
                .iter()
                .enumerate()
                .map(|(b, &q)| Control {
                    qubit: q,
                    value: (j >> b) & 1 == 1,
                })
                .collect();
            for (b, &q) in eqs.iter().enumerate() {
                if y & (1 << b) != 0 {
                    prep.push(CircuitOp::x(q).controlled(&controls).unwrap());
                }
            }
        }
        let marker_prep = build_compact_uniform_prep(&mqs, k);
        Ok(Pipeline::assemble(
            layout,
            marker_prep,
            prep,
            CircuitBlock::new("evolution"),
            CircuitBlock::new("qae"),
            (0..k as u64).collect(),
            e,
            minfind,
            DEFAULT_QUBIT_CAP,
        ))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        layout: RegisterLayout,
        marker_prep: CircuitBlock,
        prep: CircuitBlock,
        evolution: CircuitBlock,
        qae: CircuitBlock,
        marker_values: Vec<u64>,
        e: usize,
        minfind: MinFindParams,
        qubit_cap: usize,
    ) -> Self {
        let mut full_prep = CircuitBlock::new("full-prep");
        full_prep.extend_from(&marker_prep);
        full_prep.extend_from(&prep);
        full_prep.extend_from(&qae);
        let full_prep_adjoint = full_prep.adjoint();
        let all_qubits: Vec<usize> = (0..layout.total_qubits()).collect();
        let reflect_all = build_reflection_about_zero(&all_qubits);
        Pipeline {
            layout,
            marker_prep,
            prep,
            evolution,
            qae,
            full_prep,
            full_prep_adjoint,
            reflect_all,
            marker_values,
            e,
            minfind,
            qubit_cap,
        }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn lattice_count(&self) -> usize {
        self.marker_values.len()
    }

    pub fn marker_values(&self) -> &[u64] {
        &self.marker_values
    }

    pub fn minfind(&self) -> &MinFindParams {
        self.minfind_params()
    }

    fn minfind_params(&self) -> &MinFindParams {
        &self.minfind
    }

    pub fn prep_block(&self) -> &CircuitBlock {
        &self.prep
    }

    pub fn marker_prep_block(&self) -> &CircuitBlock {
        &self.marker_prep
    }

    pub fn qae_block(&self) -> &CircuitBlock {
        &self.qae
    }

    fn marker_index(&self, value: u64) -> u64 {
        self.marker_values
            .iter()
            .position(|&v| v == value)
            .map(|i| i as u64)
            .unwrap_or(value)
    }

    /// Marker prep + evolution, stopping before the amplitude mapping.
    pub fn state_after_evolution(&self) -> Result<StateVector> {
        let mut st = StateVector::with_cap(self.layout.clone(), self.qubit_cap)?;
        st.apply_block(&self.marker_prep)?;
        st.apply_block(&self.evolution)?;
        Ok(st)
    }

    /// Marker prep + `A`: the state whose coin marginal carries the
    /// per-marker target amplitudes.
    pub fn state_after_prep(&self) -> Result<StateVector> {
        let mut st = StateVector::with_cap(self.layout.clone(), self.qubit_cap)?;
        st.apply_block(&self.marker_prep)?;
        st.apply_block(&self.prep)?;
        Ok(st)
    }

    /// Marker prep + `A` + estimation: the search-ready state.
    pub fn prepared_state(&self) -> Result<StateVector> {
        let mut st = StateVector::with_cap(self.layout.clone(), self.qubit_cap)?;
        st.apply_block(&self.full_prep)?;
        Ok(st)
    }

    /// Default iteration budget `ceil(budget_c * sqrt(|L|))` unless
    /// overridden.
    pub fn iteration_budget(&self) -> u64 {
        self.minfind.budget_override.unwrap_or_else(|| {
            (self.minfind.budget_c * (self.lattice_count() as f64).sqrt()).ceil() as u64
        })
    }

    /// Joint (marker, estimation) distribution of the prepared state.
    pub fn estimate_distribution(&self) -> Result<EstimateResult> {
        let st = self.prepared_state()?;
        let joint = st.joint_marginal(RegisterId::Marker, RegisterId::Estimation);
        let mut per_marker: BTreeMap<u64, Vec<(u64, f64)>> = BTreeMap::new();
        let mut mass: BTreeMap<u64, f64> = BTreeMap::new();
        for (&(m, y), &p) in &joint {
            let idx = self.marker_index(m);
            per_marker.entry(idx).or_default().push((y, p));
            *mass.entry(idx).or_insert(0.0) += p;
        }
        for (idx, rows) in per_marker.iter_mut() {
            let total = mass[idx];
            for row in rows.iter_mut() {
                row.1 /= total;
            }
        }
        Ok(EstimateResult {
            e: self.e,
            per_marker,
        })
    }
}

/// Folds an estimation outcome onto the monotone half of the grid:
/// `min(y, 2^e - y)`.
pub fn canonical_outcome(y: u64, e: usize) -> u64 {
    if y == 0 {
        0
    } else {
        y.min((1u64 << e) - y)
    }
}

/// Threshold-tracking minimum finding: prepare, sample an initial
/// threshold, then rounds of Grover iterations (threshold oracle plus
/// reflection about the full preparation) with iteration counts drawn
/// from the exponential schedule, measuring the marker and estimation
/// registers each round and lowering the threshold on improvement.
///
/// Stops once the total Grover iteration budget is exhausted or the
/// threshold reaches the bottom of the grid.
pub fn run_durr_hoyer<R: Rng + ?Sized>(pipeline: &Pipeline, rng: &mut R) -> Result<MinFindResult> {
    let budget = pipeline.iteration_budget();
    if budget == 0 {
        return Err(Error::InvalidArgument("iteration budget is zero"));
    }
    let e = pipeline.e;
    let layout = &pipeline.layout;
    let psi = pipeline.prepared_state()?;

    let mut trace = Vec::new();
    let first = psi.sample_basis(rng);
    let first_marker = pipeline.marker_index(layout.value_of(first, RegisterId::Marker));
    let first_y = layout.value_of(first, RegisterId::Estimation);
    trace.push(TraceRow {
        tau: 1u64 << e,
        marker: first_marker,
        outcome: first_y,
        iterations: 0,
    });

    let mut best_marker = first_marker;
    let mut tau = canonical_outcome(first_y, e);
    if pipeline.lattice_count() == 1 {
        return Ok(MinFindResult {
            best_marker: 0,
            best_outcome: tau,
            best_estimate: qae_estimate_from_outcome(tau, e)?,
            threshold_trace: trace,
            grover_iterations_total: 0,
            oracle_queries_total: 0,
            rounds: 1,
        });
    }

    let lambda = pipeline.minfind.lambda;
    let m_cap = (pipeline.lattice_count() as f64).sqrt();
    let mut m = 1.0f64;
    let mut iterations_total = 0u64;
    let mut rounds = 0u64;
    // Rounds that draw zero iterations cost no budget; this cap bounds
    // the loop regardless.
    let max_rounds = 8 * budget + 16;

    while iterations_total < budget && rounds < max_rounds && tau > 0 {
        rounds += 1;
        let drawn = grover_schedule(m, lambda, rng)?;
        let j = drawn.min(budget - iterations_total);
        let mut st = psi.clone();
        if j > 0 {
            let oracle = build_threshold_oracle(layout, tau)?;
            for _ in 0..j {
                st.apply_block(&oracle)?;
                st.apply_block(&pipeline.full_prep_adjoint)?;
                st.apply_block(&pipeline.reflect_all)?;
                st.apply_block(&pipeline.full_prep)?;
            }
        }
        iterations_total += j;
        let basis = st.sample_basis(rng);
        let marker = pipeline.marker_index(layout.value_of(basis, RegisterId::Marker));
        let y = layout.value_of(basis, RegisterId::Estimation);
        trace.push(TraceRow {
            tau,
            marker,
            outcome: y,
            iterations: j,
        });
        let y_c = canonical_outcome(y, e);
        if y_c < tau {
            tau = y_c;
            best_marker = marker;
            m = 1.0;
        } else {
            m = (lambda * m).min(m_cap.max(1.0));
        }
    }

    Ok(MinFindResult {
        best_marker,
        best_outcome: tau,
        best_estimate: qae_estimate_from_outcome(tau, e)?,
        threshold_trace: trace,
        grover_iterations_total: iterations_total,
        oracle_queries_total: iterations_total,
        rounds: rounds + 1,
    })
}
