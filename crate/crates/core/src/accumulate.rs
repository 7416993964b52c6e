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

//! The weighted Hamming adder and the interleaved accumulation schedule
//! that coherently sums the quantity of interest into the data register.
//!
//! The data register stays in Fourier space across all time steps; only
//! two QFT-type blocks bracket the whole evolution.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, QoISpec};
use crate::parallel::ConfigurationSet;
use crate::sim::{qft_block, CircuitBlock, CircuitOp, Control, RegisterId, RegisterLayout, StateVector};

const PI: f64 = core::f64::consts::PI;

/// Adds `weight` to the Fourier-space data register, controlled on one
/// source qubit: a phase `weight * pi / 2^(n-1-k)` on data qubit k.
fn push_controlled_increment(
    block: &mut CircuitBlock,
    data: &[usize],
    source: usize,
    weight: u64,
) {
    let n = data.len();
    for (k, &d) in data.iter().enumerate() {
        let angle = weight as f64 * PI / (1u64 << (n - 1 - k)) as f64;
        block.push(
            CircuitOp::phase(d, angle)
                .controlled(&[Control::positive(source)])
                .unwrap(),
        );
    }
}

/// Fourier-space adder over arbitrary weighted source qubits: after an
/// inverse QFT the data value becomes `y + sum_j alpha_j x_j mod 2^n`.
/// Exactly `sources.len() * n` controlled phases.
pub fn build_weighted_adder(
    layout: &RegisterLayout,
    sources: &[(usize, u64)],
) -> CircuitBlock {
    let data = layout.qubits(RegisterId::Data);
    let mut block = CircuitBlock::new("weighted-adder");
    for &(source, weight) in sources {
        push_controlled_increment(&mut block, &data, source, weight);
    }
    block
}

/// The weighted Hamming adder over the region and channel set of the
/// quantity of interest: one controlled phase ladder per (gridpoint in
/// region, contributing channel) source qubit, `|region| * |channels| * n`
/// controlled phases in total, never touching the marker.
pub fn build_mhwa(
    layout: &RegisterLayout,
    qoi: &QoISpec,
    spec: &LatticeSpec,
) -> Result<CircuitBlock> {
    let base = layout.offset(RegisterId::Base);
    let mut sources = Vec::new();
    for &g in &qoi.region {
        for &c in &qoi.channels {
            sources.push((base + spec.qubit_index(g, c)?, qoi.weights[&c]));
        }
    }
    let mut block = build_weighted_adder(layout, &sources);
    block.label = alloc::string::String::from("mhwa");
    Ok(block)
}

/// Placement of the QFT brackets and the per-step adder blocks across an
/// `n_t`-step evolution.
#[derive(Debug, Clone)]
pub struct AccumulationSchedule {
    /// QFT on the data register, before step 1.
    pub pre: CircuitBlock,
    /// The adder applied after each accumulation step.
    pub mhwa: CircuitBlock,
    /// 1-based steps after which the adder fires.
    pub acc_steps: Vec<usize>,
    /// Inverse QFT on the data register, after the final step.
    pub post: CircuitBlock,
    pub n_t: usize,
}

impl AccumulationSchedule {
    pub fn fires_after(&self, step: usize) -> bool {
        self.acc_steps.contains(&step)
    }

    pub fn mhwa_count(&self) -> usize {
        self.acc_steps.len()
    }
}

/// QFT before step 1, one adder after each step in the accumulation set,
/// inverse QFT after the final step only.
pub fn build_accumulation_schedule(
    layout: &RegisterLayout,
    qoi: &QoISpec,
    spec: &LatticeSpec,
    n_t: usize,
) -> Result<AccumulationSchedule> {
    for &t in &qoi.acc_steps {
        if t == 0 || t > n_t {
            return Err(Error::AccStepOutOfRange { step: t, steps: n_t });
        }
    }
    Ok(AccumulationSchedule {
        pre: qft_block(layout, RegisterId::Data, false),
        mhwa: build_mhwa(layout, qoi, spec)?,
        acc_steps: qoi.acc_steps.iter().copied().collect(),
        post: qft_block(layout, RegisterId::Data, true),
        n_t,
    })
}

/// Per-marker distribution over data-register values after the pipeline
/// ran through its final inverse QFT: the testable content of the
/// accumulated state.
pub fn accumulated_state_check(
    state: &StateVector,
    configs: &ConfigurationSet,
    _qoi: &QoISpec,
) -> BTreeMap<u64, BTreeMap<u64, f64>> {
    let layout = state.layout();
    let mut marker_mass: BTreeMap<u64, f64> = BTreeMap::new();
    let mut joint: BTreeMap<u64, BTreeMap<u64, f64>> = BTreeMap::new();
    for (basis, amp) in state.amplitudes().iter().enumerate() {
        let p = amp.norm_sqr();
        if p <= 0.0 {
            continue;
        }
        let m = layout.value_of(basis, RegisterId::Marker);
        let f = layout.value_of(basis, RegisterId::Data);
        *marker_mass.entry(m).or_insert(0.0) += p;
        *joint.entry(m).or_default().entry(f).or_insert(0.0) += p;
    }
    let mut out = BTreeMap::new();
    for j in 0..configs.len() {
        let mv = configs.marker_value(j);
        let mass = marker_mass.get(&mv).copied().unwrap_or(0.0);
        if mass <= 1e-15 {
            continue;
        }
        let table = joint
            .remove(&mv)
            .unwrap_or_default()
            .into_iter()
            .map(|(f, p)| (f, p / mass))
            .filter(|&(_, p)| p > 1e-12)
            .collect();
        out.insert(mv, table);
    }
    out
}
