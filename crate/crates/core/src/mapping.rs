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

//! Amplitude mappings loading a monotone function of the accumulated
//! quantity onto the coin qubit, plus reusable comparator primitives.
//!
//! Weighted rotation gives coin-1 probability `sin^2(alpha f / 2)`; the
//! linear comparison gives exactly `f / 2^n` and is linear in the ensemble,
//! which makes the estimation target proportional to the mean quantity.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float; // f64 math on no_std targets

use crate::error::{Error, Result};
use crate::lattice::QoISpec;
use crate::sim::{CircuitBlock, CircuitOp, Control, RegisterId, RegisterLayout};

const PI: f64 = core::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingKind {
    WeightedRotation,
    LinearComparison,
}

/// Choice of amplitude mapping; `alpha` applies to the weighted rotation
/// only and defaults to `pi / F_max` so the sinusoid stays on its
/// monotone support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingSpec {
    pub kind: MappingKind,
    pub alpha: f64,
}

impl MappingSpec {
    pub fn linear_comparison() -> Self {
        MappingSpec {
            kind: MappingKind::LinearComparison,
            alpha: 0.0,
        }
    }

    pub fn weighted_rotation(qoi: &QoISpec) -> Result<Self> {
        let f_max = qoi.f_max();
        if f_max == 0 {
            return Err(Error::InvalidArgument(
                "weighted rotation needs a nonzero maximum quantity",
            ));
        }
        Ok(MappingSpec {
            kind: MappingKind::WeightedRotation,
            alpha: PI / f_max as f64,
        })
    }

    /// Override of the rotation weight; must keep the support inside
    /// `[0, pi/2]`, i.e. `0 < alpha <= pi / F_max`.
    pub fn weighted_rotation_with_alpha(qoi: &QoISpec, alpha: f64) -> Result<Self> {
        let f_max = qoi.f_max();
        if f_max == 0 || alpha <= 0.0 || alpha > PI / f_max as f64 + 1e-15 {
            return Err(Error::InvalidArgument(
                "alpha must lie in (0, pi / F_max]",
            ));
        }
        Ok(MappingSpec {
            kind: MappingKind::WeightedRotation,
            alpha,
        })
    }

    /// Coin-1 probability assigned to a definite data value.
    pub fn phi(&self, f: u64, n_q_acc: usize) -> f64 {
        match self.kind {
            MappingKind::WeightedRotation => {
                let half = self.alpha * f as f64 / 2.0;
                half.sin() * half.sin()
            }
            MappingKind::LinearComparison => f as f64 / (1u64 << n_q_acc) as f64,
        }
    }
}

/// `RotY(2^j alpha)` on the coin, controlled on data qubit `j`; a data
/// value `f` rotates the coin by `alpha f` in total.
pub fn build_weighted_rotation(layout: &RegisterLayout, mapping: &MappingSpec) -> CircuitBlock {
    let coin = layout.qubit(RegisterId::Coin, 0);
    let data = layout.qubits(RegisterId::Data);
    let mut block = CircuitBlock::new("map-weighted-rotation");
    for (j, &d) in data.iter().enumerate() {
        let angle = mapping.alpha * (1u64 << j) as f64;
        block.push(
            CircuitOp::ry(coin, angle)
                .controlled(&[Control::positive(d)])
                .unwrap(),
        );
    }
    block
}

/// Flips `target` on basis states with `value(a) < value(b)` (strict).
///
/// The borrow logic works over `d = a XOR b`, written temporarily into the
/// `b` qubits: the comparison outcome is decided at the highest differing
/// bit, so one multi-controlled X per bit position fires on exactly the
/// states whose highest difference sits there with `a` clear. The XOR is
/// un-rippled afterwards, leaving both registers and every intermediate
/// clean.
pub fn build_comparator_less_than(
    a_qubits: &[usize],
    b_qubits: &[usize],
    target: usize,
) -> Result<CircuitBlock> {
    if a_qubits.len() != b_qubits.len() {
        return Err(Error::WidthMismatch {
            left: a_qubits.len(),
            right: b_qubits.len(),
        });
    }
    let n = a_qubits.len();
    let mut block = CircuitBlock::new("cmp-lt");
    for k in 0..n {
        block.push(CircuitOp::x(b_qubits[k]).controlled(&[Control::positive(a_qubits[k])])?);
    }
    for k in (0..n).rev() {
        let mut controls = Vec::with_capacity(n - k + 1);
        for j in k + 1..n {
            controls.push(Control::negative(b_qubits[j]));
        }
        controls.push(Control::positive(b_qubits[k]));
        controls.push(Control::negative(a_qubits[k]));
        block.push(CircuitOp::x(target).controlled(&controls)?);
    }
    for k in 0..n {
        block.push(CircuitOp::x(b_qubits[k]).controlled(&[Control::positive(a_qubits[k])])?);
    }
    Ok(block)
}

/// Flips `target` on basis states with `value(reg) < constant`, built from
/// multi-controlled X gates over bit prefixes of the classical constant.
/// `constant = 2^width` marks every state.
pub fn build_constant_comparator(
    reg_qubits: &[usize],
    constant: u64,
    target: usize,
) -> Result<CircuitBlock> {
    let n = reg_qubits.len();
    if constant > 1u64 << n {
        return Err(Error::ConstantOutOfRange {
            constant,
            width: n,
        });
    }
    let mut block = CircuitBlock::new("cmp-const");
    if constant == 1u64 << n {
        block.push(CircuitOp::x(target));
        return Ok(block);
    }
    for k in (0..n).rev() {
        if constant & (1 << k) == 0 {
            continue;
        }
        let mut controls = Vec::with_capacity(n - k);
        for j in k + 1..n {
            controls.push(Control {
                qubit: reg_qubits[j],
                value: constant & (1 << j) != 0,
            });
        }
        controls.push(Control::negative(reg_qubits[k]));
        block.push(CircuitOp::x(target).controlled(&controls)?);
    }
    Ok(block)
}

/// Linear-comparison mapping: Hadamards on the mapping ancilla, a
/// comparator flipping the coin where the ancilla value is below the data
/// value, the comparator's internal transform undone, closing Hadamards.
/// Coin-1 probability for data value `f` is exactly `f / 2^n`.
pub fn build_linear_comparison(layout: &RegisterLayout) -> Result<CircuitBlock> {
    let data = layout.qubits(RegisterId::Data);
    let anc = layout.qubits(RegisterId::MapAncilla);
    if anc.len() != data.len() {
        return Err(Error::WidthMismatch {
            left: anc.len(),
            right: data.len(),
        });
    }
    let coin = layout.qubit(RegisterId::Coin, 0);
    let mut block = CircuitBlock::new("map-linear-comparison");
    for &q in &anc {
        block.push(CircuitOp::h(q));
    }
    block.extend_from(&build_comparator_less_than(&anc, &data, coin)?);
    for &q in &anc {
        block.push(CircuitOp::h(q));
    }
    Ok(block)
}

/// Builds the mapping block selected by `mapping`.
pub fn build_mapping(layout: &RegisterLayout, mapping: &MappingSpec) -> Result<CircuitBlock> {
    match mapping.kind {
        MappingKind::WeightedRotation => Ok(build_weighted_rotation(layout, mapping)),
        MappingKind::LinearComparison => build_linear_comparison(layout),
    }
}
