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

//! Dense statevector engine: register layouts, gate application, QFT,
//! marginals, projective measurement, and sampling.
//!
//! Conventions, fixed once for the whole crate:
//! * qubit 0 is the least significant bit of a basis index;
//! * within a register, the qubit at offset k carries bit k of the
//!   register value;
//! * registers concatenate in layout order, so basis index bits are
//!   `[reg0 bits][reg1 bits]...` from least to most significant;
//! * `RotY(t)|0> = cos(t/2)|0> + sin(t/2)|1>` and
//!   `Phase(t)|1> = exp(i t)|1>`;
//! * the QFT maps `|y>` to `2^(-n/2) sum_z exp(2 pi i y z / 2^n)|z>`,
//!   so a phase ladder `Phase(pi / 2^(n-1-k))` on qubit k increments
//!   the register value by one.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float; // f64 math on no_std targets
use rand::Rng;

use crate::error::{Error, Result};
use crate::DEFAULT_QUBIT_CAP;

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
const PI: f64 = core::f64::consts::PI;

/// Named registers of the pipeline layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RegisterId {
    /// Lattice occupancy qubits, one per (gridpoint, channel).
    Base,
    /// Configuration marker.
    Marker,
    /// Data accumulation register holding the running quantity of interest.
    Data,
    /// Ancilla register used by the linear-comparison amplitude mapping.
    MapAncilla,
    /// Single-qubit coin carrying the mapped amplitude.
    Coin,
    /// Amplitude-estimation readout register.
    Estimation,
    /// Grover flag qubit used by the threshold oracle.
    Flag,
}

impl RegisterId {
    pub fn short_name(self) -> &'static str {
        match self {
            RegisterId::Base => "B",
            RegisterId::Marker => "M",
            RegisterId::Data => "D",
            RegisterId::MapAncilla => "AM",
            RegisterId::Coin => "C",
            RegisterId::Estimation => "E",
            RegisterId::Flag => "G",
        }
    }
}

impl core::fmt::Display for RegisterId {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Ordered, contiguous, disjoint named registers covering `0..total_qubits`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    regs: Vec<(RegisterId, usize, usize)>, // (id, offset, width)
    total: usize,
}

impl RegisterLayout {
    /// Builds a layout from `(register, width)` pairs in order. Zero-width
    /// registers are allowed and occupy an empty range.
    ///
    /// Panics if the same register id appears twice; that is a programming
    /// error, not an input condition.
    pub fn new(widths: &[(RegisterId, usize)]) -> Self {
        let mut regs = Vec::with_capacity(widths.len());
        let mut offset = 0usize;
        for &(id, width) in widths {
            assert!(
                !regs.iter().any(|&(other, _, _)| other == id),
                "duplicate register id {id}"
            );
            regs.push((id, offset, width));
            offset += width;
        }
        RegisterLayout { regs, total: offset }
    }

    /// Single unnamed-equivalent layout: everything in the base register.
    pub fn single(width: usize) -> Self {
        RegisterLayout::new(&[(RegisterId::Base, width)])
    }

    pub fn total_qubits(&self) -> usize {
        self.total
    }

    pub fn has(&self, id: RegisterId) -> bool {
        self.regs.iter().any(|&(r, _, w)| r == id && w > 0)
    }

    pub fn width(&self, id: RegisterId) -> usize {
        self.find(id).map(|(_, w)| w).unwrap_or(0)
    }

    pub fn offset(&self, id: RegisterId) -> usize {
        self.find(id).map(|(o, _)| o).unwrap_or(self.total)
    }

    fn find(&self, id: RegisterId) -> Option<(usize, usize)> {
        self.regs
            .iter()
            .find(|&&(r, _, _)| r == id)
            .map(|&(_, o, w)| (o, w))
    }

    /// Qubit indices of a register, least significant first.
    pub fn qubits(&self, id: RegisterId) -> Vec<usize> {
        let (o, w) = self.find(id).unwrap_or((self.total, 0));
        (o..o + w).collect()
    }

    /// Absolute index of bit `k` of a register value.
    pub fn qubit(&self, id: RegisterId, k: usize) -> usize {
        let (o, w) = self.find(id).unwrap_or((self.total, 0));
        assert!(k < w, "bit {k} out of range for register {id} of width {w}");
        o + k
    }

    /// Extracts the value a basis index assigns to a register.
    pub fn value_of(&self, basis: usize, id: RegisterId) -> u64 {
        let (o, w) = self.find(id).unwrap_or((0, 0));
        if w == 0 {
            return 0;
        }
        ((basis >> o) as u64) & ((1u64 << w) - 1)
    }

    pub fn registers(&self) -> impl Iterator<Item = (RegisterId, usize, usize)> + '_ {
        self.regs.iter().copied()
    }
}

/// Gate vocabulary. Multi-controlled variants are expressed through the
/// `controls` field of [`CircuitOp`], not separate kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    PauliX,
    PauliZ,
    Hadamard,
    RotY(f64),
    Phase(f64),
    Swap,
    Unitary(UnitaryMatrix),
}

/// Dense `2^k x 2^k` row-major complex matrix, checked for unitarity
/// at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    elems: Vec<Complex64>,
}

impl UnitaryMatrix {
    pub fn new(dim: usize, elems: Vec<Complex64>) -> Result<Self> {
        if !dim.is_power_of_two() || elems.len() != dim * dim {
            return Err(Error::WidthMismatch {
                left: dim * dim,
                right: elems.len(),
            });
        }
        let m = UnitaryMatrix { dim, elems };
        let dev = m.unitarity_deviation();
        if dev > 1e-10 {
            return Err(Error::NonUnitary { deviation: dev });
        }
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        let mut elems = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            elems[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        UnitaryMatrix { dim, elems }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.elems[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: Complex64) {
        self.elems[row * self.dim + col] = v;
    }

    /// Max-norm deviation of `U U^dagger` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.get(i, k) * self.get(j, k).conj();
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((acc - expect).norm());
            }
        }
        dev
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut elems = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                elems[j * n + i] = self.get(i, j).conj();
            }
        }
        UnitaryMatrix { dim: n, elems }
    }
}

/// A control condition: the gate fires only on basis states where
/// `qubit` carries `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Control {
    pub qubit: usize,
    pub value: bool,
}

impl Control {
    pub fn positive(qubit: usize) -> Self {
        Control { qubit, value: true }
    }

    pub fn negative(qubit: usize) -> Self {
        Control { qubit, value: false }
    }
}

/// One (possibly multi-controlled) gate acting on absolute qubit indices.
/// For `Unitary`, `targets[0]` is the least significant bit of the matrix
/// index.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitOp {
    gate: Gate,
    targets: Vec<usize>,
    controls: Vec<Control>,
}

impl CircuitOp {
    pub fn new(gate: Gate, targets: Vec<usize>, controls: Vec<Control>) -> Result<Self> {
        let expected = match &gate {
            Gate::Swap => 2,
            Gate::Unitary(m) => {
                let k = m.dim().trailing_zeros() as usize;
                if targets.len() != k {
                    return Err(Error::BadArity {
                        expected: k,
                        got: targets.len(),
                    });
                }
                k
            }
            _ => 1,
        };
        if targets.len() != expected {
            return Err(Error::BadArity {
                expected,
                got: targets.len(),
            });
        }
        for (i, &t) in targets.iter().enumerate() {
            if targets[i + 1..].contains(&t) {
                return Err(Error::OverlappingQubits);
            }
            if controls.iter().any(|c| c.qubit == t) {
                return Err(Error::OverlappingQubits);
            }
        }
        for (i, c) in controls.iter().enumerate() {
            if controls[i + 1..].iter().any(|d| d.qubit == c.qubit) {
                return Err(Error::OverlappingQubits);
            }
        }
        Ok(CircuitOp {
            gate,
            targets,
            controls,
        })
    }

    pub fn x(target: usize) -> Self {
        CircuitOp::new(Gate::PauliX, vec![target], Vec::new()).unwrap()
    }

    pub fn z(target: usize) -> Self {
        CircuitOp::new(Gate::PauliZ, vec![target], Vec::new()).unwrap()
    }

    pub fn h(target: usize) -> Self {
        CircuitOp::new(Gate::Hadamard, vec![target], Vec::new()).unwrap()
    }

    pub fn ry(target: usize, angle: f64) -> Self {
        CircuitOp::new(Gate::RotY(angle), vec![target], Vec::new()).unwrap()
    }

    pub fn phase(target: usize, angle: f64) -> Self {
        CircuitOp::new(Gate::Phase(angle), vec![target], Vec::new()).unwrap()
    }

    pub fn swap(a: usize, b: usize) -> Self {
        CircuitOp::new(Gate::Swap, vec![a, b], Vec::new()).unwrap()
    }

    pub fn unitary(matrix: UnitaryMatrix, targets: Vec<usize>) -> Result<Self> {
        CircuitOp::new(Gate::Unitary(matrix), targets, Vec::new())
    }

    /// Same gate with additional controls appended.
    pub fn controlled(mut self, extra: &[Control]) -> Result<Self> {
        for c in extra {
            if self.targets.contains(&c.qubit) || self.controls.iter().any(|d| d.qubit == c.qubit)
            {
                return Err(Error::OverlappingQubits);
            }
            self.controls.push(*c);
        }
        Ok(self)
    }

    pub fn gate(&self) -> &Gate {
        &self.gate
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn controls(&self) -> &[Control] {
        &self.controls
    }

    pub fn adjoint(&self) -> Self {
        let gate = match &self.gate {
            Gate::RotY(t) => Gate::RotY(-t),
            Gate::Phase(t) => Gate::Phase(-t),
            Gate::Unitary(m) => Gate::Unitary(m.adjoint()),
            g => g.clone(),
        };
        CircuitOp {
            gate,
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    fn max_qubit(&self) -> usize {
        let t = self.targets.iter().copied().max().unwrap_or(0);
        let c = self.controls.iter().map(|c| c.qubit).max().unwrap_or(0);
        t.max(c)
    }

    fn control_masks(&self) -> (usize, usize) {
        let mut mask = 0usize;
        let mut value = 0usize;
        for c in &self.controls {
            mask |= 1 << c.qubit;
            if c.value {
                value |= 1 << c.qubit;
            }
        }
        (mask, value)
    }
}

/// An ordered list of gates with a label, applied front to back.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CircuitBlock {
    pub label: String,
    ops: Vec<CircuitOp>,
}

impl CircuitBlock {
    pub fn new(label: &str) -> Self {
        CircuitBlock {
            label: String::from(label),
            ops: Vec::new(),
        }
    }

    pub fn push(&mut self, op: CircuitOp) {
        self.ops.push(op);
    }

    pub fn extend_from(&mut self, other: &CircuitBlock) {
        self.ops.extend(other.ops.iter().cloned());
    }

    pub fn ops(&self) -> &[CircuitOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Reversed op order with per-op adjoints; `B B^dagger` is the identity.
    pub fn adjoint(&self) -> Self {
        let mut label = String::from(self.label.as_str());
        label.push_str("-adj");
        CircuitBlock {
            label,
            ops: self.ops.iter().rev().map(CircuitOp::adjoint).collect(),
        }
    }

    /// Every op gains the given controls.
    pub fn controlled(&self, extra: &[Control], label: &str) -> Result<Self> {
        let mut out = CircuitBlock::new(label);
        for op in &self.ops {
            out.push(op.clone().controlled(extra)?);
        }
        Ok(out)
    }

    pub fn count_where(&self, mut pred: impl FnMut(&CircuitOp) -> bool) -> usize {
        self.ops.iter().filter(|op| pred(op)).count()
    }

    /// Greedy ASAP layering: ops touching disjoint qubits share a layer.
    pub fn layer_count(&self) -> usize {
        let mut last_layer: BTreeMap<usize, usize> = BTreeMap::new();
        let mut layers = 0usize;
        for op in &self.ops {
            let mut layer = 0usize;
            for &t in op.targets.iter() {
                layer = layer.max(last_layer.get(&t).map_or(0, |l| l + 1));
            }
            for c in op.controls.iter() {
                layer = layer.max(last_layer.get(&c.qubit).map_or(0, |l| l + 1));
            }
            for &t in op.targets.iter() {
                last_layer.insert(t, layer);
            }
            for c in op.controls.iter() {
                last_layer.insert(c.qubit, layer);
            }
            layers = layers.max(layer + 1);
        }
        layers
    }
}

/// Builds the QFT (or its inverse) on one register of the layout, in the
/// convention documented at the top of this module.
pub fn qft_block(layout: &RegisterLayout, reg: RegisterId, inverse: bool) -> CircuitBlock {
    let qs = layout.qubits(reg);
    let n = qs.len();
    let mut block = CircuitBlock::new(if inverse { "iqft" } else { "qft" });
    for j in (0..n).rev() {
        block.push(CircuitOp::h(qs[j]));
        for m in (0..j).rev() {
            let angle = PI / (1u64 << (j - m)) as f64;
            block.push(
                CircuitOp::phase(qs[j], angle)
                    .controlled(&[Control::positive(qs[m])])
                    .unwrap(),
            );
        }
    }
    for k in 0..n / 2 {
        block.push(CircuitOp::swap(qs[k], qs[n - 1 - k]));
    }
    if inverse {
        block.adjoint()
    } else {
        block
    }
}

/// Full 2^N complex-amplitude simulation state over a register layout.
#[derive(Debug, Clone)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// All-zero basis state, rejecting layouts over [`DEFAULT_QUBIT_CAP`].
    pub fn new(layout: RegisterLayout) -> Result<Self> {
        StateVector::with_cap(layout, DEFAULT_QUBIT_CAP)
    }

    pub fn with_cap(layout: RegisterLayout, cap: usize) -> Result<Self> {
        let n = layout.total_qubits();
        if n > cap {
            return Err(Error::Capacity { qubits: n, cap });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { layout, amps })
    }

    /// Wraps raw amplitudes; the caller is responsible for normalization.
    pub fn from_amplitudes(layout: RegisterLayout, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << layout.total_qubits() {
            return Err(Error::WidthMismatch {
                left: 1usize << layout.total_qubits(),
                right: amps.len(),
            });
        }
        Ok(StateVector { layout, amps })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.total_qubits()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, basis: usize) -> Complex64 {
        self.amps[basis]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn overlap(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies one gate; the state becomes `U |psi>`.
    pub fn apply(&mut self, op: &CircuitOp) -> Result<()> {
        let n = self.num_qubits();
        if !self.amps.is_empty() && op.max_qubit() >= n && !(op.targets.is_empty()) {
            return Err(Error::QubitOutOfRange {
                qubit: op.max_qubit(),
                total: n,
            });
        }
        let (cmask, cval) = op.control_masks();
        let dim = self.amps.len();
        match &op.gate {
            Gate::PauliX => {
                let t = 1usize << op.targets[0];
                for i in 0..dim {
                    if i & t == 0 && i & cmask == cval {
                        self.amps.swap(i, i | t);
                    }
                }
            }
            Gate::PauliZ => {
                let t = 1usize << op.targets[0];
                for i in 0..dim {
                    if i & t != 0 && i & cmask == cval {
                        self.amps[i] = -self.amps[i];
                    }
                }
            }
            Gate::Hadamard => {
                let t = 1usize << op.targets[0];
                for i in 0..dim {
                    if i & t == 0 && i & cmask == cval {
                        let a = self.amps[i];
                        let b = self.amps[i | t];
                        self.amps[i] = (a + b) * FRAC_1_SQRT_2;
                        self.amps[i | t] = (a - b) * FRAC_1_SQRT_2;
                    }
                }
            }
            Gate::RotY(theta) => {
                let t = 1usize << op.targets[0];
                let c = (theta / 2.0).cos();
                let s = (theta / 2.0).sin();
                for i in 0..dim {
                    if i & t == 0 && i & cmask == cval {
                        let a = self.amps[i];
                        let b = self.amps[i | t];
                        self.amps[i] = a * c - b * s;
                        self.amps[i | t] = a * s + b * c;
                    }
                }
            }
            Gate::Phase(theta) => {
                let t = 1usize << op.targets[0];
                let ph = Complex64::from_polar(1.0, *theta);
                for i in 0..dim {
                    if i & t != 0 && i & cmask == cval {
                        self.amps[i] *= ph;
                    }
                }
            }
            Gate::Swap => {
                let a = 1usize << op.targets[0];
                let b = 1usize << op.targets[1];
                for i in 0..dim {
                    if i & a != 0 && i & b == 0 && i & cmask == cval {
                        self.amps.swap(i, i ^ a ^ b);
                    }
                }
            }
            Gate::Unitary(m) => {
                let k = op.targets.len();
                let sub = 1usize << k;
                let mut offsets = vec![0usize; sub];
                for (p, off) in offsets.iter_mut().enumerate() {
                    for (j, &t) in op.targets.iter().enumerate() {
                        if p & (1 << j) != 0 {
                            *off |= 1 << t;
                        }
                    }
                }
                let tmask: usize = op.targets.iter().map(|&t| 1usize << t).sum();
                let mut scratch = vec![Complex64::new(0.0, 0.0); sub];
                for i in 0..dim {
                    if i & tmask == 0 && i & cmask == cval {
                        for (p, s) in scratch.iter_mut().enumerate() {
                            let mut acc = Complex64::new(0.0, 0.0);
                            for q in 0..sub {
                                acc += m.get(p, q) * self.amps[i | offsets[q]];
                            }
                            *s = acc;
                        }
                        for (p, s) in scratch.iter().enumerate() {
                            self.amps[i | offsets[p]] = *s;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_block(&mut self, block: &CircuitBlock) -> Result<()> {
        for op in block.ops() {
            self.apply(op)?;
        }
        debug_assert!((self.norm_sqr() - 1.0).abs() < 1e-9, "norm drift");
        Ok(())
    }

    /// Standard QFT (or inverse) over one register.
    pub fn apply_qft(&mut self, reg: RegisterId, inverse: bool) -> Result<()> {
        let block = qft_block(&self.layout, reg, inverse);
        self.apply_block(&block)
    }

    /// Probability table over register values; entries sum to 1.
    pub fn marginal(&self, reg: RegisterId) -> Vec<f64> {
        let w = self.layout.width(reg);
        let mut table = vec![0.0f64; 1usize << w];
        let off = self.layout.offset(reg);
        let mask = (1usize << w) - 1;
        for (i, a) in self.amps.iter().enumerate() {
            table[(i >> off) & mask] += a.norm_sqr();
        }
        table
    }

    /// Joint probability over two registers, pruned below 1e-15.
    pub fn joint_marginal(&self, a: RegisterId, b: RegisterId) -> BTreeMap<(u64, u64), f64> {
        let mut out = BTreeMap::new();
        for (i, amp) in self.amps.iter().enumerate() {
            let p = amp.norm_sqr();
            if p > 0.0 {
                let key = (self.layout.value_of(i, a), self.layout.value_of(i, b));
                *out.entry(key).or_insert(0.0) += p;
            }
        }
        out.retain(|_, p| *p > 1e-15);
        out
    }

    pub fn prob_of(&self, reg: RegisterId, value: u64) -> f64 {
        let off = self.layout.offset(reg);
        let w = self.layout.width(reg);
        let mask = (1usize << w) - 1;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| ((i >> off) & mask) as u64 == value)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Renormalized projection onto `reg = value`.
    pub fn conditional(&self, reg: RegisterId, value: u64) -> Result<StateVector> {
        let p = self.prob_of(reg, value);
        if p <= 1e-15 {
            return Err(Error::ZeroProbability);
        }
        let off = self.layout.offset(reg);
        let w = self.layout.width(reg);
        let mask = (1usize << w) - 1;
        let scale = 1.0 / p.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if ((i >> off) & mask) as u64 == value {
                    a * scale
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok(StateVector {
            layout: self.layout.clone(),
            amps,
        })
    }

    /// Draws one basis index from the Born distribution without collapsing.
    pub fn sample_basis<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let r: f64 = rng.random();
        let mut acc = 0.0f64;
        for (i, a) in self.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if r < acc {
                return i;
            }
        }
        self.amps.len() - 1
    }

    /// Projective measurement of one register: a sampled value and the
    /// collapsed (renormalized) post-measurement state.
    pub fn sample<R: Rng + ?Sized>(&self, reg: RegisterId, rng: &mut R) -> (u64, StateVector) {
        let basis = self.sample_basis(rng);
        let value = self.layout.value_of(basis, reg);
        let collapsed = self
            .conditional(reg, value)
            .expect("sampled outcome has nonzero probability");
        (value, collapsed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_state() {
        let st = StateVector::new(RegisterLayout::single(3)).unwrap();
        assert_eq!(st.amplitude(0), c(1.0, 0.0));
        for i in 1..8 {
            assert_eq!(st.amplitude(i), c(0.0, 0.0));
        }
        let one = StateVector::new(RegisterLayout::single(1)).unwrap();
        assert_eq!(one.dim(), 2);
        assert_eq!(one.amplitude(0), c(1.0, 0.0));
    }

    #[test]
    fn capacity_cap_rejected() {
        let err = StateVector::new(RegisterLayout::single(27)).unwrap_err();
        assert_eq!(
            err,
            Error::Capacity {
                qubits: 27,
                cap: 26
            }
        );
    }

    #[test]
    fn x_on_qubit_zero() {
        let mut st = StateVector::new(RegisterLayout::single(2)).unwrap();
        st.apply(&CircuitOp::x(0)).unwrap();
        assert_eq!(st.amplitude(1), c(1.0, 0.0));
    }

    #[test]
    fn hadamard_superposition() {
        let mut st = StateVector::new(RegisterLayout::single(1)).unwrap();
        st.apply(&CircuitOp::h(0)).unwrap();
        assert!((st.amplitude(0).re - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((st.amplitude(1).re - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn controlled_x_fires_on_polarity_match() {
        // |01> with X on qubit 1 controlled on qubit 0 = 1 gives |11>.
        let mut st = StateVector::new(RegisterLayout::single(2)).unwrap();
        st.apply(&CircuitOp::x(0)).unwrap();
        let cx = CircuitOp::x(1).controlled(&[Control::positive(0)]).unwrap();
        st.apply(&cx).unwrap();
        assert_eq!(st.amplitude(3), c(1.0, 0.0));
    }

    #[test]
    fn controlled_ops_identity_unless_polarities_match() {
        // Exhaustive over all basis states of a 6-qubit layout, several ops.
        let layout = RegisterLayout::single(6);
        let ops = [
            CircuitOp::x(0)
                .controlled(&[Control::positive(3), Control::negative(5)])
                .unwrap(),
            CircuitOp::ry(2, 0.7)
                .controlled(&[Control::negative(0)])
                .unwrap(),
            CircuitOp::swap(1, 4)
                .controlled(&[Control::positive(2), Control::positive(5)])
                .unwrap(),
            CircuitOp::phase(5, 1.1)
                .controlled(&[Control::negative(1), Control::positive(0)])
                .unwrap(),
        ];
        for op in &ops {
            let (cmask, cval) = op.control_masks();
            let bare = CircuitOp::new(op.gate().clone(), op.targets().to_vec(), Vec::new())
                .unwrap();
            for basis in 0..64usize {
                let mut st = StateVector::new(layout.clone()).unwrap();
                st.amps[0] = c(0.0, 0.0);
                st.amps[basis] = c(1.0, 0.0);
                let mut expected = st.clone();
                st.apply(op).unwrap();
                if basis & cmask == cval {
                    expected.apply(&bare).unwrap();
                }
                for i in 0..64 {
                    assert!(
                        (st.amplitude(i) - expected.amplitude(i)).norm() < 1e-12,
                        "basis {basis} index {i}"
                    );
                }
            }
        }
    }

    #[test]
    fn qft_then_inverse_is_identity() {
        let layout = RegisterLayout::single(4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut amps: Vec<Complex64> = (0..16)
            .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let st0 = StateVector::from_amplitudes(layout, amps).unwrap();
        let mut st = st0.clone();
        st.apply_qft(RegisterId::Base, false).unwrap();
        st.apply_qft(RegisterId::Base, true).unwrap();
        for i in 0..16 {
            assert!((st.amplitude(i) - st0.amplitude(i)).norm() < 1e-10);
        }
    }

    #[test]
    fn qft_of_vacuum_is_uniform_positive() {
        let mut st = StateVector::new(RegisterLayout::single(3)).unwrap();
        st.apply_qft(RegisterId::Base, false).unwrap();
        for i in 0..8 {
            let a = st.amplitude(i);
            assert!((a.re - 1.0 / 8.0f64.sqrt()).abs() < 1e-12);
            assert!(a.im.abs() < 1e-12);
        }
    }

    #[test]
    fn qft_phase_ladder_increments_register() {
        // Pins the bit-order convention: QFT |1>, phase pi/2^(n-1-k) on
        // qubit k, inverse QFT must give |2>.
        let layout = RegisterLayout::single(3);
        let mut st = StateVector::new(layout).unwrap();
        st.apply(&CircuitOp::x(0)).unwrap();
        st.apply_qft(RegisterId::Base, false).unwrap();
        for k in 0..3 {
            let angle = PI / (1u64 << (2 - k)) as f64;
            st.apply(&CircuitOp::phase(k, angle)).unwrap();
        }
        st.apply_qft(RegisterId::Base, true).unwrap();
        assert!((st.amplitude(2).re - 1.0).abs() < 1e-10);
        for i in [0usize, 1, 3, 4, 5, 6, 7] {
            assert!(st.amplitude(i).norm() < 1e-10);
        }
    }

    #[test]
    fn marginal_tables() {
        let layout = RegisterLayout::single(2);
        let mut st = StateVector::new(layout).unwrap();
        let m = st.marginal(RegisterId::Base);
        assert_eq!(m[0], 1.0);
        st.apply(&CircuitOp::h(0)).unwrap();
        let m = st.marginal(RegisterId::Base);
        assert!((m[0] - 0.5).abs() < 1e-12 && (m[1] - 0.5).abs() < 1e-12);
        assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn conditional_projects_and_errors_on_zero() {
        let layout = RegisterLayout::new(&[(RegisterId::Marker, 1), (RegisterId::Base, 1)]);
        let mut st = StateVector::new(layout).unwrap();
        st.apply(&CircuitOp::h(0)).unwrap();
        // Entangle: base = marker.
        st.apply(&CircuitOp::x(1).controlled(&[Control::positive(0)]).unwrap())
            .unwrap();
        let cond = st.conditional(RegisterId::Marker, 0).unwrap();
        assert!((cond.amplitude(0).re - 1.0).abs() < 1e-12);

        let vac = StateVector::new(RegisterLayout::single(2)).unwrap();
        assert_eq!(
            vac.conditional(RegisterId::Base, 1).unwrap_err(),
            Error::ZeroProbability
        );
    }

    #[test]
    fn sampling_is_consistent_and_collapses() {
        let layout = RegisterLayout::single(1);
        let mut st = StateVector::new(layout.clone()).unwrap();
        st.apply(&CircuitOp::x(0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (v, _) = st.sample(RegisterId::Base, &mut rng);
        assert_eq!(v, 1);

        let mut plus = StateVector::new(layout).unwrap();
        plus.apply(&CircuitOp::h(0)).unwrap();
        let mut ones = 0u32;
        for _ in 0..10_000 {
            if plus.sample_basis(&mut rng) == 1 {
                ones += 1;
            }
        }
        let freq = f64::from(ones) / 10_000.0;
        assert!((0.47..=0.53).contains(&freq), "freq {freq}");

        // Collapse: repeated sampling of the collapsed state is constant.
        let (v, collapsed) = plus.sample(RegisterId::Base, &mut rng);
        for _ in 0..20 {
            let (w, _) = collapsed.sample(RegisterId::Base, &mut rng);
            assert_eq!(w, v);
        }
    }

    #[test]
    fn non_unitary_matrix_rejected() {
        let bad = UnitaryMatrix::new(
            2,
            vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        );
        assert!(matches!(bad, Err(Error::NonUnitary { .. })));
    }

    #[test]
    fn out_of_range_target_rejected() {
        let mut st = StateVector::new(RegisterLayout::single(2)).unwrap();
        let err = st.apply(&CircuitOp::x(5)).unwrap_err();
        assert!(matches!(err, Error::QubitOutOfRange { qubit: 5, total: 2 }));
    }

    #[test]
    fn overlapping_targets_and_controls_rejected() {
        assert!(CircuitOp::x(1).controlled(&[Control::positive(1)]).is_err());
        assert!(CircuitOp::new(Gate::Swap, vec![2, 2], Vec::new()).is_err());
    }

    #[test]
    fn block_adjoint_restores_random_states() {
        let layout = RegisterLayout::single(4);
        let mut block = CircuitBlock::new("mixed");
        block.push(CircuitOp::h(0));
        block.push(CircuitOp::ry(1, 0.3).controlled(&[Control::positive(0)]).unwrap());
        block.push(CircuitOp::swap(2, 3));
        block.push(CircuitOp::phase(3, 1.2).controlled(&[Control::negative(1)]).unwrap());
        block.extend_from(&qft_block(&layout, RegisterId::Base, false));
        let adj = block.adjoint();

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let mut amps: Vec<Complex64> = (0..16)
                .map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            amps.iter_mut().for_each(|a| *a /= norm);
            let st0 = StateVector::from_amplitudes(layout.clone(), amps).unwrap();
            let mut st = st0.clone();
            st.apply_block(&block).unwrap();
            assert!((st.norm_sqr() - 1.0).abs() < 1e-10);
            st.apply_block(&adj).unwrap();
            for i in 0..16 {
                assert!((st.amplitude(i) - st0.amplitude(i)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn layer_count_respects_disjointness() {
        let mut block = CircuitBlock::new("layers");
        block.push(CircuitOp::x(0));
        block.push(CircuitOp::x(1));
        block.push(CircuitOp::x(0));
        assert_eq!(block.layer_count(), 2);
    }
}
