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

//! Lattice specifications, the linear qubit encoding, and circuit builders
//! for initial conditions, streaming, collision, and boundary conditions of
//! a single lattice.
//!
//! One time step composes as collision, then streaming, then boundary.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float; // f64 math on no_std targets

use crate::error::{Error, Result};
use crate::sim::{CircuitBlock, CircuitOp, RegisterId, RegisterLayout, UnitaryMatrix};

/// A reflection pair: the occupancies of `channel_a` and `channel_b` at
/// `gridpoint` are exchanged by the boundary step. Stored with
/// `channel_a < channel_b` so the pairing is an involution by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundaryLink {
    pub gridpoint: usize,
    pub channel_a: usize,
    pub channel_b: usize,
}

impl BoundaryLink {
    pub fn new(gridpoint: usize, a: usize, b: usize) -> Self {
        BoundaryLink {
            gridpoint,
            channel_a: a.min(b),
            channel_b: a.max(b),
        }
    }
}

/// Grid, velocity channels, and initial/boundary semantics of one lattice
/// in the commonplace DdQq discretization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    /// Spatial dimension, 1 or 2.
    pub dims: usize,
    /// Gridpoints per dimension; the product is `N_g`.
    pub shape: Vec<usize>,
    /// Velocity channels per gridpoint, rest channel included.
    pub q: usize,
    /// Per-channel integer displacement per time step; the rest channel
    /// carries the zero vector. Second component unused for 1D.
    pub channel_velocities: Vec<[i64; 2]>,
    /// Mass of the rest channel in lattice units.
    pub rest_weight: u64,
    /// Occupied (gridpoint, channel) pairs imposed before step 1.
    pub initial_occupancy: BTreeSet<(usize, usize)>,
    /// Reflection pairs applied after streaming.
    pub boundary_links: BTreeSet<BoundaryLink>,
    /// Domain closure is always the cyclic wrap; wall links seal edges
    /// locally. Kept as metadata for configuration round-trips.
    pub periodic: bool,
}

impl LatticeSpec {
    pub fn new(
        dims: usize,
        shape: Vec<usize>,
        channel_velocities: Vec<[i64; 2]>,
    ) -> Result<Self> {
        let spec = LatticeSpec {
            dims,
            shape,
            q: channel_velocities.len(),
            channel_velocities,
            rest_weight: 2,
            initial_occupancy: BTreeSet::new(),
            boundary_links: BTreeSet::new(),
            periodic: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims == 0 || self.dims > 2 {
            return Err(Error::InvalidLattice(format!(
                "dims must be 1 or 2, got {}",
                self.dims
            )));
        }
        if self.shape.len() != self.dims || self.shape.iter().any(|&n| n == 0) {
            return Err(Error::InvalidLattice(String::from(
                "shape must list one positive extent per dimension",
            )));
        }
        if self.q == 0 || self.channel_velocities.len() != self.q {
            return Err(Error::InvalidLattice(String::from(
                "one velocity vector per channel is required",
            )));
        }
        for (c, v) in self.channel_velocities.iter().enumerate() {
            if v[0].abs() > 1 || v[1].abs() > 1 {
                return Err(Error::InvalidLattice(format!(
                    "channel {c} moves more than one gridpoint per step"
                )));
            }
            if self.dims == 1 && v[1] != 0 {
                return Err(Error::InvalidLattice(format!(
                    "channel {c} has a second velocity component on a 1D lattice"
                )));
            }
        }
        for &(g, c) in &self.initial_occupancy {
            if g >= self.n_gridpoints() || c >= self.q {
                return Err(Error::InvalidLattice(format!(
                    "initial occupancy ({g}, {c}) out of range"
                )));
            }
        }
        let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
        for link in &self.boundary_links {
            if link.gridpoint >= self.n_gridpoints()
                || link.channel_a >= self.q
                || link.channel_b >= self.q
            {
                return Err(Error::InvalidLattice(format!(
                    "boundary link at gridpoint {} out of range",
                    link.gridpoint
                )));
            }
            if link.channel_a == link.channel_b {
                return Err(Error::InvalidLattice(format!(
                    "boundary link at gridpoint {} pairs a channel with itself",
                    link.gridpoint
                )));
            }
            for c in [link.channel_a, link.channel_b] {
                if self.channel_velocities[c] == [0, 0] {
                    return Err(Error::InvalidLattice(format!(
                        "boundary link at gridpoint {} reflects the rest channel",
                        link.gridpoint
                    )));
                }
                if !used.insert((link.gridpoint, c)) {
                    return Err(Error::InvalidLattice(format!(
                        "channel {c} at gridpoint {} appears in two boundary links",
                        link.gridpoint
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_gridpoints(&self) -> usize {
        self.shape.iter().product()
    }

    /// Count of distinct boundary gridpoints, `N_bc`.
    pub fn n_boundary_gridpoints(&self) -> usize {
        self.boundary_links
            .iter()
            .map(|l| l.gridpoint)
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Row-major linearization; the last coordinate varies fastest.
    pub fn grid_index(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dims {
            return Err(Error::InvalidLattice(format!(
                "expected {} coordinates, got {}",
                self.dims,
                coords.len()
            )));
        }
        let mut g = 0usize;
        for (d, &c) in coords.iter().enumerate() {
            if c >= self.shape[d] {
                return Err(Error::InvalidLattice(format!(
                    "coordinate {c} out of range for dimension {d}"
                )));
            }
            g = g * self.shape[d] + c;
        }
        Ok(g)
    }

    pub fn grid_coords(&self, mut g: usize) -> Vec<usize> {
        let mut coords = vec![0usize; self.dims];
        for d in (0..self.dims).rev() {
            coords[d] = g % self.shape[d];
            g /= self.shape[d];
        }
        coords
    }

    /// Bijective linear encoding: qubit `g * q + c` holds the occupancy of
    /// channel `c` at gridpoint `g`.
    pub fn qubit_index(&self, gridpoint: usize, channel: usize) -> Result<usize> {
        if gridpoint >= self.n_gridpoints() || channel >= self.q {
            return Err(Error::QubitOutOfRange {
                qubit: gridpoint * self.q + channel,
                total: self.n_gridpoints() * self.q,
            });
        }
        Ok(gridpoint * self.q + channel)
    }

    /// Mass carried by one particle in a channel: `rest_weight` for the
    /// rest channel, 1 otherwise.
    pub fn channel_weight(&self, channel: usize) -> u64 {
        if self.channel_velocities[channel] == [0, 0] {
            self.rest_weight
        } else {
            1
        }
    }

    /// Base-register width `q * N_g`.
    pub fn base_width(&self) -> usize {
        self.q * self.n_gridpoints()
    }
}

/// Per-gridpoint collision unitary acting on the `q` channel qubits.
#[derive(Debug, Clone, PartialEq)]
pub enum CollisionModel {
    Identity,
    /// Exchanges the two head-on occupancy pairs of a four-channel
    /// discretization (the classic square-lattice gas rule).
    HppPermutation,
    /// Real rotation by `theta_c` on the span of the two head-on
    /// occupancies, identity elsewhere; `theta_c = pi/2` recovers the
    /// permutation up to sign.
    ParametrizedRotation(f64),
    CustomUnitary(UnitaryMatrix),
}

impl CollisionModel {
    /// The two single-pair occupancy patterns of a two-opposite-pair
    /// channel set, as basis indices over the q channel qubits.
    fn head_on_states(spec: &LatticeSpec) -> Result<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for a in 0..spec.q {
            for b in a + 1..spec.q {
                let va = spec.channel_velocities[a];
                let vb = spec.channel_velocities[b];
                if va != [0, 0] && va[0] == -vb[0] && va[1] == -vb[1] {
                    pairs.push((a, b));
                }
            }
        }
        if pairs.len() != 2 {
            return Err(Error::InvalidCollision(format!(
                "head-on exchange needs exactly two opposite channel pairs, found {}",
                pairs.len()
            )));
        }
        let m1 = (1usize << pairs[0].0) | (1usize << pairs[0].1);
        let m2 = (1usize << pairs[1].0) | (1usize << pairs[1].1);
        Ok((m1, m2))
    }

    /// Dense q-qubit matrix, or `None` for the identity model.
    pub fn matrix(&self, spec: &LatticeSpec) -> Result<Option<UnitaryMatrix>> {
        let dim = 1usize << spec.q;
        match self {
            CollisionModel::Identity => Ok(None),
            CollisionModel::HppPermutation => {
                let (m1, m2) = Self::head_on_states(spec)?;
                let mut u = UnitaryMatrix::identity(dim);
                u.set(m1, m1, Complex64::new(0.0, 0.0));
                u.set(m2, m2, Complex64::new(0.0, 0.0));
                u.set(m2, m1, Complex64::new(1.0, 0.0));
                u.set(m1, m2, Complex64::new(1.0, 0.0));
                Ok(Some(u))
            }
            CollisionModel::ParametrizedRotation(theta) => {
                let (m1, m2) = Self::head_on_states(spec)?;
                let mut u = UnitaryMatrix::identity(dim);
                let (s, c) = theta.sin_cos();
                u.set(m1, m1, Complex64::new(c, 0.0));
                u.set(m2, m1, Complex64::new(s, 0.0));
                u.set(m1, m2, Complex64::new(-s, 0.0));
                u.set(m2, m2, Complex64::new(c, 0.0));
                Ok(Some(u))
            }
            CollisionModel::CustomUnitary(m) => {
                if m.dim() != dim {
                    return Err(Error::InvalidCollision(format!(
                        "matrix dimension {} does not match 2^q = {dim}",
                        m.dim()
                    )));
                }
                Ok(Some(m.clone()))
            }
        }
    }
}

/// Mass and momentum class of an occupancy pattern at one gridpoint.
fn occupancy_class(spec: &LatticeSpec, occ: usize) -> (u64, i64, i64) {
    let mut mass = 0u64;
    let mut px = 0i64;
    let mut py = 0i64;
    for c in 0..spec.q {
        if occ & (1 << c) != 0 {
            mass += spec.channel_weight(c);
            px += spec.channel_velocities[c][0];
            py += spec.channel_velocities[c][1];
        }
    }
    (mass, px, py)
}

/// Outcome of checking that a collision model is block-diagonal over
/// (mass, momentum) classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConservationReport {
    pub passed: bool,
    /// `(input, output)` occupancy pairs coupled across classes.
    pub violations: Vec<(usize, usize)>,
}

/// Checks every matrix element that couples occupancies of different
/// (mass, momentum) classes; conserving models have none above 1e-10.
pub fn verify_conservation(
    model: &CollisionModel,
    spec: &LatticeSpec,
) -> Result<ConservationReport> {
    let matrix = model.matrix(spec)?;
    let Some(u) = matrix else {
        return Ok(ConservationReport {
            passed: true,
            violations: Vec::new(),
        });
    };
    let dim = u.dim();
    let mut violations = Vec::new();
    for x in 0..dim {
        let cx = occupancy_class(spec, x);
        for y in 0..dim {
            if occupancy_class(spec, y) != cx && u.get(y, x).norm() > 1e-10 {
                violations.push((x, y));
            }
        }
    }
    Ok(ConservationReport {
        passed: violations.is_empty(),
        violations,
    })
}

/// One `X` per occupied (gridpoint, channel); depth 1.
pub fn build_initial_conditions(spec: &LatticeSpec, layout: &RegisterLayout) -> CircuitBlock {
    let base = layout.offset(RegisterId::Base);
    let mut block = CircuitBlock::new("initial-conditions");
    for &(g, c) in &spec.initial_occupancy {
        block.push(CircuitOp::x(base + g * spec.q + c));
    }
    block
}

/// Swaps realizing a cyclic shift by one position over an ordered qubit
/// line: a full reversal followed by a partial one, `n - 1` swaps in two
/// parallel layers.
fn push_line_shift(block: &mut CircuitBlock, line: &[usize], forward: bool) {
    let n = line.len();
    if n < 2 {
        return;
    }
    let reverse = |a: usize, b: usize, block: &mut CircuitBlock| {
        let mut i = a;
        let mut j = b - 1;
        while i < j {
            block.push(CircuitOp::swap(line[i], line[j]));
            i += 1;
            j -= 1;
        }
    };
    reverse(0, n, block);
    if forward {
        reverse(1, n, block);
    } else {
        reverse(0, n - 1, block);
    }
}

/// Cyclic shift of every non-rest channel along its velocity, realized as
/// per-line swap networks. A 1D shift uses exactly `N_g - 1` swaps per
/// channel in at most `ceil(log2 N_g)` parallel layers.
pub fn build_streaming(spec: &LatticeSpec, layout: &RegisterLayout) -> CircuitBlock {
    let base = layout.offset(RegisterId::Base);
    let mut block = CircuitBlock::new("streaming");
    for c in 0..spec.q {
        let v = spec.channel_velocities[c];
        if v == [0, 0] {
            continue;
        }
        for (dim, &step) in v.iter().enumerate().take(spec.dims) {
            if step == 0 {
                continue;
            }
            // Enumerate 1D lines along `dim`; positions ordered by the
            // moving coordinate.
            let extent = spec.shape[dim];
            let lines = spec.n_gridpoints() / extent;
            for line_idx in 0..lines {
                let mut qubits = Vec::with_capacity(extent);
                for pos in 0..extent {
                    let coords = if spec.dims == 1 {
                        vec![pos]
                    } else if dim == 0 {
                        vec![pos, line_idx]
                    } else {
                        vec![line_idx, pos]
                    };
                    let g = spec.grid_index(&coords).expect("in-range line coordinate");
                    qubits.push(base + g * spec.q + c);
                }
                push_line_shift(&mut block, &qubits, step > 0);
            }
        }
    }
    block
}

/// The collision unitary applied to every gridpoint's channel qubits.
pub fn build_collision(
    spec: &LatticeSpec,
    model: &CollisionModel,
    layout: &RegisterLayout,
) -> Result<CircuitBlock> {
    let base = layout.offset(RegisterId::Base);
    let mut block = CircuitBlock::new("collision");
    let Some(u) = model.matrix(spec)? else {
        return Ok(block);
    };
    for g in 0..spec.n_gridpoints() {
        let targets: Vec<usize> = (0..spec.q).map(|c| base + g * spec.q + c).collect();
        block.push(CircuitOp::unitary(u.clone(), targets)?);
    }
    Ok(block)
}

/// One swap per reflection pair; all swaps disjoint, depth 1.
pub fn build_boundary(spec: &LatticeSpec, layout: &RegisterLayout) -> Result<CircuitBlock> {
    let base = layout.offset(RegisterId::Base);
    let mut used: BTreeMap<(usize, usize), ()> = BTreeMap::new();
    let mut block = CircuitBlock::new("boundary");
    for link in &spec.boundary_links {
        for c in [link.channel_a, link.channel_b] {
            if used.insert((link.gridpoint, c), ()).is_some() {
                return Err(Error::InvalidLattice(format!(
                    "overlapping reflection pairs at gridpoint {}",
                    link.gridpoint
                )));
            }
        }
        block.push(CircuitOp::swap(
            base + link.gridpoint * spec.q + link.channel_a,
            base + link.gridpoint * spec.q + link.channel_b,
        ));
    }
    Ok(block)
}

/// Region, contributing channels, channel weights, and accumulation steps
/// defining the quantity of interest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QoISpec {
    /// Gridpoints of the region of interest.
    pub region: BTreeSet<usize>,
    /// Channels contributing to the quantity.
    pub channels: BTreeSet<usize>,
    /// Per-channel mass, aligned with `channels`; values in {1, 2}.
    pub weights: BTreeMap<usize, u64>,
    /// Time-step indices (1-based) at which accumulation fires.
    pub acc_steps: BTreeSet<usize>,
}

impl QoISpec {
    pub fn new(
        spec: &LatticeSpec,
        region: BTreeSet<usize>,
        channels: BTreeSet<usize>,
        weights: BTreeMap<usize, u64>,
        acc_steps: BTreeSet<usize>,
    ) -> Result<Self> {
        if region.is_empty() {
            return Err(Error::InvalidQoi(String::from("region is empty")));
        }
        if channels.is_empty() {
            return Err(Error::InvalidQoi(String::from("channel set is empty")));
        }
        for &g in &region {
            if g >= spec.n_gridpoints() {
                return Err(Error::InvalidQoi(format!(
                    "region gridpoint {g} outside grid"
                )));
            }
        }
        for &c in &channels {
            if c >= spec.q {
                return Err(Error::InvalidQoi(format!("unknown channel index {c}")));
            }
            let w = weights.get(&c).copied().unwrap_or(0);
            if !(1..=2).contains(&w) {
                return Err(Error::InvalidQoi(format!(
                    "channel {c} weight must be 1 or 2, got {w}"
                )));
            }
        }
        Ok(QoISpec {
            region,
            channels,
            weights,
            acc_steps,
        })
    }

    /// Convenience: weights default to the lattice channel masses.
    pub fn with_lattice_weights(
        spec: &LatticeSpec,
        region: BTreeSet<usize>,
        channels: BTreeSet<usize>,
        acc_steps: BTreeSet<usize>,
    ) -> Result<Self> {
        let weights = channels
            .iter()
            .filter(|&&c| c < spec.q)
            .map(|&c| (c, spec.channel_weight(c).min(2)))
            .collect();
        QoISpec::new(spec, region, channels, weights, acc_steps)
    }

    /// Largest attainable accumulated value:
    /// `|acc_steps| * |region| * sum of channel weights`.
    pub fn f_max(&self) -> u64 {
        let per_point: u64 = self.channels.iter().map(|c| self.weights[c]).sum();
        self.acc_steps.len() as u64 * self.region.len() as u64 * per_point
    }

    /// Accumulation register width. One qubit more than `ceil(log2 F_max)`
    /// when `F_max` is a power of two, so the value `F_max` itself is
    /// representable without modular wrap.
    pub fn n_q_acc(&self) -> usize {
        let f = self.f_max();
        (64 - f.leading_zeros()) as usize
    }
}
