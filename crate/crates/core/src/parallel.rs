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

//! Marker register encodings, register-layout construction, marker-controlled
//! configuration semantics, and overlap-based control reduction.
//!
//! Streaming and collision are agnostic of the marker; only initial and
//! boundary conditions carry configuration-specific semantics. A feature
//! shared by every configuration is emitted uncontrolled; a feature shared
//! by a subset whose compact marker codes form an exact subcube is emitted
//! once under the subcube's fixed bits.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float; // f64 math on no_std targets

use crate::error::{Error, Result};
use crate::lattice::{
    build_collision, build_streaming, BoundaryLink, CollisionModel, LatticeSpec, QoISpec,
};
use crate::mapping::MappingKind;
use crate::sim::{CircuitBlock, CircuitOp, Control, RegisterId, RegisterLayout, StateVector};

/// Marker register data structure: binary indexing or one qubit per
/// configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerEncoding {
    Compact,
    OneHot,
}

/// Candidate lattices sharing a discretization, differing only in initial
/// occupancy and/or boundary links.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationSet {
    lattices: Vec<LatticeSpec>,
    encoding: MarkerEncoding,
}

impl ConfigurationSet {
    pub fn new(lattices: Vec<LatticeSpec>, encoding: MarkerEncoding) -> Result<Self> {
        if lattices.is_empty() {
            return Err(Error::InvalidConfigurations(String::from(
                "at least one lattice configuration is required",
            )));
        }
        for (j, lat) in lattices.iter().enumerate() {
            lat.validate()?;
            let first = &lattices[0];
            if lat.dims != first.dims
                || lat.shape != first.shape
                || lat.q != first.q
                || lat.channel_velocities != first.channel_velocities
                || lat.rest_weight != first.rest_weight
            {
                return Err(Error::InvalidConfigurations(format!(
                    "lattice {j} does not share the common discretization"
                )));
            }
        }
        Ok(ConfigurationSet { lattices, encoding })
    }

    pub fn lattices(&self) -> &[LatticeSpec] {
        &self.lattices
    }

    pub fn lattice(&self, j: usize) -> &LatticeSpec {
        &self.lattices[j]
    }

    pub fn len(&self) -> usize {
        self.lattices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn encoding(&self) -> MarkerEncoding {
        self.encoding
    }

    /// `ceil(log2 |L|)` qubits for the compact encoding, `|L|` for one-hot.
    pub fn marker_width(&self) -> usize {
        match self.encoding {
            MarkerEncoding::Compact => {
                let k = self.lattices.len();
                (usize::BITS - (k - 1).leading_zeros()) as usize
            }
            MarkerEncoding::OneHot => self.lattices.len(),
        }
    }

    /// Marker basis value assigned to lattice `j`.
    pub fn marker_value(&self, j: usize) -> u64 {
        match self.encoding {
            MarkerEncoding::Compact => j as u64,
            MarkerEncoding::OneHot => 1u64 << j,
        }
    }

    /// Full marker control pattern selecting lattice `j`, in absolute
    /// qubit indices of `layout`.
    pub fn marker_controls(&self, j: usize, layout: &RegisterLayout) -> Vec<Control> {
        let off = layout.offset(RegisterId::Marker);
        match self.encoding {
            MarkerEncoding::Compact => (0..self.marker_width())
                .map(|b| Control {
                    qubit: off + b,
                    value: (j >> b) & 1 == 1,
                })
                .collect(),
            MarkerEncoding::OneHot => vec![Control::positive(off + j)],
        }
    }
}

/// Register layout per the pipeline qubit budget: base, marker, data,
/// mapping ancilla (linear comparison only), coin, estimation, flag.
pub fn build_layout(
    configs: &ConfigurationSet,
    qoi: &QoISpec,
    e: usize,
    mapping: MappingKind,
) -> RegisterLayout {
    let lat = configs.lattice(0);
    let n_acc = qoi.n_q_acc();
    let am = match mapping {
        MappingKind::LinearComparison => n_acc,
        MappingKind::WeightedRotation => 0,
    };
    RegisterLayout::new(&[
        (RegisterId::Base, lat.base_width()),
        (RegisterId::Marker, configs.marker_width()),
        (RegisterId::Data, n_acc),
        (RegisterId::MapAncilla, am),
        (RegisterId::Coin, 1),
        (RegisterId::Estimation, e),
        (RegisterId::Flag, 1),
    ])
}

/// Exact uniform superposition over the first `k` basis states of the
/// given qubits: Hadamards when `k` is a power of two, otherwise an
/// amplitude-tree of controlled rotations splitting each prefix node's
/// mass between its children.
pub fn build_compact_uniform_prep(qs: &[usize], k: usize) -> CircuitBlock {
    let mut block = CircuitBlock::new("uniform-prep");
    if k.is_power_of_two() {
        for &q in qs {
            block.push(CircuitOp::h(q));
        }
        return block;
    }
    let w = qs.len();
    for b in (0..w).rev() {
        let span = 1usize << (b + 1);
        let prefixes = k.div_ceil(span);
        for p in 0..prefixes {
            let lo = p * span;
            let total = k.saturating_sub(lo).min(span);
            if total == 0 {
                continue;
            }
            let n1 = total.saturating_sub(span / 2);
            if n1 == 0 {
                continue;
            }
            let n0 = total - n1;
            let theta = 2.0 * (n1 as f64).sqrt().atan2((n0 as f64).sqrt());
            let controls: Vec<Control> = (b + 1..w)
                .map(|hb| Control {
                    qubit: qs[hb],
                    value: (p >> (hb - b - 1)) & 1 == 1,
                })
                .collect();
            block.push(CircuitOp::ry(qs[b], theta).controlled(&controls).unwrap());
        }
    }
    block
}

/// Uniform superposition over the assigned marker states.
///
/// Compact encoding over a power-of-two count is a Hadamard on every
/// marker qubit; other counts use an exact amplitude-tree preparation over
/// the first `|L|` basis states. One-hot uses the cascaded-rotation
/// construction of the single-excitation uniform state.
pub fn build_marker_prep(configs: &ConfigurationSet, layout: &RegisterLayout) -> CircuitBlock {
    let mut block = CircuitBlock::new("marker-prep");
    let qs = layout.qubits(RegisterId::Marker);
    let k = configs.len();
    match configs.encoding() {
        MarkerEncoding::Compact => {
            return build_compact_uniform_prep(&qs, k);
        }
        MarkerEncoding::OneHot => {
            block.push(CircuitOp::x(qs[0]));
            for j in 0..k - 1 {
                let remaining = (k - j) as f64;
                let theta = 2.0 * (1.0 / remaining).sqrt().acos();
                block.push(
                    CircuitOp::ry(qs[j + 1], theta)
                        .controlled(&[Control::positive(qs[j])])
                        .unwrap(),
                );
                block.push(
                    CircuitOp::x(qs[j])
                        .controlled(&[Control::positive(qs[j + 1])])
                        .unwrap(),
                );
            }
        }
    }
    block
}

/// Every op of `block` gains the marker controls selecting lattice `j`.
pub fn controlled_on_marker(
    block: &CircuitBlock,
    j: usize,
    configs: &ConfigurationSet,
    layout: &RegisterLayout,
) -> Result<CircuitBlock> {
    let controls = configs.marker_controls(j, layout);
    block.controlled(&controls, &format!("{}@L{}", block.label, j))
}

/// One configuration-specific semantics element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SharedElement {
    Occupancy { gridpoint: usize, channel: usize },
    Reflection(BoundaryLink),
}

/// Elements shared by an exact member set, with the reduced marker control
/// pattern when one exists (`Some(vec![])` means uncontrolled).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureGroup {
    pub elements: Vec<SharedElement>,
    pub members: Vec<usize>,
    /// Register-relative (marker bit, polarity) pattern; `None` when the
    /// member codes form no exact subcube and each member is addressed
    /// under its full marker pattern.
    pub reduced_controls: Option<Vec<(usize, bool)>>,
}

impl FeatureGroup {
    /// Controlled applications this group emits for one element.
    pub fn applications(&self) -> usize {
        match &self.reduced_controls {
            Some(_) => 1,
            None => self.members.len(),
        }
    }

    /// Controls carried by each emitted application.
    pub fn controls_per_application(&self, configs: &ConfigurationSet) -> usize {
        match &self.reduced_controls {
            Some(c) => c.len(),
            None => match configs.encoding() {
                MarkerEncoding::Compact => configs.marker_width(),
                MarkerEncoding::OneHot => 1,
            },
        }
    }
}

/// Initial-condition and boundary feature groups of a configuration set.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticsPlan {
    pub initial: Vec<FeatureGroup>,
    pub boundary: Vec<FeatureGroup>,
}

fn subcube_controls(members: &[usize], width: usize) -> Option<Vec<(usize, bool)>> {
    let first = members[0];
    let mut varying = 0usize;
    for &m in members {
        varying |= m ^ first;
    }
    if members.len() != 1usize << varying.count_ones() {
        return None;
    }
    Some(
        (0..width)
            .filter(|b| varying & (1 << b) == 0)
            .map(|b| (b, (first >> b) & 1 == 1))
            .collect(),
    )
}

fn group_elements(
    per_lattice: Vec<Vec<SharedElement>>,
    configs: &ConfigurationSet,
) -> Vec<FeatureGroup> {
    let k = configs.len();
    let mut by_element: BTreeMap<SharedElement, Vec<usize>> = BTreeMap::new();
    for (j, elems) in per_lattice.into_iter().enumerate() {
        for el in elems {
            by_element.entry(el).or_default().push(j);
        }
    }
    let mut by_members: BTreeMap<Vec<usize>, Vec<SharedElement>> = BTreeMap::new();
    for (el, members) in by_element {
        by_members.entry(members).or_default().push(el);
    }
    by_members
        .into_iter()
        .map(|(members, elements)| {
            let reduced = if members.len() == k {
                // Common to every configuration: unassigned marker states
                // carry no amplitude, so the ops apply uncontrolled.
                Some(Vec::new())
            } else {
                match configs.encoding() {
                    MarkerEncoding::Compact => subcube_controls(&members, configs.marker_width()),
                    MarkerEncoding::OneHot => {
                        if members.len() == 1 {
                            Some(vec![(members[0], true)])
                        } else {
                            None
                        }
                    }
                }
            };
            FeatureGroup {
                elements,
                members,
                reduced_controls: reduced,
            }
        })
        .collect()
}

/// Groups initial/boundary semantics elements by exact member overlap and
/// emits reduced control patterns where the compact codes form subcubes.
/// The emitted plan never uses more controlled gates than the naive
/// per-lattice plan.
pub fn plan_shared_semantics(configs: &ConfigurationSet) -> SemanticsPlan {
    let initial = group_elements(
        configs
            .lattices()
            .iter()
            .map(|lat| {
                lat.initial_occupancy
                    .iter()
                    .map(|&(g, c)| SharedElement::Occupancy {
                        gridpoint: g,
                        channel: c,
                    })
                    .collect()
            })
            .collect(),
        configs,
    );
    let boundary = group_elements(
        configs
            .lattices()
            .iter()
            .map(|lat| {
                lat.boundary_links
                    .iter()
                    .map(|&l| SharedElement::Reflection(l))
                    .collect()
            })
            .collect(),
        configs,
    );
    SemanticsPlan { initial, boundary }
}

fn element_op(el: &SharedElement, q: usize, base: usize) -> CircuitOp {
    match el {
        SharedElement::Occupancy { gridpoint, channel } => {
            CircuitOp::x(base + gridpoint * q + channel)
        }
        SharedElement::Reflection(link) => CircuitOp::swap(
            base + link.gridpoint * q + link.channel_a,
            base + link.gridpoint * q + link.channel_b,
        ),
    }
}

fn emit_groups(
    groups: &[FeatureGroup],
    configs: &ConfigurationSet,
    layout: &RegisterLayout,
    label: &str,
) -> Result<CircuitBlock> {
    let base = layout.offset(RegisterId::Base);
    let moff = layout.offset(RegisterId::Marker);
    let q = configs.lattice(0).q;
    let mut block = CircuitBlock::new(label);
    for group in groups {
        match &group.reduced_controls {
            Some(pattern) => {
                let controls: Vec<Control> = pattern
                    .iter()
                    .map(|&(bit, value)| Control {
                        qubit: moff + bit,
                        value,
                    })
                    .collect();
                for el in &group.elements {
                    block.push(element_op(el, q, base).controlled(&controls)?);
                }
            }
            None => {
                for &j in &group.members {
                    let controls = configs.marker_controls(j, layout);
                    for el in &group.elements {
                        block.push(element_op(el, q, base).controlled(&controls)?);
                    }
                }
            }
        }
    }
    Ok(block)
}

/// Marker-controlled initial conditions, imposed once before step 1, with
/// overlap reductions applied.
pub fn build_parallel_initial(
    configs: &ConfigurationSet,
    layout: &RegisterLayout,
) -> Result<CircuitBlock> {
    let plan = plan_shared_semantics(configs);
    emit_groups(&plan.initial, configs, layout, "parallel-initial")
}

/// One parallel time step: uncontrolled collision and streaming on the
/// base register, then marker-controlled boundary semantics.
pub fn build_parallel_step(
    configs: &ConfigurationSet,
    model: &CollisionModel,
    layout: &RegisterLayout,
) -> Result<CircuitBlock> {
    let lat = configs.lattice(0);
    let mut block = CircuitBlock::new("parallel-step");
    block.extend_from(&build_collision(lat, model, layout)?);
    block.extend_from(&build_streaming(lat, layout));
    let plan = plan_shared_semantics(configs);
    block.extend_from(&emit_groups(&plan.boundary, configs, layout, "parallel-bc")?);
    Ok(block)
}

/// Applies `n_t` parallel steps to a state prepared with marker prep and
/// controlled initial conditions. Per marker value the conditional state
/// evolves exactly like the corresponding single lattice.
pub fn run_parallel_evolution(
    configs: &ConfigurationSet,
    model: &CollisionModel,
    n_t: usize,
    state: &mut StateVector,
) -> Result<()> {
    let step = build_parallel_step(configs, model, state.layout())?;
    for _ in 0..n_t {
        state.apply_block(&step)?;
    }
    Ok(())
}

/// Fresh state with marker preparation and controlled initial conditions
/// applied, ready for [`run_parallel_evolution`].
pub fn prepare_parallel_state(
    configs: &ConfigurationSet,
    layout: &RegisterLayout,
    cap: usize,
) -> Result<StateVector> {
    let mut state = StateVector::with_cap(layout.clone(), cap)?;
    state.apply_block(&build_marker_prep(configs, layout))?;
    state.apply_block(&build_parallel_initial(configs, layout)?)?;
    Ok(state)
}

/// Layout for single-lattice experiments: base register only.
pub fn single_lattice_layout(spec: &LatticeSpec) -> RegisterLayout {
    RegisterLayout::new(&[(RegisterId::Base, spec.base_width())])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_initial_conditions;
    use crate::sim::Gate;
    use alloc::collections::BTreeSet;

    fn d1q2(n_g: usize) -> LatticeSpec {
        LatticeSpec::new(1, vec![n_g], vec![[-1, 0], [1, 0]]).unwrap()
    }

    fn two_lattices() -> ConfigurationSet {
        let mut a = d1q2(4);
        a.initial_occupancy.insert((0, 1));
        let mut b = d1q2(4);
        b.initial_occupancy.insert((0, 1));
        b.initial_occupancy.insert((2, 0));
        ConfigurationSet::new(vec![a, b], MarkerEncoding::Compact).unwrap()
    }

    #[test]
    fn marker_widths() {
        let lat = d1q2(2);
        let three = ConfigurationSet::new(vec![lat.clone(); 3], MarkerEncoding::Compact).unwrap();
        assert_eq!(three.marker_width(), 2);
        let three_oh = ConfigurationSet::new(vec![lat.clone(); 3], MarkerEncoding::OneHot).unwrap();
        assert_eq!(three_oh.marker_width(), 3);
        let one = ConfigurationSet::new(vec![lat], MarkerEncoding::Compact).unwrap();
        assert_eq!(one.marker_width(), 0);
    }

    #[test]
    fn mismatched_discretizations_rejected() {
        let a = d1q2(4);
        let b = d1q2(8);
        assert!(matches!(
            ConfigurationSet::new(vec![a, b], MarkerEncoding::Compact),
            Err(Error::InvalidConfigurations(_))
        ));
    }

    #[test]
    fn layout_widths() {
        let configs = two_lattices();
        // F_max = 1 * 2 * 2 = 4 (power of two): data register width 3.
        let qoi = QoISpec::with_lattice_weights(
            configs.lattice(0),
            BTreeSet::from([0, 1]),
            BTreeSet::from([0, 1]),
            BTreeSet::from([1]),
        )
        .unwrap();
        let layout = build_layout(&configs, &qoi, 4, MappingKind::LinearComparison);
        assert_eq!(layout.width(RegisterId::Base), 8);
        assert_eq!(layout.width(RegisterId::Marker), 1);
        assert_eq!(layout.width(RegisterId::Data), 3);
        assert_eq!(layout.width(RegisterId::MapAncilla), 3);
        assert_eq!(layout.width(RegisterId::Coin), 1);
        assert_eq!(layout.width(RegisterId::Estimation), 4);
        assert_eq!(layout.width(RegisterId::Flag), 1);
        assert_eq!(layout.total_qubits(), 8 + 1 + 3 + 3 + 1 + 4 + 1);

        let rot = build_layout(&configs, &qoi, 4, MappingKind::WeightedRotation);
        assert_eq!(rot.width(RegisterId::MapAncilla), 0);
    }

    #[test]
    fn marker_prep_marginals() {
        let lat = d1q2(1);
        for (k, encoding, expect) in [
            (4usize, MarkerEncoding::Compact, vec![0.25; 4]),
            (
                3,
                MarkerEncoding::Compact,
                vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.0],
            ),
        ] {
            let configs = ConfigurationSet::new(vec![lat.clone(); k], encoding).unwrap();
            let layout = RegisterLayout::new(&[(RegisterId::Marker, configs.marker_width())]);
            let mut st = StateVector::new(layout.clone()).unwrap();
            st.apply_block(&build_marker_prep(&configs, &layout)).unwrap();
            let marginal = st.marginal(RegisterId::Marker);
            for (v, &p) in expect.iter().enumerate() {
                assert!((marginal[v] - p).abs() < 1e-10, "k={k} v={v}");
            }
        }

        // One-hot over two lattices: marginal 0.5 on each unit bitstring.
        let configs = ConfigurationSet::new(vec![lat.clone(); 2], MarkerEncoding::OneHot).unwrap();
        let layout = RegisterLayout::new(&[(RegisterId::Marker, 2)]);
        let mut st = StateVector::new(layout.clone()).unwrap();
        st.apply_block(&build_marker_prep(&configs, &layout)).unwrap();
        let marginal = st.marginal(RegisterId::Marker);
        assert!((marginal[0b01] - 0.5).abs() < 1e-10);
        assert!((marginal[0b10] - 0.5).abs() < 1e-10);
        assert!(marginal[0].abs() < 1e-12 && marginal[3].abs() < 1e-12);

        // One-hot uniformity for several sizes.
        for k in [3usize, 5] {
            let configs =
                ConfigurationSet::new(vec![lat.clone(); k], MarkerEncoding::OneHot).unwrap();
            let layout = RegisterLayout::new(&[(RegisterId::Marker, k)]);
            let mut st = StateVector::new(layout.clone()).unwrap();
            st.apply_block(&build_marker_prep(&configs, &layout)).unwrap();
            let marginal = st.marginal(RegisterId::Marker);
            for j in 0..k {
                assert!((marginal[1 << j] - 1.0 / k as f64).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn controlled_on_marker_patterns() {
        let lat = d1q2(2);
        let configs = ConfigurationSet::new(vec![lat.clone(); 4], MarkerEncoding::Compact).unwrap();
        let layout = RegisterLayout::new(&[
            (RegisterId::Base, 4),
            (RegisterId::Marker, 2),
        ]);
        let mut block = CircuitBlock::new("x0");
        block.push(CircuitOp::x(0));
        let wrapped = controlled_on_marker(&block, 2, &configs, &layout).unwrap();
        let controls = wrapped.ops()[0].controls();
        let moff = layout.offset(RegisterId::Marker);
        assert_eq!(controls.len(), 2);
        assert!(controls.contains(&Control {
            qubit: moff,
            value: false
        }));
        assert!(controls.contains(&Control {
            qubit: moff + 1,
            value: true
        }));

        let oh = ConfigurationSet::new(vec![lat; 4], MarkerEncoding::OneHot).unwrap();
        let layout_oh = RegisterLayout::new(&[
            (RegisterId::Base, 4),
            (RegisterId::Marker, 4),
        ]);
        let wrapped_oh = controlled_on_marker(&block, 2, &oh, &layout_oh).unwrap();
        assert_eq!(
            wrapped_oh.ops()[0].controls(),
            &[Control::positive(layout_oh.offset(RegisterId::Marker) + 2)]
        );
    }

    #[test]
    fn controlled_block_leaves_other_markers_alone() {
        let lat = d1q2(2);
        let configs = ConfigurationSet::new(vec![lat; 2], MarkerEncoding::Compact).unwrap();
        let layout = RegisterLayout::new(&[
            (RegisterId::Base, 4),
            (RegisterId::Marker, 1),
        ]);
        let mut block = CircuitBlock::new("x0");
        block.push(CircuitOp::x(0));
        let for_l1 = controlled_on_marker(&block, 1, &configs, &layout).unwrap();
        // Marker held at 0: the base register stays vacuum.
        let mut st = StateVector::new(layout).unwrap();
        st.apply_block(&for_l1).unwrap();
        assert!((st.amplitude(0).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subcube_detection() {
        // Members {0, 1} of four lattices agree on bit 1 = 0.
        assert_eq!(subcube_controls(&[0, 1], 2), Some(vec![(1, false)]));
        // Members {0, 3} (codes 00, 11) form no subcube.
        assert_eq!(subcube_controls(&[0, 3], 2), None);
        // A single member pins every bit.
        assert_eq!(subcube_controls(&[2], 2), Some(vec![(0, false), (1, true)]));
    }

    #[test]
    fn shared_plan_reduces_controls() {
        // Four lattices; occupancy (0, 1) shared by lattices 0 and 1 only.
        let mut lats = vec![d1q2(4); 4];
        lats[0].initial_occupancy.insert((0, 1));
        lats[1].initial_occupancy.insert((0, 1));
        lats[2].initial_occupancy.insert((1, 1));
        lats[3].initial_occupancy.insert((2, 1));
        let configs = ConfigurationSet::new(lats, MarkerEncoding::Compact).unwrap();
        let plan = plan_shared_semantics(&configs);
        let shared = plan
            .initial
            .iter()
            .find(|g| g.members == vec![0, 1])
            .expect("group for members {0, 1}");
        assert_eq!(shared.reduced_controls, Some(vec![(1, false)]));

        // Total controlled-gate count never exceeds the naive plan.
        let naive: usize = configs
            .lattices()
            .iter()
            .map(|l| l.initial_occupancy.len() * configs.marker_width())
            .sum();
        let planned: usize = plan
            .initial
            .iter()
            .map(|g| g.elements.len() * g.applications() * g.controls_per_application(&configs))
            .sum();
        assert!(planned <= naive, "planned {planned} naive {naive}");
    }

    #[test]
    fn non_subcube_members_fall_back_to_full_controls() {
        let mut lats = vec![d1q2(4); 4];
        lats[0].initial_occupancy.insert((0, 1));
        lats[3].initial_occupancy.insert((0, 1));
        let configs = ConfigurationSet::new(lats, MarkerEncoding::Compact).unwrap();
        let plan = plan_shared_semantics(&configs);
        let group = plan
            .initial
            .iter()
            .find(|g| g.members == vec![0, 3])
            .unwrap();
        assert_eq!(group.reduced_controls, None);
        assert_eq!(group.applications(), 2);
        assert_eq!(group.controls_per_application(&configs), 2);
    }

    #[test]
    fn fully_shared_boundary_uncontrolled() {
        let mut a = d1q2(4);
        a.boundary_links.insert(BoundaryLink::new(3, 0, 1));
        let b = a.clone();
        let configs = ConfigurationSet::new(vec![a, b], MarkerEncoding::Compact).unwrap();
        let layout = RegisterLayout::new(&[
            (RegisterId::Base, 8),
            (RegisterId::Marker, 1),
        ]);
        let step = build_parallel_step(&configs, &CollisionModel::Identity, &layout).unwrap();
        // 6 streaming swaps, then the single shared boundary swap.
        assert_eq!(step.len(), 7);
        assert!(step.ops()[6].controls().is_empty());
    }

    #[test]
    fn disjoint_boundaries_one_hot_single_control() {
        let mut a = d1q2(4);
        a.boundary_links.insert(BoundaryLink::new(3, 0, 1));
        let mut b = d1q2(4);
        b.boundary_links.insert(BoundaryLink::new(1, 0, 1));
        let configs = ConfigurationSet::new(vec![a, b], MarkerEncoding::OneHot).unwrap();
        let layout = RegisterLayout::new(&[
            (RegisterId::Base, 8),
            (RegisterId::Marker, 2),
        ]);
        let step = build_parallel_step(&configs, &CollisionModel::Identity, &layout).unwrap();
        let controlled: Vec<_> = step
            .ops()
            .iter()
            .filter(|op| matches!(op.gate(), Gate::Swap) && !op.controls().is_empty())
            .collect();
        assert_eq!(controlled.len(), 2);
        for op in controlled {
            assert_eq!(op.controls().len(), 1);
        }
    }

    #[test]
    fn single_lattice_step_has_no_marker_controls() {
        let mut a = d1q2(4);
        a.boundary_links.insert(BoundaryLink::new(3, 0, 1));
        a.initial_occupancy.insert((0, 1));
        for encoding in [MarkerEncoding::Compact, MarkerEncoding::OneHot] {
            let configs = ConfigurationSet::new(vec![a.clone()], encoding).unwrap();
            let layout = RegisterLayout::new(&[
                (RegisterId::Base, 8),
                (RegisterId::Marker, configs.marker_width()),
            ]);
            let step = build_parallel_step(&configs, &CollisionModel::Identity, &layout).unwrap();
            assert!(step.ops().iter().all(|op| op.controls().is_empty()));
            let init = build_parallel_initial(&configs, &layout).unwrap();
            assert!(init.ops().iter().all(|op| op.controls().is_empty()));
        }
    }

    #[test]
    fn parallel_evolution_matches_single_lattice_runs() {
        let configs = two_lattices();
        let layout = RegisterLayout::new(&[
            (RegisterId::Base, 8),
            (RegisterId::Marker, 1),
        ]);
        let mut state = prepare_parallel_state(&configs, &layout, 26).unwrap();
        run_parallel_evolution(&configs, &CollisionModel::Identity, 2, &mut state).unwrap();

        let marker_marginal = state.marginal(RegisterId::Marker);
        assert!((marker_marginal[0] - 0.5).abs() < 1e-10);
        assert!((marker_marginal[1] - 0.5).abs() < 1e-10);

        for j in 0..2usize {
            let cond = state.conditional(RegisterId::Marker, j as u64).unwrap();
            let lat = configs.lattice(j);
            let single_layout = single_lattice_layout(lat);
            let mut single = StateVector::new(single_layout.clone()).unwrap();
            single
                .apply_block(&build_initial_conditions(lat, &single_layout))
                .unwrap();
            let single_set =
                ConfigurationSet::new(vec![lat.clone()], MarkerEncoding::Compact).unwrap();
            let step =
                build_parallel_step(&single_set, &CollisionModel::Identity, &single_layout)
                    .unwrap();
            single.apply_block(&step).unwrap();
            single.apply_block(&step).unwrap();
            let mut overlap = num_complex::Complex64::new(0.0, 0.0);
            for (basis, amp) in cond.amplitudes().iter().enumerate() {
                if amp.norm_sqr() > 0.0 {
                    let b = layout.value_of(basis, RegisterId::Base) as usize;
                    assert_eq!(layout.value_of(basis, RegisterId::Marker), j as u64);
                    overlap += single.amplitude(b).conj() * amp;
                }
            }
            assert!(
                (overlap.norm() - 1.0).abs() < 1e-10,
                "fidelity loss for marker {j}"
            );
        }
    }

    #[test]
    fn zero_steps_leaves_state_unchanged() {
        let configs = two_lattices();
        let layout = RegisterLayout::new(&[
            (RegisterId::Base, 8),
            (RegisterId::Marker, 1),
        ]);
        let state = prepare_parallel_state(&configs, &layout, 26).unwrap();
        let mut evolved = state.clone();
        run_parallel_evolution(&configs, &CollisionModel::Identity, 0, &mut evolved).unwrap();
        for i in 0..state.dim() {
            assert_eq!(state.amplitude(i), evolved.amplitude(i));
        }
    }

    #[test]
    fn unassigned_marker_states_stay_vacuum() {
        let lat = d1q2(2);
        let mut lats = vec![lat.clone(); 3];
        for (j, l) in lats.iter_mut().enumerate() {
            l.initial_occupancy.insert((j % 2, 1));
        }
        let configs = ConfigurationSet::new(lats, MarkerEncoding::Compact).unwrap();
        let layout = RegisterLayout::new(&[
            (RegisterId::Base, 4),
            (RegisterId::Marker, 2),
        ]);
        let mut state = prepare_parallel_state(&configs, &layout, 26).unwrap();
        run_parallel_evolution(&configs, &CollisionModel::Identity, 3, &mut state).unwrap();
        // The unassigned marker value 3 carries no amplitude at all, in
        // particular none outside the vacuum base state.
        for (basis, amp) in state.amplitudes().iter().enumerate() {
            if layout.value_of(basis, RegisterId::Marker) == 3 {
                assert!(amp.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn one_hot_and_compact_agree_per_marker() {
        let mut a = d1q2(4);
        a.initial_occupancy.insert((0, 1));
        let mut b = d1q2(4);
        b.initial_occupancy.insert((1, 0));
        b.boundary_links.insert(BoundaryLink::new(3, 0, 1));

        let mut per_encoding: alloc::vec::Vec<alloc::vec::Vec<StateVector>> = alloc::vec::Vec::new();
        for encoding in [MarkerEncoding::Compact, MarkerEncoding::OneHot] {
            let configs = ConfigurationSet::new(vec![a.clone(), b.clone()], encoding).unwrap();
            let layout = RegisterLayout::new(&[
                (RegisterId::Base, 8),
                (RegisterId::Marker, configs.marker_width()),
            ]);
            let mut state = prepare_parallel_state(&configs, &layout, 26).unwrap();
            run_parallel_evolution(&configs, &CollisionModel::Identity, 2, &mut state).unwrap();
            per_encoding.push(
                (0..2)
                    .map(|j| {
                        state
                            .conditional(RegisterId::Marker, configs.marker_value(j))
                            .unwrap()
                    })
                    .collect(),
            );
        }
        for j in 0..2 {
            let pc = per_encoding[0][j].marginal(RegisterId::Base);
            let po = per_encoding[1][j].marginal(RegisterId::Base);
            for (x, (&c, &o)) in pc.iter().zip(po.iter()).enumerate() {
                assert!((c - o).abs() < 1e-10, "marker {j} base value {x}");
            }
        }
    }
}
