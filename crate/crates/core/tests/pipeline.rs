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

//! End-to-end pipeline behavior at small scale: exact expectations,
//! estimation distributions over the real lattice evolution, and the
//! marker-diagonality of the estimation iterator.

use std::collections::BTreeSet;

use num_complex::Complex64;
use qlga_core::lattice::{CollisionModel, LatticeSpec, QoISpec};
use qlga_core::mapping::MappingSpec;
use qlga_core::oracle::{compute_gap, exact_expectation};
use qlga_core::parallel::{ConfigurationSet, MarkerEncoding};
use qlga_core::search::{
    build_grover_iterator, qae_error_bound, qae_estimate_from_outcome, MinFindParams, Pipeline,
    PipelineSpec,
};
use qlga_core::sim::{RegisterId, StateVector};

fn d1q2(n_g: usize) -> LatticeSpec {
    LatticeSpec::new(1, vec![n_g], vec![[-1, 0], [1, 0]]).unwrap()
}

/// Two-configuration instance with deterministic objective values 1/4 and
/// 1/2 under the linear mapping.
fn smoke_spec(e: usize) -> PipelineSpec {
    let mut a = d1q2(4);
    a.initial_occupancy.insert((0, 1));
    let mut b = d1q2(4);
    b.initial_occupancy.insert((0, 1));
    b.initial_occupancy.insert((0, 0));
    let configs = ConfigurationSet::new(vec![a, b], MarkerEncoding::Compact).unwrap();
    let qoi = QoISpec::with_lattice_weights(
        configs.lattice(0),
        BTreeSet::from([2]),
        BTreeSet::from([0, 1]),
        BTreeSet::from([2]),
    )
    .unwrap();
    PipelineSpec {
        configs,
        collision: CollisionModel::Identity,
        n_t: 2,
        qoi,
        mapping: MappingSpec::linear_comparison(),
        e,
        minfind: MinFindParams::default(),
        qubit_cap: 26,
    }
}

#[test]
fn exact_expectation_of_smoke_instance() {
    // Lattice 0: one right-mover reaches gridpoint 2 at step 2 (f = 1).
    // Lattice 1: additionally a left-mover wraps to gridpoint 2 (f = 2).
    // F_max = 2 so the linear mapping divides by 4.
    let spec = smoke_spec(4);
    let pipeline = Pipeline::build(&spec).unwrap();
    let phi = exact_expectation(&pipeline).unwrap();
    assert!((phi[&0] - 0.25).abs() < 1e-10);
    assert!((phi[&1] - 0.50).abs() < 1e-10);

    let report = compute_gap(&[phi[&0], phi[&1]], spec.e).unwrap();
    assert_eq!(report.argmin, 0);
    assert!((report.delta - 0.25).abs() < 1e-10);
    assert!(report.grid_resolvable);
}

#[test]
fn empty_lattice_has_zero_expectation() {
    let lat = d1q2(4);
    let configs = ConfigurationSet::new(vec![lat.clone()], MarkerEncoding::Compact).unwrap();
    let qoi = QoISpec::with_lattice_weights(
        &lat,
        BTreeSet::from([0, 1]),
        BTreeSet::from([0, 1]),
        BTreeSet::from([1]),
    )
    .unwrap();
    for mapping in [
        MappingSpec::linear_comparison(),
        MappingSpec::weighted_rotation(&qoi).unwrap(),
    ] {
        let spec = PipelineSpec {
            configs: configs.clone(),
            collision: CollisionModel::Identity,
            n_t: 1,
            qoi: qoi.clone(),
            mapping,
            e: 1,
            minfind: MinFindParams::default(),
            qubit_cap: 26,
        };
        let pipeline = Pipeline::build(&spec).unwrap();
        let phi = exact_expectation(&pipeline).unwrap();
        assert!(phi[&0].abs() < 1e-12);
    }
}

#[test]
fn identical_lattices_have_identical_expectations() {
    let mut lat = d1q2(4);
    lat.initial_occupancy.insert((1, 1));
    let configs =
        ConfigurationSet::new(vec![lat.clone(), lat.clone()], MarkerEncoding::Compact).unwrap();
    let qoi = QoISpec::with_lattice_weights(
        &lat,
        BTreeSet::from([2, 3]),
        BTreeSet::from([0, 1]),
        BTreeSet::from([1, 2]),
    )
    .unwrap();
    let spec = PipelineSpec {
        configs,
        collision: CollisionModel::Identity,
        n_t: 2,
        qoi,
        mapping: MappingSpec::linear_comparison(),
        e: 2,
        minfind: MinFindParams::default(),
        qubit_cap: 26,
    };
    let pipeline = Pipeline::build(&spec).unwrap();
    let phi = exact_expectation(&pipeline).unwrap();
    assert_eq!(phi[&0], phi[&1]);
}

#[test]
fn expectation_invariant_under_marker_encoding() {
    let mut a = d1q2(4);
    a.initial_occupancy.insert((0, 1));
    let mut b = d1q2(4);
    b.initial_occupancy.insert((2, 0));
    b.initial_occupancy.insert((3, 1));
    let qoi = QoISpec::with_lattice_weights(
        &a,
        BTreeSet::from([2]),
        BTreeSet::from([0, 1]),
        BTreeSet::from([1, 2]),
    )
    .unwrap();
    let mut tables = Vec::new();
    for encoding in [MarkerEncoding::Compact, MarkerEncoding::OneHot] {
        let configs = ConfigurationSet::new(vec![a.clone(), b.clone()], encoding).unwrap();
        let spec = PipelineSpec {
            configs,
            collision: CollisionModel::Identity,
            n_t: 2,
            qoi: qoi.clone(),
            mapping: MappingSpec::linear_comparison(),
            e: 1,
            minfind: MinFindParams::default(),
            qubit_cap: 26,
        };
        let pipeline = Pipeline::build(&spec).unwrap();
        tables.push(exact_expectation(&pipeline).unwrap());
    }
    for j in 0..2u64 {
        assert!(
            (tables[0][&j] - tables[1][&j]).abs() < 1e-10,
            "marker {j}: {} vs {}",
            tables[0][&j],
            tables[1][&j]
        );
    }
}

#[test]
fn coin_marginal_matches_weighted_rotation_form() {
    // Deterministic f per marker; coin marginal after the prep equals
    // sin^2(pi f / (2 F_max)) exactly.
    let mut spec = smoke_spec(1);
    spec.mapping = MappingSpec::weighted_rotation(&spec.qoi).unwrap();
    let pipeline = Pipeline::build(&spec).unwrap();
    let st = pipeline.state_after_prep().unwrap();
    let f_max = spec.qoi.f_max() as f64;
    for (j, f) in [(0u64, 1.0f64), (1, 2.0)] {
        let cond = st.conditional(RegisterId::Marker, j).unwrap();
        let p1 = cond.prob_of(RegisterId::Coin, 1);
        let expect = (std::f64::consts::PI * f / (2.0 * f_max)).sin().powi(2);
        assert!((p1 - expect).abs() < 1e-10, "marker {j}");
    }
}

#[test]
fn per_marker_conditional_prep_matches_single_lattice_pipeline() {
    // Conditioning the two-configuration prep on a marker reproduces the
    // single-lattice pipeline state with unit fidelity.
    let spec = smoke_spec(1);
    let pipeline = Pipeline::build(&spec).unwrap();
    let st = pipeline.state_after_prep().unwrap();
    for j in 0..2usize {
        let cond = st.conditional(RegisterId::Marker, j as u64).unwrap();
        let single_configs = ConfigurationSet::new(
            vec![spec.configs.lattice(j).clone()],
            MarkerEncoding::Compact,
        )
        .unwrap();
        let single_spec = PipelineSpec {
            configs: single_configs,
            collision: spec.collision.clone(),
            n_t: spec.n_t,
            qoi: spec.qoi.clone(),
            mapping: spec.mapping,
            e: spec.e,
            minfind: spec.minfind,
            qubit_cap: spec.qubit_cap,
        };
        let single = Pipeline::build(&single_spec).unwrap();
        let sst = single.state_after_prep().unwrap();
        // Fidelity over the registers shared by both layouts (everything
        // except the absent marker qubit).
        let mut overlap = Complex64::new(0.0, 0.0);
        let layout = st.layout();
        let slayout = sst.layout();
        for (basis, amp) in cond.amplitudes().iter().enumerate() {
            if amp.norm_sqr() > 0.0 {
                let mut single_basis = 0usize;
                for reg in [
                    RegisterId::Base,
                    RegisterId::Data,
                    RegisterId::MapAncilla,
                    RegisterId::Coin,
                    RegisterId::Estimation,
                    RegisterId::Flag,
                ] {
                    let v = layout.value_of(basis, reg);
                    single_basis |= (v as usize) << slayout.offset(reg);
                }
                overlap += sst.amplitude(single_basis).conj() * amp;
            }
        }
        assert!(
            (overlap.norm() - 1.0).abs() < 1e-10,
            "marker {j} fidelity {}",
            overlap.norm()
        );
    }
}

#[test]
fn qae_on_real_pipeline_with_representable_phi() {
    // phi = 1/2 for lattice 1 is exactly representable at e = 3 (y = 2):
    // the estimation outcome concentrates on {2, 6} for that marker.
    let spec = smoke_spec(3);
    let pipeline = Pipeline::build(&spec).unwrap();
    let dist = pipeline.estimate_distribution().unwrap();
    let rows = &dist.per_marker[&1];
    let mass: f64 = rows
        .iter()
        .filter(|&&(y, _)| y == 2 || y == 6)
        .map(|&(_, p)| p)
        .sum();
    assert!(mass > 1.0 - 1e-9, "mass {mass}");
    // Each per-marker distribution sums to one.
    for rows in dist.per_marker.values() {
        let total: f64 = rows.iter().map(|&(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn qae_mass_within_error_bound_for_nonrepresentable_phi() {
    // phi = 1/4 for lattice 0 is not on the e = 3 grid; at least 8/pi^2
    // of the mass lands within the error bound at l = 2^e.
    let spec = smoke_spec(3);
    let pipeline = Pipeline::build(&spec).unwrap();
    let phi = exact_expectation(&pipeline).unwrap()[&0];
    let dist = pipeline.estimate_distribution().unwrap();
    let bound = qae_error_bound(phi, 1 << 3);
    let mass: f64 = dist.per_marker[&0]
        .iter()
        .filter(|&&(y, _)| (qae_estimate_from_outcome(y, 3).unwrap() - phi).abs() <= bound)
        .map(|&(_, p)| p)
        .sum();
    assert!(mass >= 8.0 / (std::f64::consts::PI * std::f64::consts::PI));
}

#[test]
fn grover_iterator_is_marker_diagonal_on_real_pipeline() {
    // Column probing of the full iterator on a 12-qubit two-marker
    // pipeline: no amplitude ever crosses marker blocks.
    let mut a = d1q2(2);
    a.initial_occupancy.insert((0, 1));
    let mut b = d1q2(2);
    b.initial_occupancy.insert((1, 0));
    let configs = ConfigurationSet::new(vec![a, b], MarkerEncoding::Compact).unwrap();
    let qoi = QoISpec::with_lattice_weights(
        configs.lattice(0),
        BTreeSet::from([0]),
        BTreeSet::from([0, 1]),
        BTreeSet::from([1]),
    )
    .unwrap();
    let spec = PipelineSpec {
        configs,
        collision: CollisionModel::Identity,
        n_t: 1,
        qoi,
        mapping: MappingSpec::linear_comparison(),
        e: 1,
        minfind: MinFindParams::default(),
        qubit_cap: 26,
    };
    let pipeline = Pipeline::build(&spec).unwrap();
    let layout = pipeline.layout().clone();
    assert!(layout.total_qubits() <= 14);
    let q = build_grover_iterator(pipeline.prep_block(), &layout);
    let dim = 1usize << layout.total_qubits();
    for basis in 0..dim {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[basis] = Complex64::new(1.0, 0.0);
        let mut st = StateVector::from_amplitudes(layout.clone(), amps).unwrap();
        st.apply_block(&q).unwrap();
        let m_in = layout.value_of(basis, RegisterId::Marker);
        for (out, amp) in st.amplitudes().iter().enumerate() {
            if amp.norm() > 1e-12 {
                assert_eq!(layout.value_of(out, RegisterId::Marker), m_in);
            }
        }
    }
}

#[test]
fn iterated_grover_matches_amplitude_predictions() {
    // For a single-lattice pipeline the iterator acts as a rotation by
    // 2 theta with sin^2 theta = phi; coin-1 mass after j applications
    // follows sin^2((2j+1) theta).
    let mut lat = d1q2(4);
    lat.initial_occupancy.insert((0, 1));
    let configs = ConfigurationSet::new(vec![lat.clone()], MarkerEncoding::Compact).unwrap();
    let qoi = QoISpec::with_lattice_weights(
        &lat,
        BTreeSet::from([2]),
        BTreeSet::from([0, 1]),
        BTreeSet::from([2]),
    )
    .unwrap();
    let spec = PipelineSpec {
        configs,
        collision: CollisionModel::Identity,
        n_t: 2,
        qoi,
        mapping: MappingSpec::linear_comparison(),
        e: 1,
        minfind: MinFindParams::default(),
        qubit_cap: 26,
    };
    let pipeline = Pipeline::build(&spec).unwrap();
    let layout = pipeline.layout().clone();
    let phi = exact_expectation(&pipeline).unwrap()[&0];
    let theta = phi.sqrt().asin();
    let q = build_grover_iterator(pipeline.prep_block(), &layout);
    let mut st = pipeline.state_after_prep().unwrap();
    for j in 0..6u32 {
        let p1 = st.prob_of(RegisterId::Coin, 1);
        let expect = ((2 * j + 1) as f64 * theta).sin().powi(2);
        assert!((p1 - expect).abs() < 1e-9, "j={j}: {p1} vs {expect}");
        st.apply_block(&q).unwrap();
    }
}
