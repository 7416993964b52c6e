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

//! Structural gate counts and qubit budgets of a configured pipeline,
//! plus the evaluated terms of the end-to-end complexity estimate. Counts
//! come from the actual circuit builders; no statevector is allocated, so
//! the estimator works far above the simulation cap.

use qlga_core::lattice::build_streaming;
use qlga_core::mapping::build_mapping;
use qlga_core::parallel::{
    build_layout, build_marker_prep, build_parallel_initial, build_parallel_step,
    plan_shared_semantics,
};
use qlga_core::search::PipelineSpec;
use qlga_core::sim::{Gate, RegisterId, RegisterLayout};

use crate::csvfmt;
use crate::CliError;

/// Evaluated terms of the asymptotic cost expression.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTerms {
    /// Per-step lattice-gas work: `2^q + log2(N_g)`.
    pub qlga: f64,
    /// Accumulation, mapping, and comparison work:
    /// `log2^2(N_acc_steps * |region| * (q + 1))`.
    pub accumulation: f64,
    /// Serialized configuration semantics:
    /// `N_bc_max * |L| * log2^2(|L|)`.
    pub parallel_semantics: f64,
    /// Search factor `sqrt(|L|)`.
    pub sqrt_configs: f64,
    /// Estimation factor `1 / epsilon = 2^e`.
    pub inv_epsilon: f64,
    /// Full product including the `N_t` step count.
    pub total: f64,
}

/// Qubit budget and per-block gate counts of a configured pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceReport {
    pub layout: RegisterLayout,
    /// Streaming swaps per time step, counted from the built block.
    pub streaming_swaps: usize,
    /// The closed-form count `q * (N_g - 1)`, exact for 1D lattices.
    pub streaming_swaps_formula: usize,
    /// Collision unitaries per time step (one per gridpoint).
    pub collision_unitaries: usize,
    /// Boundary swap applications per time step, shared features emitted
    /// once.
    pub boundary_swaps: usize,
    /// Initial-condition X applications (marker controls included).
    pub initial_gates: usize,
    /// Marker-control count of the overlap-reduced initial plan versus
    /// the naive per-lattice plan.
    pub initial_controls_planned: usize,
    pub initial_controls_naive: usize,
    /// Controlled phases per adder block: `|region| * |channels| * n_acc`.
    pub mhwa_phases: usize,
    /// Adder blocks across the evolution: `|acc_steps|`.
    pub mhwa_blocks: usize,
    /// Gates in the two QFT brackets around the data register.
    pub qft_gates: usize,
    /// Gates in the amplitude-mapping block.
    pub mapping_gates: usize,
    /// Gates in the marker preparation.
    pub marker_prep_gates: usize,
    /// Iterator applications inside one estimation pass: `2^e - 1`.
    pub grover_iterations_per_estimation: u64,
    pub terms: CostTerms,
}

impl ResourceReport {
    pub fn build(spec: &PipelineSpec) -> Result<Self, CliError> {
        spec.validate().map_err(CliError::from)?;
        let lat = spec.configs.lattice(0);
        let layout = build_layout(&spec.configs, &spec.qoi, spec.e, spec.mapping.kind);
        let n_g = lat.n_gridpoints();
        let q = lat.q;
        let n_acc = spec.qoi.n_q_acc();

        let streaming = build_streaming(lat, &layout);
        let streaming_swaps = streaming.count_where(|op| matches!(op.gate(), Gate::Swap));
        let step = build_parallel_step(&spec.configs, &spec.collision, &layout)
            .map_err(CliError::from)?;
        let collision_unitaries = step.count_where(|op| matches!(op.gate(), Gate::Unitary(_)));
        let boundary_swaps =
            step.count_where(|op| matches!(op.gate(), Gate::Swap)) - streaming_swaps;
        let initial = build_parallel_initial(&spec.configs, &layout).map_err(CliError::from)?;
        let initial_controls_planned: usize =
            initial.ops().iter().map(|op| op.controls().len()).sum();
        let plan = plan_shared_semantics(&spec.configs);
        let width = spec.configs.marker_width();
        let initial_controls_naive: usize = plan
            .initial
            .iter()
            .map(|g| {
                g.elements.len()
                    * g.members.len()
                    * match spec.configs.encoding() {
                        qlga_core::parallel::MarkerEncoding::Compact => width,
                        qlga_core::parallel::MarkerEncoding::OneHot => 1,
                    }
            })
            .sum();
        let qft = qlga_core::sim::qft_block(&layout, RegisterId::Data, false);
        let mapping = build_mapping(&layout, &spec.mapping).map_err(CliError::from)?;
        let marker_prep = build_marker_prep(&spec.configs, &layout);

        let k = spec.configs.len() as f64;
        let n_bc_max = spec
            .configs
            .lattices()
            .iter()
            .map(|l| l.n_boundary_gridpoints())
            .max()
            .unwrap_or(0) as f64;
        let log_k = if spec.configs.len() > 1 { k.log2() } else { 0.0 };
        let f_arg = (spec.qoi.acc_steps.len() * spec.qoi.region.len() * (q + 1)) as f64;
        let accumulation = if f_arg > 0.0 {
            let l = f_arg.log2();
            l * l
        } else {
            0.0
        };
        let qlga = (1u64 << q) as f64 + (n_g as f64).log2();
        let parallel_semantics = n_bc_max * k * log_k * log_k;
        let sqrt_configs = k.sqrt();
        let inv_epsilon = (1u64 << spec.e) as f64;
        let total = sqrt_configs
            * inv_epsilon
            * spec.n_t as f64
            * (qlga + accumulation + parallel_semantics);

        Ok(ResourceReport {
            layout,
            streaming_swaps,
            streaming_swaps_formula: q * (n_g - 1),
            collision_unitaries,
            boundary_swaps,
            initial_gates: initial.len(),
            initial_controls_planned,
            initial_controls_naive,
            mhwa_phases: spec.qoi.region.len() * spec.qoi.channels.len() * n_acc,
            mhwa_blocks: spec.qoi.acc_steps.len(),
            qft_gates: 2 * qft.len(),
            mapping_gates: mapping.len(),
            marker_prep_gates: marker_prep.len(),
            grover_iterations_per_estimation: (1u64 << spec.e) - 1,
            terms: CostTerms {
                qlga,
                accumulation,
                parallel_semantics,
                sqrt_configs,
                inv_epsilon,
                total,
            },
        })
    }

    /// Register widths in layout order with the grand total last.
    pub fn qubit_rows(&self) -> Vec<(String, usize)> {
        let mut rows: Vec<(String, usize)> = self
            .layout
            .registers()
            .map(|(id, _, w)| (id.short_name().to_string(), w))
            .collect();
        rows.push(("total".to_string(), self.layout.total_qubits()));
        rows
    }

    /// `metric,value` rows; integers plain, formula terms at 12
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("metric,value\n");
        for (name, width) in self.qubit_rows() {
            out.push_str(&format!("qubits_{name},{width}\n"));
        }
        let rows = [
            ("streaming_swaps_per_step", self.streaming_swaps),
            ("streaming_swaps_formula", self.streaming_swaps_formula),
            ("collision_unitaries_per_step", self.collision_unitaries),
            ("boundary_swaps_per_step", self.boundary_swaps),
            ("initial_gates", self.initial_gates),
            ("initial_controls_planned", self.initial_controls_planned),
            ("initial_controls_naive", self.initial_controls_naive),
            ("mhwa_phases_per_block", self.mhwa_phases),
            ("mhwa_blocks", self.mhwa_blocks),
            ("qft_gates", self.qft_gates),
            ("mapping_gates", self.mapping_gates),
            ("marker_prep_gates", self.marker_prep_gates),
        ];
        for (name, value) in rows {
            out.push_str(&format!("{name},{value}\n"));
        }
        out.push_str(&format!(
            "grover_iterations_per_estimation,{}\n",
            self.grover_iterations_per_estimation
        ));
        let terms = [
            ("term_qlga", self.terms.qlga),
            ("term_accumulation", self.terms.accumulation),
            ("term_parallel_semantics", self.terms.parallel_semantics),
            ("factor_sqrt_configs", self.terms.sqrt_configs),
            ("factor_inv_epsilon", self.terms.inv_epsilon),
            ("cost_total", self.terms.total),
        ];
        for (name, value) in terms {
            out.push_str(&format!("{name},{}\n", csvfmt::float(value)));
        }
        out
    }

    /// Human-readable table.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("qubit budget\n");
        for (name, width) in self.qubit_rows() {
            out.push_str(&format!("  {name:<6} {width}\n"));
        }
        out.push_str("per-step gate counts\n");
        out.push_str(&format!(
            "  streaming swaps        {} (formula q*(N_g-1) = {})\n",
            self.streaming_swaps, self.streaming_swaps_formula
        ));
        out.push_str(&format!(
            "  collision unitaries    {}\n",
            self.collision_unitaries
        ));
        out.push_str(&format!("  boundary swaps         {}\n", self.boundary_swaps));
        out.push_str("one-time blocks\n");
        out.push_str(&format!(
            "  initial conditions     {} gates ({} marker controls, naive {})\n",
            self.initial_gates, self.initial_controls_planned, self.initial_controls_naive
        ));
        out.push_str(&format!(
            "  adder                  {} phases x {} blocks\n",
            self.mhwa_phases, self.mhwa_blocks
        ));
        out.push_str(&format!("  qft brackets           {} gates\n", self.qft_gates));
        out.push_str(&format!("  amplitude mapping      {} gates\n", self.mapping_gates));
        out.push_str(&format!(
            "  marker preparation     {} gates\n",
            self.marker_prep_gates
        ));
        out.push_str(&format!(
            "estimation iterator applications: {}\n",
            self.grover_iterations_per_estimation
        ));
        out.push_str("cost terms\n");
        out.push_str(&format!("  qlga               {:.6}\n", self.terms.qlga));
        out.push_str(&format!(
            "  accumulation       {:.6}\n",
            self.terms.accumulation
        ));
        out.push_str(&format!(
            "  parallel semantics {:.6}\n",
            self.terms.parallel_semantics
        ));
        out.push_str(&format!(
            "  sqrt(|L|)          {:.6}\n",
            self.terms.sqrt_configs
        ));
        out.push_str(&format!(
            "  1/epsilon          {:.6}\n",
            self.terms.inv_epsilon
        ));
        out.push_str(&format!("  total              {:.6}\n", self.terms.total));
        out
    }
}
