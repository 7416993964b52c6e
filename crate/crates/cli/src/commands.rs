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

//! The pipeline execution commands. Each returns the CSV payload (and a
//! human summary where one exists) as strings; identical configurations
//! and seeds produce byte-identical output.
//!
//! Repetition sweeps fan out over worker threads (`QLGA_WORKERS`, default
//! one per repetition up to the available parallelism) and merge
//! deterministically in seed order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qlga_core::accumulate::accumulated_state_check;
use qlga_core::oracle::{
    aggregate_repeated, classical_lga_enumerate, classical_query_baseline, compute_gap,
    exact_expectation, repetition_seeds,
};
use qlga_core::search::{
    qae_error_bound, qae_estimate_from_outcome, run_durr_hoyer, MinFindResult, Pipeline,
};

use crate::config::RunConfig;
use crate::csvfmt;
use crate::resources::ResourceReport;
use crate::CliError;

/// Seed and cap overrides applied on top of the parsed configuration.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub max_qubits: Option<usize>,
}

fn effective(config: &RunConfig, overrides: Overrides) -> (RunConfig, u64) {
    let mut cfg = config.clone();
    if let Some(cap) = overrides.max_qubits {
        cfg.spec.qubit_cap = cap;
    }
    let seed = overrides.seed.unwrap_or(cfg.seed);
    (cfg, seed)
}

/// Rows `(marker, f_value, probability)` from the evolved state's
/// per-marker data distributions.
pub fn cmd_simulate(config: &RunConfig, overrides: Overrides) -> Result<String, CliError> {
    let (cfg, _) = effective(config, overrides);
    let pipeline = Pipeline::build(&cfg.spec)?;
    let state = pipeline.state_after_evolution()?;
    let table = accumulated_state_check(&state, &cfg.spec.configs, &cfg.spec.qoi);
    let mut out = String::from("marker,f_value,probability\n");
    for j in 0..cfg.spec.configs.len() {
        let mv = cfg.spec.configs.marker_value(j);
        if let Some(dist) = table.get(&mv) {
            for (f, p) in dist {
                out.push_str(&format!("{j},{f},{}\n", csvfmt::float(*p)));
            }
        }
    }
    Ok(out)
}

/// Rows `(marker, y, phi_hat, probability, true_phi, within_bound)` from
/// the joint marker/estimation distribution of the prepared state.
pub fn cmd_estimate(config: &RunConfig, overrides: Overrides) -> Result<String, CliError> {
    let (cfg, _) = effective(config, overrides);
    let pipeline = Pipeline::build(&cfg.spec)?;
    let truth = exact_expectation(&pipeline)?;
    let dist = pipeline.estimate_distribution()?;
    let l = 1u64 << cfg.spec.e;
    let mut out = String::from("marker,y,phi_hat,probability,true_phi,within_bound\n");
    for (marker, rows) in &dist.per_marker {
        let phi = truth.get(marker).copied().unwrap_or(0.0);
        let bound = qae_error_bound(phi, l);
        for &(y, p) in rows {
            let phi_hat = qae_estimate_from_outcome(y, cfg.spec.e)?;
            out.push_str(&format!(
                "{marker},{y},{},{},{},{}\n",
                csvfmt::float(phi_hat),
                csvfmt::float(p),
                csvfmt::float(phi),
                csvfmt::flag((phi_hat - phi).abs() <= bound),
            ));
        }
    }
    Ok(out)
}

fn worker_count(requested: usize) -> usize {
    if let Ok(v) = std::env::var("QLGA_WORKERS") {
        if let Ok(n) = v.parse::<usize>() {
            return n.clamp(1, requested.max(1));
        }
    }
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    available.clamp(1, requested.max(1))
}

/// Independent minimum-finding runs over per-run seeds, fanned out across
/// worker threads, merged in seed order.
fn run_repetitions(
    pipeline: &Pipeline,
    seeds: &[u64],
) -> Result<Vec<MinFindResult>, CliError> {
    let workers = worker_count(seeds.len());
    if workers <= 1 || seeds.len() <= 1 {
        let mut runs = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            runs.push(run_durr_hoyer(pipeline, &mut rng)?);
        }
        return Ok(runs);
    }
    let mut slots: Vec<Option<Result<MinFindResult, qlga_core::Error>>> =
        vec![None; seeds.len()];
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (w, chunk) in seeds.chunks(seeds.len().div_ceil(workers)).enumerate() {
            let offset = w * seeds.len().div_ceil(workers);
            let chunk = chunk.to_vec();
            handles.push(scope.spawn(move || {
                chunk
                    .into_iter()
                    .enumerate()
                    .map(|(i, seed)| {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        (offset + i, run_durr_hoyer(pipeline, &mut rng))
                    })
                    .collect::<Vec<_>>()
            }));
        }
        for handle in handles {
            for (idx, result) in handle.join().expect("worker panicked") {
                slots[idx] = Some(result);
            }
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.expect("all slots filled").map_err(CliError::from))
        .collect()
}

/// Threshold-trace rows plus a `#`-prefixed summary block. Repetition
/// counts above one aggregate by plurality vote with per-marker medians.
pub fn cmd_minfind(config: &RunConfig, overrides: Overrides) -> Result<String, CliError> {
    let (cfg, seed) = effective(config, overrides);
    let pipeline = Pipeline::build(&cfg.spec)?;
    let truth = exact_expectation(&pipeline)?;
    let phi: Vec<f64> = (0..cfg.spec.configs.len() as u64)
        .map(|j| truth.get(&j).copied().unwrap_or(0.0))
        .collect();
    let exact_argmin = phi
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite phi"))
        .map(|(i, _)| i as u64)
        .unwrap_or(0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds = repetition_seeds(&mut rng, cfg.repetitions);
    let runs = run_repetitions(&pipeline, &seeds)?;
    let aggregate = aggregate_repeated(runs).map_err(CliError::from)?;
    let result = &aggregate.result;

    let mut out = String::from("round,tau,measured_marker,measured_y,iterations\n");
    for (round, row) in result.threshold_trace.iter().enumerate() {
        out.push_str(&format!(
            "{round},{},{},{},{}\n",
            row.tau, row.marker, row.outcome, row.iterations
        ));
    }
    let baseline = classical_query_baseline(cfg.spec.configs.len() as u64, 1)
        .map_err(CliError::from)?;
    out.push_str(&format!("# best_marker = {}\n", result.best_marker));
    out.push_str(&format!(
        "# best_estimate = {}\n",
        csvfmt::float(result.best_estimate)
    ));
    out.push_str(&format!(
        "# grover_iterations_total = {}\n",
        result.grover_iterations_total
    ));
    out.push_str(&format!(
        "# oracle_queries_total = {}\n",
        result.oracle_queries_total
    ));
    out.push_str(&format!("# rounds = {}\n", result.rounds));
    out.push_str(&format!(
        "# classical_baseline = {}\n",
        csvfmt::float(baseline)
    ));
    out.push_str(&format!("# exact_argmin = {exact_argmin}\n"));
    out.push_str(&format!(
        "# agreement = {}\n",
        csvfmt::flag(result.best_marker == exact_argmin)
    ));
    if cfg.repetitions > 1 {
        for (marker, votes) in &aggregate.votes {
            out.push_str(&format!(
                "# votes_{marker} = {votes} median {}\n",
                csvfmt::float(aggregate.medians[marker])
            ));
        }
        out.push_str(&format!(
            "# degenerate = {}\n",
            csvfmt::flag(aggregate.degenerate)
        ));
    }
    Ok(out)
}

/// Human-readable table and CSV of the structural resource counts.
pub fn cmd_resources(
    config: &RunConfig,
    overrides: Overrides,
) -> Result<(String, String), CliError> {
    let (cfg, _) = effective(config, overrides);
    let report = ResourceReport::build(&cfg.spec)?;
    Ok((report.to_text(), report.to_csv()))
}

/// Exact expectation table, classical enumeration distributions, and the
/// gap report as `record,marker,key,value` rows.
pub fn cmd_oracle(config: &RunConfig, overrides: Overrides) -> Result<String, CliError> {
    let (cfg, _) = effective(config, overrides);
    let pipeline = Pipeline::build(&cfg.spec)?;
    let truth = exact_expectation(&pipeline)?;
    let mut out = String::from("record,marker,key,value\n");
    for (marker, phi) in &truth {
        out.push_str(&format!("exact_phi,{marker},,{}\n", csvfmt::float(*phi)));
    }
    for (j, lat) in cfg.spec.configs.lattices().iter().enumerate() {
        let dist = classical_lga_enumerate(lat, &cfg.spec.collision, cfg.spec.n_t, &cfg.spec.qoi)
            .map_err(CliError::from)?;
        for (f, p) in dist {
            out.push_str(&format!("enum_f,{j},{f},{}\n", csvfmt::float(p)));
        }
    }
    if cfg.spec.configs.len() >= 2 {
        let phi: Vec<f64> = (0..cfg.spec.configs.len() as u64)
            .map(|j| truth.get(&j).copied().unwrap_or(0.0))
            .collect();
        let gap = compute_gap(&phi, cfg.spec.e).map_err(CliError::from)?;
        out.push_str(&format!("gap,,argmin,{}\n", gap.argmin));
        out.push_str(&format!("gap,,delta,{}\n", csvfmt::float(gap.delta)));
        out.push_str(&format!("gap,,degenerate,{}\n", csvfmt::flag(gap.degenerate)));
        out.push_str(&format!(
            "gap,,grid_resolvable,{}\n",
            csvfmt::flag(gap.grid_resolvable)
        ));
        out.push_str(&format!(
            "gap,,bound_exceeds_half_gap,{}\n",
            csvfmt::flag(gap.bound_exceeds_half_gap)
        ));
    }
    Ok(out)
}
