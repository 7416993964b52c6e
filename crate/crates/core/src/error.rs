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

use alloc::string::String;

/// Errors shared across the simulation and search modules.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("a {qubits}-qubit state exceeds the configured cap of {cap} qubits")]
    Capacity { qubits: usize, cap: usize },

    #[error("qubit index {qubit} out of range for a {total}-qubit layout")]
    QubitOutOfRange { qubit: usize, total: usize },

    #[error("register width mismatch: {left} vs {right}")]
    WidthMismatch { left: usize, right: usize },

    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NonUnitary { deviation: f64 },

    #[error("targets and controls of a gate must be distinct qubits")]
    OverlappingQubits,

    #[error("gate expects {expected} target(s), got {got}")]
    BadArity { expected: usize, got: usize },

    #[error("conditioning on a register outcome of zero probability")]
    ZeroProbability,

    #[error("constant {constant} out of range for a {width}-bit register")]
    ConstantOutOfRange { constant: u64, width: usize },

    #[error("accumulation step {step} outside 1..={steps}")]
    AccStepOutOfRange { step: usize, steps: usize },

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("invalid collision model: {0}")]
    InvalidCollision(String),

    #[error("invalid quantity of interest: {0}")]
    InvalidQoi(String),

    #[error("invalid configuration set: {0}")]
    InvalidConfigurations(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
