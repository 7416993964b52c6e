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

//! Dense statevector simulation of parallel quantum lattice-gas time
//! evolution over superposed lattice configurations, with coherent
//! quantity accumulation, amplitude mapping, canonical amplitude
//! estimation, and threshold-tracking quantum minimum finding.
//!
//! The crate is `no_std` (with `alloc`); all IO, configuration parsing,
//! and reporting live in the companion `qlga-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod accumulate;
pub mod error;
pub mod lattice;
pub mod mapping;
pub mod oracle;
pub mod parallel;
pub mod search;
pub mod sim;

pub use error::{Error, Result};

/// Hard cap on simulable qubits unless explicitly overridden
/// (2^26 double-precision amplitudes is roughly 1 GiB).
pub const DEFAULT_QUBIT_CAP: usize = 26;
