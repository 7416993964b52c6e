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

//! Configuration ingestion, pipeline execution commands, CSV emission,
//! and the resource estimator for the parallel lattice-gas optimization
//! pipeline.

pub mod commands;
pub mod config;
pub mod csvfmt;
pub mod resources;

/// Process exit codes: 0 success, 2 validation error, 3 capacity error,
/// 4 runtime numerical error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Validation(String),
    Capacity(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Capacity(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Capacity(m) | CliError::Runtime(m) => m,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.message())
    }
}

impl std::error::Error for CliError {}

impl From<qlga_core::Error> for CliError {
    fn from(err: qlga_core::Error) -> Self {
        match err {
            qlga_core::Error::Capacity { .. } => CliError::Capacity(err.to_string()),
            _ => CliError::Runtime(err.to_string()),
        }
    }
}
