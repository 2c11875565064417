// Copyright 2026 The qdyn Developers
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

use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unknown register '{0}'")]
    UnknownRegister(String),
    #[error("duplicate register name '{0}'")]
    DuplicateRegister(String),
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("qubit index {index} out of range for {total} qubits")]
    QubitOutOfRange { index: usize, total: usize },
    #[error("{requested} qubits requested, at most {max} are supported")]
    TooManyQubits { requested: usize, max: usize },
    #[error("grid constraint violated: {0}")]
    Grid(String),
    #[error("register '{0}' is not in |0>")]
    NotCleared(String),
    #[error("phase table value {value} does not fit a {bits}-bit ancilla")]
    PhaseOverflow { value: i64, bits: usize },
    #[error("arity mismatch: table has arity {table}, {registers} registers given")]
    ArityMismatch { table: usize, registers: usize },
    #[error("projection annihilates the state")]
    ZeroNorm,
    #[error("pointer wrap-around: k*t*(a_max - a_min) = {span} exceeds {cells} cells")]
    WrapAround { span: f64, cells: usize },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
