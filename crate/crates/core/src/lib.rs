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

//! Gate-level state-vector simulation of quantum-mechanical particles stored
//! in qubit registers: QFT-based split-operator time steps, ancilla phase
//! oracles, binary-tree amplitude loading, von Neumann pointer measurements
//! and bath-driven cooling, each checked against dense classical references.

pub mod cooling;
pub mod cli;
pub mod error;
pub mod gates;
pub mod oracle;
pub mod phase;
pub mod pointer;
pub mod prep;
pub mod propagator;
pub mod state;

pub use error::{Error, Result};
pub use phase::{apply_phase_ancilla, apply_phase_direct, bitwise_phase, PhaseTable};
pub use gates::{apply_gate, apply_qft, dft_direct, qft_circuit, CircuitStats, Direction, GateOp};
pub use state::{MeasurementSample, Register, RegisterLayout, RegisterRole, StateVector};
