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

use std::io::BufReader;

use qdyn::gates::{read_circuit, write_circuit};
use qdyn::{apply_qft, qft_circuit, Direction, GateOp, RegisterLayout, RegisterRole, StateVector};

const QFT3: &str = include_str!("data/qft3.circuit");
const QFT2_OF_1: &str = include_str!("data/qft2_of_1.dump");

fn same_gate(a: &GateOp, b: &GateOp) -> bool {
    match (a, b) {
        (GateOp::ControlledPhase { control: c1, target: t1, theta: x }, GateOp::ControlledPhase { control: c2, target: t2, theta: y }) => {
            c1 == c2 && t1 == t2 && (x - y).abs() < 1e-15
        }
        _ => a == b,
    }
}

#[test]
fn qft3_matches_golden_circuit() {
    let golden = read_circuit(BufReader::new(QFT3.as_bytes())).unwrap();
    let built = qft_circuit(3).unwrap();
    assert_eq!(golden.len(), built.len());
    for (g, b) in golden.iter().zip(&built) {
        assert!(same_gate(g, b), "{g} vs {b}");
    }
}

#[test]
fn circuit_dump_round_trips() {
    let built = qft_circuit(7).unwrap();
    let mut buf = Vec::new();
    write_circuit(&built, &mut buf).unwrap();
    assert_eq!(read_circuit(buf.as_slice()).unwrap(), built);
}

#[test]
fn qft_of_basis_state_matches_golden_dump() {
    let golden = StateVector::read_dump(QFT2_OF_1.as_bytes()).unwrap();
    let mut s = StateVector::new_basis_state(RegisterLayout::single("x", 2, RegisterRole::System).unwrap(), 1).unwrap();
    apply_qft(&mut s, "x", Direction::Forward).unwrap();
    assert!(s.max_deviation(&golden).unwrap() < 1e-15);
}
