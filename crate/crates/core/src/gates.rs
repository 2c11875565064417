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

//! Elementary gates and the quantum Fourier transform.
//!
//! The forward transform maps |n⟩ to N^{-1/2} Σ_n' e^{+2πi n n'/N} |n'⟩ with
//! the output in standard bit order (the bit-reversal swaps are part of the
//! circuit).

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::StateVector;

/// A one- or two-qubit unitary addressed by global qubit index.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateOp {
    /// diag(1, e^{iθ}).
    Phase { qubit: usize, theta: f64 },
    /// Real rotation |0⟩ → cos θ|0⟩ + sin θ|1⟩, |1⟩ → −sin θ|0⟩ + cos θ|1⟩.
    Rotation { qubit: usize, theta: f64 },
    /// The QFT mixing gate. It is the reflection [[1, 1], [1, −1]]/√2; no
    /// single rotation or phase reproduces it.
    Hadamard { qubit: usize },
    /// Multiplies |11⟩ of (control, target) by e^{iθ}.
    ControlledPhase { control: usize, target: usize, theta: f64 },
    Swap { a: usize, b: usize },
}

impl GateOp {
    fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            GateOp::Phase { qubit, .. }
            | GateOp::Rotation { qubit, .. }
            | GateOp::Hadamard { qubit } => (qubit, None),
            GateOp::ControlledPhase { control, target, .. } => (control, Some(target)),
            GateOp::Swap { a, b } => (a, Some(b)),
        }
    }

    /// The inverse gate.
    pub fn inverse(&self) -> GateOp {
        match *self {
            GateOp::Phase { qubit, theta } => GateOp::Phase { qubit, theta: -theta },
            GateOp::Rotation { qubit, theta } => GateOp::Rotation { qubit, theta: -theta },
            GateOp::ControlledPhase { control, target, theta } => {
                GateOp::ControlledPhase { control, target, theta: -theta }
            }
            g @ (GateOp::Hadamard { .. } | GateOp::Swap { .. }) => g,
        }
    }

    /// Same gate with every qubit index moved up by `offset`.
    pub fn shifted(&self, offset: usize) -> GateOp {
        match *self {
            GateOp::Phase { qubit, theta } => GateOp::Phase { qubit: qubit + offset, theta },
            GateOp::Rotation { qubit, theta } => GateOp::Rotation { qubit: qubit + offset, theta },
            GateOp::Hadamard { qubit } => GateOp::Hadamard { qubit: qubit + offset },
            GateOp::ControlledPhase { control, target, theta } => GateOp::ControlledPhase {
                control: control + offset,
                target: target + offset,
                theta,
            },
            GateOp::Swap { a, b } => GateOp::Swap { a: a + offset, b: b + offset },
        }
    }
}

impl fmt::Display for GateOp {
    /// One line of the circuit dump format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            GateOp::Phase { qubit, theta } => write!(f, "phase,{qubit},{theta:?}"),
            GateOp::Rotation { qubit, theta } => write!(f, "rotation,{qubit},{theta:?}"),
            GateOp::Hadamard { qubit } => write!(f, "hadamard,{qubit}"),
            GateOp::ControlledPhase { control, target, theta } => {
                write!(f, "controlled_phase,{control},{target},{theta:?}")
            }
            GateOp::Swap { a, b } => write!(f, "swap,{a},{b}"),
        }
    }
}

/// Gate counts of a circuit, by kind.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CircuitStats {
    pub gate_count: usize,
    pub phase: usize,
    pub rotation: usize,
    pub hadamard: usize,
    pub controlled_phase: usize,
    pub swap: usize,
}

impl CircuitStats {
    pub fn of(gates: &[GateOp]) -> Self {
        let mut stats = CircuitStats::default();
        for g in gates {
            match g {
                GateOp::Phase { .. } => stats.phase += 1,
                GateOp::Rotation { .. } => stats.rotation += 1,
                GateOp::Hadamard { .. } => stats.hadamard += 1,
                GateOp::ControlledPhase { .. } => stats.controlled_phase += 1,
                GateOp::Swap { .. } => stats.swap += 1,
            }
        }
        stats.gate_count = gates.len();
        stats
    }

    /// Gates excluding the bit-reversal swaps.
    pub fn without_swaps(&self) -> usize {
        self.gate_count - self.swap
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Inverse => -1.0,
        }
    }
}

/// Applies one gate in place.
pub fn apply_gate(state: &mut StateVector, gate: &GateOp) -> Result<()> {
    let total = state.num_qubits();
    let (q0, q1) = gate.qubits();
    for q in std::iter::once(q0).chain(q1) {
        if q >= total {
            return Err(Error::QubitOutOfRange { index: q, total });
        }
    }
    if q1 == Some(q0) {
        return Err(Error::Domain(format!("two-qubit gate on repeated qubit {q0}")));
    }
    let amps = state.amplitudes_mut();
    match *gate {
        GateOp::Phase { qubit, theta } => {
            let w = Complex64::from_polar(1.0, theta);
            let bit = 1 << qubit;
            for (i, a) in amps.iter_mut().enumerate() {
                if i & bit != 0 {
                    *a *= w;
                }
            }
        }
        GateOp::Rotation { qubit, theta } => {
            let (s, c) = theta.sin_cos();
            for_each_pair(amps, qubit, |a0, a1| (a0 * c - a1 * s, a0 * s + a1 * c));
        }
        GateOp::Hadamard { qubit } => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            for_each_pair(amps, qubit, |a0, a1| ((a0 + a1) * h, (a0 - a1) * h));
        }
        GateOp::ControlledPhase { control, target, theta } => {
            let w = Complex64::from_polar(1.0, theta);
            let mask = (1 << control) | (1 << target);
            for (i, a) in amps.iter_mut().enumerate() {
                if i & mask == mask {
                    *a *= w;
                }
            }
        }
        GateOp::Swap { a, b } => {
            let (ba, bb) = (1 << a, 1 << b);
            for i in 0..amps.len() {
                if i & ba != 0 && i & bb == 0 {
                    amps.swap(i, (i ^ ba) | bb);
                }
            }
        }
    }
    Ok(())
}

/// Calls `f(a0, a1)` for every amplitude pair differing only in `qubit`.
fn for_each_pair<F>(amps: &mut [Complex64], qubit: usize, f: F)
where
    F: Fn(Complex64, Complex64) -> (Complex64, Complex64),
{
    let bit = 1 << qubit;
    for i in 0..amps.len() {
        if i & bit == 0 {
            let (n0, n1) = f(amps[i], amps[i | bit]);
            amps[i] = n0;
            amps[i | bit] = n1;
        }
    }
}

pub fn apply_circuit(state: &mut StateVector, gates: &[GateOp]) -> Result<()> {
    gates.iter().try_for_each(|g| apply_gate(state, g))
}

/// Gate-for-gate inverse of a circuit.
pub fn inverse_circuit(gates: &[GateOp]) -> Vec<GateOp> {
    gates.iter().rev().map(GateOp::inverse).collect()
}

/// Forward QFT on qubits 0..l, qubit 0 the least significant.
///
/// Each qubit, from the most significant down, gets a Hadamard followed by
/// controlled phases π/2^d from the d-th lower qubit; the bit-reversal swaps
/// come last. That is l Hadamards, l(l−1)/2 controlled phases and ⌊l/2⌋ swaps.
pub fn qft_circuit(l: usize) -> Result<Vec<GateOp>> {
    if l < 1 {
        return Err(Error::Domain("QFT needs at least one qubit".into()));
    }
    let mut gates = Vec::with_capacity(l * (l + 1) / 2 + l / 2);
    for target in (0..l).rev() {
        gates.push(GateOp::Hadamard { qubit: target });
        for control in (0..target).rev() {
            let theta = PI / (1u64 << (target - control)) as f64;
            gates.push(GateOp::ControlledPhase { control, target, theta });
        }
    }
    for i in 0..l / 2 {
        gates.push(GateOp::Swap { a: i, b: l - 1 - i });
    }
    Ok(gates)
}

/// QFT circuit for a named register in global qubit indices.
pub fn register_qft_circuit(
    state: &StateVector,
    register: &str,
    direction: Direction,
) -> Result<Vec<GateOp>> {
    let reg = state.layout().register(register)?;
    let forward: Vec<GateOp> =
        qft_circuit(reg.qubits())?.iter().map(|g| g.shifted(reg.offset())).collect();
    Ok(match direction {
        Direction::Forward => forward,
        Direction::Inverse => inverse_circuit(&forward),
    })
}

/// Gate-level QFT of one register, identity on the others.
pub fn apply_qft(state: &mut StateVector, register: &str, direction: Direction) -> Result<()> {
    let gates = register_qft_circuit(state, register, direction)?;
    apply_circuit(state, &gates)
}

/// Reference O(N²) discrete Fourier transform of one register with kernel
/// e^{±2πi n n'/N}/√N.
pub fn dft_direct(state: &mut StateVector, register: &str, direction: Direction) -> Result<()> {
    let n = state.layout().register(register)?.dim();
    let sign = direction.sign();
    let twiddle: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0 / (n as f64).sqrt(), sign * 2.0 * PI * k as f64 / n as f64))
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    state.for_each_register_slice(register, |_, slice| {
        for (y, o) in out.iter_mut().enumerate() {
            *o = slice.iter().enumerate().map(|(x, a)| twiddle[(x * y) % n] * a).sum();
        }
        slice.copy_from_slice(&out);
    })
}

/// Writes one gate per line in the `kind,args...` dump format.
pub fn write_circuit<W: Write>(gates: &[GateOp], mut out: W) -> Result<()> {
    for g in gates {
        writeln!(out, "{g}")?;
    }
    Ok(())
}

pub fn read_circuit<R: BufRead>(input: R) -> Result<Vec<GateOp>> {
    let mut gates = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        gates.push(parse_gate(line).map_err(|msg| Error::Parse { line: n + 1, msg })?);
    }
    Ok(gates)
}

fn parse_gate(line: &str) -> std::result::Result<GateOp, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    let q = |i: usize| -> std::result::Result<usize, String> {
        fields.get(i).and_then(|f| f.parse().ok()).ok_or_else(|| format!("bad qubit in '{line}'"))
    };
    let angle = |i: usize| -> std::result::Result<f64, String> {
        fields.get(i).and_then(|f| f.parse().ok()).ok_or_else(|| format!("bad angle in '{line}'"))
    };
    let (kind, arity) = match fields[0] {
        "phase" => (GateOp::Phase { qubit: q(1)?, theta: angle(2)? }, 3),
        "rotation" => (GateOp::Rotation { qubit: q(1)?, theta: angle(2)? }, 3),
        "hadamard" => (GateOp::Hadamard { qubit: q(1)? }, 2),
        "controlled_phase" => {
            (GateOp::ControlledPhase { control: q(1)?, target: q(2)?, theta: angle(3)? }, 4)
        }
        "swap" => (GateOp::Swap { a: q(1)?, b: q(2)? }, 3),
        other => return Err(format!("unknown gate kind '{other}'")),
    };
    if fields.len() != arity {
        return Err(format!("wrong field count in '{line}'"));
    }
    Ok(kind)
}
