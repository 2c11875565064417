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

//! Diagonal phase transforms |n⟩ → e^{icF(n)}|n⟩.
//!
//! `F` is a fixed-point lookup table over one to three registers. Two routes
//! apply it: a direct diagonal multiply, and the ancilla route that writes
//! `F(n)` into a cleared register, phases that register one qubit at a time
//! and then uncomputes it.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::{apply_circuit, GateOp};
use crate::state::{RegisterLayout, StateVector};

/// Largest number of entries a phase table may hold.
pub const MAX_TABLE_ENTRIES: usize = 1 << 20;

/// F(n) over up to three registers in fixed point, plus the scale `c`.
///
/// The real value at a domain index is `raw / 2^b_frac`. Domain indices
/// follow the layout convention: the first register is least significant.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseTable {
    raw: Vec<i64>,
    dims: Vec<usize>,
    scale: f64,
    b_frac: u32,
}

impl PhaseTable {
    pub const DEFAULT_FRAC_BITS: u32 = 24;

    /// Table from raw fixed-point integers.
    pub fn from_fixed(dims: &[usize], raw: Vec<i64>, scale: f64, b_frac: u32) -> Result<Self> {
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::Domain(format!("phase table arity {} not in 1..=3", dims.len())));
        }
        let entries: usize = dims.iter().product();
        if entries > MAX_TABLE_ENTRIES {
            return Err(Error::Domain(format!("phase table with {entries} entries is too large")));
        }
        if raw.len() != entries {
            return Err(Error::Domain(format!(
                "phase table has {} values, domain needs {entries}",
                raw.len()
            )));
        }
        if b_frac > 52 || !scale.is_finite() {
            return Err(Error::Domain("invalid phase table scale or fractional bits".into()));
        }
        Ok(PhaseTable { raw, dims: dims.to_vec(), scale, b_frac })
    }

    /// Rounds real values to `b_frac` fractional bits.
    pub fn from_real(dims: &[usize], values: &[f64], scale: f64, b_frac: u32) -> Result<Self> {
        let unit = (b_frac as f64).exp2();
        let raw = values
            .iter()
            .map(|&v| {
                let r = (v * unit).round();
                if !r.is_finite() || r.abs() >= 9.0e18 {
                    Err(Error::Domain(format!("value {v} does not fit the fixed-point range")))
                } else {
                    Ok(r as i64)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_fixed(dims, raw, scale, b_frac)
    }

    /// Samples `f` at every domain point; `f` receives one value per register.
    pub fn from_fn<F>(dims: &[usize], scale: f64, b_frac: u32, f: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> f64,
    {
        let entries: usize = dims.iter().product();
        let mut point = vec![0; dims.len()];
        let values: Vec<f64> = (0..entries)
            .map(|index| {
                let mut rest = index;
                for (p, &d) in point.iter_mut().zip(dims) {
                    *p = rest % d;
                    rest /= d;
                }
                f(&point)
            })
            .collect();
        Self::from_real(dims, &values, scale, b_frac)
    }

    pub fn arity(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn frac_bits(&self) -> u32 {
        self.b_frac
    }

    pub fn raw(&self) -> &[i64] {
        &self.raw
    }

    /// F at a domain index, at fixed-point resolution.
    pub fn value(&self, index: usize) -> f64 {
        self.raw[index] as f64 / (self.b_frac as f64).exp2()
    }

    /// Phase angle c·F at a domain index.
    pub fn angle(&self, index: usize) -> f64 {
        self.scale * self.value(index)
    }

    /// Smallest ancilla width holding every raw value as a signed integer
    /// with |raw| < 2^(bits−1).
    pub fn required_ancilla_bits(&self) -> usize {
        let max = self.raw.iter().map(|r| r.unsigned_abs()).max().unwrap_or(0);
        (65 - max.leading_zeros() as usize).max(1)
    }

    /// Text form: `# arity=<k> b_frac=<b> c=<real>` then `index,value`
    /// lines holding the raw fixed-point integers.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# arity={} b_frac={} c={:?}", self.arity(), self.b_frac, self.scale)?;
        for (i, r) in self.raw.iter().enumerate() {
            writeln!(out, "{i},{r}")?;
        }
        Ok(())
    }

    /// Reads the text form; `dims` fixes the domain register sizes.
    pub fn read<R: BufRead>(input: R, dims: &[usize]) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line?,
            None => return Err(Error::Parse { line: 1, msg: "empty phase table".into() }),
        };
        let (arity, b_frac, scale) = parse_table_header(&header)?;
        if arity != dims.len() {
            return Err(Error::ArityMismatch { table: arity, registers: dims.len() });
        }
        let entries: usize = dims.iter().product();
        let mut raw = vec![None; entries];
        for (n, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = || Error::Parse { line: n + 1, msg: format!("bad row '{line}'") };
            let (i, v) = line.split_once(',').ok_or_else(parse_err)?;
            let i: usize = i.trim().parse().map_err(|_| parse_err())?;
            let v: i64 = v.trim().parse().map_err(|_| parse_err())?;
            let slot = raw.get_mut(i).ok_or_else(parse_err)?;
            *slot = Some(v);
        }
        let raw = raw
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| Error::Parse { line: 0, msg: format!("missing index {i}") })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_fixed(dims, raw, scale, b_frac)
    }
}

fn parse_table_header(header: &str) -> Result<(usize, u32, f64)> {
    let err = |msg: &str| Error::Parse { line: 1, msg: msg.to_string() };
    let body = header.trim().strip_prefix('#').ok_or_else(|| err("missing '#' header"))?;
    let (mut arity, mut b_frac, mut scale) = (None, None, None);
    for field in body.split_whitespace() {
        match field.split_once('=') {
            Some(("arity", v)) => arity = v.parse().ok(),
            Some(("b_frac", v)) => b_frac = v.parse().ok(),
            Some(("c", v)) => scale = v.parse().ok(),
            _ => return Err(err(&format!("unexpected header field '{field}'"))),
        }
    }
    match (arity, b_frac, scale) {
        (Some(a), Some(b), Some(c)) => Ok((a, b, c)),
        _ => Err(err("header needs arity=, b_frac= and c=")),
    }
}

/// Domain index of every global basis index for the given registers.
pub(crate) fn domain_indices(
    layout: &RegisterLayout,
    registers: &[&str],
    table: &PhaseTable,
) -> Result<Vec<usize>> {
    if registers.len() != table.arity() {
        return Err(Error::ArityMismatch { table: table.arity(), registers: registers.len() });
    }
    let regs = registers
        .iter()
        .map(|name| layout.register(name).cloned())
        .collect::<Result<Vec<_>>>()?;
    for (i, (reg, &dim)) in regs.iter().zip(table.dims()).enumerate() {
        if reg.dim() != dim {
            return Err(Error::LayoutMismatch(format!(
                "register '{}' has {} values, table axis {i} has {dim}",
                reg.name(),
                reg.dim()
            )));
        }
        if regs[..i].iter().any(|r| r.name() == reg.name()) {
            return Err(Error::Domain(format!("register '{}' listed twice", reg.name())));
        }
    }
    Ok((0..layout.dim())
        .map(|index| {
            let mut stride = 1;
            regs.iter().fold(0, |acc, reg| {
                let d = acc + reg.value(index) * stride;
                stride *= reg.dim();
                d
            })
        })
        .collect())
}

/// Multiplies each amplitude by e^{icF(n)}.
pub fn apply_phase_direct(state: &mut StateVector, registers: &[&str], table: &PhaseTable) -> Result<()> {
    let domain = domain_indices(state.layout(), registers, table)?;
    let phases: Vec<Complex64> =
        (0..table.len()).map(|d| Complex64::from_polar(1.0, table.angle(d))).collect();
    for (a, d) in state.amplitudes_mut().iter_mut().zip(domain) {
        *a *= phases[d];
    }
    Ok(())
}

/// The same transform through a cleared ancilla register:
/// |n, 0⟩ → |n, F(n)⟩, phase the ancilla bit by bit, |n, F(n)⟩ → |n, 0⟩.
///
/// The ancilla holds `F` in two's complement, so it must satisfy
/// |raw F| < 2^(width−1).
pub fn apply_phase_ancilla(
    state: &mut StateVector,
    registers: &[&str],
    table: &PhaseTable,
    ancilla: &str,
) -> Result<()> {
    if registers.contains(&ancilla) {
        return Err(Error::Domain(format!("ancilla '{ancilla}' is also a domain register")));
    }
    let domain = domain_indices(state.layout(), registers, table)?;
    let anc = state.layout().register(ancilla)?.clone();
    state.require_cleared(ancilla)?;
    let width = anc.qubits();
    let limit = 1i128 << (width - 1);
    if let Some(&bad) = table.raw().iter().find(|&&r| (r as i128).abs() >= limit) {
        return Err(Error::PhaseOverflow { value: bad, bits: width });
    }
    let mask = anc.dim() as u64 - 1;
    let encoded: Vec<usize> = table.raw().iter().map(|&r| (r as u64 & mask) as usize).collect();

    let load = |state: &mut StateVector| {
        let amps = state.amplitudes();
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (index, a) in amps.iter().enumerate() {
            let target = anc.with_value(index, anc.value(index) ^ encoded[domain[index]]);
            out[target] = *a;
        }
        state.amplitudes_mut().copy_from_slice(&out);
    };

    load(state);
    let unit = table.scale() / (table.frac_bits() as f64).exp2();
    apply_circuit(state, &signed_bitwise_phase_circuit(anc.offset(), width, unit))?;
    load(state);
    Ok(())
}

/// |v⟩ → e^{i c v}|v⟩ for a two's-complement register value v: qubit j gets
/// phase c·2^j, except the sign qubit which gets −c·2^(width−1).
fn signed_bitwise_phase_circuit(offset: usize, width: usize, c: f64) -> Vec<GateOp> {
    (0..width)
        .map(|j| {
            let weight = (j as f64).exp2();
            let theta = if j + 1 == width && width > 1 { -c * weight } else { c * weight };
            GateOp::Phase { qubit: offset + j, theta }
        })
        .collect()
}

/// The l single-qubit phases realizing |n⟩ → e^{icn}|n⟩ on a register.
pub fn bitwise_phase_circuit(state: &StateVector, register: &str, c: f64) -> Result<Vec<GateOp>> {
    let reg = state.layout().register(register)?;
    Ok((0..reg.qubits())
        .map(|j| GateOp::Phase { qubit: reg.offset() + j, theta: c * (j as f64).exp2() })
        .collect())
}

/// |n⟩ → e^{icn}|n⟩, one phase gate per qubit.
pub fn bitwise_phase(state: &mut StateVector, register: &str, c: f64) -> Result<()> {
    let gates = bitwise_phase_circuit(state, register, c)?;
    apply_circuit(state, &gates)
}
