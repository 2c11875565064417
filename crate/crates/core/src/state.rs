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

//! Joint state vector over named qubit registers.
//!
//! Bit order: inside a register, qubit 0 is the least-significant bit of the
//! register value. Registers are concatenated in layout order, the first
//! register occupying the least-significant bits of the global basis index.
//!
//! Sampling uses ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded through
//! `SeedableRng::seed_from_u64`; per-shot seeds are derived by selecting the
//! ChaCha stream equal to the shot index. Both are value-stable across
//! platforms.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Largest total qubit count a state vector may span (2^26 amplitudes, 1 GiB).
pub const MAX_QUBITS: usize = 26;

/// Tolerance on the unit-norm invariant.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Probability mass below which a register is treated as exactly unpopulated.
pub const CLEAR_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegisterRole {
    System,
    Ancilla,
    Pointer,
    Bath,
}

impl RegisterRole {
    pub fn as_str(self) -> &'static str {
        match self {
            RegisterRole::System => "system",
            RegisterRole::Ancilla => "ancilla",
            RegisterRole::Pointer => "pointer",
            RegisterRole::Bath => "bath",
        }
    }
}

impl FromStr for RegisterRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "system" => Ok(RegisterRole::System),
            "ancilla" => Ok(RegisterRole::Ancilla),
            "pointer" => Ok(RegisterRole::Pointer),
            "bath" => Ok(RegisterRole::Bath),
            other => Err(Error::Domain(format!("unknown register role '{other}'"))),
        }
    }
}

/// A named group of qubits inside a [`RegisterLayout`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    name: String,
    qubits: usize,
    role: RegisterRole,
    offset: usize,
}

impl Register {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn role(&self) -> RegisterRole {
        self.role
    }

    /// Global index of the register's qubit 0.
    pub fn offset(&self) -> usize {
        self.offset
    }

    /// Number of values the register can hold, 2^qubits.
    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    fn mask(&self) -> usize {
        self.dim() - 1
    }

    /// Value of this register inside the global basis index `index`.
    #[inline]
    pub fn value(&self, index: usize) -> usize {
        (index >> self.offset) & self.mask()
    }

    /// Global index with this register's value replaced by `value`.
    #[inline]
    pub fn with_value(&self, index: usize, value: usize) -> usize {
        (index & !(self.mask() << self.offset)) | ((value & self.mask()) << self.offset)
    }

    /// Global qubit index of the register's qubit `local`.
    pub fn qubit(&self, local: usize) -> Result<usize> {
        if local >= self.qubits {
            return Err(Error::QubitOutOfRange { index: local, total: self.qubits });
        }
        Ok(self.offset + local)
    }
}

/// Ordered partition of the qubits into named registers.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    total: usize,
}

impl RegisterLayout {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a register above all existing ones (more significant bits).
    pub fn with(mut self, name: &str, qubits: usize, role: RegisterRole) -> Result<Self> {
        self.push(name, qubits, role)?;
        Ok(self)
    }

    pub fn single(name: &str, qubits: usize, role: RegisterRole) -> Result<Self> {
        Self::new().with(name, qubits, role)
    }

    fn push(&mut self, name: &str, qubits: usize, role: RegisterRole) -> Result<()> {
        if qubits == 0 {
            return Err(Error::Domain(format!("register '{name}' needs at least one qubit")));
        }
        if name.is_empty() || name.contains([':', ';', ',', ' ']) {
            return Err(Error::Domain(format!("invalid register name '{name}'")));
        }
        if self.registers.iter().any(|r| r.name == name) {
            return Err(Error::DuplicateRegister(name.to_string()));
        }
        let total = self.total + qubits;
        if total > MAX_QUBITS {
            return Err(Error::TooManyQubits { requested: total, max: MAX_QUBITS });
        }
        self.registers.push(Register { name: name.to_string(), qubits, role, offset: self.total });
        self.total = total;
        Ok(())
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        self.registers
            .iter()
            .find(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn total_qubits(&self) -> usize {
        self.total
    }

    /// Hilbert-space dimension 2^L.
    pub fn dim(&self) -> usize {
        1 << self.total
    }

    /// Layout of `self` followed by the registers of `upper`.
    pub fn concat(&self, upper: &RegisterLayout) -> Result<RegisterLayout> {
        let mut out = self.clone();
        for r in &upper.registers {
            out.push(&r.name, r.qubits, r.role)?;
        }
        Ok(out)
    }

    /// Layout with register `name` removed; the remaining registers keep their order.
    pub fn without(&self, name: &str) -> Result<RegisterLayout> {
        self.register(name)?;
        let mut out = RegisterLayout::new();
        for r in self.registers.iter().filter(|r| r.name != name) {
            out.push(&r.name, r.qubits, r.role)?;
        }
        Ok(out)
    }
}

impl fmt::Display for RegisterLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.registers.iter().map(|r| format!("{}:{}", r.name, r.qubits)).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Euclidean norm of an amplitude slice.
pub fn amplitude_norm(amplitudes: &[Complex64]) -> f64 {
    amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨a|b⟩ over raw amplitude slices of equal length.
pub fn inner_product(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Unit-norm amplitude vector over the joint basis of a [`RegisterLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    layout: RegisterLayout,
}

impl StateVector {
    /// Computational basis state |index⟩.
    pub fn new_basis_state(layout: RegisterLayout, index: usize) -> Result<Self> {
        check_layout(&layout)?;
        let dim = layout.dim();
        if index >= dim {
            return Err(Error::Domain(format!(
                "basis index {index} >= 2^{}",
                layout.total_qubits()
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amplitudes, layout })
    }

    /// Basis state with each named register at the given value (others at 0).
    pub fn from_register_values(layout: RegisterLayout, values: &[(&str, usize)]) -> Result<Self> {
        let mut index = 0;
        for &(name, value) in values {
            let reg = layout.register(name)?;
            if value >= reg.dim() {
                return Err(Error::Domain(format!("value {value} does not fit register '{name}'")));
            }
            index = reg.with_value(index, value);
        }
        Self::new_basis_state(layout, index)
    }

    /// Wraps amplitudes that already have unit norm (within [`NORM_TOLERANCE`]).
    pub fn from_amplitudes(layout: RegisterLayout, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_layout(&layout)?;
        if amplitudes.len() != layout.dim() {
            return Err(Error::LayoutMismatch(format!(
                "{} amplitudes for a {}-qubit layout",
                amplitudes.len(),
                layout.total_qubits()
            )));
        }
        let norm = amplitude_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Domain(format!("amplitudes have norm {norm}, expected 1")));
        }
        Ok(StateVector { amplitudes, layout })
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn normalized(layout: RegisterLayout, mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitude_norm(&amplitudes);
        if norm < 1e-150 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Self::from_amplitudes(layout, amplitudes)
    }

    /// Tensor product; the registers of `upper` become the more significant ones.
    pub fn tensor(&self, upper: &StateVector) -> Result<StateVector> {
        let layout = self.layout.concat(&upper.layout)?;
        let mut amplitudes = Vec::with_capacity(layout.dim());
        for hi in &upper.amplitudes {
            amplitudes.extend(self.amplitudes.iter().map(|lo| lo * hi));
        }
        Ok(StateVector { amplitudes, layout })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        amplitude_norm(&self.amplitudes)
    }

    pub fn num_qubits(&self) -> usize {
        self.layout.total_qubits()
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same_layout(other)?;
        Ok(inner_product(&self.amplitudes, &other.amplitudes))
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Largest per-amplitude deviation |a_n − b_n|.
    pub fn max_deviation(&self, other: &StateVector) -> Result<f64> {
        self.check_same_layout(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    fn check_same_layout(&self, other: &StateVector) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch(format!("[{}] vs [{}]", self.layout, other.layout)));
        }
        Ok(())
    }

    /// Marginal probability of every value of a register, summed exactly.
    pub fn register_probabilities(&self, name: &str) -> Result<Vec<f64>> {
        let reg = self.layout.register(name)?;
        let mut probs = vec![0.0; reg.dim()];
        for (index, a) in self.amplitudes.iter().enumerate() {
            probs[reg.value(index)] += a.norm_sqr();
        }
        Ok(probs)
    }

    /// Probability mass sitting on register values other than 0.
    pub fn excited_mass(&self, name: &str) -> Result<f64> {
        let probs = self.register_probabilities(name)?;
        Ok(probs[1..].iter().sum())
    }

    pub(crate) fn require_cleared(&self, name: &str) -> Result<()> {
        if self.excited_mass(name)? > CLEAR_TOLERANCE {
            return Err(Error::NotCleared(name.to_string()));
        }
        Ok(())
    }

    /// Normalized projection onto `register == outcome`.
    pub fn project(&self, name: &str, outcome: usize) -> Result<StateVector> {
        let reg = self.layout.register(name)?;
        if outcome >= reg.dim() {
            return Err(Error::Domain(format!("outcome {outcome} out of range for '{name}'")));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, &a)| if reg.value(i) == outcome { a } else { Complex64::new(0.0, 0.0) })
            .collect();
        StateVector::normalized(self.layout.clone(), amplitudes)
    }

    /// Projective measurement of one register, sampled with a ChaCha8 stream seeded by `seed`.
    pub fn measure_register(&self, name: &str, seed: u64) -> Result<MeasurementSample> {
        let probs = self.register_probabilities(name)?;
        let mut rng = seeded_rng(seed);
        let outcome = sample_index(&probs, &mut rng);
        let post_state = self.project(name, outcome)?;
        Ok(MeasurementSample { register_name: name.to_string(), outcome, post_state })
    }

    /// Removes a register that holds the definite value `value`, keeping the
    /// amplitudes of the remaining registers.
    pub fn factor_out(&self, name: &str, value: usize) -> Result<StateVector> {
        let reg = self.layout.register(name)?.clone();
        let layout = self.layout.without(name)?;
        let mut amplitudes = Vec::with_capacity(layout.dim());
        let mut dropped = 0.0;
        for (index, a) in self.amplitudes.iter().enumerate() {
            if reg.value(index) == value {
                amplitudes.push(*a);
            } else {
                dropped += a.norm_sqr();
            }
        }
        if dropped > CLEAR_TOLERANCE {
            return Err(Error::Domain(format!(
                "register '{name}' is not in the definite value {value} (mass {dropped} elsewhere)"
            )));
        }
        StateVector::from_amplitudes(layout, amplitudes)
    }

    /// Multiplies every amplitude by `phase(register value)`.
    pub(crate) fn apply_register_diagonal<F>(&mut self, name: &str, phase: F) -> Result<()>
    where
        F: Fn(usize) -> Complex64,
    {
        let reg = self.layout.register(name)?.clone();
        let table: Vec<Complex64> = (0..reg.dim()).map(phase).collect();
        for (index, a) in self.amplitudes.iter_mut().enumerate() {
            *a *= table[reg.value(index)];
        }
        Ok(())
    }

    /// Moves the amplitude of register value `v` to value `map(v)`; `map` must be a bijection.
    pub(crate) fn permute_register<F>(&mut self, name: &str, map: F) -> Result<()>
    where
        F: Fn(usize) -> usize,
    {
        let reg = self.layout.register(name)?.clone();
        let image: Vec<usize> = (0..reg.dim()).map(map).collect();
        let mut seen = vec![false; reg.dim()];
        for &v in &image {
            if v >= reg.dim() || std::mem::replace(&mut seen[v], true) {
                return Err(Error::Domain("register map is not a permutation".into()));
            }
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (index, a) in self.amplitudes.iter().enumerate() {
            out[reg.with_value(index, image[reg.value(index)])] = *a;
        }
        self.amplitudes = out;
        Ok(())
    }

    /// Calls `f` on the register's amplitude slice for every value of the
    /// other registers (packed into `rest`); `f` may rewrite the slice.
    pub(crate) fn for_each_register_slice<F>(&mut self, name: &str, mut f: F) -> Result<()>
    where
        F: FnMut(usize, &mut [Complex64]),
    {
        let reg = self.layout.register(name)?.clone();
        let rest = self.amplitudes.len() / reg.dim();
        let mut buf = vec![Complex64::new(0.0, 0.0); reg.dim()];
        for r in 0..rest {
            let base = spread_rest(r, &reg);
            for (v, b) in buf.iter_mut().enumerate() {
                *b = self.amplitudes[base | (v << reg.offset)];
            }
            f(r, &mut buf);
            for (v, b) in buf.iter().enumerate() {
                self.amplitudes[base | (v << reg.offset)] = *b;
            }
        }
        Ok(())
    }

    /// Writes the text dump: a `# L=<int> registers=<name:qubits;...>` header
    /// followed by one `index,re,im` line per basis state.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# L={} registers={}", self.layout.total_qubits(), self.layout)?;
        for (i, a) in self.amplitudes.iter().enumerate() {
            writeln!(out, "{},{:?},{:?}", i, a.re, a.im)?;
        }
        Ok(())
    }

    /// Reads a dump written by [`StateVector::write_dump`]; missing indices
    /// are zero and all registers get the `system` role.
    pub fn read_dump<R: BufRead>(input: R) -> Result<StateVector> {
        let mut lines = input.lines().enumerate();
        let (_, header) =
            lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
        let layout = parse_dump_header(&header?)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); layout.dim()];
        for (n, line) in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (index, values) = parse_indexed_row(line, n + 1)?;
            if values.len() != 2 {
                return Err(Error::Parse { line: n + 1, msg: "expected index,re,im".into() });
            }
            if index >= amplitudes.len() {
                return Err(Error::Parse { line: n + 1, msg: format!("index {index} out of range") });
            }
            amplitudes[index] = Complex64::new(values[0], values[1]);
        }
        StateVector::from_amplitudes(layout, amplitudes)
    }
}

fn check_layout(layout: &RegisterLayout) -> Result<()> {
    if layout.total_qubits() == 0 {
        return Err(Error::Domain("layout has no qubits".into()));
    }
    Ok(())
}

/// Inserts the zero bits of `reg` into the packed index `rest`.
fn spread_rest(rest: usize, reg: &Register) -> usize {
    let low = rest & ((1 << reg.offset) - 1);
    let high = rest >> reg.offset;
    low | (high << (reg.offset + reg.qubits))
}

fn parse_dump_header(header: &str) -> Result<RegisterLayout> {
    let err = |msg: &str| Error::Parse { line: 1, msg: msg.to_string() };
    let body = header.trim().strip_prefix('#').ok_or_else(|| err("missing '#' header"))?;
    let mut total = None;
    let mut registers = None;
    for field in body.split_whitespace() {
        if let Some(v) = field.strip_prefix("L=") {
            total = Some(v.parse::<usize>().map_err(|_| err("bad L"))?);
        } else if let Some(v) = field.strip_prefix("registers=") {
            registers = Some(v.to_string());
        }
    }
    let total = total.ok_or_else(|| err("header lacks L="))?;
    let registers = registers.ok_or_else(|| err("header lacks registers="))?;
    let mut layout = RegisterLayout::new();
    for spec in registers.split(';').filter(|s| !s.is_empty()) {
        let mut parts = spec.split(':');
        let name = parts.next().ok_or_else(|| err("bad register entry"))?;
        let qubits = parts
            .next()
            .and_then(|q| q.parse::<usize>().ok())
            .ok_or_else(|| err("bad register qubit count"))?;
        layout = layout.with(name, qubits, RegisterRole::System)?;
    }
    if layout.total_qubits() != total {
        return Err(err("register qubits do not sum to L"));
    }
    Ok(layout)
}

/// Parses `index,v1,v2,...` into the index and the float values.
pub(crate) fn parse_indexed_row(line: &str, line_no: usize) -> Result<(usize, Vec<f64>)> {
    let mut fields = line.split(',').map(str::trim);
    let index = fields
        .next()
        .and_then(|f| f.parse::<usize>().ok())
        .ok_or_else(|| Error::Parse { line: line_no, msg: format!("bad index in '{line}'") })?;
    let values = fields
        .map(|f| {
            f.parse::<f64>()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("bad number '{f}'") })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((index, values))
}

/// Projective measurement result.
#[derive(Clone, Debug)]
pub struct MeasurementSample {
    pub register_name: String,
    pub outcome: usize,
    pub post_state: StateVector,
}

/// The simulator's reproducible generator.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sub-seed for item `index` of a seeded batch (shots, trials, reset rounds).
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut rng = seeded_rng(seed);
    rng.set_stream(index);
    rng.next_u64()
}

/// Draws an index with probability proportional to `weights` by inverting
/// the cumulative sum with one uniform draw.
pub fn sample_index<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last_nonzero = i;
        if target < acc {
            return i;
        }
    }
    last_nonzero
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn layout(qubits: usize) -> RegisterLayout {
        RegisterLayout::single("q", qubits, RegisterRole::System).unwrap()
    }

    fn plus() -> StateVector {
        StateVector::from_amplitudes(layout(1), vec![c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)])
            .unwrap()
    }

    #[test]
    fn basis_states() {
        let s = StateVector::new_basis_state(layout(3), 0).unwrap();
        let mut expected = [c(0.0, 0.0); 8];
        expected[0] = c(1.0, 0.0);
        assert_eq!(s.amplitudes(), &expected[..]);
        assert_eq!(s.norm(), 1.0);

        let s = StateVector::new_basis_state(layout(1), 1).unwrap();
        assert_eq!(s.amplitudes(), &[c(0.0, 0.0), c(1.0, 0.0)]);

        assert!(matches!(StateVector::new_basis_state(layout(2), 4), Err(Error::Domain(_))));
    }

    #[test]
    fn norms() {
        assert_eq!(StateVector::new_basis_state(layout(2), 3).unwrap().norm(), 1.0);
        assert_eq!(amplitude_norm(&[c(0.0, 0.0); 4]), 0.0);
        assert!((amplitude_norm(&[c(0.6, 0.0), c(0.0, 0.8)]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fidelities() {
        let zero = StateVector::new_basis_state(layout(1), 0).unwrap();
        let one = StateVector::new_basis_state(layout(1), 1).unwrap();
        assert_eq!(zero.fidelity(&zero).unwrap(), 1.0);
        assert_eq!(zero.fidelity(&one).unwrap(), 0.0);
        assert!((zero.fidelity(&plus()).unwrap() - 0.5).abs() < 1e-15);
        let other = StateVector::new_basis_state(layout(2), 0).unwrap();
        assert!(matches!(zero.fidelity(&other), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn layout_rules() {
        let l = RegisterLayout::new()
            .with("a", 3, RegisterRole::System)
            .unwrap()
            .with("b", 2, RegisterRole::Ancilla)
            .unwrap();
        assert_eq!(l.total_qubits(), 5);
        assert_eq!(l.register("b").unwrap().offset(), 3);
        assert_eq!(l.to_string(), "a:3;b:2");
        assert!(matches!(
            l.clone().with("a", 1, RegisterRole::Bath),
            Err(Error::DuplicateRegister(_))
        ));
        assert!(RegisterLayout::single("z", 0, RegisterRole::System).is_err());
        assert!(matches!(
            RegisterLayout::single("big", 27, RegisterRole::System),
            Err(Error::TooManyQubits { .. })
        ));
        assert!(matches!(l.register("nope"), Err(Error::UnknownRegister(_))));
    }

    #[test]
    fn deterministic_register_measurement() {
        let s = StateVector::new_basis_state(layout(3), 5).unwrap();
        for seed in [0, 1, 99, u64::MAX] {
            let m = s.measure_register("q", seed).unwrap();
            assert_eq!(m.outcome, 5);
            assert_eq!(m.post_state, s);
        }
        assert!(matches!(s.measure_register("x", 0), Err(Error::UnknownRegister(_))));
    }

    #[test]
    fn product_measurement_leaves_other_register() {
        let l = RegisterLayout::new()
            .with("a", 2, RegisterRole::System)
            .unwrap()
            .with("b", 2, RegisterRole::System)
            .unwrap();
        let s = StateVector::from_register_values(l, &[("a", 3), ("b", 2)]).unwrap();
        let m = s.measure_register("b", 7).unwrap();
        assert_eq!(m.outcome, 2);
        assert_eq!(m.post_state.register_probabilities("a").unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn measurement_frequency_matches_binomial() {
        // 1e5 draws of p = 1/2: sd = 0.0016, so the 0.01 window is over 6 sd.
        let s = plus();
        let draws = 100_000;
        let ones = (0..draws)
            .filter(|&i| s.measure_register("q", sub_seed(2024, i)).unwrap().outcome == 1)
            .count();
        let freq = ones as f64 / draws as f64;
        assert!((freq - 0.5).abs() < 0.01, "frequency {freq}");
    }

    #[test]
    fn tensor_places_upper_register_high() {
        let a = StateVector::new_basis_state(layout(2), 1).unwrap();
        let b = StateVector::new_basis_state(
            RegisterLayout::single("p", 1, RegisterRole::Pointer).unwrap(),
            1,
        )
        .unwrap();
        let ab = a.tensor(&b).unwrap();
        assert_eq!(ab.amplitudes()[0b101], c(1.0, 0.0));
        assert_eq!(ab.factor_out("p", 1).unwrap(), a);
        assert!(ab.factor_out("p", 0).is_err());
    }

    #[test]
    fn register_slices_cover_middle_register() {
        let l = RegisterLayout::new()
            .with("lo", 1, RegisterRole::System)
            .unwrap()
            .with("mid", 2, RegisterRole::System)
            .unwrap()
            .with("hi", 1, RegisterRole::System)
            .unwrap();
        let mut s = StateVector::from_register_values(l, &[("lo", 1), ("mid", 2), ("hi", 1)]).unwrap();
        let mut hits = Vec::new();
        s.for_each_register_slice("mid", |rest, slice| {
            if slice[2].norm() > 0.5 {
                hits.push(rest);
                slice.swap(2, 3);
            }
        })
        .unwrap();
        assert_eq!(hits, vec![3]);
        assert_eq!(s.register_probabilities("mid").unwrap(), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn dump_round_trip() {
        let l = RegisterLayout::new()
            .with("x", 2, RegisterRole::System)
            .unwrap()
            .with("y", 1, RegisterRole::System)
            .unwrap();
        let amps: Vec<Complex64> =
            (0..8).map(|i| c((i as f64 + 0.1).sin(), (i as f64 * 0.7).cos())).collect();
        let s = StateVector::normalized(l, amps).unwrap();
        let mut buf = Vec::new();
        s.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# L=3 registers=x:2;y:1\n"));
        let back = StateVector::read_dump(&buf[..]).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn sub_seeds_differ_and_repeat() {
        assert_eq!(sub_seed(1, 2), sub_seed(1, 2));
        assert_ne!(sub_seed(1, 2), sub_seed(1, 3));
        assert_ne!(sub_seed(1, 2), sub_seed(2, 2));
    }
}
