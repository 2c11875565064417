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

//! Split-operator time steps on a periodic grid.
//!
//! One step applies the kernel
//!
//! ```text
//! K(n, n') = N^{-1/2} exp(-iπA(n - n')²/N + iV(n)dt)
//! ```
//!
//! factored as a quadratic phase, a forward QFT and a second quadratic phase
//! carrying the potential. With `m dx²/dt = 2πA/N` the kernel equals
//! `e^{-iπ/4} e^{iV dt} e^{iT dt}` for A = 1: a step advances the grid wave
//! function by `-dt` under `H = p²/2m + V`. [`reference_evolve`] follows the
//! same orientation so the two can be compared directly.

use std::f64::consts::PI;
use std::io::BufRead;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::{apply_qft, Direction};
use crate::oracle::{GridHamiltonian, SpectralOracle};
use crate::phase::{apply_phase_ancilla, apply_phase_direct, PhaseTable};
use crate::state::{StateVector, MAX_QUBITS};

/// Discretization of one degree of freedom: `N = 2^l` points spaced `dx`
/// apart, mass `m`, and the integer `A` that fixes `dt = m dx² N / (2πA)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    l: usize,
    dx: f64,
    mass: f64,
    a: u64,
}

impl GridSpec {
    pub fn new(l: usize, dx: f64, mass: f64, a: u64) -> Result<Self> {
        if l == 0 || l > MAX_QUBITS {
            return Err(Error::Grid(format!("l = {l} outside 1..={MAX_QUBITS}")));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::Grid(format!("dx = {dx} must be positive")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::Grid(format!("mass = {mass} must be positive")));
        }
        if a == 0 {
            return Err(Error::Grid("A must be a positive integer".into()));
        }
        Ok(GridSpec { l, dx, mass, a })
    }

    /// Grid covering a periodic box of the given length.
    pub fn with_box(l: usize, box_length: f64, mass: f64, a: u64) -> Result<Self> {
        Self::new(l, box_length / (1usize << l.min(MAX_QUBITS)) as f64, mass, a)
    }

    /// Box length 10, unit mass, A = 1. Holds six ground-state widths of the
    /// unit harmonic oscillator on either side of the center.
    pub fn harmonic_default(l: usize) -> Result<Self> {
        Self::with_box(l, 10.0, 1.0, 1)
    }

    pub fn qubits(&self) -> usize {
        self.l
    }

    pub fn points(&self) -> usize {
        1 << self.l
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    /// Time step implied by `m dx²/dt = 2πA/N`.
    pub fn dt(&self) -> f64 {
        self.mass * self.dx * self.dx * self.points() as f64 / (2.0 * PI * self.a as f64)
    }

    pub fn box_length(&self) -> f64 {
        self.dx * self.points() as f64
    }

    /// Position of grid point `n` measured from the box center N/2.
    pub fn centered_position(&self, n: usize) -> f64 {
        (n as f64 - (self.points() / 2) as f64) * self.dx
    }

    /// Same box and mass with `l` qubits. `A` is kept, so `dt` follows `dx²N`.
    pub fn refined(&self, l: usize) -> Result<Self> {
        Self::with_box(l, self.box_length(), self.mass, self.a)
    }

    /// Whether the factored step can realize the kernel: the index map
    /// n → A·n mod N must be a bijection.
    pub fn factorizable(&self) -> bool {
        self.a == 1 || self.a % 2 == 1
    }

    /// exp(-iπA n²/N) with A·n² reduced mod 2N in integer arithmetic.
    fn quadratic_phase(&self, n: usize) -> Complex64 {
        let two_n = 2 * self.points() as u128;
        let r = (self.a as u128 % two_n) * ((n as u128 * n as u128) % two_n) % two_n;
        Complex64::from_polar(1.0, -PI * r as f64 / self.points() as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSource {
    Free,
    /// ½mω²x² about the box center.
    Harmonic { omega: f64 },
    /// −depth inside a centered window of the given width, 0 outside.
    SquareWell { depth: f64, width: f64 },
    /// Values read from a table, not tied to a formula.
    Table,
}

/// Potential energies V(n) on the grid, periodic in n with period N.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    values: Vec<f64>,
    source: PotentialSource,
}

impl PotentialSpec {
    pub fn free(grid: &GridSpec) -> Self {
        PotentialSpec { values: vec![0.0; grid.points()], source: PotentialSource::Free }
    }

    pub fn harmonic(grid: &GridSpec, omega: f64) -> Result<Self> {
        let k = grid.mass() * omega * omega;
        let values = (0..grid.points()).map(|n| 0.5 * k * grid.centered_position(n).powi(2)).collect();
        Self::checked(values, PotentialSource::Harmonic { omega })
    }

    pub fn square_well(grid: &GridSpec, depth: f64, width: f64) -> Result<Self> {
        let values = (0..grid.points())
            .map(|n| if grid.centered_position(n).abs() < width / 2.0 { -depth } else { 0.0 })
            .collect();
        Self::checked(values, PotentialSource::SquareWell { depth, width })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if !values.len().is_power_of_two() || values.len() < 2 {
            return Err(Error::Grid(format!("potential has {} values, need 2^l", values.len())));
        }
        Self::checked(values, PotentialSource::Table)
    }

    /// Reads a single-register phase table file; the values are energies and
    /// the header scale is ignored.
    pub fn read<R: BufRead>(input: R, grid: &GridSpec) -> Result<Self> {
        let table = PhaseTable::read(input, &[grid.points()])?;
        Self::from_values((0..table.len()).map(|i| table.value(i)).collect())
    }

    fn checked(values: Vec<f64>, source: PotentialSource) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Grid(format!("potential value {v} is not finite")));
        }
        Ok(PotentialSpec { values, source })
    }

    /// The same builtin sampled on another grid.
    pub fn resample(&self, grid: &GridSpec) -> Result<Self> {
        match self.source {
            PotentialSource::Free => Ok(Self::free(grid)),
            PotentialSource::Harmonic { omega } => Self::harmonic(grid, omega),
            PotentialSource::SquareWell { depth, width } => Self::square_well(grid, depth, width),
            PotentialSource::Table => Err(Error::Grid("a tabulated potential cannot be resampled".into())),
        }
    }

    pub fn source(&self) -> &PotentialSource {
        &self.source
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// V at any integer index, wrapped into one period.
    pub fn value(&self, n: i64) -> f64 {
        self.values[n.rem_euclid(self.values.len() as i64) as usize]
    }

    /// The table translated by `shift` cells: new V(n) = old V(n − shift).
    pub fn rotated(&self, shift: i64) -> Self {
        let values = (0..self.len() as i64).map(|n| self.value(n - shift)).collect();
        PotentialSpec { values, source: PotentialSource::Table }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if self.len() != grid.points() {
            return Err(Error::Grid(format!(
                "potential has {} values, grid has {} points",
                self.len(),
                grid.points()
            )));
        }
        Ok(())
    }
}

/// Interaction phase over two or three registers, applied once per step as
/// `e^{icF}`. With `c = dt` the table holds energies in the step's orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSpec {
    registers: Vec<String>,
    table: PhaseTable,
    ancilla: Option<String>,
}

impl CouplingSpec {
    pub fn new(registers: &[&str], table: PhaseTable) -> Result<Self> {
        if !(2..=3).contains(&registers.len()) {
            return Err(Error::Domain(format!("coupling over {} registers", registers.len())));
        }
        if table.arity() != registers.len() {
            return Err(Error::ArityMismatch { table: table.arity(), registers: registers.len() });
        }
        Ok(CouplingSpec {
            registers: registers.iter().map(|r| r.to_string()).collect(),
            table,
            ancilla: None,
        })
    }

    /// Pair interaction energy `f(n_a, n_b)` sampled at default fixed-point
    /// resolution, with `c = dt`.
    pub fn pair<F>(reg_a: &str, reg_b: &str, grid: &GridSpec, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> f64,
    {
        let n = grid.points();
        let table = PhaseTable::from_fn(&[n, n], grid.dt(), PhaseTable::DEFAULT_FRAC_BITS, |p| f(p[0], p[1]))?;
        Self::new(&[reg_a, reg_b], table)
    }

    /// F(n, n') = κ((n − n')dx)².
    pub fn quadratic(reg_a: &str, reg_b: &str, grid: &GridSpec, kappa: f64) -> Result<Self> {
        let dx = grid.dx();
        Self::pair(reg_a, reg_b, grid, |a, b| kappa * ((a as f64 - b as f64) * dx).powi(2))
    }

    /// Routes the phase through a cleared ancilla register instead of a
    /// direct diagonal multiply.
    pub fn via_ancilla(mut self, ancilla: &str) -> Self {
        self.ancilla = Some(ancilla.to_string());
        self
    }

    pub fn registers(&self) -> Vec<&str> {
        self.registers.iter().map(String::as_str).collect()
    }

    pub fn table(&self) -> &PhaseTable {
        &self.table
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        let regs = self.registers();
        match &self.ancilla {
            Some(anc) => apply_phase_ancilla(state, &regs, &self.table, anc),
            None => apply_phase_direct(state, &regs, &self.table),
        }
    }
}

fn check_register(state: &StateVector, register: &str, grid: &GridSpec) -> Result<()> {
    let reg = state.layout().register(register)?;
    if reg.qubits() != grid.qubits() {
        return Err(Error::Grid(format!(
            "register '{register}' has {} qubits, grid has l = {}",
            reg.qubits(),
            grid.qubits()
        )));
    }
    Ok(())
}

/// One factored step on `register`: quadratic phase, index map n → A·n for
/// A > 1, forward QFT, quadratic phase times `e^{iV dt}`.
pub fn trotter_step(
    state: &mut StateVector,
    register: &str,
    grid: &GridSpec,
    potential: &PotentialSpec,
) -> Result<()> {
    check_register(state, register, grid)?;
    potential.check_grid(grid)?;
    if !grid.factorizable() {
        return Err(Error::Grid(format!(
            "A = {} shares a factor with N = {}; the factored step needs odd A",
            grid.a(),
            grid.points()
        )));
    }
    let n = grid.points();
    let dt = grid.dt();
    state.apply_register_diagonal(register, |k| grid.quadratic_phase(k))?;
    if grid.a() > 1 {
        let a = (grid.a() % n as u64) as usize;
        state.permute_register(register, |k| (a * k) % n)?;
    }
    apply_qft(state, register, Direction::Forward)?;
    state.apply_register_diagonal(register, |k| {
        grid.quadratic_phase(k) * Complex64::from_polar(1.0, potential.values[k] * dt)
    })
}

/// The kernel applied as a dense N×N matrix. Defined for every A, but only
/// unitary when A is odd.
pub fn kernel_step(
    state: &mut StateVector,
    register: &str,
    grid: &GridSpec,
    potential: &PotentialSpec,
) -> Result<()> {
    check_register(state, register, grid)?;
    potential.check_grid(grid)?;
    let n = grid.points();
    let dt = grid.dt();
    let norm = 1.0 / (n as f64).sqrt();
    // exp(-iπA d²/N) depends on d = n - n' mod N only when reduced mod 2N.
    let by_offset: Vec<Complex64> = (0..n).map(|d| grid.quadratic_phase(d) * norm).collect();
    let post: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(1.0, potential.values[k] * dt)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    state.for_each_register_slice(register, |_, slice| {
        for (row, o) in out.iter_mut().enumerate() {
            let sum: Complex64 =
                slice.iter().enumerate().map(|(col, a)| by_offset[(row + n - col) % n] * a).sum();
            *o = post[row] * sum;
        }
        slice.copy_from_slice(&out);
    })
}

/// `steps` rounds of: [`trotter_step`] on every register, then each coupling once.
pub fn evolve(
    state: &mut StateVector,
    registers: &[&str],
    grid: &GridSpec,
    potential: &PotentialSpec,
    couplings: &[CouplingSpec],
    steps: usize,
) -> Result<()> {
    for _ in 0..steps {
        for reg in registers {
            trotter_step(state, reg, grid, potential)?;
        }
        for c in couplings {
            c.apply(state)?;
        }
    }
    Ok(())
}

/// Exact evolution over the same interval as `steps` factored steps, from
/// the dense eigendecomposition of the grid Hamiltonian (spectral kinetic
/// energy on every listed register, V on each, plus the couplings as
/// energies `cF/dt`). Registers not listed are spectators.
pub fn reference_evolve(
    state: &StateVector,
    registers: &[&str],
    grid: &GridSpec,
    potential: &PotentialSpec,
    couplings: &[CouplingSpec],
    steps: usize,
) -> Result<StateVector> {
    for reg in registers {
        check_register(state, reg, grid)?;
    }
    let h = GridHamiltonian::build(state.layout(), registers, grid, potential, couplings)?;
    let oracle = SpectralOracle::new(&h.total());
    let amps = oracle.evolve(state.amplitudes(), -(steps as f64) * grid.dt());
    StateVector::from_amplitudes(state.layout().clone(), amps)
}

/// √(2 − 2|⟨a|b⟩|): distance after removing the best global phase.
pub fn phase_aligned_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    let overlap = a.inner(b)?.norm();
    Ok((2.0 - 2.0 * overlap).max(0.0).sqrt())
}
