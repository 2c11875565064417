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

//! Cooling by a bath of two-level systems.
//!
//! Bath qubit `j` has gap `E0·2^{−j}`. Every step the system moves one time
//! step, each bath qubit picks up its free phase, and each bath qubit is
//! rotated by `g·dt·x(n)` conditioned on the system position, a Trotterized
//! `g x̂ ⊗ σ_y` exchange. Every `R` steps the bath is measured and reset.
//!
//! All parts advance in the orientation of the grid step, `e^{+iH dt}`, so
//! the joint dynamics is one consistent unitary flow.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::{apply_gate, GateOp};
use crate::oracle::SpectralOracle;
use crate::propagator::{trotter_step, GridSpec, PotentialSpec};
use crate::state::{sub_seed, StateVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ramp {
    Constant,
    /// g·(1 − c/total) in cycle c.
    Linear,
}

/// How the system itself moves between coupling kicks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemEvolution {
    /// Exact `e^{+iH dt}` from the dense oracle; conserves ⟨H⟩.
    Exact,
    /// The factored grid step.
    Trotter,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BathSpec {
    pub register: String,
    pub e0: f64,
    pub coupling: f64,
    pub reset_period: usize,
    pub ramp: Ramp,
    pub evolution: SystemEvolution,
}

impl BathSpec {
    pub fn new(register: &str, e0: f64, coupling: f64, reset_period: usize) -> Result<Self> {
        if !(coupling.is_finite() && coupling >= 0.0) {
            return Err(Error::Domain(format!("coupling g = {coupling} must be ≥ 0")));
        }
        if reset_period == 0 {
            return Err(Error::Domain("reset period must be at least one step".into()));
        }
        if !e0.is_finite() {
            return Err(Error::Domain("bath gap must be finite".into()));
        }
        Ok(BathSpec {
            register: register.to_string(),
            e0,
            coupling,
            reset_period,
            ramp: Ramp::Constant,
            evolution: SystemEvolution::Exact,
        })
    }

    pub fn with_ramp(mut self, ramp: Ramp) -> Self {
        self.ramp = ramp;
        self
    }

    pub fn with_evolution(mut self, evolution: SystemEvolution) -> Self {
        self.evolution = evolution;
        self
    }

    pub fn gap(&self, level: usize) -> f64 {
        self.e0 * (-(level as f64)).exp2()
    }

    pub fn coupling_at(&self, cycle: usize, total_cycles: usize) -> f64 {
        match self.ramp {
            Ramp::Constant => self.coupling,
            Ramp::Linear if total_cycles == 0 => self.coupling,
            Ramp::Linear => self.coupling * (1.0 - cycle as f64 / total_cycles as f64),
        }
    }
}

/// Everything a cooling run reuses from step to step.
pub struct CoolingSetup<'a> {
    pub system: &'a str,
    pub grid: &'a GridSpec,
    pub potential: &'a PotentialSpec,
    pub bath: &'a BathSpec,
    oracle: SpectralOracle,
    step: Option<DMatrix<Complex64>>,
}

impl<'a> CoolingSetup<'a> {
    pub fn new(system: &'a str, grid: &'a GridSpec, potential: &'a PotentialSpec, bath: &'a BathSpec) -> Result<Self> {
        let oracle = SpectralOracle::single_particle(grid, potential)?;
        let step = match bath.evolution {
            SystemEvolution::Exact => Some(oracle.propagator(-grid.dt())),
            SystemEvolution::Trotter => None,
        };
        Ok(CoolingSetup { system, grid, potential, bath, oracle, step })
    }

    pub fn oracle(&self) -> &SpectralOracle {
        &self.oracle
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        let sys = state.layout().register(self.system)?;
        let bath = state.layout().register(&self.bath.register)?;
        if sys.dim() != self.grid.points() {
            return Err(Error::Grid(format!("register '{}' does not match the grid", self.system)));
        }
        if bath.qubits() > 4 {
            return Err(Error::Domain(format!("bath of {} qubits exceeds 4", bath.qubits())));
        }
        Ok(())
    }
}

/// `R` joint steps with coupling `g`.
pub fn cooling_step(state: &mut StateVector, setup: &CoolingSetup, g: f64) -> Result<()> {
    setup.check(state)?;
    let sys = state.layout().register(setup.system)?.clone();
    let bath = state.layout().register(&setup.bath.register)?.clone();
    let dt = setup.grid.dt();
    let angles: Vec<f64> = (0..sys.dim()).map(|n| g * dt * setup.grid.centered_position(n)).collect();
    let mut buf = vec![Complex64::new(0.0, 0.0); sys.dim()];
    for _ in 0..setup.bath.reset_period {
        match &setup.step {
            Some(u) => state.for_each_register_slice(setup.system, |_, slice| {
                for (row, b) in buf.iter_mut().enumerate() {
                    *b = u.row(row).iter().zip(slice.iter()).map(|(m, a)| m * a).sum();
                }
                slice.copy_from_slice(&buf);
            })?,
            None => trotter_step(state, setup.system, setup.grid, setup.potential)?,
        }
        for j in 0..bath.qubits() {
            let qubit = bath.qubit(j)?;
            apply_gate(state, &GateOp::Phase { qubit, theta: setup.bath.gap(j) * dt })?;
            if g == 0.0 {
                continue;
            }
            let bit = 1usize << qubit;
            let amps = state.amplitudes_mut();
            for i in 0..amps.len() {
                if i & bit != 0 {
                    continue;
                }
                let (s, c) = angles[sys.value(i)].sin_cos();
                let (a0, a1) = (amps[i], amps[i | bit]);
                amps[i] = a0 * c - a1 * s;
                amps[i | bit] = a0 * s + a1 * c;
            }
        }
    }
    Ok(())
}

/// Measures the bath register and returns it to |0…0⟩. Outcomes are listed
/// per bath qubit, qubit 0 first.
pub fn reset_bath(state: &StateVector, bath: &str, seed: u64) -> Result<(StateVector, Vec<u8>)> {
    let sample = state.measure_register(bath, seed)?;
    let qubits = state.layout().register(bath)?.qubits();
    let outcomes = (0..qubits).map(|j| ((sample.outcome >> j) & 1) as u8).collect();
    let mut post = sample.post_state;
    let v = sample.outcome;
    post.permute_register(bath, |x| x ^ v)?;
    Ok((post, outcomes))
}

/// Populations of the oracle eigenstates in the reduced state of `system`.
pub fn system_populations(state: &StateVector, system: &str, oracle: &SpectralOracle) -> Result<Vec<f64>> {
    let sys = state.layout().register(system)?;
    let amps = state.amplitudes();
    let mut total = vec![0.0; oracle.dim()];
    let mut slice = vec![Complex64::new(0.0, 0.0); sys.dim()];
    for base in (0..amps.len()).filter(|&i| sys.value(i) == 0) {
        for (v, s) in slice.iter_mut().enumerate() {
            *s = amps[sys.with_value(base, v)];
        }
        for (t, p) in total.iter_mut().zip(oracle.populations(&slice)) {
            *t += p;
        }
    }
    Ok(total)
}

/// Tr(ρ_sys H) for the reduced state of `system`.
pub fn system_energy(state: &StateVector, system: &str, oracle: &SpectralOracle) -> Result<f64> {
    let pops = system_populations(state, system, oracle)?;
    Ok(pops.iter().zip(oracle.eigenvalues()).map(|(p, e)| p * e).sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    /// System energy at the end of the cycle, before the bath is reset.
    pub energy: f64,
    pub coupling: f64,
    pub outcomes: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoolingReport {
    pub initial_energy: f64,
    pub records: Vec<CycleRecord>,
}

impl CoolingReport {
    /// Mean energy over a range of cycles.
    pub fn mean_energy(&self, range: std::ops::Range<usize>) -> f64 {
        let slice = &self.records[range];
        slice.iter().map(|r| r.energy).sum::<f64>() / slice.len() as f64
    }

    /// `cycle,energy,coupling,outcomes` rows; outcomes as bits, qubit 0 first.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            let bits: String = r.outcomes.iter().map(|b| char::from(b'0' + b)).collect();
            writeln!(out, "{},{:?},{:?},{}", r.cycle, r.energy, r.coupling, bits)?;
        }
        Ok(())
    }
}

/// Alternates [`cooling_step`] and [`reset_bath`] for `total_cycles`; cycle c
/// resets with sub-seed (seed, c).
pub fn run_cooling(
    initial: &StateVector,
    setup: &CoolingSetup,
    total_cycles: usize,
    seed: u64,
) -> Result<(StateVector, CoolingReport)> {
    setup.check(initial)?;
    let initial_energy = system_energy(initial, setup.system, &setup.oracle)?;
    let mut state = initial.clone();
    let mut records = Vec::with_capacity(total_cycles);
    for cycle in 0..total_cycles {
        let g = setup.bath.coupling_at(cycle, total_cycles);
        cooling_step(&mut state, setup, g)?;
        let energy = system_energy(&state, setup.system, &setup.oracle)?;
        let (next, outcomes) = reset_bath(&state, &setup.bath.register, sub_seed(seed, cycle as u64))?;
        state = next;
        records.push(CycleRecord { cycle, energy, coupling: g, outcomes });
    }
    Ok((state, CoolingReport { initial_energy, records }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::evolve;
    use crate::state::{RegisterLayout, RegisterRole};

    fn harmonic(l: usize) -> (GridSpec, PotentialSpec) {
        let grid = GridSpec::harmonic_default(l).unwrap();
        let pot = PotentialSpec::harmonic(&grid, 1.0).unwrap();
        (grid, pot)
    }

    fn joint(system: &StateVector, bath_qubits: usize, bath_value: usize) -> StateVector {
        let bath =
            StateVector::new_basis_state(RegisterLayout::single("bath", bath_qubits, RegisterRole::Bath).unwrap(), bath_value)
                .unwrap();
        system.tensor(&bath).unwrap()
    }

    fn eigen(oracle: &SpectralOracle, l: usize, j: usize) -> StateVector {
        oracle.eigenstate(&RegisterLayout::single("x", l, RegisterRole::System).unwrap(), j).unwrap()
    }

    #[test]
    fn zero_coupling_trotter_matches_propagator() {
        let (grid, pot) = harmonic(5);
        let bath = BathSpec::new("bath", 1.0, 0.0, 3).unwrap().with_evolution(SystemEvolution::Trotter);
        let setup = CoolingSetup::new("x", &grid, &pot, &bath).unwrap();
        let sys = eigen(setup.oracle(), 5, 2);
        let mut expected = sys.clone();
        evolve(&mut expected, &["x"], &grid, &pot, &[], 3).unwrap();
        let mut s = joint(&sys, 1, 0);
        cooling_step(&mut s, &setup, 0.0).unwrap();
        assert!(s.excited_mass("bath").unwrap() == 0.0);
        assert!(s.factor_out("bath", 0).unwrap().max_deviation(&expected).unwrap() < 1e-12);
    }

    #[test]
    fn excited_bath_stays_excited_without_coupling() {
        let (grid, pot) = harmonic(5);
        let bath = BathSpec::new("bath", 1.0, 0.0, 10).unwrap();
        let setup = CoolingSetup::new("x", &grid, &pot, &bath).unwrap();
        let sys = eigen(setup.oracle(), 5, 1);
        let mut s = joint(&sys, 1, 1);
        cooling_step(&mut s, &setup, 0.0).unwrap();
        assert!((s.register_probabilities("bath").unwrap()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn resonant_bath_absorbs_energy() {
        let (grid, pot) = harmonic(6);
        let probe = SpectralOracle::single_particle(&grid, &pot).unwrap();
        let gap = probe.eigenvalues()[1] - probe.eigenvalues()[0];
        let bath = BathSpec::new("bath", gap, 0.1, 40).unwrap();
        let setup = CoolingSetup::new("x", &grid, &pot, &bath).unwrap();
        let mut s = joint(&eigen(setup.oracle(), 6, 1), 1, 0);
        cooling_step(&mut s, &setup, 0.1).unwrap();
        let p1 = s.register_probabilities("bath").unwrap()[1];
        assert!(p1 > 0.1, "bath excitation {p1}");
        // Energy lost by the system sits in the bath.
        let e = system_energy(&s, "x", setup.oracle()).unwrap();
        assert!(e < setup.oracle().eigenvalues()[1] - 0.5 * p1 * gap);
    }

    #[test]
    fn reset_cases() {
        let (grid, pot) = harmonic(4);
        let oracle = SpectralOracle::single_particle(&grid, &pot).unwrap();
        let sys = eigen(&oracle, 4, 0);
        let clean = joint(&sys, 2, 0);
        let (post, out) = reset_bath(&clean, "bath", 5).unwrap();
        assert_eq!(out, vec![0, 0]);
        assert!(post.max_deviation(&clean).unwrap() < 1e-15);

        let excited = joint(&sys, 2, 1);
        let (post, out) = reset_bath(&excited, "bath", 5).unwrap();
        assert_eq!(out, vec![1, 0]);
        assert!(post.max_deviation(&clean).unwrap() < 1e-15);

        // Entangled: (|E0⟩|0⟩ + |E1⟩|1⟩)/√2. Outcome 1 must leave |E1⟩.
        let e1 = eigen(&oracle, 4, 1);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let amps: Vec<Complex64> = joint(&sys, 1, 0)
            .amplitudes()
            .iter()
            .zip(joint(&e1, 1, 1).amplitudes())
            .map(|(a, b)| (a + b) * r)
            .collect();
        let ent = StateVector::from_amplitudes(joint(&sys, 1, 0).layout().clone(), amps).unwrap();
        let mut seen = [false; 2];
        for seed in 0..40 {
            let (post, out) = reset_bath(&ent, "bath", seed).unwrap();
            assert!((post.norm() - 1.0).abs() < 1e-10);
            let projected = ent.project("bath", out[0] as usize).unwrap().factor_out("bath", out[0] as usize).unwrap();
            assert!(post.factor_out("bath", 0).unwrap().max_deviation(&projected).unwrap() < 1e-15);
            seen[out[0] as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn run_records_and_ramp() {
        let (grid, pot) = harmonic(5);
        let bath = BathSpec::new("bath", 1.0, 0.2, 5).unwrap().with_ramp(Ramp::Linear);
        assert_eq!(bath.coupling_at(0, 4), 0.2);
        assert!((bath.coupling_at(3, 4) - 0.05).abs() < 1e-15);
        assert_eq!(bath.gap(2), 0.25);
        let setup = CoolingSetup::new("x", &grid, &pot, &bath).unwrap();
        let s = joint(&eigen(setup.oracle(), 5, 1), 1, 0);
        let (out, report) = run_cooling(&s, &setup, 0, 1).unwrap();
        assert_eq!(out, s);
        assert!(report.records.is_empty());
        let (_, report) = run_cooling(&s, &setup, 4, 1).unwrap();
        assert_eq!(report.records.len(), 4);
        let mut buf = Vec::new();
        report.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }

    #[test]
    fn exact_zero_coupling_conserves_energy() {
        let (grid, pot) = harmonic(5);
        let bath = BathSpec::new("bath", 1.0, 0.0, 7).unwrap();
        let setup = CoolingSetup::new("x", &grid, &pot, &bath).unwrap();
        let o = setup.oracle();
        let amps: Vec<Complex64> = (0..32)
            .map(|n| Complex64::from(o.eigenvector(0)[n] + 0.5 * o.eigenvector(3)[n]))
            .collect();
        let sys = StateVector::normalized(RegisterLayout::single("x", 5, RegisterRole::System).unwrap(), amps).unwrap();
        let (_, report) = run_cooling(&joint(&sys, 2, 0), &setup, 10, 3).unwrap();
        for r in &report.records {
            assert!((r.energy - report.initial_energy).abs() < 1e-9);
        }
    }
}
