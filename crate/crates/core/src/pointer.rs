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

//! Von Neumann pointer measurements.
//!
//! A pointer register of `p` qubits is coupled to an observable Â through
//! `e^{−ikt P̂Â}`, which moves the pointer from |x⟩ to |x + k t a⟩ on an
//! eigenstate with eigenvalue `a`. The pointer is periodic with `P = 2^p`
//! cells; outcomes are read back in the window that the eigenvalue bounds
//! map to.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::{apply_qft, Direction};
use crate::oracle::{folded_momentum, kinetic_energies, SpectralOracle};
use crate::phase::{apply_phase_direct, PhaseTable};
use crate::propagator::{GridSpec, PotentialSpec};
use crate::state::{sample_index, seeded_rng, sub_seed, StateVector};

/// Minimum share of shots a histogram maximum needs to count as a peak.
pub const PEAK_THRESHOLD: f64 = 0.02;

#[derive(Clone, Debug)]
pub enum ObservableKind {
    /// A(n) on one register's basis states.
    Diagonal { values: Vec<f64> },
    /// Grid Hamiltonian p²/2m + V, diagonalized by the dense oracle.
    Hamiltonian { oracle: SpectralOracle },
}

#[derive(Clone, Debug)]
pub struct ObservableSpec {
    register: String,
    kind: ObservableKind,
    bounds: (f64, f64),
}

impl ObservableSpec {
    /// Diagonal observable; bounds are the extreme table values.
    pub fn diagonal(register: &str, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("observable values must be finite".into()));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(ObservableSpec {
            register: register.to_string(),
            kind: ObservableKind::Diagonal { values },
            bounds: (lo, hi),
        })
    }

    /// Grid Hamiltonian. Default bounds: [min V, max V + largest kinetic energy].
    pub fn hamiltonian(register: &str, grid: &GridSpec, potential: &PotentialSpec) -> Result<Self> {
        let oracle = SpectralOracle::single_particle(grid, potential)?;
        let t_max = kinetic_energies(grid).into_iter().fold(0.0, f64::max);
        Ok(ObservableSpec {
            register: register.to_string(),
            kind: ObservableKind::Hamiltonian { oracle },
            bounds: (potential.min(), potential.max() + t_max),
        })
    }

    /// Narrows the eigenvalue window to the part of the spectrum in use.
    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Domain(format!("invalid eigenvalue bounds [{lo}, {hi}]")));
        }
        self.bounds = (lo, hi);
        Ok(self)
    }

    pub fn register(&self) -> &str {
        &self.register
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn kind(&self) -> &ObservableKind {
        &self.kind
    }
}

#[derive(Clone, Debug)]
pub struct PointerSpec {
    pub pointer: String,
    /// Pointer cells per unit eigenvalue per unit time.
    pub coupling: f64,
    pub duration: f64,
    pub observable: ObservableSpec,
}

impl PointerSpec {
    pub fn new(pointer: &str, coupling: f64, duration: f64, observable: ObservableSpec) -> Self {
        PointerSpec { pointer: pointer.to_string(), coupling, duration, observable }
    }

    /// Pointer cells per unit eigenvalue.
    pub fn kt(&self) -> f64 {
        self.coupling * self.duration
    }

    /// First cell of the unwrapped readout window: the spare room beyond
    /// `kt·(a_max − a_min)` is split evenly on both sides.
    pub fn window_start(&self, cells: usize) -> i64 {
        let (lo, hi) = self.observable.bounds();
        let span = self.kt() * (hi - lo);
        (self.kt() * lo - (cells as f64 - span) / 2.0).floor() as i64
    }

    /// Pointer outcome mapped into the readout window.
    pub fn unwrap_cell(&self, outcome: usize, cells: usize) -> i64 {
        let start = self.window_start(cells);
        start + (outcome as i64 - start).rem_euclid(cells as i64)
    }

    fn check(&self, state: &StateVector) -> Result<usize> {
        let reg = state.layout().register(&self.pointer)?;
        let cells = reg.dim();
        if !(self.kt().is_finite() && self.kt() > 0.0) {
            return Err(Error::Domain(format!("k·t = {} must be positive", self.kt())));
        }
        let (lo, hi) = self.observable.bounds();
        let span = self.kt() * (hi - lo);
        if span >= cells as f64 {
            return Err(Error::WrapAround { span, cells });
        }
        let sys = state.layout().register(&self.observable.register)?;
        if sys.name() == reg.name() {
            return Err(Error::Domain("pointer and observed register coincide".into()));
        }
        let expected = match &self.observable.kind {
            ObservableKind::Diagonal { values } => values.len(),
            ObservableKind::Hamiltonian { oracle } => oracle.dim(),
        };
        if sys.dim() != expected {
            return Err(Error::LayoutMismatch(format!(
                "observable has {expected} levels, register '{}' has {}",
                sys.name(),
                sys.dim()
            )));
        }
        Ok(cells)
    }
}

/// Applies `e^{−ikt P̂Â}`: inverse QFT on the pointer, the momentum-diagonal
/// shift phase, forward QFT. The pointer must start at |0⟩.
pub fn couple_pointer(state: &mut StateVector, spec: &PointerSpec) -> Result<()> {
    let cells = spec.check(state)?;
    state.require_cleared(&spec.pointer)?;
    apply_qft(state, &spec.pointer, Direction::Inverse)?;
    let step = -2.0 * PI * spec.kt() / cells as f64;
    match &spec.observable.kind {
        ObservableKind::Diagonal { values } => {
            let dims = [cells, values.len()];
            let table = PhaseTable::from_fn(&dims, step, PhaseTable::DEFAULT_FRAC_BITS, |p| {
                folded_momentum(p[0], cells) as f64 * values[p[1]]
            })?;
            apply_phase_direct(state, &[&spec.pointer, &spec.observable.register], &table)?;
        }
        ObservableKind::Hamiltonian { oracle } => {
            let ptr = state.layout().register(&spec.pointer)?.clone();
            let sys = state.layout().register(&spec.observable.register)?.clone();
            let n = sys.dim();
            let mut slice = vec![Complex64::new(0.0, 0.0); n];
            let amps = state.amplitudes_mut();
            for base in 0..amps.len() {
                if sys.value(base) != 0 {
                    continue;
                }
                let mu = folded_momentum(ptr.value(base), cells) as f64;
                for (v, s) in slice.iter_mut().enumerate() {
                    *s = amps[sys.with_value(base, v)];
                }
                let out = oracle.apply_fn(&slice, |e| Complex64::from_polar(1.0, step * mu * e));
                for (v, o) in out.into_iter().enumerate() {
                    amps[sys.with_value(base, v)] = o;
                }
            }
        }
    }
    apply_qft(state, &spec.pointer, Direction::Forward)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Peak {
    /// Unwrapped pointer cell of the local maximum.
    pub cell: i64,
    pub eigenvalue: f64,
    /// Share of shots within ±1 cell.
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumEstimate {
    /// Counts in window order: entry j is cell `window_start + j`.
    pub histogram: Vec<u64>,
    pub window_start: i64,
    pub kt: f64,
    pub shots: usize,
    pub peaks: Vec<Peak>,
}

impl SpectrumEstimate {
    fn from_counts(histogram: Vec<u64>, window_start: i64, kt: f64, shots: usize) -> Self {
        let at = |j: i64| if j < 0 { 0 } else { histogram.get(j as usize).copied().unwrap_or(0) };
        let threshold = PEAK_THRESHOLD * shots as f64;
        let peaks = (0..histogram.len() as i64)
            .filter(|&j| at(j) as f64 >= threshold && at(j) > 0 && at(j) > at(j - 1) && at(j) >= at(j + 1))
            .map(|j| {
                let cell = window_start + j;
                Peak {
                    cell,
                    eigenvalue: cell as f64 / kt,
                    weight: (at(j - 1) + at(j) + at(j + 1)) as f64 / shots as f64,
                }
            })
            .collect();
        SpectrumEstimate { histogram, window_start, kt, shots, peaks }
    }

    pub fn count_at(&self, cell: i64) -> u64 {
        let j = cell - self.window_start;
        if j < 0 {
            return 0;
        }
        self.histogram.get(j as usize).copied().unwrap_or(0)
    }

    /// `cell,count,eigenvalue_estimate` for every cell of the window.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (j, c) in self.histogram.iter().enumerate() {
            let cell = self.window_start + j as i64;
            writeln!(out, "{cell},{c},{:?}", cell as f64 / self.kt)?;
        }
        Ok(())
    }
}

/// `shots` independent couple-and-read rounds on copies of `state`. Shot i
/// draws from the pointer distribution with sub-seed (seed, i).
pub fn sample_spectrum(state: &StateVector, spec: &PointerSpec, shots: usize, seed: u64) -> Result<SpectrumEstimate> {
    let mut coupled = state.clone();
    couple_pointer(&mut coupled, spec)?;
    let probs = coupled.register_probabilities(&spec.pointer)?;
    let cells = probs.len();
    let start = spec.window_start(cells);
    let mut histogram = vec![0u64; cells];
    for shot in 0..shots {
        let mut rng = seeded_rng(sub_seed(seed, shot as u64));
        let outcome = sample_index(&probs, &mut rng);
        histogram[(spec.unwrap_cell(outcome, cells) - start) as usize] += 1;
    }
    Ok(SpectrumEstimate::from_counts(histogram, start, spec.kt(), shots))
}

/// One coupled evolution and pointer readout. Returns the eigenvalue
/// estimate and the renormalized state of the other registers given the
/// observed cell.
pub fn project_to_eigenstate(state: &StateVector, spec: &PointerSpec, seed: u64) -> Result<(f64, StateVector)> {
    let mut coupled = state.clone();
    couple_pointer(&mut coupled, spec)?;
    let sample = coupled.measure_register(&spec.pointer, seed)?;
    let cells = coupled.layout().register(&spec.pointer)?.dim();
    let eigenvalue = spec.unwrap_cell(sample.outcome, cells) as f64 / spec.kt();
    let post = sample.post_state.factor_out(&spec.pointer, sample.outcome)?;
    Ok((eigenvalue, post))
}

/// Evolution applied between the two reads of a correlator shot.
pub type BetweenReads<'a> = &'a mut dyn FnMut(&mut StateVector) -> Result<()>;

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelatorEntry {
    pub first: String,
    pub second: String,
    /// Sample mean of x_i·x_j.
    pub mean: f64,
    pub stderr: f64,
    /// ⟨x_i x_j⟩ − ⟨x_i⟩⟨x_j⟩ with its standard error.
    pub connected: f64,
    pub connected_stderr: f64,
}

fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per shot: build a fresh state, read register i, optionally evolve, read
/// register j. `value` maps a register outcome to the number being
/// correlated. Pair `p`, shot `s` uses sub-seeds derived from (seed, p) and
/// then (·, 2s) and (·, 2s + 1).
pub fn estimate_two_point<F, V>(
    state_factory: F,
    pairs: &[(&str, &str)],
    shots: usize,
    seed: u64,
    value: V,
    mut evolve_between: Option<BetweenReads>,
) -> Result<Vec<CorrelatorEntry>>
where
    F: Fn() -> Result<StateVector>,
    V: Fn(usize) -> f64,
{
    let mut table = Vec::with_capacity(pairs.len());
    for (p, &(first, second)) in pairs.iter().enumerate() {
        let pair_seed = sub_seed(seed, p as u64);
        let (mut xs, mut ys, mut prods) = (Vec::new(), Vec::new(), Vec::new());
        for shot in 0..shots as u64 {
            let state = state_factory()?;
            let a = state.measure_register(first, sub_seed(pair_seed, 2 * shot))?;
            let mut post = a.post_state;
            if let Some(evolve) = evolve_between.as_mut() {
                evolve(&mut post)?;
            }
            let b = post.measure_register(second, sub_seed(pair_seed, 2 * shot + 1))?;
            let (x, y) = (value(a.outcome), value(b.outcome));
            xs.push(x);
            ys.push(y);
            prods.push(x * y);
        }
        let (mean, stderr) = mean_and_stderr(&prods);
        let (mx, my) = (mean_and_stderr(&xs).0, mean_and_stderr(&ys).0);
        let centered: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).collect();
        let (connected, connected_stderr) = mean_and_stderr(&centered);
        table.push(CorrelatorEntry {
            first: first.to_string(),
            second: second.to_string(),
            mean,
            stderr,
            connected,
            connected_stderr,
        });
    }
    Ok(table)
}

/// `i,j,mean,stderr` rows.
pub fn write_correlators<W: Write>(entries: &[CorrelatorEntry], mut out: W) -> Result<()> {
    for e in entries {
        writeln!(out, "{},{},{:?},{:?}", e.first, e.second, e.mean, e.stderr)?;
    }
    Ok(())
}
