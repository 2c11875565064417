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

//! Dense reference Hamiltonians and their eigendecompositions.
//!
//! The kinetic energy is spectral: p²/2m on the DFT momenta
//! `p_k = 2πk/(N dx)` with k folded into (−N/2, N/2]. In position space it is
//! the real symmetric circulant `T(n, n') = t((n − n') mod N)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase::domain_indices;
use crate::propagator::{CouplingSpec, GridSpec, PotentialSpec};
use crate::state::{RegisterLayout, StateVector};

/// Largest joint qubit count the dense oracle accepts.
pub const MAX_ORACLE_QUBITS: usize = 10;

/// Momentum index k folded into (−N/2, N/2].
pub fn folded_momentum(k: usize, n: usize) -> i64 {
    if k > n / 2 {
        k as i64 - n as i64
    } else {
        k as i64
    }
}

/// Kinetic energies p_k²/2m in DFT index order.
pub fn kinetic_energies(grid: &GridSpec) -> Vec<f64> {
    let n = grid.points();
    let scale = 2.0 * PI / (n as f64 * grid.dx());
    (0..n)
        .map(|k| {
            let p = scale * folded_momentum(k, n) as f64;
            p * p / (2.0 * grid.mass())
        })
        .collect()
}

/// First row of the kinetic circulant: t(d) = (1/N) Σ_k E_k cos(2πkd/N).
pub fn kinetic_row(grid: &GridSpec) -> Vec<f64> {
    let n = grid.points();
    let e = kinetic_energies(grid);
    (0..n)
        .map(|d| {
            e.iter()
                .enumerate()
                .map(|(k, ek)| ek * (2.0 * PI * ((k * d) % n) as f64 / n as f64).cos())
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// Hamiltonian over a register layout, kept as kinetic part and diagonal
/// part so that splitting errors can be measured.
#[derive(Clone, Debug)]
pub struct GridHamiltonian {
    pub kinetic: DMatrix<f64>,
    pub diagonal: DVector<f64>,
}

impl GridHamiltonian {
    /// Single register of `l` qubits.
    pub fn single(grid: &GridSpec, potential: &PotentialSpec) -> Result<Self> {
        let layout = RegisterLayout::single("x", grid.qubits(), crate::state::RegisterRole::System)?;
        Self::build(&layout, &["x"], grid, potential, &[])
    }

    /// Kinetic energy and V on every listed register, couplings as diagonal
    /// energies `cF/dt`.
    pub fn build(
        layout: &RegisterLayout,
        registers: &[&str],
        grid: &GridSpec,
        potential: &PotentialSpec,
        couplings: &[CouplingSpec],
    ) -> Result<Self> {
        if layout.total_qubits() > MAX_ORACLE_QUBITS {
            return Err(Error::TooManyQubits {
                requested: layout.total_qubits(),
                max: MAX_ORACLE_QUBITS,
            });
        }
        if potential.len() != grid.points() {
            return Err(Error::Grid("potential length differs from grid size".into()));
        }
        let dim = layout.dim();
        let n = grid.points();
        let t = kinetic_row(grid);
        let mut kinetic = DMatrix::zeros(dim, dim);
        let mut diagonal = DVector::zeros(dim);
        for name in registers {
            let reg = layout.register(name)?;
            if reg.dim() != n {
                return Err(Error::Grid(format!("register '{name}' does not match the grid")));
            }
            for i in 0..dim {
                let v = reg.value(i);
                diagonal[i] += potential.values()[v];
                for w in 0..n {
                    kinetic[(reg.with_value(i, w), i)] += t[(w + n - v) % n];
                }
            }
        }
        for c in couplings {
            let table = c.table();
            let domain = domain_indices(layout, &c.registers(), table)?;
            let per_energy = table.scale() / grid.dt();
            for (i, d) in domain.into_iter().enumerate() {
                diagonal[i] += table.value(d) * per_energy;
            }
        }
        Ok(GridHamiltonian { kinetic, diagonal })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn total(&self) -> DMatrix<f64> {
        &self.kinetic + DMatrix::from_diagonal(&self.diagonal)
    }
}

/// Real symmetric matrix applied to complex amplitudes.
pub fn apply_real(m: &DMatrix<f64>, amps: &[Complex64]) -> Vec<Complex64> {
    let re = DVector::from_iterator(amps.len(), amps.iter().map(|a| a.re));
    let im = DVector::from_iterator(amps.len(), amps.iter().map(|a| a.im));
    let (re, im) = (m * re, m * im);
    re.iter().zip(im.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect()
}

/// Eigenvalues in ascending order with matching real eigenvectors (columns).
/// Each eigenvector's largest-magnitude component is positive.
#[derive(Clone, Debug)]
pub struct SpectralOracle {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    vectors_t: DMatrix<f64>,
}

impl SpectralOracle {
    pub fn new(h: &DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let dim = order.len();
        let mut vectors = DMatrix::zeros(dim, dim);
        let mut values = Vec::with_capacity(dim);
        for (j, &src) in order.iter().enumerate() {
            values.push(eig.eigenvalues[src]);
            let col = eig.eigenvectors.column(src);
            let lead = col.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            let sign = if lead < 0.0 { -1.0 } else { 1.0 };
            vectors.set_column(j, &(col * sign));
        }
        let vectors_t = vectors.transpose();
        SpectralOracle { values, vectors, vectors_t }
    }

    pub fn single_particle(grid: &GridSpec, potential: &PotentialSpec) -> Result<Self> {
        Ok(Self::new(&GridHamiltonian::single(grid, potential)?.total()))
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    pub fn eigenvector(&self, j: usize) -> Vec<f64> {
        self.vectors.column(j).iter().copied().collect()
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// Eigenvector `j` as a state over `layout`.
    pub fn eigenstate(&self, layout: &RegisterLayout, j: usize) -> Result<StateVector> {
        let amps = self.vectors.column(j).iter().map(|&x| Complex64::new(x, 0.0)).collect();
        StateVector::normalized(layout.clone(), amps)
    }

    /// Σ_j f(E_j) |j⟩⟨j| applied to `amps`.
    pub fn apply_fn<F>(&self, amps: &[Complex64], f: F) -> Vec<Complex64>
    where
        F: Fn(f64) -> Complex64,
    {
        let coeffs = apply_real(&self.vectors_t, amps);
        let scaled: Vec<Complex64> = coeffs.iter().zip(&self.values).map(|(c, &e)| c * f(e)).collect();
        apply_real(&self.vectors, &scaled)
    }

    /// e^{−iHt} applied to `amps`.
    pub fn evolve(&self, amps: &[Complex64], time: f64) -> Vec<Complex64> {
        self.apply_fn(amps, |e| Complex64::from_polar(1.0, -e * time))
    }

    /// Dense e^{−iHt}.
    pub fn propagator(&self, time: f64) -> DMatrix<Complex64> {
        let dim = self.dim();
        let v = self.vectors.map(|x| Complex64::new(x, 0.0));
        let phases = DVector::from_iterator(dim, self.values.iter().map(|&e| Complex64::from_polar(1.0, -e * time)));
        &v * DMatrix::from_diagonal(&phases) * v.transpose()
    }

    /// |⟨E_j|ψ⟩|² for every level.
    pub fn populations(&self, amps: &[Complex64]) -> Vec<f64> {
        apply_real(&self.vectors_t, amps).iter().map(|c| c.norm_sqr()).collect()
    }

    /// ⟨ψ|H|ψ⟩ for a normalized ψ.
    pub fn expectation(&self, amps: &[Complex64]) -> f64 {
        self.populations(amps).iter().zip(&self.values).map(|(p, e)| p * e).sum()
    }
}

/// Change of the lowest `levels` eigenvalues when the grid is refined by one
/// qubit at fixed box length. A builtin potential is resampled on the finer grid.
pub fn refinement_error(grid: &GridSpec, potential: &PotentialSpec, levels: usize) -> Result<Vec<f64>> {
    let fine = grid.refined(grid.qubits() + 1)?;
    let coarse = SpectralOracle::single_particle(grid, potential)?;
    let refined = SpectralOracle::single_particle(&fine, &potential.resample(&fine)?)?;
    Ok((0..levels.min(coarse.dim()))
        .map(|j| (coarse.eigenvalues()[j] - refined.eigenvalues()[j]).abs())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::RegisterRole;

    #[test]
    fn free_spectrum_is_kinetic() {
        let grid = GridSpec::with_box(5, 7.0, 1.5, 1).unwrap();
        let oracle = SpectralOracle::single_particle(&grid, &PotentialSpec::free(&grid)).unwrap();
        let mut expected: Vec<f64> = (0..32)
            .map(|k| {
                let p = 2.0 * PI * folded_momentum(k, 32) as f64 / 7.0;
                p * p / 3.0
            })
            .collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in oracle.eigenvalues().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10 * b.max(1.0));
        }
    }

    #[test]
    fn harmonic_levels() {
        let grid = GridSpec::harmonic_default(7).unwrap();
        let pot = PotentialSpec::harmonic(&grid, 1.0).unwrap();
        let oracle = SpectralOracle::single_particle(&grid, &pot).unwrap();
        let err = refinement_error(&grid, &pot, 4).unwrap();
        for (j, (e, r)) in oracle.eigenvalues().iter().zip(&err).enumerate() {
            assert!((e - (j as f64 + 0.5)).abs() < 1e-5, "level {j}: {e}");
            assert!(*r < 1e-5);
        }
        let ground = oracle.eigenvector(0);
        assert!(ground.iter().all(|&x| x > -1e-12));
    }

    #[test]
    fn evolution_is_unitary() {
        let grid = GridSpec::harmonic_default(6).unwrap();
        let pot = PotentialSpec::square_well(&grid, 3.0, 4.0).unwrap();
        let oracle = SpectralOracle::single_particle(&grid, &pot).unwrap();
        let amps: Vec<Complex64> = (0..64).map(|n| Complex64::new((n as f64).sin(), (n as f64 * 0.3).cos())).collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        let out = oracle.evolve(&amps, 3.7);
        let out_norm: f64 = out.iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - out_norm).abs() < 1e-12 * norm);
        let back = oracle.evolve(&out, -3.7);
        assert!(amps.iter().zip(&back).all(|(a, b)| (a - b).norm() < 1e-12));
        let u = oracle.propagator(3.7);
        let via_matrix: Vec<Complex64> = (&u * DVector::from_vec(amps.clone())).iter().copied().collect();
        assert!(out.iter().zip(&via_matrix).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn two_register_hamiltonian_without_coupling_is_separable() {
        let grid = GridSpec::with_box(3, 4.0, 1.0, 1).unwrap();
        let pot = PotentialSpec::harmonic(&grid, 1.0).unwrap();
        let layout = RegisterLayout::new()
            .with("a", 3, RegisterRole::System)
            .unwrap()
            .with("b", 3, RegisterRole::System)
            .unwrap();
        let single = SpectralOracle::single_particle(&grid, &pot).unwrap();
        let h = GridHamiltonian::build(&layout, &["a", "b"], &grid, &pot, &[]).unwrap();
        let joint = SpectralOracle::new(&h.total());
        let e = single.eigenvalues();
        assert!((joint.eigenvalues()[0] - 2.0 * e[0]).abs() < 1e-10);
        assert!((joint.eigenvalues()[1] - (e[0] + e[1])).abs() < 1e-10);
        assert!((joint.eigenvalues()[2] - (e[0] + e[1])).abs() < 1e-10);
    }

    #[test]
    fn size_cap() {
        let grid = GridSpec::harmonic_default(11).unwrap();
        let pot = PotentialSpec::free(&grid);
        assert!(matches!(GridHamiltonian::single(&grid, &pot), Err(Error::TooManyQubits { .. })));
    }
}
