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

//! Amplitude loading by binary splitting.
//!
//! Leaf `n` of an `l`-level tree holds the probability of the cell
//! `[(n − ½)L/N, (n + ½)L/N)` centered on grid point `n`. Level `i` node `k`
//! covers the leaves whose top `i` bits equal `k`. Splitting runs from the
//! most significant qubit down; each node rotates its next qubit by φ with
//! `sin φ = √(I_right / I_node)`.

use std::f64::consts::PI;
use std::io::BufRead;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::phase::{apply_phase_ancilla, PhaseTable};
use crate::state::{parse_indexed_row, RegisterLayout, StateVector};

pub const DEFAULT_QUADRATURE_POINTS: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub enum TargetShape {
    /// ψ(x) = exp(−(x − center)²/(4σ²) + i·momentum·(x − center)), summed
    /// over periodic images; |ψ|² has standard deviation σ.
    Gaussian { center: f64, sigma: f64, momentum: f64 },
    /// All weight in one grid cell.
    Delta { cell: usize },
    Uniform,
    /// e^{2πikx/L}.
    PlaneWave { k: i64 },
    /// Grid samples, piecewise constant on cells centered at the sample points.
    Samples(Vec<Complex64>),
}

/// Periodic wave function on `[0, box_length)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetWavefunction {
    pub shape: TargetShape,
    pub box_length: f64,
}

impl TargetWavefunction {
    pub fn new(shape: TargetShape, box_length: f64) -> Result<Self> {
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::Domain(format!("box length {box_length} must be positive")));
        }
        match &shape {
            TargetShape::Gaussian { sigma, center, momentum } => {
                if !(sigma.is_finite() && *sigma > 0.0 && center.is_finite() && momentum.is_finite()) {
                    return Err(Error::Domain("gaussian needs finite center, momentum and σ > 0".into()));
                }
            }
            TargetShape::Samples(s) if !s.len().is_power_of_two() || s.iter().all(|a| a.norm_sqr() == 0.0) => {
                return Err(Error::Domain("samples need 2^l values, not all zero".into()));
            }
            _ => {}
        }
        Ok(TargetWavefunction { shape, box_length })
    }

    /// Reads `index,re,im` rows; `#` lines are skipped.
    pub fn read_samples<R: BufRead>(input: R, box_length: f64) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (i, v) = parse_indexed_row(line, n + 1)?;
            if v.len() != 2 {
                return Err(Error::Parse { line: n + 1, msg: "expected index,re,im".into() });
            }
            rows.push((i, Complex64::new(v[0], v[1])));
        }
        let mut samples = vec![Complex64::new(0.0, 0.0); rows.len()];
        for (n, (i, a)) in rows.into_iter().enumerate() {
            let slot = samples
                .get_mut(i)
                .ok_or_else(|| Error::Parse { line: n + 1, msg: format!("index {i} out of range") })?;
            *slot = a;
        }
        Self::new(TargetShape::Samples(samples), box_length)
    }

    /// ψ(x), up to normalization.
    pub fn amplitude(&self, x: f64) -> Complex64 {
        let l = self.box_length;
        match &self.shape {
            TargetShape::Gaussian { center, sigma, momentum } => {
                let d = (x - center).rem_euclid(l);
                let d = if d >= l / 2.0 { d - l } else { d };
                let density: f64 = (-3..=3)
                    .map(|m| {
                        let y = d + m as f64 * l;
                        (-y * y / (2.0 * sigma * sigma)).exp()
                    })
                    .sum();
                Complex64::from_polar(density.sqrt(), momentum * d)
            }
            TargetShape::Delta { .. } => Complex64::new(0.0, 0.0),
            TargetShape::Uniform => Complex64::new(1.0, 0.0),
            TargetShape::PlaneWave { k } => Complex64::from_polar(1.0, 2.0 * PI * *k as f64 * x / l),
            TargetShape::Samples(s) => {
                let m = s.len() as f64;
                let cell = (x / l * m + 0.5).floor().rem_euclid(m) as usize;
                s[cell]
            }
        }
    }

    /// Unnormalized probability of every grid cell at resolution `l`, by the
    /// midpoint rule with `q` points per cell.
    pub fn cell_weights(&self, l: usize, q: usize) -> Result<Vec<f64>> {
        if q == 0 {
            return Err(Error::Domain("quadrature needs at least one point per leaf".into()));
        }
        let n = 1usize << l;
        if let TargetShape::Delta { cell } = self.shape {
            if cell >= n {
                return Err(Error::Domain(format!("delta cell {cell} outside {n} cells")));
            }
            return Ok((0..n).map(|k| if k == cell { 1.0 } else { 0.0 }).collect());
        }
        let dx = self.box_length / n as f64;
        let h = dx / q as f64;
        Ok((0..n)
            .map(|k| {
                let start = (k as f64 - 0.5) * dx;
                (0..q).map(|j| self.amplitude(start + (j as f64 + 0.5) * h).norm_sqr()).sum::<f64>() * h
            })
            .collect())
    }

    /// arg ψ at each grid point nL/N; 0 for a delta.
    pub fn grid_phases(&self, l: usize) -> Vec<f64> {
        let n = 1usize << l;
        let dx = self.box_length / n as f64;
        (0..n)
            .map(|k| match self.shape {
                TargetShape::Delta { .. } => 0.0,
                _ => self.amplitude(k as f64 * dx).arg(),
            })
            .collect()
    }
}

/// Normalized probability integrals for every node of the split tree.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitTree {
    levels: Vec<Vec<f64>>,
}

impl SplitTree {
    /// Tree over given leaf weights; parents are sums of children and the
    /// whole tree is scaled so the root is 1.
    pub fn from_leaves(leaves: Vec<f64>) -> Result<Self> {
        if !leaves.len().is_power_of_two() || leaves.len() < 2 {
            return Err(Error::Domain(format!("{} leaves is not 2^l with l ≥ 1", leaves.len())));
        }
        if leaves.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Domain("leaf weights must be finite and non-negative".into()));
        }
        let mut levels = vec![leaves];
        while levels[0].len() > 1 {
            let parent = levels[0].chunks(2).map(|c| c[0] + c[1]).collect();
            levels.insert(0, parent);
        }
        let total = levels[0][0];
        if total <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        for level in &mut levels {
            level.iter_mut().for_each(|w| *w /= total);
        }
        Ok(SplitTree { levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// I[level][k], level 0 being the root.
    pub fn integral(&self, level: usize, k: usize) -> f64 {
        self.levels[level][k]
    }

    pub fn level(&self, level: usize) -> &[f64] {
        &self.levels[level]
    }

    pub fn leaves(&self) -> &[f64] {
        &self.levels[self.depth()]
    }

    /// φ for the split of node (level − 1, k) into level `level`, 1 ≤ level ≤ depth.
    pub fn angle(&self, level: usize, k: usize) -> f64 {
        let parent = self.levels[level - 1][k];
        if parent <= 0.0 {
            return 0.0;
        }
        (self.levels[level][2 * k + 1] / parent).clamp(0.0, 1.0).sqrt().asin()
    }
}

pub fn build_split_tree(target: &TargetWavefunction, l: usize, q: usize) -> Result<SplitTree> {
    SplitTree::from_leaves(target.cell_weights(l, q)?)
}

/// Runs the rotation tree on `register`, which must read 0.
pub fn load_magnitude(state: &mut StateVector, register: &str, tree: &SplitTree) -> Result<()> {
    let reg = state.layout().register(register)?.clone();
    if reg.qubits() != tree.depth() {
        return Err(Error::LayoutMismatch(format!(
            "register '{register}' has {} qubits, tree has depth {}",
            reg.qubits(),
            tree.depth()
        )));
    }
    state.require_cleared(register)?;
    let l = reg.qubits();
    let amps = state.amplitudes_mut();
    for level in 1..=l {
        let shift = l - level;
        let bit = 1usize << (reg.offset() + shift);
        let (cos, sin): (Vec<f64>, Vec<f64>) =
            (0..1usize << (level - 1)).map(|k| tree.angle(level, k)).map(|p| (p.cos(), p.sin())).unzip();
        for index in 0..amps.len() {
            if index & bit != 0 {
                continue;
            }
            let prefix = reg.value(index) >> (shift + 1);
            let (a0, a1) = (amps[index], amps[index | bit]);
            amps[index] = a0 * cos[prefix] - a1 * sin[prefix];
            amps[index | bit] = a0 * sin[prefix] + a1 * cos[prefix];
        }
    }
    Ok(())
}

/// All registers at 0, then the rotation tree on `register`.
pub fn prepare_magnitude(layout: &RegisterLayout, register: &str, tree: &SplitTree) -> Result<StateVector> {
    let mut state = StateVector::new_basis_state(layout.clone(), 0)?;
    load_magnitude(&mut state, register, tree)?;
    Ok(state)
}

/// arg ψ as a phase table: F = arg/2π folded into [−½, ½), c = 2π.
pub fn phase_table(target: &TargetWavefunction, l: usize, b_frac: u32) -> Result<PhaseTable> {
    let folded: Vec<f64> = target
        .grid_phases(l)
        .iter()
        .map(|p| {
            let f = p / (2.0 * PI);
            f - (f + 0.5).floor()
        })
        .collect();
    PhaseTable::from_real(&[1 << l], &folded, 2.0 * PI, b_frac)
}

/// Magnitude by the rotation tree, then arg ψ through `ancilla`. The phase is
/// resolved to `min(w − 1, 24)` fractional bits of a turn for an ancilla of
/// width w.
pub fn prepare_full(
    layout: &RegisterLayout,
    register: &str,
    target: &TargetWavefunction,
    ancilla: &str,
    q: usize,
) -> Result<StateVector> {
    let l = layout.register(register)?.qubits();
    let width = layout.register(ancilla)?.qubits();
    if width < 2 {
        return Err(Error::Domain("phase ancilla needs at least 2 qubits".into()));
    }
    let tree = build_split_tree(target, l, q)?;
    let mut state = prepare_magnitude(layout, register, &tree)?;
    let b_frac = (width as u32 - 1).min(PhaseTable::DEFAULT_FRAC_BITS);
    let table = phase_table(target, l, b_frac)?;
    apply_phase_ancilla(&mut state, &[register], &table, ancilla)?;
    Ok(state)
}

/// Global index with the values of two equally sized registers exchanged.
fn swapped_index(index: usize, a: &crate::state::Register, b: &crate::state::Register) -> usize {
    let (va, vb) = (a.value(index), b.value(index));
    b.with_value(a.with_value(index, vb), va)
}

fn exchange_pair(
    state: &StateVector,
    reg_a: &str,
    reg_b: &str,
) -> Result<(crate::state::Register, crate::state::Register)> {
    let a = state.layout().register(reg_a)?.clone();
    let b = state.layout().register(reg_b)?.clone();
    if a.name() == b.name() || a.qubits() != b.qubits() {
        return Err(Error::LayoutMismatch(format!(
            "cannot exchange '{reg_a}' and '{reg_b}': need two distinct registers of equal width"
        )));
    }
    Ok((a, b))
}

/// Projects onto the exchange-symmetric (`sign` = +1) or antisymmetric
/// (`sign` = −1) subspace of two registers and renormalizes.
pub fn symmetrize_two_particle(state: &StateVector, reg_a: &str, reg_b: &str, sign: i32) -> Result<StateVector> {
    if sign != 1 && sign != -1 {
        return Err(Error::Domain(format!("exchange sign must be ±1, got {sign}")));
    }
    let (a, b) = exchange_pair(state, reg_a, reg_b)?;
    let amps = state.amplitudes();
    let projected: Vec<Complex64> = (0..amps.len())
        .map(|i| (amps[i] + amps[swapped_index(i, &a, &b)] * sign as f64) * 0.5)
        .collect();
    if crate::state::amplitude_norm(&projected) < 1e-12 {
        return Err(Error::ZeroNorm);
    }
    StateVector::normalized(state.layout().clone(), projected)
}

/// ⟨ψ|SWAP_ab|ψ⟩: +1 for symmetric, −1 for antisymmetric states.
pub fn exchange_expectation(state: &StateVector, reg_a: &str, reg_b: &str) -> Result<Complex64> {
    let (a, b) = exchange_pair(state, reg_a, reg_b)?;
    let amps = state.amplitudes();
    Ok((0..amps.len()).map(|i| amps[i].conj() * amps[swapped_index(i, &a, &b)]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{apply_qft, Direction};
    use crate::state::RegisterRole;
    use proptest::prelude::*;

    fn sys(l: usize) -> RegisterLayout {
        RegisterLayout::single("x", l, RegisterRole::System).unwrap()
    }

    fn gaussian(sigma: f64) -> TargetWavefunction {
        TargetWavefunction::new(TargetShape::Gaussian { center: 5.0, sigma, momentum: 0.0 }, 10.0).unwrap()
    }

    /// |ψ|² of the periodized Gaussian, written out independently.
    fn gaussian_density(x: f64, sigma: f64) -> f64 {
        (-6..=6).map(|m| (-(x - 5.0 + 10.0 * m as f64).powi(2) / (2.0 * sigma * sigma)).exp()).sum()
    }

    #[test]
    fn uniform_tree_is_balanced() {
        let target = TargetWavefunction::new(TargetShape::Uniform, 3.0).unwrap();
        let tree = build_split_tree(&target, 5, 4).unwrap();
        for i in 0..=5 {
            for &v in tree.level(i) {
                assert!((v - 0.5f64.powi(i as i32)).abs() < 1e-15);
            }
        }
        for i in 1..=5 {
            for k in 0..1 << (i - 1) {
                assert!((tree.angle(i, k) - PI / 4.0).abs() < 1e-14);
            }
        }
        let s = prepare_magnitude(&sys(5), "x", &tree).unwrap();
        for a in s.amplitudes() {
            assert!((a - Complex64::new(32f64.sqrt().recip(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn one_sided_support() {
        let mut samples = vec![Complex64::new(0.0, 0.0); 16];
        for (n, s) in samples.iter_mut().take(8).enumerate() {
            *s = Complex64::new(1.0 + n as f64, 0.0);
        }
        let target = TargetWavefunction::new(TargetShape::Samples(samples), 1.0).unwrap();
        let tree = build_split_tree(&target, 4, 3).unwrap();
        assert_eq!(tree.integral(1, 1), 0.0);
        assert_eq!(tree.angle(1, 0), 0.0);
    }

    #[test]
    fn delta_loads_basis_state() {
        let target = TargetWavefunction::new(TargetShape::Delta { cell: 37 }, 1.0).unwrap();
        let tree = build_split_tree(&target, 6, 16).unwrap();
        let s = prepare_magnitude(&sys(6), "x", &tree).unwrap();
        let expected = StateVector::new_basis_state(sys(6), 37).unwrap();
        assert!(s.max_deviation(&expected).unwrap() < 1e-12);
        assert!(build_split_tree(&target, 5, 1).is_err());
    }

    #[test]
    fn gaussian_leaves_match_fine_quadrature() {
        // Midpoint-rule error in a leaf scales as (dx/q)²/24·ρ''; at q = 2048
        // it falls below 1e-8 relative for the leaves carrying the weight.
        let sigma = 1.0;
        let l = 6;
        let tree = build_split_tree(&gaussian(sigma), l, 2048).unwrap();
        let n = 64;
        let dx = 10.0 / n as f64;
        let fine = 1_000_000usize;
        let h = 10.0 / fine as f64;
        let mut cells = vec![0.0; n];
        for j in 0..fine {
            let x = (j as f64 + 0.5) * h - dx / 2.0;
            cells[j * n / fine] += gaussian_density(x, sigma) * h;
        }
        let total: f64 = cells.iter().sum();
        for (k, (&a, &b)) in tree.leaves().iter().zip(&cells).enumerate() {
            let b = b / total;
            if b > 1e-6 {
                assert!(((a - b) / b).abs() < 1e-8, "leaf {k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn gaussian_loads_close_to_sampled_vector() {
        for l in [6, 8] {
            let tree = build_split_tree(&gaussian(1.0), l, DEFAULT_QUADRATURE_POINTS).unwrap();
            let s = prepare_magnitude(&sys(l), "x", &tree).unwrap();
            let n = 1 << l;
            let direct: Vec<Complex64> = (0..n)
                .map(|k| Complex64::new(gaussian_density(k as f64 * 10.0 / n as f64, 1.0).sqrt(), 0.0))
                .collect();
            let direct = StateVector::normalized(sys(l), direct).unwrap();
            assert!(s.fidelity(&direct).unwrap() >= 1.0 - 1e-6);
        }
    }

    #[test]
    fn loading_requires_cleared_register() {
        let tree = build_split_tree(&gaussian(1.0), 4, 4).unwrap();
        let mut s = StateVector::new_basis_state(sys(4), 3).unwrap();
        assert!(matches!(load_magnitude(&mut s, "x", &tree), Err(Error::NotCleared(_))));
    }

    fn with_ancilla(l: usize, w: usize) -> RegisterLayout {
        RegisterLayout::new()
            .with("x", l, RegisterRole::System)
            .unwrap()
            .with("anc", w, RegisterRole::Ancilla)
            .unwrap()
    }

    #[test]
    fn real_target_full_equals_magnitude() {
        let layout = with_ancilla(5, 8);
        let full = prepare_full(&layout, "x", &gaussian(1.0), "anc", 16).unwrap();
        let tree = build_split_tree(&gaussian(1.0), 5, 16).unwrap();
        let mag = prepare_magnitude(&layout, "x", &tree).unwrap();
        assert!(full.max_deviation(&mag).unwrap() < 1e-15);
    }

    #[test]
    fn plane_wave_is_qft_column() {
        let layout = with_ancilla(6, 10);
        let target = TargetWavefunction::new(TargetShape::PlaneWave { k: 5 }, 2.0).unwrap();
        let full = prepare_full(&layout, "x", &target, "anc", 4).unwrap();
        let mut column = StateVector::from_register_values(layout, &[("x", 5)]).unwrap();
        apply_qft(&mut column, "x", Direction::Forward).unwrap();
        assert!(full.max_deviation(&column).unwrap() < 1e-12);
    }

    #[test]
    fn moving_gaussian_matches_sampled_complex_vector() {
        let l = 8;
        let layout = with_ancilla(l, 16);
        let target =
            TargetWavefunction::new(TargetShape::Gaussian { center: 4.0, sigma: 0.8, momentum: 3.0 }, 10.0)
                .unwrap();
        let full = prepare_full(&layout, "x", &target, "anc", 16).unwrap();
        let sys_state = full.factor_out("anc", 0).unwrap();
        let n = 1 << l;
        let direct: Vec<Complex64> = (0..n)
            .map(|k| {
                let x = k as f64 * 10.0 / n as f64;
                let d = x - 4.0;
                Complex64::from_polar((-d * d / (4.0 * 0.64)).exp(), 3.0 * d)
            })
            .collect();
        let direct = StateVector::normalized(sys(l), direct).unwrap();
        assert!(sys_state.fidelity(&direct).unwrap() >= 1.0 - 1e-6);
    }

    fn two(l: usize) -> RegisterLayout {
        RegisterLayout::new()
            .with("a", l, RegisterRole::System)
            .unwrap()
            .with("b", l, RegisterRole::System)
            .unwrap()
    }

    #[test]
    fn symmetrization() {
        let same = StateVector::from_register_values(two(3), &[("a", 4), ("b", 4)]).unwrap();
        assert_eq!(symmetrize_two_particle(&same, "a", "b", 1).unwrap(), same);
        assert!(matches!(symmetrize_two_particle(&same, "a", "b", -1), Err(Error::ZeroNorm)));

        let s = StateVector::from_register_values(two(3), &[("a", 2), ("b", 5)]).unwrap();
        let anti = symmetrize_two_particle(&s, "a", "b", -1).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let layout = two(3);
        let (ra, rb) = (layout.register("a").unwrap(), layout.register("b").unwrap());
        let i25 = rb.with_value(ra.with_value(0, 2), 5);
        let i52 = rb.with_value(ra.with_value(0, 5), 2);
        for (i, a) in anti.amplitudes().iter().enumerate() {
            let expected = if i == i25 { r } else if i == i52 { -r } else { 0.0 };
            assert!((a - Complex64::new(expected, 0.0)).norm() < 1e-15);
        }
        assert!((exchange_expectation(&anti, "a", "b").unwrap() + 1.0).norm() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn tree_is_consistent(weights in prop::collection::vec(0.0f64..1.0, 32)) {
            prop_assume!(weights.iter().sum::<f64>() > 1e-3);
            let tree = SplitTree::from_leaves(weights).unwrap();
            prop_assert!((tree.integral(0, 0) - 1.0).abs() < 1e-12);
            for i in 1..=tree.depth() {
                for (j, &p) in tree.level(i - 1).iter().enumerate() {
                    let c = tree.level(i);
                    prop_assert!((c[2 * j] + c[2 * j + 1] - p).abs() < 1e-12);
                    prop_assert!((0.0..=1.0).contains(&c[2 * j]));
                }
            }
            let s = prepare_magnitude(&sys(5), "x", &tree).unwrap();
            prop_assert!((s.norm() - 1.0).abs() < 1e-10);
            for (a, w) in s.amplitudes().iter().zip(tree.leaves()) {
                prop_assert!(a.im == 0.0 && a.re >= -1e-15);
                prop_assert!((a.re * a.re - w).abs() < 1e-12);
            }
        }

        #[test]
        fn symmetrize_is_idempotent(seed in any::<u64>(), sign in prop::sample::select(vec![-1i32, 1])) {
            use rand::Rng;
            let mut rng = crate::state::seeded_rng(seed);
            let amps = (0..64).map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
            let s = StateVector::normalized(two(3), amps).unwrap();
            let once = symmetrize_two_particle(&s, "a", "b", sign).unwrap();
            let twice = symmetrize_two_particle(&once, "a", "b", sign).unwrap();
            prop_assert!(once.max_deviation(&twice).unwrap() < 1e-12);
        }
    }
}
