//! Exact diagonalization, branch labeling, modular spectra and critical photon
//! numbers.

use std::io::Write;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{assemble_hamiltonian, JointHamiltonian};
use crate::error::{invalid, Error, Result};
use crate::linalg::{sym_eigen, symmetry_defect, RMat};
use crate::operators::{transmon_eigensystem, ResonatorSpec, TransmonSpec};

/// Tolerance used to flag near-tied overlaps during labeling.
pub const DEGENERACY_TOLERANCE: f64 = 1e-6;

/// Number of branches kept in the folded spectrum.
pub const MODULAR_BRANCHES: usize = 15;

#[derive(Debug, Clone)]
pub struct JointEigensystem {
    pub eigenvalues: Vec<f64>,
    /// Columns in the (rephased) product basis of the Hamiltonian, index `j·N + n`.
    pub eigenvectors: RMat,
    pub dims: (usize, usize),
    pub omega_r: f64,
}

impl JointEigensystem {
    /// `max |VᵀV − I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.eigenvectors.transpose() * &self.eigenvectors;
        let n = g.nrows();
        let mut out = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let id = if i == j { 1.0 } else { 0.0 };
                out = out.max((g[(i, j)] - id).abs());
            }
        }
        out
    }

    /// Transmon and resonator populations `(N_t, N_r)` of eigenvector `col`.
    pub fn populations(&self, col: usize) -> (f64, f64) {
        let n = self.dims.1;
        let mut nt = 0.0;
        let mut nr = 0.0;
        for (idx, x) in self.eigenvectors.col_as_slice(col).iter().enumerate() {
            let p = x * x;
            nt += (idx / n) as f64 * p;
            nr += (idx % n) as f64 * p;
        }
        (nt, nr)
    }

    /// Transmon level carrying the largest reduced population of eigenvector `col`.
    pub fn dominant_level(&self, col: usize) -> usize {
        let (k, n) = self.dims;
        let x = self.eigenvectors.col_as_slice(col);
        let marginal: Vec<f64> = (0..k)
            .map(|j| x[j * n..(j + 1) * n].iter().map(|v| v * v).sum())
            .collect();
        (0..k).fold(0, |best, j| if marginal[j] > marginal[best] { j } else { best })
    }
}

/// Full dense symmetric eigensolve of the joint Hamiltonian.
pub fn diagonalize(h: &JointHamiltonian) -> Result<JointEigensystem> {
    let scale = h.max_abs();
    let defect = symmetry_defect(&h.matrix);
    if defect > 1e-12 * scale.max(1.0) {
        return Err(Error::EigenSolver { dim: h.dim(), max_abs: scale, defect });
    }
    let (vals, vecs) = sym_eigen(&h.matrix).ok_or(Error::EigenSolver {
        dim: h.dim(),
        max_abs: scale,
        defect,
    })?;
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenSolver { dim: h.dim(), max_abs: scale, defect });
    }
    Ok(JointEigensystem {
        eigenvalues: vals,
        eigenvectors: vecs,
        dims: h.dims,
        omega_r: h.resonator.omega_r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub eigen_index: usize,
    pub energy: f64,
    pub n_t: f64,
    pub n_r: f64,
    /// Transmon level with the largest reduced population.
    pub dominant: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchTable {
    /// `branches[j][n]`
    pub branches: Vec<Vec<BranchPoint>>,
    /// Eigen-index → `(j, n)` for labeled states.
    pub assignment: Vec<Option<(usize, usize)>>,
    pub dims: (usize, usize),
    pub omega_r: f64,
    /// Number of labeling steps whose two best overlaps were within
    /// [`DEGENERACY_TOLERANCE`].
    pub degenerate_ties: usize,
}

/// A lasting change of the dominant transmon level along a branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Swap {
    pub branch: usize,
    /// First rung with the new dominant level.
    pub rung: usize,
    pub from: usize,
    pub to: usize,
}

impl Swap {
    pub fn preserves_parity(&self) -> bool {
        self.from % 2 == self.to % 2
    }
}

/// Rungs a new dominant level must persist for a change to count as a swap.
pub const SWAP_PERSISTENCE: usize = 3;

impl BranchTable {
    pub fn rungs(&self) -> usize {
        self.branches.first().map_or(0, Vec::len)
    }

    /// Swaps along branch `j`: the dominant transmon level changes at rung `n`
    /// and keeps its new value for at least [`SWAP_PERSISTENCE`] rungs, so that
    /// single-rung hybridizations at narrow anticrossings are not counted.
    pub fn swaps_of(&self, j: usize) -> Vec<Swap> {
        let dom: Vec<usize> = self.branches[j].iter().map(|p| p.dominant).collect();
        let mut out = Vec::new();
        let mut current = dom.first().copied().unwrap_or(j);
        let mut n = 1;
        while n < dom.len() {
            let cand = dom[n];
            if cand != current {
                let end = (n + SWAP_PERSISTENCE).min(dom.len());
                if end - n == SWAP_PERSISTENCE && dom[n..end].iter().all(|&d| d == cand) {
                    out.push(Swap { branch: j, rung: n, from: current, to: cand });
                    current = cand;
                }
            }
            n += 1;
        }
        out
    }

    /// Swaps along the two computational branches.
    pub fn computational_swaps(&self) -> Vec<Swap> {
        let mut out = self.swaps_of(0);
        if self.branches.len() > 1 {
            out.extend(self.swaps_of(1));
        }
        out
    }

    /// Swaps along every branch.
    pub fn all_swaps(&self) -> Vec<Swap> {
        (0..self.branches.len()).flat_map(|j| self.swaps_of(j)).collect()
    }

    /// One row per labeled state.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["branch", "rung", "eigen_index", "energy_ghz", "n_t", "n_r", "dominant_level"])?;
        for (j, b) in self.branches.iter().enumerate() {
            for (n, p) in b.iter().enumerate() {
                wr.write_record([
                    j.to_string(),
                    n.to_string(),
                    p.eigen_index.to_string(),
                    format!("{:.12e}", p.energy),
                    format!("{:.10e}", p.n_t),
                    format!("{:.10e}", p.n_r),
                    p.dominant.to_string(),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Highest trusted rung count: `N − ⌈4√K⌉`.
pub fn rung_cap(dims: (usize, usize)) -> usize {
    let guard = (4.0 * (dims.0 as f64).sqrt()).ceil() as usize;
    dims.1.saturating_sub(guard).max(1)
}

/// Index of the largest score among unassigned candidates; lowest index wins ties.
fn best_unassigned(
    scores: impl Iterator<Item = f64>,
    assigned: &[bool],
    ties: &mut usize,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    let mut second = f64::NEG_INFINITY;
    for (i, s) in scores.enumerate() {
        if assigned[i] {
            continue;
        }
        match best {
            None => best = Some((i, s)),
            Some((_, b)) if s > b => {
                second = b;
                best = Some((i, s));
            }
            Some(_) => second = second.max(s),
        }
    }
    let (idx, top) = best?;
    if top - second < DEGENERACY_TOLERANCE && top > DEGENERACY_TOLERANCE {
        *ties += 1;
        log::warn!("near-degenerate branch overlap: best {top:.3e}, runner-up {second:.3e}");
    }
    Some(idx)
}

/// Labels eigenstates into branches.
///
/// Each branch is seeded by the eigenstate with the largest overlap with
/// `|j, 0⟩`; rung `n+1` is the unassigned eigenstate maximizing
/// `|⟨λ|a†|j, n⟩‾|²` where `|j, n⟩‾` is the state labeled at rung `n`. Branches
/// are filled in order `j = 0, 1, …` up to [`rung_cap`].
pub fn label_branches(eig: &JointEigensystem) -> BranchTable {
    let (k, n) = eig.dims;
    let dim = k * n;
    let v = &eig.eigenvectors;
    let rungs = rung_cap(eig.dims);

    // a† on every column. In the rephased basis a† = −i·(real a†), which does
    // not change overlap magnitudes.
    let mut av = Mat::<f64>::zeros(dim, dim);
    for c in 0..dim {
        let src = v.col_as_slice(c);
        let dst = av.col_as_slice_mut(c);
        for j in 0..k {
            for m in 0..n - 1 {
                dst[j * n + m + 1] = ((m + 1) as f64).sqrt() * src[j * n + m];
            }
        }
    }
    // w[(λ, μ)] = ⟨λ|a†|μ⟩
    let w = v.transpose() * &av;
    drop(av);

    let mut assigned = vec![false; dim];
    let mut assignment = vec![None; dim];
    let mut ties = 0usize;
    let mut seeds = Vec::with_capacity(k);
    for j in 0..k {
        let row = j * n;
        let seed = best_unassigned((0..dim).map(|c| v[(row, c)].powi(2)), &assigned, &mut ties)
            .expect("more eigenstates than branches");
        assigned[seed] = true;
        assignment[seed] = Some((j, 0));
        seeds.push(seed);
    }
    let mut ladders: Vec<Vec<usize>> = seeds.iter().map(|&s| vec![s]).collect();
    for (j, ladder) in ladders.iter_mut().enumerate() {
        for rung in 1..rungs {
            let prev = *ladder.last().unwrap();
            let col = w.col_as_slice(prev);
            let Some(next) = best_unassigned(col.iter().map(|x| x * x), &assigned, &mut ties)
            else {
                break;
            };
            assigned[next] = true;
            assignment[next] = Some((j, rung));
            ladder.push(next);
        }
    }
    let branches = ladders
        .iter()
        .map(|ladder| {
            ladder
                .iter()
                .map(|&idx| {
                    let (n_t, n_r) = eig.populations(idx);
                    BranchPoint {
                        eigen_index: idx,
                        energy: eig.eigenvalues[idx],
                        n_t,
                        n_r,
                        dominant: eig.dominant_level(idx),
                    }
                })
                .collect()
        })
        .collect();
    BranchTable {
        branches,
        assignment,
        dims: eig.dims,
        omega_r: eig.omega_r,
        degenerate_ties: ties,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularPoint {
    pub branch: usize,
    pub rung: usize,
    pub n_r: f64,
    /// `(E − E_{0,0}) mod ω_r`, in `[0, ω_r)`.
    pub folded: f64,
}

/// Energies of the first [`MODULAR_BRANCHES`] branches folded into `[0, ω_r)`,
/// measured from the dressed ground state; ordered by branch then rung.
pub fn modular_spectrum(bt: &BranchTable, omega_r: f64) -> Vec<ModularPoint> {
    let origin = bt.branches[0][0].energy;
    bt.branches
        .iter()
        .take(MODULAR_BRANCHES)
        .enumerate()
        .flat_map(|(j, b)| {
            b.iter().enumerate().map(move |(n, p)| ModularPoint {
                branch: j,
                rung: n,
                n_r: p.n_r,
                folded: (p.energy - origin).rem_euclid(omega_r),
            })
        })
        .collect()
}

pub fn write_modular_csv<W: Write>(points: &[ModularPoint], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["branch", "rung", "n_r", "folded_energy_ghz"])?;
    for p in points {
        wr.write_record([
            p.branch.to_string(),
            p.rung.to_string(),
            format!("{:.10e}", p.n_r),
            format!("{:.12e}", p.folded),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// A critical photon number, or the search limit when no trigger was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CritValue {
    pub value: usize,
    pub censored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NcritResult {
    pub ground: CritValue,
    pub excited: CritValue,
    pub n_crit: CritValue,
    pub cap: usize,
}

/// First rung of a run of at least `run` consecutive rungs with `N_t > threshold`,
/// scanning rungs `0..cap`.
pub fn first_sustained(n_t: &[f64], threshold: f64, run: usize, cap: usize) -> Option<usize> {
    let limit = cap.min(n_t.len());
    let mut start = None;
    for (n, &x) in n_t[..limit].iter().enumerate() {
        if x > threshold {
            let s = *start.get_or_insert(n);
            if n + 1 - s >= run {
                return Some(s);
            }
        } else {
            start = None;
        }
    }
    None
}

/// Critical photon numbers with the default search cap `min(N − 10, rungs)`.
pub fn find_ncrit(bt: &BranchTable) -> NcritResult {
    find_ncrit_capped(bt, bt.dims.1.saturating_sub(10))
}

/// Ground branch triggers at `N_t > 2`, excited at `N_t > 3`, each for at least
/// three consecutive rungs; `n_crit` is the smaller of the two.
pub fn find_ncrit_capped(bt: &BranchTable, cap: usize) -> NcritResult {
    let cap = cap.min(bt.rungs());
    let classify = |j: usize, threshold: f64| {
        let n_t: Vec<f64> = bt.branches[j].iter().map(|p| p.n_t).collect();
        match first_sustained(&n_t, threshold, 3, cap) {
            Some(value) => CritValue { value, censored: false },
            None => CritValue { value: cap, censored: true },
        }
    };
    let ground = classify(0, 2.0);
    let excited = classify(1, 3.0);
    let n_crit = match (ground.censored, excited.censored) {
        (true, true) => CritValue { value: cap, censored: true },
        (false, true) => ground,
        (true, false) => excited,
        (false, false) => if ground.value <= excited.value { ground } else { excited },
    };
    NcritResult { ground, excited, n_crit, cap }
}

/// Assemble, diagonalize, label and classify one parameter point.
pub fn ncrit_pipeline(t: &TransmonSpec, r: &ResonatorSpec) -> Result<(BranchTable, NcritResult)> {
    let h = assemble_hamiltonian(t, r)?;
    let eig = diagonalize(&h)?;
    drop(h);
    let bt = label_branches(&eig);
    let nc = find_ncrit(&bt);
    Ok((bt, nc))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    EJOverEC,
    Delta,
    D,
    NG,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::EJOverEC => "e_j_over_e_c",
            SweepAxis::Delta => "delta",
            SweepAxis::D => "d",
            SweepAxis::NG => "n_g",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub name: SweepAxis,
    pub values: Vec<f64>,
}

fn default_sweep_e_c() -> f64 {
    0.215
}
fn default_sweep_phi() -> f64 {
    0.09
}
fn default_sweep_ratio() -> f64 {
    100.0
}
fn default_sweep_delta() -> f64 {
    -4.0
}
fn default_sweep_levels() -> usize {
    16
}
fn default_sweep_fock() -> usize {
    100
}

/// Parameters held fixed across a sweep; the two axes override their fields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBase {
    #[serde(default = "default_sweep_e_c")]
    pub e_c: f64,
    #[serde(default = "default_sweep_phi")]
    pub phi_rzpf: f64,
    #[serde(default = "default_sweep_ratio")]
    pub e_j_over_e_c: f64,
    /// `ω_q − ω_r` in GHz.
    #[serde(default = "default_sweep_delta")]
    pub delta: f64,
    #[serde(default)]
    pub d: f64,
    #[serde(default)]
    pub n_g: f64,
    #[serde(default = "default_sweep_levels")]
    pub k_levels: usize,
    #[serde(default = "default_sweep_fock")]
    pub n_fock: usize,
}

impl Default for SweepBase {
    fn default() -> Self {
        Self {
            e_c: default_sweep_e_c(),
            phi_rzpf: default_sweep_phi(),
            e_j_over_e_c: default_sweep_ratio(),
            delta: default_sweep_delta(),
            d: 0.0,
            n_g: 0.0,
            k_levels: default_sweep_levels(),
            n_fock: default_sweep_fock(),
        }
    }
}

impl SweepBase {
    fn with(mut self, axis: SweepAxis, v: f64) -> Self {
        match axis {
            SweepAxis::EJOverEC => self.e_j_over_e_c = v,
            SweepAxis::Delta => self.delta = v,
            SweepAxis::D => self.d = v,
            SweepAxis::NG => self.n_g = v,
        }
        self
    }

    /// Mode parameters for this point, with `ω_r = ω_q − Δ`.
    pub fn specs(&self) -> Result<(TransmonSpec, ResonatorSpec)> {
        let t = TransmonSpec::from_ratio(self.e_c, self.e_j_over_e_c)
            .with_asymmetry(self.d)
            .with_n_g(self.n_g)
            .with_levels(self.k_levels);
        let omega_q = transmon_eigensystem(&t.with_levels(2))?.qubit_frequency();
        let omega_r = omega_q - self.delta;
        let r = ResonatorSpec::new(omega_r, self.phi_rzpf).with_fock(self.n_fock);
        r.validate()?;
        Ok((t, r))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis_1: GridAxis,
    pub axis_2: GridAxis,
    #[serde(default)]
    pub base: SweepBase,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axis_1.name == self.axis_2.name {
            return Err(invalid("axis_2", "must differ from axis_1"));
        }
        if self.axis_1.values.is_empty() || self.axis_2.values.is_empty() {
            return Err(invalid("values", "grid axes must be non-empty"));
        }
        Ok(())
    }

    pub fn point(&self, i: usize, j: usize) -> SweepBase {
        self.base
            .with(self.axis_1.name, self.axis_1.values[i])
            .with(self.axis_2.name, self.axis_2.values[j])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CritMap {
    pub axis_1: GridAxis,
    pub axis_2: GridAxis,
    /// `n_crit[i][j]` at `(axis_1[i], axis_2[j])`; censored cells hold the cap.
    pub n_crit: Vec<Vec<usize>>,
    pub censored: Vec<Vec<bool>>,
    pub ground: Vec<Vec<CritValue>>,
    pub excited: Vec<Vec<CritValue>>,
    /// Resonator frequency used at each point.
    pub omega_r: Vec<Vec<f64>>,
    /// Per-point failure messages; such cells hold `n_crit = 0`, `censored = false`.
    pub errors: Vec<Vec<Option<String>>>,
}

impl CritMap {
    /// One row per grid point.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record([
            "i",
            "j",
            self.axis_1.name.name(),
            self.axis_2.name.name(),
            "omega_r_ghz",
            "n_crit",
            "censored",
            "n_crit_ground",
            "n_crit_excited",
            "error",
        ])?;
        for (i, a) in self.axis_1.values.iter().enumerate() {
            for (j, b) in self.axis_2.values.iter().enumerate() {
                wr.write_record([
                    i.to_string(),
                    j.to_string(),
                    format!("{a}"),
                    format!("{b}"),
                    format!("{:.10}", self.omega_r[i][j]),
                    self.n_crit[i][j].to_string(),
                    self.censored[i][j].to_string(),
                    self.ground[i][j].value.to_string(),
                    self.excited[i][j].value.to_string(),
                    self.errors[i][j].clone().unwrap_or_default(),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

struct Cell {
    omega_r: f64,
    outcome: std::result::Result<NcritResult, String>,
}

fn run_point(p: &SweepBase) -> Cell {
    let specs = p.specs();
    let omega_r = specs.as_ref().map_or(f64::NAN, |(_, r)| r.omega_r);
    let outcome = specs
        .and_then(|(t, r)| ncrit_pipeline(&t, &r))
        .map(|(_, nc)| nc)
        .map_err(|e| e.to_string());
    Cell { omega_r, outcome }
}

/// Critical photon numbers over a 2-D grid. Points run in parallel on the
/// current rayon pool and are collected in grid order.
pub fn sweep_ncrit(spec: &SweepSpec) -> Result<CritMap> {
    spec.validate()?;
    let (n1, n2) = (spec.axis_1.values.len(), spec.axis_2.values.len());
    let cells: Vec<Cell> = (0..n1 * n2)
        .into_par_iter()
        .map(|idx| run_point(&spec.point(idx / n2, idx % n2)))
        .collect();
    let blank = CritValue { value: 0, censored: false };
    let mut map = CritMap {
        axis_1: spec.axis_1.clone(),
        axis_2: spec.axis_2.clone(),
        n_crit: vec![vec![0; n2]; n1],
        censored: vec![vec![false; n2]; n1],
        ground: vec![vec![blank; n2]; n1],
        excited: vec![vec![blank; n2]; n1],
        omega_r: vec![vec![f64::NAN; n2]; n1],
        errors: vec![vec![None; n2]; n1],
    };
    for (idx, cell) in cells.into_iter().enumerate() {
        let (i, j) = (idx / n2, idx % n2);
        map.omega_r[i][j] = cell.omega_r;
        match cell.outcome {
            Ok(nc) => {
                map.n_crit[i][j] = nc.n_crit.value;
                map.censored[i][j] = nc.n_crit.censored;
                map.ground[i][j] = nc.ground;
                map.excited[i][j] = nc.excited;
            }
            Err(e) => {
                log::warn!("sweep point ({i}, {j}) failed: {e}");
                map.errors[i][j] = Some(e);
            }
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::presets;

    fn decoupled() -> JointEigensystem {
        let t = presets::deep_transmon().with_levels(4);
        let r = ResonatorSpec::new(8.8, 0.0).with_fock(30);
        diagonalize(&assemble_hamiltonian(&t, &r).unwrap()).unwrap()
    }

    #[test]
    fn decoupled_eigenvalues_are_bare() {
        let t = presets::deep_transmon().with_levels(4);
        let r = ResonatorSpec::new(8.8, 0.0).with_fock(30);
        let h = assemble_hamiltonian(&t, &r).unwrap();
        let mut bare = h.bare_energies();
        bare.sort_by(f64::total_cmp);
        let eig = diagonalize(&h).unwrap();
        for (a, b) in eig.eigenvalues.iter().zip(&bare) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(eig.orthonormality_defect() < 1e-10);
    }

    #[test]
    fn decoupled_labeling_is_identity() {
        let eig = decoupled();
        let bt = label_branches(&eig);
        assert_eq!(bt.rungs(), 30 - 8);
        for (j, b) in bt.branches.iter().enumerate() {
            for (n, p) in b.iter().enumerate() {
                assert!((p.n_t - j as f64).abs() < 1e-12);
                assert!((p.n_r - n as f64).abs() < 1e-12);
            }
        }
        let mut seen = std::collections::HashSet::new();
        for b in &bt.branches {
            for p in b {
                assert!(seen.insert(p.eigen_index));
            }
        }
    }

    #[test]
    fn decoupled_folded_energies_constant() {
        let bt = label_branches(&decoupled());
        let pts = modular_spectrum(&bt, 8.8);
        for j in 0..4 {
            let f: Vec<f64> = pts.iter().filter(|p| p.branch == j).map(|p| p.folded).collect();
            assert!(f.iter().all(|x| (x - f[0]).abs() < 1e-9 || (x - f[0]).abs() > 8.8 - 1e-9));
        }
    }

    #[test]
    fn three_in_a_row_rule() {
        let spike = [0.0, 0.1, 2.5, 0.2, 2.1, 2.2, 0.0];
        assert_eq!(first_sustained(&spike, 2.0, 3, 7), None);
        let run = [0.0, 2.5, 0.1, 2.1, 2.2, 2.3, 0.0];
        assert_eq!(first_sustained(&run, 2.0, 3, 7), Some(3));
        assert_eq!(first_sustained(&run, 2.0, 3, 5), None);
        // strict threshold
        assert_eq!(first_sustained(&[2.0, 2.0, 2.0], 2.0, 3, 3), None);
    }

    #[test]
    fn flat_branch_is_censored() {
        let bt = label_branches(&decoupled());
        let nc = find_ncrit(&bt);
        assert!(nc.n_crit.censored && nc.ground.censored && nc.excited.censored);
        assert_eq!(nc.n_crit.value, 20);
    }

    #[test]
    fn sweep_single_point_matches_pipeline() {
        let base = SweepBase { k_levels: 6, n_fock: 40, ..SweepBase::default() };
        let spec = SweepSpec {
            axis_1: GridAxis { name: SweepAxis::EJOverEC, values: vec![60.0] },
            axis_2: GridAxis { name: SweepAxis::Delta, values: vec![-3.0] },
            base,
        };
        let map = sweep_ncrit(&spec).unwrap();
        let (t, r) = spec.point(0, 0).specs().unwrap();
        let (_, nc) = ncrit_pipeline(&t, &r).unwrap();
        assert_eq!(map.n_crit[0][0], nc.n_crit.value);
        assert_eq!(map.censored[0][0], nc.n_crit.censored);
    }

    #[test]
    fn sweep_records_point_failures() {
        let spec = SweepSpec {
            axis_1: GridAxis { name: SweepAxis::D, values: vec![0.0, 1.5] },
            axis_2: GridAxis { name: SweepAxis::Delta, values: vec![-3.0] },
            base: SweepBase { k_levels: 4, n_fock: 20, ..SweepBase::default() },
        };
        let map = sweep_ncrit(&spec).unwrap();
        assert!(map.errors[0][0].is_none());
        assert!(map.errors[1][0].as_deref().unwrap().contains("`d`"));
    }
}
