//! Exact diagonal/off-diagonal split of the transmon-resonator coupling and the
//! second-order Schrieffer-Wolff energies.
//!
//! For a symmetric transmon (`d = 0`) the coupling is `E_J (I − cos φ_r) ⊗ cos φ_t`.
//! Its diagonal in the bare product basis is known in closed form because
//! `⟨m|cos φ_r|m⟩ = e^{−φ²/2} L_m(φ²)`, so the zeroth-order energies
//! `D_j(m) = mω_r + ω_j + Λ_j − Λ_j e^{−φ²/2} L_m(φ²)` with `Λ_j = E_J⟨j|cos φ_t|j⟩`
//! already contain the exact dispersive shift at every photon number.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::operators::{
    laguerre_column, ln_factorials, transmon_eigensystem, ResonatorSpec, TransmonBasis,
    TransmonSpec, MAX_FOCK,
};

/// Denominators below this (GHz) are treated as a multiphoton resonance.
pub const RESONANCE_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagonalModel {
    /// `Λ_j`
    pub lamb: Vec<f64>,
    /// `diag_energy[j][m] = D_j(m)`
    pub diag_energy: Vec<Vec<f64>>,
    /// `chi_exact[j][m-1] = D_j(m) − D_j(m−1) − ω_r` for `m = 1..N`.
    pub chi_exact: Vec<Vec<f64>>,
    pub omega_r: f64,
}

impl DiagonalModel {
    /// Per-photon pull of level `j` between rungs `m−1` and `m` (`m ≥ 1`).
    pub fn chi(&self, j: usize, m: usize) -> Option<f64> {
        if m == 0 {
            return None;
        }
        self.chi_exact.get(j)?.get(m - 1).copied()
    }

    /// Qubit-state-dependent pull `χ_z(0) = ([D_1(1)−D_1(0)] − [D_0(1)−D_0(0)]) / 2`.
    pub fn chi_z0(&self) -> f64 {
        0.5 * (self.chi_exact[1][0] - self.chi_exact[0][0])
    }

    pub fn levels(&self) -> usize {
        self.lamb.len()
    }

    pub fn n_fock(&self) -> usize {
        self.diag_energy.first().map_or(0, Vec::len)
    }
}

fn diagonal_from_basis(basis: &TransmonBasis, r: &ResonatorSpec) -> DiagonalModel {
    let k = basis.levels();
    let n = r.n_fock;
    let x = r.phi_rzpf * r.phi_rzpf;
    let damp = (-0.5 * x).exp();
    let lag = laguerre_column(0, x, n - 1);
    let lamb: Vec<f64> = (0..k).map(|j| basis.spec.e_j * basis.cos_phi[(j, j)]).collect();
    let diag_energy: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            (0..n)
                .map(|m| {
                    m as f64 * r.omega_r + basis.energies[j] + lamb[j] - lamb[j] * damp * lag[m]
                })
                .collect()
        })
        .collect();
    // D_j(m) − D_j(m−1) − ω_r written out so no ω_r rounding enters.
    let chi_exact = lamb
        .iter()
        .map(|&l| (1..n).map(|m| -l * damp * (lag[m] - lag[m - 1])).collect())
        .collect();
    DiagonalModel {
        lamb,
        diag_energy,
        chi_exact,
        omega_r: r.omega_r,
    }
}

/// Zeroth-order (exact diagonal) energies and dispersive-shift tables.
pub fn sw_diagonal(t: &TransmonSpec, r: &ResonatorSpec) -> Result<DiagonalModel> {
    r.validate()?;
    if r.n_fock > MAX_FOCK {
        return Err(Error::FockCutoffOverflow { n_fock: r.n_fock, max: MAX_FOCK });
    }
    let basis = transmon_eigensystem(t)?;
    Ok(diagonal_from_basis(&basis, r))
}

/// Off-diagonal coupling `η_{a,b,c,d} = ⟨a,c|V|b,d⟩` for `(a,c) ≠ (b,d)`.
///
/// The coupling factorizes into a transmon factor `E_J⟨a|cos φ_t|b⟩` and a
/// resonator factor `δ_{cd} − ⟨c|cos φ_r|d⟩`; both are stored sparsely.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplingElements {
    /// `(a, b, E_J⟨a|cos φ_t|b⟩)`, nonzero entries only.
    pub transmon: Vec<(usize, usize, f64)>,
    /// `(c, d, δ_cd − ⟨c|cos φ_r|d⟩)`, nonzero entries only.
    pub resonator: Vec<(usize, usize, f64)>,
    dims: (usize, usize),
    t_dense: Vec<f64>,
    r_dense: Vec<f64>,
}

impl CouplingElements {
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let (k, n) = self.dims;
        if a >= k || b >= k || c >= n || d >= n || (a == b && c == d) {
            return 0.0;
        }
        self.t_dense[a * k + b] * self.r_dense[c * n + d]
    }

    /// All nonzero `(a, b, c, d, η)`.
    pub fn nonzero(&self) -> impl Iterator<Item = (usize, usize, usize, usize, f64)> + '_ {
        self.transmon.iter().flat_map(move |&(a, b, tv)| {
            self.resonator
                .iter()
                .filter(move |&&(c, d, _)| !(a == b && c == d))
                .map(move |&(c, d, rv)| (a, b, c, d, tv * rv))
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }
}

/// Resonator factor `δ_cd − ⟨c|cos φ_r|d⟩` from the Laguerre closed form:
/// for `c = d + k`, `k` even, `⟨c|cos φ_r|d⟩ = (−1)^{k/2} φ^k √(d!/c!) e^{−φ²/2} L_d^{(k)}(φ²)`.
fn resonator_factor_dense(phi: f64, n: usize) -> Vec<f64> {
    let x = phi * phi;
    let lf = ln_factorials(2 * n);
    let mut out = vec![0.0; n * n];
    for k in (0..n).step_by(2) {
        let lag = laguerre_column(k, x, n - 1 - k);
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        for (d, &l) in lag.iter().enumerate() {
            let c = d + k;
            let cos_cd = if phi == 0.0 {
                if k == 0 { 1.0 } else { 0.0 }
            } else if l == 0.0 {
                0.0
            } else {
                let ln_mag = k as f64 * phi.ln() + 0.5 * (lf[d] - lf[c]) - 0.5 * x + l.abs().ln();
                sign * l.signum() * ln_mag.exp()
            };
            let v = if k == 0 { 1.0 - cos_cd } else { -cos_cd };
            out[c * n + d] = v;
            out[d * n + c] = v;
        }
    }
    out
}

fn require_symmetric(t: &TransmonSpec) -> Result<()> {
    if t.d != 0.0 {
        return Err(invalid(
            "d",
            "the diagonal/off-diagonal split is implemented for symmetric junctions (d = 0)",
        ));
    }
    Ok(())
}

fn eta_from_basis(basis: &TransmonBasis, r: &ResonatorSpec) -> CouplingElements {
    let k = basis.levels();
    let n = r.n_fock;
    let e_j = basis.spec.e_j;
    let t_dense: Vec<f64> = (0..k * k)
        .map(|idx| e_j * basis.cos_phi[(idx / k, idx % k)])
        .collect();
    let r_dense = resonator_factor_dense(r.phi_rzpf, n);
    let transmon = (0..k * k)
        .filter(|&i| t_dense[i] != 0.0)
        .map(|i| (i / k, i % k, t_dense[i]))
        .collect();
    let resonator = (0..n * n)
        .filter(|&i| r_dense[i] != 0.0)
        .map(|i| (i / n, i % n, r_dense[i]))
        .collect();
    CouplingElements { transmon, resonator, dims: (k, n), t_dense, r_dense }
}

pub fn sw_eta(t: &TransmonSpec, r: &ResonatorSpec) -> Result<CouplingElements> {
    require_symmetric(t)?;
    r.validate()?;
    if r.n_fock > MAX_FOCK {
        return Err(Error::FockCutoffOverflow { n_fock: r.n_fock, max: MAX_FOCK });
    }
    let basis = transmon_eigensystem(t)?;
    Ok(eta_from_basis(&basis, r))
}

/// Which states receive a second-order correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwOptions {
    pub levels: Vec<usize>,
    pub max_photon: usize,
}

impl Default for SwOptions {
    fn default() -> Self {
        Self { levels: vec![0, 1], max_photon: 10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SwCorrectedSpectrum {
    pub levels: Vec<usize>,
    /// `energy2[i][m]` for level `levels[i]` and photon number `m`.
    pub energy2: Vec<Vec<f64>>,
    /// Zeroth-order energies on the same grid.
    pub energy0: Vec<Vec<f64>>,
}

impl SwCorrectedSpectrum {
    pub fn energy(&self, level: usize, m: usize) -> Option<f64> {
        let i = self.levels.iter().position(|&l| l == level)?;
        self.energy2[i].get(m).copied()
    }
}

/// Second-order energies `D_i(m) + Σ η²/(D_i(m) − D_k(l))` over all intermediate
/// `(k, l) ≠ (i, m)`. The denominators are differences of the exact diagonal
/// energies, so they include the ac-Stark shift of the transmon levels and the
/// photon-number-dependent pull of the resonator.
pub fn sw_second_order(
    t: &TransmonSpec,
    r: &ResonatorSpec,
    opts: &SwOptions,
) -> Result<SwCorrectedSpectrum> {
    require_symmetric(t)?;
    r.validate()?;
    if opts.max_photon >= r.n_fock {
        return Err(invalid(
            "max_photon",
            format!("must be < n_fock = {}, got {}", r.n_fock, opts.max_photon),
        ));
    }
    let basis = transmon_eigensystem(t)?;
    if let Some(&bad) = opts.levels.iter().find(|&&l| l >= basis.levels()) {
        return Err(invalid("levels", format!("level {bad} exceeds k_levels {}", basis.levels())));
    }
    let diag = diagonal_from_basis(&basis, r);
    let eta = eta_from_basis(&basis, r);
    let (k, n) = eta.dims();

    let mut worst: Option<((usize, usize), (usize, usize), f64)> = None;
    let mut energy2 = Vec::with_capacity(opts.levels.len());
    let mut energy0 = Vec::with_capacity(opts.levels.len());
    for &i in &opts.levels {
        let mut row2 = Vec::with_capacity(opts.max_photon + 1);
        let mut row0 = Vec::with_capacity(opts.max_photon + 1);
        for m in 0..=opts.max_photon {
            let e0 = diag.diag_energy[i][m];
            let mut shift = 0.0;
            for kk in 0..k {
                let tv = eta.t_dense[i * k + kk];
                if tv == 0.0 {
                    continue;
                }
                for l in 0..n {
                    if kk == i && l == m {
                        continue;
                    }
                    let v = tv * eta.r_dense[m * n + l];
                    if v == 0.0 {
                        continue;
                    }
                    let den = e0 - diag.diag_energy[kk][l];
                    if den.abs() < RESONANCE_THRESHOLD
                        && worst.is_none_or(|(_, _, w)| den.abs() < w.abs())
                    {
                        worst = Some(((i, m), (kk, l), den));
                    }
                    shift += v * v / den;
                }
            }
            row0.push(e0);
            row2.push(e0 + shift);
        }
        energy2.push(row2);
        energy0.push(row0);
    }
    if let Some((state, partner, denominator)) = worst {
        return Err(Error::NearResonance { state, partner, denominator });
    }
    Ok(SwCorrectedSpectrum { levels: opts.levels.clone(), energy2, energy0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{assemble_hamiltonian, presets};
    use approx::assert_relative_eq;

    fn small_pair(phi: f64) -> (TransmonSpec, ResonatorSpec) {
        (presets::deep_transmon().with_levels(8), ResonatorSpec::new(8.8, phi).with_fock(30))
    }

    #[test]
    fn decoupled_diagonal_is_bare() {
        let (t, r) = small_pair(0.0);
        let dm = sw_diagonal(&t, &r).unwrap();
        let basis = transmon_eigensystem(&t).unwrap();
        for j in 0..dm.levels() {
            for m in 0..dm.n_fock() {
                assert_relative_eq!(
                    dm.diag_energy[j][m],
                    m as f64 * 8.8 + basis.energies[j],
                    epsilon = 1e-12
                );
            }
            assert!(dm.chi_exact[j].iter().all(|c| c.abs() < 1e-12));
        }
    }

    #[test]
    fn diagonal_matches_assembled_matrix() {
        let (t, r) = small_pair(0.09);
        let dm = sw_diagonal(&t, &r).unwrap();
        let h = assemble_hamiltonian(&t, &r).unwrap();
        for j in 0..dm.levels() {
            for m in 0..dm.n_fock() {
                let idx = h.index(j, m);
                assert!((dm.diag_energy[j][m] - h.matrix[(idx, idx)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn split_reconstructs_hamiltonian() {
        let (t, r) = small_pair(0.09);
        let dm = sw_diagonal(&t, &r).unwrap();
        let eta = sw_eta(&t, &r).unwrap();
        let h = assemble_hamiltonian(&t, &r).unwrap();
        let (k, n) = h.dims;
        for row in 0..k * n {
            let (a, c) = h.label(row);
            for col in 0..k * n {
                let (b, d) = h.label(col);
                let rebuilt = if row == col { dm.diag_energy[a][c] } else { eta.get(a, b, c, d) };
                let exact = h.element(row, col);
                assert!((exact.re - rebuilt).abs() < 1e-10 && exact.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn selection_rules() {
        let (t, r) = small_pair(0.09);
        let eta = sw_eta(&t, &r).unwrap();
        for (a, b, c, d, v) in eta.nonzero() {
            assert!((c + d) % 2 == 0 && (a + b) % 2 == 0, "{a} {b} {c} {d} {v}");
            assert_relative_eq!(v, eta.get(b, a, d, c), epsilon = 1e-15);
        }
        assert_eq!(eta.get(0, 0, 3, 0), 0.0);
        assert_eq!(eta.get(0, 1, 2, 0), 0.0);
    }

    #[test]
    fn leading_order_coupling() {
        // cos φ_r ≈ 1 − φ²(a + a†)²/2 and ⟨2|(a + a†)²|0⟩ = √2
        let phi = 0.01;
        let (t, r) = small_pair(phi);
        let eta = sw_eta(&t, &r).unwrap();
        let basis = transmon_eigensystem(&t).unwrap();
        let expect = t.e_j * basis.cos_phi[(0, 0)] * phi * phi * 2f64.sqrt() / 2.0;
        assert_relative_eq!(eta.get(0, 0, 2, 0), expect, max_relative = 1e-3);
    }

    #[test]
    fn chi_has_no_resonator_frequency() {
        let t = presets::deep_transmon();
        let a = sw_diagonal(&t, &presets::deep_resonator(8.8)).unwrap();
        let b = sw_diagonal(&t, &presets::deep_resonator(10.5)).unwrap();
        assert_eq!(a.chi_z0(), b.chi_z0());
        assert!((a.chi_z0() + 0.0128).abs() < 0.00128, "{}", a.chi_z0());
    }

    #[test]
    fn no_coupling_no_correction() {
        let (t, r) = small_pair(0.0);
        let sw = sw_second_order(&t, &r, &SwOptions::default()).unwrap();
        assert_eq!(sw.energy2, sw.energy0);
    }

    #[test]
    fn asymmetric_junction_rejected() {
        let (t, r) = small_pair(0.09);
        assert!(sw_eta(&t.with_asymmetry(0.1), &r).is_err());
    }

    #[test]
    fn reports_one_five_resonance() {
        // ω_r tuned so that D_1(6) = D_5(4).
        let t = presets::deep_transmon();
        let probe = ResonatorSpec::new(1.0, 0.09).with_fock(40);
        let d = sw_diagonal(&t, &probe).unwrap();
        let offset = |j: usize, m: usize| d.diag_energy[j][m] - m as f64;
        let omega_r = (offset(5, 4) - offset(1, 6)) / 2.0;
        let r = ResonatorSpec::new(omega_r, 0.09).with_fock(40);
        match sw_second_order(&t, &r, &SwOptions::default()) {
            Err(Error::NearResonance { state, partner, denominator }) => {
                assert_eq!((state, partner), ((1, 6), (5, 4)));
                assert!(denominator.abs() < 1e-9);
            }
            other => panic!("expected a near resonance, got {other:?}"),
        }
    }
}
