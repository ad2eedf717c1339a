//! Circuit reduction and Hamiltonian assembly.
//!
//! The joint Hamiltonian
//! `ω_r a†a + H_t + 2E_J sin²(φ_r/2) cos φ_t − dE_J sin φ_r sin φ_t`
//! is complex Hermitian in the plain product basis `|j⟩⊗|n⟩` because `sin φ_t`
//! is imaginary in the real transmon eigenbasis. Rephasing the Fock states as
//! `|n⟩ → iⁿ|n⟩` makes every element real, so the matrix is stored real
//! symmetric. Populations, overlaps of `|j,n⟩` and spectra are unaffected; use
//! [`JointHamiltonian::element`] or [`JointHamiltonian::to_standard_basis`] for
//! plain-basis elements.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{CMat, RMat};
use crate::operators::{
    resonator_operators, transmon_eigensystem, ResonatorOps, ResonatorSpec, TransmonBasis,
    TransmonSpec,
};

const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
const PLANCK: f64 = 6.626_070_15e-34;

/// `e²/h` for a 1 fF capacitance, in GHz.
pub fn charge_energy_unit() -> f64 {
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (PLANCK * 1e-15) * 1e-9
}

/// `Φ₀²/(π² h)` for a 1 nH inductance, in GHz.
pub fn inductive_energy_unit() -> f64 {
    let flux_quantum = PLANCK / (2.0 * ELEMENTARY_CHARGE);
    flux_quantum * flux_quantum / (std::f64::consts::PI.powi(2) * PLANCK * 1e-9) * 1e-9
}

/// Lumped elements of the symmetric two-junction circuit (C₁ = C₂ = C).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitElements {
    /// fF
    pub c: f64,
    /// fF
    pub c_r: f64,
    /// nH
    pub l_r: f64,
    /// GHz
    pub e_j1: f64,
    /// GHz
    pub e_j2: f64,
}

impl CircuitElements {
    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("c", self.c),
            ("c_r", self.c_r),
            ("l_r", self.l_r),
            ("e_j1", self.e_j1),
            ("e_j2", self.e_j2),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(field, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn e_c(&self) -> f64 {
        charge_energy_unit() / (4.0 * self.c)
    }

    pub fn e_c_r(&self) -> f64 {
        charge_energy_unit() / (4.0 * self.c + 8.0 * self.c_r)
    }

    pub fn e_l_r(&self) -> f64 {
        inductive_energy_unit() / self.l_r
    }
}

/// Maps element values to mode parameters. Truncations take their defaults.
pub fn reduce_circuit(elems: &CircuitElements) -> Result<(TransmonSpec, ResonatorSpec)> {
    elems.validate()?;
    let e_j = elems.e_j1 + elems.e_j2;
    let d = (elems.e_j2 - elems.e_j1) / e_j;
    let transmon = TransmonSpec::new(elems.e_c(), e_j).with_asymmetry(d);
    let (ecr, elr) = (elems.e_c_r(), elems.e_l_r());
    let resonator = ResonatorSpec::new((8.0 * ecr * elr).sqrt(), (2.0 * ecr / elr).powf(0.25));
    Ok((transmon, resonator))
}

/// Joint transmon-resonator Hamiltonian without drive.
#[derive(Debug, Clone)]
pub struct JointHamiltonian {
    /// Real symmetric matrix in the rephased product basis, index `j·N + n`.
    pub matrix: RMat,
    /// `(K, N)`
    pub dims: (usize, usize),
    pub transmon: TransmonSpec,
    pub resonator: ResonatorSpec,
    pub basis: TransmonBasis,
    pub ops: ResonatorOps,
}

/// `i^k` for integer `k`.
fn i_pow(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

impl JointHamiltonian {
    pub fn dim(&self) -> usize {
        self.dims.0 * self.dims.1
    }

    pub fn index(&self, j: usize, n: usize) -> usize {
        j * self.dims.1 + n
    }

    /// `(j, n)` of a product-basis index.
    pub fn label(&self, idx: usize) -> (usize, usize) {
        (idx / self.dims.1, idx % self.dims.1)
    }

    /// Plain product-basis element `⟨j,n|H|k,m⟩`.
    pub fn element(&self, row: usize, col: usize) -> Complex64 {
        let n = (row % self.dims.1) as i64;
        let m = (col % self.dims.1) as i64;
        i_pow(n - m) * self.matrix[(row, col)]
    }

    /// Complex matrix in the plain product basis. Intended for small systems.
    pub fn to_standard_basis(&self) -> CMat {
        let d = self.dim();
        Mat::from_fn(d, d, |r, c| self.element(r, c))
    }

    pub fn max_abs(&self) -> f64 {
        crate::linalg::max_abs(&self.matrix)
    }

    /// Bare energies `ω_j + nω_r` on the diagonal, in index order.
    pub fn bare_energies(&self) -> Vec<f64> {
        let (k, n) = self.dims;
        (0..k * n)
            .map(|idx| self.basis.energies[idx / n] + (idx % n) as f64 * self.resonator.omega_r)
            .collect()
    }
}

/// Assembles the joint Hamiltonian in the transmon eigenbasis ⊗ Fock basis.
pub fn assemble_hamiltonian(t: &TransmonSpec, r: &ResonatorSpec) -> Result<JointHamiltonian> {
    let basis = transmon_eigensystem(t)?;
    let ops = resonator_operators(r)?;
    assemble_from_parts(t, r, basis, ops)
}

/// Assembles from precomputed single-mode operators, checking their dimensions.
pub fn assemble_from_parts(
    t: &TransmonSpec,
    r: &ResonatorSpec,
    basis: TransmonBasis,
    ops: ResonatorOps,
) -> Result<JointHamiltonian> {
    let k = basis.levels();
    let n = ops.n_fock();
    if k != t.k_levels || n != r.n_fock || basis.cos_phi.nrows() != k {
        return Err(Error::DimensionMismatch(format!(
            "transmon basis has {k} levels (spec {}), resonator operators have {n} states (spec {})",
            t.k_levels, r.n_fock
        )));
    }
    let e_j = t.e_j;
    // Rephased resonator factors: i^{m-n} times the plain elements.
    let two_ssh = Mat::from_fn(n, n, |a, b| {
        let diff = b as i64 - a as i64;
        if diff % 2 != 0 {
            0.0
        } else {
            let sign = if (diff / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            2.0 * sign * ops.sin_sq_half[(a, b)]
        }
    });
    // Includes the extra i from sin φ_t = i·s.
    let sin_r = Mat::from_fn(n, n, |a, b| {
        let diff = b as i64 - a as i64;
        if diff % 2 == 0 {
            0.0
        } else {
            let sign = if ((diff + 1) / 2).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            sign * ops.sin_phi_r[(a, b)]
        }
    });
    let s = basis.sin_phi_imag();
    let dim = k * n;
    let mut h = Mat::<f64>::zeros(dim, dim);
    for tj in 0..k {
        for ti in 0..k {
            let c = e_j * basis.cos_phi[(ti, tj)];
            let sn = -t.d * e_j * s[(ti, tj)];
            if c == 0.0 && sn == 0.0 {
                continue;
            }
            for m in 0..n {
                let col = tj * n + m;
                for a in 0..n {
                    h[(ti * n + a, col)] = c * two_ssh[(a, m)] + sn * sin_r[(a, m)];
                }
            }
        }
    }
    for tj in 0..k {
        for m in 0..n {
            let idx = tj * n + m;
            h[(idx, idx)] += basis.energies[tj] + m as f64 * r.omega_r;
        }
    }
    Ok(JointHamiltonian {
        matrix: h,
        dims: (k, n),
        transmon: *t,
        resonator: *r,
        basis,
        ops,
    })
}

/// Quantities derived from the mode parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQubitParams {
    pub omega_p: f64,
    /// From the exact eigensolve.
    pub omega_q: f64,
    pub z: f64,
    /// `ω_q − ω_r`
    pub delta: f64,
    /// `−ω_p φ_zpf² / 4`
    pub chi_z_pert: f64,
}

impl DerivedQubitParams {
    /// Longitudinal coupling `g_z = χ_z α` in the displaced frame.
    pub fn g_z_of(&self, alpha: f64) -> f64 {
        self.chi_z_pert * alpha
    }
}

pub fn derived_params(t: &TransmonSpec, r: &ResonatorSpec) -> Result<DerivedQubitParams> {
    if !(t.e_j > 0.0) {
        return Err(invalid("e_j", "derived parameters need e_j > 0"));
    }
    let basis = transmon_eigensystem(&t.with_levels(t.k_levels.clamp(2, 3)))?;
    let omega_q = basis.qubit_frequency();
    let omega_p = t.plasma_frequency();
    Ok(DerivedQubitParams {
        omega_p,
        omega_q,
        z: t.impedance(),
        delta: omega_q - r.omega_r,
        chi_z_pert: -omega_p * r.phi_rzpf * r.phi_rzpf / 4.0,
    })
}

/// Zero-point phase that gives the perturbative dispersive shift `chi_z < 0`.
pub fn phi_rzpf_for_chi(chi_z: f64, omega_p: f64) -> Result<f64> {
    if !(chi_z < 0.0) || !(omega_p > 0.0) {
        return Err(invalid("chi_z", format!("need chi_z < 0 and omega_p > 0, got {chi_z}, {omega_p}")));
    }
    Ok((-4.0 * chi_z / omega_p).sqrt())
}

/// Charging energy giving qubit frequency `omega_q` at fixed `E_J/E_C`.
///
/// At fixed ratio the Hamiltonian is `E_C [4n² − (E_J/E_C) cos φ]`, so the qubit
/// frequency is exactly linear in `E_C` and one eigensolve at `E_C = 1` fixes it.
pub fn e_c_for_qubit_frequency(e_j_over_e_c: f64, omega_q: f64) -> Result<f64> {
    if !(omega_q > 0.0) {
        return Err(invalid("omega_q", format!("must be > 0, got {omega_q}")));
    }
    let unit = TransmonSpec::from_ratio(1.0, e_j_over_e_c).with_levels(2);
    let f = transmon_eigensystem(&unit)?.qubit_frequency();
    if !(f > 0.0) {
        return Err(Error::RootNotFound(format!(
            "qubit gap vanishes at E_J/E_C = {e_j_over_e_c}"
        )));
    }
    Ok(omega_q / f)
}

/// Qubit ⊗ resonator model `H = ω_r a†a + (ω_q/2) σ_z + χ_z σ_z a†a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedModel {
    pub chi_z: f64,
    pub omega_r: f64,
    pub omega_q: f64,
    pub kappa: f64,
}

pub fn build_reduced_model(chi_z: f64, omega_r: f64, omega_q: f64, kappa: f64) -> Result<ReducedModel> {
    if chi_z > 0.0 || !chi_z.is_finite() {
        return Err(invalid("chi_z", format!("must be <= 0, got {chi_z}")));
    }
    if !(omega_r > 0.0) {
        return Err(invalid("omega_r", format!("must be > 0, got {omega_r}")));
    }
    if !(kappa >= 0.0) {
        return Err(invalid("kappa", format!("must be >= 0, got {kappa}")));
    }
    Ok(ReducedModel {
        chi_z,
        omega_r,
        omega_q,
        kappa,
    })
}

impl ReducedModel {
    /// `σ_z` eigenvalue of a qubit level: ground −1, excited +1.
    pub fn sigma(qubit: u8) -> f64 {
        if qubit == 0 {
            -1.0
        } else {
            1.0
        }
    }

    /// Longitudinal coupling in the frame displaced by `α`.
    pub fn g_z(&self, alpha: f64) -> f64 {
        self.chi_z * alpha
    }

    /// Lab-frame energy of `|σ, n⟩`.
    pub fn energy(&self, qubit: u8, n: usize) -> f64 {
        let s = Self::sigma(qubit);
        self.omega_r * n as f64 + 0.5 * self.omega_q * s + self.chi_z * s * n as f64
    }

    /// Resonator frequency seen by qubit level `qubit`, `ω_r + σχ_z`.
    pub fn pulled_frequency(&self, qubit: u8) -> f64 {
        self.omega_r + Self::sigma(qubit) * self.chi_z
    }
}

/// Parameter sets used throughout the tests and the CLI defaults.
pub mod presets {
    use super::*;

    /// Deep-transmon regime: `E_C = 0.215 GHz`, `E_J/E_C = 110`.
    pub fn deep_transmon() -> TransmonSpec {
        TransmonSpec::from_ratio(0.215, 110.0)
    }

    /// Zero-point phase that gives `χ_z = −12.8 MHz` for [`deep_transmon`].
    pub const DEEP_PHI_RZPF: f64 = 0.0896;

    pub fn deep_resonator(omega_r: f64) -> ResonatorSpec {
        ResonatorSpec::new(omega_r, DEEP_PHI_RZPF)
    }

    /// Readout regime: `E_J/E_C = 50`, `ω_q = 4.07 GHz`, `ω_r = 9.3 GHz`,
    /// `χ_z = −8.66 MHz`, `κ = 17 MHz`.
    pub fn readout_pair(n_fock: usize) -> Result<(TransmonSpec, ResonatorSpec)> {
        let e_c = e_c_for_qubit_frequency(50.0, 4.07)?;
        let t = TransmonSpec::from_ratio(e_c, 50.0);
        let phi = phi_rzpf_for_chi(READOUT_CHI_Z, t.plasma_frequency())?;
        Ok((t, ResonatorSpec::new(9.3, phi).with_kappa(READOUT_KAPPA).with_fock(n_fock)))
    }

    pub const READOUT_CHI_Z: f64 = -0.00866;
    pub const READOUT_KAPPA: f64 = 0.017;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator_with_diag, hermiticity_defect, symmetry_defect};
    use crate::operators::parity_diagonal;
    use approx::assert_relative_eq;

    fn small(d: f64, n_g: f64, phi: f64) -> JointHamiltonian {
        let t = presets::deep_transmon().with_levels(6).with_asymmetry(d).with_n_g(n_g);
        let r = ResonatorSpec::new(8.8, phi).with_fock(20);
        assemble_hamiltonian(&t, &r).unwrap()
    }

    #[test]
    fn symmetric_junctions_have_zero_asymmetry() {
        let e = CircuitElements { c: 45.0, c_r: 250.0, l_r: 1.2, e_j1: 11.0, e_j2: 11.0 };
        let (t, _) = reduce_circuit(&e).unwrap();
        assert_eq!(t.d, 0.0);
        assert_relative_eq!(t.e_j, 22.0);
    }

    #[test]
    fn doubling_inductance() {
        let e = CircuitElements { c: 45.0, c_r: 250.0, l_r: 1.2, e_j1: 11.0, e_j2: 12.0 };
        let e2 = CircuitElements { l_r: 2.4, ..e };
        let (_, r1) = reduce_circuit(&e).unwrap();
        let (_, r2) = reduce_circuit(&e2).unwrap();
        assert_relative_eq!(e.e_l_r() / e2.e_l_r(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(r1.omega_r / r2.omega_r, 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn constants_match_codata() {
        assert_relative_eq!(charge_energy_unit(), 38.7405, epsilon = 1e-3);
        assert_relative_eq!(inductive_energy_unit(), 653.8, epsilon = 0.1);
    }

    #[test]
    fn hermitian_and_real_rephasing() {
        let h = small(0.1, 0.3, 0.09);
        assert!(symmetry_defect(&h.matrix) <= 1e-12 * h.max_abs());
        let std = h.to_standard_basis();
        assert!(hermiticity_defect(&std) <= 1e-12 * h.max_abs());
        // the sin⊗sin term is imaginary in the plain basis
        let im = (0..h.dim())
            .flat_map(|r| (0..h.dim()).map(move |c| (r, c)))
            .map(|(r, c)| std[(r, c)].im.abs())
            .fold(0.0, f64::max);
        assert!(im > 1e-4);
    }

    #[test]
    fn decoupled_diagonal() {
        let h = small(0.0, 0.0, 0.0);
        let bare = h.bare_energies();
        for r in 0..h.dim() {
            for c in 0..h.dim() {
                let expect = if r == c { bare[r] } else { 0.0 };
                assert!((h.matrix[(r, c)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parity_commutators() {
        let h = small(0.0, 0.0, 0.09);
        let (k, n) = h.dims;
        let pt: Vec<f64> = (0..k * n).map(|i| parity_diagonal(k)[i / n]).collect();
        let pr: Vec<f64> = (0..k * n).map(|i| parity_diagonal(n)[i % n]).collect();
        let tol = 1e-10 * h.max_abs();
        assert!(commutator_with_diag(&h.matrix, &pt) < tol);
        assert!(commutator_with_diag(&h.matrix, &pr) < tol);

        let h = small(0.1, 0.0, 0.09);
        let both: Vec<f64> = pt.iter().zip(&pr).map(|(a, b)| a * b).collect();
        assert!(commutator_with_diag(&h.matrix, &pt) > 1e-3);
        assert!(commutator_with_diag(&h.matrix, &both) < tol);
    }

    #[test]
    fn dimension_mismatch_detected() {
        let t = presets::deep_transmon().with_levels(4);
        let r = ResonatorSpec::new(8.8, 0.09).with_fock(10);
        let basis = transmon_eigensystem(&t).unwrap();
        let ops = resonator_operators(&r.with_fock(12)).unwrap();
        assert!(matches!(
            assemble_from_parts(&t, &r, basis, ops),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn detunings_of_deep_transmon() {
        let t = presets::deep_transmon();
        let a = derived_params(&t, &presets::deep_resonator(8.8)).unwrap();
        let c = derived_params(&t, &presets::deep_resonator(10.5)).unwrap();
        assert!((a.delta + 2.64).abs() < 0.03, "{}", a.delta);
        assert!((c.delta + 4.34).abs() < 0.03, "{}", c.delta);
        assert_relative_eq!(a.chi_z_pert, -0.0128, epsilon = 2e-4);
    }

    #[test]
    fn readout_charging_energy() {
        let e_c = e_c_for_qubit_frequency(50.0, 4.07).unwrap();
        assert!((e_c - 0.214).abs() < 2e-3, "{e_c}");
        let t = TransmonSpec::from_ratio(e_c, 50.0);
        let wq = transmon_eigensystem(&t).unwrap().qubit_frequency();
        assert_relative_eq!(wq, 4.07, epsilon = 1e-10);
        assert!((wq / e_c - 19.0).abs() < 0.5);
    }

    #[test]
    fn reduced_model_coupling() {
        let m = build_reduced_model(-0.00866, 9.3, 4.07, 0.017).unwrap();
        assert_relative_eq!(m.g_z(4.0), -0.03464, epsilon = 1e-12);
        let free = build_reduced_model(0.0, 9.3, 4.07, 0.0).unwrap();
        assert_eq!(free.pulled_frequency(0), free.pulled_frequency(1));
        assert!(build_reduced_model(0.01, 9.3, 4.07, 0.0).is_err());
    }
}
