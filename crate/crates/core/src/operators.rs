//! Single-mode operators.
//!
//! The transmon is diagonalized in the charge basis and every operator we need
//! (`cos φ`, `sin φ`, `n`) is carried into its eigenbasis. Resonator functions of
//! `φ_r = φ_zpf (a + a†)` are built from exact Fock-basis matrix elements of the
//! displacement operator, so they are the matrix elements of the untruncated
//! operator rather than functions of a truncated `a + a†`.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{sym_eigen, CMat, RMat};

/// Largest Fock cutoff for which `L_m^{(k)}(x) ≤ C(m+k, m) e^{x/2} ≤ 4^N e^{x/2}`
/// stays comfortably inside the `f64` range.
pub const MAX_FOCK: usize = 500;

/// Tolerance (GHz) of the charge-cutoff convergence guard.
pub const CUTOFF_TOLERANCE: f64 = 1e-8;

fn default_charge_cutoff() -> usize {
    30
}

fn default_k_levels() -> usize {
    16
}

fn default_n_fock() -> usize {
    100
}

/// Transmon parameters. Energies are `E/h` in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmonSpec {
    pub e_c: f64,
    pub e_j: f64,
    #[serde(default)]
    pub n_g: f64,
    /// Junction asymmetry `(E_J2 - E_J1) / E_J`.
    #[serde(default)]
    pub d: f64,
    #[serde(default = "default_charge_cutoff")]
    pub n_charge_cutoff: usize,
    #[serde(default = "default_k_levels")]
    pub k_levels: usize,
}

impl TransmonSpec {
    pub fn new(e_c: f64, e_j: f64) -> Self {
        Self {
            e_c,
            e_j,
            n_g: 0.0,
            d: 0.0,
            n_charge_cutoff: default_charge_cutoff(),
            k_levels: default_k_levels(),
        }
    }

    pub fn from_ratio(e_c: f64, e_j_over_e_c: f64) -> Self {
        Self::new(e_c, e_c * e_j_over_e_c)
    }

    pub fn with_n_g(mut self, n_g: f64) -> Self {
        self.n_g = n_g;
        self
    }

    pub fn with_asymmetry(mut self, d: f64) -> Self {
        self.d = d;
        self
    }

    pub fn with_levels(mut self, k_levels: usize) -> Self {
        self.k_levels = k_levels;
        self
    }

    pub fn with_charge_cutoff(mut self, cutoff: usize) -> Self {
        self.n_charge_cutoff = cutoff;
        self
    }

    /// Plasma frequency `sqrt(8 E_J E_C)`.
    pub fn plasma_frequency(&self) -> f64 {
        (8.0 * self.e_j * self.e_c).sqrt()
    }

    /// Transmon impedance `z = sqrt(8 E_C / E_J)`.
    pub fn impedance(&self) -> f64 {
        (8.0 * self.e_c / self.e_j).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_c > 0.0) {
            return Err(invalid("e_c", format!("must be > 0, got {}", self.e_c)));
        }
        // E_J = 0 is admitted: it is the free-rotor limit.
        if !(self.e_j >= 0.0) || !self.e_j.is_finite() {
            return Err(invalid("e_j", format!("must be >= 0, got {}", self.e_j)));
        }
        if !(self.d.abs() < 1.0) {
            return Err(invalid("d", format!("must satisfy |d| < 1, got {}", self.d)));
        }
        if !(0.0..1.0).contains(&self.n_g) {
            return Err(invalid("n_g", format!("must lie in [0, 1), got {}", self.n_g)));
        }
        if self.n_charge_cutoff == 0 {
            return Err(invalid("n_charge_cutoff", "must be positive"));
        }
        if self.k_levels == 0 || self.k_levels > 2 * self.n_charge_cutoff + 1 {
            return Err(invalid(
                "k_levels",
                format!(
                    "must lie in 1..={}, got {}",
                    2 * self.n_charge_cutoff + 1,
                    self.k_levels
                ),
            ));
        }
        Ok(())
    }
}

/// Resonator parameters. `omega_r` and `kappa` are `ω/2π` in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorSpec {
    pub omega_r: f64,
    pub phi_rzpf: f64,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "default_n_fock")]
    pub n_fock: usize,
}

impl ResonatorSpec {
    pub fn new(omega_r: f64, phi_rzpf: f64) -> Self {
        Self {
            omega_r,
            phi_rzpf,
            kappa: 0.0,
            n_fock: default_n_fock(),
        }
    }

    pub fn with_fock(mut self, n_fock: usize) -> Self {
        self.n_fock = n_fock;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_r > 0.0) {
            return Err(invalid("omega_r", format!("must be > 0, got {}", self.omega_r)));
        }
        if !(self.phi_rzpf >= 0.0) || !self.phi_rzpf.is_finite() {
            return Err(invalid("phi_rzpf", format!("must be >= 0, got {}", self.phi_rzpf)));
        }
        if !(self.kappa >= 0.0) {
            return Err(invalid("kappa", format!("must be >= 0, got {}", self.kappa)));
        }
        if self.n_fock < 2 {
            return Err(invalid("n_fock", format!("must be >= 2, got {}", self.n_fock)));
        }
        Ok(())
    }
}

/// Transmon eigenbasis with operators expressed in it.
#[derive(Debug, Clone)]
pub struct TransmonBasis {
    pub spec: TransmonSpec,
    /// Level energies, ground state at zero.
    pub energies: Vec<f64>,
    pub cos_phi: RMat,
    /// Purely imaginary and antisymmetric, because the eigenvectors are real.
    pub sin_phi: CMat,
    pub charge_op: RMat,
    /// `φ → -φ` parity of each level, available only when `n_g = 0`.
    pub parity: Option<Vec<i8>>,
}

impl TransmonBasis {
    pub fn levels(&self) -> usize {
        self.energies.len()
    }

    /// Qubit frequency `ω_1 - ω_0`.
    pub fn qubit_frequency(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }

    /// Real antisymmetric `s` with `⟨i|sin φ|j⟩ = i s_ij`.
    pub fn sin_phi_imag(&self) -> RMat {
        Mat::from_fn(self.levels(), self.levels(), |i, j| self.sin_phi[(i, j)].im)
    }
}

struct ChargeSolution {
    values: Vec<f64>,
    /// Charge-basis vectors as columns, index `p` ↔ charge `p - cutoff`.
    vectors: RMat,
    parity: Option<Vec<i8>>,
}

fn solve_general(spec: &TransmonSpec, cutoff: usize, k: usize) -> Result<ChargeSolution> {
    let dim = 2 * cutoff + 1;
    let h = Mat::from_fn(dim, dim, |i, j| {
        if i == j {
            let n = i as f64 - cutoff as f64 - spec.n_g;
            4.0 * spec.e_c * n * n
        } else if i.abs_diff(j) == 1 {
            -0.5 * spec.e_j
        } else {
            0.0
        }
    });
    let (vals, vecs) = sym_eigen(&h).ok_or(Error::EigenSolver {
        dim,
        max_abs: crate::linalg::max_abs(&h),
        defect: 0.0,
    })?;
    Ok(ChargeSolution {
        values: vals[..k].to_vec(),
        vectors: vecs.subcols(0, k).to_owned(),
        parity: None,
    })
}

/// `n_g = 0`: diagonalize the even and odd charge combinations separately so every
/// eigenvector has exact parity, even across near-degenerate rotor pairs.
fn solve_parity_blocks(spec: &TransmonSpec, cutoff: usize, k: usize) -> Result<ChargeSolution> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let ec4 = 4.0 * spec.e_c;
    let half_ej = 0.5 * spec.e_j;
    // even: |0>, (|m> + |-m>)/√2, m = 1..=cutoff
    let ne = cutoff + 1;
    let even = Mat::from_fn(ne, ne, |i, j| {
        if i == j {
            ec4 * (i * i) as f64
        } else if i.abs_diff(j) == 1 {
            if i.min(j) == 0 {
                -half_ej * std::f64::consts::SQRT_2
            } else {
                -half_ej
            }
        } else {
            0.0
        }
    });
    // odd: (|m> - |-m>)/√2, m = 1..=cutoff
    let no = cutoff;
    let odd = Mat::from_fn(no, no, |i, j| {
        if i == j {
            ec4 * ((i + 1) * (i + 1)) as f64
        } else if i.abs_diff(j) == 1 {
            -half_ej
        } else {
            0.0
        }
    });
    let solve = |m: &RMat| {
        sym_eigen(m).ok_or(Error::EigenSolver {
            dim: m.nrows(),
            max_abs: crate::linalg::max_abs(m),
            defect: 0.0,
        })
    };
    let (ev, evec) = solve(&even)?;
    let (ov, ovec) = solve(&odd)?;

    let dim = 2 * cutoff + 1;
    let mut candidates: Vec<(f64, i8, usize)> = ev
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, 1i8, i))
        .chain(ov.iter().enumerate().map(|(i, &v)| (v, -1i8, i)))
        .collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    candidates.truncate(k);

    let mut vectors = Mat::<f64>::zeros(dim, k);
    let mut values = Vec::with_capacity(k);
    let mut parity = Vec::with_capacity(k);
    for (col, &(val, par, idx)) in candidates.iter().enumerate() {
        values.push(val);
        parity.push(par);
        if par == 1 {
            vectors[(cutoff, col)] = evec[(0, idx)];
            for m in 1..=cutoff {
                let c = evec[(m, idx)] * s2;
                vectors[(cutoff + m, col)] = c;
                vectors[(cutoff - m, col)] = c;
            }
        } else {
            for m in 1..=cutoff {
                let c = ovec[(m - 1, idx)] * s2;
                vectors[(cutoff + m, col)] = c;
                vectors[(cutoff - m, col)] = -c;
            }
        }
    }
    Ok(ChargeSolution {
        values,
        vectors,
        parity: Some(parity),
    })
}

fn solve_charge(spec: &TransmonSpec, cutoff: usize) -> Result<ChargeSolution> {
    if spec.n_g == 0.0 {
        solve_parity_blocks(spec, cutoff, spec.k_levels)
    } else {
        solve_general(spec, cutoff, spec.k_levels)
    }
}

/// Scales each column so its largest-magnitude entry is positive. Entries within a
/// relative 1e-10 of the maximum count as tied and the lowest charge index wins.
fn fix_phases(v: &mut RMat) {
    for j in 0..v.ncols() {
        let col = v.col_as_slice(j);
        let max = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let pivot = col
            .iter()
            .position(|x| x.abs() >= max * (1.0 - 1e-10))
            .unwrap_or(0);
        if col[pivot] < 0.0 {
            for x in v.col_as_slice_mut(j) {
                *x = -*x;
            }
        }
    }
}

/// Diagonalizes `4E_C(n - n_g)² - E_J cos φ` in the charge basis and returns the
/// lowest `k_levels` states with `cos φ`, `sin φ` and `n` in that eigenbasis.
pub fn transmon_eigensystem(spec: &TransmonSpec) -> Result<TransmonBasis> {
    spec.validate()?;
    let cutoff = spec.n_charge_cutoff;
    let k = spec.k_levels;
    let mut sol = solve_charge(spec, cutoff)?;

    let wider = solve_charge(spec, cutoff + 5)?;
    let shift = (wider.values[k - 1] - sol.values[k - 1]).abs();
    if shift > CUTOFF_TOLERANCE {
        return Err(Error::CutoffTooSmall {
            cutoff,
            level: k - 1,
            shift,
        });
    }

    fix_phases(&mut sol.vectors);
    let v = &sol.vectors;
    let dim = v.nrows();

    // ⟨i|e^{iφ}|j⟩ with e^{iφ}|n⟩ = |n+1⟩.
    let raise = Mat::from_fn(k, k, |i, j| {
        (0..dim - 1).map(|p| v[(p + 1, i)] * v[(p, j)]).sum::<f64>()
    });
    let cos_phi = Mat::from_fn(k, k, |i, j| 0.5 * (raise[(i, j)] + raise[(j, i)]));
    let sin_phi = Mat::from_fn(k, k, |i, j| {
        Complex64::new(0.0, -0.5 * (raise[(i, j)] - raise[(j, i)]))
    });
    let mut charge_op = Mat::from_fn(k, k, |i, j| {
        (0..dim)
            .map(|p| (p as f64 - cutoff as f64) * v[(p, i)] * v[(p, j)])
            .sum::<f64>()
    });
    // With exact parity the selection rules hold exactly; clear the rounding residue.
    let (mut cos_phi, mut sin_phi) = (cos_phi, sin_phi);
    if let Some(par) = &sol.parity {
        for i in 0..k {
            for j in 0..k {
                if par[i] == par[j] {
                    sin_phi[(i, j)] = Complex64::new(0.0, 0.0);
                    charge_op[(i, j)] = 0.0;
                } else {
                    cos_phi[(i, j)] = 0.0;
                }
            }
        }
    }

    let e0 = sol.values[0];
    Ok(TransmonBasis {
        spec: *spec,
        energies: sol.values.iter().map(|e| e - e0).collect(),
        cos_phi,
        sin_phi,
        charge_op,
        parity: sol.parity,
    })
}

/// `ln(i!)` for `i = 0..=n`.
pub(crate) fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0f64;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// Generalized Laguerre values `L_m^{(k)}(x)` for `m = 0..=m_max` by upward recurrence.
pub fn laguerre_column(k: usize, x: f64, m_max: usize) -> Vec<f64> {
    let a = k as f64;
    let mut out = Vec::with_capacity(m_max + 1);
    out.push(1.0);
    if m_max == 0 {
        return out;
    }
    out.push(1.0 + a - x);
    for m in 1..m_max {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + a - x) * out[m] - (mf + a) * out[m - 1]) / (mf + 1.0);
        out.push(next);
    }
    out
}

/// One column of the lower triangle: `(n, m, ⟨n|D(α)|m⟩)` for `n = m + k`, without
/// the phase `e^{ikθ}` of `α^k`. Magnitudes combine in log space.
fn displacement_band(k: usize, abs_alpha: f64, n: usize, lf: &[f64]) -> Result<Vec<f64>> {
    let x = abs_alpha * abs_alpha;
    let m_max = n - 1 - k;
    if abs_alpha == 0.0 {
        return Ok(if k == 0 { vec![1.0; m_max + 1] } else { vec![0.0; m_max + 1] });
    }
    let lag = laguerre_column(k, x, m_max);
    let ln_a = abs_alpha.ln();
    lag.iter()
        .enumerate()
        .map(|(m, &l)| {
            if !l.is_finite() {
                return Err(Error::FockCutoffOverflow {
                    n_fock: n,
                    max: MAX_FOCK,
                });
            }
            if l == 0.0 {
                return Ok(0.0);
            }
            let ln_mag = 0.5 * (lf[m] - lf[m + k]) + k as f64 * ln_a - 0.5 * x + l.abs().ln();
            Ok(l.signum() * ln_mag.exp())
        })
        .collect()
}

/// Fock-basis matrix of `D(α) = exp(α a† - α* a)` truncated to `n_fock` states,
/// from the closed-form Laguerre expression (lower triangle) and `D(α)† = D(-α)`
/// (upper triangle).
pub fn displacement_matrix(alpha: Complex64, n_fock: usize) -> Result<CMat> {
    if n_fock == 0 {
        return Err(invalid("n_fock", "must be >= 1"));
    }
    if n_fock > MAX_FOCK {
        return Err(Error::FockCutoffOverflow {
            n_fock,
            max: MAX_FOCK,
        });
    }
    let lf = ln_factorials(2 * n_fock);
    let r = alpha.norm();
    let theta = alpha.arg();
    let mut out = Mat::<Complex64>::zeros(n_fock, n_fock);
    for k in 0..n_fock {
        let band = displacement_band(k, r, n_fock, &lf)?;
        let lower_phase = Complex64::from_polar(1.0, k as f64 * theta);
        // (-α*)^k = (-1)^k e^{-ikθ}
        let upper_phase = Complex64::from_polar(if k % 2 == 0 { 1.0 } else { -1.0 }, -(k as f64) * theta);
        for (m, &mag) in band.iter().enumerate() {
            out[(m + k, m)] = lower_phase * mag;
            if k > 0 {
                out[(m, m + k)] = upper_phase * mag;
            }
        }
    }
    Ok(out)
}

/// Resonator operators at Fock cutoff `N`.
#[derive(Debug, Clone)]
pub struct ResonatorOps {
    pub annihilate: RMat,
    pub cos_phi_r: RMat,
    /// `(I - cos φ_r) / 2`.
    pub sin_sq_half: RMat,
    pub sin_phi_r: RMat,
}

impl ResonatorOps {
    pub fn n_fock(&self) -> usize {
        self.annihilate.nrows()
    }
}

pub fn annihilation(n: usize) -> RMat {
    Mat::from_fn(n, n, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

/// `cos φ_r = [D(iφ) + D(-iφ)]/2`, `sin φ_r = [D(iφ) - D(-iφ)]/2i`.
///
/// For imaginary displacements the band `k = n - m` of `D(±iφ)` carries the phase
/// `(±i)^k`, so `cos φ_r` keeps the even bands with sign `(-1)^{k/2}` and `sin φ_r`
/// the odd bands with sign `(-1)^{(k-1)/2}`. Both are real symmetric and the
/// parity zeros are exact.
pub fn resonator_operators(spec: &ResonatorSpec) -> Result<ResonatorOps> {
    spec.validate()?;
    let n = spec.n_fock;
    if n > MAX_FOCK {
        return Err(Error::FockCutoffOverflow {
            n_fock: n,
            max: MAX_FOCK,
        });
    }
    let lf = ln_factorials(2 * n);
    let mut cos_phi_r = Mat::<f64>::zeros(n, n);
    let mut sin_phi_r = Mat::<f64>::zeros(n, n);
    for k in 0..n {
        let band = displacement_band(k, spec.phi_rzpf, n, &lf)?;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let target = if k % 2 == 0 { &mut cos_phi_r } else { &mut sin_phi_r };
        for (m, &mag) in band.iter().enumerate() {
            target[(m + k, m)] = sign * mag;
            target[(m, m + k)] = sign * mag;
        }
    }
    let sin_sq_half = Mat::from_fn(n, n, |i, j| {
        0.5 * (if i == j { 1.0 } else { 0.0 } - cos_phi_r[(i, j)])
    });
    Ok(ResonatorOps {
        annihilate: annihilation(n),
        cos_phi_r,
        sin_sq_half,
        sin_phi_r,
    })
}

/// `(-1)^i` for `i = 0..n`.
pub fn parity_diagonal(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()
}

/// `P_t = diag((-1)^j)` in the transmon eigenbasis (meaningful at `n_g = 0`) and
/// `P_r = diag((-1)^n)` in the Fock basis.
pub fn parity_operators(k_levels: usize, n_fock: usize) -> (RMat, RMat) {
    (
        crate::linalg::diag(&parity_diagonal(k_levels)),
        crate::linalg::diag(&parity_diagonal(n_fock)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_defect, max_abs, symmetry_defect};
    use approx::assert_relative_eq;

    fn deep_transmon_spec() -> TransmonSpec {
        TransmonSpec::from_ratio(0.215, 110.0)
    }

    #[test]
    fn qubit_frequency_near_plasma_minus_charging() {
        let spec = deep_transmon_spec();
        let b = transmon_eigensystem(&spec).unwrap();
        let wp = spec.plasma_frequency();
        assert_relative_eq!(wp, 6.378, epsilon = 2e-3);
        let asymptotic = wp - spec.e_c;
        assert!((b.qubit_frequency() - asymptotic).abs() / asymptotic < 0.02);
        // oracle: cutoff 60 charge-basis solve
        let wide = transmon_eigensystem(&spec.with_charge_cutoff(60)).unwrap();
        assert!((wide.qubit_frequency() - b.qubit_frequency()).abs() < 1e-10);
    }

    #[test]
    fn free_rotor_limit() {
        let ec = 0.3;
        for n_g in [0.0, 0.25] {
            let spec = TransmonSpec::new(ec, 0.0).with_n_g(n_g).with_levels(7);
            let b = transmon_eigensystem(&spec).unwrap();
            let mut expect: Vec<f64> = (-5i32..=5)
                .map(|k| 4.0 * ec * (k as f64 - n_g).powi(2))
                .collect();
            expect.sort_by(f64::total_cmp);
            for (j, e) in b.energies.iter().enumerate() {
                assert_relative_eq!(*e, expect[j] - expect[0], epsilon = 1e-12);
                assert!(b.cos_phi[(j, j)].abs() < 1e-14);
            }
        }
    }

    #[test]
    fn parity_selection_at_zero_offset_charge() {
        let b = transmon_eigensystem(&deep_transmon_spec()).unwrap();
        let parity = b.parity.as_ref().unwrap();
        for j in 0..b.levels() {
            assert_eq!(parity[j], if j % 2 == 0 { 1 } else { -1 });
            for i in 0..b.levels() {
                if (i + j) % 2 == 1 {
                    assert_eq!(b.cos_phi[(i, j)], 0.0);
                } else {
                    assert_eq!(b.sin_phi[(i, j)].norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn transmon_operators_hermitian() {
        let b = transmon_eigensystem(&deep_transmon_spec().with_n_g(0.3)).unwrap();
        assert!(symmetry_defect(&b.cos_phi) <= 1e-12 * max_abs(&b.cos_phi));
        assert!(symmetry_defect(&b.charge_op) <= 1e-12 * max_abs(&b.charge_op).max(1.0));
        assert!(hermiticity_defect(&b.sin_phi) < 1e-12);
        assert!(b.energies.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn anharmonicity_close_to_minus_charging_energy() {
        for ratio in [50.0, 80.0, 110.0] {
            let spec = TransmonSpec::from_ratio(0.215, ratio);
            let b = transmon_eigensystem(&spec).unwrap();
            let alpha = (b.energies[2] - b.energies[1]) - (b.energies[1] - b.energies[0]);
            assert!((alpha + spec.e_c).abs() / spec.e_c < 0.15, "ratio {ratio}: {alpha}");
        }
    }

    #[test]
    fn cutoff_guard_trips() {
        let spec = deep_transmon_spec().with_charge_cutoff(8).with_levels(16);
        assert!(matches!(
            transmon_eigensystem(&spec),
            Err(Error::CutoffTooSmall { .. })
        ));
    }

    #[test]
    fn convergence_in_charge_cutoff() {
        let spec = deep_transmon_spec();
        let a = transmon_eigensystem(&spec).unwrap();
        let b = transmon_eigensystem(&spec.with_charge_cutoff(35)).unwrap();
        for (x, y) in a.energies.iter().zip(&b.energies) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(TransmonSpec::new(-1.0, 1.0).validate().is_err());
        assert!(deep_transmon_spec().with_asymmetry(1.0).validate().is_err());
        assert!(deep_transmon_spec().with_n_g(1.0).validate().is_err());
        assert!(deep_transmon_spec().with_levels(100).validate().is_err());
        assert!(ResonatorSpec::new(8.8, 0.09).with_fock(1).validate().is_err());
    }

    #[test]
    fn displacement_at_zero_is_identity() {
        let d = displacement_matrix(Complex64::new(0.0, 0.0), 12).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_eq!(d[(i, j)], Complex64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn displacement_vacuum_element() {
        let alpha = Complex64::new(0.3, -0.4);
        let d = displacement_matrix(alpha, 10).unwrap();
        assert_relative_eq!(d[(0, 0)].re, (-alpha.norm_sqr() / 2.0).exp(), epsilon = 1e-15);
        assert_relative_eq!(d[(1, 0)].re, alpha.re * (-0.125f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn displacement_composition_interior() {
        let n = 60;
        for alpha in [Complex64::new(0.2, 0.0), Complex64::new(0.0, 0.09), Complex64::new(0.1, -0.15)] {
            let p = displacement_matrix(alpha, n).unwrap();
            let m = displacement_matrix(-alpha, n).unwrap();
            let prod = &p * &m;
            for i in 0..n - 10 {
                for j in 0..n - 10 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((prod[(i, j)] - expect).norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn displacement_overflow_guard() {
        assert!(matches!(
            displacement_matrix(Complex64::new(0.1, 0.0), MAX_FOCK + 1),
            Err(Error::FockCutoffOverflow { .. })
        ));
        assert!(displacement_matrix(Complex64::new(0.0, 0.09), 250).is_ok());
    }

    #[test]
    fn resonator_zero_phase_limit() {
        let ops = resonator_operators(&ResonatorSpec::new(8.8, 0.0).with_fock(20)).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert_eq!(ops.cos_phi_r[(i, j)], id);
                assert_eq!(ops.sin_sq_half[(i, j)], 0.0);
                assert_eq!(ops.sin_phi_r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn resonator_cos_diagonal_is_laguerre() {
        let phi: f64 = 0.09;
        let ops = resonator_operators(&ResonatorSpec::new(8.8, phi).with_fock(40)).unwrap();
        let lag = laguerre_column(0, phi * phi, 39);
        for n in 0..40 {
            assert_relative_eq!(
                ops.cos_phi_r[(n, n)],
                (-phi * phi / 2.0).exp() * lag[n],
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn resonator_parity_structure() {
        let ops = resonator_operators(&ResonatorSpec::new(8.8, 0.2).with_fock(30)).unwrap();
        for i in 0..30 {
            for j in 0..30 {
                if (i + j) % 2 == 1 {
                    assert_eq!(ops.cos_phi_r[(i, j)], 0.0);
                } else {
                    assert_eq!(ops.sin_phi_r[(i, j)], 0.0);
                }
            }
        }
        assert!(symmetry_defect(&ops.cos_phi_r) < 1e-15);
        assert!(symmetry_defect(&ops.sin_phi_r) < 1e-15);
    }

    #[test]
    fn displacement_unitary_on_interior() {
        let n = 100;
        let d = displacement_matrix(Complex64::new(0.0, 0.09), n).unwrap();
        let dh = d.adjoint().to_owned();
        let prod = &dh * &d;
        // D(iφ) is not Hermitian; its adjoint is D(-iφ).
        let minus = displacement_matrix(Complex64::new(0.0, -0.09), n).unwrap();
        for i in 0..n - 10 {
            for j in 0..n - 10 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - id).norm() < 1e-9);
                assert!((dh[(i, j)] - minus[(i, j)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn parity_operators_are_involutions() {
        let (pt, pr) = parity_operators(5, 9);
        let pr2 = &pr * &pr;
        let pt2 = &pt * &pt;
        for i in 0..9 {
            assert_eq!(pr2[(i, i)], 1.0);
        }
        for i in 0..5 {
            assert_eq!(pt2[(i, i)], 1.0);
        }
    }
}
