//! Readout simulation: pulse shaping, heterodyne stochastic Schrödinger
//! trajectories, matched filtering and assignment error.
//!
//! Parameters are quoted as `ω/2π` in GHz; rates entering the dynamics are
//! converted to rad/ns internally. Drives and decay act on the resonator only
//! and the qubit starts in a definite state.

use std::f64::consts::TAU;
use std::io::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::circuit::{JointHamiltonian, ReducedModel};
use crate::error::{invalid, Error, Result};
use crate::linalg::{clear_upper_simd, identity, kron};
use crate::operators::annihilation;
use crate::spectral::JointEigensystem;

type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Largest tolerated per-step norm correction before a step is rejected.
pub const NORM_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    /// Target coherent amplitude (real, fixed drive phase).
    pub alpha_f: f64,
    /// Ramp time in ns.
    pub tau: f64,
    /// Drive frequency `ω_d/2π` in GHz.
    pub omega_d: f64,
    /// Resonator decay `κ/2π` in GHz.
    pub kappa: f64,
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_f >= 0.0) {
            return Err(invalid("alpha_f", format!("must be >= 0, got {}", self.alpha_f)));
        }
        if !(self.tau > 0.0) {
            return Err(invalid("tau", format!("must be > 0, got {}", self.tau)));
        }
        if !(self.omega_d > 0.0) {
            return Err(invalid("omega_d", format!("must be > 0, got {}", self.omega_d)));
        }
        if !(self.kappa >= 0.0) {
            return Err(invalid("kappa", format!("must be >= 0, got {}", self.kappa)));
        }
        Ok(())
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    fn kappa_rad(&self) -> f64 {
        TAU * self.kappa
    }
}

/// Drive envelope `ε(t)` in rad/ns that makes the empty cavity follow
/// [`cavity_response`]: `ε = 4tα_f/τ² e^{−(t/τ)²} + κα_f(1 − e^{−(t/τ)²})`.
pub fn pulse_amplitude(p: &PulseSpec, t: f64) -> f64 {
    let g = (-(t / p.tau).powi(2)).exp();
    4.0 * t * p.alpha_f / (p.tau * p.tau) * g + p.kappa_rad() * p.alpha_f * (1.0 - g)
}

/// Target field `α_p(t) = α_f(1 − e^{−(t/τ)²})` in the frame of the drive.
pub fn cavity_response(p: &PulseSpec, t: f64) -> f64 {
    p.alpha_f * (1.0 - (-(t / p.tau).powi(2)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelTag {
    Reduced,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Frame {
    /// Rotating at the drive; `H_d = i(ε/2)(a† − a)`.
    Rotating,
    /// Lab frame; `H_d = iε cos(ω_d t)(a† − a)`, records demodulated at `ω_d`.
    Lab { omega_d: f64 },
}

/// Sparse operator as `(row, col, value)` triplets.
#[derive(Debug, Clone, Default)]
struct Op {
    entries: Vec<(usize, usize, C64)>,
}

impl Op {
    fn from_dense(d: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut entries = Vec::new();
        for c in 0..d {
            for r in 0..d {
                let v = f(r, c);
                if v.norm() > 1e-14 {
                    entries.push((r, c, v));
                }
            }
        }
        Self { entries }
    }

    /// `out += s · Op · x`
    fn apply_add(&self, s: C64, x: &[C64], out: &mut [C64]) {
        for &(r, c, v) in &self.entries {
            out[r] += s * v * x[c];
        }
    }

    fn expect(&self, x: &[C64]) -> C64 {
        self.entries.iter().map(|&(r, c, v)| x[r].conj() * v * x[c]).sum()
    }
}

/// A resonator-driven system ready for trajectory simulation.
#[derive(Debug, Clone)]
pub struct SseModel {
    pub tag: ModelTag,
    frame: Frame,
    /// Diagonal part in rad/ns, per initial qubit state.
    h0: [Vec<f64>; 2],
    /// Hermitian drive operator multiplying `ε(t)` (times `cos ω_d t` in the lab frame).
    drive: Op,
    /// `√κ a` in rad/ns^{1/2}.
    collapse: Op,
    collapse_sq: Op,
    /// `a` (for the field expectation).
    field: Op,
    initial: [Vec<C64>; 2],
    /// Transmon level of each basis state (reduced model) or dressed-to-bare
    /// map for populations (full model).
    populations: PopulationMap,
}

#[derive(Debug, Clone)]
enum PopulationMap {
    Qubit,
    Dressed { vectors: Vec<Vec<f64>>, dims: (usize, usize) },
}

impl SseModel {
    pub fn dim(&self) -> usize {
        self.initial[0].len()
    }

    pub fn initial_state(&self, qubit: u8) -> &[C64] {
        &self.initial[qubit.min(1) as usize]
    }

    /// Population of each bare transmon level in `psi`.
    pub fn transmon_populations(&self, qubit: u8, psi: &[C64]) -> Vec<f64> {
        match &self.populations {
            PopulationMap::Qubit => {
                let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
                let mut out = vec![0.0; 2];
                out[qubit.min(1) as usize] = norm;
                out
            }
            PopulationMap::Dressed { vectors, dims } => {
                let (k, n) = *dims;
                let mut bare = vec![C64::new(0.0, 0.0); k * n];
                for (col, amp) in psi.iter().enumerate() {
                    for (row, v) in vectors[col].iter().enumerate() {
                        bare[row] += amp * v;
                    }
                }
                (0..k)
                    .map(|j| bare[j * n..(j + 1) * n].iter().map(|z| z.norm_sqr()).sum())
                    .collect()
            }
        }
    }
}

/// Qubit ⊗ Fock model `(ω_r − ω_d + σχ_z) a†a` in the frame rotating at `ω_d`.
/// The qubit state is conserved, so only the resonator is simulated.
pub fn reduced_sse_model(m: &ReducedModel, pulse: &PulseSpec, n_fock: usize) -> Result<SseModel> {
    pulse.validate()?;
    if n_fock < 2 {
        return Err(invalid("n_fock", "must be at least 2"));
    }
    let h0 = |q: u8| -> Vec<f64> {
        let w = TAU * (m.omega_r - pulse.omega_d + ReducedModel::sigma(q) * m.chi_z);
        (0..n_fock).map(|n| w * n as f64).collect()
    };
    let a = annihilation(n_fock);
    let field = Op::from_dense(n_fock, |r, c| C64::new(a[(r, c)], 0.0));
    // i(a† − a)/2
    let drive = Op::from_dense(n_fock, |r, c| I * 0.5 * (a[(c, r)] - a[(r, c)]));
    let mut vac = vec![C64::new(0.0, 0.0); n_fock];
    vac[0] = C64::new(1.0, 0.0);
    Ok(build(ModelTag::Reduced, Frame::Rotating, [h0(0), h0(1)], drive, field, m.kappa, [vac.clone(), vac], PopulationMap::Qubit))
}

/// Full transmon-resonator model in the lab frame, written in the dressed
/// eigenbasis of `h`. The initial states are the dressed states with the
/// largest overlap on `|0, 0⟩` and `|1, 0⟩`. Energies are shifted so the
/// dressed ground state sits at zero.
pub fn full_sse_model(
    h: &JointHamiltonian,
    eig: &JointEigensystem,
    kappa: f64,
    omega_d: f64,
) -> Result<SseModel> {
    let (k, n) = h.dims;
    let d = k * n;
    if eig.eigenvalues.len() != d || eig.dims != h.dims {
        return Err(Error::DimensionMismatch(format!(
            "eigensystem {:?} does not match Hamiltonian {:?}",
            eig.dims, h.dims
        )));
    }
    if k < 2 {
        return Err(invalid("k_levels", "full model needs at least two transmon levels"));
    }
    let v = &eig.eigenvectors;
    // plain-basis a is i·a in the rephased basis
    let a_prod = kron(&identity(k), &annihilation(n));
    let a_eig = v.transpose() * (&a_prod * v);
    let field = Op::from_dense(d, |r, c| I * a_eig[(r, c)]);
    // i(a† − a) with a = i·A: i(−iAᵀ − iA) = Aᵀ + A
    let drive = Op::from_dense(d, |r, c| C64::new(a_eig[(c, r)] + a_eig[(r, c)], 0.0));
    let e0 = eig.eigenvalues[0];
    let h0: Vec<f64> = eig.eigenvalues.iter().map(|e| TAU * (e - e0)).collect();
    let dressed = |bare: usize| -> usize {
        (0..d)
            .max_by(|&x, &y| v[(bare, x)].abs().total_cmp(&v[(bare, y)].abs()))
            .unwrap_or(0)
    };
    let basis_state = |col: usize| {
        let mut s = vec![C64::new(0.0, 0.0); d];
        s[col] = C64::new(1.0, 0.0);
        s
    };
    let initial = [basis_state(dressed(0)), basis_state(dressed(n))];
    let vectors = (0..d).map(|c| (0..d).map(|r| v[(r, c)]).collect()).collect();
    Ok(build(
        ModelTag::Full,
        Frame::Lab { omega_d: TAU * omega_d },
        [h0.clone(), h0],
        drive,
        field,
        kappa,
        initial,
        PopulationMap::Dressed { vectors, dims: (k, n) },
    ))
}

/// Dressed resonator frequencies `(E_{q,1} − E_{q,0})` in GHz for qubit states
/// `q = 0, 1`, the dressed states being those with the largest overlap on the
/// bare product states.
pub fn dressed_resonator_frequencies(eig: &JointEigensystem) -> Result<(f64, f64)> {
    let (k, n) = eig.dims;
    if k < 2 || n < 2 {
        return Err(invalid("dims", "need at least two transmon levels and two Fock states"));
    }
    let v = &eig.eigenvectors;
    let d = k * n;
    let dressed = |bare: usize| -> f64 {
        let col = (0..d)
            .max_by(|&x, &y| v[(bare, x)].abs().total_cmp(&v[(bare, y)].abs()))
            .unwrap_or(0);
        eig.eigenvalues[col]
    };
    Ok((dressed(1) - dressed(0), dressed(n + 1) - dressed(n)))
}

#[allow(clippy::too_many_arguments)]
fn build(
    tag: ModelTag,
    frame: Frame,
    h0: [Vec<f64>; 2],
    drive: Op,
    field: Op,
    kappa: f64,
    initial: [Vec<C64>; 2],
    populations: PopulationMap,
) -> SseModel {
    let root = (TAU * kappa).sqrt();
    let collapse = Op { entries: field.entries.iter().map(|&(r, c, v)| (r, c, root * v)).collect() };
    // c†c from the triplets
    let d = initial[0].len();
    let mut dense = vec![C64::new(0.0, 0.0); d * d];
    for &(r1, c1, v1) in &collapse.entries {
        for &(r2, c2, v2) in &collapse.entries {
            if r1 == r2 {
                dense[c1 * d + c2] += v1.conj() * v2;
            }
        }
    }
    let collapse_sq = Op::from_dense(d, |r, c| dense[r * d + c]);
    SseModel { tag, frame, h0, drive, collapse, collapse_sq, field, initial, populations }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SseOptions {
    /// Step in ns.
    pub dt: f64,
    /// Record bin width in ns (rounded to a whole number of steps).
    pub bin: f64,
    /// Simulated duration in ns.
    pub t_final: f64,
}

impl Default for SseOptions {
    fn default() -> Self {
        Self { dt: 0.01, bin: 1.0, t_final: 50.0 }
    }
}

impl SseOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(invalid("dt", format!("must be > 0, got {}", self.dt)));
        }
        if !(self.bin >= self.dt) {
            return Err(invalid("bin", format!("must be >= dt, got {}", self.bin)));
        }
        if !(self.t_final >= self.bin) {
            return Err(invalid("t_final", format!("must be >= bin, got {}", self.t_final)));
        }
        Ok(())
    }

    fn steps_per_bin(&self) -> usize {
        (self.bin / self.dt).round().max(1.0) as usize
    }

    fn n_bins(&self) -> usize {
        (self.t_final / (self.steps_per_bin() as f64 * self.dt)).floor() as usize
    }

    /// Lab-frame step bound `π/(20 ω_d)`.
    pub fn lab_frame_dt(omega_d: f64) -> f64 {
        std::f64::consts::PI / (20.0 * TAU * omega_d)
    }
}

/// Binned heterodyne record. `x_record[k]` and `p_record[k]` are the bin
/// averages of the two quadrature currents over the bin ending at `times[k]`;
/// their means are `√κ⟨X⟩`, `√κ⟨P⟩` with `X = (a + a†)/√2`, `P = −i(a − a†)/√2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub x_record: Vec<f64>,
    pub p_record: Vec<f64>,
    pub qubit_init: u8,
    pub seed: u64,
    pub stream: u64,
    pub model_tag: ModelTag,
}

/// Noise-free evolution: expected records, the demodulated field `⟨a⟩` per bin
/// and the final state.
#[derive(Debug, Clone)]
pub struct DeterministicRun {
    pub times: Vec<f64>,
    pub x_mean: Vec<f64>,
    pub p_mean: Vec<f64>,
    pub field: Vec<C64>,
    pub final_state: Vec<C64>,
}

struct Workspace {
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
    acc: Vec<C64>,
}

impl Workspace {
    fn new(d: usize) -> Self {
        let z = vec![C64::new(0.0, 0.0); d];
        Self { k: [z.clone(), z.clone(), z.clone(), z.clone()], tmp: z.clone(), acc: z }
    }
}

/// Non-diagonal drift `L(t)ψ` with `⟨c⟩ = ec` frozen over the step.
fn drift_apply(m: &SseModel, pulse: &PulseSpec, t: f64, ec: C64, x: &[C64], out: &mut [C64]) {
    out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
    let s = match m.frame {
        Frame::Rotating => pulse_amplitude(pulse, t),
        Frame::Lab { omega_d } => pulse_amplitude(pulse, t) * (omega_d * t).cos(),
    };
    if s != 0.0 {
        m.drive.apply_add(-I * s, x, out);
    }
    m.collapse_sq.apply_add(C64::new(-0.5, 0.0), x, out);
    m.collapse.apply_add(0.5 * ec.conj(), x, out);
    let shift = -0.25 * ec.norm_sqr();
    for (o, xi) in out.iter_mut().zip(x) {
        *o += shift * xi;
    }
}

fn rotate_diagonal(h0: &[f64], psi: &mut [C64], h: f64) {
    for (z, e) in psi.iter_mut().zip(h0) {
        if *e != 0.0 {
            *z *= C64::from_polar(1.0, -e * h);
        }
    }
}

/// Core propagator; `rng = None` switches the noise off.
fn evolve(
    m: &SseModel,
    pulse: &PulseSpec,
    opts: &SseOptions,
    qubit: u8,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<C64>, Vec<C64>)> {
    pulse.validate()?;
    opts.validate()?;
    let q = qubit.min(1) as usize;
    let h0 = &m.h0[q];
    let d = m.dim();
    let dt = opts.dt;
    let per_bin = opts.steps_per_bin();
    let bin_dt = per_bin as f64 * dt;
    let n_bins = opts.n_bins();
    let sq = dt.sqrt();
    let mut psi = m.initial[q].clone();
    let mut ws = Workspace::new(d);
    let (mut times, mut xs, mut ps, mut field) = (
        Vec::with_capacity(n_bins),
        Vec::with_capacity(n_bins),
        Vec::with_capacity(n_bins),
        Vec::with_capacity(n_bins),
    );
    let demod = |t: f64| match m.frame {
        Frame::Rotating => C64::new(1.0, 0.0),
        Frame::Lab { omega_d } => C64::from_polar(1.0, omega_d * t),
    };
    let mut step = 0usize;
    for _ in 0..n_bins {
        let mut jx = 0.0;
        let mut jp = 0.0;
        for _ in 0..per_bin {
            let t = step as f64 * dt;
            rotate_diagonal(h0, &mut psi, 0.5 * dt);
            let ec = m.collapse.expect(&psi);
            let (dw1, dw2) = match rng.as_deref_mut() {
                Some(r) => {
                    let a: f64 = StandardNormal.sample(r);
                    let b: f64 = StandardNormal.sample(r);
                    (a * sq, b * sq)
                }
                None => (0.0, 0.0),
            };
            // noise: c(dW₁ − i dW₂)/√2 − (Re⟨c⟩dW₁ + Im⟨c⟩dW₂)/√2
            let noise_c = C64::new(dw1, -dw2) * std::f64::consts::FRAC_1_SQRT_2;
            let noise_s = (ec.re * dw1 + ec.im * dw2) * std::f64::consts::FRAC_1_SQRT_2;
            ws.acc.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            if noise_c != C64::new(0.0, 0.0) {
                m.collapse.apply_add(noise_c, &psi, &mut ws.acc);
                for (a, p) in ws.acc.iter_mut().zip(&psi) {
                    *a -= noise_s * p;
                }
            }
            // RK4 on the linear drift
            ws.tmp.copy_from_slice(&psi);
            drift_apply(m, pulse, t, ec, &ws.tmp, &mut ws.k[0]);
            for stage in 1..4 {
                let c = if stage == 3 { 1.0 } else { 0.5 };
                for i in 0..d {
                    ws.tmp[i] = psi[i] + c * dt * ws.k[stage - 1][i];
                }
                drift_apply(m, pulse, t + c * dt, ec, &ws.tmp, &mut ws.k[stage]);
            }
            for i in 0..d {
                let incr = dt / 6.0 * (ws.k[0][i] + 2.0 * ws.k[1][i] + 2.0 * ws.k[2][i] + ws.k[3][i]);
                psi[i] += incr + ws.acc[i];
            }
            let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let correction = (norm - 1.0).abs();
            if !(correction <= NORM_TOLERANCE) {
                return Err(Error::NormDivergence { correction, time: t + dt });
            }
            psi.iter_mut().for_each(|z| *z /= norm);
            rotate_diagonal(h0, &mut psi, 0.5 * dt);
            // record: J = √2⟨c⟩ + (dW₁ + i dW₂)/dt, demodulated
            let j = (ec * std::f64::consts::SQRT_2 * dt + C64::new(dw1, dw2)) * demod(t);
            jx += j.re;
            jp += j.im;
            step += 1;
        }
        let t_end = step as f64 * dt;
        times.push(t_end);
        xs.push(jx / bin_dt);
        ps.push(jp / bin_dt);
        field.push(m.field.expect(&psi) * demod(t_end));
    }
    Ok((times, xs, ps, field, psi))
}

/// One heterodyne trajectory. The noise stream is ChaCha8 seeded with `seed`
/// on stream `stream`.
pub fn sse_trajectory(
    m: &SseModel,
    pulse: &PulseSpec,
    opts: &SseOptions,
    qubit: u8,
    seed: u64,
    stream: u64,
) -> Result<TrajectoryRecord> {
    clear_upper_simd();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let (times, x_record, p_record, _, _) = evolve(m, pulse, opts, qubit, Some(&mut rng))?;
    Ok(TrajectoryRecord { times, x_record, p_record, qubit_init: qubit, seed, stream, model_tag: m.tag })
}

pub fn deterministic_run(m: &SseModel, pulse: &PulseSpec, opts: &SseOptions, qubit: u8) -> Result<DeterministicRun> {
    let (times, x_mean, p_mean, field, final_state) = evolve(m, pulse, opts, qubit, None)?;
    Ok(DeterministicRun { times, x_mean, p_mean, field, final_state })
}

/// Filter `⟨a_e(t)⟩ − ⟨a_g(t)⟩` on the record grid; the real part weights the
/// X current and the imaginary part the P current.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterWeights {
    pub times: Vec<f64>,
    pub w_x: Vec<f64>,
    pub w_p: Vec<f64>,
}

impl FilterWeights {
    pub fn phase(&self, k: usize) -> f64 {
        self.w_p[k].atan2(self.w_x[k])
    }
}

/// Matched filter from the two noise-free reference evolutions.
pub fn matched_filter(m: &SseModel, pulse: &PulseSpec, opts: &SseOptions) -> Result<FilterWeights> {
    let g = deterministic_run(m, pulse, opts, 0)?;
    let e = deterministic_run(m, pulse, opts, 1)?;
    let diff: Vec<C64> = e.field.iter().zip(&g.field).map(|(a, b)| a - b).collect();
    Ok(FilterWeights {
        times: g.times,
        w_x: diff.iter().map(|z| z.re).collect(),
        w_p: diff.iter().map(|z| z.im).collect(),
    })
}

/// `∫ (w_x J_x + w_p J_p) dt` over the bins ending at or before `tau`.
pub fn integrate_record(rec: &TrajectoryRecord, w: &FilterWeights, tau: f64) -> f64 {
    let mut prev = 0.0;
    let mut s = 0.0;
    for k in 0..rec.times.len().min(w.times.len()) {
        let t = rec.times[k];
        if t > tau + 1e-9 {
            break;
        }
        s += (w.w_x[k] * rec.x_record[k] + w.w_p[k] * rec.p_record[k]) * (t - prev);
        prev = t;
    }
    s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    /// Trajectories per qubit state.
    pub n_traj: usize,
    /// Integration times in ns.
    pub tau_grid: Vec<f64>,
    pub seed: u64,
    #[serde(default)]
    pub options: SseOptions,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_traj < 100 {
            return Err(invalid("n_traj", format!("must be >= 100, got {}", self.n_traj)));
        }
        if self.tau_grid.is_empty() || self.tau_grid.iter().any(|t| !(*t > 0.0)) {
            return Err(invalid("tau_grid", "needs positive integration times"));
        }
        self.options.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssignmentPoint {
    pub tau: f64,
    pub error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n_traj: usize,
    pub threshold: f64,
    pub snr: f64,
    /// `½ erfc(SNR/2)`
    pub gaussian_error: f64,
}

/// Wilson score interval for `k` successes out of `n` at normal quantile `z`.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, v)
}

/// Classifies integrated signals at the midpoint of the class means.
pub fn assign(sig_g: &[f64], sig_e: &[f64], tau: f64) -> AssignmentPoint {
    let (mg, vg) = mean_var(sig_g);
    let (me, ve) = mean_var(sig_e);
    let threshold = 0.5 * (mg + me);
    let sep = me - mg;
    let spread = (vg + ve).sqrt();
    if sep.abs() <= 1e-12 * spread.max(1e-300) {
        log::warn!("class means coincide at tau = {tau} ns; assignment carries no information");
    }
    let above = |s: f64| if sep >= 0.0 { s > threshold } else { s < threshold };
    let wrong = sig_g.iter().filter(|&&s| above(s)).count() + sig_e.iter().filter(|&&s| !above(s)).count();
    let total = sig_g.len() + sig_e.len();
    let (ci_low, ci_high) = wilson_interval(wrong, total, 1.959_963_984_540_054);
    let snr = if spread > 0.0 { sep.abs() / spread } else { 0.0 };
    AssignmentPoint {
        tau,
        error: wrong as f64 / total as f64,
        ci_low,
        ci_high,
        n_traj: sig_g.len().min(sig_e.len()),
        threshold,
        snr,
        gaussian_error: 0.5 * erfc(snr / 2.0),
    }
}

/// Noise stream of trajectory `index` for qubit `q`.
pub fn trajectory_stream(index: usize, qubit: u8) -> u64 {
    2 * index as u64 + qubit as u64
}

/// Assignment error versus integration time. Trajectories run in parallel; each
/// draws its noise from `(seed, trajectory_stream(i, q))`, so the result does
/// not depend on the scheduling.
pub fn assignment_error(m: &SseModel, pulse: &PulseSpec, ens: &EnsembleSpec) -> Result<Vec<AssignmentPoint>> {
    ens.validate()?;
    let max_tau = ens.tau_grid.iter().cloned().fold(0.0, f64::max);
    let opts = SseOptions { t_final: ens.options.t_final.max(max_tau), ..ens.options };
    let w = matched_filter(m, pulse, &opts)?;
    let signals = |q: u8| -> Result<Vec<Vec<f64>>> {
        (0..ens.n_traj)
            .into_par_iter()
            .map(|i| {
                let rec = sse_trajectory(m, pulse, &opts, q, ens.seed, trajectory_stream(i, q))?;
                Ok(ens.tau_grid.iter().map(|&tau| integrate_record(&rec, &w, tau)).collect())
            })
            .collect()
    };
    let g = signals(0)?;
    let e = signals(1)?;
    Ok(ens
        .tau_grid
        .iter()
        .enumerate()
        .map(|(k, &tau)| {
            let sg: Vec<f64> = g.iter().map(|s| s[k]).collect();
            let se: Vec<f64> = e.iter().map(|s| s[k]).collect();
            assign(&sg, &se, tau)
        })
        .collect())
}

/// Gaussian-limit SNR `√(κ ∫|⟨a_e⟩ − ⟨a_g⟩|² dt)` of the matched filter.
pub fn filter_snr(w: &FilterWeights, kappa: f64, tau: f64) -> f64 {
    let mut prev = 0.0;
    let mut s = 0.0;
    for k in 0..w.times.len() {
        let t = w.times[k];
        if t > tau + 1e-9 {
            break;
        }
        s += (w.w_x[k].powi(2) + w.w_p[k].powi(2)) * (t - prev);
        prev = t;
    }
    (TAU * kappa * s).sqrt()
}

/// Columns `tau_ns, error, ci_low, ci_high, n_traj, threshold, snr, gaussian_error`.
pub fn write_error_csv(path: &Path, points: &[AssignmentPoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["tau_ns", "error", "ci_low", "ci_high", "n_traj", "threshold", "snr", "gaussian_error"])?;
    for p in points {
        w.write_record(&[
            p.tau.to_string(),
            p.error.to_string(),
            p.ci_low.to_string(),
            p.ci_high.to_string(),
            p.n_traj.to_string(),
            p.threshold.to_string(),
            p.snr.to_string(),
            p.gaussian_error.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `time_ns, x_record, p_record`.
pub fn write_record_csv(path: &Path, rec: &TrajectoryRecord) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "time_ns,x_record,p_record")?;
    for k in 0..rec.times.len() {
        writeln!(f, "{},{},{}", rec.times[k], rec.x_record[k], rec.p_record[k])?;
    }
    f.flush()?;
    Ok(())
}

/// Fock cutoff that holds a coherent state of amplitude `alpha` with a
/// negligible tail.
pub fn default_fock_cutoff(alpha: f64) -> usize {
    let a = alpha.abs();
    (a * a + 6.0 * a + 10.0).ceil() as usize
}
