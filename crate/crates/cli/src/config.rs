//! Run configuration: a TOML file, dotted `--set` overrides, then flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use longread::classical::DEFAULT_CHARGE_COEFF;
use longread::operators::{ResonatorSpec, TransmonSpec};
use longread::spectral::{GridAxis, SweepAxis, SweepBase, SweepSpec};
use serde::{Deserialize, Serialize};

/// Bumped whenever an output column or sidecar field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "yes")]
    pub plot: bool,
    #[serde(default)]
    pub transmon: TransmonConfig,
    #[serde(default)]
    pub resonator: ResonatorConfig,
    #[serde(default = "default_sweep")]
    pub sweep: SweepSpec,
    #[serde(default)]
    pub readout: ReadoutConfig,
    #[serde(default)]
    pub classical: ClassicalConfig,
    #[serde(default)]
    pub sw: SwConfig,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_seed() -> u64 {
    1
}
fn yes() -> bool {
    true
}

fn default_sweep() -> SweepSpec {
    SweepSpec {
        axis_1: GridAxis { name: SweepAxis::EJOverEC, values: (3..=10).map(|k| 10.0 * k as f64).collect() },
        axis_2: GridAxis { name: SweepAxis::Delta, values: (1..=8).map(|k| -(k as f64)).collect() },
        base: SweepBase::default(),
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config is valid")
    }
}

/// Transmon block. Exactly one of `e_j` and `e_j_over_e_c` must be given.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmonConfig {
    pub e_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_j_over_e_c: Option<f64>,
    #[serde(default)]
    pub n_g: f64,
    #[serde(default)]
    pub d: f64,
    #[serde(default = "default_levels")]
    pub k_levels: usize,
    #[serde(default = "default_cutoff")]
    pub charge_cutoff: usize,
}

fn default_levels() -> usize {
    16
}
fn default_cutoff() -> usize {
    30
}

impl Default for TransmonConfig {
    fn default() -> Self {
        Self {
            e_c: 0.215,
            e_j: None,
            e_j_over_e_c: Some(110.0),
            n_g: 0.0,
            d: 0.0,
            k_levels: default_levels(),
            charge_cutoff: default_cutoff(),
        }
    }
}

impl TransmonConfig {
    pub fn e_j(&self) -> Result<f64> {
        match (self.e_j, self.e_j_over_e_c) {
            (Some(e_j), None) => Ok(e_j),
            (None, Some(r)) => Ok(r * self.e_c),
            (None, None) => bail!("transmon.e_j: missing (set `e_j` or `e_j_over_e_c`)"),
            (Some(_), Some(_)) => bail!("transmon.e_j: give either `e_j` or `e_j_over_e_c`, not both"),
        }
    }

    pub fn spec(&self) -> Result<TransmonSpec> {
        let t = TransmonSpec::new(self.e_c, self.e_j()?)
            .with_n_g(self.n_g)
            .with_asymmetry(self.d)
            .with_levels(self.k_levels)
            .with_charge_cutoff(self.charge_cutoff);
        t.validate().context("transmon")?;
        Ok(t)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorConfig {
    #[serde(default = "default_omega_r")]
    pub omega_r: f64,
    #[serde(default = "default_phi")]
    pub phi_rzpf: f64,
    #[serde(default = "default_fock")]
    pub n_fock: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
}

fn default_omega_r() -> f64 {
    8.8
}
fn default_phi() -> f64 {
    0.0896
}
fn default_fock() -> usize {
    100
}
fn default_kappa() -> f64 {
    0.017
}

impl Default for ResonatorConfig {
    fn default() -> Self {
        Self { omega_r: default_omega_r(), phi_rzpf: default_phi(), n_fock: default_fock(), kappa: default_kappa() }
    }
}

impl ResonatorConfig {
    pub fn spec(&self) -> Result<ResonatorSpec> {
        let r = ResonatorSpec::new(self.omega_r, self.phi_rzpf).with_fock(self.n_fock).with_kappa(self.kappa);
        r.validate().context("resonator")?;
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutModelKind {
    Reduced,
    Full,
}

/// Readout block. The reduced model uses `chi_z`, `omega_r`, `omega_q`,
/// `kappa`; the full model uses the transmon and resonator blocks, driven at
/// the mean dressed resonator frequency.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutConfig {
    #[serde(default = "default_model")]
    pub model: ReadoutModelKind,
    #[serde(default = "default_alphas")]
    pub alpha_f: Vec<f64>,
    /// Pulse ramp time in ns.
    #[serde(default = "default_ramp")]
    pub ramp: f64,
    #[serde(default = "default_chi")]
    pub chi_z: f64,
    #[serde(default = "default_ro_omega_r")]
    pub omega_r: f64,
    #[serde(default = "default_omega_q")]
    pub omega_q: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Fock cutoff of the reduced model; 0 picks one from `alpha_f`.
    #[serde(default)]
    pub n_fock: usize,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default = "default_tau_grid")]
    pub tau_grid: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_bin")]
    pub bin: f64,
}

fn default_model() -> ReadoutModelKind {
    ReadoutModelKind::Reduced
}
fn default_alphas() -> Vec<f64> {
    vec![2.0, 3.0, 4.0]
}
fn default_ramp() -> f64 {
    10.0
}
fn default_chi() -> f64 {
    longread::circuit::presets::READOUT_CHI_Z
}
fn default_ro_omega_r() -> f64 {
    9.3
}
fn default_omega_q() -> f64 {
    4.07
}
fn default_n_traj() -> usize {
    1000
}
fn default_tau_grid() -> Vec<f64> {
    (1..=10).map(|k| 5.0 * k as f64).collect()
}
fn default_dt() -> f64 {
    0.01
}
fn default_bin() -> f64 {
    1.0
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty readout block is valid")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    #[serde(default = "default_ratio")]
    pub e_j_over_e_c: f64,
    #[serde(default = "default_classical_e_c")]
    pub e_c: f64,
    /// Resonator drive frequency in GHz; `ω̃_d = omega_d / ω_p`.
    #[serde(default = "default_omega_r")]
    pub omega_d: f64,
    #[serde(default = "default_classical_phi")]
    pub phi_rzpf: f64,
    #[serde(default = "default_charge_coeff")]
    pub charge_coeff: f64,
    /// Photon numbers of the Poincaré panels.
    #[serde(default = "default_panels")]
    pub section_photons: Vec<f64>,
    #[serde(default = "default_section_ics")]
    pub section_ics: usize,
    #[serde(default = "default_section_periods")]
    pub section_periods: usize,
    /// Photon numbers of the deviation curves.
    #[serde(default = "default_photons")]
    pub photons: Vec<f64>,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default = "default_dev_periods")]
    pub n_periods: usize,
    #[serde(default = "default_jump")]
    pub jump_threshold: f64,
}

fn default_ratio() -> f64 {
    110.0
}
fn default_classical_e_c() -> f64 {
    0.215
}
fn default_classical_phi() -> f64 {
    0.09
}
fn default_charge_coeff() -> f64 {
    DEFAULT_CHARGE_COEFF
}
fn default_panels() -> Vec<f64> {
    vec![0.0, 1.0, 9.0, 49.0]
}
fn default_section_ics() -> usize {
    40
}
fn default_section_periods() -> usize {
    300
}
fn default_photons() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 100.0, 120.0, 150.0, 200.0]
}
fn default_samples() -> usize {
    64
}
fn default_dev_periods() -> usize {
    100
}
fn default_jump() -> f64 {
    longread::classical::JUMP_THRESHOLD
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty classical block is valid")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwConfig {
    #[serde(default = "default_sw_levels")]
    pub levels: Vec<usize>,
    #[serde(default = "default_max_photon")]
    pub max_photon: usize,
    /// Compare against exact eigenvalues of the full matrix.
    #[serde(default = "yes")]
    pub compare_exact: bool,
}

fn default_sw_levels() -> Vec<usize> {
    vec![0, 1]
}
fn default_max_photon() -> usize {
    10
}

impl Default for SwConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty sw block is valid")
    }
}

/// Applies `key.path=value` to a TOML tree. The value is parsed as TOML and
/// falls back to a plain string.
pub fn apply_override(root: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .with_context(|| format!("override `{assignment}` is not of the form key=value"))?;
    let value: toml::Value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.trim().split('.').collect();
    let mut table = root;
    for part in &parts[..parts.len() - 1] {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .with_context(|| format!("override `{key}`: `{part}` is not a table"))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Reads the config (or an empty one), applies overrides and deserializes with
/// field paths in the error messages.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let mut table: toml::Table = toml::from_str(&text).context("parsing config")?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let cfg: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(table))
        .map_err(|e| anyhow::anyhow!("config field `{}`: {}", e.path(), e.inner()))?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_defaults() {
        let c = load(None, &[]).unwrap();
        assert_eq!(c.transmon.e_j().unwrap(), 0.215 * 110.0);
        assert_eq!(c.sweep.axis_1.values.len(), 8);
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let c = load(None, &["resonator.omega_r=10.5".into(), "readout.model=\"full\"".into()]).unwrap();
        assert_eq!(c.resonator.omega_r, 10.5);
        assert_eq!(c.readout.model, ReadoutModelKind::Full);
    }

    #[test]
    fn bad_field_reports_path() {
        let err = load(None, &["resonator.n_fock=\"many\"".into()]).unwrap_err().to_string();
        assert!(err.contains("resonator.n_fock"), "{err}");
    }
}
