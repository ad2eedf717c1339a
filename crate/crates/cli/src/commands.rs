use std::io::Write as _;

use anyhow::{Context, Result};
use longread::circuit::{assemble_hamiltonian, build_reduced_model, derived_params};
use longread::classical::{
    bohr_sommerfeld_orbit, bound_state_count, deviation_curve, orbit_survival, poincare_section,
    separatrix_curve, DriveKind, PendulumParams, PhasePoint, PhotonMapping,
};
use longread::readout::{
    assignment_error, default_fock_cutoff, deterministic_run, dressed_resonator_frequencies, full_sse_model,
    matched_filter, reduced_sse_model, EnsembleSpec, PulseSpec, SseModel, SseOptions,
};
use longread::schrieffer_wolff::{sw_diagonal, sw_second_order, SwOptions};
use longread::spectral::{
    diagonalize, find_ncrit, label_branches, modular_spectrum, sweep_ncrit, write_modular_csv, MODULAR_BRANCHES,
};
use serde_json::json;

use crate::config::{ReadoutModelKind, RunConfig};
use crate::output::{f, OutDir};
use crate::plot::{heatmap, xy_plot, Series};

/// Branch table, per-level populations, modular spectrum and threshold summary.
pub fn spectrum(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let t = cfg.transmon.spec()?;
    let r = cfg.resonator.spec()?;
    let derived = derived_params(&t, &r).ok();
    let h = assemble_hamiltonian(&t, &r)?;
    let eig = diagonalize(&h)?;
    drop(h);
    let bt = label_branches(&eig);
    let nc = find_ncrit(&bt);
    let (k, n) = bt.dims;

    bt.write_csv(out.create_file("branches.csv")?)?;

    let mut w = out.csv_writer("populations.csv")?;
    let mut header = vec!["branch".to_string(), "rung".into(), "eigen_index".into()];
    header.extend((0..k).map(|j| format!("p_{j}")));
    w.write_record(&header)?;
    for (j, branch) in bt.branches.iter().enumerate() {
        for (m, p) in branch.iter().enumerate() {
            let mut row = vec![j.to_string(), m.to_string(), p.eigen_index.to_string()];
            for level in 0..k {
                let pop: f64 = (0..n).map(|q| eig.eigenvectors[(level * n + q, p.eigen_index)].powi(2)).sum();
                row.push(f(pop));
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;

    let modular = modular_spectrum(&bt, r.omega_r);
    write_modular_csv(&modular, out.create_file("modular.csv")?)?;

    let swaps: Vec<_> = bt
        .all_swaps()
        .iter()
        .map(|s| json!({"branch": s.branch, "rung": s.rung, "from": s.from, "to": s.to, "parity_preserving": s.preserves_parity()}))
        .collect();
    let summary = json!({
        "omega_r_ghz": r.omega_r,
        "omega_q_ghz": derived.map(|d| d.omega_q),
        "delta_ghz": derived.map(|d| d.delta),
        "dims": [k, n],
        "n_crit": nc.n_crit.value,
        "n_crit_censored": nc.n_crit.censored,
        "n_crit_ground": nc.ground.value,
        "n_crit_excited": nc.excited.value,
        "cap": nc.cap,
        "degenerate_ties": bt.degenerate_ties,
        "swaps": swaps,
    });
    let mut sfile = out.create_file("summary.json")?;
    writeln!(sfile, "{}", serde_json::to_string_pretty(&summary)?)?;

    if cfg.plot {
        let series = bt
            .branches
            .iter()
            .take(k.min(6))
            .enumerate()
            .map(|(j, b)| Series::line(format!("branch {j}"), b.iter().enumerate().map(|(m, p)| (m as f64, p.n_t)).collect()))
            .collect();
        xy_plot(&out.file("populations.svg"), "Transmon population along branches", "resonator photons", "N_t", series, false)?;
        let series = (0..MODULAR_BRANCHES.min(k))
            .map(|j| {
                Series::dots(
                    if j < 2 { format!("branch {j}") } else { String::new() },
                    modular.iter().filter(|p| p.branch == j).map(|p| (p.n_r, p.folded)).collect(),
                )
            })
            .collect();
        xy_plot(&out.file("modular.svg"), "Modular spectrum", "N_r", "(E - E_00) mod omega_r [GHz]", series, false)?;
    }
    Ok(())
}

pub fn ncrit_map(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let map = sweep_ncrit(&cfg.sweep)?;
    map.write_csv(out.create_file("crit_map.csv")?)?;
    if cfg.plot {
        let values: Vec<Vec<Option<f64>>> = (0..map.axis_1.values.len())
            .map(|i| {
                (0..map.axis_2.values.len())
                    .map(|j| map.errors[i][j].is_none().then_some(map.n_crit[i][j] as f64))
                    .collect()
            })
            .collect();
        heatmap(
            &out.file("crit_map.svg"),
            "Critical photon number",
            map.axis_2.name.name(),
            map.axis_1.name.name(),
            &map.axis_2.values,
            &map.axis_1.values,
            &values,
            &map.censored,
        )?;
    }
    Ok(())
}

fn readout_model(cfg: &RunConfig, alpha_f: f64) -> Result<(SseModel, PulseSpec, SseOptions)> {
    let ro = &cfg.readout;
    let max_tau = ro.tau_grid.iter().cloned().fold(0.0, f64::max);
    match ro.model {
        ReadoutModelKind::Reduced => {
            let m = build_reduced_model(ro.chi_z, ro.omega_r, ro.omega_q, ro.kappa)?;
            let pulse = PulseSpec { alpha_f, tau: ro.ramp, omega_d: ro.omega_r, kappa: ro.kappa };
            let n_fock = if ro.n_fock == 0 { default_fock_cutoff(alpha_f) } else { ro.n_fock };
            let opts = SseOptions { dt: ro.dt, bin: ro.bin, t_final: max_tau };
            Ok((reduced_sse_model(&m, &pulse, n_fock)?, pulse, opts))
        }
        ReadoutModelKind::Full => {
            let t = cfg.transmon.spec()?;
            let r = cfg.resonator.spec()?;
            let h = assemble_hamiltonian(&t, &r)?;
            let eig = diagonalize(&h)?;
            let (fg, fe) = dressed_resonator_frequencies(&eig)?;
            let omega_d = 0.5 * (fg + fe);
            let pulse = PulseSpec { alpha_f, tau: ro.ramp, omega_d, kappa: ro.kappa };
            let dt = ro.dt.min(SseOptions::lab_frame_dt(omega_d));
            let opts = SseOptions { dt, bin: ro.bin, t_final: max_tau };
            Ok((full_sse_model(&h, &eig, ro.kappa, omega_d)?, pulse, opts))
        }
    }
}

/// Assignment error versus integration time for each target amplitude.
pub fn readout(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let ro = &cfg.readout;
    let mut errors = out.csv_writer("readout_errors.csv")?;
    errors.write_record(["alpha_f", "tau_ns", "error", "ci_low", "ci_high", "n_traj", "threshold", "snr", "gaussian_error"])?;
    let mut filt = out.csv_writer("readout_filter.csv")?;
    filt.write_record(["alpha_f", "time_ns", "w_x", "w_p"])?;
    let mut field = out.csv_writer("readout_mean_field.csv")?;
    field.write_record(["alpha_f", "qubit", "time_ns", "re_a", "im_a"])?;
    let mut series = Vec::new();
    for (k, &alpha_f) in ro.alpha_f.iter().enumerate() {
        let (model, pulse, opts) = readout_model(cfg, alpha_f)?;
        let w = matched_filter(&model, &pulse, &opts)?;
        for i in 0..w.times.len() {
            filt.write_record([f(alpha_f), f(w.times[i]), f(w.w_x[i]), f(w.w_p[i])])?;
        }
        for q in [0u8, 1] {
            let run = deterministic_run(&model, &pulse, &opts, q)?;
            for i in 0..run.times.len() {
                field.write_record([f(alpha_f), q.to_string(), f(run.times[i]), f(run.field[i].re), f(run.field[i].im)])?;
            }
        }
        let ens = EnsembleSpec {
            n_traj: ro.n_traj,
            tau_grid: ro.tau_grid.clone(),
            seed: cfg.seed.wrapping_add(k as u64),
            options: opts,
        };
        let points = assignment_error(&model, &pulse, &ens)?;
        for p in &points {
            errors.write_record([
                f(alpha_f),
                f(p.tau),
                f(p.error),
                f(p.ci_low),
                f(p.ci_high),
                p.n_traj.to_string(),
                f(p.threshold),
                f(p.snr),
                f(p.gaussian_error),
            ])?;
        }
        log::info!("alpha_f = {alpha_f}: error at {} ns = {:.3e}", points.last().map_or(0.0, |p| p.tau), points.last().map_or(0.0, |p| p.error));
        series.push(Series::line(format!("alpha_f = {alpha_f}"), points.iter().map(|p| (p.tau, p.error)).collect()));
        series.push(Series::dots(String::new(), points.iter().map(|p| (p.tau, p.gaussian_error)).collect()));
    }
    errors.flush()?;
    filt.flush()?;
    field.flush()?;
    if cfg.plot {
        xy_plot(&out.file("readout_errors.svg"), "Assignment error (lines) and Gaussian estimate (dots)", "integration time [ns]", "error", series, true)?;
    }
    Ok(())
}

fn drive_name(d: DriveKind) -> &'static str {
    match d {
        DriveKind::Charge => "charge",
        DriveKind::Parametric => "parametric",
    }
}

/// Poincaré sections, Bohr-Sommerfeld orbits, separatrix and deviation curves.
pub fn classical(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let c = &cfg.classical;
    let z = (8.0 / c.e_j_over_e_c).sqrt();
    let omega_p = c.e_c * (8.0 * c.e_j_over_e_c).sqrt();
    let base = PendulumParams { z, drive: DriveKind::Parametric, amplitude: 0.0, omega_d_tilde: c.omega_d / omega_p };
    base.validate()?;
    let mapping = PhotonMapping { phi_rzpf: c.phi_rzpf, charge_coeff: c.charge_coeff };

    let sep = separatrix_curve(200);
    let mut w = out.csv_writer("separatrix.csv")?;
    w.write_record(["phi", "n"])?;
    for p in &sep {
        w.write_record([f(p.phi), f(p.n)])?;
    }
    w.flush()?;

    let count = bound_state_count(z);
    let mut orbits = Vec::new();
    let mut w = out.csv_writer("bs_orbits.csv")?;
    w.write_record(["level", "energy", "phi", "n"])?;
    for j in 0..count {
        let (e, pts) = bohr_sommerfeld_orbit(j, z)?;
        for p in &pts {
            w.write_record([j.to_string(), f(e), f(p.phi), f(p.n)])?;
        }
        orbits.push(pts);
    }
    w.flush()?;

    let ics: Vec<PhasePoint> = (0..c.section_ics)
        .map(|k| PhasePoint::new(0.0, 2.6 * (k as f64 + 0.5) / c.section_ics as f64))
        .collect();
    let mut panels = Vec::new();
    for &nbar in &c.section_photons {
        if nbar == 0.0 {
            panels.push((DriveKind::Parametric, 0.0));
        } else {
            panels.push((DriveKind::Parametric, nbar));
            panels.push((DriveKind::Charge, nbar));
        }
    }
    let mut sec_w = out.csv_writer("sections.csv")?;
    sec_w.write_record(["drive", "photons", "amplitude", "ic", "period", "phi", "n"])?;
    let mut surv_w = out.csv_writer("orbit_survival.csv")?;
    surv_w.write_record(["drive", "photons", "amplitude", "level", "escaped", "n_phases", "action_min", "action_max"])?;
    for &(drive, nbar) in &panels {
        let amplitude = mapping.amplitude(drive, nbar);
        let p = PendulumParams { drive, amplitude, ..base };
        let section = poincare_section(&p, &ics, c.section_periods)?;
        let name = if nbar == 0.0 { "none" } else { drive_name(drive) };
        for (i, traj) in section.points.iter().enumerate() {
            for (k, s) in traj.iter().enumerate() {
                sec_w.write_record([name.to_string(), f(nbar), f(amplitude), i.to_string(), (k + 1).to_string(), f(s.phi), f(s.n)])?;
            }
        }
        if nbar > 0.0 {
            for level in 0..2.min(count) {
                let s = orbit_survival(&p, level, 16, c.section_periods)?;
                surv_w.write_record([
                    name.to_string(),
                    f(nbar),
                    f(amplitude),
                    level.to_string(),
                    s.escaped.to_string(),
                    s.n_phases.to_string(),
                    f(s.action_min),
                    f(s.action_max),
                ])?;
            }
        }
        if cfg.plot {
            let mut series = vec![Series::dots(
                String::new(),
                section.points.iter().flatten().map(|s| (s.phi, s.n)).collect(),
            )];
            series.push(Series::line("separatrix", sep.iter().map(|s| (s.phi, s.n)).collect()));
            for (j, o) in orbits.iter().take(2).enumerate() {
                let mut pts: Vec<(f64, f64)> = o.iter().map(|s| (s.phi, s.n)).collect();
                pts.push(pts[0]);
                series.push(Series::line(format!("orbit j={j}"), pts));
            }
            let file = format!("section_{name}_{nbar}.svg");
            xy_plot(&out.file(&file), &format!("{name} drive, {nbar} photons"), "phi", "n", series, false)?;
        }
    }
    sec_w.flush()?;
    surv_w.flush()?;

    let mut dev_w = out.csv_writer("deviation.csv")?;
    dev_w.write_record(["drive", "photons", "amplitude", "mean", "std_err", "per_sample", "n_samples", "n_periods"])?;
    let mut summary = serde_json::Map::new();
    let mut series = Vec::new();
    for drive in [DriveKind::Charge, DriveKind::Parametric] {
        let b = PendulumParams { drive, ..base };
        let curve = deviation_curve(&b, &mapping, &c.photons, c.n_samples, c.n_periods, cfg.seed)?;
        for (nbar, s) in curve.photons.iter().zip(&curve.stats) {
            dev_w.write_record([
                drive_name(drive).to_string(),
                f(*nbar),
                f(mapping.amplitude(drive, *nbar)),
                f(s.mean),
                f(s.std_err),
                f(s.per_sample()),
                s.n_samples.to_string(),
                s.n_periods.to_string(),
            ])?;
        }
        summary.insert(format!("{}_crossover_photons", drive_name(drive)), json!(curve.crossover(c.jump_threshold)));
        series.push(Series::line(
            drive_name(drive),
            curve.photons.iter().zip(&curve.stats).map(|(n, s)| (*n, s.per_sample())).collect(),
        ));
    }
    dev_w.flush()?;
    summary.insert("jump_threshold".into(), json!(c.jump_threshold));
    summary.insert("z".into(), json!(z));
    summary.insert("omega_d_tilde".into(), json!(base.omega_d_tilde));
    summary.insert("bound_states".into(), json!(count));
    let mut sfile = out.create_file("classical_summary.json")?;
    writeln!(sfile, "{}", serde_json::to_string_pretty(&summary)?)?;
    if cfg.plot {
        xy_plot(&out.file("deviation.svg"), "Mean deviation per drive period", "photons", "deviation", series, true)?;
    }
    Ok(())
}

/// Exact dispersive shifts and second-order energies, optionally against the
/// exact spectrum.
pub fn sw_report(cfg: &RunConfig, out: &mut OutDir) -> Result<()> {
    let t = cfg.transmon.spec()?;
    let r = cfg.resonator.spec()?;
    let opts = SwOptions { levels: cfg.sw.levels.clone(), max_photon: cfg.sw.max_photon };
    let diag = sw_diagonal(&t, &r)?;
    let mut w = out.csv_writer("sw_chi.csv")?;
    w.write_record(["level", "photons", "chi_ghz"])?;
    for j in 0..diag.levels() {
        for m in 1..=cfg.sw.max_photon.min(diag.n_fock() - 1) {
            if let Some(chi) = diag.chi(j, m) {
                w.write_record([j.to_string(), m.to_string(), f(chi)])?;
            }
        }
    }
    w.flush()?;

    let spec2 = sw_second_order(&t, &r, &opts).context("second-order energies")?;
    let exact = if cfg.sw.compare_exact {
        let h = assemble_hamiltonian(&t, &r)?;
        Some(label_branches(&diagonalize(&h)?))
    } else {
        None
    };
    let mut w = out.csv_writer("sw_energies.csv")?;
    w.write_record(["level", "photons", "energy0_ghz", "energy2_ghz", "exact_ghz", "error2_ghz"])?;
    let mut worst = 0.0f64;
    for (i, &level) in spec2.levels.iter().enumerate() {
        for m in 0..spec2.energy2[i].len() {
            let e2 = spec2.energy2[i][m];
            let ex = exact.as_ref().and_then(|bt| bt.branches.get(level).and_then(|b| b.get(m))).map(|p| p.energy);
            let err = ex.map(|x| e2 - x);
            if let Some(e) = err {
                worst = worst.max(e.abs());
            }
            w.write_record([
                level.to_string(),
                m.to_string(),
                f(spec2.energy0[i][m]),
                f(e2),
                ex.map_or(String::new(), f),
                err.map_or(String::new(), f),
            ])?;
        }
    }
    w.flush()?;
    let summary = json!({
        "chi_z0_ghz": diag.chi_z0(),
        "max_abs_error2_ghz": exact.as_ref().map(|_| worst),
    });
    let mut sfile = out.create_file("sw_summary.json")?;
    writeln!(sfile, "{}", serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}
