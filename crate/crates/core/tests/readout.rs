use longread::circuit::{assemble_hamiltonian, build_reduced_model, presets};
use longread::operators::{ResonatorSpec, TransmonSpec};
use longread::readout::{
    cavity_response, deterministic_run, dressed_resonator_frequencies, filter_snr, full_sse_model, matched_filter,
    reduced_sse_model, sse_trajectory, trajectory_stream, wilson_interval, write_error_csv, assign, PulseSpec,
    SseModel, SseOptions,
};
use longread::spectral::diagonalize;
use num_complex::Complex64;
use proptest::prelude::*;

fn readout_setup(alpha_f: f64, t_final: f64) -> (SseModel, PulseSpec, SseOptions) {
    let m = build_reduced_model(presets::READOUT_CHI_Z, 9.3, 4.07, presets::READOUT_KAPPA).unwrap();
    let pulse = PulseSpec { alpha_f, tau: 10.0, omega_d: 9.3, kappa: presets::READOUT_KAPPA };
    let model = reduced_sse_model(&m, &pulse, 30).unwrap();
    (model, pulse, SseOptions { t_final, ..SseOptions::default() })
}

#[test]
fn pointer_states_start_opposite() {
    let (model, pulse, opts) = readout_setup(2.0, 10.0);
    let g = deterministic_run(&model, &pulse, &opts, 0).unwrap();
    let e = deterministic_run(&model, &pulse, &opts, 1).unwrap();
    for k in 0..g.times.len() {
        let t = g.times[k];
        if t > 3.0 {
            break;
        }
        let p = Complex64::new(cavity_response(&pulse, t), 0.0);
        let (dg, de) = (g.field[k] - p, e.field[k] - p);
        let angle = (de / dg).arg().abs().to_degrees();
        assert!((angle - 180.0).abs() <= 5.0, "t = {t}: {angle}°");
    }
}

#[test]
fn filter_lies_on_one_quadrature() {
    let (model, pulse, opts) = readout_setup(2.0, 50.0);
    let w = matched_filter(&model, &pulse, &opts).unwrap();
    for k in 0..w.times.len() {
        assert!(w.w_x[k].abs() <= 1e-9 * w.w_p[k].abs().max(1e-12), "k = {k}");
        assert!((w.phase(k).abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }
    let snr: Vec<f64> = [5.0, 10.0, 20.0, 30.0, 50.0].iter().map(|&tau| filter_snr(&w, pulse.kappa, tau)).collect();
    assert!(snr.windows(2).all(|s| s[1] > s[0]), "{snr:?}");
}

#[test]
fn ensemble_mean_matches_noise_free_run() {
    let (model, pulse, opts) = readout_setup(1.0, 20.0);
    let det = deterministic_run(&model, &pulse, &opts, 1).unwrap();
    let n = 500;
    let recs: Vec<_> = (0..n).map(|i| sse_trajectory(&model, &pulse, &opts, 1, 9, trajectory_stream(i, 1)).unwrap()).collect();
    for k in [4, 9, 19] {
        for (pick, mean) in [(0, det.x_mean[k]), (1, det.p_mean[k])] {
            let vals: Vec<f64> = recs.iter().map(|r| if pick == 0 { r.x_record[k] } else { r.p_record[k] }).collect();
            let mu = vals.iter().sum::<f64>() / n as f64;
            let var = vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1) as f64;
            let se = (var / n as f64).sqrt();
            assert!((mu - mean).abs() < 3.0 * se, "bin {k}: {mu} vs {mean} ± {se}");
        }
    }
}

#[test]
fn halving_dt_leaves_mean_field_unchanged() {
    let (model, pulse, opts) = readout_setup(2.0, 30.0);
    let a = deterministic_run(&model, &pulse, &opts, 0).unwrap();
    let b = deterministic_run(&model, &pulse, &SseOptions { dt: opts.dt / 2.0, ..opts }, 0).unwrap();
    let worst = a.field.iter().zip(&b.field).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn full_model_keeps_transmon_populations() {
    let t = TransmonSpec::from_ratio(0.215, 110.0).with_levels(6);
    let r = ResonatorSpec::new(8.8, 0.0896).with_fock(15).with_kappa(presets::READOUT_KAPPA);
    let h = assemble_hamiltonian(&t, &r).unwrap();
    let eig = diagonalize(&h).unwrap();
    let (fg, fe) = dressed_resonator_frequencies(&eig).unwrap();
    let omega_d = 0.5 * (fg + fe);
    let model = full_sse_model(&h, &eig, r.kappa, omega_d).unwrap();
    let pulse = PulseSpec { alpha_f: 1.0, tau: 10.0, omega_d, kappa: r.kappa };
    let opts = SseOptions { dt: SseOptions::lab_frame_dt(omega_d), bin: 1.0, t_final: 30.0 };
    let mut fields = Vec::new();
    for q in [0u8, 1] {
        let p0 = model.transmon_populations(q, model.initial_state(q));
        let run = deterministic_run(&model, &pulse, &opts, q).unwrap();
        let p1 = model.transmon_populations(q, &run.final_state);
        let change = p0.iter().zip(&p1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(change < 0.01, "qubit {q}: {change}");
        fields.push(*run.field.last().unwrap());
    }
    // Both pointer states are well populated and pulled to opposite sides.
    assert!(fields.iter().all(|f| f.norm() > 0.5), "{fields:?}");
    assert!((fields[0] - fields[1].conj()).norm() < 0.1 * fields[0].norm(), "{fields:?}");
}

#[test]
fn error_table_round_trips() {
    let sig_g: Vec<f64> = (0..200).map(|i| -1.0 + 0.01 * (i % 7) as f64).collect();
    let sig_e: Vec<f64> = (0..200).map(|i| 1.0 - 0.01 * (i % 5) as f64).collect();
    let point = assign(&sig_g, &sig_e, 25.0);
    assert_eq!(point.error, 0.0);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("errors.csv");
    write_error_csv(&path, &[point]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("tau_ns,error,ci_low,ci_high,n_traj,threshold,snr,gaussian_error"));
    assert_eq!(lines.count(), 1);
}

proptest! {
    #[test]
    fn wilson_brackets_estimate(n in 1usize..5000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).round() as usize;
        let (lo, hi) = wilson_interval(k, n, 1.96);
        let p = k as f64 / n as f64;
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12);
    }
}
