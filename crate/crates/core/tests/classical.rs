use std::f64::consts::PI;

use longread::classical::{
    action_area, bohr_sommerfeld_orbit, bound_state_count, deviation_curve, integrate, pendulum_step, wrap_angle,
    DriveKind, PendulumParams, PhasePoint, PhotonMapping, DEFAULT_CHARGE_COEFF, SEPARATRIX_AREA, STEPS_PER_PERIOD,
};
use proptest::prelude::*;

fn params(drive: DriveKind, amplitude: f64) -> PendulumParams {
    PendulumParams { z: (8.0f64 / 110.0).sqrt(), drive, amplitude, omega_d_tilde: 1.38 }
}

fn drive_strategy() -> impl Strategy<Value = DriveKind> {
    prop_oneof![Just(DriveKind::Charge), Just(DriveKind::Parametric)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wrapped_angle_in_range(x in -1e4f64..1e4) {
        let w = wrap_angle(x);
        prop_assert!(w > -PI && w <= PI);
        let turns = (x - w) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    // det ∂(φ', n')/∂(φ, n) = 1 for one step, by central differences.
    #[test]
    fn step_preserves_area(
        drive in drive_strategy(),
        amp in 0.0f64..0.8,
        phi in -3.0f64..3.0,
        n in -2.0f64..2.0,
        t in 0.0f64..5.0,
    ) {
        let p = params(drive, amp);
        let dt = p.period() / STEPS_PER_PERIOD as f64;
        let h = 1e-6;
        let f = |a: f64, b: f64| pendulum_step(&p, PhasePoint::new(a, b), t, dt);
        let (pp, pm) = (f(phi + h, n), f(phi - h, n));
        let (np, nm) = (f(phi, n + h), f(phi, n - h));
        let j11 = (pp.phi - pm.phi) / (2.0 * h);
        let j21 = (pp.n - pm.n) / (2.0 * h);
        let j12 = (np.phi - nm.phi) / (2.0 * h);
        let j22 = (np.n - nm.n) / (2.0 * h);
        prop_assert!((j11 * j22 - j12 * j21 - 1.0).abs() < 1e-7);
    }

    #[test]
    fn reversible(
        drive in drive_strategy(),
        amp in 0.0f64..0.8,
        phi in -3.0f64..3.0,
        n in -2.0f64..2.0,
    ) {
        let p = params(drive, amp);
        let dt = p.period() / STEPS_PER_PERIOD as f64;
        let steps = 3 * STEPS_PER_PERIOD;
        let s0 = PhasePoint::new(phi, n);
        let s1 = integrate(&p, s0, 0.0, dt, steps);
        let back = integrate(&p, s1, steps as f64 * dt, -dt, steps);
        prop_assert!((back.phi - s0.phi).abs() < 1e-8 && (back.n - s0.n).abs() < 1e-8);
    }

    #[test]
    fn bohr_sommerfeld_quantized_area(ratio in 20.0f64..300.0, j in 0usize..4) {
        let z = (8.0 / ratio).sqrt();
        let target = 2.0 * PI * z * (j as f64 + 0.5);
        match bohr_sommerfeld_orbit(j, z) {
            Ok((e, _)) => {
                prop_assert!(target < SEPARATRIX_AREA);
                prop_assert!((action_area(e) - target).abs() < 1e-8);
            }
            Err(_) => prop_assert!(target >= SEPARATRIX_AREA),
        }
        // ⌊16/2πz⌋ levels are always bound; the half-integer rule may admit one more.
        let count = bound_state_count(z);
        if j < count {
            prop_assert!(bohr_sommerfeld_orbit(j, z).is_ok());
        }
        if j > count {
            prop_assert!(bohr_sommerfeld_orbit(j, z).is_err());
        }
    }
}

// More initial conditions shrink the standard error without moving the mean.
#[test]
fn doubling_samples_is_consistent() {
    let mapping = PhotonMapping { phi_rzpf: 0.09, charge_coeff: DEFAULT_CHARGE_COEFF };
    let base = params(DriveKind::Parametric, 0.0);
    let small = deviation_curve(&base, &mapping, &[10.0], 32, 40, 3).unwrap().stats[0];
    let large = deviation_curve(&base, &mapping, &[10.0], 64, 40, 3).unwrap().stats[0];
    assert!(large.std_err < small.std_err);
    let spread = 3.0 * (small.std_err.powi(2) + large.std_err.powi(2)).sqrt();
    assert!((small.mean - large.mean).abs() < spread, "{} vs {}", small.mean, large.mean);
}
