use proptest::prelude::*;

use qfs_core::field_model::{
    cep_phase_residual, delay_grid, heterodyne_trace, wrap_phase, DetectionSpec, PulseSpec,
};
use qfs_core::gabor_analysis::{windowed_traces, CoherenceProfile, GaborWindow};
use qfs_core::ghost_mc::{run_ensemble, shot_signal, up_converted, McConfig};
use qfs_core::photon_stats::{
    energy_to_mean_photons, exact_moments, photon_energy, PhotonDistribution,
};
use qfs_core::trace_sim::{moving_average, spectrum_of, ScanResult};

fn pulse(field: f64, cep: f64) -> PulseSpec {
    PulseSpec {
        carrier_freq: 0.3,
        fwhm: 40.0,
        field_amplitude: field,
        cep,
        cep_stable: true,
    }
}

fn detection(m: u32, n: u32) -> DetectionSpec {
    DetectionSpec {
        lo_order: m,
        mix_order: n,
        detection_freq: 0.3,
        classical_noise: 0.0,
        noise_floor: 0.0,
        shots_per_point: 2,
        seed: 0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncated_pmf_holds_its_mass(mean in 0.0f64..40.0, a in 0.0f64..=1.0) {
        let d = PhotonDistribution::mixture(mean, a).unwrap();
        let t = d.truncate(1e-12).unwrap();
        prop_assert!((t.mass() - 1.0).abs() < 1e-11);
        prop_assert!(t.probs().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn mixture_pmf_is_convex_combination(mean in 0.01f64..30.0, a in 0.0f64..=1.0, k in 0u64..60) {
        let m = PhotonDistribution::mixture(mean, a).unwrap().probability(k);
        let p = PhotonDistribution::poisson(mean).unwrap().probability(k);
        let b = PhotonDistribution::bose_einstein(mean).unwrap().probability(k);
        prop_assert!((m - (a * p + (1.0 - a) * b)).abs() <= 1e-15 + 1e-12 * m);
    }

    #[test]
    fn sqrt_moments_are_bounded(mean in 0.0f64..50.0) {
        let s = exact_moments(&PhotonDistribution::poisson(mean).unwrap(), 1e-12).unwrap();
        // Jensen: E[√n] ≤ √E[n]
        prop_assert!(s.mean_sqrt_n <= mean.sqrt() + 1e-9);
        prop_assert!(s.var_sqrt_n >= 0.0);
        prop_assert!((s.mean_n - mean).abs() < 1e-9 * (1.0 + mean));
    }

    #[test]
    fn photon_conversion_is_linear(e in 1e-22f64..1e-9, lambda in 200e-9f64..3e-6) {
        let n = energy_to_mean_photons(e, lambda).unwrap();
        prop_assert!((n * photon_energy(lambda).unwrap() / e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shot_model_is_symmetric(a in 0u64..10_000_000, b in 0u64..10_000_000) {
        prop_assert_eq!(up_converted(a, b), up_converted(b, a));
        prop_assert_eq!(up_converted(a, b), a.min(b));
        prop_assert_eq!(shot_signal(a, b), shot_signal(b, a));
        prop_assert!(shot_signal(a, b) >= 0.0);
    }

    #[test]
    fn phase_wrap_lands_in_half_open_interval(x in -1e3f64..1e3) {
        let w = wrap_phase(x);
        prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
        let turns = (x - w) / std::f64::consts::TAU;
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn balanced_orders_cancel_common_cep(phi in -10.0f64..10.0, delta in -10.0f64..10.0, m in 1u32..5) {
        let delays = delay_grid(-60.0, 60.0, 1.0).unwrap();
        let det = detection(m, m);
        let base = heterodyne_trace(&pulse(1.0, phi), &pulse(1.3, phi), &det, &delays);
        let shifted = heterodyne_trace(&pulse(1.0, phi + delta), &pulse(1.3, phi + delta), &det, &delays);
        for (a, b) in base.iter().zip(&shifted) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
        prop_assert!(cep_phase_residual(m, m, phi, phi).abs() < 1e-9);
    }

    #[test]
    fn trace_is_linear_in_test_field(f in 0.0f64..100.0, m in 1u32..4, n in 1u32..4) {
        let delays = delay_grid(-60.0, 60.0, 2.0).unwrap();
        let det = detection(m, n);
        let one = heterodyne_trace(&pulse(1.0, 0.2), &pulse(1.1, 0.5), &det, &delays);
        let scaled = heterodyne_trace(&pulse(f, 0.2), &pulse(1.1, 0.5), &det, &delays);
        for (a, b) in one.iter().zip(&scaled) {
            prop_assert!((a * f - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn moving_average_keeps_constants(c in -1e3f64..1e3, len in 1usize..200, w in 0usize..50) {
        let v = vec![c; len];
        for x in moving_average(&v, w) {
            prop_assert!((x - c).abs() <= 1e-12 * (1.0 + c.abs()));
        }
    }

    #[test]
    fn spectrum_satisfies_parseval(values in prop::collection::vec(-10.0f64..10.0, 2..300)) {
        let delays: Vec<f64> = (0..values.len()).map(|i| i as f64 * 0.5).collect();
        let s = spectrum_of(&delays, &values, 0).unwrap();
        let energy: f64 = values.iter().map(|v| v * v).sum();
        prop_assert!((s.parseval_energy() - energy).abs() <= 1e-9 * energy.max(1e-300));
    }

    #[test]
    fn window_is_linear(alpha in 0.0f64..100.0, center in -50.0f64..50.0) {
        let delays = delay_grid(-300.0, 300.0, 1.0).unwrap();
        let mean: Vec<f64> = delays.iter().map(|t| (t * 0.3).sin()).collect();
        let std: Vec<f64> = delays.iter().map(|t| (t * 0.01).cos().abs()).collect();
        let scan = |k: f64| ScanResult {
            delays: delays.clone(),
            mean_signal: mean.iter().map(|v| v * k).collect(),
            std_signal: std.iter().map(|v| v * k).collect(),
            config_digest: String::new(),
        };
        let w = GaborWindow::new("w", center, 40.0);
        let (m1, s1) = windowed_traces(&scan(1.0), &w).unwrap();
        let (ma, sa) = windowed_traces(&scan(alpha), &w).unwrap();
        for (a, b) in m1.iter().zip(&ma).chain(s1.iter().zip(&sa)) {
            prop_assert!((a * alpha - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn coherent_fraction_stays_in_unit_interval(a0 in 0.0f64..=1.0, c in 0.0f64..10.0, i in 0.0f64..=1.0) {
        let a = CoherenceProfile::intensity_linked(a0, c).coherent_fraction(i);
        prop_assert!((0.0..=1.0).contains(&a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ensembles_are_reproducible(seed in any::<u64>(), mean in 0.0f64..5.0) {
        let cfg = McConfig::new(PhotonDistribution::poisson(mean).unwrap(), 5000, seed).unwrap();
        let a = run_ensemble(&cfg).unwrap();
        let b = run_ensemble(&cfg).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a.std_signal >= 0.0);
    }
}
