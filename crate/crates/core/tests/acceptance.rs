//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p qfs-core --test acceptance`.

use std::time::Instant;

use qfs_core::cli::{self, config, Command, Overrides};
use qfs_core::field_model::{
    cep_averaged_trace, delay_grid, fit_power_law, heterodyne_trace, peak_amplitude, DetectionSpec,
    PulseSpec,
};
use qfs_core::gabor_analysis::estimate_mixture_fraction;
use qfs_core::ghost_mc::{scaling_sweep, McConfig, ShotOracle, DEFAULT_SAMPLING_MEAN};
use qfs_core::photon_stats::{
    energy_to_mean_photons, PhotonDistribution, DEFAULT_TAIL_EPSILON, REFERENCE_ENERGIES_ZJ,
    REFERENCE_MEAN_PHOTONS,
};
use qfs_core::rng::{child_stream, Stage};
use qfs_core::trace_sim::{detection_comparison, simulate_scan, spectrum, ScanScenario, TraceKind};
use qfs_core::Result;

const SEED: u64 = 20_240_601;
const SHOTS: u64 = 100_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn sampling() -> PhotonDistribution {
    PhotonDistribution::poisson(DEFAULT_SAMPLING_MEAN).unwrap()
}

fn mc(test: PhotonDistribution, shots: u64) -> McConfig {
    McConfig {
        sampling: sampling(),
        test,
        shots,
        seed: SEED,
    }
}

fn table_round_trip() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for (e, n) in REFERENCE_ENERGIES_ZJ.iter().zip(REFERENCE_MEAN_PHOTONS) {
        let got = energy_to_mean_photons(e * 1e-21, 1030e-9)?;
        worst = worst.max((got / n - 1.0).abs());
    }
    outcome(
        worst <= 5e-3,
        format!("max relative error {worst:.2e} (limit 5e-3)"),
    )
}

fn vacuum_statistics() -> Result<Outcome> {
    let d = PhotonDistribution::poisson(0.0045)?;
    let p0 = d.probability(0);
    let single = d.probability(1) / (1.0 - p0);
    outcome(
        (p0 - 0.99551).abs() <= 1e-4 && (single - 0.9978).abs() <= 1e-3,
        format!("P(0) = {p0:.6}, P(1)/(1-P(0)) = {single:.6}"),
    )
}

fn mc_oracle_equivalence() -> Result<Outcome> {
    let oracle = ShotOracle::new(&sampling(), DEFAULT_TAIL_EPSILON)?;
    let templates = [
        PhotonDistribution::poisson(1.0)?,
        PhotonDistribution::bose_einstein(1.0)?,
        PhotonDistribution::mixture(1.0, 0.5)?,
    ];
    let (mut zm, mut zs): (f64, f64) = (0.0, 0.0);
    for t in templates {
        let curve = scaling_sweep(&mc(t, SHOTS), &REFERENCE_MEAN_PHOTONS)?;
        for p in &curve.points {
            let m = oracle.point(&t.with_mean(p.mean_photons)?)?;
            zm = zm.max((p.raw_mean - m.mean()).abs() / m.mean_standard_error(SHOTS));
            zs = zs.max((p.raw_std - m.std()).abs() / m.std_standard_error(SHOTS));
        }
    }
    outcome(
        zm <= 5.0 && zs <= 5.0,
        format!("33 points at 1e5 shots; max |z| mean {zm:.2}, sigma {zs:.2} (limit 5)"),
    )
}

fn breakdown() -> Result<Outcome> {
    let mut grid = REFERENCE_MEAN_PHOTONS.to_vec();
    grid.extend([1e4, 3e4, 1e5]);
    let curve = scaling_sweep(&mc(PhotonDistribution::poisson(1.0)?, SHOTS), &grid)?;
    let at = |n: f64| {
        curve
            .points
            .iter()
            .find(|p| p.mean_photons == n)
            .unwrap()
            .norm_mean
    };
    let (one, low) = (at(1.1024), at(0.0165));
    let high = curve
        .points
        .iter()
        .filter(|p| p.mean_photons >= 1e4)
        .map(|p| p.norm_mean)
        .fold(f64::INFINITY, f64::min);
    outcome(
        (0.70..=0.85).contains(&one) && (0.10..=0.16).contains(&low) && high >= 0.99,
        format!("norm_mean(1.1024) = {one:.4}, norm_mean(0.0165) = {low:.4}, min over <n> >= 1e4 = {high:.5}"),
    )
}

fn shape_dichotomy() -> Result<Outcome> {
    let p = scaling_sweep(
        &mc(PhotonDistribution::poisson(1.0)?, SHOTS),
        &REFERENCE_MEAN_PHOTONS,
    )?;
    let b = scaling_sweep(
        &mc(PhotonDistribution::bose_einstein(1.0)?, SHOTS),
        &REFERENCE_MEAN_PHOTONS,
    )?;
    let argmax = p.norm_std_argmax();
    let monotone = b.points.windows(2).all(|w| w[0].norm_std < w[1].norm_std);
    outcome(
        (0.8..=2.2).contains(&argmax) && monotone,
        format!("Poisson norm_std argmax at <n> = {argmax}; Bose-Einstein strictly increasing: {monotone}"),
    )
}

fn pulse(field: f64) -> PulseSpec {
    PulseSpec {
        carrier_freq: 0.29,
        fwhm: 30.0,
        field_amplitude: field,
        cep: 0.4,
        cep_stable: false,
    }
}

fn detection(m: u32, n: u32) -> DetectionSpec {
    DetectionSpec {
        lo_order: m,
        mix_order: n,
        detection_freq: 0.29,
        classical_noise: 0.0,
        noise_floor: 0.0,
        shots_per_point: 1,
        seed: SEED,
    }
}

fn cep_balance() -> Result<Outcome> {
    let delays = delay_grid(-100.0, 100.0, 0.25)?;
    let (t, s) = (pulse(1.0), pulse(1.0));
    let balanced = detection(2, 2);
    let locked = heterodyne_trace(&t, &s, &balanced, &delays);
    let mut rng = child_stream(SEED, 0, Stage::CepDraws);
    let avg = cep_averaged_trace(&t, &s, &balanced, &delays, 1000, &mut rng)?;
    let exact = locked == avg;
    let unbalanced = detection(3, 2);
    let locked = heterodyne_trace(&t, &s, &unbalanced, &delays);
    let avg = cep_averaged_trace(&t, &s, &unbalanced, &delays, 10_000, &mut rng)?;
    let ratio = peak_amplitude(&avg) / peak_amplitude(&locked);
    outcome(
        exact && ratio < 0.02,
        format!("m = n = 2 bit-identical: {exact}; m = 3, n = 2 averaged/locked peak = {ratio:.4} (limit 0.02)"),
    )
}

fn power_laws() -> Result<Outcome> {
    let delays = delay_grid(-50.0, 50.0, 0.5)?;
    let det = detection(2, 2);
    let fields: Vec<f64> = (0..=10).map(|k| 10f64.powf(k as f64 / 10.0)).collect();
    let peak_t: Vec<f64> = fields
        .iter()
        .map(|&f| peak_amplitude(&heterodyne_trace(&pulse(f), &pulse(1.0), &det, &delays)))
        .collect();
    let peak_s: Vec<f64> = fields
        .iter()
        .map(|&f| peak_amplitude(&heterodyne_trace(&pulse(1.0), &pulse(f), &det, &delays)))
        .collect();
    let et = fit_power_law(&fields, &peak_t)?;
    let es = fit_power_law(&fields, &peak_s)?;
    outcome(
        (et - 1.0).abs() <= 0.01 && (es - 3.0).abs() <= 0.01,
        format!("test exponent {et:.6}, sampling exponent {es:.6}"),
    )
}

fn yoctojoule_spectra() -> Result<Outcome> {
    let scenario = ScanScenario::oscillator(0.0045, SEED);
    let scan = simulate_scan(&scenario, &delay_grid(-300.0, 300.0, 0.5)?)?;
    let fm = spectrum(&scan, TraceKind::Mean, 0)?.peak_frequency(cli::PEAK_SEARCH_MIN_PHZ);
    let fs = spectrum(&scan, TraceKind::Std, 0)?.peak_frequency(cli::PEAK_SEARCH_MIN_PHZ);
    let (fm, fs) = (fm.unwrap_or(f64::NAN), fs.unwrap_or(f64::NAN));
    outcome(
        (fm - 0.29).abs() <= 0.01 && (fs - 0.58).abs() <= 0.02,
        format!("mean-trace peak {fm:.4} PHz, sigma-trace peak {fs:.4} PHz"),
    )
}

fn detection_dichotomy() -> Result<Outcome> {
    let poisson = PhotonDistribution::poisson(1.0)?;
    let cmp = detection_comparison(&poisson, &sampling(), &REFERENCE_MEAN_PHOTONS, SHOTS, SEED)?;
    let mut worst: f64 = 0.0;
    for p in &cmp.intensity.points {
        let se = 1.0 / (SHOTS as f64 * p.mean_photons).sqrt();
        worst = worst.max((p.norm_mean - 1.0).abs() / se);
    }
    let field_one = cmp.field.nearest(1.0).norm_mean;
    let classical = detection_comparison(&poisson, &sampling(), &[5e3, 1e4], SHOTS, SEED)?;
    let raw = |c: &qfs_core::ghost_mc::ScalingCurve| c.points[1].raw_mean / c.points[0].raw_mean;
    let (fi, ff) = (raw(&classical.intensity), raw(&classical.field));
    let pass = worst <= 3.0
        && field_one < 0.85
        && (fi / 2.0 - 1.0).abs() <= 0.02
        && (ff / 2f64.sqrt() - 1.0).abs() <= 0.02;
    outcome(
        pass,
        format!(
            "intensity max |norm_mean - 1|/SE = {worst:.2}; field norm_mean(1.1024) = {field_one:.4}; halving: intensity x{fi:.4}, field x{ff:.4}"
        ),
    )
}

fn intrapulse_recovery() -> Result<Outcome> {
    let flags = Overrides {
        preset: Some("fig4".into()),
        seed: Some(SEED),
        ..Default::default()
    };
    let cfg = config::resolve(Command::Intrapulse, None, &flags)?;
    let mut scenario = cfg.scenario()?;
    scenario.test_law = qfs_core::trace_sim::TestLaw::Profile(cfg.profile());
    let energies: Vec<f64> = cfg.energies_zj.iter().map(|e| e * 1e-21).collect();
    let windows = qfs_core::gabor_analysis::default_windows(cfg.fwhm_fs);
    let curves =
        qfs_core::gabor_analysis::intrapulse_sweep(&scenario, &energies, &windows, &cfg.delays()?)?;
    let get = |label: &str| curves.iter().find(|c| c.window.label == label).unwrap();
    let (center, tail) = (get("center"), get("tail"));
    let ordered_a = matches!((center.a_hat, tail.a_hat), (Some(c), Some(t)) if c < t);
    let ordered_p = matches!(
        (center.curve.peak_to_anchor(), tail.curve.peak_to_anchor()),
        (Some(c), Some(t)) if c < t
    );
    let mut worst: f64 = 0.0;
    let mut recovered = Vec::new();
    for a in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let curve = scaling_sweep(
            &mc(PhotonDistribution::mixture(1.0, a)?, SHOTS),
            &REFERENCE_MEAN_PHOTONS,
        )?;
        let a_hat = estimate_mixture_fraction(&curve, &sampling())?;
        worst = worst.max((a_hat - a).abs());
        recovered.push(format!("{a_hat:.2}"));
    }
    outcome(
        ordered_a && ordered_p && worst <= 0.05,
        format!(
            "A_hat center {:?} < tail {:?}; peak-to-anchor center {:.4} < tail {:.4}; round trip [{}], max error {worst:.2}",
            center.a_hat,
            tail.a_hat,
            center.curve.peak_to_anchor().unwrap_or(f64::NAN),
            tail.curve.peak_to_anchor().unwrap_or(f64::NAN),
            recovered.join(", ")
        ),
    )
}

fn determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir().map_err(|e| qfs_core::Error::io("tempdir", e))?;
    let presets = [
        (Command::Scaling, "fig3"),
        (Command::Intrapulse, "fig4"),
        (Command::Compare, "figS3"),
        (Command::Trace, "figS4"),
        (Command::CepCheck, "fig1-cep"),
    ];
    let mut differing = Vec::new();
    let mut files = 0;
    for (command, preset) in presets {
        let mut outputs = Vec::new();
        for rerun in 0..2 {
            let out_dir = dir.path().join(format!("{preset}-{rerun}"));
            let flags = Overrides {
                preset: Some(preset.into()),
                output_dir: Some(out_dir.display().to_string()),
                ..Default::default()
            };
            let cfg = config::resolve(command, None, &flags)?;
            cli::run(command, &cfg)?;
            let mut csvs = Vec::new();
            for entry in
                std::fs::read_dir(&out_dir).map_err(|e| qfs_core::Error::io(&out_dir, e))?
            {
                let path = entry.map_err(|e| qfs_core::Error::io(&out_dir, e))?.path();
                if path.extension().is_some_and(|e| e == "csv") {
                    let bytes = std::fs::read(&path).map_err(|e| qfs_core::Error::io(&path, e))?;
                    csvs.push((path.file_name().unwrap().to_owned(), bytes));
                }
            }
            csvs.sort();
            outputs.push(csvs);
        }
        files += outputs[0].len();
        if outputs[0].is_empty() || outputs[0] != outputs[1] {
            differing.push(preset);
        }
    }
    outcome(
        differing.is_empty(),
        format!("{files} CSV files across 5 presets; differing: {differing:?}"),
    )
}

type Check = fn() -> Result<Outcome>;

fn main() {
    let criteria: [(&str, Check); 11] = [
        ("reference table round trip", table_round_trip),
        ("vacuum statistics", vacuum_statistics),
        ("Monte Carlo / oracle equivalence", mc_oracle_equivalence),
        ("classical-to-quantum breakdown of the mean", breakdown),
        (
            "Poisson peak vs Bose-Einstein monotone sigma",
            shape_dichotomy,
        ),
        ("CEP balance", cep_balance),
        ("power-law exponents", power_laws),
        ("yoctojoule spectral signatures", yoctojoule_spectra),
        ("field vs intensity detection", detection_dichotomy),
        ("intrapulse recovery", intrapulse_recovery),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {name}: {detail} [{:.1} s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
