//! Stochastic delay scans: the classical carrier of [`crate::field_model`]
//! with per-shot photon statistics from [`crate::ghost_mc`] and classical
//! noise, plus trace spectra and the field-versus-intensity comparison.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::field_model::{shifted_residual, DetectionSpec, PulseSpec};
use crate::gabor_analysis::CoherenceProfile;
use crate::ghost_mc::{self, McConfig, MeanScaling, ScalingCurve, ShotModel};
use crate::photon_stats::{DistributionKind, PhotonDistribution};
use crate::rng::{child_stream, derive_seed, Stage};
use crate::stats::RunningStats;

/// Photon statistics of the test pulse as a function of delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum TestLaw {
    /// The same law at every delay.
    Fixed {
        kind: DistributionKind,
        coherent_fraction: f64,
    },
    /// Poisson/Bose-Einstein mixture whose coherent fraction follows the pulse.
    Profile(CoherenceProfile),
}

impl TestLaw {
    pub fn poisson() -> Self {
        TestLaw::Fixed {
            kind: DistributionKind::Poisson,
            coherent_fraction: 1.0,
        }
    }

    /// Test-pulse law at a delay with normalized intensity `intensity` and
    /// local mean photon number `mean`.
    pub fn at(&self, intensity: f64, mean: f64) -> Result<PhotonDistribution> {
        match *self {
            TestLaw::Fixed {
                kind,
                coherent_fraction,
            } => PhotonDistribution::new(kind, mean, coherent_fraction),
            TestLaw::Profile(profile) => {
                PhotonDistribution::mixture(mean, profile.coherent_fraction(intensity))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            TestLaw::Fixed { .. } => self.at(1.0, 0.0).map(|_| ()),
            TestLaw::Profile(p) => p.validate(),
        }
    }
}

/// Everything that determines a delay scan except the delay grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanScenario {
    pub test_pulse: PulseSpec,
    pub test_law: TestLaw,
    /// Mean photon number at the intensity peak of the test pulse.
    pub peak_mean_photons: f64,
    pub sampling_pulse: PulseSpec,
    pub sampling: PhotonDistribution,
    pub detection: DetectionSpec,
}

/// Carrier frequency (PHz) of a 1030 nm pulse.
pub const OSCILLATOR_CARRIER_PHZ: f64 = crate::photon_stats::SPEED_OF_LIGHT / 1030e-9 / 1e15;
pub const OSCILLATOR_FWHM_FS: f64 = 150.0;
pub const DEFAULT_CLASSICAL_NOISE: f64 = 0.05;

impl ScanScenario {
    /// 150 fs, 1030 nm, CEP-unstable oscillator pulses detected in the
    /// balanced m = n = 2 channel at the test carrier.
    pub fn oscillator(peak_mean_photons: f64, seed: u64) -> Self {
        let pulse = PulseSpec {
            carrier_freq: OSCILLATOR_CARRIER_PHZ,
            fwhm: OSCILLATOR_FWHM_FS,
            field_amplitude: 1.0,
            cep: 0.0,
            cep_stable: false,
        };
        ScanScenario {
            test_pulse: pulse,
            test_law: TestLaw::poisson(),
            peak_mean_photons,
            sampling_pulse: pulse,
            sampling: PhotonDistribution {
                kind: DistributionKind::Poisson,
                mean: ghost_mc::DEFAULT_SAMPLING_MEAN,
                coherent_fraction: 1.0,
            },
            detection: DetectionSpec {
                lo_order: 2,
                mix_order: 2,
                detection_freq: OSCILLATOR_CARRIER_PHZ,
                classical_noise: DEFAULT_CLASSICAL_NOISE,
                noise_floor: 0.0,
                shots_per_point: ghost_mc::DEFAULT_SHOTS,
                seed,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.test_pulse.validate("test")?;
        self.sampling_pulse.validate("sampling")?;
        self.sampling.validate()?;
        if self.sampling.mean <= 0.0 {
            return Err(Error::config("sampling_mean", "must be > 0"));
        }
        self.detection.validate()?;
        self.test_law.validate()?;
        if !(self.peak_mean_photons.is_finite() && self.peak_mean_photons >= 0.0) {
            return Err(Error::config(
                "peak_mean_photons",
                format!("must be finite and >= 0, got {}", self.peak_mean_photons),
            ));
        }
        Ok(())
    }

    /// Local test-pulse mean photon number, proportional to the intensity envelope.
    pub fn mean_photons_at(&self, delay: f64) -> f64 {
        self.peak_mean_photons * self.test_pulse.intensity_envelope(delay)
    }

    fn cep_locked(&self) -> bool {
        self.test_pulse.cep_stable && self.sampling_pulse.cep_stable
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub delays: Vec<f64>,
    pub mean_signal: Vec<f64>,
    pub std_signal: Vec<f64>,
    /// SHA-256 over the scenario and delay grid.
    pub config_digest: String,
}

fn digest(scenario: &ScanScenario, delays: &[f64]) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(scenario).expect("scenario serializes"));
    for d in delays {
        h.update(d.to_bits().to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn check_sorted(delays: &[f64]) -> Result<()> {
    if delays.is_empty() {
        return Err(Error::config("delays", "delay grid is empty"));
    }
    if delays.iter().any(|d| !d.is_finite()) || delays.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::config(
            "delays",
            "delays must be finite and sorted ascending",
        ));
    }
    Ok(())
}

/// Per-delay mean and standard deviation of the detected signal.
///
/// Each shot draws the amplitude `2·√n_SHG·√n_SFG` with the test law at the
/// local mean photon number, multiplies by the carrier
/// `cos(ω_d·τ + residual)` (with a fresh common CEP offset per shot unless
/// both pulses are CEP-stable), then applies multiplicative noise
/// `(1 + κ·g)` and an additive floor.
pub fn simulate_scan(scenario: &ScanScenario, delays: &[f64]) -> Result<ScanResult> {
    scenario.validate()?;
    check_sorted(delays)?;
    let det = &scenario.detection;
    if det.shots_per_point < 2 {
        return Err(Error::config(
            "shots_per_point",
            "at least 2 shots per delay are needed for a standard deviation",
        ));
    }
    let model = ShotModel::new(&scenario.sampling, &scenario.sampling)?;
    let locked = scenario.cep_locked();
    let kappa = det.classical_noise;
    let floor = det.noise_floor;
    let phi_s = scenario.sampling_pulse.cep;
    let phi_t = scenario.test_pulse.cep;
    let base_residual = shifted_residual(det, phi_s, phi_t, 0.0);

    let per_delay = delays
        .par_iter()
        .enumerate()
        .map(|(i, &tau)| {
            let intensity = scenario.test_pulse.intensity_envelope(tau);
            let test = scenario
                .test_law
                .at(intensity, scenario.peak_mean_photons * intensity)?
                .sampler()?;
            let mut rng = child_stream(det.seed, i as u64, Stage::ScanDelay);
            let carrier = TAU * det.detection_freq * tau;
            let mut stats = RunningStats::new();
            for _ in 0..det.shots_per_point {
                let amplitude = model.shot_with_test(&test, &mut rng);
                let residual = if locked {
                    base_residual
                } else {
                    let delta = PI - TAU * rng.random::<f64>();
                    shifted_residual(det, phi_s, phi_t, delta)
                };
                let mut s = amplitude * (carrier + residual).cos();
                if kappa > 0.0 {
                    let g: f64 = rng.sample(StandardNormal);
                    s *= 1.0 + kappa * g;
                }
                if floor > 0.0 {
                    let g: f64 = rng.sample(StandardNormal);
                    s += floor * g;
                }
                // normalize −0.0 so outputs print identically
                stats.push(s + 0.0);
            }
            Ok((stats.mean(), stats.std_dev()))
        })
        .collect::<Result<Vec<_>>>()?;

    let (mean_signal, std_signal) = per_delay.into_iter().unzip();
    Ok(ScanResult {
        delays: delays.to_vec(),
        mean_signal,
        std_signal,
        config_digest: digest(scenario, delays),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceKind {
    Mean,
    Std,
}

impl std::str::FromStr for TraceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "mean" => Ok(TraceKind::Mean),
            "std" => Ok(TraceKind::Std),
            other => Err(format!("unknown trace `{other}` (expected mean or std)")),
        }
    }
}

/// One-sided magnitude spectrum, |X_k|/N for k = 0..=N/2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Frequency axis in PHz, 0 to Nyquist.
    pub freqs: Vec<f64>,
    pub magnitude: Vec<f64>,
    /// Number of time samples transformed.
    pub samples: usize,
}

impl Spectrum {
    /// Frequency of the largest magnitude at or above `min_freq`.
    pub fn peak_frequency(&self, min_freq: f64) -> Option<f64> {
        self.freqs
            .iter()
            .zip(&self.magnitude)
            .filter(|(f, _)| **f >= min_freq)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(f, _)| *f)
    }

    /// Σ|x|² reconstructed from the one-sided magnitudes (unsmoothed spectra only).
    pub fn parseval_energy(&self) -> f64 {
        let n = self.samples;
        let mut e = 0.0;
        for (k, m) in self.magnitude.iter().enumerate() {
            let weight = if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
                1.0
            } else {
                2.0
            };
            e += weight * m * m;
        }
        e * n as f64
    }
}

/// Centered moving average; windows are truncated at the edges.
pub fn moving_average(values: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 || values.is_empty() {
        return values.to_vec();
    }
    let half_lo = (width - 1) / 2;
    let half_hi = width / 2;
    let mut prefix = vec![0.0; values.len() + 1];
    for (i, v) in values.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(half_lo);
            let hi = (i + half_hi).min(values.len() - 1);
            (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64
        })
        .collect()
}

/// Magnitude spectrum of a uniformly sampled trace (delays in fs).
pub fn spectrum_of(delays: &[f64], values: &[f64], smoothing: usize) -> Result<Spectrum> {
    if delays.len() != values.len() {
        return Err(Error::config(
            "trace",
            "delay and value columns differ in length",
        ));
    }
    if delays.len() < 2 {
        return Err(Error::config(
            "delays",
            "a spectrum needs at least 2 samples",
        ));
    }
    let n = delays.len();
    let step = (delays[n - 1] - delays[0]) / (n - 1) as f64;
    if !(step > 0.0) {
        return Err(Error::config("delays", "delay grid must be increasing"));
    }
    let tol = 1e-6 * step;
    if delays
        .iter()
        .enumerate()
        .any(|(i, d)| (d - (delays[0] + i as f64 * step)).abs() > tol)
    {
        return Err(Error::config(
            "delays",
            "spectrum needs a uniform delay grid",
        ));
    }
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let bins = n / 2 + 1;
    // 1/fs = 1 PHz
    let df = 1.0 / (n as f64 * step);
    let freqs = (0..bins).map(|k| k as f64 * df).collect();
    let magnitude: Vec<f64> = buf[..bins].iter().map(|c| c.norm() / n as f64).collect();
    Ok(Spectrum {
        freqs,
        magnitude: moving_average(&magnitude, smoothing),
        samples: n,
    })
}

pub fn spectrum(scan: &ScanResult, which: TraceKind, smoothing: usize) -> Result<Spectrum> {
    let values = match which {
        TraceKind::Mean => &scan.mean_signal,
        TraceKind::Std => &scan.std_signal,
    };
    spectrum_of(&scan.delays, values, smoothing)
}

/// Field-detection and intensity-detection scaling curves for one test law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionComparison {
    pub field: ScalingCurve,
    pub intensity: ScalingCurve,
}

/// Field curve = [`ghost_mc::scaling_sweep`]; intensity curve = statistics of
/// directly counted test photons, with mean normalized as S̄/⟨n⟩.
pub fn detection_comparison(
    template: &PhotonDistribution,
    sampling: &PhotonDistribution,
    mean_grid: &[f64],
    shots: u64,
    seed: u64,
) -> Result<DetectionComparison> {
    let base = McConfig {
        sampling: *sampling,
        test: *template,
        shots,
        seed,
    };
    let field = ghost_mc::scaling_sweep(&base, mean_grid)?;
    let mut grid = mean_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let raw = grid
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let sampler = template.with_mean(n)?.sampler()?;
            let mut rng = child_stream(seed, i as u64, Stage::Intensity);
            let stats: RunningStats = (0..shots)
                .map(|_| sampler.sample(&mut rng) as f64)
                .collect();
            Ok((n, stats.mean(), stats.std_dev()))
        })
        .collect::<Result<Vec<_>>>()?;
    let intensity = ScalingCurve::from_raw(raw, MeanScaling::Intensity)?;
    Ok(DetectionComparison { field, intensity })
}

/// Seed of the scan run for energy point `index` of a sweep.
pub(crate) fn energy_point_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed, index as u64, Stage::EnergyPoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_model::delay_grid;
    use crate::stats::pearson;

    fn short_grid() -> Vec<f64> {
        delay_grid(-300.0, 300.0, 1.0).unwrap()
    }

    #[test]
    fn zero_photon_scan_is_identically_zero() {
        let mut sc = ScanScenario::oscillator(0.0, 4);
        sc.detection.shots_per_point = 50;
        let scan = simulate_scan(&sc, &short_grid()).unwrap();
        assert!(scan
            .mean_signal
            .iter()
            .all(|&v| v == 0.0 && v.is_sign_positive()));
        assert!(scan.std_signal.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scans_are_deterministic_and_digest_tracks_config() {
        let mut sc = ScanScenario::oscillator(2.0, 8);
        sc.detection.shots_per_point = 20;
        let a = simulate_scan(&sc, &short_grid()).unwrap();
        let b = simulate_scan(&sc, &short_grid()).unwrap();
        assert_eq!(a, b);
        let mut other = sc;
        other.detection.classical_noise = 0.06;
        let c = simulate_scan(&other, &short_grid()).unwrap();
        assert_ne!(a.config_digest, c.config_digest);
        let mut reseeded = sc;
        reseeded.detection.seed = 9;
        assert_ne!(
            a.config_digest,
            simulate_scan(&reseeded, &short_grid())
                .unwrap()
                .config_digest
        );
    }

    #[test]
    fn one_shot_per_delay_is_rejected() {
        let mut sc = ScanScenario::oscillator(1.0, 1);
        sc.detection.shots_per_point = 1;
        assert!(matches!(
            simulate_scan(&sc, &short_grid()),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn unsorted_delays_are_rejected() {
        let sc = ScanScenario::oscillator(1.0, 1);
        assert!(simulate_scan(&sc, &[0.0, -1.0]).is_err());
    }

    #[test]
    fn classical_regime_noise_ratio_and_envelope_correlation() {
        let mut sc = ScanScenario::oscillator(6.42e6, 12);
        sc.detection.shots_per_point = 4000;
        let scan = simulate_scan(&sc, &delay_grid(-300.0, 300.0, 2.0).unwrap()).unwrap();
        let max_std = scan.std_signal.iter().cloned().fold(0.0, f64::max);
        let max_mean = scan.mean_signal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ratio = max_std / max_mean;
        assert!((ratio - 0.05).abs() < 0.005, "ratio {ratio}");
        let abs_mean: Vec<f64> = scan.mean_signal.iter().map(|v| v.abs()).collect();
        assert!(pearson(&scan.std_signal, &abs_mean).unwrap() > 0.95);
    }

    #[test]
    fn constant_trace_spectrum_is_dc_only() {
        let delays = delay_grid(0.0, 99.0, 1.0).unwrap();
        let s = spectrum_of(&delays, &vec![2.5; 100], 0).unwrap();
        assert!((s.magnitude[0] - 2.5).abs() < 1e-12);
        assert!(s.magnitude[1..].iter().all(|m| m.abs() < 1e-12));
    }

    #[test]
    fn spectrum_rejects_nonuniform_grid() {
        assert!(spectrum_of(&[0.0, 1.0, 3.0], &[1.0, 2.0, 3.0], 0).is_err());
    }

    #[test]
    fn parseval_holds() {
        for n in [128usize, 129] {
            let delays = delay_grid(0.0, (n - 1) as f64 * 0.5, 0.5).unwrap();
            let x: Vec<f64> = (0..n)
                .map(|i| ((i * i) as f64 * 0.37).sin() + 0.2)
                .collect();
            let s = spectrum_of(&delays, &x, 0).unwrap();
            let energy: f64 = x.iter().map(|v| v * v).sum();
            assert!((s.parseval_energy() - energy).abs() / energy < 1e-9);
        }
    }

    #[test]
    fn moving_average_basics() {
        assert_eq!(moving_average(&[1.0, 2.0, 3.0], 1), vec![1.0, 2.0, 3.0]);
        assert_eq!(moving_average(&[1.0, 2.0, 3.0], 3), vec![1.5, 2.0, 2.5]);
    }

    #[test]
    fn intensity_detection_mean_tracks_photon_number() {
        let cmp = detection_comparison(
            &PhotonDistribution::poisson(1.0).unwrap(),
            &PhotonDistribution::poisson(1e6).unwrap(),
            &[0.1, 1.0, 10.0],
            50_000,
            3,
        )
        .unwrap();
        for p in &cmp.intensity.points {
            let se = p.raw_std / (50_000f64.sqrt() * p.mean_photons);
            assert!((p.norm_mean - 1.0).abs() < 4.0 * se, "{p:?}");
        }
        assert!(cmp.field.nearest(1.0).norm_mean < 0.85);
    }
}
