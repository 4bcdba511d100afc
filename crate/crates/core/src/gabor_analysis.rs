//! Intrapulse-coherence analysis.
//!
//! Delay scans are multiplied by Gaussian windows placed on the front,
//! center and tail of the pulse; each window yields its own scaling curve
//! across a pulse-energy sweep. The test pulse is modelled as a
//! Poisson/Bose-Einstein mixture whose coherent fraction may depend on the
//! local intensity, and the fraction seen by each window is recovered by
//! fitting the normalized σ curve against the series oracle.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ghost_mc::{model_curve_with, MeanScaling, ScalingCurve, ShotOracle};
use crate::photon_stats::{energy_to_mean_photons, PhotonDistribution, DEFAULT_TAIL_EPSILON};
use crate::trace_sim::{energy_point_seed, simulate_scan, ScanResult, ScanScenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileMode {
    Constant,
    IntensityLinked,
}

impl std::str::FromStr for ProfileMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.replace('_', "-").as_str() {
            "constant" => Ok(ProfileMode::Constant),
            "intensity-linked" => Ok(ProfileMode::IntensityLinked),
            other => Err(format!(
                "unknown profile mode `{other}` (expected constant or intensity-linked)"
            )),
        }
    }
}

/// Coherent fraction A across the pulse.
///
/// `IntensityLinked`: A(τ) = clamp(a0 − c·I(τ), 0, 1) with I the intensity
/// envelope normalized to 1 at the peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceProfile {
    pub mode: ProfileMode,
    pub a0: f64,
    pub c: f64,
}

impl CoherenceProfile {
    pub fn constant(a0: f64) -> Self {
        CoherenceProfile {
            mode: ProfileMode::Constant,
            a0,
            c: 0.0,
        }
    }

    pub fn intensity_linked(a0: f64, c: f64) -> Self {
        CoherenceProfile {
            mode: ProfileMode::IntensityLinked,
            a0,
            c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.a0) {
            return Err(Error::config(
                "profile_a0",
                format!("must lie in [0, 1], got {}", self.a0),
            ));
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::config(
                "profile_c",
                format!("must be >= 0, got {}", self.c),
            ));
        }
        Ok(())
    }

    pub fn coherent_fraction(&self, intensity: f64) -> f64 {
        match self.mode {
            ProfileMode::Constant => self.a0,
            ProfileMode::IntensityLinked => (self.a0 - self.c * intensity).clamp(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaborWindow {
    pub center: f64,
    pub fwhm: f64,
    pub label: String,
}

impl GaborWindow {
    pub fn new(label: impl Into<String>, center: f64, fwhm: f64) -> Self {
        GaborWindow {
            center,
            fwhm,
            label: label.into(),
        }
    }

    /// Gaussian weight with peak 1 at the center.
    pub fn weight(&self, delay: f64) -> f64 {
        (-4.0 * LN_2 * ((delay - self.center) / self.fwhm).powi(2)).exp()
    }

    /// Fraction of the window's area that lies inside `[lo, hi]`.
    pub fn mass_inside(&self, lo: f64, hi: f64) -> f64 {
        let sigma = self.fwhm / (8.0 * LN_2).sqrt();
        let z = |x: f64| (x - self.center) / (sigma * std::f64::consts::SQRT_2);
        0.5 * (libm::erf(z(hi)) - libm::erf(z(lo)))
    }

    fn validate(&self, delays: &[f64]) -> Result<()> {
        if !(self.fwhm.is_finite() && self.fwhm > 0.0 && self.center.is_finite()) {
            return Err(Error::config(
                "window",
                format!("window `{}` needs a finite center and fwhm > 0", self.label),
            ));
        }
        let (lo, hi) = match (delays.first(), delays.last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Err(Error::config("delays", "scan has no delays")),
        };
        let inside = self.center >= lo && self.center <= hi;
        // Windows wider than the scan act as near-flat weights and are
        // accepted when centered inside it.
        let wide = self.fwhm > hi - lo;
        if !(inside && (wide || self.mass_inside(lo, hi) >= 0.99)) {
            return Err(Error::config(
                "window",
                format!(
                    "window `{}` (center {} fs, fwhm {} fs) does not overlap the scan range {lo}..{hi} fs",
                    self.label, self.center, self.fwhm
                ),
            ));
        }
        Ok(())
    }
}

/// Front/center/tail windows at {−FWHM, 0, +FWHM}, each half the pulse FWHM wide.
pub fn default_windows(pulse_fwhm: f64) -> Vec<GaborWindow> {
    vec![
        GaborWindow::new("front", -pulse_fwhm, pulse_fwhm / 2.0),
        GaborWindow::new("center", 0.0, pulse_fwhm / 2.0),
        GaborWindow::new("tail", pulse_fwhm, pulse_fwhm / 2.0),
    ]
}

/// Both traces of a scan multiplied by the window.
pub fn windowed_traces(scan: &ScanResult, window: &GaborWindow) -> Result<(Vec<f64>, Vec<f64>)> {
    window.validate(&scan.delays)?;
    let w: Vec<f64> = scan.delays.iter().map(|&t| window.weight(t)).collect();
    let mean = scan
        .mean_signal
        .iter()
        .zip(&w)
        .map(|(v, w)| v * w)
        .collect();
    let std = scan.std_signal.iter().zip(&w).map(|(v, w)| v * w).collect();
    Ok((mean, std))
}

/// Scalar metrics of one window on one scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowMetrics {
    /// w-weighted average of the local mean photon number.
    pub mean_photons: f64,
    /// RMS of the windowed mean trace.
    pub signal_rms: f64,
    /// w-weighted average of the σ trace.
    pub weighted_std: f64,
}

pub fn window_metrics(
    scan: &ScanResult,
    scenario: &ScanScenario,
    window: &GaborWindow,
) -> Result<WindowMetrics> {
    let (mean, _) = windowed_traces(scan, window)?;
    let w: Vec<f64> = scan.delays.iter().map(|&t| window.weight(t)).collect();
    let total: f64 = w.iter().sum();
    let mean_photons = scan
        .delays
        .iter()
        .zip(&w)
        .map(|(&t, w)| w * scenario.mean_photons_at(t))
        .sum::<f64>()
        / total;
    let signal_rms = (mean.iter().map(|v| v * v).sum::<f64>() / mean.len() as f64).sqrt();
    let weighted_std = scan
        .std_signal
        .iter()
        .zip(&w)
        .map(|(s, w)| s * w)
        .sum::<f64>()
        / total;
    Ok(WindowMetrics {
        mean_photons,
        signal_rms,
        weighted_std,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowCurve {
    pub window: GaborWindow,
    pub curve: ScalingCurve,
    /// Recovered coherent fraction, when the curve supports an estimate.
    pub a_hat: Option<f64>,
}

/// Simulates a scan at every pulse energy (J) and assembles one scaling
/// curve per window against the window-averaged ⟨n⟩.
///
/// The scenario's `peak_mean_photons` is replaced by the photon number of
/// each energy; energy point `i` (ascending) scans with a seed derived from
/// the scenario seed and `i`.
pub fn intrapulse_sweep(
    scenario: &ScanScenario,
    energy_grid: &[f64],
    windows: &[GaborWindow],
    delays: &[f64],
) -> Result<Vec<WindowCurve>> {
    if energy_grid.is_empty() {
        return Err(Error::config("energies_zj", "energy grid is empty"));
    }
    if windows.is_empty() {
        return Err(Error::config("window", "no analysis windows given"));
    }
    if energy_grid.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::config("energies_zj", "pulse energies must be > 0"));
    }
    for w in windows {
        w.validate(delays)?;
    }
    let mut energies = energy_grid.to_vec();
    energies.sort_by(f64::total_cmp);
    let wavelength = scenario.test_pulse.wavelength();

    let mut per_window: Vec<Vec<(f64, f64, f64)>> = vec![Vec::new(); windows.len()];
    for (i, &energy) in energies.iter().enumerate() {
        let mut sc = *scenario;
        sc.peak_mean_photons = energy_to_mean_photons(energy, wavelength)?;
        sc.detection.seed = energy_point_seed(scenario.detection.seed, i);
        let scan = simulate_scan(&sc, delays)?;
        for (slot, window) in per_window.iter_mut().zip(windows) {
            let m = window_metrics(&scan, &sc, window)?;
            slot.push((m.mean_photons, m.signal_rms, m.weighted_std));
        }
    }

    let oracle = ShotOracle::new(&scenario.sampling, DEFAULT_TAIL_EPSILON)?;
    windows
        .iter()
        .zip(per_window)
        .map(|(window, raw)| {
            let curve = ScalingCurve::from_raw(raw, MeanScaling::Field)?;
            let a_hat = match estimate_with(&oracle, &curve) {
                Ok(a) => Some(a),
                Err(Error::Estimation(_)) => None,
                Err(e) => return Err(e),
            };
            Ok(WindowCurve {
                window: window.clone(),
                curve,
                a_hat,
            })
        })
        .collect()
}

/// Coherent fractions tried by the estimator: 0, 0.01, …, 1.
const FRACTION_STEPS: u32 = 100;

/// Grid search for the coherent fraction A whose oracle curve best matches
/// the observed normalized σ (least squares); ties go to the larger A.
pub fn estimate_mixture_fraction(
    observed: &ScalingCurve,
    sampling: &PhotonDistribution,
) -> Result<f64> {
    let oracle = ShotOracle::new(sampling, DEFAULT_TAIL_EPSILON)?;
    estimate_with(&oracle, observed)
}

fn estimate_with(oracle: &ShotOracle, observed: &ScalingCurve) -> Result<f64> {
    let grid = observed.mean_photons();
    if grid.len() < 5 {
        return Err(Error::Estimation(format!(
            "need at least 5 curve points, got {}",
            grid.len()
        )));
    }
    let lo = grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(lo < 1.0 && hi > 1.0) {
        return Err(Error::Estimation(format!(
            "curve must span <n> = 1, covers {lo}..{hi}"
        )));
    }
    if observed.points.iter().all(|p| p.raw_std == 0.0) {
        return Err(Error::Estimation(
            "observed standard deviations are all zero".into(),
        ));
    }
    let target = observed.norm_std();
    let mut best = (f64::INFINITY, 0.0);
    for step in 0..=FRACTION_STEPS {
        let a = step as f64 / FRACTION_STEPS as f64;
        let template = PhotonDistribution::mixture(1.0, a)?;
        let model = model_curve_with(oracle, &template, &grid)?;
        let sse: f64 = model
            .points
            .iter()
            .zip(&target)
            .map(|(p, t)| (p.norm_std - t).powi(2))
            .sum();
        if sse <= best.0 {
            best = (sse, a);
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_model::delay_grid;
    use crate::ghost_mc::model_curve_oracle;
    use crate::photon_stats::REFERENCE_MEAN_PHOTONS;

    fn scan(values: f64) -> ScanResult {
        let delays = delay_grid(-300.0, 300.0, 1.0).unwrap();
        let mean = delays.iter().map(|t| values * (0.1 * t).cos()).collect();
        let std = delays
            .iter()
            .map(|t| values * (0.05 * t).sin().abs())
            .collect();
        ScanResult {
            delays,
            mean_signal: mean,
            std_signal: std,
            config_digest: String::new(),
        }
    }

    #[test]
    fn very_wide_window_leaves_traces_unchanged() {
        let s = scan(3.0);
        let (m, sd) = windowed_traces(&s, &GaborWindow::new("all", 0.0, 1e6)).unwrap();
        for (a, b) in m
            .iter()
            .zip(&s.mean_signal)
            .chain(sd.iter().zip(&s.std_signal))
        {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn zero_scan_stays_zero() {
        let s = scan(0.0);
        let (m, sd) = windowed_traces(&s, &GaborWindow::new("c", 0.0, 75.0)).unwrap();
        assert!(m.iter().chain(&sd).all(|&v| v == 0.0));
    }

    #[test]
    fn window_outside_scan_is_rejected() {
        let s = scan(1.0);
        assert!(windowed_traces(&s, &GaborWindow::new("off", 1000.0, 75.0)).is_err());
        assert!(windowed_traces(&s, &GaborWindow::new("edge", 290.0, 75.0)).is_err());
        assert!(windowed_traces(&s, &GaborWindow::new("bad", 0.0, 0.0)).is_err());
    }

    #[test]
    fn profile_fractions() {
        let p = CoherenceProfile::intensity_linked(1.0, 0.5);
        assert_eq!(p.coherent_fraction(0.0), 1.0);
        assert_eq!(p.coherent_fraction(1.0), 0.5);
        assert_eq!(
            CoherenceProfile::intensity_linked(0.2, 3.0).coherent_fraction(1.0),
            0.0
        );
        assert_eq!(CoherenceProfile::constant(0.3).coherent_fraction(0.9), 0.3);
        assert!(CoherenceProfile::constant(1.5).validate().is_err());
        assert!(CoherenceProfile::intensity_linked(0.5, -1.0)
            .validate()
            .is_err());
    }

    #[test]
    fn estimator_recovers_oracle_endpoints() {
        let sampling = PhotonDistribution::poisson(1e6).unwrap();
        for (template, expected) in [
            (PhotonDistribution::poisson(1.0).unwrap(), 1.0),
            (PhotonDistribution::bose_einstein(1.0).unwrap(), 0.0),
        ] {
            let curve = model_curve_oracle(&template, &sampling, &REFERENCE_MEAN_PHOTONS).unwrap();
            assert_eq!(
                estimate_mixture_fraction(&curve, &sampling).unwrap(),
                expected
            );
        }
    }

    #[test]
    fn degenerate_curve_is_an_estimation_error() {
        let raw = REFERENCE_MEAN_PHOTONS
            .iter()
            .map(|&n| (n, n, 0.0))
            .collect();
        let curve = ScalingCurve::from_raw(raw, MeanScaling::Field).unwrap();
        let sampling = PhotonDistribution::poisson(1e6).unwrap();
        assert!(matches!(
            estimate_mixture_fraction(&curve, &sampling),
            Err(Error::Estimation(_))
        ));
        let short =
            ScalingCurve::from_raw(vec![(0.5, 1.0, 1.0), (2.0, 2.0, 1.0)], MeanScaling::Field)
                .unwrap();
        assert!(matches!(
            estimate_mixture_fraction(&short, &sampling),
            Err(Error::Estimation(_))
        ));
    }

    #[test]
    fn default_window_layout() {
        let w = default_windows(150.0);
        assert_eq!(w.len(), 3);
        assert_eq!(
            (w[0].center, w[1].center, w[2].center),
            (-150.0, 0.0, 150.0)
        );
        assert!(w.iter().all(|w| w.fwhm == 75.0));
    }
}
