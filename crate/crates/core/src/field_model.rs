//! Classical heterodyne field model.
//!
//! The detected interference of a local oscillator of order m with a mixing
//! product of order n is
//!
//! ```text
//! I(τ) = Ē_S^(m+n−1) · Ē_T · env(τ) · cos(ω_d·τ + φ_T − (m−n+1)·φ_S)
//! ```
//!
//! so for balanced detection (m = n) common carrier-envelope phase offsets of
//! the two pulses cancel. Units: delays in fs, frequencies in PHz, so
//! `ω_d·τ = 2π·f_d·τ` without further scale factors.

use std::f64::consts::{LN_2, PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::RunningStats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// Carrier frequency ω/2π in PHz.
    pub carrier_freq: f64,
    /// Intensity-envelope FWHM in fs.
    pub fwhm: f64,
    /// Field strength Ē in arbitrary units.
    pub field_amplitude: f64,
    /// Carrier-envelope phase in radians.
    pub cep: f64,
    pub cep_stable: bool,
}

impl PulseSpec {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        if !(self.carrier_freq.is_finite() && self.carrier_freq > 0.0) {
            return Err(Error::config(
                format!("{prefix}_carrier_freq"),
                format!("must be > 0, got {}", self.carrier_freq),
            ));
        }
        if !(self.fwhm.is_finite() && self.fwhm > 0.0) {
            return Err(Error::config(
                format!("{prefix}_fwhm_fs"),
                format!("must be > 0, got {}", self.fwhm),
            ));
        }
        if !(self.field_amplitude.is_finite() && self.field_amplitude >= 0.0) {
            return Err(Error::config(
                format!("{prefix}_field"),
                format!("must be >= 0, got {}", self.field_amplitude),
            ));
        }
        if !self.cep.is_finite() {
            return Err(Error::config(format!("{prefix}_cep"), "must be finite"));
        }
        Ok(())
    }

    /// Carrier wavelength in metres.
    pub fn wavelength(&self) -> f64 {
        crate::photon_stats::SPEED_OF_LIGHT / (self.carrier_freq * 1e15)
    }

    /// Gaussian field envelope (peak 1); its FWHM is √2 times the intensity FWHM.
    pub fn field_envelope(&self, delay: f64) -> f64 {
        (-2.0 * LN_2 * (delay / self.fwhm).powi(2)).exp()
    }

    /// Normalized intensity envelope, the square of [`Self::field_envelope`].
    pub fn intensity_envelope(&self, delay: f64) -> f64 {
        (-4.0 * LN_2 * (delay / self.fwhm).powi(2)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionSpec {
    /// Local-oscillator order m.
    pub lo_order: u32,
    /// Nonlinear mixing order n.
    pub mix_order: u32,
    /// Detection frequency ω_d/2π in PHz.
    pub detection_freq: f64,
    /// Relative multiplicative classical noise κ.
    pub classical_noise: f64,
    /// Additive noise floor (standard deviation, signal units).
    pub noise_floor: f64,
    pub shots_per_point: u64,
    pub seed: u64,
}

impl DetectionSpec {
    pub fn validate(&self) -> Result<()> {
        if self.lo_order == 0 {
            return Err(Error::config("lo_order", "must be >= 1"));
        }
        if self.mix_order == 0 {
            return Err(Error::config("mix_order", "must be >= 1"));
        }
        if !(self.detection_freq.is_finite() && self.detection_freq > 0.0) {
            return Err(Error::config(
                "detection_freq_phz",
                format!("must be > 0, got {}", self.detection_freq),
            ));
        }
        if !(self.classical_noise.is_finite() && self.classical_noise >= 0.0) {
            return Err(Error::config("classical_noise", "must be >= 0"));
        }
        if !(self.noise_floor.is_finite() && self.noise_floor >= 0.0) {
            return Err(Error::config("noise_floor", "must be >= 0"));
        }
        if self.shots_per_point == 0 {
            return Err(Error::config("shots_per_point", "must be >= 1"));
        }
        Ok(())
    }

    /// m − n + 1, the multiplier of the sampling-pulse phase in the residual.
    pub fn sampling_phase_order(&self) -> i64 {
        self.lo_order as i64 - self.mix_order as i64 + 1
    }
}

/// Reduce an angle to (−π, π].
pub fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TAU) - PI;
    if y <= -PI {
        y + TAU
    } else {
        y
    }
}

/// φ_T − (m−n+1)·φ_S reduced to (−π, π].
pub fn cep_phase_residual(m: u32, n: u32, phi_s: f64, phi_t: f64) -> f64 {
    let k = m as i64 - n as i64 + 1;
    wrap_phase(phi_t - k as f64 * phi_s)
}

/// Residual phase after a common CEP offset δ on both pulses.
///
/// Written as `base + (1−k)·δ` so the balanced case (k = 1) is unaffected by δ
/// bit for bit.
pub(crate) fn shifted_residual(det: &DetectionSpec, phi_s: f64, phi_t: f64, delta: f64) -> f64 {
    let k = det.sampling_phase_order();
    wrap_phase((phi_t - k as f64 * phi_s) + (1 - k) as f64 * delta)
}

/// Detector prefactor Ē_S^(m+n−1)·Ē_T.
pub fn trace_prefactor(test: &PulseSpec, sampling: &PulseSpec, det: &DetectionSpec) -> f64 {
    let order = (det.lo_order + det.mix_order - 1) as i32;
    sampling.field_amplitude.powi(order) * test.field_amplitude
}

fn trace_with_residual(
    test: &PulseSpec,
    sampling: &PulseSpec,
    det: &DetectionSpec,
    delays: &[f64],
    residual: f64,
) -> Vec<f64> {
    let pre = trace_prefactor(test, sampling, det);
    delays
        .iter()
        .map(|&tau| {
            pre * test.field_envelope(tau) * (TAU * det.detection_freq * tau + residual).cos()
        })
        .collect()
}

/// Noiseless heterodyne signal I(τ) at each delay.
pub fn heterodyne_trace(
    test: &PulseSpec,
    sampling: &PulseSpec,
    det: &DetectionSpec,
    delays: &[f64],
) -> Vec<f64> {
    debug_assert!(
        delays.windows(2).all(|w| w[0] <= w[1]),
        "delays must be sorted"
    );
    let residual = cep_phase_residual(det.lo_order, det.mix_order, sampling.cep, test.cep);
    trace_with_residual(test, sampling, det, delays, residual)
}

/// Trace averaged over `cep_draws` common CEP offsets δ ~ U(−π, π] applied
/// to both pulses (locked fluctuations).
pub fn cep_averaged_trace<R: Rng + ?Sized>(
    test: &PulseSpec,
    sampling: &PulseSpec,
    det: &DetectionSpec,
    delays: &[f64],
    cep_draws: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let draws: Vec<f64> = (0..cep_draws)
        .map(|_| PI - TAU * rng.random::<f64>())
        .collect();
    cep_averaged_trace_with(test, sampling, det, delays, &draws)
}

/// [`cep_averaged_trace`] with explicit offsets.
pub fn cep_averaged_trace_with(
    test: &PulseSpec,
    sampling: &PulseSpec,
    det: &DetectionSpec,
    delays: &[f64],
    offsets: &[f64],
) -> Result<Vec<f64>> {
    if offsets.is_empty() {
        return Err(Error::config("cep_draws", "must be >= 1"));
    }
    let mut acc = vec![RunningStats::new(); delays.len()];
    for &delta in offsets {
        let residual = shifted_residual(det, sampling.cep, test.cep, delta);
        let trace = trace_with_residual(test, sampling, det, delays, residual);
        for (a, v) in acc.iter_mut().zip(trace) {
            a.push(v);
        }
    }
    Ok(acc.iter().map(RunningStats::mean).collect())
}

/// Least-squares slope of ln y against ln x.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Numeric(format!(
            "power-law fit needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::Numeric(
            "power-law fit needs at least 3 points".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Numeric(
            "power-law fit needs strictly positive finite values".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Numeric(
            "power-law fit needs distinct x values".into(),
        ));
    }
    Ok(sxy / sxx)
}

/// Largest |I(τ)| of a trace.
pub fn peak_amplitude(trace: &[f64]) -> f64 {
    trace.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Uniform delay grid from `start` to `stop` inclusive.
pub fn delay_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step.is_finite() && step > 0.0 && start.is_finite() && stop.is_finite() && stop >= start) {
        return Err(Error::config(
            "delay_step_fs",
            format!("invalid delay grid {start}..{stop} step {step}"),
        ));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| start + i as f64 * step).collect())
}
