//! Monte Carlo model of a single balanced SHG/SFG heterodyne measurement.
//!
//! One shot proceeds in three stages:
//!
//! 1. second harmonic: two photon numbers are drawn from the sampling pulse
//!    law and the harmonic photon number is the smaller of the two;
//! 2. sum frequency: one draw from the sampling law and one from the test
//!    law, again limited by the smaller;
//! 3. interference: the detected amplitude is `S = 2·√n_SHG·√n_SFG`.
//!
//! Repeating the shot gives the ensemble mean S̄ and spread σ; sweeping the
//! test-pulse mean photon number gives the scaling curves that reveal the
//! departure from linear field scaling near ⟨n⟩ ≈ 1. [`model_curve_oracle`]
//! evaluates the same curves from exact series moments.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photon_stats::{
    CentralMoments, PhotonDistribution, PhotonSampler, TruncatedPmf, DEFAULT_TAIL_EPSILON,
};
use crate::rng::{child_stream, derive_seed, Stage};
use crate::stats::RunningStats;

pub const DEFAULT_SAMPLING_MEAN: f64 = 1e6;
pub const DEFAULT_SHOTS: u64 = 10_000;

/// Shots per independently seeded shard of an ensemble.
const SHARD_SHOTS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub sampling: PhotonDistribution,
    pub test: PhotonDistribution,
    pub shots: u64,
    pub seed: u64,
}

impl McConfig {
    /// Poisson sampling pulse with ⟨n⟩ = 1e6.
    pub fn new(test: PhotonDistribution, shots: u64, seed: u64) -> Result<Self> {
        let cfg = McConfig {
            sampling: PhotonDistribution::poisson(DEFAULT_SAMPLING_MEAN)?,
            test,
            shots,
            seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.sampling.validate()?;
        self.test.validate()?;
        if self.sampling.mean <= 0.0 {
            return Err(Error::config(
                "sampling_mean",
                "sampling pulse mean photon number must be > 0",
            ));
        }
        if self.shots == 0 {
            return Err(Error::config("shots", "must be >= 1"));
        }
        Ok(())
    }

    pub fn with_test_mean(&self, mean: f64) -> Result<Self> {
        Ok(McConfig {
            test: self.test.with_mean(mean)?,
            ..*self
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShotStatistics {
    pub mean_signal: f64,
    pub std_signal: f64,
    pub shots: u64,
    /// Shots in which the detected amplitude was exactly zero.
    pub zero_shots: u64,
}

/// Photons produced by a two-photon up-conversion, limited by the scarcer input.
#[inline]
pub fn up_converted(n1: u64, n2: u64) -> u64 {
    n1.min(n2)
}

/// Detected amplitude for given harmonic and sum-frequency photon numbers.
#[inline]
pub fn shot_signal(n_shg: u64, n_sfg: u64) -> f64 {
    2.0 * (n_shg as f64).sqrt() * (n_sfg as f64).sqrt()
}

/// Samplers for one shot configuration, built once and reused across shots.
#[derive(Debug, Clone)]
pub struct ShotModel {
    sampling: PhotonSampler,
    test: PhotonSampler,
}

impl ShotModel {
    pub fn new(sampling: &PhotonDistribution, test: &PhotonDistribution) -> Result<Self> {
        Ok(ShotModel {
            sampling: sampling.sampler()?,
            test: test.sampler()?,
        })
    }

    pub fn from_config(config: &McConfig) -> Result<Self> {
        Self::new(&config.sampling, &config.test)
    }

    pub fn harmonic_photons<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let n1 = self.sampling.sample(rng);
        let n2 = self.sampling.sample(rng);
        up_converted(n1, n2)
    }

    pub fn sum_frequency_photons<R: Rng + ?Sized>(&self, test: &PhotonSampler, rng: &mut R) -> u64 {
        let n1 = self.sampling.sample(rng);
        let n2 = test.sample(rng);
        up_converted(n1, n2)
    }

    pub fn shot<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.shot_with_test(&self.test, rng)
    }

    /// One shot with a test-pulse law other than the one the model was built with.
    pub fn shot_with_test<R: Rng + ?Sized>(&self, test: &PhotonSampler, rng: &mut R) -> f64 {
        let n_shg = self.harmonic_photons(rng);
        let n_sfg = self.sum_frequency_photons(test, rng);
        shot_signal(n_shg, n_sfg)
    }
}

/// Draw one detected amplitude S.
pub fn simulate_shot<R: Rng + ?Sized>(config: &McConfig, rng: &mut R) -> Result<f64> {
    config.validate()?;
    Ok(ShotModel::from_config(config)?.shot(rng))
}

/// Sample mean and standard deviation (denominator `shots − 1`) of S.
pub fn run_ensemble(config: &McConfig) -> Result<ShotStatistics> {
    config.validate()?;
    if config.shots < 2 {
        return Err(Error::config(
            "shots",
            "at least 2 shots are needed for a standard deviation",
        ));
    }
    let model = ShotModel::from_config(config)?;
    let shards = config.shots.div_ceil(SHARD_SHOTS);
    let partial: Vec<(RunningStats, u64)> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = child_stream(config.seed, shard, Stage::ShotShard);
            let n = SHARD_SHOTS.min(config.shots - shard * SHARD_SHOTS);
            let mut stats = RunningStats::new();
            let mut zeros = 0;
            for _ in 0..n {
                let s = model.shot(&mut rng);
                if s == 0.0 {
                    zeros += 1;
                }
                stats.push(s);
            }
            (stats, zeros)
        })
        .collect();
    let mut total = RunningStats::new();
    let mut zero_shots = 0;
    for (s, z) in &partial {
        total.merge(s);
        zero_shots += z;
    }
    Ok(ShotStatistics {
        mean_signal: total.mean(),
        std_signal: total.std_dev(),
        shots: total.count(),
        zero_shots,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub mean_photons: f64,
    pub raw_mean: f64,
    pub raw_std: f64,
    pub norm_mean: f64,
    pub norm_std: f64,
}

/// How the mean signal is divided before anchoring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanScaling {
    /// Field detection: S̄/√⟨n⟩, scaled to 1 at the largest ⟨n⟩.
    Field,
    /// Intensity detection: S̄/⟨n⟩, not re-anchored (its classical value is 1).
    Intensity,
}

/// Raw and normalized mean/σ versus test-pulse mean photon number.
///
/// σ is anchored at the largest ⟨n⟩ without a √⟨n⟩ division, so the coherent
/// curve peaks near ⟨n⟩ ≈ 1 while the thermal one is monotone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingCurve {
    pub points: Vec<CurvePoint>,
    pub normalization_anchor: f64,
}

impl ScalingCurve {
    /// Builds a curve from `(mean_photons, raw_mean, raw_std)` triples.
    pub fn from_raw(mut raw: Vec<(f64, f64, f64)>, scaling: MeanScaling) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::config(
                "grid",
                "scaling curve needs at least one point",
            ));
        }
        for &(n, m, s) in &raw {
            if !(n.is_finite() && n >= 0.0 && m.is_finite() && s.is_finite() && s >= 0.0) {
                return Err(Error::Numeric(format!(
                    "non-finite or negative curve point (n={n}, mean={m}, std={s})"
                )));
            }
        }
        raw.sort_by(|a, b| a.0.total_cmp(&b.0));
        let ratio = |n: f64, m: f64| -> f64 {
            if n == 0.0 {
                0.0
            } else {
                match scaling {
                    MeanScaling::Field => m / n.sqrt(),
                    MeanScaling::Intensity => m / n,
                }
            }
        };
        let &(anchor_n, anchor_m, anchor_s) = raw.last().expect("nonempty");
        let anchor_ratio = match scaling {
            MeanScaling::Field => ratio(anchor_n, anchor_m),
            MeanScaling::Intensity => 1.0,
        };
        let points = raw
            .into_iter()
            .map(|(n, m, s)| CurvePoint {
                mean_photons: n,
                raw_mean: m,
                raw_std: s,
                norm_mean: if anchor_ratio == 0.0 {
                    0.0
                } else {
                    ratio(n, m) / anchor_ratio
                },
                norm_std: if anchor_s == 0.0 { 0.0 } else { s / anchor_s },
            })
            .collect();
        Ok(ScalingCurve {
            points,
            normalization_anchor: anchor_n,
        })
    }

    pub fn mean_photons(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean_photons).collect()
    }

    pub fn norm_std(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.norm_std).collect()
    }

    /// Point closest to the given ⟨n⟩.
    pub fn nearest(&self, mean_photons: f64) -> &CurvePoint {
        self.points
            .iter()
            .min_by(|a, b| {
                (a.mean_photons - mean_photons)
                    .abs()
                    .total_cmp(&(b.mean_photons - mean_photons).abs())
            })
            .expect("curves are nonempty")
    }

    /// ⟨n⟩ at which the normalized σ is largest.
    pub fn norm_std_argmax(&self) -> f64 {
        self.points
            .iter()
            .max_by(|a, b| a.norm_std.total_cmp(&b.norm_std))
            .expect("curves are nonempty")
            .mean_photons
    }

    /// Height of the σ bump at ⟨n⟩ ≈ 1 relative to the anchor: the largest
    /// normalized σ among points with ⟨n⟩ in [`PEAK_REGION`], divided by the
    /// anchor value. `None` if no point falls in that range.
    pub fn peak_to_anchor(&self) -> Option<f64> {
        let anchor = self.points.last()?.norm_std;
        self.points
            .iter()
            .filter(|p| PEAK_REGION.contains(&p.mean_photons))
            .map(|p| p.norm_std)
            .reduce(f64::max)
            .map(|peak| peak / anchor)
    }
}

/// ⟨n⟩ range where the coherent-state σ curve has its maximum.
pub const PEAK_REGION: std::ops::RangeInclusive<f64> = 0.8..=2.2;

fn check_grid(mean_grid: &[f64], allow_zero: bool) -> Result<()> {
    if mean_grid.is_empty() {
        return Err(Error::config("grid", "mean photon grid is empty"));
    }
    for &m in mean_grid {
        let ok = m.is_finite() && if allow_zero { m >= 0.0 } else { m > 0.0 };
        if !ok {
            return Err(Error::config(
                "grid",
                format!("mean photon numbers must be finite and > 0, got {m}"),
            ));
        }
    }
    Ok(())
}

fn sorted(mean_grid: &[f64]) -> Vec<f64> {
    let mut g = mean_grid.to_vec();
    g.sort_by(f64::total_cmp);
    g
}

/// Runs [`run_ensemble`] at each test ⟨n⟩ of the grid (test kind preserved)
/// and normalizes the result. Point `i` of the sorted grid uses the seed
/// `derive_seed(base.seed, i, SweepPoint)`.
pub fn scaling_sweep(base: &McConfig, mean_grid: &[f64]) -> Result<ScalingCurve> {
    base.validate()?;
    check_grid(mean_grid, false)?;
    let grid = sorted(mean_grid);
    let raw = grid
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            let cfg = McConfig {
                seed: derive_seed(base.seed, i as u64, Stage::SweepPoint),
                ..base.with_test_mean(n)?
            };
            let stats = run_ensemble(&cfg)?;
            Ok((n, stats.mean_signal, stats.std_signal))
        })
        .collect::<Result<Vec<_>>>()?;
    ScalingCurve::from_raw(raw, MeanScaling::Field)
}

/// Exact moments of S for one test law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPoint {
    pub signal: CentralMoments,
}

impl ModelPoint {
    pub fn mean(&self) -> f64 {
        self.signal.mean
    }

    pub fn std(&self) -> f64 {
        self.signal.m2.max(0.0).sqrt()
    }

    /// Standard error of the sample mean over `shots` shots.
    pub fn mean_standard_error(&self, shots: u64) -> f64 {
        self.std() / (shots as f64).sqrt()
    }

    /// Large-sample standard error of the sample standard deviation.
    pub fn std_standard_error(&self, shots: u64) -> f64 {
        let var = self.signal.m2;
        if var <= 0.0 {
            return 0.0;
        }
        let var_of_var = (self.signal.m4 - var * var).max(0.0) / shots as f64;
        var_of_var.sqrt() / (2.0 * var.sqrt())
    }
}

/// Series-moment counterpart of the shot model with the sampling pulse fixed.
#[derive(Debug, Clone)]
pub struct ShotOracle {
    sampling: TruncatedPmf,
    harmonic: CentralMoments,
    tail_epsilon: f64,
}

impl ShotOracle {
    pub fn new(sampling: &PhotonDistribution, tail_epsilon: f64) -> Result<Self> {
        if sampling.mean <= 0.0 {
            return Err(Error::config(
                "sampling_mean",
                "sampling pulse mean photon number must be > 0",
            ));
        }
        let window = sampling.truncate(tail_epsilon)?;
        let harmonic = window
            .min_with(&window)
            .central_moments(|n| 2.0 * (n as f64).sqrt());
        Ok(ShotOracle {
            sampling: window,
            harmonic,
            tail_epsilon,
        })
    }

    /// S = X·Y with X = 2√n_SHG and Y = √n_SFG independent.
    pub fn point(&self, test: &PhotonDistribution) -> Result<ModelPoint> {
        let test_window = test.truncate(self.tail_epsilon)?;
        let sum_frequency = self
            .sampling
            .min_with(&test_window)
            .central_moments(|n| (n as f64).sqrt());
        Ok(ModelPoint {
            signal: self.harmonic.product(&sum_frequency),
        })
    }
}

/// Closed-form counterpart of [`scaling_sweep`]: the same curve computed from
/// exact series moments. `template` supplies the test kind and coherent
/// fraction; its mean is replaced by each grid value.
pub fn model_curve_oracle(
    template: &PhotonDistribution,
    sampling: &PhotonDistribution,
    mean_grid: &[f64],
) -> Result<ScalingCurve> {
    check_grid(mean_grid, true)?;
    let oracle = ShotOracle::new(sampling, DEFAULT_TAIL_EPSILON)?;
    model_curve_with(&oracle, template, mean_grid)
}

pub fn model_curve_with(
    oracle: &ShotOracle,
    template: &PhotonDistribution,
    mean_grid: &[f64],
) -> Result<ScalingCurve> {
    let raw = sorted(mean_grid)
        .into_iter()
        .map(|n| {
            let point = oracle.point(&template.with_mean(n)?)?;
            Ok((n, point.mean(), point.std()))
        })
        .collect::<Result<Vec<_>>>()?;
    ScalingCurve::from_raw(raw, MeanScaling::Field)
}
