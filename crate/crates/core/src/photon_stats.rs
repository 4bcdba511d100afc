//! Photon-number statistics of coherent (Poisson), thermal (Bose-Einstein)
//! and mixed light, with exact truncated-series moments, exact-in-distribution
//! samplers and the pulse-energy to mean-photon-number conversion.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planck constant, J·s (exact SI value).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in vacuum, m/s (exact SI value).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default truncation tail mass for series evaluation.
pub const DEFAULT_TAIL_EPSILON: f64 = 1e-12;

/// Test-pulse energies (zJ) of the reference attenuation series at 1030 nm.
pub const REFERENCE_ENERGIES_ZJ: [f64; 11] = [
    3.19, 6.37, 13.54, 26.28, 53.35, 105.91, 212.61, 422.83, 845.65, 1704.0, 3376.2,
];

/// Mean photon numbers tabulated alongside [`REFERENCE_ENERGIES_ZJ`]; this is
/// the default sweep grid.
pub const REFERENCE_MEAN_PHOTONS: [f64; 11] = [
    0.0165, 0.033, 0.0702, 0.1363, 0.2766, 0.5491, 1.1024, 2.1924, 4.3848, 8.8357, 17.5062,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    Poisson,
    BoseEinstein,
    Mixture,
}

impl DistributionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DistributionKind::Poisson => "poisson",
            DistributionKind::BoseEinstein => "bose-einstein",
            DistributionKind::Mixture => "mixture",
        }
    }
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DistributionKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "poisson" | "coherent" => Ok(DistributionKind::Poisson),
            "bose-einstein" | "thermal" | "be" => Ok(DistributionKind::BoseEinstein),
            "mixture" | "mixed" => Ok(DistributionKind::Mixture),
            other => Err(format!(
                "unknown distribution `{other}` (expected poisson, bose-einstein or mixture)"
            )),
        }
    }
}

/// A photon-number law with mean ⟨n⟩.
///
/// `coherent_fraction` is the Poisson weight A of a mixture
/// `A·Poisson + (1−A)·Bose-Einstein`; it is ignored for the pure kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    pub kind: DistributionKind,
    pub mean: f64,
    pub coherent_fraction: f64,
}

impl PhotonDistribution {
    pub fn new(kind: DistributionKind, mean: f64, coherent_fraction: f64) -> Result<Self> {
        let dist = PhotonDistribution {
            kind,
            mean,
            coherent_fraction,
        };
        dist.validate()?;
        Ok(dist)
    }

    pub fn poisson(mean: f64) -> Result<Self> {
        Self::new(DistributionKind::Poisson, mean, 1.0)
    }

    pub fn bose_einstein(mean: f64) -> Result<Self> {
        Self::new(DistributionKind::BoseEinstein, mean, 0.0)
    }

    pub fn mixture(mean: f64, coherent_fraction: f64) -> Result<Self> {
        Self::new(DistributionKind::Mixture, mean, coherent_fraction)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() || self.mean < 0.0 {
            return Err(Error::config(
                "mean",
                format!(
                    "mean photon number must be finite and >= 0, got {}",
                    self.mean
                ),
            ));
        }
        if !(0.0..=1.0).contains(&self.coherent_fraction) {
            return Err(Error::config(
                "coherent_fraction",
                format!("must lie in [0, 1], got {}", self.coherent_fraction),
            ));
        }
        Ok(())
    }

    /// Same law with a different mean photon number.
    pub fn with_mean(&self, mean: f64) -> Result<Self> {
        Self::new(self.kind, mean, self.coherent_fraction)
    }

    /// Weight of the Poisson component.
    fn poisson_weight(&self) -> f64 {
        match self.kind {
            DistributionKind::Poisson => 1.0,
            DistributionKind::BoseEinstein => 0.0,
            DistributionKind::Mixture => self.coherent_fraction,
        }
    }

    /// P(n = count). Assumes a validated distribution.
    pub fn probability(&self, count: u64) -> f64 {
        match self.kind {
            DistributionKind::Poisson => poisson_pmf(self.mean, count),
            DistributionKind::BoseEinstein => bose_einstein_pmf(self.mean, count),
            DistributionKind::Mixture => {
                let a = self.coherent_fraction;
                a * poisson_pmf(self.mean, count) + (1.0 - a) * bose_einstein_pmf(self.mean, count)
            }
        }
    }

    /// Closed-form photon-number variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean;
        let a = self.poisson_weight();
        // E[n²]: Poisson m + m², Bose-Einstein m + 2m²
        let second = a * (m + m * m) + (1.0 - a) * (m + 2.0 * m * m);
        second - m * m
    }

    fn mode(&self) -> u64 {
        let poisson_mode = self.mean.floor() as u64;
        match self.kind {
            DistributionKind::Poisson => poisson_mode,
            DistributionKind::BoseEinstein => 0,
            DistributionKind::Mixture => {
                if self.probability(poisson_mode) >= self.probability(0) {
                    poisson_mode
                } else {
                    0
                }
            }
        }
    }

    /// Contiguous window of the PMF holding at least `1 − tail_epsilon` of the mass.
    pub fn truncate(&self, tail_epsilon: f64) -> Result<TruncatedPmf> {
        self.validate()?;
        check_tail_epsilon(tail_epsilon)?;
        TruncatedPmf::build(self, tail_epsilon)
    }

    pub fn sampler(&self) -> Result<PhotonSampler> {
        PhotonSampler::new(self)
    }
}

fn check_tail_epsilon(tail_epsilon: f64) -> Result<()> {
    if !(tail_epsilon > 0.0 && tail_epsilon <= 1e-6) {
        return Err(Error::config(
            "tail_epsilon",
            format!("must lie in (0, 1e-6], got {tail_epsilon}"),
        ));
    }
    Ok(())
}

/// ln Γ(n+1) − [(n+½)ln n − n + ln√(2π)] for integer n ≥ 1.
fn stirling_error(n: u64) -> f64 {
    if n <= 15 {
        let nf = n as f64;
        let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
        return ln_fact - ((nf + 0.5) * nf.ln() - nf + LN_SQRT_2PI);
    }
    let nn = n as f64;
    let inv = 1.0 / nn;
    let inv2 = inv * inv;
    // Asymptotic series, accurate to < 1e-17 for n > 15.
    inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0))))
}

/// Deviance term x·ln(x/μ) + μ − x, evaluated without cancellation near x ≈ μ.
fn deviance(x: f64, mu: f64) -> f64 {
    if (x - mu).abs() < 0.1 * (x + mu) {
        let v = (x - mu) / (x + mu);
        let mut s = (x - mu) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / mu).ln() + mu - x
    }
}

fn poisson_pmf(mean: f64, count: u64) -> f64 {
    if mean == 0.0 {
        return if count == 0 { 1.0 } else { 0.0 };
    }
    if count == 0 {
        return (-mean).exp();
    }
    let x = count as f64;
    (-stirling_error(count) - deviance(x, mean)).exp() / (2.0 * std::f64::consts::PI * x).sqrt()
}

fn bose_einstein_pmf(mean: f64, count: u64) -> f64 {
    if mean == 0.0 {
        return if count == 0 { 1.0 } else { 0.0 };
    }
    // ln(⟨n⟩/(⟨n⟩+1)) = −ln(1 + 1/⟨n⟩)
    let ln_ratio = -(1.0 / mean).ln_1p();
    (count as f64 * ln_ratio - mean.ln_1p()).exp()
}

/// P(n = count) under `dist`.
pub fn pmf(dist: &PhotonDistribution, count: u64) -> Result<f64> {
    dist.validate()?;
    Ok(dist.probability(count))
}

/// Draw one photon count from `dist`.
pub fn sample<R: Rng + ?Sized>(dist: &PhotonDistribution, rng: &mut R) -> Result<u64> {
    Ok(dist.sampler()?.sample(rng))
}

/// A contiguous window `[start, start + probs.len())` of a photon-number PMF.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedPmf {
    start: u64,
    probs: Vec<f64>,
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl TruncatedPmf {
    fn build(dist: &PhotonDistribution, tail_epsilon: f64) -> Result<Self> {
        let mean = dist.mean;
        let cap = (10.0 * mean + 50.0)
            .max(200.0)
            .max((2.0 * (mean + 1.0) * (1.0 / tail_epsilon).ln()).ceil());
        let cap = if cap >= u32::MAX as f64 {
            return Err(Error::Numeric(format!(
                "mean {mean} too large for series truncation"
            )));
        } else {
            cap as usize
        };

        let mode = dist.mode();
        let mut left: Vec<f64> = Vec::new();
        let mut right: Vec<f64> = vec![dist.probability(mode)];
        let mut lo = mode;
        let mut hi = mode;
        let mut mass = CompensatedSum::default();
        mass.add(right[0]);
        let target = 1.0 - tail_epsilon;

        let mut next_lo = if lo > 0 {
            dist.probability(lo - 1)
        } else {
            -1.0
        };
        let mut next_hi = dist.probability(hi + 1);
        while mass.value() < target {
            if left.len() + right.len() >= cap {
                return Err(Error::Numeric(format!(
                    "{} series did not reach 1 - {tail_epsilon:e} within {cap} terms (mass {})",
                    dist.kind,
                    mass.value()
                )));
            }
            if next_lo.max(next_hi) <= 0.0 {
                return Err(Error::Numeric(format!(
                    "{} series underflowed at mass {}",
                    dist.kind,
                    mass.value()
                )));
            }
            if next_lo >= next_hi {
                left.push(next_lo);
                mass.add(next_lo);
                lo -= 1;
                next_lo = if lo > 0 {
                    dist.probability(lo - 1)
                } else {
                    -1.0
                };
            } else {
                right.push(next_hi);
                mass.add(next_hi);
                hi += 1;
                next_hi = dist.probability(hi + 1);
            }
        }
        left.reverse();
        left.extend(right);
        Ok(TruncatedPmf {
            start: lo,
            probs: left,
        })
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    /// Last count inside the window.
    pub fn end(&self) -> u64 {
        self.start + self.probs.len() as u64 - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn mass(&self) -> f64 {
        let mut s = CompensatedSum::default();
        for &p in &self.probs {
            s.add(p);
        }
        s.value()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, &p)| (self.start + i as u64, p))
    }

    /// Suffix sums: `out[i]` = mass at counts ≥ start + i; `out[len]` = 0.
    fn suffix_mass(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.probs.len() + 1];
        for i in (0..self.probs.len()).rev() {
            out[i] = out[i + 1] + self.probs[i];
        }
        out
    }

    fn survival(suffix: &[f64], start: u64, k: u64) -> f64 {
        if k <= start {
            suffix[0]
        } else {
            let idx = (k - start) as usize;
            if idx >= suffix.len() {
                0.0
            } else {
                suffix[idx]
            }
        }
    }

    /// PMF of min(X, Y) for independent X ~ self and Y ~ other.
    pub fn min_with(&self, other: &TruncatedPmf) -> TruncatedPmf {
        let sa = self.suffix_mass();
        let sb = other.suffix_mass();
        let lo = self.start.min(other.start);
        let hi = self.end().min(other.end());
        let at = |t: &TruncatedPmf, k: u64| -> f64 {
            if k < t.start || k > t.end() {
                0.0
            } else {
                t.probs[(k - t.start) as usize]
            }
        };
        let probs = (lo..=hi)
            .map(|k| {
                // P(X = k, Y ≥ k) + P(Y = k, X > k)
                at(self, k) * Self::survival(&sb, other.start, k)
                    + at(other, k) * Self::survival(&sa, self.start, k + 1)
            })
            .collect();
        TruncatedPmf { start: lo, probs }
    }

    /// Mean and central moments (orders 2–4) of `f(n)`, computed in two passes.
    pub fn central_moments(&self, f: impl Fn(u64) -> f64) -> CentralMoments {
        let mass = self.mass();
        let mut mean = CompensatedSum::default();
        for (n, p) in self.iter() {
            mean.add(p * f(n));
        }
        let mean = mean.value() / mass;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for (n, p) in self.iter() {
            let d = f(n) - mean;
            let d2 = d * d;
            m2 += p * d2;
            m3 += p * d2 * d;
            m4 += p * d2 * d2;
        }
        CentralMoments {
            mean,
            m2: m2 / mass,
            m3: m3 / mass,
            m4: m4 / mass,
        }
    }
}

/// Mean and central moments of a scalar random variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentralMoments {
    pub mean: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

impl CentralMoments {
    /// Moments of `c·X`.
    pub fn scaled(&self, c: f64) -> CentralMoments {
        CentralMoments {
            mean: c * self.mean,
            m2: c.powi(2) * self.m2,
            m3: c.powi(3) * self.m3,
            m4: c.powi(4) * self.m4,
        }
    }

    /// Central moment of the given order (0 → 1, 1 → 0).
    pub fn order(&self, k: usize) -> f64 {
        match k {
            0 => 1.0,
            1 => 0.0,
            2 => self.m2,
            3 => self.m3,
            4 => self.m4,
            _ => panic!("central moment of order {k} not tracked"),
        }
    }

    /// Moments of X·Y for independent X (self) and Y.
    pub fn product(&self, y: &CentralMoments) -> CentralMoments {
        let (mx, my) = (self.mean, y.mean);
        // XY − μxμy = X·dy + μy·dx, so each central moment of order r is
        // Σ_k C(r,k) μy^(r−k) E[dy^k] E[X^k dx^(r−k)],
        // with E[X^k dx^j] = Σ_i C(k,i) μx^(k−i) E[dx^(j+i)].
        let x_moment = |k: usize, j: usize| -> f64 {
            (0..=k)
                .map(|i| binom(k, i) * mx.powi((k - i) as i32) * self.order(j + i))
                .sum()
        };
        let central = |r: usize| -> f64 {
            (0..=r)
                .map(|k| binom(r, k) * my.powi((r - k) as i32) * y.order(k) * x_moment(k, r - k))
                .sum()
        };
        CentralMoments {
            mean: mx * my,
            m2: central(2),
            m3: central(3),
            m4: central(4),
        }
    }
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Exact moments of the photon number and its square root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentSummary {
    pub mean_sqrt_n: f64,
    pub var_sqrt_n: f64,
    pub mean_n: f64,
    pub var_n: f64,
}

/// E[√n], Var(√n), E[n], Var(n) by direct summation of the truncated PMF.
pub fn exact_moments(dist: &PhotonDistribution, tail_epsilon: f64) -> Result<MomentSummary> {
    let window = dist.truncate(tail_epsilon)?;
    let root = window.central_moments(|n| (n as f64).sqrt());
    let count = window.central_moments(|n| n as f64);
    Ok(MomentSummary {
        mean_sqrt_n: root.mean,
        var_sqrt_n: root.m2.max(0.0),
        mean_n: count.mean,
        var_n: count.m2.max(0.0),
    })
}

/// Energy of one photon at `wavelength` (m), in joules.
pub fn photon_energy(wavelength: f64) -> Result<f64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::config(
            "wavelength",
            format!("must be finite and > 0, got {wavelength}"),
        ));
    }
    Ok(PLANCK * SPEED_OF_LIGHT / wavelength)
}

/// ⟨n⟩ = E / (h·c/λ).
pub fn energy_to_mean_photons(pulse_energy: f64, wavelength: f64) -> Result<f64> {
    if !(pulse_energy.is_finite() && pulse_energy >= 0.0) {
        return Err(Error::config(
            "pulse_energy",
            format!("must be finite and >= 0, got {pulse_energy}"),
        ));
    }
    Ok(pulse_energy / photon_energy(wavelength)?)
}

#[derive(Debug, Clone)]
enum SamplerInner {
    Vacuum,
    Poisson(rand_distr::Poisson<f64>),
    Geometric {
        ln_ratio: f64,
    },
    Mixture {
        coherent_fraction: f64,
        poisson: rand_distr::Poisson<f64>,
        ln_ratio: f64,
    },
}

/// Pre-built sampler for one distribution.
///
/// Poisson draws use `rand_distr::Poisson` (exact inversion / PTRS
/// rejection); Bose-Einstein draws invert the geometric CDF; mixtures first
/// pick the component.
#[derive(Debug, Clone)]
pub struct PhotonSampler {
    inner: SamplerInner,
}

impl PhotonSampler {
    pub fn new(dist: &PhotonDistribution) -> Result<Self> {
        dist.validate()?;
        if dist.mean == 0.0 {
            return Ok(PhotonSampler {
                inner: SamplerInner::Vacuum,
            });
        }
        let poisson = || {
            rand_distr::Poisson::new(dist.mean)
                .map_err(|e| Error::config("mean", format!("poisson sampler: {e}")))
        };
        let ln_ratio = -(1.0 / dist.mean).ln_1p();
        let inner = match dist.kind {
            DistributionKind::Poisson => SamplerInner::Poisson(poisson()?),
            DistributionKind::BoseEinstein => SamplerInner::Geometric { ln_ratio },
            DistributionKind::Mixture => SamplerInner::Mixture {
                coherent_fraction: dist.coherent_fraction,
                poisson: poisson()?,
                ln_ratio,
            },
        };
        Ok(PhotonSampler { inner })
    }

    fn geometric<R: Rng + ?Sized>(ln_ratio: f64, rng: &mut R) -> u64 {
        // U in (0, 1]
        let u = 1.0 - rng.random::<f64>();
        let n = (u.ln() / ln_ratio).floor();
        if n >= u64::MAX as f64 {
            u64::MAX
        } else {
            n as u64
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.inner {
            SamplerInner::Vacuum => 0,
            SamplerInner::Poisson(p) => p.sample(rng) as u64,
            SamplerInner::Geometric { ln_ratio } => Self::geometric(*ln_ratio, rng),
            SamplerInner::Mixture {
                coherent_fraction,
                poisson,
                ln_ratio,
            } => {
                if rng.random::<f64>() < *coherent_fraction {
                    poisson.sample(rng) as u64
                } else {
                    Self::geometric(*ln_ratio, rng)
                }
            }
        }
    }
}
