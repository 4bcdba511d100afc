//! C ABI over `qfs-core`.
//!
//! Conventions:
//! * every fallible function returns a [`QfsStatus`] and writes results through
//!   out-pointers; on failure a message is available from
//!   [`qfs_last_error_message`] on the same thread;
//! * distributions and scaling curves are opaque heap handles released with
//!   their `*_free` function (passing NULL is a no-op);
//! * panics never cross the boundary; they surface as `QFS_STATUS_PANIC`.

// `!(x > 0.0)` style checks are intentional: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use qfs_core::field_model::{self, DetectionSpec, PulseSpec};
use qfs_core::gabor_analysis;
use qfs_core::ghost_mc::{self, McConfig, ScalingCurve};
use qfs_core::photon_stats::{self, DistributionKind, PhotonDistribution};
use qfs_core::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    Numeric = 3,
    Estimation = 4,
    Io = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QfsKind {
    Poisson = 0,
    BoseEinstein = 1,
    Mixture = 2,
}

/// Photon-number law (opaque).
pub struct QfsDistribution(PhotonDistribution);

/// Scaling curve (opaque).
pub struct QfsScalingCurve(ScalingCurve);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QfsMoments {
    pub mean_sqrt_n: f64,
    pub var_sqrt_n: f64,
    pub mean_n: f64,
    pub var_n: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QfsShotStatistics {
    pub mean_signal: f64,
    pub std_signal: f64,
    pub shots: u64,
    pub zero_shots: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QfsCurvePoint {
    pub mean_photons: f64,
    pub raw_mean: f64,
    pub raw_std: f64,
    pub norm_mean: f64,
    pub norm_std: f64,
}

/// Pulse description: carrier in PHz, intensity FWHM in fs, CEP in radians.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfsPulse {
    pub carrier_freq_phz: f64,
    pub fwhm_fs: f64,
    pub field_amplitude: f64,
    pub cep: f64,
    pub cep_stable: bool,
}

/// Heterodyne orders and detection frequency (PHz).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfsDetection {
    pub lo_order: u32,
    pub mix_order: u32,
    pub detection_freq_phz: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(QfsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Config { .. } => QfsStatus::InvalidConfig,
            Error::Numeric(_) => QfsStatus::Numeric,
            Error::Estimation(_) => QfsStatus::Estimation,
            Error::Io { .. } => QfsStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(QfsStatus::NullPointer, format!("`{what}` is NULL"))
}

fn set_error(message: Option<String>) {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() =
            message.map(|m| CString::new(m.replace('\0', " ")).expect("interior NULs removed"));
    });
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> QfsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(None);
            QfsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(Some(message));
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(Some(format!("panic: {msg}")));
            QfsStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread, or NULL after a success.
/// The pointer stays valid until the next qfs call on the same thread.
#[no_mangle]
pub extern "C" fn qfs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qfs_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version contains NUL"),
        };
    VERSION.as_ptr()
}

/// Creates a distribution. `coherent_fraction` is used by mixtures only.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn qfs_distribution_new(
    kind: QfsKind,
    mean: f64,
    coherent_fraction: f64,
    out: *mut *mut QfsDistribution,
) -> QfsStatus {
    guard(|| {
        let kind = match kind {
            QfsKind::Poisson => DistributionKind::Poisson,
            QfsKind::BoseEinstein => DistributionKind::BoseEinstein,
            QfsKind::Mixture => DistributionKind::Mixture,
        };
        let fraction = match kind {
            DistributionKind::Poisson => 1.0,
            DistributionKind::BoseEinstein => 0.0,
            DistributionKind::Mixture => coherent_fraction,
        };
        let d = PhotonDistribution::new(kind, mean, fraction)?;
        write(out, Box::into_raw(Box::new(QfsDistribution(d))), "out")
    })
}

/// Releases a distribution handle.
///
/// # Safety
/// `dist` must be NULL or a handle from [`qfs_distribution_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qfs_distribution_free(dist: *mut QfsDistribution) {
    if !dist.is_null() {
        drop(Box::from_raw(dist));
    }
}

/// P(n = count).
///
/// # Safety
/// `dist` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qfs_distribution_pmf(
    dist: *const QfsDistribution,
    count: u64,
    out: *mut f64,
) -> QfsStatus {
    guard(|| {
        let d = deref(dist, "dist")?;
        write(out, photon_stats::pmf(&d.0, count)?, "out")
    })
}

/// Series moments of √n and n, truncated at tail mass `tail_epsilon`.
///
/// # Safety
/// `dist` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qfs_distribution_moments(
    dist: *const QfsDistribution,
    tail_epsilon: f64,
    out: *mut QfsMoments,
) -> QfsStatus {
    guard(|| {
        let d = deref(dist, "dist")?;
        let m = photon_stats::exact_moments(&d.0, tail_epsilon)?;
        write(
            out,
            QfsMoments {
                mean_sqrt_n: m.mean_sqrt_n,
                var_sqrt_n: m.var_sqrt_n,
                mean_n: m.mean_n,
                var_n: m.var_n,
            },
            "out",
        )
    })
}

/// Mean photon number of a pulse of `energy_j` joules at `wavelength_m` metres.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qfs_energy_to_mean_photons(
    energy_j: f64,
    wavelength_m: f64,
    out: *mut f64,
) -> QfsStatus {
    guard(|| {
        write(
            out,
            photon_stats::energy_to_mean_photons(energy_j, wavelength_m)?,
            "out",
        )
    })
}

fn mc_config(
    test: &QfsDistribution,
    sampling_mean: f64,
    shots: u64,
    seed: u64,
) -> Result<McConfig, Failure> {
    let cfg = McConfig {
        sampling: PhotonDistribution::poisson(sampling_mean)?,
        test: test.0,
        shots,
        seed,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Monte Carlo shot ensemble for a test law against a Poisson sampling pulse.
///
/// # Safety
/// `test` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qfs_run_ensemble(
    test: *const QfsDistribution,
    sampling_mean: f64,
    shots: u64,
    seed: u64,
    out: *mut QfsShotStatistics,
) -> QfsStatus {
    guard(|| {
        let cfg = mc_config(deref(test, "test")?, sampling_mean, shots, seed)?;
        let s = ghost_mc::run_ensemble(&cfg)?;
        write(
            out,
            QfsShotStatistics {
                mean_signal: s.mean_signal,
                std_signal: s.std_signal,
                shots: s.shots,
                zero_shots: s.zero_shots,
            },
            "out",
        )
    })
}

/// Monte Carlo scaling sweep; the test handle supplies kind and coherent fraction.
///
/// # Safety
/// `test` must be a live handle, `grid` must point to `grid_len` doubles and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qfs_scaling_sweep(
    test: *const QfsDistribution,
    sampling_mean: f64,
    grid: *const f64,
    grid_len: usize,
    shots: u64,
    seed: u64,
    out: *mut *mut QfsScalingCurve,
) -> QfsStatus {
    guard(|| {
        let cfg = mc_config(deref(test, "test")?, sampling_mean, shots, seed)?;
        let curve = ghost_mc::scaling_sweep(&cfg, slice(grid, grid_len, "grid")?)?;
        write(out, Box::into_raw(Box::new(QfsScalingCurve(curve))), "out")
    })
}

/// Exact series-moment counterpart of [`qfs_scaling_sweep`].
///
/// # Safety
/// As for [`qfs_scaling_sweep`].
#[no_mangle]
pub unsafe extern "C" fn qfs_model_curve_oracle(
    test: *const QfsDistribution,
    sampling_mean: f64,
    grid: *const f64,
    grid_len: usize,
    out: *mut *mut QfsScalingCurve,
) -> QfsStatus {
    guard(|| {
        let test = deref(test, "test")?;
        let sampling = PhotonDistribution::poisson(sampling_mean)?;
        let curve =
            ghost_mc::model_curve_oracle(&test.0, &sampling, slice(grid, grid_len, "grid")?)?;
        write(out, Box::into_raw(Box::new(QfsScalingCurve(curve))), "out")
    })
}

/// Releases a curve handle.
///
/// # Safety
/// `curve` must be NULL or a live curve handle.
#[no_mangle]
pub unsafe extern "C" fn qfs_scaling_curve_free(curve: *mut QfsScalingCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Number of points; 0 for NULL.
///
/// # Safety
/// `curve` must be NULL or a live curve handle.
#[no_mangle]
pub unsafe extern "C" fn qfs_scaling_curve_len(curve: *const QfsScalingCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.0.points.len())
}

/// Point `index` (ascending ⟨n⟩).
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qfs_scaling_curve_point(
    curve: *const QfsScalingCurve,
    index: usize,
    out: *mut QfsCurvePoint,
) -> QfsStatus {
    guard(|| {
        let c = deref(curve, "curve")?;
        let p = c.0.points.get(index).ok_or_else(|| {
            Failure(
                QfsStatus::InvalidConfig,
                format!("index {index} out of range for {} points", c.0.points.len()),
            )
        })?;
        write(
            out,
            QfsCurvePoint {
                mean_photons: p.mean_photons,
                raw_mean: p.raw_mean,
                raw_std: p.raw_std,
                norm_mean: p.norm_mean,
                norm_std: p.norm_std,
            },
            "out",
        )
    })
}

/// Least-squares coherent fraction of a curve against the oracle.
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qfs_estimate_mixture_fraction(
    curve: *const QfsScalingCurve,
    sampling_mean: f64,
    out: *mut f64,
) -> QfsStatus {
    guard(|| {
        let c = deref(curve, "curve")?;
        let sampling = PhotonDistribution::poisson(sampling_mean)?;
        write(
            out,
            gabor_analysis::estimate_mixture_fraction(&c.0, &sampling)?,
            "out",
        )
    })
}

fn pulse(p: &QfsPulse, prefix: &str) -> Result<PulseSpec, Failure> {
    let spec = PulseSpec {
        carrier_freq: p.carrier_freq_phz,
        fwhm: p.fwhm_fs,
        field_amplitude: p.field_amplitude,
        cep: p.cep,
        cep_stable: p.cep_stable,
    };
    spec.validate(prefix)?;
    Ok(spec)
}

/// Noiseless heterodyne trace at `len` sorted delays (fs) written to `out`,
/// which must hold `out_len >= len` doubles.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn qfs_heterodyne_trace(
    test: *const QfsPulse,
    sampling: *const QfsPulse,
    detection: *const QfsDetection,
    delays: *const f64,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> QfsStatus {
    guard(|| {
        let test = pulse(deref(test, "test")?, "test")?;
        let sampling = pulse(deref(sampling, "sampling")?, "sampling")?;
        let d = deref(detection, "detection")?;
        let det = DetectionSpec {
            lo_order: d.lo_order,
            mix_order: d.mix_order,
            detection_freq: d.detection_freq_phz,
            classical_noise: 0.0,
            noise_floor: 0.0,
            shots_per_point: 1,
            seed: 0,
        };
        det.validate()?;
        let delays = slice(delays, len, "delays")?;
        if delays.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::config("delays", "delays must be sorted ascending").into());
        }
        if out_len < len {
            return Err(Failure(
                QfsStatus::BufferTooSmall,
                format!("output buffer holds {out_len} values, {len} needed"),
            ));
        }
        if len > 0 && out.is_null() {
            return Err(null("out"));
        }
        let trace = field_model::heterodyne_trace(&test, &sampling, &det, delays);
        std::ptr::copy_nonoverlapping(trace.as_ptr(), out, len);
        Ok(())
    })
}
