#ifndef QFS_H
#define QFS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result code of every fallible call.
typedef enum QfsStatus {
  QFS_STATUS_OK = 0,
  QFS_STATUS_NULL_POINTER = 1,
  QFS_STATUS_INVALID_CONFIG = 2,
  QFS_STATUS_NUMERIC = 3,
  QFS_STATUS_ESTIMATION = 4,
  QFS_STATUS_IO = 5,
  QFS_STATUS_BUFFER_TOO_SMALL = 6,
  QFS_STATUS_PANIC = 7,
} QfsStatus;

typedef enum QfsKind {
  QFS_KIND_POISSON = 0,
  QFS_KIND_BOSE_EINSTEIN = 1,
  QFS_KIND_MIXTURE = 2,
} QfsKind;

// Photon-number law (opaque).
typedef struct QfsDistribution QfsDistribution;

// Scaling curve (opaque).
typedef struct QfsScalingCurve QfsScalingCurve;

typedef struct QfsMoments {
  double mean_sqrt_n;
  double var_sqrt_n;
  double mean_n;
  double var_n;
} QfsMoments;

typedef struct QfsShotStatistics {
  double mean_signal;
  double std_signal;
  uint64_t shots;
  uint64_t zero_shots;
} QfsShotStatistics;

typedef struct QfsCurvePoint {
  double mean_photons;
  double raw_mean;
  double raw_std;
  double norm_mean;
  double norm_std;
} QfsCurvePoint;

// Pulse description: carrier in PHz, intensity FWHM in fs, CEP in radians.
typedef struct QfsPulse {
  double carrier_freq_phz;
  double fwhm_fs;
  double field_amplitude;
  double cep;
  bool cep_stable;
} QfsPulse;

// Heterodyne orders and detection frequency (PHz).
typedef struct QfsDetection {
  uint32_t lo_order;
  uint32_t mix_order;
  double detection_freq_phz;
} QfsDetection;

// Message of the last failed call on this thread, or NULL after a success.
// The pointer stays valid until the next qfs call on the same thread.
const char *qfs_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *qfs_version(void);

// Creates a distribution. `coherent_fraction` is used by mixtures only.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum QfsStatus qfs_distribution_new(enum QfsKind kind,
                                    double mean,
                                    double coherent_fraction,
                                    struct QfsDistribution **out);

// Releases a distribution handle.
//
// # Safety
// `dist` must be NULL or a handle from [`qfs_distribution_new`] not yet freed.
void qfs_distribution_free(struct QfsDistribution *dist);

// P(n = count).
//
// # Safety
// `dist` must be a live handle and `out` writable.
enum QfsStatus qfs_distribution_pmf(const struct QfsDistribution *dist,
                                    uint64_t count,
                                    double *out);

// Series moments of √n and n, truncated at tail mass `tail_epsilon`.
//
// # Safety
// `dist` must be a live handle and `out` writable.
enum QfsStatus qfs_distribution_moments(const struct QfsDistribution *dist,
                                        double tail_epsilon,
                                        struct QfsMoments *out);

// Mean photon number of a pulse of `energy_j` joules at `wavelength_m` metres.
//
// # Safety
// `out` must be writable.
enum QfsStatus qfs_energy_to_mean_photons(double energy_j, double wavelength_m, double *out);

// Monte Carlo shot ensemble for a test law against a Poisson sampling pulse.
//
// # Safety
// `test` must be a live handle and `out` writable.
enum QfsStatus qfs_run_ensemble(const struct QfsDistribution *test,
                                double sampling_mean,
                                uint64_t shots,
                                uint64_t seed,
                                struct QfsShotStatistics *out);

// Monte Carlo scaling sweep; the test handle supplies kind and coherent fraction.
//
// # Safety
// `test` must be a live handle, `grid` must point to `grid_len` doubles and
// `out` must be writable.
enum QfsStatus qfs_scaling_sweep(const struct QfsDistribution *test,
                                 double sampling_mean,
                                 const double *grid,
                                 size_t grid_len,
                                 uint64_t shots,
                                 uint64_t seed,
                                 struct QfsScalingCurve **out);

// Exact series-moment counterpart of [`qfs_scaling_sweep`].
//
// # Safety
// As for [`qfs_scaling_sweep`].
enum QfsStatus qfs_model_curve_oracle(const struct QfsDistribution *test,
                                      double sampling_mean,
                                      const double *grid,
                                      size_t grid_len,
                                      struct QfsScalingCurve **out);

// Releases a curve handle.
//
// # Safety
// `curve` must be NULL or a live curve handle.
void qfs_scaling_curve_free(struct QfsScalingCurve *curve);

// Number of points; 0 for NULL.
//
// # Safety
// `curve` must be NULL or a live curve handle.
size_t qfs_scaling_curve_len(const struct QfsScalingCurve *curve);

// Point `index` (ascending ⟨n⟩).
//
// # Safety
// `curve` must be a live handle and `out` writable.
enum QfsStatus qfs_scaling_curve_point(const struct QfsScalingCurve *curve,
                                       size_t index,
                                       struct QfsCurvePoint *out);

// Least-squares coherent fraction of a curve against the oracle.
//
// # Safety
// `curve` must be a live handle and `out` writable.
enum QfsStatus qfs_estimate_mixture_fraction(const struct QfsScalingCurve *curve,
                                             double sampling_mean,
                                             double *out);

// Noiseless heterodyne trace at `len` sorted delays (fs) written to `out`,
// which must hold `out_len >= len` doubles.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum QfsStatus qfs_heterodyne_trace(const struct QfsPulse *test,
                                    const struct QfsPulse *sampling,
                                    const struct QfsDetection *detection,
                                    const double *delays,
                                    size_t len,
                                    double *out,
                                    size_t out_len);

#endif  /* QFS_H */
