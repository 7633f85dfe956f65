#pragma once

#include <vector>

#include "seled/errors.hpp"

namespace seled {

// Per-dot strain-tuning constants. Angles are in degrees measured from the
// [110] crystal axis, stress p in "stress-units" (numerically equal to the
// piezo field F_p in kV/cm under the default StressMap).
struct TuningParams {
    double s0 = 0.0;      // FSS at zero stress, ueV
    double theta0 = 0.0;  // polarization angle of the high-energy X line at p=0, deg
    double k = 0.0;       // ueV
    double delta = 0.0;   // ueV
    double alpha = 0.0;   // ueV per stress-unit
    double beta = 0.0;    // ueV per stress-unit; ~0 for stress along [110]/[1-10]

    // Checks s0 >= 0, theta0 in [0, 180) and the (k, delta) <-> (s0, theta0)
    // consistency within a combined 0.15 ueV tolerance.
    void validate() const;
};

// k = -s0 sin(2 theta0)/2, delta = s0 cos(2 theta0)/2.
std::pair<double, double> derive_k_delta(double s0_ueV, double theta0_deg);

// Full TuningParams from (s0, theta0, alpha), beta = 0.
TuningParams tuning_from_s0_theta0(double s0_ueV, double theta0_deg, double alpha);

// Recover (s0, theta0) of the high-energy component from (k, delta).
std::pair<double, double> s0_theta0_from_k_delta(double k, double delta);

// FSS magnitude and polarization angle at stress p:
//   s     = sqrt(4 (beta p + k)^2 + (alpha p + 2 delta)^2)
//   theta = angle of the high-energy eigenvector, folded to [0, 180) deg.
std::pair<double, double> fss_and_angle(const TuningParams& params, double p);

// Minimum reachable FSS 2|k| = s0 |sin 2 theta0|. Requires beta = 0
// (the closed form assumes stress aligned with a principal axis).
double min_fss(const TuningParams& params);

// Linear F_p -> stress and F_p -> emission-energy-shift calibration.
// Positive F_p is compressive and blue-shifts the emission.
struct StressMap {
    double stress_per_field = 1.0;         // stress-unit per kV/cm
    double energy_shift_per_field = 0.094; // meV per kV/cm (2.5 meV over 26.7 kV/cm)
};

double field_to_stress(const StressMap& map, double fp_kv_cm);
double energy_shift(const StressMap& map, double fp_kv_cm);  // meV

// Device field range; values outside produce a warning, not a failure.
inline constexpr double kFieldMin = -6.7;
inline constexpr double kFieldMax = 28.0;
bool field_in_device_range(double fp_kv_cm);

struct TuningSample {
    double fp = 0.0;         // kV/cm
    double s = 0.0;          // ueV
    double s_err = 0.1;      // 1-sigma, ueV
    double theta = 0.0;      // deg
    double theta_err = 1.0;  // 1-sigma, deg
};

struct TuningFit {
    TuningParams params;
    double s0_err = 0.0;
    double theta0_err = 0.0;
    double k_err = 0.0;
    double delta_err = 0.0;
    double alpha_err = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Weighted nonlinear least squares jointly over s(p) and theta(p), beta
// fixed at 0. Angle residuals are taken modulo 180 degrees. Throws
// ValidationError for fewer than 3 samples and ConvergenceError (with the
// best-so-far fit message) when the iteration budget is exhausted.
TuningFit fit_tuning_params(const std::vector<TuningSample>& samples,
                            const StressMap& map = {});

}  // namespace seled
