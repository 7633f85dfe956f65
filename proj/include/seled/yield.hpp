#pragma once

#include <cstdint>
#include <vector>

#include "seled/errors.hpp"

namespace seled {

enum class DistFamily { TruncatedNormal, Gamma };

// Ensemble statistics of (s0, theta0) across a quantum-dot population.
struct PopulationModel {
    double theta0_center = 90.0;  // deg
    double theta0_spread = 10.0;  // deg
    double theta0_lo = 60.0;      // deg
    double theta0_hi = 120.0;     // deg
    double s0_mean = 20.0;        // ueV
    double s0_spread = 5.0;       // ueV
    DistFamily theta0_family = DistFamily::TruncatedNormal;
    DistFamily s0_family = DistFamily::Gamma;

    void validate() const;
};

struct DotSample {
    double s0 = 0.0;      // ueV
    double theta0 = 0.0;  // deg
};

std::vector<DotSample> sample_population(const PopulationModel& model, std::size_t n,
                                         std::uint64_t seed);

double smin_of(const DotSample& d);  // s0 |sin 2 theta0|

struct SminHistogram {
    double bin_width = 1.0;  // ueV
    double range_hi = 40.0;  // ueV
    std::vector<std::uint64_t> counts;
};

SminHistogram smin_distribution(const std::vector<DotSample>& samples, double bin_width = 1.0,
                                double range_hi = 40.0);

struct FractionResult {
    double fraction = 0.0;
    double wilson_lo = 0.0;  // 95% Wilson interval
    double wilson_hi = 0.0;
    std::size_t count = 0;
    std::size_t n = 0;
};

FractionResult fraction_below(const std::vector<DotSample>& samples, double threshold_ueV);

struct CalibrationTargets {
    double frac_below_1ueV = 0.11;
    double frac_below_3ueV = 0.33;
    double s0_mean = 20.0;
};

// Population fractions P(s_min < t) at n -> infinity, by quadrature over
// the theta0 distribution and the s0 CDF.
double population_fraction_below(const PopulationModel& model, double threshold_ueV);

// Grid search over s0_spread with a bisection on theta0_spread per grid
// point, minimizing the squared deviation from the two target fractions.
// Deterministic. Throws ValidationError for non-monotone targets and
// ConvergenceError (with closest achievable values) when infeasible.
PopulationModel calibrate_model(const CalibrationTargets& targets);

}  // namespace seled
