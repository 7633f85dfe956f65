#include "seled/yield.hpp"

#include <algorithm>
#include <cmath>

#include "seled/constants.hpp"
#include "seled/rng.hpp"

namespace seled {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Regularized lower incomplete gamma P(a, x), series + continued fraction.
double gamma_p(double a, double x) {
    if (x <= 0.0) return 0.0;
    double gln = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a, sum = 1.0 / a, del = sum;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-14) break;
        }
        return sum * std::exp(-x + a * std::log(x) - gln);
    }
    double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-14) break;
    }
    return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

struct GammaShape {
    double shape, scale;
};

GammaShape gamma_from_mean_spread(double mean, double spread) {
    double shape = (mean * mean) / (spread * spread);
    return {shape, spread * spread / mean};
}

double s0_cdf(const PopulationModel& m, double x) {
    if (x <= 0.0) return 0.0;
    if (m.s0_family == DistFamily::Gamma) {
        auto g = gamma_from_mean_spread(m.s0_mean, m.s0_spread);
        return gamma_p(g.shape, x / g.scale);
    }
    // Normal truncated to s0 >= 0.
    double lo = normal_cdf(-m.s0_mean / m.s0_spread);
    return (normal_cdf((x - m.s0_mean) / m.s0_spread) - lo) / (1.0 - lo);
}

// Unnormalized theta0 density on [theta0_lo, theta0_hi].
double theta0_density(const PopulationModel& m, double theta) {
    if (m.theta0_family == DistFamily::TruncatedNormal) {
        double z = (theta - m.theta0_center) / m.theta0_spread;
        return std::exp(-0.5 * z * z);
    }
    auto g = gamma_from_mean_spread(m.theta0_center, m.theta0_spread);
    if (theta <= 0.0) return 0.0;
    return std::pow(theta, g.shape - 1.0) * std::exp(-theta / g.scale);
}

}  // namespace

void PopulationModel::validate() const {
    if (theta0_spread <= 0.0 || s0_spread <= 0.0) throw ValidationError("spreads must be positive");
    if (theta0_lo < 0.0 || theta0_hi >= 180.0 || theta0_lo >= theta0_hi) {
        throw ValidationError("theta0 range must be a non-empty subset of [0, 180)");
    }
    if (s0_mean <= 0.0) throw ValidationError("s0_mean must be positive");
}

std::vector<DotSample> sample_population(const PopulationModel& model, std::size_t n,
                                         std::uint64_t seed) {
    model.validate();
    if (n < 1) throw ValidationError("population sample size must be at least 1");

    Rng theta_rng = Rng(seed).substream("theta0");
    Rng s_rng = Rng(seed).substream("s0");

    std::vector<DotSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        DotSample d;
        if (model.theta0_family == DistFamily::TruncatedNormal) {
            d.theta0 = theta_rng.truncated_gaussian(model.theta0_center, model.theta0_spread,
                                                    model.theta0_lo, model.theta0_hi);
        } else {
            auto g = gamma_from_mean_spread(model.theta0_center, model.theta0_spread);
            do {
                d.theta0 = theta_rng.gamma(g.shape, g.scale);
            } while (d.theta0 < model.theta0_lo || d.theta0 > model.theta0_hi);
        }
        if (model.s0_family == DistFamily::Gamma) {
            auto g = gamma_from_mean_spread(model.s0_mean, model.s0_spread);
            d.s0 = s_rng.gamma(g.shape, g.scale);
        } else {
            do {
                d.s0 = s_rng.gaussian(model.s0_mean, model.s0_spread);
            } while (d.s0 < 0.0);
        }
        out.push_back(d);
    }
    return out;
}

double smin_of(const DotSample& d) {
    return d.s0 * std::abs(std::sin(deg_to_rad(2.0 * d.theta0)));
}

SminHistogram smin_distribution(const std::vector<DotSample>& samples, double bin_width,
                                double range_hi) {
    if (samples.empty()) throw ValidationError("smin_distribution needs at least 1 sample");
    if (bin_width <= 0.0 || range_hi <= 0.0) throw ValidationError("invalid histogram layout");

    SminHistogram hist;
    hist.bin_width = bin_width;
    hist.range_hi = range_hi;
    hist.counts.assign(static_cast<std::size_t>(std::ceil(range_hi / bin_width)), 0);
    for (const auto& d : samples) {
        auto b = static_cast<std::size_t>(smin_of(d) / bin_width);
        if (b < hist.counts.size()) ++hist.counts[b];
    }
    return hist;
}

FractionResult fraction_below(const std::vector<DotSample>& samples, double threshold_ueV) {
    if (samples.empty()) throw ValidationError("fraction_below needs at least 1 sample");
    if (threshold_ueV <= 0.0) throw ValidationError("threshold must be positive");

    FractionResult out;
    out.n = samples.size();
    for (const auto& d : samples) {
        if (smin_of(d) < threshold_ueV) ++out.count;
    }
    double n = static_cast<double>(out.n);
    double p = static_cast<double>(out.count) / n;
    out.fraction = p;

    const double z = 1.959963984540054;  // 95%
    double z2 = z * z;
    double center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
    out.wilson_lo = std::max(0.0, center - half);
    out.wilson_hi = std::min(1.0, center + half);
    return out;
}

double population_fraction_below(const PopulationModel& model, double threshold_ueV) {
    model.validate();
    // Composite Simpson over theta0 of F_s0(t / |sin 2 theta|).
    const int n = 2000;  // even
    double lo = model.theta0_lo, hi = model.theta0_hi;
    double h = (hi - lo) / n;
    double num = 0.0, den = 0.0;
    for (int i = 0; i <= n; ++i) {
        double theta = lo + h * i;
        double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        double pdf = theta0_density(model, theta);
        double sin2 = std::abs(std::sin(deg_to_rad(2.0 * theta)));
        double cdf = (sin2 < 1e-12) ? 1.0 : s0_cdf(model, threshold_ueV / sin2);
        num += w * pdf * cdf;
        den += w * pdf;
    }
    return num / den;
}

PopulationModel calibrate_model(const CalibrationTargets& targets) {
    if (!(targets.frac_below_1ueV <= targets.frac_below_3ueV)) {
        throw ValidationError("infeasible targets: fractions must be non-decreasing in threshold");
    }
    if (targets.frac_below_1ueV < 0.0 || targets.frac_below_3ueV > 1.0) {
        throw ValidationError("target fractions must lie in [0,1]");
    }
    if (targets.s0_mean <= 0.0) throw ValidationError("target s0_mean must be positive");

    PopulationModel best;
    double best_err = 1e300;
    for (double s0_spread : {0.1 * targets.s0_mean, 0.2 * targets.s0_mean, 0.3 * targets.s0_mean,
                             0.4 * targets.s0_mean, 0.5 * targets.s0_mean}) {
        PopulationModel m;
        m.s0_mean = targets.s0_mean;
        m.s0_spread = s0_spread;

        // frac(3 ueV) decreases monotonically with theta0_spread; bisect it.
        double lo = 0.5, hi = 80.0;
        for (int it = 0; it < 60; ++it) {
            m.theta0_spread = 0.5 * (lo + hi);
            double f3 = population_fraction_below(m, 3.0);
            if (f3 > targets.frac_below_3ueV) {
                lo = m.theta0_spread;
            } else {
                hi = m.theta0_spread;
            }
        }
        m.theta0_spread = 0.5 * (lo + hi);

        double e1 = population_fraction_below(m, 1.0) - targets.frac_below_1ueV;
        double e3 = population_fraction_below(m, 3.0) - targets.frac_below_3ueV;
        double err = e1 * e1 + e3 * e3;
        if (err < best_err) {
            best_err = err;
            best = m;
        }
    }

    if (best_err > 0.04) {
        throw ConvergenceError(
            "calibration infeasible; closest achievable fractions: below 1 ueV = " +
            std::to_string(population_fraction_below(best, 1.0)) + ", below 3 ueV = " +
            std::to_string(population_fraction_below(best, 3.0)));
    }
    return best;
}

}  // namespace seled
