#include "seled/strain.hpp"

#include <algorithm>
#include <cmath>

#include "seled/constants.hpp"
#include "seled/optim.hpp"

namespace seled {

namespace {

double mod180(double deg) {
    double x = std::fmod(deg, 180.0);
    if (x < 0.0) x += 180.0;
    return x;
}

// Fold an angle difference to [-90, 90): exciton polarization is an axis.
double wrap_axis_deg(double diff) {
    double x = std::fmod(diff, 180.0);
    if (x >= 90.0) x -= 180.0;
    if (x < -90.0) x += 180.0;
    return x;
}

}  // namespace

void TuningParams::validate() const {
    if (s0 < 0.0) throw ValidationError("s0 must be non-negative");
    if (theta0 < 0.0 || theta0 >= 180.0) throw ValidationError("theta0 must lie in [0, 180) deg");
    auto [k_ref, delta_ref] = derive_k_delta(s0, theta0);
    double miss = std::hypot(k - k_ref, delta - delta_ref);
    if (miss > 0.15) {
        throw ValidationError("(k, delta) inconsistent with (s0, theta0) by " +
                              std::to_string(miss) + " ueV");
    }
}

std::pair<double, double> derive_k_delta(double s0_ueV, double theta0_deg) {
    if (s0_ueV < 0.0) throw ValidationError("s0 must be non-negative");
    double two_theta = deg_to_rad(2.0 * theta0_deg);
    return {-s0_ueV * std::sin(two_theta) / 2.0, s0_ueV * std::cos(two_theta) / 2.0};
}

TuningParams tuning_from_s0_theta0(double s0_ueV, double theta0_deg, double alpha) {
    auto [k, delta] = derive_k_delta(s0_ueV, theta0_deg);
    return TuningParams{s0_ueV, mod180(theta0_deg), k, delta, alpha, 0.0};
}

std::pair<double, double> s0_theta0_from_k_delta(double k, double delta) {
    double s0 = 2.0 * std::hypot(k, delta);
    // sin(2 theta0) = -2k/s0, cos(2 theta0) = 2 delta/s0.
    double theta0 = (s0 > 0.0) ? mod180(rad_to_deg(0.5 * std::atan2(-k, delta))) : 0.0;
    return {s0, theta0};
}

std::pair<double, double> fss_and_angle(const TuningParams& params, double p) {
    double b = params.beta * p + params.k;
    double c = params.alpha * p + 2.0 * params.delta;
    double s = std::sqrt(4.0 * b * b + c * c);

    // Eigenvector of [[a, b], [b, -a]] (a = c/2) at +s/2, folded so that
    // theta(0) reproduces the observed high-energy angle theta0.
    double n = s / 2.0 - c / 2.0;
    double theta;
    if (n < 1e-12 && std::abs(b) < 1e-12) {
        theta = 0.0;  // degenerate point, angle undefined; pick the axis
    } else {
        theta = mod180(rad_to_deg(std::atan2(-n, b)));
    }
    return {s, theta};
}

double min_fss(const TuningParams& params) {
    if (params.beta != 0.0) {
        throw ValidationError("min_fss closed form requires beta = 0 (stress along [110]/[1-10])");
    }
    return 2.0 * std::abs(params.k);
}

double field_to_stress(const StressMap& map, double fp_kv_cm) {
    return map.stress_per_field * fp_kv_cm;
}

double energy_shift(const StressMap& map, double fp_kv_cm) {
    return map.energy_shift_per_field * fp_kv_cm;
}

bool field_in_device_range(double fp_kv_cm) {
    return fp_kv_cm >= kFieldMin && fp_kv_cm <= kFieldMax;
}

namespace {

// Residuals and analytic Jacobian for x = (k, delta, alpha), beta = 0.
void tuning_residuals(const std::vector<TuningSample>& samples, double stress_per_field,
                      const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
    const double k = x[0], delta = x[1], alpha = x[2];
    const auto m = static_cast<Eigen::Index>(samples.size());
    r.resize(2 * m);
    if (J != nullptr) J->setZero(2 * m, 3);

    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& smp = samples[static_cast<std::size_t>(i)];
        double p = stress_per_field * smp.fp;
        double b = k;
        double c = alpha * p + 2.0 * delta;
        double s = std::sqrt(std::max(4.0 * b * b + c * c, 1e-18));
        double n = s / 2.0 - c / 2.0;
        double theta = (n < 1e-12 && std::abs(b) < 1e-12)
                           ? 0.0
                           : mod180(rad_to_deg(std::atan2(-n, b)));

        double ws = 1.0 / std::max(smp.s_err, 1e-6);
        double wt = 1.0 / std::max(smp.theta_err, 1e-6);
        r[2 * i] = (s - smp.s) * ws;
        r[2 * i + 1] = wrap_axis_deg(theta - smp.theta) * wt;

        if (J == nullptr) continue;
        double ds_dk = 4.0 * b / s;
        double ds_dc = c / s;
        (*J)(2 * i, 0) = ds_dk * ws;
        (*J)(2 * i, 1) = ds_dc * 2.0 * ws;
        (*J)(2 * i, 2) = ds_dc * p * ws;

        // theta = -atan2(n, b) in radians (mod pi); n = (s - c)/2.
        double denom = n * n + b * b;
        if (denom < 1e-18) continue;
        double dn_dk = 0.5 * ds_dk;
        double dn_dc = 0.5 * (ds_dc - 1.0);
        double scale = rad_to_deg(1.0) / denom;
        (*J)(2 * i + 1, 0) = -(b * dn_dk - n * 1.0) * scale * wt;
        (*J)(2 * i + 1, 1) = -(b * dn_dc * 2.0) * scale * wt;
        (*J)(2 * i + 1, 2) = -(b * dn_dc * p) * scale * wt;
    }
}

}  // namespace

TuningFit fit_tuning_params(const std::vector<TuningSample>& samples, const StressMap& map) {
    if (samples.size() < 3) {
        throw ValidationError("tuning fit needs at least 3 samples, got " +
                              std::to_string(samples.size()));
    }

    // Deterministic start: (k, delta) from the sample nearest fp = 0,
    // |alpha| from the s slope between the two samples farthest from the
    // FSS minimum, both signs of (delta, alpha) tried.
    std::size_t i0 = 0, imin = 0;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        if (std::abs(samples[i].fp) < std::abs(samples[i0].fp)) i0 = i;
        if (samples[i].s < samples[imin].s) imin = i;
    }
    auto [k0, delta0] = derive_k_delta(samples[i0].s, samples[i0].theta);

    double pmin = map.stress_per_field * samples[imin].fp;
    std::size_t ia = 0, ib = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double d = std::abs(map.stress_per_field * samples[i].fp - pmin);
        if (d > std::abs(map.stress_per_field * samples[ia].fp - pmin)) {
            ib = ia;
            ia = i;
        } else if (i != ia && d > std::abs(map.stress_per_field * samples[ib].fp - pmin)) {
            ib = i;
        }
    }
    double dp = map.stress_per_field * (samples[ia].fp - samples[ib].fp);
    double alpha0 = (std::abs(dp) > 1e-9)
                        ? std::abs((samples[ia].s - samples[ib].s) / dp)
                        : 2.0;
    if (alpha0 < 1e-3) alpha0 = 2.0;

    auto fn = [&samples, &map](const Eigen::VectorXd& x, Eigen::VectorXd& r,
                               Eigen::MatrixXd* J) {
        tuning_residuals(samples, map.stress_per_field, x, r, J);
    };

    LeastSquaresResult best;
    bool have_best = false;
    for (double sign : {1.0, -1.0}) {
        Eigen::VectorXd x0(3);
        x0 << k0, sign * delta0, sign * alpha0;
        LeastSquaresResult res = levenberg_marquardt(fn, x0);
        if (!have_best || res.residual_norm < best.residual_norm) {
            best = res;
            have_best = true;
        }
    }

    TuningFit fit;
    fit.params.k = best.x[0];
    fit.params.delta = best.x[1];
    fit.params.alpha = best.x[2];
    fit.params.beta = 0.0;
    std::tie(fit.params.s0, fit.params.theta0) =
        s0_theta0_from_k_delta(fit.params.k, fit.params.delta);
    fit.k_err = std::sqrt(std::max(best.covariance(0, 0), 0.0));
    fit.delta_err = std::sqrt(std::max(best.covariance(1, 1), 0.0));
    fit.alpha_err = std::sqrt(std::max(best.covariance(2, 2), 0.0));

    // Propagate (k, delta) covariance to (s0, theta0).
    double k = fit.params.k, delta = fit.params.delta;
    double r2 = k * k + delta * delta;
    if (r2 > 1e-18) {
        double r1 = std::sqrt(r2);
        Eigen::RowVector2d gs(2.0 * k / r1, 2.0 * delta / r1);
        Eigen::RowVector2d gt(rad_to_deg(-0.5 * delta / r2), rad_to_deg(0.5 * k / r2));
        Eigen::Matrix2d cov_kd = best.covariance.topLeftCorner<2, 2>();
        fit.s0_err = std::sqrt(std::max((gs * cov_kd * gs.transpose())(0), 0.0));
        fit.theta0_err = std::sqrt(std::max((gt * cov_kd * gt.transpose())(0), 0.0));
    }
    fit.residual_norm = best.residual_norm;
    fit.iterations = best.iterations;
    fit.converged = best.converged;
    return fit;
}

}  // namespace seled
