#include "seled/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seled/optim.hpp"
#include "seled/rng.hpp"

namespace seled {

std::vector<MeasurementSetting> canonical_settings() {
    using P = Pol;
    return {
        {P::H, P::H}, {P::H, P::V}, {P::V, P::V}, {P::V, P::H},
        {P::R, P::H}, {P::R, P::V}, {P::D, P::V}, {P::D, P::H},
        {P::D, P::R}, {P::D, P::D}, {P::R, P::D}, {P::H, P::D},
        {P::V, P::D}, {P::V, P::L}, {P::H, P::L}, {P::R, P::L},
    };
}

void validate_records(const std::vector<TomographyRecord>& records) {
    auto canonical = canonical_settings();
    if (records.size() != canonical.size()) {
        throw ValidationError("expected 16 tomography records, got " +
                              std::to_string(records.size()));
    }
    for (const auto& want : canonical) {
        int found = 0;
        for (const auto& rec : records) {
            if (rec.setting == want) ++found;
        }
        if (found != 1) {
            throw ValidationError(std::string("setting (") + pol_name(want.xx) + "," +
                                  pol_name(want.x) + ") appears " + std::to_string(found) +
                                  " times in the record set");
        }
    }
    for (const auto& rec : records) {
        if (!(rec.acquisition_weight > 0.0)) {
            throw ValidationError("acquisition weights must be positive");
        }
    }
}

namespace {

// Hermitian basis: 4 diagonal units, then (re, im) units per off-diagonal.
std::array<Eigen::Matrix4cd, 16> hermitian_basis() {
    std::array<Eigen::Matrix4cd, 16> basis;
    int idx = 0;
    for (int k = 0; k < 4; ++k) {
        basis[idx] = Eigen::Matrix4cd::Zero();
        basis[idx](k, k) = 1.0;
        ++idx;
    }
    for (int k = 0; k < 4; ++k) {
        for (int l = k + 1; l < 4; ++l) {
            Eigen::Matrix4cd re = Eigen::Matrix4cd::Zero();
            re(k, l) = 1.0;
            re(l, k) = 1.0;
            basis[idx++] = re;
            Eigen::Matrix4cd im = Eigen::Matrix4cd::Zero();
            im(k, l) = Complex(0.0, 1.0);
            im(l, k) = Complex(0.0, -1.0);
            basis[idx++] = im;
        }
    }
    return basis;
}

// Counts-per-unit-weight total of the rectilinear complete block, the
// frequency normalization shared by inversion and likelihood seeding.
double rectilinear_scale(const std::vector<TomographyRecord>& records) {
    double total = 0.0;
    for (const auto& rec : records) {
        bool rect = (rec.setting.xx == Pol::H || rec.setting.xx == Pol::V) &&
                    (rec.setting.x == Pol::H || rec.setting.x == Pol::V);
        if (rect) total += static_cast<double>(rec.counts) / rec.acquisition_weight;
    }
    return total;
}

}  // namespace

Eigen::Matrix4cd linear_inversion(const std::vector<TomographyRecord>& records) {
    validate_records(records);
    double scale = rectilinear_scale(records);
    if (scale <= 0.0) throw ValidationError("tomography records have zero total counts");

    auto basis = hermitian_basis();
    Eigen::MatrixXd A(16, 16);
    Eigen::VectorXd f(16);
    for (int i = 0; i < 16; ++i) {
        const auto& rec = records[static_cast<std::size_t>(i)];
        Eigen::Vector4cd v = setting_vector(rec.setting);
        for (int j = 0; j < 16; ++j) {
            A(i, j) = (v.adjoint() * basis[static_cast<std::size_t>(j)] * v)(0).real();
        }
        f[i] = static_cast<double>(rec.counts) / (rec.acquisition_weight * scale);
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < 16) {
        throw ComputationError("tomography design matrix is rank deficient");
    }
    Eigen::VectorXd x = qr.solve(f);

    Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
    for (int j = 0; j < 16; ++j) rho += x[j] * basis[static_cast<std::size_t>(j)];
    double tr = rho.trace().real();
    if (std::abs(tr) < 1e-12) throw ComputationError("linear inversion produced zero trace");
    return rho / tr;
}

namespace {

Eigen::Matrix4cd rho_from_cholesky(const Eigen::VectorXd& t) {
    Eigen::Matrix4cd T = Eigen::Matrix4cd::Zero();
    T(0, 0) = t[0];
    T(1, 1) = t[1];
    T(2, 2) = t[2];
    T(3, 3) = t[3];
    T(1, 0) = Complex(t[4], t[5]);
    T(2, 0) = Complex(t[6], t[7]);
    T(2, 1) = Complex(t[8], t[9]);
    T(3, 0) = Complex(t[10], t[11]);
    T(3, 1) = Complex(t[12], t[13]);
    T(3, 2) = Complex(t[14], t[15]);
    Eigen::Matrix4cd rho = T * T.adjoint();
    double tr = rho.trace().real();
    if (tr < 1e-300) {
        return Eigen::Matrix4cd::Identity() * 0.25;
    }
    return rho / tr;
}

}  // namespace

MleResult mle_reconstruct(const std::vector<TomographyRecord>& records) {
    validate_records(records);

    // Seed from linear inversion projected to the PSD cone.
    Eigen::Matrix4cd seed = linear_inversion(records);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(seed);
    Eigen::Vector4d ev = es.eigenvalues().cwiseMax(1e-6);
    ev /= ev.sum();
    Eigen::Matrix4cd psd = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();

    Eigen::LLT<Eigen::Matrix4cd> llt(psd);
    Eigen::Matrix4cd L = llt.matrixL();
    Eigen::VectorXd t0(16);
    t0 << L(0, 0).real(), L(1, 1).real(), L(2, 2).real(), L(3, 3).real(),
        L(1, 0).real(), L(1, 0).imag(), L(2, 0).real(), L(2, 0).imag(),
        L(2, 1).real(), L(2, 1).imag(), L(3, 0).real(), L(3, 0).imag(),
        L(3, 1).real(), L(3, 1).imag(), L(3, 2).real(), L(3, 2).imag();

    std::array<Eigen::Vector4cd, 16> vs;
    Eigen::VectorXd counts(16), weights(16);
    for (int i = 0; i < 16; ++i) {
        const auto& rec = records[static_cast<std::size_t>(i)];
        vs[static_cast<std::size_t>(i)] = setting_vector(rec.setting);
        counts[i] = static_cast<double>(rec.counts);
        weights[i] = rec.acquisition_weight;
    }
    const double total_counts = counts.sum();

    // Negative Poisson log-likelihood with the global rate profiled out:
    // N* = sum(c) / sum(w p).
    auto nll = [&](const Eigen::VectorXd& t) {
        Eigen::Matrix4cd rho = rho_from_cholesky(t);
        Eigen::VectorXd p(16);
        for (int i = 0; i < 16; ++i) {
            double pi = (vs[static_cast<std::size_t>(i)].adjoint() * rho *
                         vs[static_cast<std::size_t>(i)])(0)
                            .real();
            p[i] = std::max(pi, 1e-12);
        }
        double denom = weights.dot(p);
        double n_star = total_counts / std::max(denom, 1e-300);
        double out = 0.0;
        for (int i = 0; i < 16; ++i) {
            double mu = n_star * weights[i] * p[i];
            out += mu - counts[i] * std::log(mu);
        }
        return out;
    };

    MinimizeOptions opts;
    opts.max_iterations = 500;
    opts.gradient_tolerance = 1e-8 * std::max(total_counts, 1.0);
    MinimizeResult res = bfgs_minimize(nll, t0, opts);

    return MleResult{DensityMatrix4(rho_from_cholesky(res.x)), -res.value, res.iterations,
                     res.converged};
}

std::vector<TomographyRecord> tomography_from_histograms(
    const std::vector<CoincidenceHistogram>& hists, const GateWindow& gate, double period_ns) {
    gate.validate(period_ns);
    double center = shared_peak_center(hists, period_ns);
    std::vector<TomographyRecord> records;
    std::string missing;
    for (const auto& setting : canonical_settings()) {
        const CoincidenceHistogram* found = nullptr;
        for (const auto& h : hists) {
            if (h.setting == setting) {
                found = &h;
                break;
            }
        }
        if (found == nullptr) {
            missing += std::string(" (") + pol_name(setting.xx) + "," + pol_name(setting.x) + ")";
            continue;
        }
        records.push_back({setting, found->window_sum(center, gate.half()), 1.0});
    }
    if (!missing.empty()) {
        throw ValidationError("missing tomography settings:" + missing);
    }
    return records;
}

std::vector<TomographyRecord> sample_counts(const DensityMatrix4& rho,
                                            double mean_counts_per_setting, std::uint64_t seed) {
    if (mean_counts_per_setting <= 0.0) {
        throw ValidationError("mean_counts_per_setting must be positive");
    }
    Rng rng(seed);
    std::vector<TomographyRecord> records;
    for (const auto& setting : canonical_settings()) {
        double mu = mean_counts_per_setting * projection_probability(rho, setting);
        double draw;
        if (mu < 30.0) {
            // Knuth's method for small means.
            double limit = std::exp(-mu), prod = rng.uniform();
            draw = 0.0;
            while (prod > limit) {
                prod *= rng.uniform();
                draw += 1.0;
            }
        } else {
            draw = std::round(rng.gaussian(mu, std::sqrt(mu)));
        }
        records.push_back({setting, static_cast<std::uint64_t>(std::max(draw, 0.0)), 1.0});
    }
    return records;
}

double trace_distance(const Eigen::Matrix4cd& a, const Eigen::Matrix4cd& b) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(a - b, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace seled
