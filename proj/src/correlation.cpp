#include "seled/correlation.hpp"

#include <algorithm>
#include <cmath>

#include "seled/errors.hpp"
#include "seled/optim.hpp"

namespace seled {

void CorrelationSet::validate() const {
    for (double c : {c_hv, c_da, c_rl}) {
        if (std::abs(c) > 1.0 + 1e-12) throw ValidationError("degree of correlation outside [-1,1]");
    }
    for (double s : {sigma_hv, sigma_da, sigma_rl}) {
        if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("correlation sigma must be finite and >= 0");
    }
}

void GateWindow::validate(double period_ns) const {
    if (width <= 0.0) throw ValidationError("gate width must be positive");
    if (width > period_ns + 1e-12) {
        throw ValidationError("gate width exceeds the repetition period");
    }
}

namespace {

// Center of the zero-delay peak: the counts-weighted centroid of the bins
// at or above 90% of the (lightly smoothed) peak maximum within half a
// period of nominal zero -- a sub-bin refinement of the peak maximum.
// Tracks the maximum rather than the full-window mean, which for the skewed
// cascade peak sits far into the exponential tail.
double central_peak_centroid(const std::vector<double>& counts,
                             const std::vector<double>& centers) {
    const std::size_t n = counts.size();
    if (n == 0) return 0.0;
    std::vector<double> smooth(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        int cnt = 0;
        for (int d = -2; d <= 2; ++d) {
            auto j = static_cast<long long>(i) + d;
            if (j >= 0 && j < static_cast<long long>(n)) {
                acc += counts[static_cast<std::size_t>(j)];
                ++cnt;
            }
        }
        smooth[i] = acc / cnt;
    }
    double peak = *std::max_element(smooth.begin(), smooth.end());
    if (peak <= 0.0) return 0.0;
    double w = 0.0, wt = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (smooth[i] >= 0.9 * peak) {
            w += counts[i];
            wt += counts[i] * centers[i];
        }
    }
    return (w > 0.0) ? wt / w : 0.0;
}

double peak_center_of(const CoincidenceHistogram& hist, double period_ns) {
    std::vector<double> counts, centers;
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        double c = hist.bin_center(i);
        if (std::abs(c) <= period_ns / 2.0) {
            counts.push_back(static_cast<double>(hist.counts[i]));
            centers.push_back(c);
        }
    }
    return central_peak_centroid(counts, centers);
}

}  // namespace

double shared_peak_center(const std::vector<CoincidenceHistogram>& hists, double period_ns) {
    if (hists.empty()) throw ValidationError("no histograms to center on");
    const auto& first = hists[0];
    for (const auto& h : hists) {
        if (h.bin_width != first.bin_width || h.origin != first.origin ||
            h.counts.size() != first.counts.size()) {
            throw ValidationError("histograms must share one bin layout to share a peak center");
        }
    }
    std::vector<double> counts, centers;
    for (std::size_t i = 0; i < first.counts.size(); ++i) {
        double c = first.bin_center(i);
        if (std::abs(c) <= period_ns / 2.0) {
            double total = 0.0;
            for (const auto& h : hists) total += static_cast<double>(h.counts[i]);
            counts.push_back(total);
            centers.push_back(c);
        }
    }
    return central_peak_centroid(counts, centers);
}

G2Result normalize_g2(const CoincidenceHistogram& hist, const GateWindow& gate,
                      double period_ns) {
    return normalize_g2(hist, gate, period_ns, peak_center_of(hist, period_ns));
}

G2Result normalize_g2(const CoincidenceHistogram& hist, const GateWindow& gate, double period_ns,
                      double center) {
    gate.validate(period_ns);
    double span = -hist.origin;
    if (span < 3.5 * period_ns - 1e-9) {
        throw ValidationError(
            "histogram must span at least 3.5 repetition periods on each side "
            "(side windows reach the +3 period peak)");
    }

    G2Result out;
    out.peak_center = center;
    out.zero_counts = hist.window_sum(out.peak_center, gate.half());

    // Two side peaks per side, skipping the peak at +1 period: the cascade's
    // exponential tail extends to positive delays and would contaminate it.
    double side_total = 0.0;
    int n_side = 0;
    for (int m : {-2, -1, 2, 3}) {
        double c = out.peak_center + static_cast<double>(m) * period_ns;
        side_total += static_cast<double>(hist.window_sum(c, gate.half()));
        ++n_side;
    }
    out.side_mean = side_total / n_side;
    if (side_total <= 0.0) {
        throw ComputationError("g2 normalization undefined: no side-peak counts");
    }

    double s = static_cast<double>(out.zero_counts);
    out.g2 = s / out.side_mean;
    double sigma_s = std::sqrt(std::max(s, 1.0));
    double sigma_b = std::sqrt(side_total) / n_side;
    out.sigma = std::sqrt(std::pow(sigma_s / out.side_mean, 2) +
                          std::pow(s * sigma_b / (out.side_mean * out.side_mean), 2));
    return out;
}

double degree_of_correlation(double g2_co, double g2_cross) {
    double denom = g2_co + g2_cross;
    if (denom <= 0.0) throw ValidationError("degree of correlation undefined: g2_co + g2_cross = 0");
    return (g2_co - g2_cross) / denom;
}

ValueWithError degree_of_correlation(const G2Result& co, const G2Result& cross) {
    ValueWithError out;
    out.value = degree_of_correlation(co.g2, cross.g2);
    double denom2 = std::pow(co.g2 + cross.g2, 2);
    out.sigma = 2.0 *
                std::sqrt(std::pow(cross.g2 * co.sigma, 2) + std::pow(co.g2 * cross.sigma, 2)) /
                denom2;
    return out;
}

CorrelationSet compute_correlations(const std::vector<CoincidenceHistogram>& hists,
                                    const GateWindow& gate, double period_ns) {
    if (hists.size() != 6) {
        throw ValidationError("expected the 6 correlation histograms (co/cross in HV, DA, RL)");
    }
    auto expected = correlation_settings();
    for (std::size_t i = 0; i < 6; ++i) {
        if (!(hists[i].setting == expected[i])) {
            throw ValidationError("histogram settings do not match the correlation layout");
        }
    }

    double center = shared_peak_center(hists, period_ns);
    CorrelationSet c;
    auto pair = [&](std::size_t co_idx) {
        return degree_of_correlation(normalize_g2(hists[co_idx], gate, period_ns, center),
                                     normalize_g2(hists[co_idx + 1], gate, period_ns, center));
    };
    ValueWithError hv = pair(0), da = pair(2), rl = pair(4);
    c.c_hv = hv.value;
    c.sigma_hv = hv.sigma;
    c.c_da = da.value;
    c.sigma_da = da.sigma;
    c.c_rl = rl.value;
    c.sigma_rl = rl.sigma;
    return c;
}

ValueWithError fidelity_from_correlations(const CorrelationSet& c) {
    c.validate();
    ValueWithError out;
    out.value = (1.0 + c.c_hv + c.c_da - c.c_rl) / 4.0;
    out.sigma = std::sqrt(c.sigma_hv * c.sigma_hv + c.sigma_da * c.sigma_da +
                          c.sigma_rl * c.sigma_rl) /
                4.0;
    return out;
}

BellParams bell_parameters(const CorrelationSet& c) {
    c.validate();
    const double rt2 = std::sqrt(2.0);
    BellParams b;
    b.s_rd = rt2 * (c.c_hv + c.c_da);
    b.s_rc = rt2 * (c.c_hv - c.c_rl);
    b.s_dc = rt2 * (c.c_da - c.c_rl);
    b.sigma_rd = rt2 * std::hypot(c.sigma_hv, c.sigma_da);
    b.sigma_rc = rt2 * std::hypot(c.sigma_hv, c.sigma_rl);
    b.sigma_dc = rt2 * std::hypot(c.sigma_da, c.sigma_rl);
    return b;
}

std::vector<GateScanRow> gate_scan(const std::vector<CoincidenceHistogram>& hists,
                                   const std::vector<GateWindow>& gates, double period_ns) {
    for (std::size_t i = 1; i < gates.size(); ++i) {
        if (gates[i].width > gates[i - 1].width) {
            throw ValidationError("gate scan expects gates sorted descending");
        }
    }

    // Full-period reference for the kept fraction, over all histograms.
    double center = shared_peak_center(hists, period_ns);
    double full_total = 0.0;
    for (const auto& h : hists) {
        full_total += static_cast<double>(h.window_sum(center, period_ns / 2.0));
    }

    std::vector<GateScanRow> rows;
    for (const auto& gate : gates) {
        GateScanRow row;
        row.gate = gate;
        row.correlations = compute_correlations(hists, gate, period_ns);
        row.fidelity = fidelity_from_correlations(row.correlations);
        row.bell = bell_parameters(row.correlations);
        double gated = 0.0;
        for (const auto& h : hists) {
            gated += static_cast<double>(h.window_sum(center, gate.half()));
        }
        row.kept_fraction = (full_total > 0.0) ? gated / full_total : 0.0;
        rows.push_back(row);
    }
    return rows;
}

LorentzianFit fit_lorentzian(const std::vector<FssScanPoint>& points) {
    if (points.size() < 3) {
        throw ValidationError("lorentzian fit needs at least 3 points, got " +
                              std::to_string(points.size()));
    }

    double ymin = points[0].fidelity, ymax = points[0].fidelity;
    for (const auto& p : points) {
        ymin = std::min(ymin, p.fidelity);
        ymax = std::max(ymax, p.fidelity);
    }

    auto fn = [&points](const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* J) {
        const double f_bg = x[0], A = x[1], w = x[2];
        const auto m = static_cast<Eigen::Index>(points.size());
        r.resize(m);
        if (J != nullptr) J->resize(m, 3);
        for (Eigen::Index i = 0; i < m; ++i) {
            const auto& p = points[static_cast<std::size_t>(i)];
            double sig = std::max(p.fidelity_err, 1e-4);
            double u = 2.0 * p.fss / w;
            double lor = 1.0 / (1.0 + u * u);
            r[i] = (f_bg + A * lor - p.fidelity) / sig;
            if (J != nullptr) {
                (*J)(i, 0) = 1.0 / sig;
                (*J)(i, 1) = lor / sig;
                (*J)(i, 2) = A * (2.0 * u * u / w) * lor * lor / sig;
            }
        }
    };

    Eigen::VectorXd x0(3);
    x0 << ymin, std::max(ymax - ymin, 1e-3), 3.0;
    LeastSquaresResult res = levenberg_marquardt(fn, x0);
    if (!res.converged) {
        throw ConvergenceError("lorentzian fit did not converge (residual " +
                               std::to_string(res.residual_norm) + ")");
    }

    LorentzianFit fit;
    fit.baseline = res.x[0];
    fit.amplitude = res.x[1];
    fit.fwhm = std::abs(res.x[2]);
    fit.peak = fit.baseline + fit.amplitude;
    fit.fwhm_err = std::sqrt(std::max(res.covariance(2, 2), 0.0));
    fit.converged = res.converged;
    return fit;
}

FssScanResult fidelity_vs_fss_scan(EmitterConfig emitter, const DriveConfig& drive,
                                   const DetectorConfig& det, const std::vector<double>& fss_grid,
                                   std::uint64_t n_pulses, std::uint64_t seed,
                                   const GateWindow& gate, const SimulationOptions& opts) {
    FssScanResult out;
    Rng root(seed);
    for (std::size_t i = 0; i < fss_grid.size(); ++i) {
        emitter.fss = fss_grid[i];
        auto hists = simulate(emitter, drive, det, correlation_settings(), n_pulses,
                              root.substream(i).next_u64(), opts);
        CorrelationSet c = compute_correlations(hists, gate, drive.period_ns());
        ValueWithError f = fidelity_from_correlations(c);
        out.points.push_back({fss_grid[i], f.value, f.sigma});
    }
    out.fit = fit_lorentzian(out.points);
    return out;
}

}  // namespace seled
