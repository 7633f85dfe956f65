#pragma once

#include <vector>

#include "seled/cascade.hpp"

namespace seled {

// Degrees of correlation in the three bases, with 1-sigma Poisson errors.
struct CorrelationSet {
    double c_hv = 0.0, c_da = 0.0, c_rl = 0.0;
    double sigma_hv = 0.0, sigma_da = 0.0, sigma_rl = 0.0;

    void validate() const;  // |c| <= 1, finite sigmas
};

struct BellParams {
    double s_rd = 0.0, s_rc = 0.0, s_dc = 0.0;
    double sigma_rd = 0.0, sigma_rc = 0.0, sigma_dc = 0.0;
};

// Temporal post-selection window of total width `width` ns, centered on the
// zero-delay peak centroid.
struct GateWindow {
    double width = 1.8;  // ns

    double half() const { return width / 2.0; }
    void validate(double period_ns) const;  // 0 < width <= period
};

struct ValueWithError {
    double value = 0.0;
    double sigma = 0.0;
};

struct G2Result {
    double g2 = 0.0;
    double sigma = 0.0;
    std::uint64_t zero_counts = 0;
    double side_mean = 0.0;
    double peak_center = 0.0;  // centroid used for the gate, ns
};

// Gate center pooled over several histograms: the counts-weighted centroid
// of the central-peak bins at or above 90% of the peak maximum. Pooling is
// needed because a cross-polarized histogram alone can be nearly empty and
// its own centroid meaningless; all gates of one measurement share this
// center, which tracks the peak maximum rather than the skewed full-window
// mean.
double shared_peak_center(const std::vector<CoincidenceHistogram>& hists, double period_ns);

// Gated zero-peak counts normalized by the mean over four side peaks (two
// per side, at -2, -1, +2 and +3 periods; the +1 peak is skipped because
// the cascade's exponential tail contaminates it) gated at the same width.
// Throws ValidationError when the histogram spans less than 3.5 periods per
// side, and ComputationError when all side-peak counts are zero. The
// overload without `center` uses the histogram's own zero-peak centroid.
G2Result normalize_g2(const CoincidenceHistogram& hist, const GateWindow& gate, double period_ns);
G2Result normalize_g2(const CoincidenceHistogram& hist, const GateWindow& gate, double period_ns,
                      double center);

double degree_of_correlation(double g2_co, double g2_cross);
ValueWithError degree_of_correlation(const G2Result& co, const G2Result& cross);

// Correlations from the six histograms in correlation_settings() order.
CorrelationSet compute_correlations(const std::vector<CoincidenceHistogram>& hists,
                                    const GateWindow& gate, double period_ns);

// f+ = (1 + C_HV + C_DA - C_RL)/4, quadrature-propagated error.
ValueWithError fidelity_from_correlations(const CorrelationSet& c);

// S_RD = sqrt(2)(C_HV + C_DA), S_RC = sqrt(2)(C_HV - C_RL),
// S_DC = sqrt(2)(C_DA - C_RL).
BellParams bell_parameters(const CorrelationSet& c);

struct GateScanRow {
    GateWindow gate;
    CorrelationSet correlations;
    ValueWithError fidelity;
    BellParams bell;
    double kept_fraction = 0.0;  // gated / full-period zero-peak coincidences
};

// Per-gate analysis over the same histograms; gates sorted descending.
std::vector<GateScanRow> gate_scan(const std::vector<CoincidenceHistogram>& hists,
                                   const std::vector<GateWindow>& gates, double period_ns);

struct LorentzianFit {
    double peak = 0.0;      // f_bg + amplitude, the s=0 fidelity
    double fwhm = 0.0;      // ueV
    double baseline = 0.0;  // f_bg
    double amplitude = 0.0;
    double fwhm_err = 0.0;
    bool converged = false;
};

struct FssScanPoint {
    double fss = 0.0;
    double fidelity = 0.0;
    double fidelity_err = 0.0;
};

struct FssScanResult {
    std::vector<FssScanPoint> points;
    LorentzianFit fit;
};

// f(s) = f_bg + A / (1 + (2s/w)^2) over fidelity measurements; >= 3 points.
LorentzianFit fit_lorentzian(const std::vector<FssScanPoint>& points);

// Simulate + analyze at each FSS on the grid (emitter.fss is overridden per
// point), then fit the Lorentzian. Seeds derive per grid point.
FssScanResult fidelity_vs_fss_scan(EmitterConfig emitter, const DriveConfig& drive,
                                   const DetectorConfig& det, const std::vector<double>& fss_grid,
                                   std::uint64_t n_pulses, std::uint64_t seed,
                                   const GateWindow& gate, const SimulationOptions& opts = {});

}  // namespace seled
