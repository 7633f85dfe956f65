#pragma once

#include <cstdint>
#include <vector>

#include "seled/quantum.hpp"
#include "seled/rng.hpp"

namespace seled {

struct EmitterConfig {
    double fss = 0.0;              // ueV
    double tau_xx = 0.5;           // ns; not stated in the source device, typical InGaAs value
    double tau_x = 1.0;            // ns
    double pair_prob = 0.1;        // pairs per pulse
    double background_frac = 0.0;  // fraction of pairs with uncorrelated polarization
    double reexcite_prob = 0.0;    // probability of a second, uncorrelated pair per pulse
    double psi_phase0 = 0.0;       // static phase phi_0, radians
    double bright_coupling = 0.0;  // rad; sigma of a random linear-basis rotation of the
                                   // X photon (phenomenological, off by default)

    void validate() const;
};

struct DriveConfig {
    double rep_rate_mhz = 185.2;
    double pulse_width = 0.3;  // ns

    double period_ns() const { return 1000.0 / rep_rate_mhz; }
    void validate() const;  // rejects period <= pulse width
};

struct DetectorConfig {
    // Per-detector Gaussian timing sigma. The default pair gives a combined
    // (quadrature-summed) system response of 0.4 ns on the XX-X delay.
    double jitter_sigma = 0.4 / 1.4142135623730951;
    double efficiency = 1.0;

    void validate() const;
};

struct CoincidenceHistogram {
    MeasurementSetting setting{Pol::H, Pol::H};
    double bin_width = 0.05;  // ns
    double origin = 0.0;      // left edge of bin 0, ns
    std::vector<std::uint64_t> counts;
    std::uint64_t n_pulses = 0;

    double bin_center(std::size_t i) const {
        return origin + (static_cast<double>(i) + 0.5) * bin_width;
    }
    std::uint64_t total() const;

    // Sum of counts with |bin_center - center| <= half_width.
    std::uint64_t window_sum(double center, double half_width) const;

    // Counts-weighted centroid of bin centers within +-half_width of
    // `center`; returns `center` itself when the window is empty.
    double centroid(double center, double half_width) const;

    // Element-wise add; bins and setting must match.
    void merge(const CoincidenceHistogram& other);
};

struct SimulationOptions {
    double bin_width = 0.05;  // ns
    int n_side_periods = 4;   // histogram window is +- n_side_periods * period
    int n_shards = 1;         // pulse-range shards; results merge deterministically
    int threads = 1;
};

// Seeded Monte Carlo of the pulsed XX-X cascade. One histogram per setting;
// settings are acquired sequentially, each over n_pulses pulses, with
// independent substreams derived from (seed, setting index, shard index).
// Deterministic for fixed (configs, seed, n_shards).
std::vector<CoincidenceHistogram> simulate(const EmitterConfig& emitter,
                                           const DriveConfig& drive,
                                           const DetectorConfig& det,
                                           const std::vector<MeasurementSetting>& settings,
                                           std::uint64_t n_pulses, std::uint64_t seed,
                                           const SimulationOptions& opts = {});

// Closed-form time-averaged fidelity over the exponential X decay:
//   f = (1-b) * (1 + 1/(1 + (s tau_x / hbar)^2)) / 2 + b/4.
// Oracle for the Monte Carlo chain at full acceptance window, no jitter.
double analytic_fidelity(double fss_ueV, double tau_x_ns, double background_frac);

// The six co/cross settings (H,H),(H,V),(D,D),(D,A),(R,R),(R,L) used by the
// degree-of-correlation pipeline.
std::vector<MeasurementSetting> correlation_settings();

}  // namespace seled
