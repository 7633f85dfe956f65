#include "seled/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "seled/constants.hpp"
#include "seled/errors.hpp"

namespace seled {

void EmitterConfig::validate() const {
    auto prob = [](double p, const char* name) {
        if (p < 0.0 || p > 1.0) throw ValidationError(std::string(name) + " must lie in [0,1]");
    };
    prob(pair_prob, "pair_prob");
    prob(background_frac, "background_frac");
    prob(reexcite_prob, "reexcite_prob");
    if (tau_xx <= 0.0 || tau_x <= 0.0) throw ValidationError("lifetimes must be positive");
    if (fss < 0.0) throw ValidationError("fss must be non-negative");
    if (bright_coupling < 0.0) throw ValidationError("bright_coupling must be non-negative");
}

void DriveConfig::validate() const {
    if (rep_rate_mhz <= 0.0) throw ValidationError("rep_rate must be positive");
    if (pulse_width < 0.0) throw ValidationError("pulse_width must be non-negative");
    if (period_ns() <= pulse_width) {
        throw ValidationError("repetition period must exceed the pulse width");
    }
}

void DetectorConfig::validate() const {
    if (jitter_sigma < 0.0) throw ValidationError("jitter_sigma must be non-negative");
    if (efficiency < 0.0 || efficiency > 1.0) throw ValidationError("efficiency must lie in [0,1]");
}

std::uint64_t CoincidenceHistogram::total() const {
    std::uint64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

std::uint64_t CoincidenceHistogram::window_sum(double center, double half_width) const {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (std::abs(bin_center(i) - center) <= half_width) t += counts[i];
    }
    return t;
}

double CoincidenceHistogram::centroid(double center, double half_width) const {
    double w = 0.0, wt = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        double c = bin_center(i);
        if (std::abs(c - center) <= half_width) {
            w += static_cast<double>(counts[i]);
            wt += static_cast<double>(counts[i]) * c;
        }
    }
    return (w > 0.0) ? wt / w : center;
}

void CoincidenceHistogram::merge(const CoincidenceHistogram& other) {
    if (!(setting == other.setting) || counts.size() != other.counts.size() ||
        bin_width != other.bin_width || origin != other.origin) {
        throw ValidationError("cannot merge histograms with different layouts");
    }
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    n_pulses += other.n_pulses;
}

double analytic_fidelity(double fss_ueV, double tau_x_ns, double background_frac) {
    if (tau_x_ns <= 0.0) throw ValidationError("tau_x must be positive");
    double x = fss_ueV * tau_x_ns / hbar();
    double f_signal = 0.5 * (1.0 + 1.0 / (1.0 + x * x));
    return (1.0 - background_frac) * f_signal + background_frac * 0.25;
}

std::vector<MeasurementSetting> correlation_settings() {
    return {co_setting(Pol::H), cross_setting(Pol::H), co_setting(Pol::D),
            cross_setting(Pol::D), co_setting(Pol::R), cross_setting(Pol::R)};
}

namespace {

struct Ket2 {
    Complex h, v;
};

Ket2 to_ket2(Pol p) {
    PolarizationKet k = PolarizationKet::basis(p);
    return {k.amp_h, k.amp_v};
}

Ket2 orthogonal(const Ket2& k) { return {-std::conj(k.v), std::conj(k.h)}; }

Ket2 haar_random_ket(Rng& rng) {
    Complex h(rng.gaussian(), rng.gaussian());
    Complex v(rng.gaussian(), rng.gaussian());
    double n = std::sqrt(std::norm(h) + std::norm(v));
    if (n < 1e-12) return {1.0, 0.0};
    return {h / n, v / n};
}

// One pulse worth of emission for one pair; appends detection times.
struct ShardContext {
    const EmitterConfig* em;
    const DriveConfig* drive;
    const DetectorConfig* det;
    Ket2 k1, k1p, k2;  // monitored XX channel, its partner, monitored X channel
    std::vector<double>* xx_times;
    std::vector<double>* x_times;
};

void emit_pair(const ShardContext& ctx, Rng& rng, double t_start, bool uncorrelated) {
    const EmitterConfig& em = *ctx.em;
    double t_xx = t_start + rng.exponential(em.tau_xx);
    double dt = rng.exponential(em.tau_x);
    double t_x = t_xx + dt;

    double p1, p2;
    if (uncorrelated) {
        Ket2 a = haar_random_ket(rng);
        Ket2 b = haar_random_ket(rng);
        p1 = std::norm(std::conj(ctx.k1.h) * a.h + std::conj(ctx.k1.v) * a.v);
        p2 = std::norm(std::conj(ctx.k2.h) * b.h + std::conj(ctx.k2.v) * b.v);
        bool in_k1 = rng.bernoulli(p1);
        if (in_k1 && rng.bernoulli(ctx.det->efficiency)) {
            ctx.xx_times->push_back(t_xx + rng.gaussian(0.0, ctx.det->jitter_sigma));
        }
        if (rng.bernoulli(p2) && rng.bernoulli(ctx.det->efficiency)) {
            ctx.x_times->push_back(t_x + rng.gaussian(0.0, ctx.det->jitter_sigma));
        }
        return;
    }

    // (|HH> + e^{i phi}|VV>)/sqrt(2) with the phase accumulated over the X delay.
    double phi = em.psi_phase0 + em.fss * dt / hbar();
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    Complex a00(inv_sqrt2, 0.0);
    Complex a01(0.0, 0.0), a10(0.0, 0.0);
    Complex a11 = std::polar(inv_sqrt2, phi);

    if (em.bright_coupling > 0.0) {
        // Random rotation of the X photon's linear basis; leaves circular
        // populations untouched, damps the linear-basis correlations.
        double eta = rng.gaussian(0.0, em.bright_coupling);
        double c = std::cos(eta), s = std::sin(eta);
        Complex b00 = c * a00 - s * a01;
        Complex b01 = s * a00 + c * a01;
        Complex b10 = c * a10 - s * a11;
        Complex b11 = s * a10 + c * a11;
        a00 = b00; a01 = b01; a10 = b10; a11 = b11;
    }

    // Project the XX photon on the monitored channel.
    Complex w0 = std::conj(ctx.k1.h) * a00 + std::conj(ctx.k1.v) * a10;
    Complex w1 = std::conj(ctx.k1.h) * a01 + std::conj(ctx.k1.v) * a11;
    p1 = std::norm(w0) + std::norm(w1);

    bool in_k1 = rng.bernoulli(p1);
    Complex c0, c1;  // conditional X state (unnormalized)
    if (in_k1) {
        c0 = w0;
        c1 = w1;
    } else {
        c0 = std::conj(ctx.k1p.h) * a00 + std::conj(ctx.k1p.v) * a10;
        c1 = std::conj(ctx.k1p.h) * a01 + std::conj(ctx.k1p.v) * a11;
    }
    double cn = std::norm(c0) + std::norm(c1);
    p2 = (cn > 1e-300) ? std::norm(std::conj(ctx.k2.h) * c0 + std::conj(ctx.k2.v) * c1) / cn : 0.0;

    if (in_k1 && rng.bernoulli(ctx.det->efficiency)) {
        ctx.xx_times->push_back(t_xx + rng.gaussian(0.0, ctx.det->jitter_sigma));
    }
    if (rng.bernoulli(p2) && rng.bernoulli(ctx.det->efficiency)) {
        ctx.x_times->push_back(t_x + rng.gaussian(0.0, ctx.det->jitter_sigma));
    }
}

CoincidenceHistogram simulate_shard(const EmitterConfig& em, const DriveConfig& drive,
                                    const DetectorConfig& det, const MeasurementSetting& setting,
                                    std::uint64_t pulse_lo, std::uint64_t pulse_hi, Rng rng,
                                    const SimulationOptions& opts) {
    const double period = drive.period_ns();
    const double window = static_cast<double>(opts.n_side_periods) * period;

    CoincidenceHistogram hist;
    hist.setting = setting;
    hist.bin_width = opts.bin_width;
    hist.origin = -window;
    hist.counts.assign(static_cast<std::size_t>(std::ceil(2.0 * window / opts.bin_width)), 0);
    hist.n_pulses = pulse_hi - pulse_lo;

    std::vector<double> xx_times, x_times;
    const double expected = static_cast<double>(pulse_hi - pulse_lo) * em.pair_prob * 0.5;
    xx_times.reserve(static_cast<std::size_t>(expected) + 16);
    x_times.reserve(static_cast<std::size_t>(expected) + 16);

    ShardContext ctx{&em, &drive, &det,
                     to_ket2(setting.xx), orthogonal(to_ket2(setting.xx)), to_ket2(setting.x),
                     &xx_times, &x_times};

    for (std::uint64_t i = pulse_lo; i < pulse_hi; ++i) {
        double t0 = static_cast<double>(i) * period;
        if (rng.bernoulli(em.pair_prob)) {
            double offset = (drive.pulse_width > 0.0) ? rng.uniform(0.0, drive.pulse_width) : 0.0;
            bool bg = em.background_frac > 0.0 && rng.bernoulli(em.background_frac);
            emit_pair(ctx, rng, t0 + offset, bg);
        }
        if (em.reexcite_prob > 0.0 && rng.bernoulli(em.reexcite_prob)) {
            // Re-excited pair: uncorrelated polarization, start spread over the period.
            emit_pair(ctx, rng, t0 + rng.uniform(0.0, period), true);
        }
    }

    std::sort(xx_times.begin(), xx_times.end());
    std::sort(x_times.begin(), x_times.end());

    std::size_t lo = 0;
    const double nbins = static_cast<double>(hist.counts.size());
    for (double tx : x_times) {
        while (lo < xx_times.size() && xx_times[lo] < tx - window) ++lo;
        for (std::size_t j = lo; j < xx_times.size() && xx_times[j] <= tx + window; ++j) {
            double delay = tx - xx_times[j];
            double b = (delay - hist.origin) / hist.bin_width;
            if (b >= 0.0 && b < nbins) {
                ++hist.counts[static_cast<std::size_t>(b)];
            }
        }
    }
    return hist;
}

}  // namespace

std::vector<CoincidenceHistogram> simulate(const EmitterConfig& emitter, const DriveConfig& drive,
                                           const DetectorConfig& det,
                                           const std::vector<MeasurementSetting>& settings,
                                           std::uint64_t n_pulses, std::uint64_t seed,
                                           const SimulationOptions& opts) {
    emitter.validate();
    drive.validate();
    det.validate();
    if (n_pulses < 1) throw ValidationError("n_pulses must be at least 1");
    if (settings.empty()) throw ValidationError("at least one measurement setting is required");
    if (opts.n_shards < 1) throw ValidationError("n_shards must be at least 1");

    Rng root(seed);
    std::vector<CoincidenceHistogram> out;
    out.reserve(settings.size());

    for (std::size_t si = 0; si < settings.size(); ++si) {
        Rng stream = root.substream(si);
        const auto shards = static_cast<std::uint64_t>(opts.n_shards);
        std::vector<std::future<CoincidenceHistogram>> futures;
        std::vector<CoincidenceHistogram> parts(shards);

        auto run_shard = [&](std::uint64_t sh) {
            std::uint64_t lo = n_pulses * sh / shards;
            std::uint64_t hi = n_pulses * (sh + 1) / shards;
            return simulate_shard(emitter, drive, det, settings[si], lo, hi,
                                  stream.substream(sh), opts);
        };

        if (opts.threads > 1 && shards > 1) {
            for (std::uint64_t sh = 0; sh < shards; ++sh) {
                futures.push_back(std::async(std::launch::async, run_shard, sh));
            }
            for (std::uint64_t sh = 0; sh < shards; ++sh) parts[sh] = futures[sh].get();
        } else {
            for (std::uint64_t sh = 0; sh < shards; ++sh) parts[sh] = run_shard(sh);
        }

        CoincidenceHistogram merged = std::move(parts[0]);
        for (std::uint64_t sh = 1; sh < shards; ++sh) merged.merge(parts[sh]);
        out.push_back(std::move(merged));
    }
    return out;
}

}  // namespace seled
