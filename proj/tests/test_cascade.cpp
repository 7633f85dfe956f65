#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "seled/cascade.hpp"
#include "seled/constants.hpp"
#include "seled/correlation.hpp"

using namespace seled;

namespace {

EmitterConfig clean_emitter(double fss) {
    EmitterConfig em;
    em.fss = fss;
    em.pair_prob = 0.2;
    return em;
}

DetectorConfig no_jitter() {
    DetectorConfig det;
    det.jitter_sigma = 0.0;
    return det;
}

// Same-pulse coincidence counts: a tight window around the skewed cascade
// peak, excluding the exponential tails of neighboring-pulse accidentals.
std::uint64_t zero_peak(const CoincidenceHistogram& h) { return h.window_sum(0.5, 0.9); }

}  // namespace

TEST_CASE("physical constant and the closed-form fidelity") {
    CHECK(hbar() == 0.6582119569);
    CHECK(analytic_fidelity(0.0, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(analytic_fidelity(1e9, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(analytic_fidelity(hbar(), 1.0, 0.0) == doctest::Approx(0.75).epsilon(1e-12));
    // Fully uncorrelated background floor.
    CHECK(analytic_fidelity(0.0, 1.0, 1.0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS(analytic_fidelity(1.0, 0.0, 0.0), ValidationError);
}

TEST_CASE("configuration validation") {
    EmitterConfig em;
    em.pair_prob = 1.5;
    CHECK_THROWS_AS(em.validate(), ValidationError);
    em.pair_prob = 0.1;
    em.tau_x = 0.0;
    CHECK_THROWS_AS(em.validate(), ValidationError);

    DriveConfig slow;
    slow.rep_rate_mhz = 4000.0;  // period 0.25 ns < pulse width 0.3 ns
    CHECK_THROWS_AS(slow.validate(), ValidationError);
    CHECK(DriveConfig{}.period_ns() == doctest::Approx(5.39957).epsilon(1e-4));
    DriveConfig fast;
    fast.rep_rate_mhz = 400.0;
    CHECK(fast.period_ns() == doctest::Approx(2.5).epsilon(1e-12));

    DetectorConfig det;
    det.efficiency = 1.2;
    CHECK_THROWS_AS(det.validate(), ValidationError);

    CHECK_THROWS_AS(simulate(clean_emitter(0.0), DriveConfig{}, DetectorConfig{}, {}, 10, 1),
                    ValidationError);
    CHECK_THROWS_AS(
        simulate(clean_emitter(0.0), DriveConfig{}, DetectorConfig{}, {{Pol::H, Pol::H}}, 0, 1),
        ValidationError);
}

TEST_CASE("identical seeds give bit-identical histograms") {
    auto a = simulate(clean_emitter(1.5), DriveConfig{}, DetectorConfig{}, correlation_settings(),
                      20000, 42);
    auto b = simulate(clean_emitter(1.5), DriveConfig{}, DetectorConfig{}, correlation_settings(),
                      20000, 42);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].counts == b[i].counts);
        CHECK(a[i].n_pulses == b[i].n_pulses);
    }
}

TEST_CASE("thread count does not affect results at fixed shard count") {
    SimulationOptions serial;
    serial.n_shards = 4;
    serial.threads = 1;
    SimulationOptions parallel = serial;
    parallel.threads = 4;
    auto a = simulate(clean_emitter(1.0), DriveConfig{}, DetectorConfig{}, {{Pol::H, Pol::H}},
                      50000, 7, serial);
    auto b = simulate(clean_emitter(1.0), DriveConfig{}, DetectorConfig{}, {{Pol::H, Pol::H}},
                      50000, 7, parallel);
    CHECK(a[0].counts == b[0].counts);
}

TEST_CASE("different seeds agree in totals within Poisson statistics") {
    auto a = simulate(clean_emitter(1.0), DriveConfig{}, DetectorConfig{}, {{Pol::H, Pol::H}},
                      100000, 1);
    auto b = simulate(clean_emitter(1.0), DriveConfig{}, DetectorConfig{}, {{Pol::H, Pol::H}},
                      100000, 2);
    double ta = static_cast<double>(a[0].total());
    double tb = static_cast<double>(b[0].total());
    CHECK(std::abs(ta - tb) <= 5.0 * std::sqrt(ta + tb));
}

TEST_CASE("zero splitting sends all rectilinear pairs to the co-polarized channel") {
    auto hists = simulate(clean_emitter(0.0), DriveConfig{}, no_jitter(),
                          {{Pol::H, Pol::H}, {Pol::H, Pol::V}}, 100000, 5);
    CHECK(zero_peak(hists[0]) > 3000);
    CHECK(zero_peak(hists[1]) < zero_peak(hists[0]) / 100);
}

TEST_CASE("zero splitting anti-correlates the circular basis") {
    auto hists = simulate(clean_emitter(0.0), DriveConfig{}, no_jitter(),
                          {{Pol::R, Pol::R}, {Pol::R, Pol::L}}, 100000, 6);
    CHECK(zero_peak(hists[1]) > 3000);
    CHECK(zero_peak(hists[0]) < zero_peak(hists[1]) / 100);
}

TEST_CASE("side peaks recur at the repetition period") {
    for (double rate : {185.2, 400.0}) {
        DriveConfig drive;
        drive.rep_rate_mhz = rate;
        EmitterConfig em = clean_emitter(0.0);
        if (rate > 300.0) {
            em.tau_xx = 0.15;
            em.tau_x = 0.3;
        }
        auto hists = simulate(em, drive, no_jitter(), {{Pol::H, Pol::H}}, 400000, 8);
        double period = drive.period_ns();
        // Coincidences between photons from different pulses are identically
        // distributed for every pulse separation m, so the windows around
        // m * period must agree both in counts and in centroid offset.
        // The +1 window is skipped: the same-pulse exponential tail leaks in.
        std::vector<double> sums, offsets;
        for (double m : {-3.0, -2.0, 2.0, 3.0}) {
            double s = static_cast<double>(hists[0].window_sum(m * period, 0.45 * period));
            CHECK(s > 100.0);
            sums.push_back(s);
            offsets.push_back(hists[0].centroid(m * period, 0.45 * period) - m * period);
        }
        for (std::size_t i = 1; i < sums.size(); ++i) {
            CHECK(std::abs(sums[i] - sums[0]) <= 5.0 * std::sqrt(sums[i] + sums[0]));
            CHECK(std::abs(offsets[i] - offsets[0]) < 4.0 * hists[0].bin_width);
        }
        // The same-pulse peak dominates every side peak.
        double central = static_cast<double>(hists[0].window_sum(0.0, 0.45 * period));
        CHECK(central > 3.0 * sums[0]);
    }
}

TEST_CASE("co plus cross zero-peak counts are basis independent") {
    auto hists = simulate(clean_emitter(2.0), DriveConfig{}, DetectorConfig{},
                          correlation_settings(), 300000, 9);
    double period = DriveConfig{}.period_ns();
    auto window = [&](std::size_t i) {
        return static_cast<double>(hists[i].window_sum(0.5, period / 2.0));
    };
    double hv = window(0) + window(1);
    double da = window(2) + window(3);
    double rl = window(4) + window(5);
    CHECK(std::abs(hv - da) <= 5.0 * std::sqrt(hv + da));
    CHECK(std::abs(hv - rl) <= 5.0 * std::sqrt(hv + rl));
    CHECK(std::abs(da - rl) <= 5.0 * std::sqrt(da + rl));
}

TEST_CASE("fully uncorrelated emission has zero degree of correlation") {
    EmitterConfig em = clean_emitter(0.0);
    em.background_frac = 1.0;
    auto hists = simulate(em, DriveConfig{}, DetectorConfig{}, correlation_settings(), 400000, 10);
    GateWindow gate{DriveConfig{}.period_ns()};
    CorrelationSet c = compute_correlations(hists, gate, DriveConfig{}.period_ns());
    CHECK(std::abs(c.c_hv) <= 5.0 * c.sigma_hv);
    CHECK(std::abs(c.c_da) <= 5.0 * c.sigma_da);
    CHECK(std::abs(c.c_rl) <= 5.0 * c.sigma_rl);
}

TEST_CASE("Monte Carlo fidelity tracks the closed form") {
    double s = hbar();  // closed form gives exactly 0.75
    EmitterConfig em = clean_emitter(s);
    // A long repetition period keeps the full-period gate from truncating the
    // exponential delay tail, which would bias the gated average upward.
    DriveConfig drive;
    drive.rep_rate_mhz = 50.0;
    auto hists = simulate(em, drive, no_jitter(), correlation_settings(), 400000, 11);
    double period = drive.period_ns();
    CorrelationSet c = compute_correlations(hists, GateWindow{period}, period);
    ValueWithError f = fidelity_from_correlations(c);
    CHECK(std::abs(f.value - 0.75) < std::max(0.02, 5.0 * f.sigma));
}

TEST_CASE("histogram bookkeeping") {
    auto hists = simulate(clean_emitter(1.0), DriveConfig{}, DetectorConfig{}, {{Pol::D, Pol::A}},
                          5000, 12);
    CoincidenceHistogram h = hists[0];
    CHECK(h.n_pulses == 5000);
    CHECK(h.total() <= 4 * h.n_pulses);
    CHECK((h.setting == MeasurementSetting{Pol::D, Pol::A}));
    // Window covers +-4 periods by default.
    CHECK(h.origin == doctest::Approx(-4.0 * DriveConfig{}.period_ns()).epsilon(1e-9));

    CoincidenceHistogram other = h;
    other.bin_width *= 2.0;
    CHECK_THROWS_AS(h.merge(other), ValidationError);
}

TEST_CASE("window sums and centroids") {
    CoincidenceHistogram h;
    h.bin_width = 1.0;
    h.origin = -2.0;
    h.counts = {1, 2, 3, 4};  // centers -1.5, -0.5, 0.5, 1.5
    CHECK(h.total() == 10);
    CHECK(h.window_sum(0.0, 1.0) == 5);  // centers -0.5 and 0.5
    CHECK(h.window_sum(0.5, 1.0) == 9);  // centers -0.5, 0.5, 1.5
    CHECK(h.centroid(0.5, 1.0) == doctest::Approx((2 * -0.5 + 3 * 0.5 + 4 * 1.5) / 9.0));
    CHECK(h.centroid(10.0, 0.5) == doctest::Approx(10.0));  // empty window
}
