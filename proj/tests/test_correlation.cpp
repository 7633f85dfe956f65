#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "seled/cascade.hpp"
#include "seled/constants.hpp"
#include "seled/correlation.hpp"
#include "seled/rng.hpp"

using namespace seled;

namespace {

constexpr int kPropertyCases = 200;
constexpr double kPeriod = 5.4;

// Histogram with independently Poisson-distributed bins of constant mean:
// the normalization fixed point (g2 = 1 for any gate).
CoincidenceHistogram flat_poisson(double mean, std::uint64_t seed,
                                  double period = kPeriod, int side_periods = 4) {
    CoincidenceHistogram h;
    h.bin_width = 0.05;
    h.origin = -side_periods * period;
    h.n_pulses = 1000000;
    Rng rng(seed);
    std::size_t n = static_cast<std::size_t>(2.0 * side_periods * period / h.bin_width);
    h.counts.resize(n);
    for (auto& c : h.counts) {
        c = static_cast<std::uint64_t>(std::max(0.0, std::round(rng.gaussian(mean, std::sqrt(mean)))));
    }
    return h;
}

CorrelationSet make_set(double hv, double da, double rl, double sig = 0.01) {
    return CorrelationSet{hv, da, rl, sig, sig, sig};
}

}  // namespace

TEST_CASE("flat uncorrelated counts normalize to one") {
    CoincidenceHistogram h = flat_poisson(400.0, 77);
    G2Result r = normalize_g2(h, GateWindow{1.0}, kPeriod, 0.0);
    CHECK(std::abs(r.g2 - 1.0) <= 3.0 * r.sigma);
    CHECK(r.sigma < 0.2);
}

TEST_CASE("normalization is invariant under count rescaling") {
    CoincidenceHistogram h = flat_poisson(200.0, 78);
    G2Result a = normalize_g2(h, GateWindow{1.2}, kPeriod, 0.0);
    for (auto& c : h.counts) c *= 2;
    G2Result b = normalize_g2(h, GateWindow{1.2}, kPeriod, 0.0);
    CHECK(b.g2 == doctest::Approx(a.g2).epsilon(1e-12));
}

TEST_CASE("cross-polarized channel of a degenerate emitter has near-zero g2") {
    EmitterConfig em;
    em.fss = 0.0;
    em.pair_prob = 0.2;
    DetectorConfig det;
    det.jitter_sigma = 0.0;
    auto hists = simulate(em, DriveConfig{}, det, {{Pol::H, Pol::H}, {Pol::H, Pol::V}}, 200000, 3);
    double period = DriveConfig{}.period_ns();
    double center = shared_peak_center(hists, period);
    G2Result co = normalize_g2(hists[0], GateWindow{1.8}, period, center);
    G2Result cross = normalize_g2(hists[1], GateWindow{1.8}, period, center);
    CHECK(co.g2 > 2.0);
    CHECK(cross.g2 < 0.05);
}

TEST_CASE("normalization rejects degenerate inputs") {
    CoincidenceHistogram narrow = flat_poisson(100.0, 79, kPeriod, 3);
    CHECK_THROWS_AS(normalize_g2(narrow, GateWindow{1.0}, kPeriod, 0.0), ValidationError);

    CoincidenceHistogram h = flat_poisson(100.0, 80);
    CHECK_THROWS_AS(normalize_g2(h, GateWindow{0.0}, kPeriod, 0.0), ValidationError);
    CHECK_THROWS_AS(normalize_g2(h, GateWindow{kPeriod + 1.0}, kPeriod, 0.0), ValidationError);

    CoincidenceHistogram empty_sides = h;
    for (std::size_t i = 0; i < empty_sides.counts.size(); ++i) {
        if (std::abs(empty_sides.bin_center(i)) > kPeriod / 2.0) empty_sides.counts[i] = 0;
    }
    CHECK_THROWS_AS(normalize_g2(empty_sides, GateWindow{1.0}, kPeriod, 0.0), ComputationError);
}

TEST_CASE("shared peak center requires matching layouts and pools counts") {
    CoincidenceHistogram a = flat_poisson(50.0, 81);
    CoincidenceHistogram b = a;
    b.bin_width *= 2.0;
    CHECK_THROWS_AS(shared_peak_center({a, b}, kPeriod), ValidationError);
    CHECK_THROWS_AS(shared_peak_center({}, kPeriod), ValidationError);

    // A sharp peak in one histogram dominates the pooled center even when
    // the other histogram is empty there.
    CoincidenceHistogram peaked = a;
    for (auto& c : peaked.counts) c = 0;
    for (std::size_t i = 0; i < peaked.counts.size(); ++i) {
        if (std::abs(peaked.bin_center(i) - 0.8) < 0.1) peaked.counts[i] = 5000;
    }
    CoincidenceHistogram flatmate = a;
    double center = shared_peak_center({peaked, flatmate}, kPeriod);
    CHECK(std::abs(center - 0.8) < 0.1);
}

TEST_CASE("degree of correlation basics") {
    CHECK(degree_of_correlation(1.0, 1.0) == doctest::Approx(0.0));
    CHECK(degree_of_correlation(3.7, 0.0) == doctest::Approx(1.0));
    CHECK(degree_of_correlation(0.0, 2.0) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(degree_of_correlation(0.0, 0.0), ValidationError);

    Rng rng(301);
    for (int i = 0; i < kPropertyCases; ++i) {
        double a = rng.uniform(0.0, 10.0), b = rng.uniform(0.0, 10.0);
        if (a + b <= 0.0) continue;
        CHECK(degree_of_correlation(a, b) ==
              doctest::Approx(-degree_of_correlation(b, a)).epsilon(1e-12));
        CHECK(std::abs(degree_of_correlation(a, b)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("fidelity from measured correlation triples") {
    ValueWithError f1 = fidelity_from_correlations(make_set(0.67, 0.63, -0.78));
    CHECK(f1.value == doctest::Approx(0.77).epsilon(0.005));
    ValueWithError f2 = fidelity_from_correlations(make_set(0.74, 0.74, -0.84));
    CHECK(f2.value == doctest::Approx(0.83).epsilon(0.005));
    CHECK(fidelity_from_correlations(make_set(0.0, 0.0, 0.0)).value ==
          doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("symmetric correlation triples give (1+3C)/4") {
    Rng rng(302);
    for (int i = 0; i < kPropertyCases; ++i) {
        double c = rng.uniform(-1.0 / 3.0, 1.0);
        ValueWithError f = fidelity_from_correlations(make_set(c, c, -c));
        CHECK(f.value == doctest::Approx((1.0 + 3.0 * c) / 4.0).epsilon(1e-12));
    }
    CHECK(fidelity_from_correlations(make_set(1.0, 1.0, -1.0)).value ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Bell parameters from measured correlation triples") {
    BellParams b1 = bell_parameters(make_set(0.67, 0.63, -0.78));
    CHECK(std::abs(b1.s_rd - 1.83) < 0.011);
    CHECK(std::abs(b1.s_rc - 2.04) < 0.011);
    CHECK(std::abs(b1.s_dc - 2.00) < 0.011);
    BellParams b2 = bell_parameters(make_set(0.74, 0.74, -0.84));
    CHECK(std::abs(b2.s_rd - 2.09) < 0.005);
    CHECK(std::abs(b2.s_rc - 2.23) < 0.005);
    CHECK(std::abs(b2.s_dc - 2.23) < 0.005);

    BellParams perfect = bell_parameters(make_set(1.0, 1.0, -1.0));
    const double tsirelson = 2.0 * std::sqrt(2.0);
    CHECK(perfect.s_rd == doctest::Approx(tsirelson).epsilon(1e-12));
    CHECK(perfect.s_rc == doctest::Approx(tsirelson).epsilon(1e-12));
    CHECK(perfect.s_dc == doctest::Approx(tsirelson).epsilon(1e-12));
}

TEST_CASE("Bell parameters are exact linear combinations") {
    Rng rng(303);
    const double rt2 = std::sqrt(2.0);
    for (int i = 0; i < kPropertyCases; ++i) {
        CorrelationSet c = make_set(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                                    rng.uniform(-1.0, 1.0), rng.uniform(0.0, 0.1));
        BellParams b = bell_parameters(c);
        CHECK(std::abs(b.s_rd - rt2 * (c.c_hv + c.c_da)) < 1e-12);
        CHECK(std::abs(b.s_rc - rt2 * (c.c_hv - c.c_rl)) < 1e-12);
        CHECK(std::abs(b.s_dc - rt2 * (c.c_da - c.c_rl)) < 1e-12);
    }
}

TEST_CASE("correlation set validation") {
    CHECK_THROWS_AS(fidelity_from_correlations(make_set(1.2, 0.0, 0.0)), ValidationError);
    CorrelationSet nan_sigma = make_set(0.5, 0.5, -0.5);
    nan_sigma.sigma_da = -1.0;
    CHECK_THROWS_AS(nan_sigma.validate(), ValidationError);
}

TEST_CASE("gate scan keeps everything at full period and shrinks monotonically") {
    EmitterConfig em;
    em.fss = 1.5;
    em.pair_prob = 0.2;
    auto hists = simulate(em, DriveConfig{}, DetectorConfig{}, correlation_settings(), 200000, 4);
    double period = DriveConfig{}.period_ns();
    std::vector<GateWindow> gates = {{period}, {3.0}, {1.8}, {0.8}, {0.4}};
    auto rows = gate_scan(hists, gates, period);
    REQUIRE(rows.size() == gates.size());
    CHECK(rows[0].kept_fraction == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].kept_fraction <= rows[i - 1].kept_fraction + 1e-12);
    }
    CHECK_THROWS_AS(gate_scan(hists, {{0.4}, {1.8}}, period), ValidationError);
}

TEST_CASE("without time-dependent dephasing the gate does not change fidelity") {
    EmitterConfig em;
    em.fss = 0.0;
    // Keep the pair rate low: accidental coincidences are flat in delay, so a
    // narrower gate would otherwise raise the signal-to-accidental ratio and
    // shift the fidelity even at zero splitting.
    em.pair_prob = 0.02;
    auto hists = simulate(em, DriveConfig{}, DetectorConfig{}, correlation_settings(), 600000, 5);
    double period = DriveConfig{}.period_ns();
    auto rows = gate_scan(hists, {{period}, {0.8}}, period);
    double diff = std::abs(rows[0].fidelity.value - rows[1].fidelity.value);
    CHECK(diff <= 5.0 * std::hypot(rows[0].fidelity.sigma, rows[1].fidelity.sigma));
}

TEST_CASE("a separable source stays below the classical bounds") {
    EmitterConfig em;
    em.fss = 0.0;
    em.pair_prob = 0.2;
    em.background_frac = 1.0;
    auto hists = simulate(em, DriveConfig{}, DetectorConfig{}, correlation_settings(), 300000, 6);
    double period = DriveConfig{}.period_ns();
    CorrelationSet c = compute_correlations(hists, GateWindow{1.8}, period);
    ValueWithError f = fidelity_from_correlations(c);
    CHECK(f.value <= 0.5 + 5.0 * f.sigma);
    BellParams b = bell_parameters(c);
    CHECK(std::abs(b.s_rd) <= 2.0 + 5.0 * b.sigma_rd);
    CHECK(std::abs(b.s_rc) <= 2.0 + 5.0 * b.sigma_rc);
    CHECK(std::abs(b.s_dc) <= 2.0 + 5.0 * b.sigma_dc);
}

TEST_CASE("compute_correlations expects the six-histogram layout") {
    EmitterConfig em;
    em.pair_prob = 0.1;
    auto hists = simulate(em, DriveConfig{}, DetectorConfig{}, correlation_settings(), 1000, 7);
    auto missing = hists;
    missing.pop_back();
    CHECK_THROWS_AS(compute_correlations(missing, GateWindow{1.8}, DriveConfig{}.period_ns()),
                    ValidationError);
    auto reordered = hists;
    std::swap(reordered[0], reordered[1]);
    CHECK_THROWS_AS(compute_correlations(reordered, GateWindow{1.8}, DriveConfig{}.period_ns()),
                    ValidationError);
}

TEST_CASE("resonance fit rejects insufficient data") {
    std::vector<FssScanPoint> one = {{0.0, 0.9, 0.01}};
    CHECK_THROWS_AS(fit_lorentzian(one), ValidationError);
}

TEST_CASE("resonance fit recovers exact synthetic parameters") {
    const double baseline = 0.30, amplitude = 0.45, fwhm = 3.3;
    std::vector<FssScanPoint> pts;
    for (double s = 0.0; s <= 10.0; s += 0.5) {
        double u = 2.0 * s / fwhm;
        pts.push_back({s, baseline + amplitude / (1.0 + u * u), 0.005});
    }
    LorentzianFit fit = fit_lorentzian(pts);
    CHECK(fit.converged);
    CHECK(fit.baseline == doctest::Approx(baseline).epsilon(1e-6));
    CHECK(fit.amplitude == doctest::Approx(amplitude).epsilon(1e-6));
    CHECK(fit.fwhm == doctest::Approx(fwhm).epsilon(1e-6));
    CHECK(fit.peak == doctest::Approx(baseline + amplitude).epsilon(1e-6));
}

TEST_CASE("the ideal dephasing curve has width 2 hbar / tau") {
    std::vector<FssScanPoint> pts;
    for (double s = 0.0; s <= 6.0; s += 0.25) {
        pts.push_back({s, analytic_fidelity(s, 1.0, 0.0), 0.002});
    }
    LorentzianFit fit = fit_lorentzian(pts);
    CHECK(fit.converged);
    CHECK(fit.fwhm == doctest::Approx(2.0 * hbar()).epsilon(1e-4));
    CHECK(fit.peak == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(fit.baseline == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("gate window validation") {
    CHECK_NOTHROW(GateWindow{1.8}.validate(5.4));
    CHECK_THROWS_AS(GateWindow{-0.5}.validate(5.4), ValidationError);
    CHECK_THROWS_AS(GateWindow{6.0}.validate(5.4), ValidationError);
    CHECK(GateWindow{1.8}.half() == doctest::Approx(0.9));
}
