#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace seled {

// Deterministic, splittable PRNG (splitmix64 core). We avoid the standard
// <random> distributions on purpose: their output is implementation-defined,
// and the reproducibility contract here is bit-exact across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double mean) {
        // -log(1-u) keeps u=0 safe.
        return -mean * std::log1p(-uniform());
    }

    double gaussian(double mean = 0.0, double sigma = 1.0) {
        if (have_cached_) {
            have_cached_ = false;
            return mean + sigma * cached_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return mean + sigma * r * std::cos(a);
    }

    // Marsaglia-Tsang; shape > 0, scale > 0.
    double gamma(double shape, double scale) {
        if (shape < 1.0) {
            double u = 1.0 - uniform();
            return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = gaussian();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = 1.0 - uniform();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
                return d * v * scale;
            }
        }
    }

    double truncated_gaussian(double mean, double sigma, double lo, double hi) {
        for (;;) {
            double x = gaussian(mean, sigma);
            if (x >= lo && x <= hi) return x;
        }
    }

    // Derive an independent substream. Streams are identified by small ids
    // (stage index, setting index, shard index); adding a stage never
    // perturbs the draws of another stream.
    Rng substream(std::uint64_t id) const {
        std::uint64_t z = state_ ^ (0x9e3779b97f4a7c15ULL * (id + 1));
        z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
        z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
        return Rng(z ^ (z >> 33));
    }

    Rng substream(std::string_view name) const {
        // FNV-1a over the name, then mix with our state.
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return substream(h);
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace seled
