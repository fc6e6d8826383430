#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "loopforge/errors.hpp"

namespace loopforge {

// Deterministic counter-based generator.  A stream is identified by
// (seed, stream_index); the state advances by a fixed increment and each
// output is a bijective mix of the state (splitmix64).  The derivation is
// documented in the README so other implementations can reproduce the
// contract: same (seed, index) -> same stream, distinct indices ->
// statistically independent streams.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream_index = 0) {
        state_ = mix(seed + 0x9E3779B97F4A7C15ULL * (stream_index + 1));
        state_ = mix(state_ ^ 0xBF58476D1CE4E5B9ULL * (stream_index + 1));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    // uniform on [0,1) with 53 random bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double normal() {
        double u = 1.0 - uniform();   // (0,1]
        double v = uniform();
        return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925287 * v);
    }

    double exponential() { return -std::log(1.0 - uniform()); }

    // Gamma(shape, 1).  Integer shapes up to 64 are sums of exponentials and
    // shape 1/2 is N^2/2, which keeps the small-shape cases exact in law;
    // everything else uses Marsaglia-Tsang.
    double gamma(double shape) {
        if (shape <= 0.0) throw invalid_input("gamma: shape must be positive");
        if (shape == 0.5) {
            double n = normal();
            return 0.5 * n * n;
        }
        double k = std::floor(shape);
        if (k == shape && k <= 64.0) {
            double s = 0.0;
            for (int i = 0; i < static_cast<int>(k); ++i) s += exponential();
            return s;
        }
        if (shape < 1.0) {
            // Johnk-style boost: Gamma(a) = Gamma(a+1) * U^{1/a}
            double g = gamma(shape + 1.0);
            return g * std::pow(uniform(), 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double vv = 1.0 + c * x;
            if (vv <= 0.0) continue;
            double v3 = vv * vv * vv;
            double u = 1.0 - uniform();
            if (std::log(u) < 0.5 * x * x + d - d * v3 + d * std::log(v3)) return d * v3;
        }
    }

    int poisson(double lambda) {
        if (lambda < 0.0) throw invalid_input("poisson: negative rate");
        if (lambda == 0.0) return 0;
        if (lambda > 500.0) return poisson(lambda / 2) + poisson(lambda / 2);
        double l = std::exp(-lambda);
        double p = 1.0;
        int k = 0;
        do {
            ++k;
            p *= uniform();
        } while (p > l);
        return k - 1;
    }

    // index sampled proportionally to probs (assumed nonnegative); the caller
    // guarantees a positive total
    int categorical(const std::vector<double>& probs) {
        double total = 0.0;
        for (double p : probs) total += p;
        if (total <= 0.0) throw invalid_input("categorical: zero total mass");
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

// One stream per worker; see README for the derivation contract.
inline Rng derive_stream(std::uint64_t seed, std::uint64_t worker_index) {
    return Rng(seed, worker_index);
}

} // namespace loopforge
