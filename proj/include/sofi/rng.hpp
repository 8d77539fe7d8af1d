#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "sofi/mathutil.hpp"

namespace sofi {

/// Counter-based deterministic generator.  The stream is a pure function of
/// (seed, stream, counter): out_n = finalize(key + n * GOLDEN) with the
/// SplitMix64 finalizer and key = finalize(finalize(seed + GOLDEN) ^
/// finalize(stream + 2 GOLDEN)).  Independent substreams make parallel Monte
/// Carlo reproducible regardless of scheduling.
class CounterRng {
public:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(finalize(finalize(seed + kGolden) ^ finalize(stream + 2 * kGolden))) {}

    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() { return finalize(key_ + (++ctr_) * kGolden); }

    /// Uniform on the open interval (0,1); never returns 0, so logs are safe.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller, caching the second variate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform(), u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double exponential(double rate) {
        if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
        return -std::log(uniform()) / rate;
    }

    /// Poisson sampling: sequential inversion below mean 30, transformed
    /// rejection with squeeze (PTRD) above.  Exact for all means, unlike a
    /// normal approximation, so moment and tail tests stay honest.
    long poisson(double mean) {
        if (mean < 0.0) throw std::invalid_argument("poisson: mean must be >= 0");
        if (mean == 0.0) return 0;
        if (mean < 30.0) return poisson_inversion(mean);
        return poisson_ptrd(mean);
    }

private:
    long poisson_inversion(double mean) {
        long k = 0;
        double p = std::exp(-mean), s = p;
        const double u = uniform();
        while (u > s) {
            ++k;
            p *= mean / k;
            s += p;
            if (k > 400) break;  // unreachable for mean < 30; guards FP corner cases
        }
        return k;
    }

    long poisson_ptrd(double mean) {
        const double smu = std::sqrt(mean);
        const double b = 0.931 + 2.53 * smu;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        const double log_mu = std::log(mean);
        for (;;) {
            double u, v = uniform();
            if (v <= 0.86 * vr) {
                u = v / vr - 0.43;
                return static_cast<long>(
                    std::floor((2.0 * a / (0.5 - std::abs(u)) + b) * u + mean + 0.445));
            }
            if (v >= vr) {
                u = uniform() - 0.5;
            } else {
                u = v / vr - 0.93;
                u = (u < 0.0 ? -0.5 : 0.5) - u;
                v = uniform() * vr;
            }
            const double us = 0.5 - std::abs(u);
            if (us < 0.013 && v > us) continue;
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.445);
            if (kf < 0.0) continue;
            const long k = static_cast<long>(kf);
            v = v * inv_alpha / (a / (us * us) + b);
            if (std::log(v) <= kf * log_mu - mean - std::lgamma(kf + 1.0)) return k;
        }
    }

    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace sofi
