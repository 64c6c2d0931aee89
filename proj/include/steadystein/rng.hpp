#pragma once

#include <cmath>
#include <cstdint>

namespace steadystein {

/**
 * @brief Counter-based random stream: the k-th draw of stream s under seed q
 * is a pure function of (q, s, k), so replications are bit-reproducible and
 * trivially parallel.
 *
 * The mixer is the splitmix64 finalizer applied to a combined 64-bit counter.
 */
class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream) : key_(mix(seed ^ mix(stream * 0x9E3779B97F4A7C15ULL))) {}

    uint64_t next_u64() {
        uint64_t z = key_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
        return mix(z);
    }

    /// Uniform on (0, 1] (never 0, so logs are safe).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    /// Standard normal via Box-Muller; consumes two uniforms per call.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    /// Uniform integer in [0, n).
    uint64_t below(uint64_t n) { return next_u64() % n; }

private:
    static uint64_t mix(uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }
    uint64_t key_;
    uint64_t counter_ = 0;
};

} // namespace steadystein
