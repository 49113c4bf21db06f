#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <random>

namespace evonet {

/// Deterministic random stream used everywhere randomness is needed.
///
/// All value mapping (uniform reals, bounded integers, normals) is done on
/// top of the raw mt19937_64 output instead of std::*_distribution, so the
/// produced sequences do not depend on the standard library implementation
/// and the full stream state can be checkpointed and restored exactly.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi]. Degenerate intervals return lo.
    double uniform_real(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Uniform integer on the closed range [lo, hi], unbiased via rejection.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        const std::uint64_t span =
            static_cast<std::uint64_t>(hi - lo) + 1u; // hi >= lo expected
        if (span == 0) return lo; // full 64-bit span
        const std::uint64_t limit =
            std::numeric_limits<std::uint64_t>::max() -
            std::numeric_limits<std::uint64_t>::max() % span;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return lo + static_cast<std::int64_t>(x % span);
    }

    bool coin() { return uniform01() < 0.5; }

    /// Normal(mean, stddev^2) via Box-Muller. Consumes two uniform draws per
    /// call and caches nothing, keeping the stream state trivially
    /// serializable.
    double normal(double mean, double stddev) {
        double u1 = uniform01();
        const double u2 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double z = r * std::cos(2.0 * 3.14159265358979323846 * u2);
        return mean + stddev * z;
    }

    void save(std::ostream& os) const { os << engine_; }
    void load(std::istream& is) { is >> engine_; }

    friend bool operator==(const Rng& a, const Rng& b) {
        return a.engine_ == b.engine_;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace evonet
