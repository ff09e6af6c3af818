#pragma once

#include <cmath>
#include <cstdint>

namespace propdiff {

/// Identifies one independent random stream under a user seed.
struct StreamId {
    std::uint64_t value = 0;
    friend constexpr bool operator==(StreamId, StreamId) = default;
};

/// Stream of outcome cell (x1, x2) when group 2 has n2 trials.
constexpr StreamId cell_stream(int x1, int x2, int n2) noexcept {
    return StreamId{static_cast<std::uint64_t>(x1) * static_cast<std::uint64_t>(n2 + 1) +
                    static_cast<std::uint64_t>(x2)};
}

namespace detail {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Key of stream `stream` under `seed`:
///   key = mix64(mix64(seed) ^ mix64(stream + 0x9E3779B97F4A7C15))
/// Sub-streams are derived by applying the same rule with the parent key as seed.
constexpr std::uint64_t derive_stream_key(std::uint64_t seed, StreamId stream) noexcept {
    return detail::mix64(detail::mix64(seed) ^ detail::mix64(stream.value + 0x9E3779B97F4A7C15ULL));
}

/// Counter-based 64-bit generator: output i is mix64(key + (i + 1) * golden).
///
/// The state is (key, counter), so a generator is a cheap value type and any
/// stream can be reconstructed from its key without replaying other streams.
class CounterRng {
public:
    constexpr explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
    constexpr CounterRng(std::uint64_t seed, StreamId stream) noexcept
        : key_(derive_stream_key(seed, stream)) {}

    constexpr std::uint64_t next_u64() noexcept {
        ++counter_;
        return detail::mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    constexpr double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal deviate (Marsaglia polar method, one value per call).
    double normal() noexcept {
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) {
                return u * std::sqrt(-2.0 * std::log(s) / s);
            }
        }
    }

    /// Gamma(shape, 1) deviate. Marsaglia-Tsang squeeze for shape >= 1;
    /// shape < 1 uses Gamma(shape + 1) * U^(1/shape).
    double gamma(double shape) noexcept {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0);
            return g * std::pow(uniform(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x;
            double v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    /// Beta(a, b) deviate as G_a / (G_a + G_b).
    double beta(double a, double b) noexcept {
        const double ga = gamma(a);
        const double gb = gamma(b);
        return ga / (ga + gb);
    }

    [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
    [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace propdiff
