#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "propdiff/random.hpp"
#include "propdiff/specfun.hpp"

namespace propdiff {

/// One binomial observation: x successes out of n trials.
struct Counts {
    int x = 0;
    int n = 1;

    Counts() = default;
    Counts(int successes, int trials) : x(successes), n(trials) {
        if (trials < 1) throw std::invalid_argument("trials must be positive");
        if (successes < 0 || successes > trials) {
            throw std::invalid_argument("successes must lie in [0, n], got x=" +
                                        std::to_string(successes) + " n=" + std::to_string(trials));
        }
    }

    [[nodiscard]] bool interior() const noexcept { return x >= 1 && x <= n - 1; }

    friend bool operator==(const Counts&, const Counts&) = default;
};

/// Shape pair of a Beta distribution.
struct BetaParams {
    double a = 1.0;
    double b = 1.0;

    BetaParams() = default;
    BetaParams(double shape_a, double shape_b) : a(shape_a), b(shape_b) {
        detail::require_shape(a, b);
    }

    [[nodiscard]] double mean() const noexcept { return a / (a + b); }

    friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

/// Monte Carlo configuration shared by every sampling path.
///
/// Streams are keyed by derive_stream_key(seed, stream); outcome cells use
/// cell_stream(x1, x2, n2) = x1 * (n2 + 1) + x2.
struct McConfig {
    static constexpr std::size_t default_samples = 200000;
    static constexpr std::size_t min_samples = 1000;

    std::uint64_t seed = 0;
    std::size_t samples = default_samples;

    McConfig() = default;
    McConfig(std::uint64_t seed_value, std::size_t sample_count)
        : seed(seed_value), samples(sample_count) {
        if (samples < min_samples) {
            throw std::invalid_argument("samples must be at least " + std::to_string(min_samples));
        }
    }
};

/// Binomial probability C(n,k) p^k (1-p)^(n-k), evaluated in log space.
///
/// The two factors are combined in a fixed order independent of which tail
/// they belong to, so pmf(k, n, p) and pmf(n-k, n, 1-p) agree bitwise
/// whenever 1 - p is exact.
inline double binom_pmf(int k, int n, double p) {
    if (n < 1) throw std::domain_error("binom_pmf requires n >= 1");
    if (k < 0 || k > n) throw std::domain_error("binom_pmf requires 0 <= k <= n");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("binom_pmf requires p in [0, 1]");

    const double q = 1.0 - p;
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (q == 0.0) return k == n ? 1.0 : 0.0;

    const int lo = std::min(k, n - k);
    const int hi = std::max(k, n - k);
    const double log_choose =
        std::lgamma(n + 1.0) - (std::lgamma(lo + 1.0) + std::lgamma(hi + 1.0));
    const double term_success = k * std::log(p);
    const double term_failure = (n - k) * std::log(q);
    const double tails = std::min(term_success, term_failure) + std::max(term_success, term_failure);
    return std::exp(log_choose + tails);
}

inline double beta_cdf(const BetaParams& params, double x) {
    return reg_inc_beta(x, params.a, params.b);
}

inline double beta_density(const BetaParams& params, double x) {
    if (!(x > 0.0 && x < 1.0)) {
        if (x == 0.0 && params.a == 1.0) return params.b;
        if (x == 1.0 && params.b == 1.0) return params.a;
        if (x < 0.0 || x > 1.0) return 0.0;
        // Boundary value of an unbounded or vanishing density.
        const bool at_zero = x == 0.0;
        const double shape = at_zero ? params.a : params.b;
        return shape < 1.0 ? HUGE_VAL : 0.0;
    }
    return std::exp(detail::log_beta_density_split(x, 1.0 - x, params.a, params.b,
                                                  detail::log_beta(params.a, params.b)));
}

inline double beta_quantile(const BetaParams& params, double q) {
    return inv_reg_inc_beta(q, params.a, params.b);
}

/// cfg.samples draws from Beta(a, b) on the given stream.
inline std::vector<double> beta_sample(const BetaParams& params, const McConfig& cfg, StreamId stream) {
    CounterRng rng(cfg.seed, stream);
    std::vector<double> out(cfg.samples);
    for (auto& v : out) v = rng.beta(params.a, params.b);
    return out;
}

}  // namespace propdiff
