#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "propdiff/distributions.hpp"
#include "propdiff/random.hpp"
#include "propdiff/specfun.hpp"

namespace propdiff {

/// delta = p1 - p2 with independent Beta margins for p1 (left) and p2 (right).
struct BetaDiffModel {
    BetaParams left;
    BetaParams right;

    [[nodiscard]] BetaDiffModel swapped() const { return {right, left}; }

    friend bool operator==(const BetaDiffModel&, const BetaDiffModel&) = default;
};

namespace detail {

// Nested tanh-sinh abscissae on [-1, 1]. Level k adds the nodes at odd
// multiples of h = 2^-k; level 0 holds t = 0, +-1, ..., +-t_max.
struct TanhSinhNode {
    double from_lo;  // (1 + x) / 2, distance from the lower end as a fraction
    double from_hi;  // (1 - x) / 2
    double weight;   // dx/dt / 2
};

class TanhSinhTable {
public:
    static constexpr int max_level = 9;
    static constexpr double t_max = 4.0;

    static const TanhSinhTable& instance() {
        static const TanhSinhTable table;
        return table;
    }

    [[nodiscard]] std::span<const TanhSinhNode> level(int k) const { return levels_[k]; }

private:
    TanhSinhTable() {
        for (int k = 0; k <= max_level; ++k) {
            const double h = std::ldexp(1.0, -k);
            auto& nodes = levels_[k];
            const int step = k == 0 ? 1 : 2;
            const int first = k == 0 ? 0 : 1;
            for (int i = first;; i += step) {
                const double t = i * h;
                if (t > t_max) break;
                add(nodes, t);
                if (i != 0) add(nodes, -t);
            }
        }
    }

    static void add(std::vector<TanhSinhNode>& nodes, double t) {
        const double s = std::numbers::pi / 2.0 * std::sinh(t);
        const double cs = std::cosh(s);
        const double weight = std::numbers::pi / 4.0 * std::cosh(t) / (cs * cs);
        nodes.push_back({1.0 / (1.0 + std::exp(-2.0 * s)), 1.0 / (1.0 + std::exp(2.0 * s)), weight});
    }

    std::array<std::vector<TanhSinhNode>, max_level + 1> levels_;
};

struct BetaKernel {
    double a;
    double b;
    double log_b;

    explicit BetaKernel(const BetaParams& p) : a(p.a), b(p.b), log_b(log_beta(p.a, p.b)) {}

    [[nodiscard]] double cdf(double x, double one_minus_x) const {
        return reg_inc_beta_split(x, one_minus_x, a, b, log_b);
    }
    [[nodiscard]] double upper_tail(double x, double one_minus_x) const {
        return reg_inc_beta_split(one_minus_x, x, b, a, log_b);
    }
    [[nodiscard]] double density(double x, double one_minus_x) const {
        return std::exp(log_beta_density_split(x, one_minus_x, a, b, log_b));
    }
};

// Lexicographic order on (a, b) of the margins: the canonical orientation.
inline bool canonical_order(const BetaDiffModel& m) {
    return std::tie(m.left.a, m.left.b) <= std::tie(m.right.a, m.right.b);
}

}  // namespace detail

/// CDF value with the quadrature error estimate that produced it.
struct CdfEvaluation {
    double value;
    double error_estimate;
    int level;
};

/// Distribution of B_left - B_right.
///
/// H(d) = P(B_left - B_right <= d)
///      = int_{max(0,-d)}^{min(1,1-d)} f_right(u) F_left(d + u) du + (1 - F_right(min(1, 1-d))),
/// integrated with nested tanh-sinh refinement until successive levels agree
/// to `tolerance`. Endpoint singularities of f_right (shapes < 1) and the kink
/// of F_left at the support boundary sit at interval ends, where the
/// double-exponential rule is insensitive to them. Models whose margins are
/// not in canonical order are evaluated through the reflected model, so
/// H_swapped(d) = 1 - H(-d).
class DiffDistribution {
public:
    static constexpr double tolerance = 1e-11;
    static constexpr double quantile_width = 1e-8;

    explicit DiffDistribution(const BetaDiffModel& model)
        : model_(model),
          flipped_(!detail::canonical_order(model)),
          left_(flipped_ ? model.right : model.left),
          right_(flipped_ ? model.left : model.right) {}

    [[nodiscard]] const BetaDiffModel& model() const noexcept { return model_; }

    [[nodiscard]] CdfEvaluation evaluate(double d) const {
        if (flipped_) {
            auto r = evaluate_canonical(-d);
            r.value = 1.0 - r.value;
            return r;
        }
        return evaluate_canonical(d);
    }

    [[nodiscard]] double cdf(double d) const { return evaluate(d).value; }

    /// d with cdf(d) = q, by bisection on [-1, 1] to bracket width 1e-8.
    [[nodiscard]] double quantile(double q) const {
        if (!(q > 0.0 && q < 1.0)) {
            throw std::domain_error("diff quantile requires q in (0, 1)");
        }
        if (flipped_) return -quantile_canonical(1.0 - q);
        return quantile_canonical(q);
    }

private:
    [[nodiscard]] double quantile_canonical(double q) const {
        double lo = -1.0;
        double hi = 1.0;
        while (hi - lo > quantile_width) {
            const double mid = 0.5 * (lo + hi);
            if (evaluate_canonical(mid).value < q) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    }

    [[nodiscard]] CdfEvaluation evaluate_canonical(double d) const {
        if (d <= -1.0) return {0.0, 0.0, 0};
        if (d >= 1.0) return {1.0, 0.0, 0};

        const double shift_lo = std::max(0.0, -d);  // lower limit of u
        const double shift_hi = std::max(0.0, d);   // 1 - upper limit of u
        const double width = 1.0 - std::fabs(d);

        // P(B_right > 1 - d): region where F_left is identically 1.
        const double tail = shift_hi > 0.0 ? right_.upper_tail(1.0 - shift_hi, shift_hi) : 0.0;

        auto integrand = [&](const detail::TanhSinhNode& node) {
            const double dist_lo = width * node.from_lo;
            const double dist_hi = width * node.from_hi;
            if (dist_lo <= 0.0 || dist_hi <= 0.0) return 0.0;
            // u = shift_lo + dist_lo; 1 - u = shift_hi + dist_hi
            // v = d + u = shift_hi + dist_lo; 1 - v = shift_lo + dist_hi
            const double density = right_.density(shift_lo + dist_lo, shift_hi + dist_hi);
            if (density == 0.0) return 0.0;
            return density * left_.cdf(shift_hi + dist_lo, shift_lo + dist_hi);
        };

        const auto& table = detail::TanhSinhTable::instance();
        double sum = 0.0;
        for (const auto& node : table.level(0)) sum += node.weight * integrand(node);
        double estimate = width * sum;
        double previous = estimate;
        double error = 1.0;
        int level = 0;
        for (int k = 1; k <= detail::TanhSinhTable::max_level; ++k) {
            double added = 0.0;
            for (const auto& node : table.level(k)) added += node.weight * integrand(node);
            sum += added;
            estimate = width * std::ldexp(sum, -k);
            error = std::fabs(estimate - previous);
            previous = estimate;
            level = k;
            if (k >= 4 && error <= tolerance) break;
        }
        return {std::clamp(estimate + tail, 0.0, 1.0), error, level};
    }

    BetaDiffModel model_;
    bool flipped_;
    detail::BetaKernel left_;
    detail::BetaKernel right_;
};

inline double diff_cdf(const BetaDiffModel& model, double d) {
    return DiffDistribution(model).cdf(d);
}

inline double diff_quantile(const BetaDiffModel& model, double q) {
    return DiffDistribution(model).quantile(q);
}

/// Posterior under the probability matching prior for p1 - p2:
///   pi(p1, p2 | x) ∝ sqrt(sum_i p_i (1 - p_i)) * prod_i p_i^(x_i - 1) (1 - p_i)^(n_i - x_i - 1).
/// Proper only when every group has 1 <= x_i <= n_i - 1.
class MatchingPosterior {
public:
    MatchingPosterior(Counts first, Counts second) : first_(first), second_(second) {
        if (!first.interior() || !second.interior()) {
            throw std::invalid_argument("matching posterior needs 1 <= x <= n - 1 in both groups");
        }
    }

    [[nodiscard]] const Counts& first() const noexcept { return first_; }
    [[nodiscard]] const Counts& second() const noexcept { return second_; }

private:
    Counts first_;
    Counts second_;
};

struct MatchingDraws {
    std::vector<double> p1;
    std::vector<double> p2;
    std::uint64_t proposals = 0;

    [[nodiscard]] double acceptance_rate() const {
        return proposals == 0 ? 0.0 : static_cast<double>(p1.size()) / static_cast<double>(proposals);
    }
};

/// Exact rejection sampler for MatchingPosterior.
///
/// Proposals come from Beta(x1, n1 - x1) x Beta(x2, n2 - x2) and are accepted
/// with probability sqrt(p1(1-p1) + p2(1-p2)) / sqrt(1/2). Sub-stream 0 of
/// `stream` drives acceptance; sub-streams 1 and 2 drive the groups in
/// lexicographic (x, n) order, so swapping the groups swaps the coordinates.
inline MatchingDraws matching_sample(const MatchingPosterior& post, const McConfig& cfg, StreamId stream) {
    const Counts& c1 = post.first();
    const Counts& c2 = post.second();
    const std::uint64_t key = derive_stream_key(cfg.seed, stream);
    const bool first_is_low = std::tie(c1.x, c1.n) <= std::tie(c2.x, c2.n);

    CounterRng accept_rng(derive_stream_key(key, StreamId{0}));
    CounterRng low_rng(derive_stream_key(key, StreamId{1}));
    CounterRng high_rng(derive_stream_key(key, StreamId{2}));
    CounterRng& rng1 = first_is_low ? low_rng : high_rng;
    CounterRng& rng2 = first_is_low ? high_rng : low_rng;

    const double a1 = c1.x, b1 = c1.n - c1.x;
    const double a2 = c2.x, b2 = c2.n - c2.x;

    MatchingDraws draws;
    draws.p1.reserve(cfg.samples);
    draws.p2.reserve(cfg.samples);
    while (draws.p1.size() < cfg.samples) {
        const double p1 = rng1.beta(a1, b1);
        const double p2 = rng2.beta(a2, b2);
        const double u = accept_rng.uniform();
        ++draws.proposals;
        if (!(p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0)) continue;
        const double spread = p1 * (1.0 - p1) + p2 * (1.0 - p2);
        if (u * u < 2.0 * spread) {
            draws.p1.push_back(p1);
            draws.p2.push_back(p2);
        }
    }
    return draws;
}

/// Element at 1-based index clamp(ceil(q N), 1, N) of an ascending sequence.
inline double empirical_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("empirical_quantile of an empty sample");
    const auto n = static_cast<double>(sorted.size());
    const double rank = std::clamp(std::ceil(q * n), 1.0, n);
    return sorted[static_cast<std::size_t>(rank) - 1];
}

}  // namespace propdiff
