#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "propdiff/delta_dist.hpp"
#include "propdiff/distributions.hpp"
#include "propdiff/random.hpp"
#include "propdiff/specfun.hpp"

namespace propdiff {

/// Interval methods. Jeffreys-posterior and fiducial intervals coincide and
/// share one tag.
enum class Method { wal, agc, jef_fid, div, match };

inline constexpr std::array<Method, 5> all_methods = {Method::wal, Method::agc, Method::jef_fid,
                                                      Method::div, Method::match};

/// Table label: WAL, AGC, JEF_FID, DIV, MATCH.
constexpr std::string_view method_tag(Method m) noexcept {
    switch (m) {
        case Method::wal: return "WAL";
        case Method::agc: return "AGC";
        case Method::jef_fid: return "JEF_FID";
        case Method::div: return "DIV";
        case Method::match: return "MATCH";
    }
    return "?";
}

/// Command-line name: wal, agc, jeffreys, divergence, matching.
constexpr std::string_view method_name(Method m) noexcept {
    switch (m) {
        case Method::wal: return "wal";
        case Method::agc: return "agc";
        case Method::jef_fid: return "jeffreys";
        case Method::div: return "divergence";
        case Method::match: return "matching";
    }
    return "?";
}

inline std::optional<Method> parse_method(std::string_view name) {
    for (Method m : all_methods) {
        if (name == method_name(m) || name == method_tag(m)) return m;
    }
    if (name == "fiducial") return Method::jef_fid;
    return std::nullopt;
}

enum class Clip { none, unit };

struct IntervalEstimate {
    Method method = Method::wal;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    bool fallback = false;

    [[nodiscard]] double length() const noexcept { return upper - lower; }
    [[nodiscard]] bool contains(double delta) const noexcept { return lower <= delta && delta <= upper; }
};

namespace detail {

inline void require_level(double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::domain_error("level must lie in (0, 1)");
    }
}

// Lower and upper tail probabilities of an equal-tailed interval.
inline std::pair<double, double> tail_probabilities(double level) {
    const double lower = 0.5 * (1.0 - level);
    return {lower, 1.0 - lower};
}

inline IntervalEstimate normal_interval(Method method, double p1, double m1, double p2, double m2,
                                        double level, Clip clip) {
    const double z = -std_normal_quantile(tail_probabilities(level).first);
    const double center = p1 - p2;
    const double se = std::sqrt(p1 * (1.0 - p1) / m1 + p2 * (1.0 - p2) / m2);
    IntervalEstimate est{method, center - z * se, center + z * se, level, false};
    if (clip == Clip::unit) {
        est.lower = std::clamp(est.lower, -1.0, 1.0);
        est.upper = std::clamp(est.upper, -1.0, 1.0);
    }
    return est;
}

inline IntervalEstimate equal_tailed(Method method, const BetaDiffModel& model, double level) {
    const auto [lo, hi] = tail_probabilities(level);
    const DiffDistribution dist(model);
    return {method, dist.quantile(lo), dist.quantile(hi), level, false};
}

}  // namespace detail

/// Posterior margin Beta(x + prior_shape, n - x + prior_shape).
inline BetaParams posterior_margin(const Counts& c, double prior_shape) {
    return {c.x + prior_shape, c.n - c.x + prior_shape};
}

/// Fiducial quantity Q = B(x1+1/2, n1-x1+1/2) - B(x2+1/2, n2-x2+1/2); also
/// the Jeffreys posterior of p1 - p2.
inline BetaDiffModel jeffreys_model(const Counts& c1, const Counts& c2) {
    return {posterior_margin(c1, 0.5), posterior_margin(c2, 0.5)};
}

/// Posterior of p1 - p2 under the prior prod p^(-1/4) (1-p)^(-1/4).
inline BetaDiffModel divergence_model(const Counts& c1, const Counts& c2) {
    return {posterior_margin(c1, 0.75), posterior_margin(c2, 0.75)};
}

inline IntervalEstimate wald(const Counts& c1, const Counts& c2, double level, Clip clip = Clip::none) {
    detail::require_level(level);
    const double p1 = static_cast<double>(c1.x) / c1.n;
    const double p2 = static_cast<double>(c2.x) / c2.n;
    return detail::normal_interval(Method::wal, p1, c1.n, p2, c2.n, level, clip);
}

/// Wald form after adding one success and one failure to each group.
inline IntervalEstimate agresti_caffo(const Counts& c1, const Counts& c2, double level,
                                      Clip clip = Clip::none) {
    detail::require_level(level);
    const double m1 = c1.n + 2.0;
    const double m2 = c2.n + 2.0;
    return detail::normal_interval(Method::agc, (c1.x + 1.0) / m1, m1, (c2.x + 1.0) / m2, m2, level,
                                   clip);
}

inline IntervalEstimate jeffreys_fiducial(const Counts& c1, const Counts& c2, double level) {
    detail::require_level(level);
    return detail::equal_tailed(Method::jef_fid, jeffreys_model(c1, c2), level);
}

inline IntervalEstimate divergence(const Counts& c1, const Counts& c2, double level) {
    detail::require_level(level);
    return detail::equal_tailed(Method::div, divergence_model(c1, c2), level);
}

/// Equal-tailed interval from matching-posterior draws. Outcomes with an edge
/// count (x = 0 or x = n in either group) have no proper matching posterior;
/// they get the Jeffreys/fiducial interval with `fallback` set.
inline IntervalEstimate matching(const Counts& c1, const Counts& c2, double level, const McConfig& cfg,
                                 StreamId stream) {
    detail::require_level(level);
    if (!c1.interior() || !c2.interior()) {
        auto est = jeffreys_fiducial(c1, c2, level);
        est.method = Method::match;
        est.fallback = true;
        return est;
    }
    auto draws = matching_sample(MatchingPosterior(c1, c2), cfg, stream);
    std::vector<double> delta(draws.p1.size());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = draws.p1[i] - draws.p2[i];
    std::sort(delta.begin(), delta.end());
    const auto [lo, hi] = detail::tail_probabilities(level);
    return {Method::match, empirical_quantile(delta, lo), empirical_quantile(delta, hi), level, false};
}

/// Options shared by the uniform dispatch below.
struct IntervalOptions {
    McConfig mc{};
    Clip clip = Clip::none;
};

/// Interval for any method. MATCH draws from stream cell_stream(x1, x2, n2).
inline IntervalEstimate compute_interval(Method method, const Counts& c1, const Counts& c2, double level,
                                         const IntervalOptions& opts = {}) {
    switch (method) {
        case Method::wal: return wald(c1, c2, level, opts.clip);
        case Method::agc: return agresti_caffo(c1, c2, level, opts.clip);
        case Method::jef_fid: return jeffreys_fiducial(c1, c2, level);
        case Method::div: return divergence(c1, c2, level);
        case Method::match: return matching(c1, c2, level, opts.mc, cell_stream(c1.x, c2.x, c2.n));
    }
    throw std::invalid_argument("unknown method");
}

}  // namespace propdiff
