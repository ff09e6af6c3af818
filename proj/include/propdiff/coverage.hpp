#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <stdexcept>
#include <thread>
#include <tuple>
#include <utility>
#include <vector>

#include "propdiff/distributions.hpp"
#include "propdiff/intervals.hpp"

namespace propdiff {

/// True parameters and sample sizes of one coverage evaluation.
struct Scenario {
    int n1 = 10;
    int n2 = 10;
    Probability p1{0.5};
    Probability p2{0.5};
    double level = 0.95;

    [[nodiscard]] double delta() const noexcept { return p1.value() - p2.value(); }
};

struct CoverageResult {
    double cr = 0.0;             // exact coverage rate
    double le = 0.0;             // expected interval length
    std::size_t cells = 0;       // (n1 + 1)(n2 + 1)
    double fallback_mass = 0.0;  // pmf weight of MATCH cells that used the fallback
};

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) noexcept {
        const double t = sum_ + v;
        if (std::fabs(sum_) >= std::fabs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Thread-safe memo of per-cell intervals keyed by everything that can
/// change an endpoint: (method, x1, x2, n1, n2, level, seed, samples, clip).
class IntervalCache {
public:
    using Key = std::tuple<Method, int, int, int, int, std::uint64_t, std::uint64_t, std::size_t, Clip>;

    static Key make_key(Method m, const Counts& c1, const Counts& c2, double level,
                        const IntervalOptions& opts) {
        // Closed-form and quadrature methods do not depend on the MC settings.
        const bool sampled = m == Method::match;
        const bool clipped = m == Method::wal || m == Method::agc;
        return {m,
                c1.x,
                c2.x,
                c1.n,
                c2.n,
                std::bit_cast<std::uint64_t>(level),
                sampled ? opts.mc.seed : 0,
                sampled ? opts.mc.samples : 0,
                clipped ? opts.clip : Clip::none};
    }

    IntervalEstimate get_or_compute(Method m, const Counts& c1, const Counts& c2, double level,
                                    const IntervalOptions& opts) {
        const Key key = make_key(m, c1, c2, level, opts);
        {
            std::lock_guard lock(mutex_);
            if (auto it = entries_.find(key); it != entries_.end()) return it->second;
        }
        const auto est = compute_interval(m, c1, c2, level, opts);
        std::lock_guard lock(mutex_);
        entries_.emplace(key, est);
        return est;
    }

    [[nodiscard]] std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

private:
    mutable std::mutex mutex_;
    std::map<Key, IntervalEstimate> entries_;
};

struct CoverageOptions {
    IntervalOptions interval{};
    unsigned workers = 1;
    IntervalCache* cache = nullptr;
};

/// Interval of every outcome cell, row-major in (x1, x2). Cells are
/// distributed over `workers` threads; each cell's value is independent of
/// which worker computed it.
inline std::vector<IntervalEstimate> cell_intervals(Method method, int n1, int n2, double level,
                                                    const CoverageOptions& opts) {
    const std::size_t cols = static_cast<std::size_t>(n2) + 1;
    const std::size_t total = (static_cast<std::size_t>(n1) + 1) * cols;
    std::vector<IntervalEstimate> out(total);

    auto compute = [&](std::size_t idx) {
        const Counts c1(static_cast<int>(idx / cols), n1);
        const Counts c2(static_cast<int>(idx % cols), n2);
        out[idx] = opts.cache ? opts.cache->get_or_compute(method, c1, c2, level, opts.interval)
                              : compute_interval(method, c1, c2, level, opts.interval);
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(total)));
    if (workers == 1) {
        for (std::size_t i = 0; i < total; ++i) compute(i);
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                try {
                    for (std::size_t i = next++; i < total; i = next++) compute(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

/// Exact coverage rate and expected length by enumerating all outcomes:
///   cr = sum_{x1,x2} pmf(x1; n1, p1) pmf(x2; n2, p2) 1{L <= p1 - p2 <= U}
///   le = sum_{x1,x2} pmf(x1; n1, p1) pmf(x2; n2, p2) (U - L)
/// accumulated with compensation in row-major cell order.
inline CoverageResult exact_coverage(Method method, const Scenario& s, const CoverageOptions& opts = {}) {
    if (s.n1 < 1 || s.n2 < 1) throw std::invalid_argument("sample sizes must be positive");
    detail::require_level(s.level);

    const auto intervals = cell_intervals(method, s.n1, s.n2, s.level, opts);

    std::vector<double> w1(s.n1 + 1);
    std::vector<double> w2(s.n2 + 1);
    for (int k = 0; k <= s.n1; ++k) w1[k] = binom_pmf(k, s.n1, s.p1);
    for (int k = 0; k <= s.n2; ++k) w2[k] = binom_pmf(k, s.n2, s.p2);

    const double delta = s.delta();
    CompensatedSum cr;
    CompensatedSum le;
    CompensatedSum fallback;
    std::size_t idx = 0;
    for (int x1 = 0; x1 <= s.n1; ++x1) {
        for (int x2 = 0; x2 <= s.n2; ++x2, ++idx) {
            const double w = w1[x1] * w2[x2];
            const auto& est = intervals[idx];
            if (est.contains(delta)) cr.add(w);
            le.add(w * est.length());
            if (est.fallback) fallback.add(w);
        }
    }
    return {cr.value(), le.value(), intervals.size(), fallback.value()};
}

/// Unweighted mean of exact_coverage over (p1, p2) grid points.
inline CoverageResult grid_average(Method method, int n1, int n2, double level,
                                   std::span<const std::pair<double, double>> grid,
                                   const CoverageOptions& opts = {}) {
    if (grid.empty()) throw std::invalid_argument("grid_average needs a nonempty grid");
    IntervalCache local_cache;
    CoverageOptions run = opts;
    if (!run.cache) run.cache = &local_cache;

    CompensatedSum cr;
    CompensatedSum le;
    CompensatedSum fallback;
    for (const auto& [p1, p2] : grid) {
        const auto r = exact_coverage(method, Scenario{n1, n2, Probability(p1), Probability(p2), level}, run);
        cr.add(r.cr);
        le.add(r.le);
        fallback.add(r.fallback_mass);
    }
    const auto count = static_cast<double>(grid.size());
    return {cr.value() / count, le.value() / count,
            (static_cast<std::size_t>(n1) + 1) * (static_cast<std::size_t>(n2) + 1),
            fallback.value() / count};
}

struct TableEntry {
    Scenario scenario;
    Method method;
    CoverageResult result;
};

/// exact_coverage for every (row, method) pair, row-major. Cells shared
/// between rows are computed once.
inline std::vector<TableEntry> table_sweep(std::span<const Scenario> rows, std::span<const Method> methods,
                                           const CoverageOptions& opts = {}) {
    IntervalCache local_cache;
    CoverageOptions run = opts;
    if (!run.cache) run.cache = &local_cache;

    std::vector<TableEntry> out;
    out.reserve(rows.size() * methods.size());
    for (const auto& row : rows) {
        for (Method m : methods) {
            out.push_back({row, m, exact_coverage(m, row, run)});
        }
    }
    return out;
}

}  // namespace propdiff
