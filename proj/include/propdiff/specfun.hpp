#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace propdiff {

/// A probability in [0, 1]. Converts implicitly to double.
class Probability {
public:
    constexpr Probability() = default;

    explicit Probability(double value) : value_(value) {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw std::domain_error("probability out of [0, 1]: " + std::to_string(value));
        }
    }

    [[nodiscard]] constexpr double value() const noexcept { return value_; }
    constexpr operator double() const noexcept { return value_; }

private:
    double value_ = 0.0;
};

namespace detail {

inline void require_shape(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw std::domain_error("beta shapes must be positive and finite");
    }
}

// ln B(a, b)
inline double log_beta(double a, double b) {
    return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Modified Lentz evaluation of the incomplete beta continued fraction.
inline double beta_continued_fraction(double x, double a, double b) {
    constexpr int max_iter = 10000;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

// I_x(a,b) given both x and 1-x; the complement is passed explicitly so that
// callers close to x = 1 keep full precision.
inline double reg_inc_beta_split(double x, double one_minus_x, double a, double b, double log_b) {
    if (x <= 0.0) return 0.0;
    if (one_minus_x <= 0.0) return 1.0;
    const double log_front = a * std::log(x) + b * std::log(one_minus_x) - log_b;
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(log_front) * beta_continued_fraction(x, a, b) / a;
    }
    return 1.0 - std::exp(log_front) * beta_continued_fraction(one_minus_x, b, a) / b;
}

inline double reg_inc_beta_split(double x, double one_minus_x, double a, double b) {
    return reg_inc_beta_split(x, one_minus_x, a, b, log_beta(a, b));
}

// Beta(a,b) log density at x with explicit complement.
inline double log_beta_density_split(double x, double one_minus_x, double a, double b, double log_b) {
    return (a - 1.0) * std::log(x) + (b - 1.0) * std::log(one_minus_x) - log_b;
}

}  // namespace detail

/// ln Γ(x) for x > 0.
inline double log_gamma(double x) {
    if (!(x > 0.0)) {
        throw std::domain_error("log_gamma requires x > 0");
    }
    return std::lgamma(x);
}

/// Regularized incomplete beta I_x(a, b), the Beta(a, b) CDF at x.
inline double reg_inc_beta(double x, double a, double b) {
    detail::require_shape(a, b);
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("reg_inc_beta requires x in [0, 1]");
    }
    const double value = detail::reg_inc_beta_split(x, 1.0 - x, a, b);
    return std::clamp(value, 0.0, 1.0);
}

/// Inverse of reg_inc_beta in x: the q-quantile of Beta(a, b).
///
/// Bracketed Newton iteration. A Newton step that leaves the bracket or does
/// not halve the residual is replaced by a bisection step (geometric when the
/// bracket spans orders of magnitude), so the iterate stays inside (0, 1)
/// even when the density is unbounded at an endpoint. When no double attains
/// the target (steep CDF next to 0 or 1), the evaluated bracket end with the
/// smaller residual is returned.
inline double inv_reg_inc_beta(double q, double a, double b) {
    detail::require_shape(a, b);
    if (!(q > 0.0 && q < 1.0)) {
        throw std::domain_error("inv_reg_inc_beta requires q in (0, 1)");
    }
    const double log_b = detail::log_beta(a, b);
    const double tol = 1e-15 * std::min(q, 1.0 - q);

    double lo = 0.0, f_lo = -q;
    double hi = 1.0, f_hi = 1.0 - q;
    bool lo_seen = false, hi_seen = false;
    double x = std::clamp(a / (a + b), 1e-3, 1.0 - 1e-3);
    double previous_residual = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < 2000; ++iter) {
        const double f = detail::reg_inc_beta_split(x, 1.0 - x, a, b, log_b) - q;
        if (std::fabs(f) <= tol) return x;
        if (f < 0.0) {
            lo = x, f_lo = f, lo_seen = true;
        } else {
            hi = x, f_hi = f, hi_seen = true;
        }
        if (std::nextafter(lo, 1.0) >= hi) break;

        const double pdf = std::exp((a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_b);
        double next = x - f / pdf;
        const bool newton_ok = pdf > 0.0 && std::isfinite(pdf) && next > lo && next < hi &&
                               std::fabs(f) < 0.5 * previous_residual;
        if (!newton_ok) {
            if (lo == 0.0) {
                next = hi / 16.0;
            } else if (hi == 1.0) {
                next = 1.0 - (1.0 - lo) / 16.0;
            } else if (hi / lo > 16.0) {
                next = std::sqrt(lo * hi);
            } else if ((1.0 - lo) / (1.0 - hi) > 16.0) {
                next = 1.0 - std::sqrt((1.0 - lo) * (1.0 - hi));
            } else {
                next = lo + 0.5 * (hi - lo);
            }
            if (!(next > lo && next < hi)) next = lo + 0.5 * (hi - lo);
            if (!(next > lo && next < hi)) break;
        }
        previous_residual = std::fabs(f);
        x = next;
    }
    if (!lo_seen) return hi;
    if (!hi_seen) return lo;
    return -f_lo <= f_hi ? lo : hi;
}

/// z with Φ(z) = q.
///
/// Rational initial approximation (Acklam) followed by a Halley correction
/// against erfc. Values above one half are reflected so that
/// quantile(q) == -quantile(1 - q) holds exactly for the computed 1 - q.
inline double std_normal_quantile(double q) {
    if (!(q > 0.0 && q < 1.0)) {
        throw std::domain_error("std_normal_quantile requires q in (0, 1)");
    }
    if (q > 0.5) return -std_normal_quantile(1.0 - q);
    if (q == 0.5) return 0.0;

    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};

    double z;
    if (q < 0.02425) {
        const double t = std::sqrt(-2.0 * std::log(q));
        z = (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
            ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
    } else {
        const double u = q - 0.5;
        const double r = u * u;
        z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }

    constexpr double sqrt_2pi = 2.50662827463100050242;
    for (int i = 0; i < 2; ++i) {
        const double e = 0.5 * std::erfc(-z / std::sqrt(2.0)) - q;
        const double u = e * sqrt_2pi * std::exp(0.5 * z * z);
        z = z - u / (1.0 + 0.5 * z * u);
    }
    return z;
}

}  // namespace propdiff
