#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "rvar/errors.hpp"

namespace rvar {

namespace detail {

// Continued fraction for the incomplete beta function, modified Lentz.
inline double beta_continued_fraction(double a, double b, double x) {
    constexpr int max_iterations = 20000;
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
    for (int m = 1; m <= max_iterations; ++m) {
        const double md = m;
        const double m2 = 2.0 * md;
        double aa = md * (b - md) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + md) * (qab + md) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < eps) return h;
    }
    return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b) and its complement 1 - I_x(a, b).
/// Takes x and y = 1 - x separately so callers can pass an exact complement
/// and keep precision in both tails.
inline std::pair<double, double> incomplete_beta(double a, double b, double x, double y) {
    if (!(a > 0.0) || !(b > 0.0)) throw invalid_input("incomplete_beta: shape parameters must be positive");
    if (x <= 0.0) return {0.0, 1.0};
    if (y <= 0.0) return {1.0, 0.0};
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        const double lower = front * detail::beta_continued_fraction(a, b, x) / a;
        return {lower, 1.0 - lower};
    }
    const double upper = front * detail::beta_continued_fraction(b, a, y) / b;
    return {1.0 - upper, upper};
}

inline double incomplete_beta(double a, double b, double x) { return incomplete_beta(a, b, x, 1.0 - x).first; }

/// P(F > f) for F ~ F(df_num, df_den).
inline double f_upper_tail(double f, double df_num, double df_den) {
    if (!(df_num > 0.0) || !(df_den > 0.0)) throw invalid_input("f_upper_tail: degrees of freedom must be positive");
    if (std::isnan(f)) return std::numeric_limits<double>::quiet_NaN();
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    const double denom = df_den + df_num * f;
    return incomplete_beta(0.5 * df_den, 0.5 * df_num, df_den / denom, df_num * f / denom).first;
}

/// Two-sided P(|T| > |t|) for Student's t with `df` degrees of freedom.
inline double t_two_sided(double t, double df) {
    if (!(df > 0.0)) throw invalid_input("t_two_sided: degrees of freedom must be positive");
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    const double t2 = t * t;
    return incomplete_beta(0.5 * df, 0.5, df / (df + t2), t2 / (df + t2)).first;
}

}  // namespace rvar
