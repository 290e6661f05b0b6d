#pragma once

// Independent reference computations used by the tests. None of these call
// into the library's solvers or special functions.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rvar/simulators.hpp"
#include "rvar/time_series.hpp"

namespace oracle {

/// Least squares through the normal equations with a full-pivot LU.
inline Eigen::VectorXd normal_equations(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::MatrixXd XtX = X.transpose() * X;
    const Eigen::VectorXd Xty = X.transpose() * y;
    return XtX.fullPivLu().solve(Xty);
}

namespace detail {
inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                           double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
}  // namespace detail

/// Adaptive Simpson quadrature on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-12) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, 50);
}

/// Integral of f over [x0, inf) through x = x0 + s / (1 - s).
inline double upper_integral(const std::function<double(double)>& f, double x0, double tol = 1e-13) {
    auto g = [&](double s) {
        if (s >= 1.0) return 0.0;
        const double x = x0 + s / (1.0 - s);
        return f(x) / ((1.0 - s) * (1.0 - s));
    };
    return simpson(g, 0.0, 1.0 - 1e-12, tol);
}

inline double f_density(double x, double d1, double d2) {
    if (x <= 0.0) return 0.0;
    const double logc = std::lgamma(0.5 * (d1 + d2)) - std::lgamma(0.5 * d1) - std::lgamma(0.5 * d2) +
                        0.5 * d1 * std::log(d1 / d2);
    return std::exp(logc + (0.5 * d1 - 1.0) * std::log(x) - 0.5 * (d1 + d2) * std::log1p(d1 * x / d2));
}

inline double t_density(double x, double nu) {
    const double logc = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * M_PI);
    return std::exp(logc - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

inline double f_tail(double f, double d1, double d2) {
    return upper_integral([&](double x) { return f_density(x, d1, d2); }, f);
}

inline double t_two_sided(double t, double nu) {
    return 2.0 * upper_integral([&](double x) { return t_density(x, nu); }, std::fabs(t));
}

/// Benjamini-Hochberg by the textbook description: sort, find the largest
/// rank k with p_(k) <= k alpha / m, reject ranks 1..k.
inline std::vector<bool> step_up(const std::vector<double>& p, double alpha) {
    const std::size_t m = p.size();
    std::vector<std::size_t> order(m);
    for (std::size_t a = 0; a < m; ++a) order[a] = a;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b)
            if (p[order[b]] < p[order[a]]) std::swap(order[a], order[b]);
    std::size_t k = 0;
    for (std::size_t r = 1; r <= m; ++r)
        if (p[order[r - 1]] <= static_cast<double>(r) * alpha / static_cast<double>(m)) k = r;
    std::vector<bool> out(m, false);
    for (std::size_t r = 0; r < k; ++r) out[order[r]] = true;
    return out;
}

/// BIC of the regression of variable j on a term set, with every model fit on
/// the rows t = offset .. N-1 by the normal equations.
inline double subset_bic(const rvar::TimeSeriesSet& ts, std::size_t j, const std::vector<rvar::LaggedTerm>& terms,
                         std::size_t offset) {
    const std::size_t n = ts.N() - offset;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(terms.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        y(static_cast<Eigen::Index>(r)) = ts(j, offset + r);
        for (std::size_t c = 0; c < terms.size(); ++c)
            X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = ts(terms[c].variable, offset + r - terms[c].lag);
    }
    double sse = y.squaredNorm();
    if (!terms.empty()) sse = (y - X * normal_equations(X, y)).squaredNorm();
    const double nn = static_cast<double>(n);
    return nn * std::log(sse / nn) + static_cast<double>(terms.size()) * std::log(nn);
}

struct BestSubset {
    std::vector<rvar::LaggedTerm> terms;
    double bic = std::numeric_limits<double>::infinity();
};

/// Exhaustive search over every subset of the K * pmax lagged terms.
inline BestSubset best_subset(const rvar::TimeSeriesSet& ts, std::size_t j, std::size_t pmax) {
    const std::size_t P = ts.K() * pmax;
    BestSubset best;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << P); ++mask) {
        std::vector<rvar::LaggedTerm> terms;
        for (std::size_t b = 0; b < P; ++b)
            if (mask >> b & 1u) terms.push_back({b / pmax, b % pmax + 1});
        const double v = subset_bic(ts, j, terms, pmax);
        if (v < best.bic) {
            best.bic = v;
            best.terms = terms;
        }
    }
    return best;
}

/// X1 = 0.4 X1(t-1) + u1, X2 = 0.4 X2(t-1) - 0.3 X1(t-4) + u2.
inline rvar::VarSystemSpec bivariate_spec() {
    std::vector<Eigen::MatrixXd> lags(4, Eigen::MatrixXd::Zero(2, 2));
    lags[0](0, 0) = 0.4;
    lags[0](1, 1) = 0.4;
    lags[3](1, 0) = -0.3;
    return rvar::VarSystemSpec(lags, Eigen::VectorXd::Ones(2), "bivariate");
}

inline rvar::TimeSeriesSet white_noise(std::size_t K, std::size_t N, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Eigen::MatrixXd v(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(N));
    for (Eigen::Index t = 0; t < v.cols(); ++t)
        for (Eigen::Index k = 0; k < v.rows(); ++k) v(k, t) = z(rng);
    return rvar::TimeSeriesSet(v);
}

}  // namespace oracle
