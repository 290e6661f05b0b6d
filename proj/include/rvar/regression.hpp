#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rvar/errors.hpp"
#include "rvar/time_series.hpp"

namespace rvar {

struct Design {
    Eigen::MatrixXd regressors;  ///< rows = time points, columns = terms in vector order
    Eigen::VectorXd response;
};

/// Lagged regression design for `ev` on the sample of 0-based time indices
/// [sample_offset, N). Column m holds X_{variable_m, t - lag_m}; the response
/// holds X_{ev.response(), t}.
inline Design build_design(const TimeSeriesSet& ts, const ExplanatoryVector& ev, std::size_t sample_offset) {
    if (ev.response() >= ts.K()) throw invalid_input("response index out of range");
    if (sample_offset < ev.max_lag())
        throw invalid_sample("sample offset " + std::to_string(sample_offset) + " leaves no room for lag " +
                             std::to_string(ev.max_lag()));
    if (sample_offset >= ts.N()) throw invalid_sample("sample offset leaves no observations");

    const auto rows = static_cast<Eigen::Index>(ts.N() - sample_offset);
    const auto& X = ts.values();
    Design d;
    d.regressors.resize(rows, static_cast<Eigen::Index>(ev.size()));
    for (std::size_t m = 0; m < ev.size(); ++m) {
        const auto& term = ev[m];
        if (term.variable >= ts.K()) throw invalid_input("term variable index out of range");
        d.regressors.col(static_cast<Eigen::Index>(m)) =
            X.row(static_cast<Eigen::Index>(term.variable))
                .segment(static_cast<Eigen::Index>(sample_offset - term.lag), rows)
                .transpose();
    }
    d.response = X.row(static_cast<Eigen::Index>(ev.response()))
                     .segment(static_cast<Eigen::Index>(sample_offset), rows)
                     .transpose();
    return d;
}

struct FitResult {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd residuals;
    double sse = 0.0;
    double sigma2 = 0.0;  ///< maximum-likelihood residual variance, sse / n_eff
    std::size_t n_eff = 0;
    double bic = 0.0;
    bool condition_flag = false;  ///< design numerically rank-deficient; coefficients are minimum-norm
};

/// BIC as n_eff * ln(sigma2) + n_params * ln(n_eff). A perfect fit (sigma2 == 0)
/// maps to -infinity so it orders below every finite score.
inline double bic(double sigma2, std::size_t n_eff, std::size_t n_params) {
    if (n_eff == 0) throw invalid_input("bic requires a positive sample size");
    if (!(sigma2 > 0.0)) return -std::numeric_limits<double>::infinity();
    const double n = static_cast<double>(n_eff);
    return n * std::log(sigma2) + static_cast<double>(n_params) * std::log(n);
}

inline double bic(const FitResult& fit, std::size_t n_params) { return bic(fit.sigma2, fit.n_eff, n_params); }

inline bool is_perfect_fit_bic(double value) { return std::isinf(value) && value < 0; }

/// Least squares via complete orthogonal decomposition (column-pivoted QR),
/// which yields the minimum-norm solution when the design is rank-deficient.
inline FitResult ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
    if (response.size() == 0) throw invalid_input("ols_fit: empty response");
    if (design.rows() != response.size()) throw invalid_input("ols_fit: design/response row mismatch");

    FitResult fit;
    fit.n_eff = static_cast<std::size_t>(response.size());
    if (design.cols() == 0) {
        fit.coefficients.resize(0);
        fit.residuals = response;
    } else {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
        fit.coefficients = cod.solve(response);
        fit.residuals = response - design * fit.coefficients;
        fit.condition_flag = cod.rank() < design.cols();
    }
    fit.sse = fit.residuals.squaredNorm();
    fit.sigma2 = fit.sse / static_cast<double>(fit.n_eff);
    fit.bic = bic(fit.sigma2, fit.n_eff, static_cast<std::size_t>(design.cols()));
    return fit;
}

inline FitResult ols_fit(const Design& d) { return ols_fit(d.regressors, d.response); }

/// Fits `ev` on the sample [sample_offset, N).
inline FitResult fit_model(const TimeSeriesSet& ts, const ExplanatoryVector& ev, std::size_t sample_offset) {
    return ols_fit(build_design(ts, ev, sample_offset));
}

/// Cross-product cache over every lagged column up to `pmax`, on the common
/// sample [pmax, N). Scoring any term subset then costs a small Cholesky
/// solve instead of a pass over the data, which is what makes the stepwise
/// searches cheap. Column index of (k, l) is k * pmax + (l - 1).
class LaggedGram {
public:
    LaggedGram(const TimeSeriesSet& ts, std::size_t pmax) : pmax_(pmax) {
        if (pmax < 1) throw invalid_input("pmax must be at least 1");
        if (pmax >= ts.N()) throw invalid_input("pmax must be smaller than the series length");
        K_ = ts.K();
        n_ = ts.N() - pmax;
        const auto n = static_cast<Eigen::Index>(n_);
        lagged_.resize(n, static_cast<Eigen::Index>(K_ * pmax));
        for (std::size_t k = 0; k < K_; ++k)
            for (std::size_t l = 1; l <= pmax; ++l)
                lagged_.col(static_cast<Eigen::Index>(column(k, l))) =
                    ts.values().row(static_cast<Eigen::Index>(k)).segment(static_cast<Eigen::Index>(pmax - l), n).transpose();
        responses_ = ts.values().rightCols(n).transpose();
        gram_ = lagged_.transpose() * lagged_;
        cross_ = lagged_.transpose() * responses_;
        yy_ = responses_.colwise().squaredNorm().transpose();
    }

    std::size_t K() const noexcept { return K_; }
    std::size_t pmax() const noexcept { return pmax_; }
    std::size_t n_eff() const noexcept { return n_; }
    std::size_t column(std::size_t variable, std::size_t lag) const noexcept { return variable * pmax_ + (lag - 1); }
    LaggedTerm term_of(std::size_t column) const noexcept { return {column / pmax_, column % pmax_ + 1}; }

    const Eigen::MatrixXd& lagged() const noexcept { return lagged_; }
    const Eigen::MatrixXd& gram() const noexcept { return gram_; }
    Eigen::VectorXd response(std::size_t j) const { return responses_.col(static_cast<Eigen::Index>(j)); }
    Eigen::VectorXd cross(std::size_t j) const { return cross_.col(static_cast<Eigen::Index>(j)); }
    double response_energy(std::size_t j) const { return yy_(static_cast<Eigen::Index>(j)); }

    /// Residual sum of squares of the response-j regression on `terms`.
    double sse(std::size_t j, std::span<const LaggedTerm> terms) const {
        const double yy = yy_(static_cast<Eigen::Index>(j));
        if (terms.empty()) return yy;
        const auto m = static_cast<Eigen::Index>(terms.size());
        std::vector<Eigen::Index> idx(terms.size());
        for (std::size_t a = 0; a < terms.size(); ++a) {
            if (terms[a].lag < 1 || terms[a].lag > pmax_ || terms[a].variable >= K_)
                throw invalid_input("term outside the lag window of this gram");
            idx[a] = static_cast<Eigen::Index>(column(terms[a].variable, terms[a].lag));
        }
        Eigen::MatrixXd g(m, m);
        Eigen::VectorXd h(m);
        for (Eigen::Index a = 0; a < m; ++a) {
            h(a) = cross_(idx[static_cast<std::size_t>(a)], static_cast<Eigen::Index>(j));
            for (Eigen::Index b = 0; b <= a; ++b) g(a, b) = gram_(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        }
        Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(g);
        if (llt.info() == Eigen::Success && llt.rcond() > 1e-10) {
            const Eigen::VectorXd z = llt.matrixL().solve(h);
            const double sse = yy - z.squaredNorm();
            // Cancellation dominates once the fit explains nearly everything.
            if (sse > 1e-8 * yy) return sse;
        }
        return exact_sse(j, idx);
    }

    double bic(std::size_t j, std::span<const LaggedTerm> terms) const {
        return rvar::bic(sse(j, terms) / static_cast<double>(n_), n_, terms.size());
    }

    double bic(const ExplanatoryVector& ev) const { return bic(ev.response(), ev.terms()); }

private:
    double exact_sse(std::size_t j, const std::vector<Eigen::Index>& idx) const {
        Eigen::MatrixXd design(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t a = 0; a < idx.size(); ++a) design.col(static_cast<Eigen::Index>(a)) = lagged_.col(idx[a]);
        return ols_fit(design, responses_.col(static_cast<Eigen::Index>(j))).sse;
    }

    std::size_t pmax_ = 0;
    std::size_t K_ = 0;
    std::size_t n_ = 0;
    Eigen::MatrixXd lagged_;
    Eigen::MatrixXd responses_;
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd cross_;
    Eigen::VectorXd yy_;
};

}  // namespace rvar
