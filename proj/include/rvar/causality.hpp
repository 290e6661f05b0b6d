#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rvar/distributions.hpp"
#include "rvar/errors.hpp"
#include "rvar/regression.hpp"
#include "rvar/selection.hpp"
#include "rvar/time_series.hpp"

namespace rvar {

enum class PairStatus {
    tested,        ///< F test carried out
    absent,        ///< U-model has no term of the driver; CGCI = 0, p = 1
    perfect_fit,   ///< U-model residual variance is zero
    infeasible,    ///< no residual degrees of freedom or unusable fit
};

inline const char* status_name(PairStatus s) {
    switch (s) {
        case PairStatus::tested: return "tested";
        case PairStatus::absent: return "absent";
        case PairStatus::perfect_fit: return "perfect_fit";
        case PairStatus::infeasible: return "infeasible";
    }
    return "?";
}

struct PairTest {
    double cgci = 0.0;
    double fstat = 0.0;
    double pvalue = 1.0;
    std::size_t driver_terms = 0;  ///< p_i
    std::size_t max_lag = 0;       ///< c
    std::size_t df_num = 0;
    std::size_t df_den = 0;
    PairStatus status = PairStatus::absent;
};

/// CGCI of driver i on response j for a given U-model. The R-model is the
/// U-model minus every term of i (no re-selection), and both are fit on the
/// sample after the U-model's largest lag so the models are nested.
inline PairTest cgci_pair(const TimeSeriesSet& ts, std::size_t j, std::size_t i, const ExplanatoryVector& umodel) {
    if (umodel.response() != j) throw invalid_input("U-model response does not match j");
    if (i == j) throw invalid_input("cgci_pair: driver and response must differ");
    if (i >= ts.K() || j >= ts.K()) throw invalid_input("cgci_pair: variable index out of range");

    PairTest out;
    out.driver_terms = umodel.count_of(i);
    out.max_lag = umodel.max_lag();
    if (out.driver_terms == 0) return out;

    const std::size_t c = out.max_lag;
    const std::size_t equations = ts.N() - std::min(c, ts.N());
    if (equations <= umodel.size())
        throw infeasible_model("F test has no residual degrees of freedom (" + std::to_string(equations) + " equations, " +
                               std::to_string(umodel.size()) + " coefficients)");
    out.df_num = out.driver_terms;
    out.df_den = equations - umodel.size();

    const FitResult u = fit_model(ts, umodel, c);
    if (u.condition_flag) throw infeasible_model("U-model design is rank-deficient");
    const FitResult r = fit_model(ts, umodel.without_variable(i), c);

    // Residuals at rounding level relative to the response count as an exact fit.
    const double energy = build_design(ts, umodel, c).response.squaredNorm();
    if (!(u.sse > 1e-20 * energy)) {
        out.status = PairStatus::perfect_fit;
        out.cgci = r.sse > 1e-20 * energy ? std::numeric_limits<double>::infinity() : 0.0;
        out.fstat = std::numeric_limits<double>::infinity();
        out.pvalue = 0.0;
        return out;
    }
    out.status = PairStatus::tested;
    out.cgci = std::max(0.0, std::log(r.sse / u.sse));
    out.fstat = std::max(0.0, ((r.sse - u.sse) / static_cast<double>(out.df_num)) / (u.sse / static_cast<double>(out.df_den)));
    out.pvalue = f_upper_tail(out.fstat, static_cast<double>(out.df_num), static_cast<double>(out.df_den));
    return out;
}

/// Standard CGCI on the full VAR(p): numerator dof p, denominator (N - p) - K p.
inline PairTest cgci_full_pair(const TimeSeriesSet& ts, std::size_t j, std::size_t i, std::size_t p) {
    if (p < 1) throw invalid_input("VAR order must be at least 1");
    if (ts.N() <= p || ts.N() - p <= ts.K() * p)
        throw infeasible_model("full VAR(" + std::to_string(p) + ") leaves no residual degrees of freedom");
    return cgci_pair(ts, j, i, full_model(j, ts.K(), p));
}

struct FdrResult {
    std::vector<bool> rejected;
    double cutoff = 0.0;  ///< largest p-value rejected; 0 when none
    std::size_t count = 0;
};

/// Benjamini-Hochberg step-up: reject every hypothesis with p <= p_(k), where
/// k is the largest rank with p_(k) <= k alpha / m.
inline FdrResult fdr_threshold(const std::vector<double>& pvalues, double alpha) {
    FdrResult out;
    const std::size_t m = pvalues.size();
    out.rejected.assign(m, false);
    if (m == 0) return out;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });

    std::size_t k_max = 0;
    for (std::size_t k = 1; k <= m; ++k)
        if (pvalues[order[k - 1]] <= static_cast<double>(k) * alpha / static_cast<double>(m)) k_max = k;
    if (k_max == 0) return out;

    out.cutoff = pvalues[order[k_max - 1]];
    for (std::size_t a = 0; a < m; ++a) {
        if (pvalues[a] <= out.cutoff) {
            out.rejected[a] = true;
            ++out.count;
        }
    }
    return out;
}

enum class Significance {
    fdr,   ///< Benjamini-Hochberg over the K(K-1) tests
    raw,   ///< each pair at level alpha
    none,  ///< adjacency = CGCI > 0
};

/// Row index = driver i, column index = response j.
struct CausalityMatrix {
    SelectionConfig config;
    double alpha = 0.05;
    Significance significance = Significance::fdr;
    std::vector<std::string> names;
    Eigen::MatrixXd cgci;
    Eigen::MatrixXd fstat;
    Eigen::MatrixXd pvalue;
    std::vector<std::vector<bool>> adjacency;
    std::vector<std::vector<PairStatus>> status;
    std::vector<ExplanatoryVector> models;
    std::vector<std::string> response_errors;  ///< empty string when selection succeeded
    double fdr_cutoff = 0.0;

    std::size_t K() const noexcept { return names.size(); }
    PairTest pair(std::size_t i, std::size_t j) const {
        PairTest p;
        p.cgci = cgci(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        p.fstat = fstat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        p.pvalue = pvalue(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        p.status = status[i][j];
        return p;
    }
    bool any_infeasible() const {
        for (const auto& row : status)
            for (auto s : row)
                if (s == PairStatus::infeasible) return true;
        return false;
    }
};

/// Selects a U-model per response, tests every ordered pair and fills the
/// adjacency. Infeasible responses or pairs are reported in `status` and are
/// never detected; they are left out of the FDR family. The input is
/// de-meaned first.
inline CausalityMatrix causality_matrix(const TimeSeriesSet& raw, const SelectionConfig& cfg, double alpha,
                                        Significance significance = Significance::fdr) {
    if (raw.K() < 2) throw invalid_input("causality analysis needs at least two variables");
    if (!(alpha > 0.0 && alpha < 1.0)) throw invalid_input("alpha must lie in (0, 1)");
    check_config(raw, cfg);
    const TimeSeriesSet ts = demean(raw);
    const std::size_t K = ts.K();
    const auto Ki = static_cast<Eigen::Index>(K);

    CausalityMatrix cm;
    cm.config = cfg;
    cm.alpha = alpha;
    cm.significance = significance;
    cm.names = ts.names();
    cm.cgci = Eigen::MatrixXd::Zero(Ki, Ki);
    cm.fstat = Eigen::MatrixXd::Zero(Ki, Ki);
    cm.pvalue = Eigen::MatrixXd::Ones(Ki, Ki);
    cm.adjacency.assign(K, std::vector<bool>(K, false));
    cm.status.assign(K, std::vector<PairStatus>(K, PairStatus::absent));
    cm.response_errors.assign(K, std::string{});

    const LaggedGram gram(ts, cfg.pmax);
    for (std::size_t j = 0; j < K; ++j) {
        ExplanatoryVector umodel(j);
        try {
            umodel = select_model(gram, j, cfg);
        } catch (const infeasible_model& e) {
            cm.models.push_back(umodel);
            cm.response_errors[j] = e.what();
            for (std::size_t i = 0; i < K; ++i)
                if (i != j) cm.status[i][j] = PairStatus::infeasible;
            continue;
        }
        cm.models.push_back(umodel);
        for (std::size_t i = 0; i < K; ++i) {
            if (i == j) continue;
            PairTest t;
            try {
                t = cfg.method == Method::Full ? cgci_full_pair(ts, j, i, cfg.pmax) : cgci_pair(ts, j, i, umodel);
            } catch (const infeasible_model& e) {
                t.status = PairStatus::infeasible;
                if (cm.response_errors[j].empty()) cm.response_errors[j] = e.what();
            }
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            cm.cgci(ii, jj) = t.cgci;
            cm.fstat(ii, jj) = t.fstat;
            cm.pvalue(ii, jj) = t.pvalue;
            cm.status[i][j] = t.status;
        }
    }

    std::vector<double> family;
    std::vector<std::pair<std::size_t, std::size_t>> members;
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t j = 0; j < K; ++j) {
            if (i == j || cm.status[i][j] == PairStatus::infeasible) continue;
            family.push_back(cm.pvalue(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            members.emplace_back(i, j);
        }

    switch (significance) {
        case Significance::fdr: {
            const FdrResult fdr = fdr_threshold(family, alpha);
            cm.fdr_cutoff = fdr.cutoff;
            for (std::size_t a = 0; a < members.size(); ++a)
                if (fdr.rejected[a]) cm.adjacency[members[a].first][members[a].second] = true;
            break;
        }
        case Significance::raw:
            for (std::size_t a = 0; a < members.size(); ++a)
                if (family[a] <= alpha) cm.adjacency[members[a].first][members[a].second] = true;
            break;
        case Significance::none:
            for (const auto& [i, j] : members)
                if (cm.cgci(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) cm.adjacency[i][j] = true;
            break;
    }
    return cm;
}

}  // namespace rvar
