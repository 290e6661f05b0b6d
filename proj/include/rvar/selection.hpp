#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rvar/errors.hpp"
#include "rvar/regression.hpp"
#include "rvar/time_series.hpp"

namespace rvar {

enum class Method { mBTS, TDlag, TDvar, BUlag, BUvar, LASSO, Full };

inline constexpr std::array<Method, 7> all_methods{Method::mBTS,  Method::TDlag, Method::TDvar, Method::BUlag,
                                                   Method::BUvar, Method::LASSO, Method::Full};

inline std::string_view method_name(Method m) {
    switch (m) {
        case Method::mBTS: return "mBTS";
        case Method::TDlag: return "TDlag";
        case Method::TDvar: return "TDvar";
        case Method::BUlag: return "BUlag";
        case Method::BUvar: return "BUvar";
        case Method::LASSO: return "LASSO";
        case Method::Full: return "Full";
    }
    return "?";
}

/// Case-insensitive; "BTS" is accepted for mBTS.
inline Method parse_method(std::string_view text) {
    std::string lower;
    for (char ch : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (lower == "bts") return Method::mBTS;
    for (Method m : all_methods) {
        std::string name;
        for (char ch : method_name(m)) name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        if (name == lower) return m;
    }
    throw invalid_input("unknown method '" + std::string(text) + "'");
}

struct SelectionConfig {
    std::size_t pmax = 5;
    Method method = Method::mBTS;
    /// Significance level reserved for a covariance-test stopping rule on the
    /// LASSO path. The shipped rule is BIC over OLS refits and ignores it.
    double lasso_alpha = 0.05;
    /// Apply the lasso modification (drop a term whose coefficient hits zero)
    /// when tracing the LARS path.
    bool lasso_modification = false;
};

/// Every lagged term up to `pmax`, variable-major then lag.
inline ExplanatoryVector full_model(std::size_t j, std::size_t K, std::size_t pmax) {
    if (j >= K) throw invalid_input("response index out of range");
    ExplanatoryVector ev(j);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 1; l <= pmax; ++l) ev.add({k, l});
    return ev;
}

// ---------------------------------------------------------------------------
// Modified backward-in-time selection

struct MbtsTrace {
    std::vector<double> accepted_bic;  ///< starts with the empty-model BIC
    std::size_t iterations = 0;
};

/// Grows the model one lagged term per cycle. Each variable has a frontier
/// (largest lag already tried); a cycle offers every variable's next lag,
/// takes the best one if it lowers BIC, and otherwise advances every frontier
/// by one. Lags of a variable need not be contiguous in the result.
inline ExplanatoryVector mbts_select(const LaggedGram& gram, std::size_t j, MbtsTrace* trace = nullptr) {
    const std::size_t K = gram.K();
    const std::size_t pmax = gram.pmax();
    if (j >= K) throw invalid_input("response index out of range");

    ExplanatoryVector w(j);
    std::vector<LaggedTerm> candidate;
    double incumbent = gram.bic(j, w.terms());
    std::vector<std::size_t> frontier(K, 0);
    std::size_t frontier_sum = 0;
    if (trace) trace->accepted_bic.assign(1, incumbent);

    while (frontier_sum < K * pmax) {
        if (trace) ++trace->iterations;
        double best = incumbent;
        std::optional<std::size_t> best_k;
        for (std::size_t k = 0; k < K; ++k) {
            if (frontier[k] >= pmax) continue;
            candidate = w.terms();
            candidate.push_back({k, frontier[k] + 1});
            const double score = gram.bic(j, candidate);
            // Strict comparison keeps the smallest variable index on ties.
            if (score < best) {
                best = score;
                best_k = k;
            }
        }
        if (best_k) {
            const std::size_t k = *best_k;
            w.add({k, frontier[k] + 1});
            ++frontier[k];
            ++frontier_sum;
            incumbent = best;
            if (trace) trace->accepted_bic.push_back(best);
        } else {
            for (auto& f : frontier) {
                if (f < pmax) {
                    ++f;
                    ++frontier_sum;
                }
            }
        }
    }
    return w;
}

// ---------------------------------------------------------------------------
// Top-down and bottom-up stepwise strategies

enum class SweepOrder {
    by_lag,       ///< lag pmax down to 1, within a lag variable K down to 1
    by_variable,  ///< variable K down to 1, within a variable lag pmax down to 1
};

inline std::vector<LaggedTerm> sweep_sequence(std::size_t K, std::size_t pmax, SweepOrder order) {
    std::vector<LaggedTerm> seq;
    seq.reserve(K * pmax);
    if (order == SweepOrder::by_lag) {
        for (std::size_t l = pmax; l >= 1; --l)
            for (std::size_t k = K; k-- > 0;) seq.push_back({k, l});
    } else {
        for (std::size_t k = K; k-- > 0;)
            for (std::size_t l = pmax; l >= 1; --l) seq.push_back({k, l});
    }
    return seq;
}

/// Single backward pass: each present term is visited once in sweep order and
/// removed iff removal lowers BIC.
inline ExplanatoryVector prune(const LaggedGram& gram, ExplanatoryVector model, SweepOrder order) {
    const std::size_t j = model.response();
    double current = gram.bic(model);
    for (const auto& term : sweep_sequence(gram.K(), gram.pmax(), order)) {
        if (!model.contains(term)) continue;
        ExplanatoryVector reduced = model;
        reduced.remove(term);
        const double score = gram.bic(j, reduced.terms());
        if (score < current) {
            model = std::move(reduced);
            current = score;
        }
    }
    return model;
}

/// Top-down strategy from the full model. Needs more observations than terms.
inline ExplanatoryVector topdown_select(const LaggedGram& gram, std::size_t j, SweepOrder order) {
    if (gram.n_eff() <= gram.K() * gram.pmax())
        throw infeasible_model("top-down selection needs N - pmax > K * pmax (" + std::to_string(gram.n_eff()) +
                               " <= " + std::to_string(gram.K() * gram.pmax()) + ")");
    return prune(gram, full_model(j, gram.K(), gram.pmax()), order);
}

/// Bottom-up strategy: for each variable in index order, append the block of
/// lags 1..p_k with p_k in 0..pmax minimizing BIC given earlier blocks; then
/// prune the assembled model with the matching sweep order.
inline ExplanatoryVector bottomup_select(const LaggedGram& gram, std::size_t j, SweepOrder order) {
    if (j >= gram.K()) throw invalid_input("response index out of range");
    std::vector<LaggedTerm> model;
    for (std::size_t k = 0; k < gram.K(); ++k) {
        std::vector<LaggedTerm> trial = model;
        double best = gram.bic(j, trial);
        std::size_t best_order = 0;
        for (std::size_t p = 1; p <= gram.pmax(); ++p) {
            trial.push_back({k, p});
            const double score = gram.bic(j, trial);
            if (score < best) {
                best = score;
                best_order = p;
            }
        }
        for (std::size_t p = 1; p <= best_order; ++p) model.push_back({k, p});
    }
    return prune(gram, ExplanatoryVector(j, std::move(model)), order);
}

// ---------------------------------------------------------------------------
// Least-angle regression

enum class LarsEvent { enter, drop };

struct LarsStep {
    LarsEvent event = LarsEvent::enter;
    LaggedTerm term;
    Eigen::VectorXd coefficients;  ///< all K*pmax coefficients (original scale) at this breakpoint
    double l1_norm = 0.0;          ///< constraint value s at this breakpoint
    double max_correlation = 0.0;  ///< common absolute correlation of the active set (standardized)
};

struct LarsPath {
    std::size_t response = 0;
    std::size_t pmax = 0;
    std::vector<LarsStep> steps;
    Eigen::VectorXd final_coefficients;  ///< end of path: least squares on the final active set

    /// Active set after the first `step_count` events, in entry order.
    std::vector<LaggedTerm> active_after(std::size_t step_count) const {
        std::vector<LaggedTerm> active;
        for (std::size_t s = 0; s < step_count && s < steps.size(); ++s) {
            if (steps[s].event == LarsEvent::enter)
                active.push_back(steps[s].term);
            else
                std::erase(active, steps[s].term);
        }
        return active;
    }
};

/// LARS over all lagged columns of the common sample. Columns are scaled to
/// unit norm internally and coefficients are reported on the original scale.
inline LarsPath lars_path(const LaggedGram& gram, std::size_t j, bool lasso_modification = false) {
    const std::size_t K = gram.K();
    if (j >= K) throw invalid_input("response index out of range");
    const auto P = static_cast<Eigen::Index>(K * gram.pmax());
    const Eigen::MatrixXd& G = gram.gram();

    Eigen::VectorXd scale = G.diagonal().cwiseSqrt();
    for (Eigen::Index a = 0; a < P; ++a)
        if (!(scale(a) > 1e-12 * std::max(1.0, scale.maxCoeff()))) {
            const auto t = gram.term_of(static_cast<std::size_t>(a));
            throw degenerate_column("lagged column of variable " + std::to_string(t.variable + 1) + " lag " +
                                    std::to_string(t.lag) + " has zero norm");
        }
    const Eigen::MatrixXd Gs = scale.cwiseInverse().asDiagonal() * G * scale.cwiseInverse().asDiagonal();
    for (Eigen::Index a = 0; a < P; ++a)
        for (Eigen::Index b = 0; b < a; ++b)
            if (std::fabs(Gs(a, b)) > 1.0 - 1e-10) throw degenerate_column("collinear lagged columns in LARS design");

    const Eigen::VectorXd c0 = gram.cross(j).cwiseQuotient(scale);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(P);
    Eigen::VectorXd corr = c0;
    std::vector<Eigen::Index> active;
    std::vector<bool> is_active(static_cast<std::size_t>(P), false);
    const auto max_active = static_cast<std::size_t>(std::min<Eigen::Index>(P, static_cast<Eigen::Index>(gram.n_eff()) - 1));

    LarsPath path;
    path.response = j;
    path.pmax = gram.pmax();

    auto record = [&](LarsEvent ev, Eigen::Index col, double C) {
        LarsStep step;
        step.event = ev;
        step.term = gram.term_of(static_cast<std::size_t>(col));
        step.coefficients = beta.cwiseQuotient(scale);
        step.l1_norm = step.coefficients.lpNorm<1>();
        step.max_correlation = C;
        path.steps.push_back(std::move(step));
    };

    if (max_active == 0 || c0.cwiseAbs().maxCoeff() <= 0.0) {
        path.final_coefficients = Eigen::VectorXd::Zero(P);
        return path;
    }
    {
        Eigen::Index first = 0;
        c0.cwiseAbs().maxCoeff(&first);
        active.push_back(first);
        is_active[static_cast<std::size_t>(first)] = true;
        record(LarsEvent::enter, first, std::fabs(c0(first)));
    }

    constexpr double step_floor = 1e-12;
    const std::size_t iteration_cap = 8 * static_cast<std::size_t>(P) + 8;
    for (std::size_t iter = 0; iter < iteration_cap && !active.empty(); ++iter) {
        const auto m = static_cast<Eigen::Index>(active.size());
        Eigen::VectorXd signs(m);
        double C = 0.0;
        for (Eigen::Index a = 0; a < m; ++a) {
            const double c = corr(active[static_cast<std::size_t>(a)]);
            signs(a) = c >= 0.0 ? 1.0 : -1.0;
            C += std::fabs(c);
        }
        C /= static_cast<double>(m);

        Eigen::MatrixXd GA(m, m);
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < m; ++b)
                GA(a, b) = signs(a) * signs(b) * Gs(active[static_cast<std::size_t>(a)], active[static_cast<std::size_t>(b)]);
        const Eigen::VectorXd q = GA.ldlt().solve(Eigen::VectorXd::Ones(m));
        const double AA = 1.0 / std::sqrt(q.sum());
        const Eigen::VectorXd direction = (AA * q).cwiseProduct(signs);  // coefficient velocity on the active set

        Eigen::VectorXd along = Eigen::VectorXd::Zero(P);  // a_j = x_j' u
        for (Eigen::Index a = 0; a < m; ++a) along += Gs.col(active[static_cast<std::size_t>(a)]) * direction(a);

        double gamma = C / AA;
        std::optional<Eigen::Index> entering;
        std::optional<Eigen::Index> dropping;
        if (active.size() < max_active) {
            for (Eigen::Index c = 0; c < P; ++c) {
                if (is_active[static_cast<std::size_t>(c)]) continue;
                for (double g : {(C - corr(c)) / (AA - along(c)), (C + corr(c)) / (AA + along(c))}) {
                    if (g > step_floor && g < gamma) {
                        gamma = g;
                        entering = c;
                    }
                }
            }
        }
        if (lasso_modification) {
            for (Eigen::Index a = 0; a < m; ++a) {
                const Eigen::Index col = active[static_cast<std::size_t>(a)];
                if (direction(a) == 0.0) continue;
                const double g = -beta(col) / direction(a);
                if (g > step_floor && g < gamma) {
                    gamma = g;
                    dropping = col;
                    entering.reset();
                }
            }
        }

        for (Eigen::Index a = 0; a < m; ++a) beta(active[static_cast<std::size_t>(a)]) += gamma * direction(a);
        corr = c0 - Gs * beta;
        const double C_next = C - gamma * AA;

        if (dropping) {
            beta(*dropping) = 0.0;
            corr = c0 - Gs * beta;
            std::erase(active, *dropping);
            is_active[static_cast<std::size_t>(*dropping)] = false;
            record(LarsEvent::drop, *dropping, C_next);
        } else if (entering) {
            active.push_back(*entering);
            is_active[static_cast<std::size_t>(*entering)] = true;
            record(LarsEvent::enter, *entering, C_next);
        } else {
            break;
        }
    }
    path.final_coefficients = beta.cwiseQuotient(scale);
    return path;
}

/// LASSO selection: the path prefix whose OLS refit has the smallest BIC.
inline ExplanatoryVector lasso_select(const LaggedGram& gram, std::size_t j, bool lasso_modification = false) {
    const LarsPath path = lars_path(gram, j, lasso_modification);
    std::vector<LaggedTerm> best_set;
    double best = gram.bic(j, best_set);
    for (std::size_t s = 1; s <= path.steps.size(); ++s) {
        const auto active = path.active_after(s);
        const double score = gram.bic(j, active);
        if (score < best) {
            best = score;
            best_set = active;
        }
    }
    return ExplanatoryVector(j, std::move(best_set));
}

// ---------------------------------------------------------------------------

/// U-model for response j under cfg.method, using a prebuilt gram whose pmax
/// matches cfg.pmax.
inline ExplanatoryVector select_model(const LaggedGram& gram, std::size_t j, const SelectionConfig& cfg) {
    if (gram.pmax() != cfg.pmax) throw invalid_input("gram pmax does not match selection config");
    switch (cfg.method) {
        case Method::mBTS: return mbts_select(gram, j);
        case Method::TDlag: return topdown_select(gram, j, SweepOrder::by_lag);
        case Method::TDvar: return topdown_select(gram, j, SweepOrder::by_variable);
        case Method::BUlag: return bottomup_select(gram, j, SweepOrder::by_lag);
        case Method::BUvar: return bottomup_select(gram, j, SweepOrder::by_variable);
        case Method::LASSO: return lasso_select(gram, j, cfg.lasso_modification);
        case Method::Full: return full_model(j, gram.K(), gram.pmax());
    }
    throw invalid_input("unknown method");
}

inline void check_config(const TimeSeriesSet& ts, const SelectionConfig& cfg) {
    if (cfg.pmax < 1) throw invalid_input("pmax must be at least 1");
    if (cfg.pmax >= ts.N()) throw invalid_input("pmax must be smaller than the series length");
}

inline ExplanatoryVector select_model(const TimeSeriesSet& ts, std::size_t j, const SelectionConfig& cfg) {
    check_config(ts, cfg);
    return select_model(LaggedGram(ts, cfg.pmax), j, cfg);
}

inline ExplanatoryVector mbts_select(const TimeSeriesSet& ts, std::size_t j, const SelectionConfig& cfg) {
    check_config(ts, cfg);
    return mbts_select(LaggedGram(ts, cfg.pmax), j);
}

inline ExplanatoryVector topdown_select(const TimeSeriesSet& ts, std::size_t j, const SelectionConfig& cfg) {
    check_config(ts, cfg);
    if (cfg.method != Method::TDlag && cfg.method != Method::TDvar) throw invalid_input("topdown_select needs TDlag or TDvar");
    return topdown_select(LaggedGram(ts, cfg.pmax), j, cfg.method == Method::TDlag ? SweepOrder::by_lag : SweepOrder::by_variable);
}

inline ExplanatoryVector bottomup_select(const TimeSeriesSet& ts, std::size_t j, const SelectionConfig& cfg) {
    check_config(ts, cfg);
    if (cfg.method != Method::BUlag && cfg.method != Method::BUvar) throw invalid_input("bottomup_select needs BUlag or BUvar");
    return bottomup_select(LaggedGram(ts, cfg.pmax), j, cfg.method == Method::BUlag ? SweepOrder::by_lag : SweepOrder::by_variable);
}

inline LarsPath lars_path(const TimeSeriesSet& ts, std::size_t j, const SelectionConfig& cfg) {
    check_config(ts, cfg);
    return lars_path(LaggedGram(ts, cfg.pmax), j, cfg.lasso_modification);
}

inline ExplanatoryVector lasso_select(const TimeSeriesSet& ts, std::size_t j, const SelectionConfig& cfg) {
    check_config(ts, cfg);
    return lasso_select(LaggedGram(ts, cfg.pmax), j, cfg.lasso_modification);
}

}  // namespace rvar
