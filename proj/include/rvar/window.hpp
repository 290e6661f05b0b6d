#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rvar/causality.hpp"
#include "rvar/errors.hpp"
#include "rvar/evaluation.hpp"
#include "rvar/selection.hpp"
#include "rvar/time_series.hpp"

namespace rvar {

struct WindowAnalysis {
    std::size_t window_length = 0;
    std::size_t step = 0;
    std::vector<std::size_t> offsets;
    std::vector<CausalityMatrix> matrices;
    std::vector<Eigen::VectorXd> node_strength;  ///< s_i per window: mean outgoing CGCI
    std::vector<double> avg_strength;            ///< S per window: mean of s_i
};

inline std::size_t window_count(std::size_t N, std::size_t window_length, std::size_t step) {
    if (step < 1) throw invalid_input("window step must be at least 1");
    if (window_length < 1 || window_length > N) throw invalid_input("window length must lie in [1, N]");
    return (N - window_length) / step + 1;
}

/// Out-strength of every node: row means of the CGCI matrix without the diagonal.
inline Eigen::VectorXd node_strengths(const CausalityMatrix& cm) {
    const auto K = static_cast<Eigen::Index>(cm.K());
    Eigen::VectorXd s = Eigen::VectorXd::Zero(K);
    for (Eigen::Index i = 0; i < K; ++i) {
        for (Eigen::Index j = 0; j < K; ++j)
            if (i != j) s(i) += cm.cgci(i, j);
        s(i) /= static_cast<double>(K - 1);
    }
    return s;
}

/// Causality matrix and strengths on full-length windows at offsets
/// 0, step, 2 step, ...
inline WindowAnalysis window_scan(const TimeSeriesSet& ts, const SelectionConfig& cfg, double alpha,
                                  Significance significance, std::size_t window_length, std::size_t step) {
    const std::size_t count = window_count(ts.N(), window_length, step);
    if (window_length < cfg.pmax + 2)
        throw infeasible_model("window of " + std::to_string(window_length) + " samples is too short for pmax " +
                               std::to_string(cfg.pmax));
    WindowAnalysis wa;
    wa.window_length = window_length;
    wa.step = step;
    for (std::size_t w = 0; w < count; ++w) {
        const std::size_t offset = w * step;
        CausalityMatrix cm = causality_matrix(ts.slice(offset, window_length), cfg, alpha, significance);
        Eigen::VectorXd s = node_strengths(cm);
        wa.offsets.push_back(offset);
        wa.avg_strength.push_back(s.mean());
        wa.node_strength.push_back(std::move(s));
        wa.matrices.push_back(std::move(cm));
    }
    return wa;
}

enum class EpisodeState { preED, ED, postED };

inline EpisodeState parse_state(std::string_view text) {
    std::string lower;
    for (char ch : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (lower == "preed" || lower == "pre") return EpisodeState::preED;
    if (lower == "ed") return EpisodeState::ED;
    if (lower == "posted" || lower == "post") return EpisodeState::postED;
    throw invalid_input("unknown episode state '" + std::string(text) + "' (expected preED, ED or postED)");
}

/// Window strengths S of one episode with the state of every window.
struct Episode {
    std::vector<double> strength;
    std::vector<EpisodeState> state;
};

struct StateComparison {
    std::vector<std::array<double, 3>> episode_means;  ///< per episode: preED, ED, postED
    double p_pre_vs_ed = 1.0;
    double p_post_vs_ed = 1.0;
    double p_pre_vs_post = 1.0;
};

/// Mean S per state and episode, then paired t-tests across episodes for
/// preED-ED, postED-ED and preED-postED.
inline StateComparison state_compare(const std::vector<Episode>& episodes) {
    if (episodes.size() < 2) throw invalid_input("state comparison needs at least two episodes");
    StateComparison out;
    for (std::size_t e = 0; e < episodes.size(); ++e) {
        const auto& ep = episodes[e];
        if (ep.strength.size() != ep.state.size()) throw invalid_input("episode strength and state counts differ");
        std::array<double, 3> sum{}, n{};
        for (std::size_t w = 0; w < ep.strength.size(); ++w) {
            const auto s = static_cast<std::size_t>(ep.state[w]);
            sum[s] += ep.strength[w];
            n[s] += 1.0;
        }
        static constexpr std::array<const char*, 3> labels{"preED", "ED", "postED"};
        for (std::size_t s = 0; s < 3; ++s)
            if (n[s] == 0.0)
                throw invalid_input("episode " + std::to_string(e + 1) + " has no windows labeled " + labels[s]);
        out.episode_means.push_back({sum[0] / n[0], sum[1] / n[1], sum[2] / n[2]});
    }
    std::array<std::vector<double>, 3> col;
    for (const auto& m : out.episode_means)
        for (std::size_t s = 0; s < 3; ++s) col[s].push_back(m[s]);
    out.p_pre_vs_ed = paired_compare(col[0], col[1]);
    out.p_post_vs_ed = paired_compare(col[2], col[1]);
    out.p_pre_vs_post = paired_compare(col[0], col[2]);
    return out;
}

}  // namespace rvar
