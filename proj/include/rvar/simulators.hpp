#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "rvar/errors.hpp"
#include "rvar/time_series.hpp"

namespace rvar {

/// Directed ground truth; entry (i, j) means "i drives j". Diagonal unused.
struct TrueGraph {
    std::vector<std::vector<bool>> adjacency;

    TrueGraph() = default;
    explicit TrueGraph(std::size_t K) : adjacency(K, std::vector<bool>(K, false)) {}

    std::size_t K() const noexcept { return adjacency.size(); }
    bool operator()(std::size_t i, std::size_t j) const { return adjacency[i][j]; }
    void set(std::size_t i, std::size_t j) {
        if (i != j) adjacency[i][j] = true;
    }
    std::size_t edge_count() const {
        std::size_t n = 0;
        for (std::size_t i = 0; i < K(); ++i)
            for (std::size_t j = 0; j < K(); ++j) n += (i != j && adjacency[i][j]) ? 1 : 0;
        return n;
    }
    friend bool operator==(const TrueGraph&, const TrueGraph&) = default;
};

/// Spectral radius of the VAR companion matrix built from lag matrices A_1..A_p.
inline double companion_spectral_radius(const std::vector<Eigen::MatrixXd>& lags) {
    if (lags.empty()) return 0.0;
    const Eigen::Index K = lags.front().rows();
    const auto p = static_cast<Eigen::Index>(lags.size());
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(K * p, K * p);
    for (Eigen::Index l = 0; l < p; ++l) companion.block(0, l * K, K, K) = lags[static_cast<std::size_t>(l)];
    if (p > 1) companion.block(K, 0, K * (p - 1), K * (p - 1)).setIdentity();
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// Stationary VAR(p). lag(l)(j, k) multiplies X_{k, t-l} in the equation of X_j.
class VarSystemSpec {
public:
    VarSystemSpec(std::vector<Eigen::MatrixXd> lags, Eigen::VectorXd noise_scale = {}, std::string name = "VAR")
        : lags_(std::move(lags)), noise_(std::move(noise_scale)), name_(std::move(name)) {
        if (lags_.empty()) throw invalid_input("VAR spec needs at least one lag matrix");
        const Eigen::Index K = lags_.front().rows();
        if (K < 1) throw invalid_input("VAR spec needs at least one variable");
        for (const auto& A : lags_)
            if (A.rows() != K || A.cols() != K) throw invalid_input("VAR lag matrices must all be K x K");
        if (noise_.size() == 0) noise_ = Eigen::VectorXd::Ones(K);
        if (noise_.size() != K || (noise_.array() < 0.0).any()) throw invalid_input("VAR noise scale must be K nonnegative values");
        radius_ = companion_spectral_radius(lags_);
        if (!(radius_ < 1.0))
            throw invalid_input("VAR spec '" + name_ + "' is not stationary (companion spectral radius " +
                                std::to_string(radius_) + ")");
    }

    std::size_t K() const noexcept { return static_cast<std::size_t>(lags_.front().rows()); }
    std::size_t order() const noexcept { return lags_.size(); }
    const Eigen::MatrixXd& lag(std::size_t l) const { return lags_.at(l - 1); }
    const std::vector<Eigen::MatrixXd>& lags() const noexcept { return lags_; }
    const Eigen::VectorXd& noise_scale() const noexcept { return noise_; }
    const std::string& name() const noexcept { return name_; }
    double spectral_radius() const noexcept { return radius_; }

    TrueGraph true_graph() const {
        TrueGraph g(K());
        for (const auto& A : lags_)
            for (std::size_t j = 0; j < K(); ++j)
                for (std::size_t k = 0; k < K(); ++k)
                    if (A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) != 0.0) g.set(k, j);
        return g;
    }

private:
    std::vector<Eigen::MatrixXd> lags_;
    Eigen::VectorXd noise_;
    std::string name_;
    double radius_ = 0.0;
};

struct VarSystem {
    VarSystemSpec spec;
    TrueGraph truth;
};

inline constexpr std::size_t default_burn_in = 1000;

/// One realization of length N with independent Gaussian innovations, after
/// discarding `burn_in` points started from zero.
inline TimeSeriesSet gen_var(const VarSystemSpec& spec, std::size_t N, std::uint64_t seed,
                             std::size_t burn_in = default_burn_in) {
    if (N < 2) throw invalid_input("gen_var: N must be at least 2");
    const auto K = static_cast<Eigen::Index>(spec.K());
    const std::size_t p = spec.order();
    const std::size_t total = burn_in + N + p;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(K, static_cast<Eigen::Index>(total));
    for (std::size_t t = p; t < total; ++t) {
        Eigen::VectorXd next(K);
        for (Eigen::Index k = 0; k < K; ++k) next(k) = spec.noise_scale()(k) * normal(rng);
        for (std::size_t l = 1; l <= p; ++l) next.noalias() += spec.lag(l) * x.col(static_cast<Eigen::Index>(t - l));
        x.col(static_cast<Eigen::Index>(t)) = next;
    }
    return TimeSeriesSet(x.rightCols(static_cast<Eigen::Index>(N)));
}

namespace detail {
inline void put(std::vector<Eigen::MatrixXd>& lags, std::size_t j, std::size_t k, std::size_t l, double v) {
    lags[l - 1](static_cast<Eigen::Index>(j - 1), static_cast<Eigen::Index>(k - 1)) = v;
}
}  // namespace detail

/// Five-variable VAR(4) with seven direct couplings.
inline VarSystem make_s1() {
    std::vector<Eigen::MatrixXd> A(4, Eigen::MatrixXd::Zero(5, 5));
    using detail::put;
    put(A, 1, 1, 1, 0.4);
    put(A, 1, 1, 2, -0.5);
    put(A, 1, 5, 1, 0.4);
    put(A, 2, 2, 1, 0.4);
    put(A, 2, 1, 4, -0.3);
    put(A, 2, 5, 2, 0.4);
    put(A, 3, 3, 1, 0.5);
    put(A, 3, 3, 2, -0.7);
    put(A, 3, 5, 3, -0.3);
    put(A, 4, 4, 3, 0.8);
    put(A, 4, 1, 2, 0.4);
    put(A, 4, 2, 2, 0.3);
    put(A, 5, 5, 1, 0.7);
    put(A, 5, 5, 2, -0.5);
    put(A, 5, 4, 1, -0.4);
    VarSystemSpec spec(std::move(A), {}, "S1");
    TrueGraph truth = spec.true_graph();
    return {std::move(spec), std::move(truth)};
}

/// Four-variable VAR(5) with four direct couplings.
inline VarSystem make_s2() {
    std::vector<Eigen::MatrixXd> A(5, Eigen::MatrixXd::Zero(4, 4));
    using detail::put;
    put(A, 1, 1, 1, 0.8);
    put(A, 1, 2, 4, 0.65);
    put(A, 2, 2, 1, 0.6);
    put(A, 2, 4, 5, 0.6);
    put(A, 3, 3, 3, 0.5);
    put(A, 3, 1, 1, -0.6);
    put(A, 3, 2, 4, 0.4);
    put(A, 4, 4, 1, 1.2);
    put(A, 4, 4, 2, -0.7);
    VarSystemSpec spec(std::move(A), {}, "S2");
    TrueGraph truth = spec.true_graph();
    return {std::move(spec), std::move(truth)};
}

struct S3Options {
    std::size_t K = 20;
    std::size_t order = 3;
    double density = 0.10;  ///< fraction of nonzero coefficients, and of coupled ordered pairs
    double shrink = 0.95;
};

/// Sparse high-dimensional VAR(3). Every lag-1 autoregressive coefficient and
/// a random set of cross couplings start at one; a `density` fraction of the
/// K(K-1) ordered pairs are coupled and the remaining nonzero budget is spread
/// over their lags. All coefficients are then scaled by `shrink` until the
/// process is stationary.
inline VarSystem make_s3(std::uint64_t seed, const S3Options& opt = {}) {
    const std::size_t K = opt.K, p = opt.order;
    if (K < 2 || p < 1) throw invalid_input("make_s3: need K >= 2 and order >= 1");
    if (!(opt.shrink > 0.0 && opt.shrink < 1.0)) throw invalid_input("make_s3: shrink must lie in (0, 1)");
    const std::size_t total = K * K * p;
    const auto nonzero = static_cast<std::size_t>(std::llround(opt.density * static_cast<double>(total)));
    const auto pairs = static_cast<std::size_t>(std::llround(opt.density * static_cast<double>(K * (K - 1))));
    if (nonzero < K + pairs || nonzero > K + pairs * p) throw invalid_input("make_s3: inconsistent density for K and order");

    std::mt19937_64 rng(seed);
    std::vector<std::pair<std::size_t, std::size_t>> offdiag;
    for (std::size_t j = 0; j < K; ++j)
        for (std::size_t k = 0; k < K; ++k)
            if (j != k) offdiag.emplace_back(j, k);
    std::shuffle(offdiag.begin(), offdiag.end(), rng);
    offdiag.resize(pairs);

    std::vector<Eigen::MatrixXd> A(p, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K)));
    for (std::size_t k = 0; k < K; ++k) A[0](static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0;

    // One guaranteed lag per coupled pair, then the rest of the budget over the
    // remaining (pair, lag) slots.
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> spare;
    std::uniform_int_distribution<std::size_t> pick_lag(0, p - 1);
    for (const auto& [j, k] : offdiag) {
        const std::size_t chosen = pick_lag(rng);
        A[chosen](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = 1.0;
        for (std::size_t l = 0; l < p; ++l)
            if (l != chosen) spare.emplace_back(j, k, l);
    }
    std::shuffle(spare.begin(), spare.end(), rng);
    for (std::size_t s = 0; s < nonzero - K - pairs; ++s) {
        const auto& [j, k, l] = spare[s];
        A[l](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = 1.0;
    }

    while (!(companion_spectral_radius(A) < 1.0))
        for (auto& M : A) M = (M.array() > 0.0).select(M * opt.shrink, M);

    VarSystemSpec spec(std::move(A), {}, "S3");
    TrueGraph truth = spec.true_graph();
    return {std::move(spec), std::move(truth)};
}

struct HenonSpec {
    std::size_t K = 5;
    double coupling = 0.3;
    double divergence_bound = 10.0;
    std::size_t burn_in = default_burn_in;
    std::size_t max_attempts = 100;

    void validate() const {
        if (K < 2) throw invalid_input("Henon chain needs K >= 2");
        if (!(coupling >= 0.0 && coupling <= 1.0)) throw invalid_input("Henon coupling must lie in [0, 1]");
        if (!(divergence_bound > 0.0)) throw invalid_input("Henon divergence bound must be positive");
    }
};

/// Each interior variable of the chain is driven by both neighbours; the two
/// end variables evolve as uncoupled maps.
inline TrueGraph henon_true_graph(std::size_t K) {
    TrueGraph g(K);
    for (std::size_t i = 1; i + 1 < K; ++i) {
        g.set(i - 1, i);
        g.set(i + 1, i);
    }
    return g;
}

struct HenonRealization {
    TimeSeriesSet series;
    TrueGraph truth;
    std::size_t attempts = 1;
};

/// Coupled Henon maps. Initial values are uniform in [0, 0.5]; a run that
/// leaves [-bound, bound] is discarded and retried with the next derived seed.
inline HenonRealization gen_henon(const HenonSpec& spec, std::size_t N, std::uint64_t seed) {
    spec.validate();
    if (N < 2) throw invalid_input("gen_henon: N must be at least 2");
    const std::size_t K = spec.K;
    const double C = spec.coupling;
    const std::size_t total = spec.burn_in + N;

    for (std::size_t attempt = 0; attempt < spec.max_attempts; ++attempt) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(attempt)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> init(0.0, 0.5);

        Eigen::MatrixXd x(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(total + 2));
        for (std::size_t k = 0; k < K; ++k) {
            x(static_cast<Eigen::Index>(k), 0) = init(rng);
            x(static_cast<Eigen::Index>(k), 1) = init(rng);
        }
        bool diverged = false;
        for (std::size_t t = 2; t < total + 2 && !diverged; ++t) {
            const auto tt = static_cast<Eigen::Index>(t);
            for (std::size_t i = 0; i < K; ++i) {
                const auto ii = static_cast<Eigen::Index>(i);
                double drive = x(ii, tt - 1);
                if (i > 0 && i + 1 < K) drive = 0.5 * C * (x(ii - 1, tt - 1) + x(ii + 1, tt - 1)) + (1.0 - C) * x(ii, tt - 1);
                const double v = 1.4 - drive * drive + 0.3 * x(ii, tt - 2);
                if (!std::isfinite(v) || std::fabs(v) > spec.divergence_bound) {
                    diverged = true;
                    break;
                }
                x(ii, tt) = v;
            }
        }
        if (!diverged)
            return {TimeSeriesSet(x.rightCols(static_cast<Eigen::Index>(N))), henon_true_graph(K), attempt + 1};
    }
    throw generation_failure("Henon chain diverged in " + std::to_string(spec.max_attempts) + " consecutive attempts");
}

}  // namespace rvar
