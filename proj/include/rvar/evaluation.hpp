#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "rvar/causality.hpp"
#include "rvar/distributions.hpp"
#include "rvar/errors.hpp"
#include "rvar/selection.hpp"
#include "rvar/simulators.hpp"

namespace rvar {

/// Confusion counts over the K(K-1) ordered pairs and the indices built on
/// them. Undefined ratios (empty denominators) are left empty; MCC with a zero
/// denominator is 0 and the F-measure with nothing true or detected is 1.
struct PerformanceIndices {
    std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> precision;
    double mcc = 0.0;
    double fmeasure = 1.0;
    std::size_t hamming = 0;
};

inline PerformanceIndices score(const TrueGraph& truth, const std::vector<std::vector<bool>>& detected) {
    const std::size_t K = truth.K();
    if (detected.size() != K) throw invalid_input("score: detected graph has a different number of variables");
    PerformanceIndices s;
    for (std::size_t i = 0; i < K; ++i) {
        if (detected[i].size() != K) throw invalid_input("score: detected graph is not square");
        for (std::size_t j = 0; j < K; ++j) {
            if (i == j) continue;
            const bool t = truth(i, j), d = detected[i][j];
            if (t && d) ++s.tp;
            else if (t) ++s.fn;
            else if (d) ++s.fp;
            else ++s.tn;
        }
    }
    const auto TP = static_cast<double>(s.tp), TN = static_cast<double>(s.tn);
    const auto FP = static_cast<double>(s.fp), FN = static_cast<double>(s.fn);
    if (s.tp + s.fn > 0) s.sensitivity = TP / (TP + FN);
    if (s.tn + s.fp > 0) s.specificity = TN / (TN + FP);
    if (s.tp + s.fp > 0) s.precision = TP / (TP + FP);
    const double denom = (TP + FP) * (TP + FN) * (TN + FP) * (TN + FN);
    s.mcc = denom > 0.0 ? (TP * TN - FP * FN) / std::sqrt(denom) : 0.0;
    s.fmeasure = (s.tp + s.fp + s.fn) > 0 ? 2.0 * TP / (2.0 * TP + FN + FP) : 1.0;
    s.hamming = s.fp + s.fn;
    return s;
}

/// Two-sided paired t-test p-value, Bonferroni-multiplied by `comparisons`
/// and capped at 1.
inline double paired_compare(std::span<const double> a, std::span<const double> b, std::size_t comparisons = 1) {
    if (a.size() != b.size()) throw invalid_input("paired_compare: samples differ in length");
    if (a.size() < 2) throw invalid_input("paired_compare: need at least two pairs");
    if (comparisons < 1) throw invalid_input("paired_compare: comparison count must be positive");
    const auto n = static_cast<double>(a.size());
    double mean = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r) mean += a[r] - b[r];
    mean /= n;
    double ss = 0.0;
    for (std::size_t r = 0; r < a.size(); ++r) {
        const double d = a[r] - b[r] - mean;
        ss += d * d;
    }
    const double var = ss / (n - 1.0);
    double p;
    if (var <= 0.0)
        p = mean == 0.0 ? 1.0 : 0.0;
    else
        p = t_two_sided(mean / std::sqrt(var / n), n - 1.0);
    return std::min(1.0, p * static_cast<double>(comparisons));
}

struct Summary {
    double mean = 0.0;
    double sd = 0.0;  ///< sample standard deviation across realizations
    std::size_t count = 0;
};

inline Summary summarize(std::span<const double> values) {
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

/// Data source for a Monte Carlo study: a ground truth and a seeded generator.
struct Simulator {
    std::string name;
    TrueGraph truth;
    std::function<TimeSeriesSet(std::size_t N, std::uint64_t seed)> generate;
};

inline Simulator var_simulator(VarSystem system) {
    auto spec = std::make_shared<VarSystemSpec>(system.spec);
    return {spec->name(), system.truth, [spec](std::size_t N, std::uint64_t seed) { return gen_var(*spec, N, seed); }};
}

inline Simulator henon_simulator(const HenonSpec& spec) {
    spec.validate();
    return {"Henon", henon_true_graph(spec.K),
            [spec](std::size_t N, std::uint64_t seed) { return gen_henon(spec, N, seed).series; }};
}

struct BenchmarkConfig {
    std::vector<Method> methods{Method::mBTS};
    std::size_t N = 100;
    std::size_t pmax = 5;
    std::size_t realizations = 100;
    double alpha = 0.05;
    Significance significance = Significance::fdr;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

struct MethodReport {
    Method method = Method::mBTS;
    Summary sensitivity, specificity, precision, mcc, fmeasure, hamming;
    Eigen::MatrixXd detection_frequency;  ///< (driver, response)
    Eigen::MatrixXd term_frequency;       ///< (response, k * pmax + lag - 1)
    std::size_t failures = 0;             ///< realizations with an infeasible or failed fit
    std::vector<PerformanceIndices> per_realization;
};

struct MethodComparison {
    Method reference = Method::mBTS;
    Method other = Method::mBTS;
    std::string index;
    double mean_difference = 0.0;  ///< reference minus other
    double pvalue = 1.0;           ///< Bonferroni-corrected over the compared methods
};

struct BenchmarkReport {
    std::string system;
    TrueGraph truth;
    BenchmarkConfig config;
    std::vector<MethodReport> methods;
    std::vector<MethodComparison> comparisons;

    const MethodReport& method(Method m) const {
        for (const auto& r : methods)
            if (r.method == m) return r;
        throw invalid_input("method not part of this benchmark");
    }
};

namespace detail {

struct RealizationOutcome {
    std::vector<std::vector<bool>> detected;
    std::vector<ExplanatoryVector> models;
    bool failed = false;
};

inline std::vector<double> index_values(const std::vector<PerformanceIndices>& rs,
                                        const std::function<std::optional<double>(const PerformanceIndices&)>& get) {
    std::vector<double> out;
    for (const auto& r : rs)
        if (auto v = get(r)) out.push_back(*v);
    return out;
}

struct IndexAccessor {
    const char* name;
    std::optional<double> (*get)(const PerformanceIndices&);
};

inline const std::vector<IndexAccessor>& index_accessors() {
    static const std::vector<IndexAccessor> accessors{
        {"sensitivity", [](const PerformanceIndices& p) { return p.sensitivity; }},
        {"specificity", [](const PerformanceIndices& p) { return p.specificity; }},
        {"mcc", [](const PerformanceIndices& p) -> std::optional<double> { return p.mcc; }},
        {"fmeasure", [](const PerformanceIndices& p) -> std::optional<double> { return p.fmeasure; }},
        {"hamming", [](const PerformanceIndices& p) -> std::optional<double> { return static_cast<double>(p.hamming); }},
    };
    return accessors;
}

}  // namespace detail

/// Runs every method on the same R realizations (seed + r), scores them and
/// compares the first method against each other one with paired t-tests.
/// Failures never abort the batch; they count as realizations with no
/// detections.
inline BenchmarkReport run_benchmark(const Simulator& sim, const BenchmarkConfig& cfg) {
    if (cfg.realizations < 1) throw invalid_input("benchmark needs at least one realization");
    if (cfg.methods.empty()) throw invalid_input("benchmark needs at least one method");
    const std::size_t K = sim.truth.K();
    const std::size_t M = cfg.methods.size();
    const std::size_t R = cfg.realizations;

    std::vector<std::vector<detail::RealizationOutcome>> outcomes(R, std::vector<detail::RealizationOutcome>(M));
    auto run_one = [&](std::size_t r) {
        const TimeSeriesSet ts = sim.generate(cfg.N, cfg.seed + r);
        for (std::size_t m = 0; m < M; ++m) {
            auto& out = outcomes[r][m];
            SelectionConfig sel;
            sel.pmax = cfg.pmax;
            sel.method = cfg.methods[m];
            try {
                const CausalityMatrix cm = causality_matrix(ts, sel, cfg.alpha, cfg.significance);
                out.detected = cm.adjacency;
                out.models = cm.models;
                out.failed = cm.any_infeasible();
            } catch (const std::exception&) {
                out.detected.assign(K, std::vector<bool>(K, false));
                out.failed = true;
            }
        }
    };

    const std::size_t threads = std::max<std::size_t>(1, std::min(cfg.threads, R));
    if (threads == 1) {
        for (std::size_t r = 0; r < R; ++r) run_one(r);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < threads; ++w)
            pool.emplace_back([&] {
                for (std::size_t r = next++; r < R; r = next++) run_one(r);
            });
        for (auto& t : pool) t.join();
    }

    BenchmarkReport report;
    report.system = sim.name;
    report.truth = sim.truth;
    report.config = cfg;
    const auto Ki = static_cast<Eigen::Index>(K);
    for (std::size_t m = 0; m < M; ++m) {
        MethodReport mr;
        mr.method = cfg.methods[m];
        mr.detection_frequency = Eigen::MatrixXd::Zero(Ki, Ki);
        mr.term_frequency = Eigen::MatrixXd::Zero(Ki, static_cast<Eigen::Index>(K * cfg.pmax));
        for (std::size_t r = 0; r < R; ++r) {
            const auto& out = outcomes[r][m];
            mr.per_realization.push_back(score(sim.truth, out.detected));
            if (out.failed) ++mr.failures;
            for (std::size_t i = 0; i < K; ++i)
                for (std::size_t j = 0; j < K; ++j)
                    if (out.detected[i][j]) mr.detection_frequency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) += 1.0;
            for (const auto& model : out.models)
                for (const auto& t : model.terms())
                    mr.term_frequency(static_cast<Eigen::Index>(model.response()),
                                      static_cast<Eigen::Index>(t.variable * cfg.pmax + t.lag - 1)) += 1.0;
        }
        mr.detection_frequency /= static_cast<double>(R);
        mr.term_frequency /= static_cast<double>(R);
        const auto& rs = mr.per_realization;
        const auto& acc = detail::index_accessors();
        mr.sensitivity = summarize(detail::index_values(rs, acc[0].get));
        mr.specificity = summarize(detail::index_values(rs, acc[1].get));
        mr.mcc = summarize(detail::index_values(rs, acc[2].get));
        mr.fmeasure = summarize(detail::index_values(rs, acc[3].get));
        mr.hamming = summarize(detail::index_values(rs, acc[4].get));
        mr.precision = summarize(detail::index_values(rs, [](const PerformanceIndices& p) { return p.precision; }));
        report.methods.push_back(std::move(mr));
    }

    if (M > 1 && R > 1) {
        const auto& ref = report.methods.front();
        for (std::size_t m = 1; m < M; ++m) {
            const auto& other = report.methods[m];
            for (const auto& accessor : detail::index_accessors()) {
                std::vector<double> a, b;
                for (std::size_t r = 0; r < R; ++r) {
                    const auto va = accessor.get(ref.per_realization[r]);
                    const auto vb = accessor.get(other.per_realization[r]);
                    if (va && vb) {
                        a.push_back(*va);
                        b.push_back(*vb);
                    }
                }
                MethodComparison c;
                c.reference = ref.method;
                c.other = other.method;
                c.index = accessor.name;
                if (a.size() >= 2) {
                    double diff = 0.0;
                    for (std::size_t r = 0; r < a.size(); ++r) diff += a[r] - b[r];
                    c.mean_difference = diff / static_cast<double>(a.size());
                    c.pvalue = paired_compare(a, b, M - 1);
                }
                report.comparisons.push_back(c);
            }
        }
    }
    return report;
}

}  // namespace rvar
