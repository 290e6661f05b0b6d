#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "rvar/causality.hpp"
#include "rvar/errors.hpp"
#include "rvar/evaluation.hpp"
#include "rvar/simulators.hpp"
#include "rvar/time_series.hpp"
#include "rvar/window.hpp"

namespace rvar {

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_cells(std::string_view line, char delimiter) {
    std::vector<std::string_view> cells;
    if (delimiter == ' ') {
        std::size_t pos = 0;
        while (pos < line.size()) {
            while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
            if (pos >= line.size()) break;
            std::size_t end = pos;
            while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
            cells.push_back(line.substr(pos, end - pos));
            pos = end;
        }
        return cells;
    }
    std::size_t start = 0;
    for (;;) {
        const std::size_t end = line.find(delimiter, start);
        cells.push_back(trim(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start)));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return cells;
}

inline char detect_delimiter(std::string_view header) {
    for (char d : {',', '\t', ';'})
        if (header.find(d) != std::string_view::npos) return d;
    return ' ';
}

inline std::optional<double> parse_real(std::string_view cell) {
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace detail

/// Delimited table: a header row of channel names, then one row per time
/// point. The delimiter is taken from the header (comma, tab, semicolon, else
/// whitespace). Returns the de-meaned series.
inline TimeSeriesSet parse_table(std::istream& in) {
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> names;
    char delimiter = ',';
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        delimiter = detail::detect_delimiter(line);
        for (auto cell : detail::split_cells(line, delimiter)) names.emplace_back(cell);
        break;
    }
    if (names.empty()) throw parse_error("empty input: no header row");
    if (names.size() < 2) throw parse_error("table needs at least two columns", row);

    std::vector<std::vector<double>> columns(names.size());
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split_cells(line, delimiter);
        if (cells.size() != names.size())
            throw parse_error("ragged row: expected " + std::to_string(names.size()) + " cells, found " +
                                  std::to_string(cells.size()),
                              row);
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto v = detail::parse_real(cells[c]);
            if (!v) throw parse_error("non-numeric or non-finite cell '" + std::string(cells[c]) + "'", row, c + 1);
            columns[c].push_back(*v);
        }
    }
    const std::size_t N = columns.front().size();
    if (N == 0) throw parse_error("empty data: header without rows");
    if (N < 2) throw parse_error("table needs at least two time points");

    Eigen::MatrixXd values(static_cast<Eigen::Index>(names.size()), static_cast<Eigen::Index>(N));
    for (std::size_t c = 0; c < names.size(); ++c)
        for (std::size_t t = 0; t < N; ++t) values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = columns[c][t];
    return demean(TimeSeriesSet(std::move(values), std::move(names)));
}

inline TimeSeriesSet read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'");
    return parse_table(in);
}

/// Comma-separated with a header row, at full round-trip precision.
inline void write_table(std::ostream& out, const TimeSeriesSet& ts) {
    const auto& names = ts.names();
    for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
    out << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (std::size_t t = 0; t < ts.N(); ++t) {
        for (std::size_t k = 0; k < ts.K(); ++k) out << (k ? "," : "") << ts(k, t);
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// Flat key = value configuration

struct CoefficientEntry {
    std::size_t response = 0;  ///< 1-based
    std::size_t driver = 0;    ///< 1-based
    std::size_t lag = 0;
    double value = 0.0;
};

/// `key = value` lines, `#` comments, plus custom VAR blocks written as
/// `coef <response> <driver> <lag> = <value>` and `noise <variable> = <sd>`
/// (indices 1-based).
struct ConfigFile {
    std::map<std::string, std::string> values;
    std::vector<CoefficientEntry> coefficients;
    std::map<std::size_t, double> noise;

    std::optional<std::string> get(const std::string& key) const {
        const auto it = values.find(key);
        if (it == values.end()) return std::nullopt;
        return it->second;
    }
};

inline ConfigFile parse_config(std::istream& in) {
    ConfigFile cfg;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw parse_error("expected 'key = value'", row);
        const auto key = detail::trim(body.substr(0, eq));
        const auto value = detail::trim(body.substr(eq + 1));
        if (key.empty()) throw parse_error("missing key", row);
        const auto words = detail::split_cells(key, ' ');
        if (words.front() == "coef" || words.front() == "noise") {
            const auto v = detail::parse_real(value);
            if (!v) throw parse_error("non-numeric value '" + std::string(value) + "'", row);
            std::vector<std::size_t> idx;
            for (std::size_t w = 1; w < words.size(); ++w) {
                std::size_t n = 0;
                const auto [ptr, ec] = std::from_chars(words[w].data(), words[w].data() + words[w].size(), n);
                if (ec != std::errc{} || ptr != words[w].data() + words[w].size() || n == 0)
                    throw parse_error("index must be a positive integer", row);
                idx.push_back(n);
            }
            if (words.front() == "coef") {
                if (idx.size() != 3) throw parse_error("coef needs <response> <driver> <lag>", row);
                cfg.coefficients.push_back({idx[0], idx[1], idx[2], *v});
            } else {
                if (idx.size() != 1) throw parse_error("noise needs <variable>", row);
                cfg.noise[idx[0]] = *v;
            }
            continue;
        }
        if (words.size() != 1) throw parse_error("keys may not contain spaces", row);
        cfg.values[std::string(key)] = std::string(value);
    }
    return cfg;
}

inline ConfigFile read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open '" + path + "'");
    return parse_config(in);
}

/// Custom VAR from the coefficient lines. K is the `K` key or the largest
/// index seen; the order is the largest lag.
inline VarSystemSpec var_spec_from_config(const ConfigFile& cfg) {
    if (cfg.coefficients.empty()) throw invalid_input("config has no 'coef' lines");
    std::size_t K = 0, p = 0;
    for (const auto& c : cfg.coefficients) {
        K = std::max({K, c.response, c.driver});
        p = std::max(p, c.lag);
    }
    for (const auto& [k, _] : cfg.noise) K = std::max(K, k);
    if (auto k = cfg.get("K")) {
        const std::size_t declared = static_cast<std::size_t>(std::stoul(*k));
        if (declared < K) throw invalid_input("config K is smaller than a coefficient index");
        K = declared;
    }
    std::vector<Eigen::MatrixXd> lags(p, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K)));
    for (const auto& c : cfg.coefficients)
        lags[c.lag - 1](static_cast<Eigen::Index>(c.response - 1), static_cast<Eigen::Index>(c.driver - 1)) = c.value;
    Eigen::VectorXd noise = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(K));
    for (const auto& [k, v] : cfg.noise) noise(static_cast<Eigen::Index>(k - 1)) = v;
    return VarSystemSpec(std::move(lags), std::move(noise), cfg.get("name").value_or("custom"));
}

// ---------------------------------------------------------------------------
// Structured output

using Json = nlohmann::ordered_json;

/// Six significant digits; non-finite values become null.
inline Json json_real(double v) {
    if (!std::isfinite(v)) return nullptr;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::strtod(buf, nullptr);
}

inline Json json_matrix(const Eigen::MatrixXd& m, bool null_diagonal = false) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(null_diagonal && i == j ? Json(nullptr) : json_real(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json json_adjacency(const std::vector<std::vector<bool>>& adj) {
    Json rows = Json::array();
    for (const auto& r : adj) {
        Json row = Json::array();
        for (bool b : r) row.push_back(b ? 1 : 0);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline const char* significance_name(Significance s) {
    switch (s) {
        case Significance::fdr: return "fdr";
        case Significance::raw: return "raw";
        case Significance::none: return "none";
    }
    return "?";
}

inline Json to_json(const CausalityMatrix& cm) {
    Json j;
    j["method"] = std::string(method_name(cm.config.method));
    j["pmax"] = cm.config.pmax;
    j["alpha"] = json_real(cm.alpha);
    j["fdr"] = cm.significance == Significance::fdr;
    j["test"] = cm.significance != Significance::none;
    j["channels"] = cm.names;
    j["layout"] = "row = driver, column = response";
    j["cgci"] = json_matrix(cm.cgci, true);
    j["fstat"] = json_matrix(cm.fstat, true);
    j["pvalue"] = json_matrix(cm.pvalue, true);
    j["adjacency"] = json_adjacency(cm.adjacency);
    Json status = Json::array();
    for (std::size_t i = 0; i < cm.K(); ++i) {
        Json row = Json::array();
        for (std::size_t k = 0; k < cm.K(); ++k) row.push_back(i == k ? Json(nullptr) : Json(status_name(cm.status[i][k])));
        status.push_back(std::move(row));
    }
    j["status"] = std::move(status);
    j["fdr_cutoff"] = json_real(cm.fdr_cutoff);
    Json models = Json::array();
    for (const auto& m : cm.models) {
        Json entry;
        entry["response"] = cm.names[m.response()];
        Json terms = Json::array();
        for (const auto& t : m.terms()) terms.push_back({{"variable", cm.names[t.variable]}, {"lag", t.lag}});
        entry["terms"] = std::move(terms);
        if (!cm.response_errors[m.response()].empty()) entry["error"] = cm.response_errors[m.response()];
        models.push_back(std::move(entry));
    }
    j["models"] = std::move(models);
    return j;
}

inline Json to_json(const WindowAnalysis& wa) {
    Json j;
    if (!wa.matrices.empty()) {
        const auto& first = wa.matrices.front();
        j["method"] = std::string(method_name(first.config.method));
        j["pmax"] = first.config.pmax;
        j["alpha"] = json_real(first.alpha);
        j["fdr"] = first.significance == Significance::fdr;
        j["test"] = first.significance != Significance::none;
        j["channels"] = first.names;
    }
    j["window_length"] = wa.window_length;
    j["step"] = wa.step;
    Json windows = Json::array();
    for (std::size_t w = 0; w < wa.offsets.size(); ++w) {
        Json entry;
        entry["offset"] = wa.offsets[w];
        entry["average_strength"] = json_real(wa.avg_strength[w]);
        Json s = Json::array();
        for (Eigen::Index i = 0; i < wa.node_strength[w].size(); ++i) s.push_back(json_real(wa.node_strength[w](i)));
        entry["node_strength"] = std::move(s);
        entry["cgci"] = json_matrix(wa.matrices[w].cgci, true);
        entry["adjacency"] = json_adjacency(wa.matrices[w].adjacency);
        windows.push_back(std::move(entry));
    }
    j["windows"] = std::move(windows);
    return j;
}

inline Json to_json(const Summary& s) { return {{"mean", json_real(s.mean)}, {"sd", json_real(s.sd)}, {"count", s.count}}; }

inline Json to_json(const BenchmarkReport& rep) {
    Json j;
    j["system"] = rep.system;
    j["K"] = rep.truth.K();
    j["N"] = rep.config.N;
    j["pmax"] = rep.config.pmax;
    j["realizations"] = rep.config.realizations;
    j["alpha"] = json_real(rep.config.alpha);
    j["significance"] = significance_name(rep.config.significance);
    j["seed"] = rep.config.seed;
    j["conventions"] = {
        {"sd", "sample standard deviation across realizations"},
        {"sensitivity", "undefined when no true couplings; excluded from averages"},
        {"mcc", "0 when the denominator vanishes"},
        {"fmeasure", "1 when TP = FP = FN = 0"},
        {"failures", "realizations with an infeasible model count as no detections"},
        {"comparisons", "paired t-test of the first method against each other, Bonferroni over compared methods"},
    };
    j["truth"] = json_adjacency(rep.truth.adjacency);
    Json methods = Json::array();
    for (const auto& m : rep.methods) {
        Json e;
        e["method"] = std::string(method_name(m.method));
        e["sensitivity"] = to_json(m.sensitivity);
        e["specificity"] = to_json(m.specificity);
        e["precision"] = to_json(m.precision);
        e["mcc"] = to_json(m.mcc);
        e["fmeasure"] = to_json(m.fmeasure);
        e["hamming"] = to_json(m.hamming);
        e["failures"] = m.failures;
        e["detection_frequency"] = json_matrix(m.detection_frequency, true);
        e["term_frequency"] = json_matrix(m.term_frequency);
        methods.push_back(std::move(e));
    }
    j["methods"] = std::move(methods);
    Json comps = Json::array();
    for (const auto& c : rep.comparisons)
        comps.push_back({{"reference", std::string(method_name(c.reference))},
                         {"other", std::string(method_name(c.other))},
                         {"index", c.index},
                         {"mean_difference", json_real(c.mean_difference)},
                         {"pvalue", json_real(c.pvalue)}});
    j["comparisons"] = std::move(comps);
    return j;
}

inline Json to_json(const StateComparison& sc) {
    Json means = Json::array();
    for (const auto& m : sc.episode_means) means.push_back({json_real(m[0]), json_real(m[1]), json_real(m[2])});
    return {{"episode_means", std::move(means)},
            {"columns", {"preED", "ED", "postED"}},
            {"p_preED_vs_ED", json_real(sc.p_pre_vs_ed)},
            {"p_postED_vs_ED", json_real(sc.p_post_vs_ed)},
            {"p_preED_vs_postED", json_real(sc.p_pre_vs_post)}};
}

}  // namespace rvar
