#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rvar/errors.hpp"

namespace rvar {

/// K aligned scalar series of length N, stored variables-by-time.
class TimeSeriesSet {
public:
    TimeSeriesSet() = default;

    explicit TimeSeriesSet(Eigen::MatrixXd values, std::vector<std::string> names = {})
        : values_(std::move(values)), names_(std::move(names)) {
        if (values_.rows() < 1) throw invalid_input("time series set needs at least one variable");
        if (values_.cols() < 2) throw invalid_input("time series set needs at least two time points");
        if (!values_.allFinite()) throw invalid_input("time series set contains non-finite values");
        if (names_.empty()) {
            names_.reserve(static_cast<std::size_t>(values_.rows()));
            for (Eigen::Index k = 0; k < values_.rows(); ++k) names_.push_back("X" + std::to_string(k + 1));
        }
        if (names_.size() != static_cast<std::size_t>(values_.rows()))
            throw invalid_input("time series set: name count does not match variable count");
    }

    std::size_t K() const noexcept { return static_cast<std::size_t>(values_.rows()); }
    std::size_t N() const noexcept { return static_cast<std::size_t>(values_.cols()); }

    /// Value of variable k at 0-based time index t.
    double operator()(std::size_t k, std::size_t t) const {
        return values_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(t));
    }

    const Eigen::MatrixXd& values() const noexcept { return values_; }
    const std::vector<std::string>& names() const noexcept { return names_; }

    /// Contiguous time slice [start, start + length).
    TimeSeriesSet slice(std::size_t start, std::size_t length) const {
        if (start + length > N()) throw invalid_input("time series slice out of range");
        return TimeSeriesSet(values_.middleCols(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(length)),
                             names_);
    }

private:
    Eigen::MatrixXd values_;
    std::vector<std::string> names_;
};

/// Subtract each variable's sample mean. Models carry no intercept, so every
/// analysis entry point works on de-meaned data.
inline TimeSeriesSet demean(const TimeSeriesSet& ts) {
    Eigen::MatrixXd centered = ts.values();
    centered.colwise() -= centered.rowwise().mean();
    return TimeSeriesSet(std::move(centered), ts.names());
}

/// One lagged regressor: variable index (0-based) and lag (>= 1).
struct LaggedTerm {
    std::size_t variable = 0;
    std::size_t lag = 1;

    friend auto operator<=>(const LaggedTerm&, const LaggedTerm&) = default;
};

/// Ordered set of lagged terms explaining one response variable.
class ExplanatoryVector {
public:
    ExplanatoryVector() = default;
    explicit ExplanatoryVector(std::size_t response) : response_(response) {}
    ExplanatoryVector(std::size_t response, std::vector<LaggedTerm> terms) : response_(response) {
        for (const auto& term : terms) add(term);
    }

    std::size_t response() const noexcept { return response_; }
    const std::vector<LaggedTerm>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    bool empty() const noexcept { return terms_.empty(); }
    const LaggedTerm& operator[](std::size_t m) const { return terms_[m]; }

    bool contains(const LaggedTerm& term) const {
        return std::find(terms_.begin(), terms_.end(), term) != terms_.end();
    }

    void add(const LaggedTerm& term) {
        if (term.lag < 1) throw invalid_input("lagged term must have lag >= 1");
        if (contains(term)) throw invalid_input("duplicate lagged term in explanatory vector");
        terms_.push_back(term);
    }

    void remove(const LaggedTerm& term) {
        std::erase(terms_, term);
    }

    /// Largest lag in the vector (the c of the adapted F test); 0 when empty.
    std::size_t max_lag() const noexcept {
        std::size_t c = 0;
        for (const auto& t : terms_) c = std::max(c, t.lag);
        return c;
    }

    /// Number of terms of one variable.
    std::size_t count_of(std::size_t variable) const noexcept {
        return static_cast<std::size_t>(
            std::count_if(terms_.begin(), terms_.end(), [&](const LaggedTerm& t) { return t.variable == variable; }));
    }

    /// Same vector with every term of `variable` dropped.
    ExplanatoryVector without_variable(std::size_t variable) const {
        ExplanatoryVector out(response_);
        for (const auto& t : terms_)
            if (t.variable != variable) out.terms_.push_back(t);
        return out;
    }

    /// Terms in canonical (variable, lag) order, for comparisons and output.
    std::vector<LaggedTerm> sorted_terms() const {
        auto out = terms_;
        std::sort(out.begin(), out.end());
        return out;
    }

    bool same_terms(const ExplanatoryVector& other) const {
        return response_ == other.response_ && sorted_terms() == other.sorted_terms();
    }

private:
    std::size_t response_ = 0;
    std::vector<LaggedTerm> terms_;
};

}  // namespace rvar
