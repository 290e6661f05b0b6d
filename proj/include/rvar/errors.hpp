#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rvar {

/// Malformed arguments: empty inputs, out-of-range indices, mismatched sizes.
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Requested regression sample does not leave room for the maximum lag.
class invalid_sample : public invalid_input {
public:
    using invalid_input::invalid_input;
};

/// A model or test cannot be estimated with the available observations
/// (non-positive residual degrees of freedom, rank-deficient full model).
class infeasible_model : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// LARS received a zero-norm column or two collinear columns.
class degenerate_column : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A simulator gave up after repeated divergent realizations.
class generation_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Text input could not be parsed. Row and column are 1-based; 0 means
/// "not applicable".
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t row = 0, std::size_t column = 0)
        : std::runtime_error(format(what, row, column)), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t row, std::size_t column) {
        std::string out = what;
        if (row > 0) {
            out += " (row " + std::to_string(row);
            if (column > 0) out += ", column " + std::to_string(column);
            out += ")";
        }
        return out;
    }

    std::size_t row_;
    std::size_t column_;
};

}  // namespace rvar
