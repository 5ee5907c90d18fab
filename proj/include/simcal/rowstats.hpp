#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace simcal {

// N x n matrix of observations, one row per test, one column per replicate.
// Row-major storage.
class DataMatrix {
public:
    DataMatrix() = default;
    DataMatrix(std::size_t rows, std::size_t cols);
    DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    // Throws ShapeError if the rows are ragged or empty.
    static DataMatrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * cols_, cols_};
    }
    std::span<double> row(std::size_t i) { return {values_.data() + i * cols_, cols_}; }

    double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const DataMatrix&, const DataMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

namespace rowstats {

struct RowSummary {
    double mean = 0.0;
    double s2 = 0.0;    // divisor n
    double t = 0.0;     // sqrt(n) * mean / sqrt(s2)
    double skew = 0.0;  // m3 / s2^{3/2}
    double m4 = 0.0;    // divisor n
};

// Summaries of every row; std::nullopt marks a degenerate (constant) row.
struct TestBattery {
    std::vector<std::optional<RowSummary>> summaries;
    std::size_t n = 0;

    std::size_t size() const noexcept { return summaries.size(); }
    std::size_t degenerate_count() const;
    // t statistics of nondegenerate rows, in row order.
    std::vector<double> t_values() const;
};

struct MomentDiagnostic {
    double s2 = 0.0;
    double m4 = 0.0;
};

// Throws ShapeError for rows shorter than 2 or with non-finite entries.
void validate_row(std::span<const double> row);

// True when every entry equals the first one.
bool is_degenerate(std::span<const double> row);

// Throws DegenerateRowError when all values coincide.
RowSummary summarize_row(std::span<const double> row);

// Second and fourth centered moments (divisor n), used to check the
// bounds C4 <= s2 and m4 <= C5 required before applying tail expansions to
// bootstrap distributions.
MomentDiagnostic moment_diagnostic(std::span<const double> row);

// Rows are independent; `threads` only changes wall time.
TestBattery summarize_matrix(const DataMatrix& data, unsigned threads = 1);

}  // namespace rowstats
}  // namespace simcal
