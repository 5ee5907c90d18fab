#include "simcal/rowstats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "simcal/errors.hpp"
#include "simcal/parallel.hpp"

namespace simcal {

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw ShapeError("DataMatrix: " + std::to_string(values_.size()) +
                         " values do not fill a " + std::to_string(rows_) + "x" +
                         std::to_string(cols_) + " matrix");
    }
}

DataMatrix DataMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) throw ShapeError("DataMatrix: no rows");
    const std::size_t cols = rows.front().size();
    std::vector<double> values;
    values.reserve(rows.size() * cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != cols) {
            throw ShapeError("DataMatrix: row " + std::to_string(i) + " has " +
                             std::to_string(rows[i].size()) + " values, expected " +
                             std::to_string(cols));
        }
        values.insert(values.end(), rows[i].begin(), rows[i].end());
    }
    return DataMatrix(rows.size(), cols, std::move(values));
}

namespace rowstats {

std::size_t TestBattery::degenerate_count() const {
    return static_cast<std::size_t>(
        std::count_if(summaries.begin(), summaries.end(), [](const auto& s) { return !s; }));
}

std::vector<double> TestBattery::t_values() const {
    std::vector<double> t;
    t.reserve(summaries.size());
    for (const auto& s : summaries) {
        if (s) t.push_back(s->t);
    }
    return t;
}

void validate_row(std::span<const double> row) {
    if (row.size() < 2) {
        throw ShapeError("row needs at least 2 observations, got " + std::to_string(row.size()));
    }
    for (double v : row) {
        if (!std::isfinite(v)) throw ShapeError("row contains a non-finite value");
    }
}

bool is_degenerate(std::span<const double> row) {
    return std::all_of(row.begin(), row.end(), [&](double v) { return v == row.front(); });
}

MomentDiagnostic moment_diagnostic(std::span<const double> row) {
    validate_row(row);
    const double n = static_cast<double>(row.size());
    double sum = 0.0;
    for (double v : row) sum += v;
    const double mean = sum / n;
    double m2 = 0.0;
    double m4 = 0.0;
    for (double v : row) {
        const double d2 = (v - mean) * (v - mean);
        m2 += d2;
        m4 += d2 * d2;
    }
    return {m2 / n, m4 / n};
}

RowSummary summarize_row(std::span<const double> row) {
    validate_row(row);
    if (is_degenerate(row)) {
        throw DegenerateRowError("row has zero variance; t statistic undefined");
    }
    const double n = static_cast<double>(row.size());
    double sum = 0.0;
    for (double v : row) sum += v;
    const double mean = sum / n;

    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (double v : row) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;

    RowSummary s;
    s.mean = mean;
    s.s2 = m2;
    s.t = std::sqrt(n) * mean / std::sqrt(m2);
    s.skew = m3 / (m2 * std::sqrt(m2));
    s.m4 = m4;
    return s;
}

TestBattery summarize_matrix(const DataMatrix& data, unsigned threads) {
    if (data.rows() == 0) throw ShapeError("summarize_matrix: matrix has no rows");
    if (data.cols() < 2) throw ShapeError("summarize_matrix: need at least 2 replicates per row");

    TestBattery battery;
    battery.n = data.cols();
    battery.summaries.resize(data.rows());
    parallel_for(data.rows(), threads, [&](std::size_t i) {
        const auto row = data.row(i);
        validate_row(row);
        if (!is_degenerate(row)) battery.summaries[i] = summarize_row(row);
    });
    return battery;
}

}  // namespace rowstats
}  // namespace simcal
