#pragma once

#include <istream>
#include <string>
#include <vector>

#include "simcal/rowstats.hpp"

namespace simcal::csv {

struct LabeledMatrix {
    std::vector<std::string> ids;  // empty when the input had no identifier column
    DataMatrix data;
};

// One row per test, one column per replicate. Blank lines and lines starting
// with '#' are skipped. A non-numeric first cell in the first data line marks
// an identifier column; a first line whose value cells are all non-numeric is
// taken as a column header. Missing or non-finite values are rejected.
// Throws ParseError carrying the 1-based line and column.
LabeledMatrix read_matrix(std::istream& in);
LabeledMatrix read_matrix_file(const std::string& path);

// Whitespace-, comma- or newline-separated list of reals ('#' comments allowed).
std::vector<double> read_values_file(const std::string& path);

// Probabilities: scientific notation, 6 significant digits.
std::string format_prob(double p);
// Other reals: shortest form with up to 10 significant digits.
std::string format_real(double x);

}  // namespace simcal::csv
