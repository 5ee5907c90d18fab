#include "simcal/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <string_view>

#include <fmt/format.h>

#include "simcal/errors.hpp"

namespace simcal::csv {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> to_number(std::string_view cell) {
    cell = trim(cell);
    if (cell.empty()) return std::nullopt;
    if (cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
    return v;
}

struct Cell {
    std::string_view text;
    std::size_t column;  // 1-based character position
};

std::vector<Cell> split(std::string_view line) {
    std::vector<Cell> cells;
    std::size_t start = 0;
    for (;;) {
        const auto comma = line.find(',', start);
        const auto end = comma == std::string_view::npos ? line.size() : comma;
        cells.push_back({line.substr(start, end - start), start + 1});
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

std::string unquote(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

}  // namespace

LabeledMatrix read_matrix(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::vector<std::string> ids;
    std::optional<bool> has_ids;
    std::size_t width = 0;
    bool header_checked = false;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto cells = split(line);

        if (!header_checked) {
            header_checked = true;
            bool all_text = cells.size() > 1;
            for (std::size_t c = 1; c < cells.size(); ++c) {
                if (to_number(cells[c].text)) all_text = false;
            }
            if (all_text) continue;
        }

        if (!has_ids) has_ids = !to_number(cells.front().text).has_value();
        const std::size_t first_value = *has_ids ? 1 : 0;

        if (cells.size() <= first_value) {
            throw ParseError("row has no numeric values", line_no, cells.back().column);
        }
        std::vector<double> values;
        values.reserve(cells.size() - first_value);
        for (std::size_t c = first_value; c < cells.size(); ++c) {
            const auto v = to_number(cells[c].text);
            if (!v) {
                const auto text = trim(cells[c].text);
                throw ParseError(text.empty() ? "missing value"
                                              : "not a number: '" + std::string(text) + "'",
                                 line_no, cells[c].column);
            }
            if (!std::isfinite(*v)) {
                throw ParseError("non-finite value", line_no, cells[c].column);
            }
            values.push_back(*v);
        }
        if (rows.empty()) {
            width = values.size();
        } else if (values.size() != width) {
            throw ParseError("expected " + std::to_string(width) + " values, found " +
                                 std::to_string(values.size()),
                             line_no, cells.back().column);
        }
        if (*has_ids) ids.push_back(unquote(cells.front().text));
        rows.push_back(std::move(values));
    }

    if (rows.empty()) throw ParseError("input contains no data rows", line_no + 1, 1);
    return {std::move(ids), DataMatrix::from_rows(rows)};
}

LabeledMatrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0, 0);
    return read_matrix(in);
}

std::vector<double> read_values_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'", 0, 0);
    std::vector<double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = line;
        if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        std::size_t pos = 0;
        while (pos < body.size()) {
            const auto start = body.find_first_not_of(" \t\r,", pos);
            if (start == std::string_view::npos) break;
            auto end = body.find_first_of(" \t\r,", start);
            if (end == std::string_view::npos) end = body.size();
            const auto v = to_number(body.substr(start, end - start));
            if (!v || !std::isfinite(*v)) {
                throw ParseError("not a finite number", line_no, start + 1);
            }
            out.push_back(*v);
            pos = end;
        }
    }
    if (out.empty()) throw ParseError("no values in '" + path + "'", line_no + 1, 1);
    return out;
}

std::string format_prob(double p) { return fmt::format("{:.5e}", p); }

std::string format_real(double x) { return fmt::format("{:.10g}", x); }

}  // namespace simcal::csv
