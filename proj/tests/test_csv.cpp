#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "simcal/csv.hpp"
#include "simcal/errors.hpp"

using namespace simcal;
using namespace simcal::csv;

namespace {

LabeledMatrix parse(const std::string& text) {
    std::istringstream in(text);
    return read_matrix(in);
}

// Line and column of the ParseError thrown while reading `text`.
std::pair<std::size_t, std::size_t> where(const std::string& text) {
    try {
        parse(text);
    } catch (const ParseError& e) {
        return {e.line(), e.column()};
    }
    return {0, 0};
}

std::string temp_file(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream(path) << body;
    return path.string();
}

}  // namespace

TEST_CASE("read_matrix: plain numbers") {
    const auto m = parse("1,2,3\n4, 5 ,6\n");
    CHECK(m.ids.empty());
    REQUIRE(m.data.rows() == 2);
    REQUIRE(m.data.cols() == 3);
    CHECK(m.data(1, 1) == 5.0);
    CHECK(m.data(0, 2) == 3.0);
}

TEST_CASE("read_matrix: identifiers, header, comments and blank lines") {
    const auto m = parse("# probes\nid,r1,r2\n\ngeneA,0.5,-1e-3\n\"geneB\",+2,3\r\n# done\n");
    CHECK(m.ids == std::vector<std::string>{"geneA", "geneB"});
    REQUIRE(m.data.rows() == 2);
    CHECK(m.data(0, 1) == -1e-3);
    CHECK(m.data(1, 0) == 2.0);
}

TEST_CASE("read_matrix: header without identifier column") {
    const auto m = parse("a,b\n1,2\n");
    CHECK(m.ids.empty());
    CHECK(m.data.rows() == 1);
}

TEST_CASE("read_matrix: errors carry line and column") {
    CHECK(where("1,2\n3,x\n") == std::pair<std::size_t, std::size_t>{2, 3});
    CHECK(where("1,2\n3,,\n").first == 2);
    CHECK(where("1,2\n3\n").first == 2);
    CHECK(where("1,2\n3,inf\n") == std::pair<std::size_t, std::size_t>{2, 3});
    CHECK(where("1,nan\n").first == 1);
    CHECK(where("g1,1,2\ng2,1,2,3\n").first == 2);
    CHECK(where("").first == 1);
    CHECK(where("# only a comment\n\n").first == 3);
    CHECK_THROWS_AS(parse("g1\n"), ParseError);
    try {
        parse("1,2\n3,x\n");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2, column 3") != std::string::npos);
    }
}

TEST_CASE("read_matrix_file") {
    const auto path = temp_file("simcal_csv_matrix.csv", "1,2\n3,4\n");
    CHECK(read_matrix_file(path).data.rows() == 2);
    CHECK_THROWS_AS(read_matrix_file("/nonexistent/simcal.csv"), ParseError);
}

TEST_CASE("read_values_file") {
    const auto path = temp_file("simcal_values.txt", "1.1547 0.5,-0.3\n# comment\n\n2e-1 # tail\n");
    CHECK(read_values_file(path) == std::vector<double>{1.1547, 0.5, -0.3, 0.2});
    const auto bad = temp_file("simcal_values_bad.txt", "1.0\n2.0 abc\n");
    try {
        read_values_file(bad);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(e.column() == 5);
    }
    CHECK_THROWS_AS(read_values_file(temp_file("simcal_values_empty.txt", "# nothing\n")), ParseError);
}

TEST_CASE("format_prob and format_real") {
    CHECK(format_prob(0.05) == "5.00000e-02");
    CHECK(format_prob(1.0) == "1.00000e+00");
    CHECK(format_prob(2.8665157187919391e-7) == "2.86652e-07");
    CHECK(std::stod(format_prob(1.23456789e-250)) == doctest::Approx(1.23457e-250));
    CHECK(format_real(4.5594) == "4.5594");
    CHECK(format_real(1.0 / 3.0) == "0.3333333333");
    CHECK(format_real(-2.0) == "-2");
}
