#pragma once

// Command-line front end: `test`, `simulate`, `validate-ld` and `forecast`.
//
// Every CSV the tool writes starts with comment lines recording the version
// and a command line that regenerates the file byte for byte. The thread
// count and output path are deliberately left out of that line because they
// never change the content.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "simcal/calibrate.hpp"
#include "simcal/csv.hpp"
#include "simcal/select.hpp"
#include "simcal/simulate.hpp"

namespace simcal::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitParseError = 2,    // malformed input data
    kExitConfigError = 3,   // bad flags or inconsistent configuration
    kExitRuntimeError = 4,  // numerical failure while running
};

// Output of a command: the CSV document and an aligned text rendering.
struct CommandOutput {
    std::string csv;
    std::string table;
};

struct TestOptions {
    std::string input;
    double alpha = 0.05;
    std::optional<double> alpha_n;  // default: 1.5 N^{-2/3}
    std::vector<calibrate::Method> methods{calibrate::Method::student_t};
    std::vector<select::Rule> rules{select::Rule::classical};
    std::size_t boot_reps = 2000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

// CSV columns: id, t, degenerate, p_<method>..., reject_<method>_<rule>...
// Degenerate rows get NA statistics and are excluded from N.
CommandOutput cmd_test(const TestOptions& opts, const csv::LabeledMatrix& input);

struct SimulateOptions {
    simulate::ExperimentGrid grid;
    double c = 1.0;
    unsigned threads = 1;
};

// CSV columns: n_tests, n_reps, method, alpha_n, replications, boot_reps,
// mean_rejected_fraction, mean_ratio, rmse. One row per (N, n, method).
CommandOutput cmd_simulate(const SimulateOptions& opts);

struct ValidateLdOptions {
    simulate::LdDistribution dist = simulate::LdDistribution::beta_skewed;
    std::size_t n = 50;
    std::vector<double> xs{0.5, 1.0, 1.5, 1.9};
    std::size_t n_mc = 1'000'000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

// CSV columns: x, exceed, measured, mc_se, predicted, residual,
// scaled_residual, expected_count, flagged.
CommandOutput cmd_validate_ld(const ValidateLdOptions& opts);

struct ForecastOptions {
    std::vector<double> skewness{0.0};
    std::optional<std::string> skewness_file;  // echoed instead of the values
    std::optional<double> gamma;
    std::optional<std::size_t> n_tests;  // with n_reps: gamma = log N / n^{1/3}
    std::optional<std::size_t> n_reps;
    double alpha = 0.05;
    std::vector<std::size_t> ks{1, 2, 3, 4, 5};
};

// CSV columns: k, beta, fwer_limit, gfwer_bound, gfwer_poisson.
CommandOutput cmd_forecast(const ForecastOptions& opts);

// Parses `args` (without the program name), runs the subcommand and writes
// the CSV to --out (text table to `out`) or, without --out, the CSV to `out`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace simcal::cli
