#pragma once

// Critical points and p-values for N simultaneous t tests calibrated against
// the Normal distribution, Student's t with n-1 degrees of freedom, or the
// per-row bootstrap distribution of the studentized mean.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "simcal/rowstats.hpp"
#include "simcal/specfun.hpp"

namespace simcal::calibrate {

using specfun::DegreesOfFreedom;

enum class Method { normal, student_t, bootstrap, aggregated_bootstrap, empirical };

std::string_view to_string(Method m);
// Accepts the CLI spellings: normal, t, bootstrap, agg-bootstrap, empirical.
Method parse_method(std::string_view name);

// Per-hypothesis tail probability 1 - (1 - alpha)^{1/N} that makes the
// overall level alpha for N independent tests.
struct PerTestLevel {
    double alpha = 0.0;
    std::size_t n_tests = 0;
    double level = 0.0;
};

PerTestLevel per_test_level(double alpha, std::size_t n_tests);

struct CriticalPoints {
    Method method = Method::normal;
    std::optional<double> scalar;                // normal / student_t
    std::optional<std::vector<double>> per_row;  // bootstrap; +inf for degenerate rows
    std::optional<DegreesOfFreedom> df;          // student_t
};

struct BootstrapConfig {
    std::size_t n_resamples = 2000;
    std::uint64_t seed = 0;

    // Throws ConfigError unless n_resamples >= 100.
    void validate() const;
};

inline constexpr std::size_t kMinResamples = 100;
inline constexpr int kMaxRedraws = 100;

CriticalPoints normal_critical(double alpha, std::size_t n_tests);
CriticalPoints student_critical(double alpha, std::size_t n_tests, DegreesOfFreedom df);

// Draws B resamples of `row` with replacement, recenters each draw at the
// original row mean and studentizes with the divisor-n variance of the
// resample. Resamples whose values all coincide are redrawn (at most
// kMaxRedraws times each). The random stream is derive_seed(cfg.seed, stream),
// so results depend only on (row, cfg, stream).
std::vector<double> bootstrap_tstat_sample(std::span<const double> row,
                                           const BootstrapConfig& cfg,
                                           std::uint64_t stream = 0);

// Value at order statistic ceil(B * level) of `abs_values` sorted in
// descending order (1-based, clamped to [1, B]).
double upper_order_statistic(std::span<const double> abs_values, double level);

// True when B * level >= 1, i.e. the bootstrap sample can resolve the
// per-test level at all.
bool bootstrap_resolves_level(std::size_t n_resamples, double level);

double bootstrap_critical(std::span<const double> row, double alpha, std::size_t n_tests,
                          const BootstrapConfig& cfg, std::uint64_t stream = 0);

// Bootstrap critical point for every row, row i using stream i.
CriticalPoints bootstrap_critical_points(const DataMatrix& data, double alpha,
                                         const BootstrapConfig& cfg, unsigned threads = 1);

double p_value_normal(double t);
double p_value_student(double t, DegreesOfFreedom df);
// (1 + #{b : |T*_b| >= |t|}) / (B + 1)
double p_value_bootstrap(double t, std::span<const double> boot_sample);

// Dispatching form; throws ConfigError when the argument the method needs is
// missing. Aggregated methods live in the aggregate module.
double p_value(double t, Method method, std::optional<DegreesOfFreedom> df = std::nullopt,
               std::optional<std::span<const double>> boot_sample = std::nullopt);

// x with P(|Z| >= x) = alpha_n.
double deviation_point(double alpha_n);

}  // namespace simcal::calibrate
