#pragma once

// Synthetic microarray-style data (three-group factor model with skewed
// chi-square factors, point-mass/double-exponential mean mixture,
// moving-average noise across tests) and the level-accuracy experiment that
// scores each calibration method by the RMSE of N1/(N alpha_N) - 1.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "simcal/calibrate.hpp"
#include "simcal/random.hpp"
#include "simcal/rowstats.hpp"

namespace simcal::simulate {

// case_one: a_i = 0.25, b_i = 0.1 for every row.
// case_two: a_i ~ U(0, 0.4), b_i ~ U(0, 0.2) independently per row.
// independent: all loadings zero, i.e. pure N(0, 1) noise.
enum class FactorCase { case_one, case_two, independent };

std::string_view to_string(FactorCase c);
FactorCase parse_factor_case(std::string_view name);

struct FactorModelConfig {
    std::size_t n_tests = 600;  // multiple of 3
    std::size_t n_reps = 6;
    FactorCase factor_case = FactorCase::case_one;
    int chi_df = 6;
    std::uint64_t seed = 0;

    void validate() const;
};

struct FactorLoadings {
    std::vector<double> a;  // group loading of row i
    std::vector<double> b;  // common loading of row i
};

FactorLoadings factor_loadings(const FactorModelConfig& cfg);

// One draw of (chi^2_m - m) / sqrt(2m), built from m squared standard normals.
double chi_factor(CounterRng& rng, int m);

// eps_ij = (Z_ij + a_i chi_{j,g(i)} + b_i chi_{j4}) / sqrt(1 + a_i^2 + b_i^2)
// where g(i) is the third of the rows that i belongs to.
DataMatrix gen_errors_factor(const FactorModelConfig& cfg);

struct MeanMixtureConfig {
    double c = 1.0;  // weight of the point mass at zero
    std::uint64_t seed = 0;

    void validate() const;
};

// mu_i = 0 with probability c, otherwise a standard double-exponential draw.
std::vector<double> gen_means(std::size_t n_tests, const MeanMixtureConfig& cfg);

struct Dataset {
    DataMatrix y;
    std::vector<double> mu;
};

// Adds mu_i to every entry of row i. Throws ShapeError on size mismatch.
DataMatrix add_means(DataMatrix errors, std::span<const double> mu);

Dataset gen_dataset(const FactorModelConfig& factor_cfg, const MeanMixtureConfig& mean_cfg);

// Column j holds eps_i = sum_k w_k delta_{i+k} / sqrt(sum_k w_k^2) over an
// independent N(0, 1) sequence delta. Throws ConfigError for empty, all-zero
// or non-finite weights, or when sum w_k^2 exceeds energy_bound.
DataMatrix gen_errors_moving_average(std::span<const double> weights, std::size_t n_tests,
                                     std::size_t n_reps, std::uint64_t seed,
                                     double energy_bound = std::numeric_limits<double>::infinity());

// ---------------------------------------------------------------------------
// Level-accuracy experiment

struct ExperimentGrid {
    std::vector<std::size_t> n_tests{600, 1800, 6000};
    std::vector<std::size_t> n_reps{6, 20, 50};
    std::vector<calibrate::Method> methods{
        calibrate::Method::normal, calibrate::Method::student_t, calibrate::Method::bootstrap,
        calibrate::Method::aggregated_bootstrap};
    std::optional<std::size_t> n_replications;  // default 600000 / N
    std::optional<std::size_t> bootstrap_B;     // default by alpha_N: 2000 / 4000 / 9000
    double desk_scale = 1.0;                    // multiplies replications and B
    FactorCase factor_case = FactorCase::case_one;
    int chi_df = 6;
    bool rounded_alpha = true;
    std::uint64_t seed = 0;

    void validate() const;
};

std::size_t default_replications(std::size_t n_tests);
std::size_t default_bootstrap_B(double alpha_n);

struct CellResult {
    std::size_t n_tests = 0;
    std::size_t n_reps = 0;
    calibrate::Method method = calibrate::Method::normal;
    double alpha_n = 0.0;
    std::size_t replications = 0;
    std::size_t bootstrap_B = 0;
    double mean_rejected_fraction = 0.0;  // mean of N1 / N
    double mean_ratio = 0.0;              // mean of N1 / (N alpha_N)
    double rmse = 0.0;                    // sqrt(mean of (N1 / (N alpha_N) - 1)^2)
};

struct SimulationReport {
    ExperimentGrid grid;
    double c = 1.0;
    std::vector<CellResult> cells;  // ordered by (N, n, method) as listed in the grid
};

// Rejection counts N1 for one replication: one entry per method, in the order
// given. `p_values` is filled per method when non-null.
std::vector<std::size_t> rejection_counts(const DataMatrix& y,
                                          std::span<const calibrate::Method> methods,
                                          double alpha_n, const calibrate::BootstrapConfig& boot,
                                          std::vector<std::vector<double>>* p_values = nullptr);

// Mean of N1/(N alpha) and RMSE of N1/(N alpha) - 1 over replications.
struct AccuracySummary {
    double mean_fraction = 0.0;
    double mean_ratio = 0.0;
    double rmse = 0.0;
};
AccuracySummary summarize_accuracy(std::span<const std::size_t> rejected, std::size_t n_tests,
                                   double alpha_n);

// Output depends only on (grid, mean_cfg.c, seeds), never on `threads`.
SimulationReport run_accuracy_experiment(const ExperimentGrid& grid,
                                         const MeanMixtureConfig& mean_cfg,
                                         unsigned threads = 1);

// ---------------------------------------------------------------------------
// Tail-ratio validation of P(T > x) / (1 - Phi(x)) against exp(-kappa3 x^3 / (3 sqrt n)).

enum class LdDistribution {
    normal,       // N(0, 1)
    uniform,      // U(-sqrt 3, sqrt 3): bounded, symmetric
    beta_skewed,  // standardized Beta(2, 6): bounded, skewness 0.6928
    chi_square,   // (chi^2_6 - 6) / sqrt 12: skewness sqrt(8/6)
};

std::string_view to_string(LdDistribution d);
LdDistribution parse_ld_distribution(std::string_view name);
// Population skewness kappa_3 of the standardized distribution.
double ld_skewness(LdDistribution d);
// Standardized draws (mean 0, variance 1) from one random stream.
class LdSampler {
public:
    LdSampler(LdDistribution dist, std::uint64_t key);
    double operator()();

private:
    LdDistribution dist_;
    CounterRng rng_;
    std::normal_distribution<double> normal_;
};

struct LdRatioRow {
    double x = 0.0;
    std::size_t exceed = 0;        // #{T > x}
    double measured = 0.0;         // P_mc(T > x) / (1 - Phi(x))
    double mc_se = 0.0;            // standard error of `measured`
    double predicted = 0.0;        // exp(-kappa3 x^3 / (3 sqrt n))
    double residual = 0.0;         // measured / predicted - 1
    double scaled_residual = 0.0;  // residual * sqrt(n) / (1 + x)^2
    double expected_count = 0.0;   // n_mc * (1 - Phi(x)) * predicted
    bool flagged = false;          // expected_count < 20: tail not resolved
};

inline constexpr double kMinExpectedTailCount = 20.0;

std::vector<LdRatioRow> ld_ratio_validate(LdDistribution dist, std::size_t n,
                                          std::span<const double> xs, std::size_t n_mc,
                                          std::uint64_t seed, unsigned threads = 1);

}  // namespace simcal::simulate
