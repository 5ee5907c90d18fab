#pragma once

// Selection rules over p-values and the closed-form level forecasts for
// simultaneous t tests.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace simcal::select {

enum class Rule { bonferroni, bh, classical };

std::string_view to_string(Rule r);
Rule parse_rule(std::string_view name);

struct SelectionOutcome {
    std::vector<std::size_t> rejected;  // ascending row indices
    std::size_t k = 0;
    Rule rule = Rule::classical;
    double threshold_used = 0.0;
};

// Throws DomainError if any p lies outside [0, 1].
void validate_p_values(std::span<const double> p);

// Rejects {i : p_i <= overall / N}.
SelectionOutcome bonferroni_select(std::span<const double> p, double overall);

// Benjamini-Hochberg step-up: k = max{i : P_(i) <= i * overall / N}; rejects
// the k smallest p-values, ties ordered by index. threshold_used is
// k * overall / N (0 when nothing is rejected). `overall` may exceed 1.
SelectionOutcome bh_select(std::span<const double> p, double overall);

// Rejects {i : p_i <= alpha_n}.
SelectionOutcome classical_select(std::span<const double> p, double alpha_n);

SelectionOutcome apply_rule(Rule rule, std::span<const double> p, double level);

// Uncapped N * alpha_n / k; std::nullopt when k == 0.
std::optional<double> fdr_ratio(std::size_t k_selected, std::size_t n_tests, double alpha_n);
// fdr_ratio capped at 1.
std::optional<double> fdr_estimate(std::size_t k_selected, std::size_t n_tests, double alpha_n);

// beta(N) = -log(1 - alpha) / N * sum_i cosh(gamma^3 * kappa_i / 3)
double theoretical_beta(std::span<const double> skewnesses, double gamma, double alpha);

// 1 - exp(-beta): limiting family-wise error rate under independence.
double fwer_limit(double beta);

struct GfwerLimit {
    double bound = 0.0;          // min(beta / k, 1)
    double poisson_limit = 0.0;  // P(Poisson(beta) >= k)
};

GfwerLimit gfwer(double beta, std::size_t k);

struct LevelForecast {
    double beta = 0.0;
    double fwer_limit = 0.0;
    std::vector<std::size_t> ks;
    std::vector<GfwerLimit> gfwer;  // aligned with ks
};

LevelForecast forecast(std::span<const double> skewnesses, double gamma, double alpha,
                       std::span<const std::size_t> ks);

// 1.5 * N^{-2/3}. With `rounded`, N in {600, 1800, 6000} map to the rounded
// levels 0.02, 0.01 and 0.005 used in the reference simulation design.
double alpha_schedule(std::size_t n_tests, bool rounded = true);

}  // namespace simcal::select
