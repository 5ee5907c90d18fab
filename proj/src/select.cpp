#include "simcal/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "simcal/errors.hpp"

namespace simcal::select {

namespace {

SelectionOutcome threshold_select(std::span<const double> p, double threshold, Rule rule) {
    validate_p_values(p);
    SelectionOutcome out;
    out.rule = rule;
    out.threshold_used = threshold;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= threshold) out.rejected.push_back(i);
    }
    out.k = out.rejected.size();
    return out;
}

}  // namespace

std::string_view to_string(Rule r) {
    switch (r) {
        case Rule::bonferroni: return "bonferroni";
        case Rule::bh: return "bh";
        case Rule::classical: return "classical";
    }
    return "unknown";
}

Rule parse_rule(std::string_view name) {
    if (name == "bonferroni") return Rule::bonferroni;
    if (name == "bh") return Rule::bh;
    if (name == "classical") return Rule::classical;
    throw ConfigError("unknown rule '" + std::string(name) +
                      "' (expected bonferroni, bh or classical)");
}

void validate_p_values(std::span<const double> p) {
    for (double v : p) {
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("p-value outside [0, 1]");
    }
}

SelectionOutcome bonferroni_select(std::span<const double> p, double overall) {
    if (p.empty()) return {.rejected = {}, .k = 0, .rule = Rule::bonferroni, .threshold_used = 0.0};
    return threshold_select(p, overall / static_cast<double>(p.size()), Rule::bonferroni);
}

SelectionOutcome classical_select(std::span<const double> p, double alpha_n) {
    return threshold_select(p, alpha_n, Rule::classical);
}

SelectionOutcome bh_select(std::span<const double> p, double overall) {
    validate_p_values(p);
    SelectionOutcome out;
    out.rule = Rule::bh;
    const std::size_t n = p.size();
    if (n == 0) return out;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

    const double dn = static_cast<double>(n);
    std::size_t k = 0;
    for (std::size_t i = n; i >= 1; --i) {
        if (p[order[i - 1]] <= static_cast<double>(i) * overall / dn) {
            k = i;
            break;
        }
    }
    out.k = k;
    out.threshold_used = k == 0 ? 0.0 : static_cast<double>(k) * overall / dn;
    out.rejected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(out.rejected.begin(), out.rejected.end());
    return out;
}

SelectionOutcome apply_rule(Rule rule, std::span<const double> p, double level) {
    switch (rule) {
        case Rule::bonferroni: return bonferroni_select(p, level);
        case Rule::bh: return bh_select(p, level);
        case Rule::classical: return classical_select(p, level);
    }
    throw ConfigError("apply_rule: unknown rule");
}

std::optional<double> fdr_ratio(std::size_t k_selected, std::size_t n_tests, double alpha_n) {
    if (k_selected == 0) return std::nullopt;
    return static_cast<double>(n_tests) * alpha_n / static_cast<double>(k_selected);
}

std::optional<double> fdr_estimate(std::size_t k_selected, std::size_t n_tests, double alpha_n) {
    auto r = fdr_ratio(k_selected, n_tests, alpha_n);
    if (r) *r = std::min(1.0, *r);
    return r;
}

double theoretical_beta(std::span<const double> skewnesses, double gamma, double alpha) {
    if (skewnesses.empty()) throw DomainError("theoretical_beta: no skewness values");
    if (!std::isfinite(gamma) || gamma < 0.0) {
        throw DomainError("theoretical_beta: gamma must be finite and >= 0");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("theoretical_beta: alpha must lie in (0, 1)");
    const double g3 = gamma * gamma * gamma;
    double sum = 0.0;
    for (double kappa : skewnesses) {
        const double x = g3 * kappa / 3.0;
        sum += 0.5 * (std::exp(x) + std::exp(-x));
    }
    return -std::log1p(-alpha) * sum / static_cast<double>(skewnesses.size());
}

double fwer_limit(double beta) {
    if (!(beta >= 0.0)) throw DomainError("fwer_limit: beta must be >= 0");
    return -std::expm1(-beta);
}

GfwerLimit gfwer(double beta, std::size_t k) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw DomainError("gfwer: beta must be finite and >= 0");
    if (k == 0) throw DomainError("gfwer: k must be >= 1");
    GfwerLimit out;
    out.bound = std::min(beta / static_cast<double>(k), 1.0);
    // P(Poisson(beta) >= k) is the regularized lower incomplete gamma P(k, beta).
    out.poisson_limit = beta == 0.0 ? 0.0 : boost::math::gamma_p(static_cast<double>(k), beta);
    return out;
}

LevelForecast forecast(std::span<const double> skewnesses, double gamma, double alpha,
                       std::span<const std::size_t> ks) {
    LevelForecast f;
    f.beta = theoretical_beta(skewnesses, gamma, alpha);
    f.fwer_limit = fwer_limit(f.beta);
    f.ks.assign(ks.begin(), ks.end());
    for (std::size_t k : ks) f.gfwer.push_back(gfwer(f.beta, k));
    return f;
}

double alpha_schedule(std::size_t n_tests, bool rounded) {
    if (n_tests == 0) throw DomainError("alpha_schedule: number of tests must be >= 1");
    if (rounded) {
        switch (n_tests) {
            case 600: return 0.02;
            case 1800: return 0.01;
            case 6000: return 0.005;
            default: break;
        }
    }
    return 1.5 * std::pow(static_cast<double>(n_tests), -2.0 / 3.0);
}

}  // namespace simcal::select
