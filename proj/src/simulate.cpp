#include "simcal/simulate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "simcal/aggregate.hpp"
#include "simcal/errors.hpp"
#include "simcal/parallel.hpp"
#include "simcal/select.hpp"

namespace simcal::simulate {

namespace {

// Sub-stream identifiers below a generator seed.
enum Stream : std::uint64_t {
    kLoadingStream = 0,
    kFactorStream = 1,
    kNoiseStream = 2,
    kMeanStream = 3,
};

}  // namespace

std::string_view to_string(FactorCase c) {
    switch (c) {
        case FactorCase::case_one: return "I";
        case FactorCase::case_two: return "II";
        case FactorCase::independent: return "independent";
    }
    return "unknown";
}

FactorCase parse_factor_case(std::string_view name) {
    if (name == "I" || name == "1" || name == "i") return FactorCase::case_one;
    if (name == "II" || name == "2" || name == "ii") return FactorCase::case_two;
    if (name == "independent" || name == "none") return FactorCase::independent;
    throw ConfigError("unknown factor case '" + std::string(name) +
                      "' (expected I, II or independent)");
}

void FactorModelConfig::validate() const {
    if (n_tests == 0 || n_tests % 3 != 0) {
        throw ConfigError("number of tests N must be a positive multiple of 3, got " +
                          std::to_string(n_tests));
    }
    if (n_reps == 0) throw ConfigError("number of replicates n must be >= 1");
    if (chi_df < 1) throw ConfigError("chi-square degrees of freedom m must be >= 1");
}

void MeanMixtureConfig::validate() const {
    if (!(c >= 0.0 && c <= 1.0)) throw ConfigError("mixture weight c must lie in [0, 1]");
}

FactorLoadings factor_loadings(const FactorModelConfig& cfg) {
    cfg.validate();
    FactorLoadings l;
    l.a.assign(cfg.n_tests, 0.0);
    l.b.assign(cfg.n_tests, 0.0);
    switch (cfg.factor_case) {
        case FactorCase::case_one:
            std::fill(l.a.begin(), l.a.end(), 0.25);
            std::fill(l.b.begin(), l.b.end(), 0.1);
            break;
        case FactorCase::case_two: {
            CounterRng rng(derive_seed(cfg.seed, kLoadingStream));
            for (std::size_t i = 0; i < cfg.n_tests; ++i) {
                l.a[i] = 0.4 * rng.uniform();
                l.b[i] = 0.2 * rng.uniform();
            }
            break;
        }
        case FactorCase::independent:
            break;
    }
    return l;
}

double chi_factor(CounterRng& rng, int m) {
    std::normal_distribution<double> normal;
    double sum = 0.0;
    for (int k = 0; k < m; ++k) {
        const double z = normal(rng);
        sum += z * z;
    }
    return (sum - m) / std::sqrt(2.0 * m);
}

DataMatrix gen_errors_factor(const FactorModelConfig& cfg) {
    const auto loadings = factor_loadings(cfg);
    const std::size_t n_rows = cfg.n_tests;
    const std::size_t n_cols = cfg.n_reps;
    const std::size_t group_size = n_rows / 3;

    // chi[j][0..2]: group factors, chi[j][3]: common factor.
    std::vector<std::array<double, 4>> chi(n_cols);
    const auto factor_seed = derive_seed(cfg.seed, kFactorStream);
    for (std::size_t j = 0; j < n_cols; ++j) {
        CounterRng rng(derive_seed(factor_seed, j));
        for (auto& f : chi[j]) f = chi_factor(rng, cfg.chi_df);
    }

    DataMatrix eps(n_rows, n_cols);
    const auto noise_seed = derive_seed(cfg.seed, kNoiseStream);
    for (std::size_t i = 0; i < n_rows; ++i) {
        CounterRng rng(derive_seed(noise_seed, i));
        std::normal_distribution<double> normal;
        const std::size_t group = i / group_size;
        const double a = loadings.a[i];
        const double b = loadings.b[i];
        const double scale = 1.0 / std::sqrt(1.0 + a * a + b * b);
        for (std::size_t j = 0; j < n_cols; ++j) {
            eps(i, j) = (normal(rng) + a * chi[j][group] + b * chi[j][3]) * scale;
        }
    }
    return eps;
}

std::vector<double> gen_means(std::size_t n_tests, const MeanMixtureConfig& cfg) {
    cfg.validate();
    CounterRng rng(derive_seed(cfg.seed, kMeanStream));
    std::vector<double> mu(n_tests, 0.0);
    for (auto& m : mu) {
        if (rng.uniform() < cfg.c) continue;
        const double magnitude = -std::log1p(-rng.uniform());
        m = (rng() & 1U) ? magnitude : -magnitude;
    }
    return mu;
}

DataMatrix add_means(DataMatrix errors, std::span<const double> mu) {
    if (mu.size() != errors.rows()) {
        throw ShapeError("add_means: " + std::to_string(mu.size()) + " means for " +
                         std::to_string(errors.rows()) + " rows");
    }
    for (std::size_t i = 0; i < errors.rows(); ++i) {
        for (double& v : errors.row(i)) v += mu[i];
    }
    return errors;
}

Dataset gen_dataset(const FactorModelConfig& factor_cfg, const MeanMixtureConfig& mean_cfg) {
    Dataset d;
    d.mu = gen_means(factor_cfg.n_tests, mean_cfg);
    d.y = add_means(gen_errors_factor(factor_cfg), d.mu);
    return d;
}

DataMatrix gen_errors_moving_average(std::span<const double> weights, std::size_t n_tests,
                                     std::size_t n_reps, std::uint64_t seed,
                                     double energy_bound) {
    if (weights.empty()) throw ConfigError("moving average: weights are empty");
    double energy = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w)) throw ConfigError("moving average: non-finite weight");
        energy += w * w;
    }
    if (energy == 0.0) throw ConfigError("moving average: all weights are zero");
    if (energy > energy_bound) {
        throw ConfigError("moving average: sum of squared weights " + std::to_string(energy) +
                          " exceeds the declared bound " + std::to_string(energy_bound));
    }
    if (n_tests == 0 || n_reps == 0) throw ConfigError("moving average: empty matrix requested");

    const double scale = 1.0 / std::sqrt(energy);
    const std::size_t span_len = n_tests + weights.size() - 1;
    DataMatrix eps(n_tests, n_reps);
    std::vector<double> delta(span_len);
    for (std::size_t j = 0; j < n_reps; ++j) {
        CounterRng rng(derive_seed(seed, j));
        std::normal_distribution<double> normal;
        for (auto& d : delta) d = normal(rng);
        for (std::size_t i = 0; i < n_tests; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < weights.size(); ++k) s += weights[k] * delta[i + k];
            eps(i, j) = s * scale;
        }
    }
    return eps;
}

// ---------------------------------------------------------------------------

void ExperimentGrid::validate() const {
    if (n_tests.empty() || n_reps.empty() || methods.empty()) {
        throw ConfigError("experiment grid needs at least one N, one n and one method");
    }
    for (auto nt : n_tests) {
        if (nt == 0 || nt % 3 != 0) {
            throw ConfigError("number of tests N must be a positive multiple of 3, got " +
                              std::to_string(nt));
        }
    }
    for (auto nr : n_reps) {
        if (nr < 2) throw ConfigError("replicates per test n must be >= 2, got " + std::to_string(nr));
    }
    if (!(desk_scale > 0.0) || !std::isfinite(desk_scale)) {
        throw ConfigError("desk scale must be a positive finite number");
    }
    if (n_replications && *n_replications == 0) throw ConfigError("replications must be >= 1");
    if (bootstrap_B && *bootstrap_B < calibrate::kMinResamples) {
        throw ConfigError("bootstrap resamples must be >= " +
                          std::to_string(calibrate::kMinResamples));
    }
    if (chi_df < 1) throw ConfigError("chi-square degrees of freedom m must be >= 1");
}

std::size_t default_replications(std::size_t n_tests) {
    return std::max<std::size_t>(1, 600000 / n_tests);
}

std::size_t default_bootstrap_B(double alpha_n) {
    if (alpha_n >= 0.02 - 1e-12) return 2000;
    if (alpha_n >= 0.01 - 1e-12) return 4000;
    return 9000;
}

std::vector<std::size_t> rejection_counts(const DataMatrix& y,
                                          std::span<const calibrate::Method> methods,
                                          double alpha_n, const calibrate::BootstrapConfig& boot,
                                          std::vector<std::vector<double>>* p_values) {
    using calibrate::Method;
    const auto battery = rowstats::summarize_matrix(y, 1);
    std::vector<std::size_t> rows;
    std::vector<double> t;
    for (std::size_t i = 0; i < battery.size(); ++i) {
        if (battery.summaries[i]) {
            rows.push_back(i);
            t.push_back(battery.summaries[i]->t);
        }
    }
    if (t.empty()) throw DegenerateRowError("rejection_counts: every row is constant");

    const bool wants_boot = std::any_of(methods.begin(), methods.end(), [](Method m) {
        return m == Method::bootstrap || m == Method::aggregated_bootstrap;
    });
    std::vector<double> p_boot;
    std::vector<double> p_agg;
    if (wants_boot) {
        p_boot.resize(t.size());
        aggregate::PooledTailCounter pooled(t);
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto sample = calibrate::bootstrap_tstat_sample(y.row(rows[k]), boot, rows[k]);
            p_boot[k] = calibrate::p_value_bootstrap(t[k], sample);
            pooled.add_sample(sample);
        }
        p_agg = pooled.p_values();
    }

    const calibrate::DegreesOfFreedom df{static_cast<std::int64_t>(y.cols()) - 1};
    std::vector<std::size_t> counts;
    for (Method m : methods) {
        std::vector<double> p(t.size());
        switch (m) {
            case Method::normal:
                for (std::size_t k = 0; k < t.size(); ++k) p[k] = calibrate::p_value_normal(t[k]);
                break;
            case Method::student_t:
                for (std::size_t k = 0; k < t.size(); ++k) p[k] = calibrate::p_value_student(t[k], df);
                break;
            case Method::bootstrap:
                p = p_boot;
                break;
            case Method::aggregated_bootstrap:
                p = p_agg;
                break;
            case Method::empirical:
                p = aggregate::in_sample_p_values(aggregate::empirical_null_cdf(battery), t);
                break;
        }
        counts.push_back(select::classical_select(p, alpha_n).k);
        if (p_values) p_values->push_back(std::move(p));
    }
    return counts;
}

AccuracySummary summarize_accuracy(std::span<const std::size_t> rejected, std::size_t n_tests,
                                   double alpha_n) {
    AccuracySummary s;
    if (rejected.empty()) return s;
    const double expected = static_cast<double>(n_tests) * alpha_n;
    double sum_fraction = 0.0;
    double sum_ratio = 0.0;
    double sum_sq = 0.0;
    for (std::size_t n1 : rejected) {
        const double ratio = static_cast<double>(n1) / expected;
        sum_fraction += static_cast<double>(n1) / static_cast<double>(n_tests);
        sum_ratio += ratio;
        sum_sq += (ratio - 1.0) * (ratio - 1.0);
    }
    const double r = static_cast<double>(rejected.size());
    s.mean_fraction = sum_fraction / r;
    s.mean_ratio = sum_ratio / r;
    s.rmse = std::sqrt(sum_sq / r);
    return s;
}

SimulationReport run_accuracy_experiment(const ExperimentGrid& grid,
                                         const MeanMixtureConfig& mean_cfg, unsigned threads) {
    grid.validate();
    mean_cfg.validate();

    SimulationReport report;
    report.grid = grid;
    report.c = mean_cfg.c;

    const auto scaled = [&](std::size_t base, std::size_t floor) {
        const auto v = static_cast<std::size_t>(std::llround(static_cast<double>(base) * grid.desk_scale));
        return std::max(v, floor);
    };

    for (std::size_t n_tests : grid.n_tests) {
        const double alpha_n = select::alpha_schedule(n_tests, grid.rounded_alpha);
        const std::size_t reps =
            scaled(grid.n_replications.value_or(default_replications(n_tests)), 1);
        const std::size_t boot_b = scaled(grid.bootstrap_B.value_or(default_bootstrap_B(alpha_n)),
                                          calibrate::kMinResamples);

        for (std::size_t n_reps : grid.n_reps) {
            const std::uint64_t cell_seed = derive_seed(derive_seed(grid.seed, n_tests), n_reps);
            std::vector<std::vector<std::size_t>> counts(reps);

            parallel_for(reps, threads, [&](std::size_t r) {
                const std::uint64_t rep_seed = derive_seed(cell_seed, r);
                FactorModelConfig fcfg;
                fcfg.n_tests = n_tests;
                fcfg.n_reps = n_reps;
                fcfg.factor_case = grid.factor_case;
                fcfg.chi_df = grid.chi_df;
                fcfg.seed = derive_seed(rep_seed, 0);
                MeanMixtureConfig mcfg{mean_cfg.c, derive_seed(rep_seed, 1)};
                const auto data = gen_dataset(fcfg, mcfg);
                const calibrate::BootstrapConfig boot{boot_b, derive_seed(rep_seed, 2)};
                counts[r] = rejection_counts(data.y, grid.methods, alpha_n, boot);
            });

            for (std::size_t m = 0; m < grid.methods.size(); ++m) {
                std::vector<std::size_t> per_rep(reps);
                for (std::size_t r = 0; r < reps; ++r) per_rep[r] = counts[r][m];
                const auto acc = summarize_accuracy(per_rep, n_tests, alpha_n);
                CellResult cell;
                cell.n_tests = n_tests;
                cell.n_reps = n_reps;
                cell.method = grid.methods[m];
                cell.alpha_n = alpha_n;
                cell.replications = reps;
                cell.bootstrap_B = boot_b;
                cell.mean_rejected_fraction = acc.mean_fraction;
                cell.mean_ratio = acc.mean_ratio;
                cell.rmse = acc.rmse;
                report.cells.push_back(cell);
            }
        }
    }
    return report;
}

}  // namespace simcal::simulate
