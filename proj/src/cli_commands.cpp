#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "simcal/aggregate.hpp"
#include "simcal/cli.hpp"
#include "simcal/errors.hpp"
#include "simcal/parallel.hpp"
#include "simcal/rowstats.hpp"

namespace simcal::cli {

namespace {

using calibrate::Method;

constexpr std::size_t kBootBatch = 256;  // rows resampled per parallel batch

template <class T, class F>
std::string join(const std::vector<T>& xs, F&& fmt_one) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ',';
        s += fmt_one(xs[i]);
    }
    return s;
}

std::string num(double x) { return fmt::format("{}", x); }

std::string header(const std::string& command_line) {
    return fmt::format("# simcal {}\n# config: simcal {}\n", SIMCAL_VERSION, command_line);
}

// Right-aligns every column of `cells` (first row is the header).
std::string render_table(const std::vector<std::vector<std::string>>& cells) {
    if (cells.empty()) return {};
    std::vector<std::size_t> width(cells.front().size(), 0);
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += "  ";
            out += fmt::format("{:>{}}", row[c], width[c]);
        }
        out += '\n';
    }
    return out;
}

std::string csv_lines(const std::vector<std::vector<std::string>>& cells) {
    std::string out;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += row[c];
        }
        out += '\n';
    }
    return out;
}

// p-values of the non-degenerate rows `rows` for every requested method.
std::vector<std::vector<double>> method_p_values(const DataMatrix& y,
                                                 const rowstats::TestBattery& battery,
                                                 const std::vector<std::size_t>& rows,
                                                 const std::vector<double>& t,
                                                 const std::vector<Method>& methods,
                                                 const calibrate::BootstrapConfig& boot,
                                                 unsigned threads) {
    const bool wants_boot = std::any_of(methods.begin(), methods.end(), [](Method m) {
        return m == Method::bootstrap || m == Method::aggregated_bootstrap;
    });
    std::vector<double> p_boot;
    std::vector<double> p_agg;
    if (wants_boot) {
        boot.validate();
        p_boot.resize(t.size());
        aggregate::PooledTailCounter pooled(t);
        std::vector<std::vector<double>> samples(kBootBatch);
        for (std::size_t start = 0; start < rows.size(); start += kBootBatch) {
            const std::size_t count = std::min(kBootBatch, rows.size() - start);
            parallel_for(count, threads, [&](std::size_t j) {
                const std::size_t k = start + j;
                samples[j] = calibrate::bootstrap_tstat_sample(y.row(rows[k]), boot, rows[k]);
                p_boot[k] = calibrate::p_value_bootstrap(t[k], samples[j]);
            });
            for (std::size_t j = 0; j < count; ++j) pooled.add_sample(samples[j]);
        }
        p_agg = pooled.p_values();
    }

    const calibrate::DegreesOfFreedom df{static_cast<std::int64_t>(y.cols()) - 1};
    std::vector<std::vector<double>> out;
    for (Method m : methods) {
        std::vector<double> p(t.size());
        switch (m) {
            case Method::normal:
                for (std::size_t k = 0; k < t.size(); ++k) p[k] = calibrate::p_value_normal(t[k]);
                break;
            case Method::student_t:
                for (std::size_t k = 0; k < t.size(); ++k) p[k] = calibrate::p_value_student(t[k], df);
                break;
            case Method::bootstrap: p = p_boot; break;
            case Method::aggregated_bootstrap: p = p_agg; break;
            case Method::empirical:
                p = aggregate::in_sample_p_values(aggregate::empirical_null_cdf(battery), t);
                break;
        }
        out.push_back(std::move(p));
    }
    return out;
}

void check_alpha(double a, const char* name) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError(fmt::format("{} must lie in (0, 1), got {}", name, a));
}

}  // namespace

CommandOutput cmd_test(const TestOptions& opts, const csv::LabeledMatrix& input) {
    check_alpha(opts.alpha, "--alpha");
    if (opts.alpha_n) check_alpha(*opts.alpha_n, "--alpha-n");
    if (opts.methods.empty()) throw ConfigError("--method: at least one method is required");
    if (opts.rules.empty()) throw ConfigError("--rule: at least one rule is required");

    const DataMatrix& y = input.data;
    if (y.cols() < 2) throw ConfigError("each row needs at least 2 replicates");
    const auto battery = rowstats::summarize_matrix(y, opts.threads);

    std::vector<std::size_t> rows;
    std::vector<double> t;
    for (std::size_t i = 0; i < battery.size(); ++i) {
        if (battery.summaries[i]) {
            rows.push_back(i);
            t.push_back(battery.summaries[i]->t);
        }
    }
    if (rows.empty()) throw DegenerateRowError("every row is constant; nothing to test");

    const std::size_t n_tests = rows.size();
    const double alpha_n = opts.alpha_n.value_or(select::alpha_schedule(n_tests));
    const calibrate::BootstrapConfig boot{opts.boot_reps, opts.seed};
    const auto p = method_p_values(y, battery, rows, t, opts.methods, boot, opts.threads);

    // rejected[m][r][k]: row rows[k] rejected by rule r under method m
    std::vector<std::vector<std::vector<bool>>> rejected(opts.methods.size());
    std::vector<std::vector<std::string>> summary{
        {"method", "rule", "level", "rejected", "fdr_estimate"}};
    for (std::size_t m = 0; m < opts.methods.size(); ++m) {
        for (select::Rule rule : opts.rules) {
            const double level = rule == select::Rule::classical ? alpha_n : opts.alpha;
            const auto outcome = select::apply_rule(rule, p[m], level);
            std::vector<bool> flags(n_tests, false);
            for (std::size_t k : outcome.rejected) flags[k] = true;
            rejected[m].push_back(std::move(flags));
            const auto fdr = select::fdr_estimate(outcome.k, n_tests, alpha_n);
            summary.push_back({std::string(calibrate::to_string(opts.methods[m])),
                               std::string(select::to_string(rule)), csv::format_prob(level),
                               std::to_string(outcome.k), fdr ? csv::format_prob(*fdr) : "NA"});
        }
    }

    const auto method_names = join(opts.methods, [](Method m) { return std::string(calibrate::to_string(m)); });
    const auto rule_names = join(opts.rules, [](select::Rule r) { return std::string(select::to_string(r)); });
    std::string out = header(fmt::format(
        "test --input {} --alpha {} --alpha-n {} --method {} --rule {} --boot-reps {} --seed {}",
        opts.input, num(opts.alpha), num(alpha_n), method_names, rule_names, opts.boot_reps,
        opts.seed));
    out += fmt::format("# n_tests: {} (degenerate rows: {}), n_reps: {}\n", n_tests,
                       battery.degenerate_count(), y.cols());

    out += "id,t,degenerate";
    for (Method m : opts.methods) out += fmt::format(",p_{}", calibrate::to_string(m));
    for (Method m : opts.methods) {
        for (select::Rule r : opts.rules) {
            out += fmt::format(",reject_{}_{}", calibrate::to_string(m), select::to_string(r));
        }
    }
    out += '\n';

    std::size_t k = 0;
    for (std::size_t i = 0; i < y.rows(); ++i) {
        out += input.ids.empty() ? std::to_string(i + 1) : input.ids[i];
        const bool live = battery.summaries[i].has_value();
        if (live) {
            out += ',' + csv::format_real(t[k]) + ",0";
            for (std::size_t m = 0; m < opts.methods.size(); ++m) out += ',' + csv::format_prob(p[m][k]);
            for (std::size_t m = 0; m < opts.methods.size(); ++m) {
                for (std::size_t r = 0; r < opts.rules.size(); ++r) out += rejected[m][r][k] ? ",1" : ",0";
            }
            ++k;
        } else {
            out += ",NA,1";
            for (std::size_t m = 0; m < opts.methods.size(); ++m) out += ",NA";
            for (std::size_t m = 0; m < opts.methods.size() * opts.rules.size(); ++m) out += ",0";
        }
        out += '\n';
    }
    return {std::move(out), render_table(summary)};
}

CommandOutput cmd_simulate(const SimulateOptions& opts) {
    const auto& g = opts.grid;
    g.validate();
    const auto report = simulate::run_accuracy_experiment(g, {opts.c, 0}, opts.threads);

    std::string cmd = fmt::format(
        "simulate --n-tests {} --n-reps {} --method {}",
        join(g.n_tests, [](std::size_t v) { return std::to_string(v); }),
        join(g.n_reps, [](std::size_t v) { return std::to_string(v); }),
        join(g.methods, [](Method m) { return std::string(calibrate::to_string(m)); }));
    if (g.n_replications) cmd += fmt::format(" --replications {}", *g.n_replications);
    if (g.bootstrap_B) cmd += fmt::format(" --boot-reps {}", *g.bootstrap_B);
    cmd += fmt::format(" --desk-scale {} --case {} --chi-df {} --c {}{} --seed {}", num(g.desk_scale),
                       simulate::to_string(g.factor_case), g.chi_df, num(opts.c),
                       g.rounded_alpha ? "" : " --exact-alpha", g.seed);

    std::vector<std::vector<std::string>> cells{{"n_tests", "n_reps", "method", "alpha_n",
                                                 "replications", "boot_reps",
                                                 "mean_rejected_fraction", "mean_ratio", "rmse"}};
    for (const auto& c : report.cells) {
        cells.push_back({std::to_string(c.n_tests), std::to_string(c.n_reps),
                         std::string(calibrate::to_string(c.method)), csv::format_prob(c.alpha_n),
                         std::to_string(c.replications), std::to_string(c.bootstrap_B),
                         csv::format_prob(c.mean_rejected_fraction), csv::format_real(c.mean_ratio),
                         csv::format_real(c.rmse)});
    }
    return {header(cmd) + csv_lines(cells), render_table(cells)};
}

CommandOutput cmd_validate_ld(const ValidateLdOptions& opts) {
    const auto rows =
        simulate::ld_ratio_validate(opts.dist, opts.n, opts.xs, opts.n_mc, opts.seed, opts.threads);
    const std::string cmd = fmt::format(
        "validate-ld --dist {} --n {} --x {} --n-mc {} --seed {}", simulate::to_string(opts.dist),
        opts.n, join(opts.xs, num), opts.n_mc, opts.seed);

    std::vector<std::vector<std::string>> cells{{"x", "exceed", "measured", "mc_se", "predicted",
                                                 "residual", "scaled_residual", "expected_count",
                                                 "flagged"}};
    for (const auto& r : rows) {
        cells.push_back({csv::format_real(r.x), std::to_string(r.exceed), csv::format_real(r.measured),
                         csv::format_real(r.mc_se), csv::format_real(r.predicted),
                         csv::format_real(r.residual), csv::format_real(r.scaled_residual),
                         csv::format_real(r.expected_count), r.flagged ? "1" : "0"});
    }
    std::string head = header(cmd);
    head += fmt::format("# skewness: {}\n", csv::format_real(simulate::ld_skewness(opts.dist)));
    return {head + csv_lines(cells), render_table(cells)};
}

CommandOutput cmd_forecast(const ForecastOptions& opts) {
    check_alpha(opts.alpha, "--alpha");
    if (opts.ks.empty()) throw ConfigError("--k: at least one k is required");
    if (std::find(opts.ks.begin(), opts.ks.end(), std::size_t{0}) != opts.ks.end()) {
        throw ConfigError("--k: values must be >= 1");
    }

    double gamma = 0.0;
    std::string gamma_echo;
    if (opts.gamma) {
        if (opts.n_tests || opts.n_reps) throw ConfigError("give either --gamma or --n-tests/--n-reps, not both");
        gamma = *opts.gamma;
        gamma_echo = fmt::format("--gamma {}", num(gamma));
    } else if (opts.n_tests && opts.n_reps) {
        if (*opts.n_tests < 1 || *opts.n_reps < 1) throw ConfigError("--n-tests and --n-reps must be >= 1");
        gamma = std::log(static_cast<double>(*opts.n_tests)) /
                std::cbrt(static_cast<double>(*opts.n_reps));
        gamma_echo = fmt::format("--n-tests {} --n-reps {}", *opts.n_tests, *opts.n_reps);
    } else if (opts.n_tests || opts.n_reps) {
        throw ConfigError("--n-tests and --n-reps must be given together");
    } else {
        gamma_echo = "--gamma 0";
    }
    if (!(std::isfinite(gamma) && gamma >= 0.0)) throw ConfigError("gamma must be finite and >= 0");

    const auto fc = select::forecast(opts.skewness, gamma, opts.alpha, opts.ks);

    const std::string skew_echo = opts.skewness_file
                                      ? "--skewness-file " + *opts.skewness_file
                                      : "--skewness " + join(opts.skewness, num);
    const std::string cmd = fmt::format(
        "forecast {} {} --alpha {} --k {}", skew_echo, gamma_echo, num(opts.alpha),
        join(opts.ks, [](std::size_t v) { return std::to_string(v); }));

    std::vector<std::vector<std::string>> cells{
        {"k", "beta", "fwer_limit", "gfwer_bound", "gfwer_poisson"}};
    for (std::size_t i = 0; i < fc.ks.size(); ++i) {
        cells.push_back({std::to_string(fc.ks[i]), csv::format_prob(fc.beta),
                         csv::format_prob(fc.fwer_limit), csv::format_prob(fc.gfwer[i].bound),
                         csv::format_prob(fc.gfwer[i].poisson_limit)});
    }
    std::string head = header(cmd);
    head += fmt::format("# gamma: {}, tests: {}\n", csv::format_real(gamma), opts.skewness.size());
    return {head + csv_lines(cells), render_table(cells)};
}

}  // namespace simcal::cli
