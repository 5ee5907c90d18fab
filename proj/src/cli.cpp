#include "simcal/cli.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "simcal/errors.hpp"

namespace simcal::cli {

namespace {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Flag values as typed, before conversion to the option structs.
struct Raw {
    std::string config;
    std::string preset;
    std::string out;
    unsigned threads = 0;  // 0: one per hardware thread
    std::uint64_t seed = 1;

    std::string input;
    double alpha = 0.05;
    double alpha_n = 0.0;
    std::vector<std::string> methods;
    std::vector<std::string> rules;
    std::size_t boot_reps = 2000;

    std::vector<std::size_t> n_tests;
    std::vector<std::size_t> n_reps;
    std::size_t replications = 0;
    double desk_scale = 1.0;
    std::string factor_case = "I";
    int chi_df = 6;
    double c = 1.0;
    bool exact_alpha = false;

    std::string dist = "beta26";
    std::size_t ld_n = 50;
    std::vector<double> xs;
    std::size_t n_mc = 1'000'000;

    std::vector<double> skewness;
    std::string skewness_file;
    double gamma = 0.0;
    std::size_t forecast_n_tests = 0;
    std::size_t forecast_n_reps = 0;
    std::vector<std::size_t> ks;
};

struct Parser {
    CLI::App app{"Calibration of many simultaneous t tests", "simcal"};
    Raw raw;
    CLI::App* test = nullptr;
    CLI::App* simulate = nullptr;
    CLI::App* validate = nullptr;
    CLI::App* forecast = nullptr;

    Parser() {
        app.require_subcommand(1);
        app.set_version_flag("--version", std::string(SIMCAL_VERSION));

        test = app.add_subcommand("test", "p-values and selections for a data matrix (CSV)");
        simulate = app.add_subcommand("simulate", "level-accuracy experiment on synthetic data");
        validate = app.add_subcommand("validate-ld", "Monte-Carlo check of the t tail ratio");
        forecast = app.add_subcommand("forecast", "limiting family-wise error levels");

        for (CLI::App* sub : {test, simulate, validate, forecast}) {
            sub->add_option("--config", raw.config, "key=value file; flags override it");
            sub->add_option("--preset", raw.preset, "named defaults (paper; validate-ld also symmetric, skewed)");
            sub->add_option("--out", raw.out, "write the CSV here and print a table to stdout");
        }
        for (CLI::App* sub : {test, simulate, validate}) {
            sub->add_option("--seed", raw.seed, "random seed")->capture_default_str();
            sub->add_option("--threads", raw.threads, "worker threads (0: all cores)")->capture_default_str();
        }

        test->add_option("--input,input", raw.input, "CSV: one row per test, one column per replicate")->required();
        for (CLI::App* sub : {test, forecast}) {
            sub->add_option("--alpha", raw.alpha, "overall level")->capture_default_str();
        }
        test->add_option("--alpha-n", raw.alpha_n, "per-test level for the classical rule (default 1.5 N^-2/3)");
        test->add_option("--rule", raw.rules, "bonferroni, bh, classical")->delimiter(',');
        for (CLI::App* sub : {test, simulate}) {
            sub->add_option("--method", raw.methods, "normal, t, bootstrap, agg-bootstrap, empirical")->delimiter(',');
            sub->add_option("--boot-reps", raw.boot_reps, "bootstrap resamples B per row");
        }

        simulate->add_option("--n-tests", raw.n_tests, "numbers of tests N (multiples of 3)")->delimiter(',');
        simulate->add_option("--n-reps", raw.n_reps, "replicates per test n")->delimiter(',');
        simulate->add_option("--replications", raw.replications, "replications per cell (default 600000/N)");
        simulate->add_option("--desk-scale", raw.desk_scale, "multiplies replications and B")->capture_default_str();
        simulate->add_option("--case", raw.factor_case, "factor loadings: I, II, independent")->capture_default_str();
        simulate->add_option("--chi-df", raw.chi_df, "chi-square factor degrees of freedom")->capture_default_str();
        simulate->add_option("--c", raw.c, "weight of the point mass at zero in the mean mixture")->capture_default_str();
        simulate->add_flag("--exact-alpha", raw.exact_alpha, "use 1.5 N^-2/3 without rounding");

        validate->add_option("--dist", raw.dist, "normal, uniform, beta26, chisq6")->capture_default_str();
        validate->add_option("--n", raw.ld_n, "sample size")->capture_default_str();
        validate->add_option("--x", raw.xs, "tail points")->delimiter(',');
        validate->add_option("--n-mc", raw.n_mc, "Monte-Carlo samples")->capture_default_str();

        forecast->add_option("--skewness", raw.skewness, "per-test skewness values")->delimiter(',');
        forecast->add_option("--skewness-file", raw.skewness_file, "file of per-test skewness values");
        forecast->add_option("--gamma", raw.gamma, "limit of log N / n^(1/3)");
        forecast->add_option("--n-tests", raw.forecast_n_tests, "N, to derive gamma with --n-reps");
        forecast->add_option("--n-reps", raw.forecast_n_reps, "n, to derive gamma with --n-tests");
        forecast->add_option("--k", raw.ks, "k values for the generalized error rate")->delimiter(',');
    }

    CLI::App* chosen() const {
        for (CLI::App* sub : {test, simulate, validate, forecast}) {
            if (sub->parsed()) return sub;
        }
        return nullptr;
    }

    void parse(std::vector<std::string> args) {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    }
};

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

KeyValues read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    KeyValues kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("{}:{}: expected key=value", path, line_no));
        }
        auto key = trim(body.substr(0, eq));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        std::string value;
        for (char ch : trim(body.substr(eq + 1))) {
            if (ch != ' ' && ch != '\t') value += ch;
        }
        if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", path, line_no));
        kv.emplace_back(std::move(key), std::move(value));
    }
    return kv;
}

KeyValues preset_values(const std::string& command, const std::string& name) {
    const std::string ld_grid = "0.5,1.0,1.5,1.9";
    if (name == "paper") {
        if (command == "test") {
            return {{"alpha", "0.05"}, {"method", "normal,t,bootstrap,agg-bootstrap"},
                    {"rule", "classical"}, {"boot-reps", "2000"}};
        }
        if (command == "simulate") {
            return {{"n-tests", "600,1800,6000"}, {"n-reps", "6,20,50"},
                    {"method", "normal,t,bootstrap,agg-bootstrap"}, {"case", "I"},
                    {"chi-df", "6"}, {"c", "1"}};
        }
        if (command == "validate-ld") {
            return {{"dist", "chisq6"}, {"n", "50"}, {"x", ld_grid}, {"n-mc", "10000000"}};
        }
        if (command == "forecast") return {{"skewness", "1.1547005383792515"}, {"alpha", "0.05"}};
    }
    if (command == "validate-ld" && (name == "symmetric" || name == "skewed")) {
        return {{"dist", name == "symmetric" ? "uniform" : "beta26"}, {"n", "50"}, {"x", ld_grid},
                {"n-mc", "10000000"}};
    }
    throw ConfigError("unknown preset '" + name + "' for " + command);
}

// Adds --key=value for every key the command line left unset: config file
// entries first, preset entries for whatever is still missing.
std::vector<std::string> fill_defaults(const Parser& first) {
    CLI::App* sub = first.chosen();
    std::vector<std::string> extra;
    std::set<std::string> taken;
    const auto unset = [&](const std::string& key) {
        const CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (!opt) throw ConfigError("unknown setting '" + key + "' for " + sub->get_name());
        return opt->count() == 0 && !taken.count(key);
    };

    std::string preset = first.raw.preset;
    if (!first.raw.config.empty()) {
        for (const auto& [key, value] : read_config(first.raw.config)) {
            if (key == "config") throw ConfigError("config files cannot include other config files");
            if (!unset(key)) continue;
            if (key == "preset") preset = value;
            extra.push_back("--" + key + "=" + value);
            taken.insert(key);
        }
    }
    if (!preset.empty()) {
        for (const auto& [key, value] : preset_values(sub->get_name(), preset)) {
            if (!unset(key)) continue;
            extra.push_back("--" + key + "=" + value);
            taken.insert(key);
        }
    }
    return extra;
}

template <class T, class F>
std::vector<T> parse_list(const std::vector<std::string>& names, F&& parse_one) {
    std::vector<T> out;
    for (const auto& n : names) out.push_back(parse_one(n));
    return out;
}

unsigned resolve_threads(unsigned t) {
    return t != 0 ? t : std::max(1u, std::thread::hardware_concurrency());
}

CommandOutput dispatch(const Parser& p) {
    const Raw& r = p.raw;
    const CLI::App* sub = p.chosen();
    const auto given = [&](const char* flag) { return sub->get_option(flag)->count() > 0; };

    if (sub == p.test) {
        TestOptions o;
        o.input = r.input;
        o.alpha = r.alpha;
        if (given("--alpha-n")) o.alpha_n = r.alpha_n;
        if (!r.methods.empty()) o.methods = parse_list<calibrate::Method>(r.methods, calibrate::parse_method);
        if (!r.rules.empty()) o.rules = parse_list<select::Rule>(r.rules, select::parse_rule);
        o.boot_reps = r.boot_reps;
        o.seed = r.seed;
        o.threads = resolve_threads(r.threads);
        const auto input = csv::read_matrix_file(r.input);
        return cmd_test(o, input);
    }
    if (sub == p.simulate) {
        SimulateOptions o;
        auto& g = o.grid;
        if (!r.n_tests.empty()) g.n_tests = r.n_tests;
        if (!r.n_reps.empty()) g.n_reps = r.n_reps;
        if (!r.methods.empty()) g.methods = parse_list<calibrate::Method>(r.methods, calibrate::parse_method);
        if (given("--replications")) g.n_replications = r.replications;
        if (given("--boot-reps")) g.bootstrap_B = r.boot_reps;
        g.desk_scale = r.desk_scale;
        g.factor_case = simulate::parse_factor_case(r.factor_case);
        g.chi_df = r.chi_df;
        g.rounded_alpha = !r.exact_alpha;
        g.seed = r.seed;
        o.c = r.c;
        o.threads = resolve_threads(r.threads);
        return cmd_simulate(o);
    }
    if (sub == p.validate) {
        ValidateLdOptions o;
        o.dist = simulate::parse_ld_distribution(r.dist);
        o.n = r.ld_n;
        if (!r.xs.empty()) o.xs = r.xs;
        o.n_mc = r.n_mc;
        o.seed = r.seed;
        o.threads = resolve_threads(r.threads);
        return cmd_validate_ld(o);
    }
    ForecastOptions o;
    if (given("--skewness-file")) {
        if (given("--skewness")) throw ConfigError("give either --skewness or --skewness-file, not both");
        o.skewness = csv::read_values_file(r.skewness_file);
        o.skewness_file = r.skewness_file;
    } else if (!r.skewness.empty()) {
        o.skewness = r.skewness;
    }
    if (given("--gamma")) o.gamma = r.gamma;
    if (given("--n-tests")) o.n_tests = r.forecast_n_tests;
    if (given("--n-reps")) o.n_reps = r.forecast_n_reps;
    o.alpha = r.alpha;
    if (!r.ks.empty()) o.ks = r.ks;
    return cmd_forecast(o);
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    const std::vector<std::string> argv(args.begin(), args.end());
    try {
        auto first = std::make_unique<Parser>();
        try {
            first->parse(argv);
        } catch (const CLI::CallForHelp&) {
            out << first->app.help("", CLI::AppFormatMode::All);
            return kExitOk;
        } catch (const CLI::CallForVersion&) {
            out << SIMCAL_VERSION << '\n';
            return kExitOk;
        } catch (const CLI::ParseError& e) {
            err << "error: " << e.what() << '\n';
            return kExitConfigError;
        }

        std::unique_ptr<Parser> final_parser = std::move(first);
        auto extra = fill_defaults(*final_parser);
        if (!extra.empty()) {
            auto second = std::make_unique<Parser>();
            std::vector<std::string> merged = argv;
            merged.insert(merged.end(), extra.begin(), extra.end());
            try {
                second->parse(merged);
            } catch (const CLI::ParseError& e) {
                err << "error in config or preset: " << e.what() << '\n';
                return kExitConfigError;
            }
            final_parser = std::move(second);
        }

        const auto result = dispatch(*final_parser);
        const std::string& path = final_parser->raw.out;
        if (path.empty()) {
            out << result.csv;
        } else {
            std::ofstream file(path, std::ios::binary);
            if (!file || !(file << result.csv) || !file.flush()) {
                err << "error: cannot write '" << path << "'\n";
                return kExitRuntimeError;
            }
            out << result.table;
        }
        return kExitOk;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return kExitParseError;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const ShapeError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntimeError;
    }
}

}  // namespace simcal::cli
