#include "simcal/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "simcal/errors.hpp"
#include "simcal/parallel.hpp"
#include "simcal/random.hpp"

namespace simcal::calibrate {

namespace {

void require_alpha(double alpha, const char* fn) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw DomainError(std::string(fn) + ": alpha must lie in (0, 1)");
    }
}

// normal_quantile/student_t_quantile raise RangeError for one-sided tails
// below 1e-300; re-raise with the caller's context.
template <class Fn>
double two_sided_point(double level, const char* fn, Fn quantile) {
    try {
        return quantile(0.5 * level);
    } catch (const RangeError&) {
        throw RangeError(std::string(fn) + ": per-test level underflows");
    }
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::normal: return "normal";
        case Method::student_t: return "t";
        case Method::bootstrap: return "bootstrap";
        case Method::aggregated_bootstrap: return "agg-bootstrap";
        case Method::empirical: return "empirical";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    if (name == "normal") return Method::normal;
    if (name == "t" || name == "student" || name == "student_t") return Method::student_t;
    if (name == "bootstrap") return Method::bootstrap;
    if (name == "agg-bootstrap" || name == "aggregated_bootstrap") {
        return Method::aggregated_bootstrap;
    }
    if (name == "empirical") return Method::empirical;
    throw ConfigError("unknown method '" + std::string(name) +
                      "' (expected normal, t, bootstrap, agg-bootstrap or empirical)");
}

PerTestLevel per_test_level(double alpha, std::size_t n_tests) {
    require_alpha(alpha, "per_test_level");
    if (n_tests == 0) throw DomainError("per_test_level: number of tests must be >= 1");
    const double level = -std::expm1(std::log1p(-alpha) / static_cast<double>(n_tests));
    return {alpha, n_tests, level};
}

void BootstrapConfig::validate() const {
    if (n_resamples < kMinResamples) {
        throw ConfigError("bootstrap needs at least " + std::to_string(kMinResamples) +
                          " resamples, got " + std::to_string(n_resamples));
    }
}

CriticalPoints normal_critical(double alpha, std::size_t n_tests) {
    const auto lvl = per_test_level(alpha, n_tests);
    CriticalPoints cp;
    cp.method = Method::normal;
    cp.scalar = two_sided_point(lvl.level, "normal_critical",
                                [](double p) { return specfun::normal_quantile(p); });
    return cp;
}

CriticalPoints student_critical(double alpha, std::size_t n_tests, DegreesOfFreedom df) {
    const auto lvl = per_test_level(alpha, n_tests);
    CriticalPoints cp;
    cp.method = Method::student_t;
    cp.df = df;
    cp.scalar = two_sided_point(lvl.level, "student_critical",
                                [df](double p) { return specfun::student_t_quantile(p, df); });
    return cp;
}

std::vector<double> bootstrap_tstat_sample(std::span<const double> row,
                                           const BootstrapConfig& cfg, std::uint64_t stream) {
    cfg.validate();
    rowstats::validate_row(row);
    if (rowstats::is_degenerate(row)) {
        throw DegenerateRowError("bootstrap: row has zero variance");
    }

    const std::size_t n = row.size();
    const double dn = static_cast<double>(n);
    const double sqrt_n = std::sqrt(dn);
    double sum = 0.0;
    for (double v : row) sum += v;
    const double row_mean = sum / dn;

    CounterRng rng(derive_seed(cfg.seed, stream));
    std::vector<double> draw(n);
    std::vector<double> out(cfg.n_resamples);

    for (std::size_t b = 0; b < cfg.n_resamples; ++b) {
        int attempts = 0;
        for (;;) {
            for (std::size_t j = 0; j < n; ++j) draw[j] = row[rng.below(n)];
            if (!rowstats::is_degenerate(draw)) break;
            if (++attempts >= kMaxRedraws) {
                throw DegenerateRowError("bootstrap: " + std::to_string(kMaxRedraws) +
                                         " consecutive constant resamples");
            }
        }
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            draw[j] -= row_mean;
            s += draw[j];
        }
        const double m = s / dn;
        double ss = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double d = draw[j] - m;
            ss += d * d;
        }
        out[b] = sqrt_n * m / std::sqrt(ss / dn);
    }
    return out;
}

double upper_order_statistic(std::span<const double> abs_values, double level) {
    if (abs_values.empty()) throw DomainError("upper_order_statistic: empty sample");
    if (!(level > 0.0 && level <= 1.0)) {
        throw DomainError("upper_order_statistic: level must lie in (0, 1]");
    }
    const std::size_t b = abs_values.size();
    // Shave a few ulps so B * level landing exactly on an integer is not
    // pushed to the next order statistic by rounding.
    const double target = static_cast<double>(b) * level * (1.0 - 8.0 * std::numeric_limits<double>::epsilon());
    std::size_t k = static_cast<std::size_t>(std::ceil(target));
    k = std::clamp<std::size_t>(k, 1, b);

    std::vector<double> sorted(abs_values.begin(), abs_values.end());
    auto kth = sorted.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(sorted.begin(), kth, sorted.end(), std::greater<>());
    return *kth;
}

bool bootstrap_resolves_level(std::size_t n_resamples, double level) {
    return static_cast<double>(n_resamples) * level >= 1.0;
}

double bootstrap_critical(std::span<const double> row, double alpha, std::size_t n_tests,
                          const BootstrapConfig& cfg, std::uint64_t stream) {
    const auto lvl = per_test_level(alpha, n_tests);
    auto sample = bootstrap_tstat_sample(row, cfg, stream);
    for (double& v : sample) v = std::abs(v);
    return upper_order_statistic(sample, lvl.level);
}

CriticalPoints bootstrap_critical_points(const DataMatrix& data, double alpha,
                                         const BootstrapConfig& cfg, unsigned threads) {
    cfg.validate();
    if (data.rows() == 0) throw ShapeError("bootstrap_critical_points: no rows");
    std::size_t usable = 0;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        rowstats::validate_row(data.row(i));
        if (!rowstats::is_degenerate(data.row(i))) ++usable;
    }
    if (usable == 0) throw DegenerateRowError("bootstrap_critical_points: every row is constant");

    std::vector<double> points(data.rows(), std::numeric_limits<double>::infinity());
    parallel_for(data.rows(), threads, [&](std::size_t i) {
        if (rowstats::is_degenerate(data.row(i))) return;
        points[i] = bootstrap_critical(data.row(i), alpha, usable, cfg, i);
    });

    CriticalPoints cp;
    cp.method = Method::bootstrap;
    cp.per_row = std::move(points);
    return cp;
}

double p_value_normal(double t) {
    return std::min(1.0, 2.0 * specfun::normal_sf(std::abs(t)));
}

double p_value_student(double t, DegreesOfFreedom df) {
    return std::min(1.0, 2.0 * specfun::student_t_sf(std::abs(t), df));
}

double p_value_bootstrap(double t, std::span<const double> boot_sample) {
    if (boot_sample.empty()) throw DomainError("p_value_bootstrap: empty bootstrap sample");
    const double at = std::abs(t);
    std::size_t exceed = 0;
    for (double v : boot_sample) {
        if (std::abs(v) >= at) ++exceed;
    }
    return static_cast<double>(exceed + 1) / static_cast<double>(boot_sample.size() + 1);
}

double p_value(double t, Method method, std::optional<DegreesOfFreedom> df,
               std::optional<std::span<const double>> boot_sample) {
    switch (method) {
        case Method::normal:
            return p_value_normal(t);
        case Method::student_t:
            if (!df) throw ConfigError("p_value: Student t calibration needs degrees of freedom");
            return p_value_student(t, *df);
        case Method::bootstrap:
            if (!boot_sample) throw ConfigError("p_value: bootstrap calibration needs a sample");
            return p_value_bootstrap(t, *boot_sample);
        case Method::aggregated_bootstrap:
        case Method::empirical:
            break;
    }
    throw ConfigError("p_value: aggregated methods are evaluated through an AggregatedCdf");
}

double deviation_point(double alpha_n) {
    if (!(alpha_n > 0.0 && alpha_n < 1.0)) {
        throw DomainError("deviation_point: alpha_N must lie in (0, 1)");
    }
    return two_sided_point(alpha_n, "deviation_point",
                           [](double p) { return specfun::normal_quantile(p); });
}

}  // namespace simcal::calibrate
