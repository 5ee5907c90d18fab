#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "simcal/errors.hpp"
#include "simcal/select.hpp"
#include "simcal/simulate.hpp"
#include "simcal/specfun.hpp"

using namespace simcal;
using namespace simcal::simulate;

namespace {

struct Moments {
    double mean = 0.0, var = 0.0, skew = 0.0, kurt = 0.0;
};

template <class Range>
Moments moments(const Range& xs) {
    long double s = 0.0L;
    std::size_t n = 0;
    for (double v : xs) {
        s += v;
        ++n;
    }
    const long double m = s / n;
    long double m2 = 0.0L, m3 = 0.0L, m4 = 0.0L;
    for (double v : xs) {
        const long double d = v - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    return {static_cast<double>(m), static_cast<double>(m2), static_cast<double>(m3 / std::pow(m2, 1.5L)),
            static_cast<double>(m4 / (m2 * m2))};
}

double corr(std::span<const double> a, std::span<const double> b) {
    const auto ma = moments(a), mb = moments(b);
    long double c = 0.0L;
    for (std::size_t j = 0; j < a.size(); ++j) c += (a[j] - ma.mean) * (b[j] - mb.mean);
    return static_cast<double>(c / a.size()) / std::sqrt(ma.var * mb.var);
}

}  // namespace

TEST_CASE("gen_errors_factor: every row has mean 0 and variance 1") {
    for (FactorCase fc : {FactorCase::case_one, FactorCase::case_two}) {
        FactorModelConfig cfg;
        cfg.n_tests = 3;
        cfg.n_reps = 120'000;
        cfg.factor_case = fc;
        cfg.seed = 31;
        const auto eps = gen_errors_factor(cfg);
        for (std::size_t i = 0; i < 3; ++i) {
            const auto m = moments(eps.row(i));
            CHECK(std::fabs(m.mean) <= 4.0 / std::sqrt(static_cast<double>(cfg.n_reps)));
            CHECK(std::fabs(m.var - 1.0) <= 0.05);
        }
    }
}

TEST_CASE("gen_errors_factor: whole-matrix moments at N n >= 10^5") {
    FactorModelConfig cfg;
    cfg.n_tests = 3000;
    cfg.n_reps = 50;
    cfg.seed = 5;
    const auto eps = gen_errors_factor(cfg);
    const auto m = moments(eps.values());
    // The shared factors make cells dependent, so the grand mean has standard
    // deviation about 0.024 here rather than 1/sqrt(N n).
    CHECK(std::fabs(m.mean) <= 0.1);
    CHECK(std::fabs(m.var - 1.0) <= 0.05);
}

TEST_CASE("chi_factor: standardized chi-square with skewness sqrt(8/m)") {
    CounterRng rng(derive_seed(1, 2));
    std::vector<double> draws(1'000'000);
    for (auto& v : draws) v = chi_factor(rng, 6);
    const auto m = moments(draws);
    CHECK(std::fabs(m.mean) < 0.005);
    CHECK(std::fabs(m.var - 1.0) < 0.01);
    CHECK(std::fabs(m.skew - std::sqrt(8.0 / 6.0)) < 0.05);
    CHECK(std::fabs(m.skew - 1.1547) < 0.05);
}

TEST_CASE("gen_errors_factor: zero loadings give independent standard normals") {
    FactorModelConfig cfg;
    cfg.n_tests = 300;
    cfg.n_reps = 400;
    cfg.factor_case = FactorCase::independent;
    cfg.seed = 8;
    const auto loads = factor_loadings(cfg);
    CHECK(std::all_of(loads.a.begin(), loads.a.end(), [](double v) { return v == 0.0; }));
    CHECK(std::all_of(loads.b.begin(), loads.b.end(), [](double v) { return v == 0.0; }));
    const auto eps = gen_errors_factor(cfg);
    const auto m = moments(eps.values());
    CHECK(std::fabs(m.mean) < 4.0 / std::sqrt(1.2e5));
    CHECK(std::fabs(m.var - 1.0) < 0.02);
    CHECK(std::fabs(m.skew) < 0.05);
    CHECK(std::fabs(m.kurt - 3.0) < 0.1);
    // Rows are uncorrelated.
    double mean_abs = 0.0;
    for (std::size_t i = 0; i + 1 < 300; i += 2) mean_abs += corr(eps.row(i), eps.row(i + 1));
    CHECK(std::fabs(mean_abs / 150.0) < 0.02);
}

TEST_CASE("gen_errors_factor: loadings per case") {
    FactorModelConfig cfg;
    cfg.n_tests = 600;
    cfg.seed = 4;
    auto l = factor_loadings(cfg);
    CHECK(std::all_of(l.a.begin(), l.a.end(), [](double v) { return v == 0.25; }));
    CHECK(std::all_of(l.b.begin(), l.b.end(), [](double v) { return v == 0.1; }));
    cfg.factor_case = FactorCase::case_two;
    l = factor_loadings(cfg);
    CHECK(*std::min_element(l.a.begin(), l.a.end()) >= 0.0);
    CHECK(*std::max_element(l.a.begin(), l.a.end()) <= 0.4);
    CHECK(*std::max_element(l.b.begin(), l.b.end()) <= 0.2);
    CHECK(std::fabs(moments(l.a).mean - 0.2) < 0.02);
    CHECK(std::fabs(moments(l.b).mean - 0.1) < 0.01);
}

TEST_CASE("gen_errors_factor: within-group correlation exceeds between-group") {
    FactorModelConfig cfg;
    cfg.n_tests = 600;
    cfg.n_reps = 50;
    cfg.seed = 12;
    const auto eps = gen_errors_factor(cfg);
    double within = 0.0, between = 0.0;
    std::size_t nw = 0, nb = 0;
    for (std::size_t i = 0; i < 600; i += 7) {
        for (std::size_t k = i + 1; k < 600; k += 11) {
            const double r = corr(eps.row(i), eps.row(k));
            if (i / 200 == k / 200) {
                within += r;
                ++nw;
            } else {
                between += r;
                ++nb;
            }
        }
    }
    CHECK(within / nw > between / nb);
}

TEST_CASE("gen_errors_factor: configuration errors") {
    FactorModelConfig cfg;
    cfg.n_tests = 601;
    try {
        gen_errors_factor(cfg);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("multiple of 3") != std::string::npos);
    }
    cfg.n_tests = 6;
    cfg.chi_df = 0;
    CHECK_THROWS_AS(gen_errors_factor(cfg), ConfigError);
}

TEST_CASE("gen_means: mixture weights") {
    const auto zeros = gen_means(1000, {1.0, 3});
    CHECK(std::all_of(zeros.begin(), zeros.end(), [](double v) { return v == 0.0; }));

    const auto all = gen_means(200'000, {0.0, 3});
    const auto big = std::count_if(all.begin(), all.end(), [](double v) { return std::fabs(v) >= std::log(2.0); });
    CHECK(std::fabs(static_cast<double>(big) / 2e5 - 0.5) < 0.01);
    const auto pos = std::count_if(all.begin(), all.end(), [](double v) { return v > 0.0; });
    CHECK(std::fabs(static_cast<double>(pos) / 2e5 - 0.5) < 0.01);

    const auto half = gen_means(1'000'000, {0.5, 4});
    const auto z = std::count(half.begin(), half.end(), 0.0);
    CHECK(std::fabs(static_cast<double>(z) / 1e6 - 0.5) <= 0.002);

    CHECK_THROWS_AS(gen_means(10, {1.5, 1}), ConfigError);
    CHECK_THROWS_AS(gen_means(10, {-0.1, 1}), ConfigError);
}

TEST_CASE("gen_dataset: composition and reproducibility") {
    FactorModelConfig f;
    f.n_tests = 30;
    f.n_reps = 6;
    f.seed = 9;
    const auto eps = gen_errors_factor(f);
    const auto null = gen_dataset(f, {1.0, 2});
    CHECK(null.y == eps);
    CHECK(std::all_of(null.mu.begin(), null.mu.end(), [](double v) { return v == 0.0; }));

    const auto again = gen_dataset(f, {0.3, 2});
    CHECK(again.y == gen_dataset(f, {0.3, 2}).y);
    for (std::size_t i = 0; i < 30; ++i) {
        for (std::size_t j = 0; j < 6; ++j) CHECK(again.y(i, j) == eps(i, j) + again.mu[i]);
    }

    std::vector<double> mu(30, 0.0);
    mu[4] = 10.0;
    const auto shifted = add_means(eps, mu);
    const auto m = moments(shifted.row(4));
    CHECK(std::fabs(m.mean - 10.0) < 3.0);
    CHECK_THROWS_AS(add_means(eps, std::vector<double>(29, 0.0)), ShapeError);
}

TEST_CASE("gen_errors_moving_average") {
    const std::vector<double> one{1.0};
    const auto iid = gen_errors_moving_average(one, 100'000, 1, 3);
    const auto m = moments(iid.values());
    CHECK(std::fabs(m.var - 1.0) < 0.02);
    CHECK(std::fabs(m.kurt - 3.0) < 0.1);

    const std::vector<double> w{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
    const auto ma = gen_errors_moving_average(w, 100'000, 2, 5);
    for (std::size_t j = 0; j < 2; ++j) {
        std::vector<double> col(100'000);
        for (std::size_t i = 0; i < col.size(); ++i) col[i] = ma(i, j);
        const auto cm = moments(col);
        CHECK(std::fabs(cm.var - 1.0) < 0.02);
        std::vector<double> a(col.begin(), col.end() - 1), b(col.begin() + 1, col.end());
        CHECK(std::fabs(corr(a, b) - 0.5) < 0.02);
    }
    // Unnormalized weights are rescaled to unit variance.
    const std::vector<double> w3{2.0, -1.0, 0.5};
    const auto m3 = moments(gen_errors_moving_average(w3, 100'000, 1, 6).values());
    CHECK(std::fabs(m3.var - 1.0) < 0.02);

    CHECK_THROWS_AS(gen_errors_moving_average(std::vector<double>{}, 10, 2, 1), ConfigError);
    CHECK_THROWS_AS(gen_errors_moving_average(std::vector<double>{0.0, 0.0}, 10, 2, 1), ConfigError);
    CHECK_THROWS_AS(gen_errors_moving_average(std::vector<double>{std::nan("")}, 10, 2, 1), ConfigError);
    CHECK_THROWS_AS(gen_errors_moving_average(w3, 10, 2, 1, 4.0), ConfigError);
    CHECK_NOTHROW(gen_errors_moving_average(w3, 10, 2, 1, 5.25));
}

TEST_CASE("summarize_accuracy arithmetic") {
    const std::vector<std::size_t> n1{10, 14, 6};
    const auto s = summarize_accuracy(n1, 500, 0.02);
    CHECK(s.mean_ratio == doctest::Approx(1.0));
    CHECK(s.mean_fraction == doctest::Approx(0.02));
    CHECK(s.rmse == doctest::Approx(std::sqrt((0.0 + 0.16 + 0.16) / 3.0)));
}

TEST_CASE("oracle-uniform p-values reach the binomial noise floor") {
    // Exact p-values are iid U(0, 1) under the null, so N1 ~ Bin(N, alpha)
    // and the per-replication RMSE of N1/(N alpha) - 1 is sqrt((1 - alpha) / (N alpha)).
    const std::size_t n_tests = 600, reps = 4000;
    const double alpha = 0.02;
    std::vector<std::size_t> n1(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        CounterRng rng(derive_seed(99, r));
        std::vector<double> p(n_tests);
        for (auto& v : p) v = rng.uniform();
        n1[r] = select::classical_select(p, alpha).k;
    }
    const auto s = summarize_accuracy(n1, n_tests, alpha);
    const double floor = std::sqrt((1.0 - alpha) / (static_cast<double>(n_tests) * alpha));
    CHECK(std::fabs(s.rmse / floor - 1.0) < 0.2);
    CHECK(std::fabs(s.mean_ratio - 1.0) < 0.05);
}

TEST_CASE("rejection_counts: empirical aggregation rejects floor(N alpha)") {
    FactorModelConfig f;
    f.n_tests = 600;
    f.n_reps = 6;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        f.seed = seed;
        const auto y = gen_errors_factor(f);
        const std::vector<calibrate::Method> m{calibrate::Method::empirical};
        const auto k = rejection_counts(y, m, 0.02, {100, seed});
        CHECK(k[0] == 12);
    }
}

TEST_CASE("rejection_counts: reports p-values per method") {
    FactorModelConfig f;
    f.n_tests = 30;
    f.n_reps = 8;
    f.seed = 3;
    const auto y = gen_errors_factor(f);
    const std::vector<calibrate::Method> methods{calibrate::Method::normal, calibrate::Method::student_t,
                                                 calibrate::Method::bootstrap,
                                                 calibrate::Method::aggregated_bootstrap};
    std::vector<std::vector<double>> p;
    const auto k = rejection_counts(y, methods, 0.1, {200, 5}, &p);
    REQUIRE(p.size() == 4);
    for (std::size_t m = 0; m < 4; ++m) {
        CHECK(p[m].size() == 30);
        CHECK(k[m] == select::classical_select(p[m], 0.1).k);
    }
    // Normal p-values are smaller than Student ones for the same statistic.
    for (std::size_t i = 0; i < 30; ++i) CHECK(p[0][i] <= p[1][i]);
}

TEST_CASE("experiment defaults") {
    CHECK(default_replications(600) == 1000);
    CHECK(default_replications(1800) == 333);
    CHECK(default_replications(6000) == 100);
    CHECK(default_bootstrap_B(0.02) == 2000);
    CHECK(default_bootstrap_B(0.01) == 4000);
    CHECK(default_bootstrap_B(0.005) == 9000);
}

TEST_CASE("run_accuracy_experiment: shape, determinism and thread independence") {
    ExperimentGrid g;
    g.n_tests = {600};
    g.n_reps = {6, 20};
    g.n_replications = 6;
    g.bootstrap_B = 100;
    g.seed = 17;
    const auto a = run_accuracy_experiment(g, {1.0, 0}, 1);
    const auto b = run_accuracy_experiment(g, {1.0, 0}, 5);
    REQUIRE(a.cells.size() == 2 * g.methods.size());
    for (std::size_t c = 0; c < a.cells.size(); ++c) {
        CHECK(a.cells[c].rmse == b.cells[c].rmse);
        CHECK(a.cells[c].mean_ratio == b.cells[c].mean_ratio);
        CHECK(a.cells[c].rmse >= 0.0);
        CHECK(a.cells[c].replications == 6);
        CHECK(a.cells[c].bootstrap_B == 100);
        CHECK(a.cells[c].alpha_n == 0.02);
    }
    CHECK(a.cells[0].n_reps == 6);
    CHECK(a.cells[0].method == calibrate::Method::normal);
    CHECK(a.cells.back().n_reps == 20);
}

TEST_CASE("run_accuracy_experiment: desk scale multiplies replications and B") {
    ExperimentGrid g;
    g.n_tests = {600};
    g.n_reps = {6};
    g.methods = {calibrate::Method::student_t};
    g.desk_scale = 0.01;
    const auto r = run_accuracy_experiment(g, {1.0, 0});
    CHECK(r.cells[0].replications == 10);
    CHECK(r.cells[0].bootstrap_B == 100);  // floored at the minimum B
}

TEST_CASE("run_accuracy_experiment: Normal calibration is worse than Student at n = 6") {
    ExperimentGrid g;
    g.n_tests = {600};
    g.n_reps = {6};
    g.methods = {calibrate::Method::normal, calibrate::Method::student_t};
    g.n_replications = 40;
    g.seed = 2;
    const auto r = run_accuracy_experiment(g, {1.0, 0}, 4);
    CHECK(r.cells[0].rmse > r.cells[1].rmse);
}

TEST_CASE("ExperimentGrid validation") {
    ExperimentGrid g;
    g.n_tests = {601};
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g.n_tests = {600};
    g.n_reps = {1};
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g.n_reps = {6};
    g.desk_scale = 0.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g.desk_scale = 1.0;
    g.methods.clear();
    CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("ld_ratio_validate: x = 0, symmetric data, flags and determinism") {
    const std::vector<double> xs{0.0, 0.5, 1.0, 6.0};
    const auto rows = ld_ratio_validate(LdDistribution::uniform, 20, xs, 200'000, 3, 1);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].predicted == 1.0);
    CHECK(std::fabs(rows[0].measured - 1.0) < 4.0 * rows[0].mc_se + 1e-3);
    CHECK(rows[1].predicted == 1.0);
    CHECK_FALSE(rows[1].flagged);
    CHECK(rows[3].flagged);  // 2e5 * P(Z > 6) is far below 20

    const auto again = ld_ratio_validate(LdDistribution::uniform, 20, xs, 200'000, 3, 6);
    for (std::size_t k = 0; k < 4; ++k) CHECK(again[k].exceed == rows[k].exceed);

    CHECK(ld_skewness(LdDistribution::chi_square) == doctest::Approx(1.1547).epsilon(1e-4));
    CHECK(ld_skewness(LdDistribution::beta_skewed) == doctest::Approx(0.69282).epsilon(1e-4));
    CHECK_THROWS_AS(ld_ratio_validate(LdDistribution::normal, 1, xs, 10, 1), ConfigError);
    CHECK_THROWS_AS(parse_ld_distribution("cauchy"), ConfigError);
}

TEST_CASE("LdSampler draws are standardized") {
    for (LdDistribution d : {LdDistribution::normal, LdDistribution::uniform, LdDistribution::beta_skewed,
                             LdDistribution::chi_square}) {
        LdSampler s(d, 77);
        std::vector<double> v(400'000);
        for (auto& x : v) x = s();
        const auto m = moments(v);
        CHECK(std::fabs(m.mean) < 0.01);
        CHECK(std::fabs(m.var - 1.0) < 0.01);
        CHECK(std::fabs(m.skew - ld_skewness(d)) < 0.05);
    }
}

TEST_CASE("ld_ratio_validate: skewed right tail is thinned") {
    const std::vector<double> xs{0.5, 1.0, 1.5};
    const auto rows = ld_ratio_validate(LdDistribution::chi_square, 20, xs, 1'000'000, 4, 4);
    for (const auto& r : rows) CHECK(r.measured < 1.0);
    CHECK(rows[0].measured > rows[1].measured);
    CHECK(rows[1].measured > rows[2].measured);
}
