#include <cmath>
#include <string>

#include "simcal/errors.hpp"
#include "simcal/parallel.hpp"
#include "simcal/simulate.hpp"
#include "simcal/specfun.hpp"

namespace simcal::simulate {

namespace {

constexpr std::size_t kChunk = 1 << 16;

// Beta(2, 6): mean 1/4, variance 1/48.
constexpr double kBetaMean = 0.25;
const double kBetaSd = 1.0 / std::sqrt(48.0);

// Gamma(k, 1) for integer k as -log of a product of k uniforms on (0, 1].
double gamma_integer(CounterRng& rng, int k) {
    double prod = 1.0;
    for (int i = 0; i < k; ++i) prod *= 1.0 - rng.uniform();
    return -std::log(prod);
}

}  // namespace

std::string_view to_string(LdDistribution d) {
    switch (d) {
        case LdDistribution::normal: return "normal";
        case LdDistribution::uniform: return "uniform";
        case LdDistribution::beta_skewed: return "beta26";
        case LdDistribution::chi_square: return "chisq6";
    }
    return "unknown";
}

LdDistribution parse_ld_distribution(std::string_view name) {
    if (name == "normal") return LdDistribution::normal;
    if (name == "uniform") return LdDistribution::uniform;
    if (name == "beta26" || name == "beta") return LdDistribution::beta_skewed;
    if (name == "chisq6" || name == "chisq") return LdDistribution::chi_square;
    throw ConfigError("unknown distribution '" + std::string(name) +
                      "' (expected normal, uniform, beta26 or chisq6)");
}

double ld_skewness(LdDistribution d) {
    switch (d) {
        case LdDistribution::normal:
        case LdDistribution::uniform:
            return 0.0;
        case LdDistribution::beta_skewed:
            // 2 (b - a) sqrt(a + b + 1) / ((a + b + 2) sqrt(a b)) at a = 2, b = 6
            return 24.0 / (10.0 * std::sqrt(12.0));
        case LdDistribution::chi_square:
            return std::sqrt(8.0 / 6.0);
    }
    return 0.0;
}

LdSampler::LdSampler(LdDistribution dist, std::uint64_t key) : dist_(dist), rng_(key) {}

double LdSampler::operator()() {
    switch (dist_) {
        case LdDistribution::normal:
            return normal_(rng_);
        case LdDistribution::uniform:
            return std::sqrt(3.0) * (2.0 * rng_.uniform() - 1.0);
        case LdDistribution::beta_skewed: {
            const double g2 = gamma_integer(rng_, 2);
            const double g6 = gamma_integer(rng_, 6);
            return (g2 / (g2 + g6) - kBetaMean) / kBetaSd;
        }
        case LdDistribution::chi_square: {
            double s = 0.0;
            for (int k = 0; k < 6; ++k) {
                const double z = normal_(rng_);
                s += z * z;
            }
            return (s - 6.0) / std::sqrt(12.0);
        }
    }
    return 0.0;
}

std::vector<LdRatioRow> ld_ratio_validate(LdDistribution dist, std::size_t n,
                                          std::span<const double> xs, std::size_t n_mc,
                                          std::uint64_t seed, unsigned threads) {
    if (n < 2) throw ConfigError("ld_ratio_validate: sample size n must be >= 2");
    if (n_mc == 0) throw ConfigError("ld_ratio_validate: n_mc must be >= 1");
    if (xs.empty()) throw ConfigError("ld_ratio_validate: empty x grid");
    for (double x : xs) {
        if (!std::isfinite(x) || x < 0.0) throw ConfigError("ld_ratio_validate: x must be finite and >= 0");
    }

    const std::size_t chunks = (n_mc + kChunk - 1) / kChunk;
    std::vector<std::vector<std::size_t>> chunk_counts(chunks);
    const double dn = static_cast<double>(n);
    const double sqrt_n = std::sqrt(dn);

    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t begin = c * kChunk;
        const std::size_t count = std::min(kChunk, n_mc - begin);
        LdSampler draw(dist, derive_seed(seed, c));
        std::vector<double> sample(n);
        std::vector<std::size_t> exceed(xs.size(), 0);
        for (std::size_t s = 0; s < count; ++s) {
            double sum = 0.0;
            for (auto& v : sample) {
                v = draw();
                sum += v;
            }
            const double mean = sum / dn;
            double ss = 0.0;
            for (double v : sample) ss += (v - mean) * (v - mean);
            if (ss == 0.0) continue;
            const double t = sqrt_n * mean / std::sqrt(ss / dn);
            for (std::size_t k = 0; k < xs.size(); ++k) {
                if (t > xs[k]) ++exceed[k];
            }
        }
        chunk_counts[c] = std::move(exceed);
    });

    const double kappa3 = ld_skewness(dist);
    const double total = static_cast<double>(n_mc);
    std::vector<LdRatioRow> rows(xs.size());
    for (std::size_t k = 0; k < xs.size(); ++k) {
        auto& r = rows[k];
        r.x = xs[k];
        for (const auto& cc : chunk_counts) r.exceed += cc[k];
        const double tail = specfun::normal_sf(r.x);
        const double p_hat = static_cast<double>(r.exceed) / total;
        r.measured = p_hat / tail;
        r.mc_se = std::sqrt(p_hat * (1.0 - p_hat) / total) / tail;
        r.predicted = std::exp(-kappa3 * r.x * r.x * r.x / (3.0 * sqrt_n));
        r.residual = r.measured / r.predicted - 1.0;
        r.scaled_residual = r.residual * sqrt_n / ((1.0 + r.x) * (1.0 + r.x));
        r.expected_count = total * tail * r.predicted;
        r.flagged = r.expected_count < kMinExpectedTailCount;
    }
    return rows;
}

}  // namespace simcal::simulate
