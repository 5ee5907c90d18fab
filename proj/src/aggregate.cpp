#include "simcal/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "simcal/errors.hpp"
#include "simcal/parallel.hpp"

namespace simcal::aggregate {

AggregatedCdf::AggregatedCdf(CdfKind kind, std::vector<double> values) : kind_(kind) {
    if (values.empty()) throw DomainError("AggregatedCdf: no values to aggregate");
    for (double v : values) {
        if (std::isnan(v)) throw DomainError("AggregatedCdf: NaN value");
    }
    std::sort(values.begin(), values.end());
    total_ = values.size();
    support_.reserve(values.size());
    cumulative_.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i + 1 < values.size() && values[i + 1] == values[i]) continue;
        support_.push_back(values[i]);
        cumulative_.push_back(i + 1);
    }
}

std::vector<double> AggregatedCdf::cdf_values() const {
    std::vector<double> out(cumulative_.size());
    const double m = static_cast<double>(total_);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = static_cast<double>(cumulative_[k]) / m;
    return out;
}

std::size_t AggregatedCdf::count_at_most(double x) const {
    const auto it = std::upper_bound(support_.begin(), support_.end(), x);
    if (it == support_.begin()) return 0;
    return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

std::size_t AggregatedCdf::count_at_least(double x) const {
    const auto it = std::lower_bound(support_.begin(), support_.end(), x);
    if (it == support_.begin()) return total_;
    return total_ - cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double AggregatedCdf::operator()(double x) const {
    return static_cast<double>(count_at_most(x)) / static_cast<double>(total_);
}

AggregatedCdf empirical_null_cdf(const rowstats::TestBattery& battery) {
    auto t = battery.t_values();
    if (t.empty()) throw DomainError("empirical_null_cdf: battery has no nondegenerate rows");
    return AggregatedCdf(CdfKind::empirical, std::move(t));
}

AggregatedCdf pool_bootstrap_samples(std::span<const std::vector<double>> samples) {
    if (samples.empty()) throw DomainError("pool_bootstrap_samples: no samples");
    const std::size_t b = samples.front().size();
    std::vector<double> pooled;
    pooled.reserve(samples.size() * b);
    for (const auto& s : samples) {
        if (s.size() != b) {
            throw ShapeError("pool_bootstrap_samples: samples differ in size (" +
                             std::to_string(s.size()) + " vs " + std::to_string(b) + ")");
        }
        pooled.insert(pooled.end(), s.begin(), s.end());
    }
    return AggregatedCdf(CdfKind::bootstrap_average, std::move(pooled));
}

AggregatedCdf aggregated_bootstrap_cdf(const DataMatrix& data,
                                       const calibrate::BootstrapConfig& cfg,
                                       unsigned threads) {
    cfg.validate();
    if (data.rows() == 0) throw DomainError("aggregated_bootstrap_cdf: empty matrix");
    std::vector<std::vector<double>> samples(data.rows());
    parallel_for(data.rows(), threads, [&](std::size_t i) {
        const auto row = data.row(i);
        rowstats::validate_row(row);
        if (rowstats::is_degenerate(row)) return;
        samples[i] = calibrate::bootstrap_tstat_sample(row, cfg, i);
    });
    std::erase_if(samples, [](const auto& s) { return s.empty(); });
    if (samples.empty()) throw DomainError("aggregated_bootstrap_cdf: every row is constant");
    return pool_bootstrap_samples(samples);
}

double p_value_aggregated(double t, const AggregatedCdf& cdf) {
    const double at = std::abs(t);
    const std::size_t tail = cdf.count_at_least(at) + cdf.count_at_most(-at);
    const double p = static_cast<double>(tail + 1) / static_cast<double>(cdf.sample_size() + 1);
    return std::min(1.0, p);
}

PooledTailCounter::PooledTailCounter(std::span<const double> observed)
    : rank_of_(observed.size()), increments_(observed.size() + 1, 0) {
    std::vector<std::size_t> order(observed.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(observed[a]) < std::abs(observed[b]);
    });
    sorted_abs_.resize(observed.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        sorted_abs_[k] = std::abs(observed[order[k]]);
        rank_of_[order[k]] = k;
    }
}

void PooledTailCounter::add_sample(std::span<const double> sample) {
    for (double v : sample) {
        // v lies in the two-sided tail of every observed a <= |v|; v == 0
        // sits in both tails of a == 0.
        const auto pos = static_cast<std::size_t>(
            std::upper_bound(sorted_abs_.begin(), sorted_abs_.end(), std::abs(v)) -
            sorted_abs_.begin());
        const std::int64_t weight = v == 0.0 ? 2 : 1;
        increments_[0] += weight;
        increments_[pos] -= weight;
    }
    total_ += sample.size();
}

std::vector<double> PooledTailCounter::p_values() const {
    std::vector<std::int64_t> tail(sorted_abs_.size());
    std::int64_t running = 0;
    for (std::size_t k = 0; k < tail.size(); ++k) {
        running += increments_[k];
        tail[k] = running;
    }
    std::vector<double> p(rank_of_.size());
    const double denom = static_cast<double>(total_ + 1);
    for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = std::min(1.0, static_cast<double>(tail[rank_of_[i]] + 1) / denom);
    }
    return p;
}

std::vector<double> in_sample_p_values(const AggregatedCdf& cdf, std::span<const double> t) {
    const auto& support = cdf.support();
    const double m = static_cast<double>(cdf.sample_size());
    std::vector<double> p(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!std::binary_search(support.begin(), support.end(), t[i])) {
            throw DomainError("in_sample_p_values: statistic is not part of the pooled sample");
        }
        const double at = std::abs(t[i]);
        const std::size_t tail = cdf.count_at_least(at) + cdf.count_at_most(-at);
        p[i] = std::min(1.0, static_cast<double>(tail) / m);
    }
    return p;
}

}  // namespace simcal::aggregate
