#pragma once

// Null distributions pooled across all N tests: the empirical distribution of
// the observed t statistics, and the average of the per-row bootstrap
// distributions of T*.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "simcal/calibrate.hpp"
#include "simcal/rowstats.hpp"

namespace simcal::aggregate {

enum class CdfKind { empirical, bootstrap_average };

// Right-continuous step function built from M pooled values, each of weight 1/M.
class AggregatedCdf {
public:
    AggregatedCdf(CdfKind kind, std::vector<double> values);

    CdfKind kind() const noexcept { return kind_; }
    // Distinct values, strictly increasing.
    const std::vector<double>& support() const noexcept { return support_; }
    // F at each support point.
    std::vector<double> cdf_values() const;
    // Number of pooled values M (>= support().size()).
    std::size_t sample_size() const noexcept { return total_; }

    double operator()(double x) const;
    std::size_t count_at_most(double x) const;
    std::size_t count_at_least(double x) const;

private:
    CdfKind kind_;
    std::vector<double> support_;
    std::vector<std::size_t> cumulative_;  // #{values <= support_[k]}
    std::size_t total_ = 0;
};

// F_N(x) = N^{-1} sum_i I(T_i <= x) over nondegenerate rows.
AggregatedCdf empirical_null_cdf(const rowstats::TestBattery& battery);

// F*_N(x) = N^{-1} sum_i P(T*_i <= x | Y_i), realized by pooling the N*B
// bootstrap values. Row i draws from stream i; constant rows are skipped.
AggregatedCdf aggregated_bootstrap_cdf(const DataMatrix& data,
                                       const calibrate::BootstrapConfig& cfg,
                                       unsigned threads = 1);

// Pools precomputed per-row bootstrap samples. All samples must have the
// same size so each row carries equal weight.
AggregatedCdf pool_bootstrap_samples(std::span<const std::vector<double>> samples);

// Two-sided (1 + #{T >= |t|} + #{T <= -|t|}) / (M + 1), capped at 1.
// No symmetrization of the pooled distribution is applied.
double p_value_aggregated(double t, const AggregatedCdf& cdf);

// Streaming form of p_value_aggregated for a fixed set of observed
// statistics: bootstrap samples are folded in one at a time, so the N*B
// pooled values are never held in memory. Results are identical to
// p_value_aggregated on the pooled AggregatedCdf.
class PooledTailCounter {
public:
    explicit PooledTailCounter(std::span<const double> observed);

    void add_sample(std::span<const double> sample);
    std::size_t sample_size() const noexcept { return total_; }
    // (1 + tail count) / (M + 1), capped at 1, in the order of `observed`.
    std::vector<double> p_values() const;

private:
    std::vector<double> sorted_abs_;
    std::vector<std::size_t> rank_of_;     // observed index -> position in sorted_abs_
    std::vector<std::int64_t> increments_;  // difference array over sorted_abs_
    std::size_t total_ = 0;
};

// p-values for statistics that are themselves members of the pooled sample
// (the empirical null): the observed value already counts once, so
//   p = (#{T >= |t|} + #{T <= -|t|}) / M, capped at 1.
// Throws DomainError if some t is not a support point.
std::vector<double> in_sample_p_values(const AggregatedCdf& cdf, std::span<const double> t);

}  // namespace simcal::aggregate
