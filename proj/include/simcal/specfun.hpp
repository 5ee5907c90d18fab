#pragma once

// Standard Normal and Student's t tail functions with relative accuracy far
// into the upper tail, plus their inverses.
//
// All functions are pure and may be called concurrently.

#include <cstdint>

namespace simcal::specfun {

// Quantiles are refused below this tail probability.
inline constexpr double kMinTailProbability = 1e-300;

struct DegreesOfFreedom {
    std::int64_t value;
};

// P(Z > x). Uses erfc for moderate x and the Mills-ratio continued fraction
// beyond x = 8. Results below the smallest normal double lose relative
// precision (x > ~37.5); use log_normal_sf there.
double normal_sf(double x);

// log P(Z > x), finite for every finite x.
double log_normal_sf(double x);

double normal_pdf(double x);

// x with P(Z > x) = p, for 0 < p < 1.
double normal_quantile(double p);

// P(T_df > x).
double student_t_sf(double x, DegreesOfFreedom df);

double student_t_pdf(double x, DegreesOfFreedom df);

// x with P(T_df > x) = p, for 0 < p < 1.
double student_t_quantile(double p, DegreesOfFreedom df);

}  // namespace simcal::specfun
