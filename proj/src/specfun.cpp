#include "simcal/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/beta.hpp>

#include "simcal/errors.hpp"

namespace simcal::specfun {

namespace {

constexpr double kLogSqrtTwoPi = 0.91893853320467274178;  // log(sqrt(2*pi))
constexpr double kContinuedFractionCutoff = 8.0;

void require_finite(double x, const char* fn) {
    if (!std::isfinite(x)) {
        throw DomainError(std::string(fn) + ": argument must be finite");
    }
}

void require_df(DegreesOfFreedom df, const char* fn) {
    if (df.value < 1) {
        throw DomainError(std::string(fn) + ": degrees of freedom must be >= 1, got " +
                          std::to_string(df.value));
    }
}

void require_open_probability(double p, const char* fn) {
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError(std::string(fn) + ": probability must lie in (0, 1)");
    }
    if (p < kMinTailProbability) {
        throw RangeError(std::string(fn) + ": tail probability below 1e-300 is not representable");
    }
}

// Mills ratio (1 - Phi(x)) / phi(x) by the classical continued fraction
//   R(x) = 1/(x + 1/(x + 2/(x + 3/(x + ...)))),
// evaluated with the modified Lentz algorithm. Converges quickly for x > 8.
double mills_ratio(double x) {
    constexpr double tiny = 1e-300;
    constexpr double eps = 1e-16;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int k = 1; k < 500; ++k) {
        d = x + k * d;
        if (d == 0.0) d = tiny;
        c = x + k / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return 1.0 / f;
}

// Solves sf(x) = p for x >= 0 given p < 0.5. Newton iteration on
// log sf(x) - log p, kept inside a shrinking bracket; falls back to
// bisection (geometric once the bracket spans decades) when a step escapes.
template <class LogSf, class Pdf>
double solve_upper_tail(double p, LogSf log_sf, Pdf pdf) {
    const double target = std::log(p);
    double lo = 0.0;
    double hi = 1.0;
    while (log_sf(hi) > target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) {
            throw RangeError("quantile: root exceeds representable range");
        }
    }

    double x = hi;
    for (int iter = 0; iter < 400; ++iter) {
        const double lsf = log_sf(x);
        const double g = lsf - target;
        if (std::abs(g) <= 1e-15) return x;
        if (g > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * hi) break;

        double next = std::numeric_limits<double>::quiet_NaN();
        const double density = pdf(x);
        if (std::isfinite(lsf) && density > 0.0) {
            // d/dx log sf = -pdf/sf
            next = x + g * std::exp(lsf) / density;
        }
        if (!(next > lo && next < hi)) {
            next = (lo > 0.0 && hi / lo > 4.0) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
        }
        x = next;
    }
    return x;
}

}  // namespace

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x - kLogSqrtTwoPi);
}

double normal_sf(double x) {
    require_finite(x, "normal_sf");
    if (x > kContinuedFractionCutoff) {
        return normal_pdf(x) * mills_ratio(x);
    }
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double log_normal_sf(double x) {
    require_finite(x, "log_normal_sf");
    if (x > kContinuedFractionCutoff) {
        return -0.5 * x * x - kLogSqrtTwoPi + std::log(mills_ratio(x));
    }
    if (x < -kContinuedFractionCutoff) {
        return std::log1p(-normal_sf(-x));
    }
    return std::log(normal_sf(x));
}

double normal_quantile(double p) {
    if (std::isnan(p)) throw DomainError("normal_quantile: probability is NaN");
    require_open_probability(p, "normal_quantile");
    if (p == 0.5) return 0.0;
    if (p > 0.5) return -normal_quantile(1.0 - p);
    return solve_upper_tail(p, [](double x) { return log_normal_sf(x); },
                            [](double x) { return normal_pdf(x); });
}

double student_t_sf(double x, DegreesOfFreedom df) {
    require_finite(x, "student_t_sf");
    require_df(df, "student_t_sf");
    if (x == 0.0) return 0.5;

    // With z = x^2/(nu + x^2), P(|T| > |x|) = I_{1-z}(nu/2, 1/2) = 1 - I_z(1/2, nu/2).
    // Whichever of z, 1-z is small is formed directly, so neither branch
    // subtracts from 1.
    // Cauchy: closed form, and x^2 would overflow long before the tail does.
    if (df.value == 1) {
        const double upper = std::atan2(1.0, std::fabs(x)) / std::numbers::pi;
        return x > 0.0 ? upper : 1.0 - upper;
    }
    const double nu = static_cast<double>(df.value);
    const double x2 = x * x;
    double two_sided;
    if (x2 < nu) {
        two_sided = boost::math::ibetac(0.5, 0.5 * nu, x2 / (nu + x2));
    } else {
        const double r = std::sqrt(nu) / std::fabs(x);
        two_sided = boost::math::ibeta(0.5 * nu, 0.5, r * r / (1.0 + r * r));
    }
    const double upper = 0.5 * two_sided;
    return x > 0.0 ? upper : 1.0 - upper;
}

double student_t_pdf(double x, DegreesOfFreedom df) {
    require_df(df, "student_t_pdf");
    const double nu = static_cast<double>(df.value);
    const double log_norm = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                            0.5 * std::log(nu * std::numbers::pi);
    return std::exp(log_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

double student_t_quantile(double p, DegreesOfFreedom df) {
    require_df(df, "student_t_quantile");
    if (std::isnan(p)) throw DomainError("student_t_quantile: probability is NaN");
    require_open_probability(p, "student_t_quantile");
    if (p == 0.5) return 0.0;
    if (p > 0.5) return -student_t_quantile(1.0 - p, df);
    return solve_upper_tail(
        p, [df](double x) { return std::log(student_t_sf(x, df)); },
        [df](double x) { return student_t_pdf(x, df); });
}

}  // namespace simcal::specfun
