#pragma once

// Reference implementations used only by the tests. They share no code with
// the library: long-double Gauss-Legendre quadrature for the Normal tail and
// the classical finite trigonometric sums for Student's t with integer df.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace oracle {

using real = long double;

inline constexpr int kNodes = 20;

struct GaussLegendre {
    std::array<real, kNodes> x{};
    std::array<real, kNodes> w{};

    GaussLegendre() {
        const real pi = std::numbers::pi_v<real>;
        for (int i = 0; i < kNodes; ++i) {
            real z = std::cos(pi * (i + 0.75L) / (kNodes + 0.5L));
            real dp = 0.0L;
            for (int it = 0; it < 100; ++it) {
                real p0 = 1.0L;
                real p1 = z;
                for (int k = 2; k <= kNodes; ++k) {
                    const real p2 = ((2.0L * k - 1.0L) * z * p1 - (k - 1.0L) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = kNodes * (z * p1 - p0) / (z * z - 1.0L);
                const real dz = p1 / dp;
                z -= dz;
                if (std::fabs(dz) < 1e-21L) break;
            }
            x[i] = z;
            w[i] = 2.0L / ((1.0L - z * z) * dp * dp);
        }
    }
};

inline const GaussLegendre& rule() {
    static const GaussLegendre gl;
    return gl;
}

template <class F>
real integrate(F&& f, real a, real b) {
    const auto& gl = rule();
    const real mid = 0.5L * (a + b);
    const real half = 0.5L * (b - a);
    real s = 0.0L;
    for (int i = 0; i < kNodes; ++i) s += gl.w[i] * f(mid + half * gl.x[i]);
    return s * half;
}

// P(Z > x) = phi(x) * int_0^inf exp(-x u - u^2 / 2) du, integrated panel by
// panel until the integrand is negligible.
inline real normal_sf(real x) {
    if (x < 0.0L) return 1.0L - normal_sf(-x);
    const real h = 0.5L / (1.0L + x);
    real total = 0.0L;
    const auto g = [x](real u) { return std::exp(-x * u - 0.5L * u * u); };
    for (real a = 0.0L;; a += h) {
        total += integrate(g, a, a + h);
        if (x * (a + h) + 0.5L * (a + h) * (a + h) > 80.0L) break;
    }
    const real phi = std::exp(-0.5L * x * x) / std::sqrt(2.0L * std::numbers::pi_v<real>);
    return phi * total;
}

// P(T_nu > x) for integer nu >= 1 via theta = atan(x / sqrt(nu)). The
// two-sided tail 1 - A is evaluated as a positive series in cos^2(theta) when
// A is close to 1, so deep tails keep full relative accuracy.
inline real student_sf(real x, int nu) {
    if (x < 0.0L) return 1.0L - student_sf(-x, nu);
    const real pi = std::numbers::pi_v<real>;
    const real theta = std::atan(x / std::sqrt(static_cast<real>(nu)));
    const real s = std::sin(theta);
    const real c = std::cos(theta);
    const real c2 = c * c;

    real a = 0.0L;  // P(|T| <= x)
    if (nu % 2 == 0) {
        real term = 1.0L;
        real sum = 1.0L;
        for (int k = 1; k <= nu / 2 - 1; ++k) {
            term *= (2.0L * k - 1.0L) / (2.0L * k) * c2;
            sum += term;
        }
        a = s * sum;
    } else {
        real sum = 0.0L;
        if (nu > 1) {
            real term = c;
            sum = c;
            for (int k = 1; k <= (nu - 3) / 2; ++k) {
                term *= (2.0L * k) / (2.0L * k + 1.0L) * c2;
                sum += term;
            }
        }
        a = 2.0L / pi * (theta + s * sum);
    }
    if (a < 0.9L) return 0.5L * (1.0L - a);

    // Tail of the same series from the first omitted index onwards.
    real tail = 0.0L;
    if (nu % 2 == 0) {
        real term = 1.0L;
        for (int k = 1; k <= nu / 2; ++k) term *= (2.0L * k - 1.0L) / (2.0L * k) * c2;
        for (int k = nu / 2; k < 100'000'000; ++k) {
            tail += term;
            term *= (2.0L * k + 1.0L) / (2.0L * k + 2.0L) * c2;
            if (term < 1e-24L * tail) break;
        }
        tail *= s;
    } else {
        real term = c;
        for (int k = 1; k <= (nu - 1) / 2; ++k) term *= (2.0L * k) / (2.0L * k + 1.0L) * c2;
        for (int k = (nu - 1) / 2; k < 100'000'000; ++k) {
            tail += term;
            term *= (2.0L * k + 2.0L) / (2.0L * k + 3.0L) * c2;
            if (term < 1e-24L * tail) break;
        }
        tail *= 2.0L / pi * s;
    }
    return 0.5L * tail;
}

// Root of sf(x) = p by bisection on [lo, hi], sf decreasing.
template <class Sf>
real invert(Sf&& sf, real p, real lo, real hi) {
    for (int i = 0; i < 200; ++i) {
        const real mid = 0.5L * (lo + hi);
        if (sf(mid) > p) lo = mid; else hi = mid;
    }
    return 0.5L * (lo + hi);
}

// P(Poisson(beta) >= k) as the upper sum, which has no cancellation.
inline real poisson_upper(real beta, std::size_t k) {
    if (beta == 0.0L) return k == 0 ? 1.0L : 0.0L;
    real term = std::exp(-beta);
    for (std::size_t j = 1; j <= k; ++j) term *= beta / static_cast<real>(j);
    // term is now P(X = k)
    real sum = 0.0L;
    for (std::size_t j = k; j < k + 10'000; ++j) {
        sum += term;
        term *= beta / static_cast<real>(j + 1);
        if (term < 1e-25L * sum) break;
    }
    return sum;
}

// Bonferroni by definition: every index with p_i <= q / N.
inline std::vector<std::size_t> bonferroni(const std::vector<double>& p, double q) {
    std::vector<std::size_t> out;
    const double thr = q / static_cast<double>(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= thr) out.push_back(i);
    }
    return out;
}

// Step-up rule without sorting: k* is the largest k for which at least k
// p-values are <= k q / N, and the rejections are exactly those p-values.
// Tries every k, so it is quadratic but has no tie-breaking subtleties.
inline std::vector<std::size_t> step_up(const std::vector<double>& p, double q) {
    const std::size_t n = p.size();
    const double dn = static_cast<double>(n);
    std::size_t best = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double thr = static_cast<double>(k) * q / dn;
        std::size_t below = 0;
        for (double v : p) below += v <= thr ? 1 : 0;
        if (below >= k) best = k;
    }
    std::vector<std::size_t> out;
    if (best == 0) return out;
    const double thr = static_cast<double>(best) * q / dn;
    for (std::size_t i = 0; i < n; ++i) {
        if (p[i] <= thr) out.push_back(i);
    }
    return out;
}

}  // namespace oracle
