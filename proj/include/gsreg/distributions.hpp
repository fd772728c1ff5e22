#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "gsreg/errors.hpp"

namespace gsreg {

// ---------------------------------------------------------------------------
// Counter-based pseudo-random generator.
//
// Output i of stream s is a pure function of (seed, s, i): the generator is a
// splitmix64 whose initial state is a hash of (seed, stream). Simulations give
// replicate j its own stream, so results cannot depend on how replicates are
// scheduled across workers.
// ---------------------------------------------------------------------------
struct Rng {
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

    std::uint64_t key = 0;
    std::uint64_t counter = 0;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    Rng() = default;
    Rng(std::uint64_t seed, std::uint64_t stream)
        : key(mix(seed + kGolden) ^ mix(stream ^ 0xD6E8FEB86659FD93ull)) {}

    std::uint64_t next_u64() { return mix(key + (++counter) * kGolden); }

    // strictly inside (0, 1): 53-bit mantissa offset by half an ulp
    double next_uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }
};

// ---------------------------------------------------------------------------
// Standard normal
// ---------------------------------------------------------------------------
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2_v<double>); }

inline double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi_v<double>);
}

// Inverse normal CDF: rational initial guess (Acklam's approximation,
// |error| < 1.2e-9) polished by one Halley step, giving ~1e-15 accuracy.
inline double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0))
        throw InvalidProbability("normal_quantile requires p in (0,1), got " +
                                 std::to_string(prob));
    double x;
    const double p_low = 0.02425, p_high = 1.0 - 0.02425;
    if (prob < p_low) {
        const double q = std::sqrt(-2.0 * std::log(prob));
        x = (((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q -
                2.400758277161838e+00) * q - 2.549732539343734e+00) * q +
              4.374664141464968e+00) * q + 2.938163982698783e+00) /
            ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q +
               2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0);
    } else if (prob <= p_high) {
        const double q = prob - 0.5, r = q * q;
        x = (((((-3.969683028665376e+01 * r + 2.209460984245205e+02) * r -
                2.759285104469687e+02) * r + 1.383577518672690e+02) * r -
              3.066479806614716e+01) * r + 2.506628277459239e+00) * q /
            (((((-5.447609879822406e+01 * r + 1.615858368580409e+02) * r -
                1.556989798598866e+02) * r + 6.680131188771972e+01) * r -
              1.328068155288572e+01) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-prob));
        x = -(((((-7.784894002430293e-03 * q - 3.223964580411365e-01) * q -
                 2.400758277161838e+00) * q - 2.549732539343734e+00) * q +
               4.374664141464968e+00) * q + 2.938163982698783e+00) /
            ((((7.784695709041462e-03 * q + 3.224671290700398e-01) * q +
               2.445134137142996e+00) * q + 3.754408661907416e+00) * q + 1.0);
    }
    // one Halley refinement against the full-precision CDF
    const double e = normal_cdf(x) - prob;
    const double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

inline std::vector<double> sample_normal(Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    for (auto& v : out) v = normal_quantile(rng.next_uniform());
    return out;
}

// ---------------------------------------------------------------------------
// Regularized incomplete beta I_x(a, b), by Lentz's continued fraction.
// ---------------------------------------------------------------------------
namespace detail {

inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16, kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace detail

inline double inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::betacf(a, b, x) / a;
    return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// ---------------------------------------------------------------------------
// Central Student t
// ---------------------------------------------------------------------------
inline void check_df(int df) {
    if (df < 1) throw InvalidDf("degrees of freedom must be >= 1, got " + std::to_string(df));
}

inline double t_cdf(double x, int df) {
    check_df(df);
    if (x == 0.0) return 0.5;
    const double nu = static_cast<double>(df);
    const double z = nu / (nu + x * x);
    const double tail = 0.5 * inc_beta(0.5 * nu, 0.5, z); // P(T > |x|)
    return x > 0.0 ? 1.0 - tail : tail;
}

inline double t_sf(double x, int df) { return t_cdf(-x, df); }

inline double t_pdf(double x, int df) {
    const double nu = static_cast<double>(df);
    const double lognc = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                         0.5 * std::log(nu * std::numbers::pi_v<double>);
    return std::exp(lognc - 0.5 * (nu + 1.0) * std::log1p(x * x / nu));
}

// Inverse of t_cdf to |t_cdf(x) - p| < 1e-10: bracketed Newton with bisection
// fallback. Symmetric around the median by construction.
inline double t_quantile(double prob, int df) {
    check_df(df);
    if (!(prob > 0.0 && prob < 1.0))
        throw InvalidProbability("t_quantile requires p in (0,1), got " + std::to_string(prob));
    if (prob == 0.5) return 0.0;
    if (prob < 0.5) return -t_quantile(1.0 - prob, df);

    // initial guess: normal quantile, inflated toward t tails
    double x = normal_quantile(prob);
    if (df <= 2) x = std::tan(std::numbers::pi_v<double> * (prob - 0.5)); // exact for df=1
    double lo = 0.0, hi = std::max(1.0, 4.0 * std::abs(x) + 10.0);
    while (t_cdf(hi, df) < prob) hi *= 2.0;
    x = std::min(std::max(x, lo), hi);
    for (int it = 0; it < 200; ++it) {
        const double err = t_cdf(x, df) - prob;
        if (std::abs(err) < 1e-12) break;
        (err > 0.0 ? hi : lo) = x;
        const double step = err / std::max(t_pdf(x, df), 1e-300);
        double next = x - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Noncentral Student t survival function, P(T' > x) for noncentrality delta.
//
// Forward series of incomplete-beta terms (Lenth's algorithm): for x >= 0,
//   P(T' <= x) = Phi(-delta)
//     + 1/2 * sum_j [ p_j I_z(j + 1/2, nu/2) + q_j I_z(j + 1, nu/2) ],
// with z = x^2/(x^2 + nu), Poisson-type weights p_j, q_j in lambda = delta^2/2.
// Negative x uses the reflection P(T' <= x; delta) = P(T' > -x; -delta).
// ---------------------------------------------------------------------------
namespace detail {

inline double nct_cdf_nonneg(double x, double nu, double delta) {
    // x >= 0 here
    const double lambda = 0.5 * delta * delta;
    const double z = (x == 0.0) ? 0.0 : x * x / (x * x + nu);
    if (z <= 0.0) return normal_cdf(-delta);

    constexpr int kMaxTerms = 2000;
    constexpr double kTermEps = 1e-16;

    // log-space Poisson-ish weights:
    //   p_j = exp(-lambda) lambda^j / j!
    //   q_j = exp(-lambda) lambda^j delta / (sqrt(2) Gamma(j + 3/2))
    const double log_lambda = (lambda > 0.0) ? std::log(lambda) : -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (int j = 0; j < kMaxTerms; ++j) {
        const double lp = -lambda + j * log_lambda - std::lgamma(j + 1.0);
        const double pj = std::exp(lp);
        const double qj = (delta == 0.0)
                              ? 0.0
                              : std::copysign(std::exp(-lambda + j * log_lambda +
                                                       std::log(std::abs(delta)) -
                                                       0.5 * std::numbers::ln2_v<double> -
                                                       std::lgamma(j + 1.5)),
                                              delta);
        const double ib_p = inc_beta(j + 0.5, 0.5 * nu, z);
        const double ib_q = inc_beta(j + 1.0, 0.5 * nu, z);
        const double term = pj * ib_p + qj * ib_q;
        sum += term;
        if (j >= lambda && std::abs(term) < kTermEps) break;
    }
    return std::min(1.0, std::max(0.0, normal_cdf(-delta) + 0.5 * sum));
}

} // namespace detail

inline double noncentral_t_cdf(double x, int df, double delta) {
    check_df(df);
    const double nu = static_cast<double>(df);
    if (delta == 0.0) return t_cdf(x, df);
    if (x >= 0.0) return detail::nct_cdf_nonneg(x, nu, delta);
    return 1.0 - detail::nct_cdf_nonneg(-x, nu, -delta);
}

inline double noncentral_t_sf(double x, int df, double delta) {
    return 1.0 - noncentral_t_cdf(x, df, delta);
}

} // namespace gsreg
