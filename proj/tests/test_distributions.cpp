#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "gsreg/distributions.hpp"

using namespace gsreg;

namespace {

// Composite Simpson integration of f over [a, b].
template <class F>
double simpson(F f, double a, double b, int intervals) {
    if (intervals % 2 != 0) ++intervals;
    const double h = (b - a) / intervals;
    double acc = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

// Student-t density written out from scratch so the oracle shares no code
// with the implementation under test.
double t_density_oracle(double x, double nu) {
    const double c =
        std::exp(std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu)) /
        std::sqrt(nu * std::numbers::pi);
    return c * std::pow(1.0 + x * x / nu, -0.5 * (nu + 1.0));
}

double t_cdf_oracle(double x, double nu) {
    // symmetry pins the median, so integrating out from 0 avoids any
    // truncated-tail error
    const double half =
        simpson([nu](double u) { return t_density_oracle(u, nu); }, 0.0, std::abs(x), 200000);
    return x >= 0.0 ? 0.5 + half : 0.5 - half;
}

double chi2_log_density(double w, double nu) {
    return (0.5 * nu - 1.0) * std::log(w) - 0.5 * w - 0.5 * nu * std::numbers::ln2 -
           std::lgamma(0.5 * nu);
}

double phi_oracle(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// P(T' <= x) for noncentral t by integrating over the chi-square mixing
// variable: T' = (Z + delta) / sqrt(W / nu) with W ~ chi2_nu, so
// P(T' <= x | W = w) = Phi(x sqrt(w / nu) - delta).
double nct_cdf_oracle(double x, double nu, double delta) {
    const double hi = nu + 40.0 * std::sqrt(2.0 * nu) + 60.0;
    auto f = [&](double w) {
        if (w <= 0.0) return 0.0;
        return std::exp(chi2_log_density(w, nu)) * phi_oracle(x * std::sqrt(w / nu) - delta);
    };
    return simpson(f, 1e-12, hi, 400000);
}

} // namespace

TEST_CASE("normal cdf/quantile round trip and reference values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    // classic two-sided 5% critical value
    CHECK(std::abs(normal_quantile(0.975) - 1.959963984540054) < 1e-9);
    CHECK(std::abs(normal_quantile(0.5)) < 1e-14);
    for (double p : {1e-10, 1e-4, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0 - 1e-7}) {
        const double x = normal_quantile(p);
        CHECK(std::abs(normal_cdf(x) - p) < 1e-13);
    }
    CHECK_THROWS_AS(normal_quantile(0.0), InvalidProbability);
    CHECK_THROWS_AS(normal_quantile(1.0), InvalidProbability);
}

TEST_CASE("t cdf matches closed forms at df = 1 and df = 2") {
    for (double x : {-7.0, -2.5, -0.3, 0.0, 0.4, 1.0, 3.0, 11.0}) {
        const double f1 = 0.5 + std::atan(x) / std::numbers::pi;
        CHECK(std::abs(t_cdf(x, 1) - f1) < 1e-13);
        const double f2 = 0.5 * (1.0 + x / std::sqrt(2.0 + x * x));
        CHECK(std::abs(t_cdf(x, 2) - f2) < 1e-13);
    }
}

TEST_CASE("t cdf matches quadrature oracle at moderate df") {
    CHECK(std::abs(t_cdf(2.0, 10) - t_cdf_oracle(2.0, 10.0)) < 1e-9);
    CHECK(std::abs(t_cdf(-1.3, 5) - t_cdf_oracle(-1.3, 5.0)) < 1e-9);
    CHECK(std::abs(t_cdf(0.7, 45) - t_cdf_oracle(0.7, 45.0)) < 1e-9);
    // standard table entry
    CHECK(t_cdf(2.0, 10) == doctest::Approx(0.9633059826146298).epsilon(1e-12));
}

TEST_CASE("t quantile closed forms and round trips") {
    // df = 1: quantile is tan(pi (p - 1/2))
    CHECK(std::abs(t_quantile(0.95, 1) - 6.313751514675043) < 1e-9);
    CHECK(std::abs(t_quantile(0.95, 1) - std::tan(std::numbers::pi * 0.45)) < 1e-9);
    // df = 2: x = u sqrt(2) / sqrt(1 - u^2) with u = 2p - 1
    {
        const double u = 2.0 * 0.9 - 1.0;
        const double expected = u * std::sqrt(2.0) / std::sqrt(1.0 - u * u);
        CHECK(std::abs(t_quantile(0.9, 2) - expected) < 1e-10);
    }
    for (int df : {1, 3, 8, 33, 200}) {
        for (double p : {0.003, 0.1, 0.5, 0.62, 0.95, 0.9994}) {
            CHECK(std::abs(t_cdf(t_quantile(p, df), df) - p) < 1e-10);
        }
    }
    CHECK(std::abs(t_quantile(0.5, 7)) < 1e-12);
    CHECK_THROWS_AS(t_quantile(0.2, 0), InvalidDf);
    CHECK_THROWS_AS(t_quantile(0.0, 5), InvalidProbability);
}

TEST_CASE("t distribution tail symmetry") {
    for (int df : {2, 9, 60}) {
        for (double x : {0.1, 1.7, 4.2}) {
            CHECK(std::abs(t_cdf(-x, df) - (1.0 - t_cdf(x, df))) < 1e-14);
            CHECK(std::abs(t_sf(x, df) - (1.0 - t_cdf(x, df))) < 1e-14);
        }
    }
}

TEST_CASE("noncentral t cdf matches mixing-integral oracle") {
    struct Case {
        double x, nu, delta;
    };
    const Case cases[] = {
        {1.0, 10, 2.0}, {3.0, 5, 1.5}, {-1.0, 7, 2.5}, {2.0, 45, 2.2},
        {0.0, 12, 0.7}, {5.5, 30, 4.0}, {1.2, 4, -1.1},
    };
    for (const auto& c : cases) {
        const double got = noncentral_t_cdf(c.x, static_cast<int>(c.nu), c.delta);
        const double want = nct_cdf_oracle(c.x, c.nu, c.delta);
        CHECK(std::abs(got - want) < 1e-8);
    }
}

TEST_CASE("noncentral t reduces to central t at delta = 0") {
    for (int df : {1, 6, 50}) {
        for (double x : {-2.0, 0.0, 0.9, 3.3}) {
            CHECK(std::abs(noncentral_t_cdf(x, df, 0.0) - t_cdf(x, df)) < 1e-12);
        }
    }
}

TEST_CASE("noncentral t survival is monotone in the noncentrality") {
    const double x = t_quantile(0.95, 20);
    double prev = 0.0;
    for (double d : {0.0, 0.5, 1.0, 2.0, 3.0, 5.0}) {
        const double pw = noncentral_t_sf(x, 20, d);
        CHECK(pw >= prev);
        prev = pw;
    }
    CHECK(std::abs(noncentral_t_sf(x, 20, 0.0) - 0.05) < 1e-10);
}

TEST_CASE("counter rng: determinism, stream separation, uniformity") {
    Rng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool same = true, diff_stream = false, diff_seed = false;
    for (int i = 0; i < 1000; ++i) {
        const auto va = a.next_u64();
        same = same && (va == b.next_u64());
        diff_stream = diff_stream || (va != c.next_u64());
        diff_seed = diff_seed || (va != d.next_u64());
    }
    CHECK(same);
    CHECK(diff_stream);
    CHECK(diff_seed);

    Rng r(123, 0);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0, lo = 1.0, hi = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = r.next_uniform();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
        sum += u;
        sumsq += u * u;
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean - 0.5) < 4.0 / std::sqrt(12.0 * n));
    CHECK(std::abs(var - 1.0 / 12.0) < 0.002);
    CHECK(lo < 0.001);
    CHECK(hi > 0.999);
}

TEST_CASE("normal sampling moments") {
    Rng r(2024, 5);
    const auto z = sample_normal(r, 200000);
    double sum = 0.0, sumsq = 0.0;
    for (double v : z) {
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / static_cast<double>(z.size());
    const double var = sumsq / static_cast<double>(z.size()) - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}
