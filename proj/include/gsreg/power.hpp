#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "gsreg/core_linalg.hpp"
#include "gsreg/diagnostics.hpp"
#include "gsreg/distributions.hpp"
#include "gsreg/errors.hpp"
#include "gsreg/regression.hpp"

namespace gsreg {

struct ModelSet {
    bool naive = true;
    bool gs = true;
    bool ridge = true;
};

struct PowerScenario {
    double rho = 0.5;
    double sigma = 1.0;
    int p = 5;
    int n = 200;
    int replicates = 1000;
    double level = 0.05;
    std::uint64_t seed = 0;
    ModelSet models;
    bool null_mode = false;          // drop variable 1 from the generator mean
    std::uint64_t stream_base = 0;   // offset for replicate substreams

    void validate() const {
        if (!(rho > -1.0 && rho < 1.0)) throw InvalidScenario("rho must lie in (-1, 1)");
        if (!(sigma > 0.0)) throw InvalidScenario("sigma must be positive");
        if (p < 2) throw InvalidScenario("p must be >= 2");
        if (n <= p) throw InvalidScenario("n must exceed p");
        if (replicates < 1) throw InvalidScenario("replicates must be >= 1");
        if (!(level > 0.0 && level < 1.0)) throw InvalidScenario("level must lie in (0, 1)");
    }
};

struct ModelPower {
    ModelKind model;
    double empirical_power = 0.0;
    double mc_se = 0.0;
};

struct PowerResult {
    std::vector<ModelPower> per_model;
    double mean_delta_hat = 0.0;
    double mean_vif = 0.0;
    int discarded = 0;

    const ModelPower* find(ModelKind k) const {
        for (const auto& m : per_model)
            if (m.model == k) return &m;
        return nullptr;
    }
};

// Simulation draw: M_1 = Z_1, M_i = rho Z_1 + Z_i (i >= 2), and
// y = (1/p) sum_i M_i + sigma * eps, all Z and eps i.i.d. standard normal.
// The returned design is centered and scaled; y is centered. In null mode
// variable 1 is removed from the mean of y, so its coefficient is zero.
inline std::pair<DesignMatrix, VectorX<double>> generate_scenario(double rho, double sigma,
                                                                  int p, int n, Rng& rng,
                                                                  bool null_mode = false) {
    MatrixX<double> m(n, p);
    for (int j = 0; j < p; ++j)
        for (int i = 0; i < n; ++i) m(i, j) = normal_quantile(rng.next_uniform());
    for (int j = 1; j < p; ++j) m.col(j) += rho * m.col(0);

    VectorX<double> y(n);
    const double w = 1.0 / static_cast<double>(p);
    for (int i = 0; i < n; ++i) {
        double mu = 0.0;
        for (int j = null_mode ? 1 : 0; j < p; ++j) mu += w * m(i, j);
        y[i] = mu + sigma * normal_quantile(rng.next_uniform());
    }

    DesignMatrix design = preprocess(make_design(std::move(m)), /*center=*/true, /*scale=*/true);
    return {std::move(design), center_response(y)};
}

namespace detail {

struct ReplicateOutcome {
    bool rejected[3] = {false, false, false}; // naive, gs, ridge
    double delta_num = 0.0;                   // beta_hat_1 * ||q_1||
    double delta_den = 0.0;                   // alpha_hat_1
    double vif1 = 0.0;
    bool failed = false;
};

// One replicate: a single orthonormal factorization drives the naive and GS
// tests (and the auto ridge constant); the ridge test solves its own system.
inline ReplicateOutcome run_replicate(const PowerScenario& sc, double tcrit,
                                      std::uint64_t stream) {
    ReplicateOutcome out;
    try {
        Rng rng(sc.seed, stream);
        auto [design, y] = generate_scenario(sc.rho, sc.sigma, sc.p, sc.n, rng, sc.null_mode);
        const auto fit = gs_fit(design, y);
        const auto& decomp = *fit.decomp;
        const double s = std::sqrt(fit.sigma_hat2);
        const double q1_norm = decomp.q_rows.row(0).norm();

        if (sc.models.gs) out.rejected[1] = fit.t_stat[0] > tcrit;
        if (sc.models.naive) {
            const double t_naive = (*fit.alpha_hat)[0] / (s * q1_norm);
            out.rejected[0] = t_naive > tcrit;
        }
        if (sc.models.ridge) {
            const double norm2 = fit.alpha_hat->squaredNorm();
            if (norm2 <= 0.0) throw ZeroCoefficients("degenerate replicate");
            const double k = static_cast<double>(sc.p) * fit.sigma_hat2 / norm2;
            const auto rfit = ridge_fit(design, y, k);
            out.rejected[2] = rfit.t_stat[0] > tcrit;
        }

        out.vif1 = q1_norm * q1_norm * design.values.col(0).squaredNorm();
        out.delta_num = fit.coef[0] * q1_norm;
        out.delta_den = (*fit.alpha_hat)[0];
    } catch (const Error&) {
        out.failed = true;
    }
    return out;
}

inline int resolve_workers(int workers) {
    if (workers > 0) return workers;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

} // namespace detail

// Monte Carlo power for the first variable's one-sided test under each
// requested model. Replicates are independent streams keyed by index, so the
// result is identical for every worker count; aggregation walks replicate
// order. Replicates whose fit fails are discarded-and-counted; more than 1%
// discards aborts the run.
inline PowerResult simulate_power(const PowerScenario& sc, int workers = 0) {
    sc.validate();
    const int n_workers = std::min(detail::resolve_workers(workers), sc.replicates);
    const double tcrit = t_quantile(1.0 - sc.level, sc.n - sc.p);

    std::vector<detail::ReplicateOutcome> outcomes(static_cast<size_t>(sc.replicates));
    auto run_range = [&](int lo, int hi) {
        for (int j = lo; j < hi; ++j)
            outcomes[static_cast<size_t>(j)] =
                detail::run_replicate(sc, tcrit, sc.stream_base + static_cast<std::uint64_t>(j));
    };
    if (n_workers <= 1) {
        run_range(0, sc.replicates);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(n_workers));
        const int chunk = (sc.replicates + n_workers - 1) / n_workers;
        for (int w = 0; w < n_workers; ++w) {
            const int lo = w * chunk, hi = std::min(sc.replicates, lo + chunk);
            if (lo < hi) pool.emplace_back(run_range, lo, hi);
        }
        for (auto& t : pool) t.join();
    }

    long long rej[3] = {0, 0, 0};
    long long kept = 0;
    double delta_num_sum = 0.0, delta_den_sum = 0.0, vif_sum = 0.0;
    int discarded = 0;
    for (const auto& o : outcomes) {
        if (o.failed) {
            ++discarded;
            continue;
        }
        ++kept;
        for (int k = 0; k < 3; ++k) rej[k] += o.rejected[k] ? 1 : 0;
        vif_sum += o.vif1;
        delta_num_sum += o.delta_num;
        delta_den_sum += o.delta_den;
    }
    if (discarded * 100 > sc.replicates)
        throw InvalidScenario("more than 1% of replicates failed (" +
                              std::to_string(discarded) + "/" +
                              std::to_string(sc.replicates) + ")");

    PowerResult res;
    res.discarded = discarded;
    const double denom = static_cast<double>(kept);
    auto push = [&](ModelKind kind, long long count) {
        const double p_hat = static_cast<double>(count) / denom;
        res.per_model.push_back({kind, p_hat, std::sqrt(p_hat * (1.0 - p_hat) / denom)});
    };
    if (sc.models.naive) push(ModelKind::naive, rej[0]);
    if (sc.models.gs) push(ModelKind::gs, rej[1]);
    if (sc.models.ridge) push(ModelKind::ridge, rej[2]);
    res.mean_vif = vif_sum / denom;
    // Mean delta-hat as a ratio of replicate means: the per-replicate ratio
    // beta_hat_1 ||q_1|| / alpha_hat_1 has no finite mean when alpha_hat_1 can
    // straddle zero, so the means of numerator and denominator are accumulated
    // separately and divided once. This is the standard stable Monte Carlo
    // estimator of the panel-level ratio.
    res.mean_delta_hat =
        std::abs(delta_den_sum) > 0.0 ? delta_num_sum / delta_den_sum : 0.0;
    return res;
}

// Analytic one-sided power from the noncentral t law of the test statistic:
// model B (GS) has ncp = beta_i / sigma on a unit-norm orthonormal direction;
// model A (naive) has ncp = alpha_i / (sigma ||q_i||).
enum class PowerModel { A, B };

inline double analytic_power(PowerModel model, double effect, double sigma, double q_norm,
                             int n, int p, double level) {
    if (!(sigma > 0.0)) throw InvalidScenario("sigma must be positive");
    if (n <= p || p < 1) throw InvalidScenario("need n > p >= 1");
    if (!(level > 0.0 && level < 1.0)) throw InvalidScenario("level must lie in (0, 1)");
    double ncp;
    if (model == PowerModel::A) {
        if (!(q_norm > 0.0)) throw InvalidScenario("model A requires ||q_i|| > 0");
        ncp = effect / (sigma * q_norm);
    } else {
        ncp = effect / sigma;
    }
    const int df = n - p;
    return noncentral_t_sf(t_quantile(1.0 - level, df), df, ncp);
}

// ---------------------------------------------------------------------------
// Fixed-design simulation: the design (and hence the true coefficient vector)
// is held fixed and only the noise is redrawn, which makes empirical power
// directly comparable to the analytic noncentral-t value.
// ---------------------------------------------------------------------------
struct FixedDesignPower {
    double power_naive = 0.0;
    double power_gs = 0.0;
    double se_naive = 0.0;
    double se_gs = 0.0;
};

inline FixedDesignPower fixed_design_power(const DesignMatrix& design,
                                           const VectorX<double>& alpha_true, double sigma,
                                           int replicates, double level, std::uint64_t seed,
                                           bool center_noise, std::uint64_t stream_base = 0) {
    if (alpha_true.size() != design.p()) throw InvalidScenario("alpha length mismatch");
    if (replicates < 1) throw InvalidScenario("replicates must be >= 1");
    const Index n = design.n(), p = design.p();
    const auto decomp = gram_schmidt(design);
    const VectorX<double> mean = design.values * alpha_true;
    const double tcrit = t_quantile(1.0 - level, static_cast<int>(n - p));
    const double q1_norm = decomp.q_rows.row(0).norm();

    long long rej_naive = 0, rej_gs = 0;
    VectorX<double> y(n), beta(p);
    for (int j = 0; j < replicates; ++j) {
        Rng rng(seed, stream_base + static_cast<std::uint64_t>(j));
        double eps_sum = 0.0;
        for (Index i = 0; i < n; ++i) {
            y[i] = normal_quantile(rng.next_uniform());
            eps_sum += y[i];
        }
        if (center_noise) y.array() -= eps_sum / static_cast<double>(n);
        y = mean + sigma * y;
        beta.noalias() = decomp.X.transpose() * y;
        const double sse = std::max(0.0, y.squaredNorm() - beta.squaredNorm());
        const double s = std::sqrt(sse / static_cast<double>(n - p));
        if (beta[0] / s > tcrit) ++rej_gs;
        const double alpha1 = decomp.q_rows.row(0).dot(beta);
        if (alpha1 / (s * q1_norm) > tcrit) ++rej_naive;
    }
    FixedDesignPower out;
    const double nn = static_cast<double>(replicates);
    out.power_naive = static_cast<double>(rej_naive) / nn;
    out.power_gs = static_cast<double>(rej_gs) / nn;
    out.se_naive = std::sqrt(out.power_naive * (1.0 - out.power_naive) / nn);
    out.se_gs = std::sqrt(out.power_gs * (1.0 - out.power_gs) / nn);
    return out;
}

// ---------------------------------------------------------------------------
// Stacked-design power-equivalence experiment: from one pilot design, build
// k-fold replicated designs with n_A = Delta^2 * n_B rows, run the naive test
// on design A and the GS test on design B, and report the power gap, which
// should vanish as k grows.
// ---------------------------------------------------------------------------
struct StackedRow {
    Index k;
    Index n_a;
    Index n_b;
    double power_a;
    double power_b;
    double gap;
    double combined_se;
};

inline std::vector<StackedRow> stacked_power_experiment(const DesignMatrix& pilot,
                                                        const VectorX<double>& alpha,
                                                        double sigma, double delta_i,
                                                        const std::vector<Index>& k_grid,
                                                        double level, int replicates,
                                                        std::uint64_t seed) {
    if (!(sigma > 0.0)) throw InvalidScenario("sigma must be positive");
    if (replicates < 1) throw InvalidScenario("replicates must be >= 1");
    if (!(std::isfinite(delta_i)) || delta_i == 0.0)
        throw InvalidDelta("delta must be finite and nonzero");
    const auto decomp0 = gram_schmidt(pilot);
    const VectorX<double> beta0 = decomp0.Q * alpha;
    if (alpha[0] * beta0[0] <= 0.0)
        throw SameSignViolation("alpha_1 and beta_1 must share a sign for the "
                                "power-equivalence construction");

    std::vector<StackedRow> rows;
    rows.reserve(k_grid.size());
    const double ratio = delta_i * delta_i;
    for (size_t gi = 0; gi < k_grid.size(); ++gi) {
        const Index k = k_grid[gi];
        if (k < 1) throw InvalidScenario("stack factors must be >= 1");
        const Index k_a = std::max<Index>(1, static_cast<Index>(std::llround(ratio * static_cast<double>(k))));
        const DesignMatrix design_b = stack_replicates(pilot, k);
        const DesignMatrix design_a = stack_replicates(pilot, k_a);

        auto run_arm = [&](const DesignMatrix& design, bool use_gs, std::uint64_t arm) {
            const auto dc = gram_schmidt(design);
            const VectorX<double> mean = design.values * alpha;
            const Index n = design.n(), p = design.p();
            const double tcrit = t_quantile(1.0 - level, static_cast<int>(n - p));
            const double q1_norm = dc.q_rows.row(0).norm();
            long long rej = 0;
            VectorX<double> y(n), beta(p);
            for (int j = 0; j < replicates; ++j) {
                Rng rng(seed, (static_cast<std::uint64_t>(gi) << 40) |
                                  (arm << 32) | static_cast<std::uint64_t>(j));
                for (Index i = 0; i < n; ++i)
                    y[i] = mean[i] + sigma * normal_quantile(rng.next_uniform());
                beta.noalias() = dc.X.transpose() * y;
                const double sse = std::max(0.0, y.squaredNorm() - beta.squaredNorm());
                const double s = std::sqrt(sse / static_cast<double>(n - p));
                const double t = use_gs ? beta[0] / s
                                        : dc.q_rows.row(0).dot(beta) / (s * q1_norm);
                if (t > tcrit) ++rej;
            }
            return static_cast<double>(rej) / static_cast<double>(replicates);
        };

        StackedRow row;
        row.k = k;
        row.n_a = design_a.n();
        row.n_b = design_b.n();
        row.power_a = run_arm(design_a, /*use_gs=*/false, 0);
        row.power_b = run_arm(design_b, /*use_gs=*/true, 1);
        row.gap = row.power_a - row.power_b;
        const double nn = static_cast<double>(replicates);
        row.combined_se = std::sqrt(row.power_a * (1.0 - row.power_a) / nn +
                                    row.power_b * (1.0 - row.power_b) / nn);
        rows.push_back(row);
    }
    return rows;
}

// Figure-style power grid: one scenario per sigma value, each with its own
// substream block so the full grid is reproducible regardless of scheduling.
struct GridPoint {
    double sigma;
    double inv_sigma;
    PowerResult result;
};

inline std::vector<GridPoint> run_power_grid(PowerScenario base,
                                             const std::vector<double>& sigmas,
                                             int workers = 0) {
    std::vector<GridPoint> out;
    out.reserve(sigmas.size());
    for (size_t g = 0; g < sigmas.size(); ++g) {
        PowerScenario sc = base;
        sc.sigma = sigmas[g];
        sc.stream_base = base.stream_base + (static_cast<std::uint64_t>(g + 1) << 32);
        out.push_back({sc.sigma, 1.0 / sc.sigma, simulate_power(sc, workers)});
    }
    return out;
}

inline std::vector<double> default_sigma_grid() {
    std::vector<double> sigmas;
    sigmas.reserve(12);
    for (int g = 1; g <= 12; ++g) sigmas.push_back(12.0 / static_cast<double>(g));
    return sigmas;
}

} // namespace gsreg
