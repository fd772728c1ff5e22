#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gsreg/core_linalg.hpp"
#include "gsreg/distributions.hpp"
#include "gsreg/errors.hpp"

namespace gsreg {

enum class ModelKind { naive, gs, ridge };

inline const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::naive: return "naive";
        case ModelKind::gs: return "gs";
        case ModelKind::ridge: return "ridge";
    }
    return "?";
}

// Coefficients with their exact t-tests. For the GS model, `coef` holds the
// orthonormal-basis coefficients (beta) in fit order and `alpha_hat` the
// back-transformed original-basis coefficients; for the other models `coef`
// holds alpha directly. One-sided p-values test the positive direction,
// P(T > t); two-sided is 2 * min(p_one, 1 - p_one).
template <class Scalar>
struct FitResultT {
    ModelKind model_kind = ModelKind::naive;
    VectorX<Scalar> coef;
    VectorX<Scalar> se;
    VectorX<Scalar> t_stat;
    VectorX<Scalar> p_one_sided;
    VectorX<Scalar> p_two_sided;
    Scalar sse = Scalar(0);
    Index df_resid = 0;
    Scalar sigma_hat2 = Scalar(0);
    Scalar ridge_k = Scalar(0);                          // ridge only
    std::optional<GsDecompositionT<Scalar>> decomp;      // gs only
    std::optional<VectorX<Scalar>> alpha_hat;            // gs only
};

using FitResult = FitResultT<double>;

namespace detail {

template <class Scalar>
void fill_tests(FitResultT<Scalar>& fit) {
    const Index p = fit.coef.size();
    fit.t_stat.resize(p);
    fit.p_one_sided.resize(p);
    fit.p_two_sided.resize(p);
    const int df = static_cast<int>(fit.df_resid);
    for (Index i = 0; i < p; ++i) {
        fit.t_stat[i] = fit.se[i] > Scalar(0) ? fit.coef[i] / fit.se[i] : Scalar(0);
        const double pos = t_sf(static_cast<double>(fit.t_stat[i]), df);
        fit.p_one_sided[i] = static_cast<Scalar>(pos);
        fit.p_two_sided[i] = static_cast<Scalar>(2.0 * std::min(pos, 1.0 - pos));
    }
}

} // namespace detail

// Gram-Schmidt regression: orthonormalize in the given order, regress on the
// orthonormal basis. coef[i] = x_i' y, all standard errors equal s, and the
// original-basis estimate alpha_hat = Q^{-1} coef is exposed for cross-checks.
template <class Scalar>
FitResultT<Scalar> gs_fit(const DesignMatrixT<Scalar>& m, const VectorX<Scalar>& y,
                          std::vector<Index> order) {
    const Index n = m.n(), p = m.p();
    if (y.size() != n) throw InvalidScenario("response length does not match row count");
    auto decomp = gram_schmidt(m, std::move(order));

    FitResultT<Scalar> fit;
    fit.model_kind = ModelKind::gs;
    fit.coef = decomp.X.transpose() * y;
    fit.sse = std::max(Scalar(0), Scalar(y.squaredNorm() - fit.coef.squaredNorm()));
    fit.df_resid = n - p;
    fit.sigma_hat2 = fit.sse / Scalar(fit.df_resid);
    const Scalar s = std::sqrt(fit.sigma_hat2);
    fit.se = VectorX<Scalar>::Constant(p, s);
    fit.alpha_hat = decomp.q_rows * fit.coef;
    fit.decomp = std::move(decomp);
    detail::fill_tests(fit);
    return fit;
}

template <class Scalar>
FitResultT<Scalar> gs_fit(const DesignMatrixT<Scalar>& m, const VectorX<Scalar>& y) {
    return gs_fit(m, y, identity_order(m.p()));
}

// Naive multiple regression (OLS), solved through the same orthonormal
// factorization rather than the normal equations: alpha = Q^{-1} X'y and
// se(alpha_i) = s * ||q_i||.
template <class Scalar>
FitResultT<Scalar> ols_fit(const DesignMatrixT<Scalar>& m, const VectorX<Scalar>& y) {
    const Index p = m.p();
    FitResultT<Scalar> base = gs_fit(m, y);

    FitResultT<Scalar> fit;
    fit.model_kind = ModelKind::naive;
    fit.coef = *base.alpha_hat;
    fit.sse = base.sse;
    fit.df_resid = base.df_resid;
    fit.sigma_hat2 = base.sigma_hat2;
    const Scalar s = std::sqrt(fit.sigma_hat2);
    fit.se.resize(p);
    for (Index i = 0; i < p; ++i) fit.se[i] = s * base.decomp->q_rows.row(i).norm();
    detail::fill_tests(fit);
    return fit;
}

// Effect of a unit intervention on the i-th orthogonal direction, from
// a GS fit: estimate beta_i / Q_ii with plug-in scale s / Q_ii.
template <class Scalar>
struct EffectSizeT {
    Index index;
    Scalar estimate;
    Scalar std_dev;
};

using EffectSize = EffectSizeT<double>;

template <class Scalar>
EffectSizeT<Scalar> gs_effect_size(const FitResultT<Scalar>& fit, Index i) {
    if (fit.model_kind != ModelKind::gs || !fit.decomp)
        throw InvalidScenario("effect size requires a gs fit");
    const auto& Q = fit.decomp->Q;
    if (i < 0 || i >= Q.rows()) throw InvalidScenario("variable index out of range");
    const Scalar qii = Q(i, i);
    if (qii <= Scalar(kRankEps))
        throw DegenerateDirection("direction " + std::to_string(i + 1) +
                                  " has no residual variation");
    return EffectSizeT<Scalar>{i, fit.coef[i] / qii, std::sqrt(fit.sigma_hat2) / qii};
}

// Ridge regression (M'M + kI)^{-1} M'y on a centered design, with the
// sandwich covariance s^2 A^{-1} M'M A^{-1} and t_{n-p} reference tests.
template <class Scalar>
FitResultT<Scalar> ridge_fit(const DesignMatrixT<Scalar>& m, const VectorX<Scalar>& y,
                             Scalar k) {
    const Index n = m.n(), p = m.p();
    if (y.size() != n) throw InvalidScenario("response length does not match row count");
    if (!m.centered)
        throw NotCentered("ridge regression requires centered predictors (no intercept)");
    if (k < Scalar(0)) throw NegativeRidge("ridge constant must be >= 0, got " + std::to_string(k));

    const MatrixX<Scalar> mtm = m.values.transpose() * m.values;
    MatrixX<Scalar> A = mtm;
    A.diagonal().array() += k;
    Eigen::LLT<MatrixX<Scalar>> llt(A);
    if (llt.info() != Eigen::Success)
        throw SingularMatrix("ridge system M'M + kI is not positive definite");
    const VectorX<Scalar> mty = m.values.transpose() * y;

    FitResultT<Scalar> fit;
    fit.model_kind = ModelKind::ridge;
    fit.ridge_k = k;
    fit.coef = llt.solve(mty);
    fit.sse = (y - m.values * fit.coef).squaredNorm();
    fit.df_resid = n - p;
    fit.sigma_hat2 = fit.sse / Scalar(fit.df_resid);
    const MatrixX<Scalar> ainv_mtm = llt.solve(mtm);          // A^{-1} M'M
    const MatrixX<Scalar> cov = fit.sigma_hat2 * llt.solve(ainv_mtm.transpose());
    fit.se.resize(p);
    for (Index i = 0; i < p; ++i) fit.se[i] = std::sqrt(std::max(Scalar(0), cov(i, i)));
    detail::fill_tests(fit);
    return fit;
}

// Default automatic ridge constant: k = p * s^2 / ||alpha_ols||^2
// (the Hoerl-Kennard-Baldwin rule). See README for why this particular
// stand-in rule and how to swap in another policy.
template <class Scalar>
Scalar ridge_k_auto(const DesignMatrixT<Scalar>& m, const VectorX<Scalar>& y) {
    const FitResultT<Scalar> ols = ols_fit(m, y);
    const Scalar norm2 = ols.coef.squaredNorm();
    if (norm2 <= Scalar(0))
        throw ZeroCoefficients("all OLS coefficients are zero; auto ridge constant undefined");
    return Scalar(m.p()) * ols.sigma_hat2 / norm2;
}

template <class Scalar>
FitResultT<Scalar> ridge_fit_auto(const DesignMatrixT<Scalar>& m, const VectorX<Scalar>& y) {
    return ridge_fit(m, y, ridge_k_auto(m, y));
}

} // namespace gsreg
