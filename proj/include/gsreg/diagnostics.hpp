#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "gsreg/core_linalg.hpp"
#include "gsreg/errors.hpp"
#include "gsreg/regression.hpp"

namespace gsreg {

// Variance inflation factors, computed by re-running the orthogonalization
// with column i moved last: the auxiliary-regression R^2 falls out of the
// last diagonal of Q as R^2_i = 1 - Q_pp^2 / ||m_i||^2.
template <class Scalar>
VectorX<Scalar> vif(const DesignMatrixT<Scalar>& m) {
    const Index p = m.p();
    VectorX<Scalar> out(p);
    if (p == 1) {
        out[0] = Scalar(1);
        return out;
    }
    for (Index i = 0; i < p; ++i) {
        std::vector<Index> order;
        order.reserve(static_cast<size_t>(p));
        for (Index j = 0; j < p; ++j)
            if (j != i) order.push_back(j);
        order.push_back(i);
        const auto decomp = gram_schmidt(m, std::move(order));
        const Scalar resid = decomp.Q(p - 1, p - 1);
        out[i] = m.values.col(i).squaredNorm() / (resid * resid);
    }
    return out;
}

// Condition number sqrt(lambda_max / lambda_min) of M'M via a symmetric
// eigen-solve.
template <class Scalar>
Scalar condition_number(const DesignMatrixT<Scalar>& m) {
    const MatrixX<Scalar> mtm = m.values.transpose() * m.values;
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(mtm, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw SingularMatrix("eigen decomposition of M'M failed");
    const Scalar lmin = es.eigenvalues().minCoeff();
    const Scalar lmax = es.eigenvalues().maxCoeff();
    if (lmin <= Scalar(0))
        throw SingularMatrix("M'M is numerically singular (lambda_min <= 0)");
    return std::sqrt(lmax / lmin);
}

// The Delta metric for variable i (1 row of Q^{-1} = q_i):
//   Delta_i = beta_i ||q_i|| / (q_i' beta).
// Accepts either the true beta (planning) or an estimated beta-hat.
template <class Scalar>
Scalar delta(const GsDecompositionT<Scalar>& decomp, const VectorX<Scalar>& beta, Index i) {
    if (beta.size() != decomp.Q.rows())
        throw InvalidScenario("beta length does not match decomposition size");
    if (i < 0 || i >= beta.size()) throw InvalidScenario("variable index out of range");
    const VectorX<Scalar> qi = decomp.q_rows.row(i).transpose();
    const Scalar qnorm = qi.norm();
    const Scalar denom = qi.dot(beta);
    if (std::abs(denom) < Scalar(1e-14) * qnorm * beta.norm())
        throw UndefinedDelta("q_i' beta is numerically zero for variable " +
                             std::to_string(i + 1) +
                             " (the naive coefficient carries no signal)");
    return beta[i] * qnorm / denom;
}

enum class DeltaBasis { true_beta, estimated };

template <class Scalar>
struct DeltaRowT {
    Index index;
    Scalar delta;     // +/-inf when q_i' beta == 0 but beta_i != 0
    bool defined;     // false when the ratio was degenerate
    Scalar vif;
};

template <class Scalar>
struct DeltaReportT {
    std::vector<DeltaRowT<Scalar>> per_variable;
    Scalar condition_number;
    DeltaBasis basis;
};

using DeltaReport = DeltaReportT<double>;

// Per-variable Delta/VIF plus the design condition number. Degenerate
// Delta ratios are reported as signed infinity instead of failing the
// whole report.
template <class Scalar>
DeltaReportT<Scalar> delta_report(const DesignMatrixT<Scalar>& m,
                                  const GsDecompositionT<Scalar>& decomp,
                                  const VectorX<Scalar>& beta, DeltaBasis basis) {
    DeltaReportT<Scalar> rep;
    rep.basis = basis;
    rep.condition_number = condition_number(m);
    const VectorX<Scalar> v = vif(m);
    const Index p = m.p();
    rep.per_variable.reserve(static_cast<size_t>(p));
    for (Index i = 0; i < p; ++i) {
        // rows follow decomposition order; VIF is looked up per original column
        DeltaRowT<Scalar> row{i, Scalar(0), true, v[decomp.order[static_cast<size_t>(i)]]};
        try {
            row.delta = delta(decomp, beta, i);
        } catch (const UndefinedDelta&) {
            row.defined = false;
            row.delta = beta[i] >= Scalar(0) ? std::numeric_limits<Scalar>::infinity()
                                             : -std::numeric_limits<Scalar>::infinity();
        }
        rep.per_variable.push_back(row);
    }
    return rep;
}

// Theorem-of-equivalence sample-size translator: the naive design needs
// n_A = Delta_i^2 * n_B rows to match the GS test's power on n_B rows.
template <class Scalar>
Scalar equivalent_sample_size(Scalar delta_i, Index n_b) {
    if (n_b < 1) throw InvalidScenario("n_B must be >= 1");
    if (!(std::isfinite(delta_i)) || delta_i == Scalar(0))
        throw InvalidDelta("delta must be finite and nonzero");
    return delta_i * delta_i * Scalar(n_b);
}

inline const char* collinearity_flag(double cn) {
    if (cn < 30.0) return "no serious multicollinearity flagged";
    if (cn <= 100.0) return "moderate/strong multicollinearity";
    return "severe multicollinearity";
}

} // namespace gsreg
