#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gsreg/errors.hpp"

namespace gsreg {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

inline constexpr double kRankEps = 1e-10; // relative column-norm rank tolerance

// An n-by-p design with column labels and preprocessing flags. Rows are
// observations; columns are predictors. Invariant: n > p >= 1.
template <class Scalar>
struct DesignMatrixT {
    MatrixX<Scalar> values;
    std::vector<std::string> col_names;
    bool centered = false;
    bool scaled = false;

    Index n() const { return values.rows(); }
    Index p() const { return values.cols(); }
};

using DesignMatrix = DesignMatrixT<double>;

template <class Scalar>
DesignMatrixT<Scalar> make_design(MatrixX<Scalar> values,
                                  std::vector<std::string> col_names = {},
                                  bool centered = false, bool scaled = false) {
    const Index n = values.rows(), p = values.cols();
    if (p < 1 || n <= p)
        throw InvalidScenario("design must have n > p >= 1, got n=" +
                              std::to_string(n) + ", p=" + std::to_string(p));
    if (col_names.empty()) {
        col_names.reserve(static_cast<size_t>(p));
        for (Index j = 0; j < p; ++j) col_names.push_back("x" + std::to_string(j + 1));
    } else if (static_cast<Index>(col_names.size()) != p) {
        throw InvalidScenario("column label count does not match column count");
    }
    for (Index j = 0; j < p; ++j)
        if (values.col(j).norm() == Scalar(0))
            throw InvalidScenario("column " + col_names[static_cast<size_t>(j)] +
                                  " is identically zero");
    return DesignMatrixT<Scalar>{std::move(values), std::move(col_names), centered, scaled};
}

// Column-wise centering and (optional) scaling to unit sample standard
// deviation, returning a new design with the flags set.
template <class Scalar>
DesignMatrixT<Scalar> preprocess(const DesignMatrixT<Scalar>& m, bool center, bool scale) {
    MatrixX<Scalar> v = m.values;
    const auto n = static_cast<Scalar>(m.n());
    if (center) v.rowwise() -= v.colwise().mean();
    if (scale) {
        // unit sample standard deviation about the column mean, whether or
        // not the column was also centered
        for (Index j = 0; j < v.cols(); ++j) {
            const Scalar mu = v.col(j).mean();
            const Scalar ss = (v.col(j).array() - mu).matrix().squaredNorm();
            const Scalar sdev = std::sqrt(ss / (n - Scalar(1)));
            if (sdev <= Scalar(0))
                throw InvalidScenario("column " + m.col_names[static_cast<size_t>(j)] +
                                      " has zero variance; cannot scale");
            v.col(j) /= sdev;
        }
    }
    auto out = make_design(std::move(v), m.col_names, center || m.centered, scale || m.scaled);
    return out;
}

template <class Scalar>
VectorX<Scalar> center_response(const VectorX<Scalar>& y) {
    return y.array() - y.mean();
}

inline std::vector<Index> identity_order(Index p) {
    std::vector<Index> order(static_cast<size_t>(p));
    std::iota(order.begin(), order.end(), Index{0});
    return order;
}

// Order-sensitive Gram-Schmidt factorization M_pi = X * Q of the permuted
// design: X has orthonormal columns, Q is upper triangular with positive
// diagonal Q_kk = ||r_k|| (the norm of the k-th orthogonalization residual).
// q_rows holds Q^{-1}, whose i-th row is the vector q_i.
template <class Scalar>
struct GsDecompositionT {
    MatrixX<Scalar> X;
    MatrixX<Scalar> Q;
    std::vector<Index> order;
    MatrixX<Scalar> q_rows; // Q^{-1}

    VectorX<Scalar> q_row(Index i) const { return q_rows.row(i).transpose(); }
};

using GsDecomposition = GsDecompositionT<double>;

// Back-substitution inverse of an upper-triangular matrix. Rows of the
// result are the q_i vectors used throughout the diagnostics.
template <class Scalar>
MatrixX<Scalar> invert_upper_triangular(const MatrixX<Scalar>& Q) {
    const Index p = Q.rows();
    if (Q.cols() != p) throw InvalidScenario("matrix must be square");
    for (Index i = 0; i < p; ++i)
        if (std::abs(Q(i, i)) < kRankEps)
            throw SingularMatrix("diagonal entry " + std::to_string(i + 1) +
                                 " below tolerance");
    MatrixX<Scalar> inv = MatrixX<Scalar>::Zero(p, p);
    for (Index j = p - 1; j >= 0; --j) {
        inv(j, j) = Scalar(1) / Q(j, j);
        for (Index i = j - 1; i >= 0; --i) {
            Scalar acc = Scalar(0);
            for (Index k = i + 1; k <= j; ++k) acc += Q(i, k) * inv(k, j);
            inv(i, j) = -acc / Q(i, i);
        }
    }
    return inv;
}

template <class Scalar>
GsDecompositionT<Scalar> gram_schmidt(const DesignMatrixT<Scalar>& m,
                                      std::vector<Index> order) {
    const Index n = m.n(), p = m.p();
    if (static_cast<Index>(order.size()) != p)
        throw InvalidScenario("ordering length does not match column count");
    {
        std::vector<Index> sorted = order;
        std::sort(sorted.begin(), sorted.end());
        for (Index j = 0; j < p; ++j)
            if (sorted[static_cast<size_t>(j)] != j)
                throw InvalidScenario("ordering is not a permutation of the columns");
    }

    MatrixX<Scalar> X(n, p);
    MatrixX<Scalar> Q = MatrixX<Scalar>::Zero(p, p);
    for (Index k = 0; k < p; ++k) {
        const auto& col = m.values.col(order[static_cast<size_t>(k)]);
        const Scalar col_norm = col.norm();
        VectorX<Scalar> r = col;
        // modified Gram-Schmidt sweep: project out each built direction in turn
        for (Index i = 0; i < k; ++i) {
            const Scalar c = X.col(i).dot(r);
            Q(i, k) += c;
            r -= c * X.col(i);
        }
        // twice-is-enough re-orthogonalization when a lot of norm cancelled
        if (r.norm() < Scalar(0.1) * col_norm) {
            for (Index i = 0; i < k; ++i) {
                const Scalar c = X.col(i).dot(r);
                Q(i, k) += c;
                r -= c * X.col(i);
            }
        }
        const Scalar rn = r.norm();
        if (rn <= kRankEps * col_norm)
            throw RankDeficient("column " +
                                m.col_names[static_cast<size_t>(order[static_cast<size_t>(k)])] +
                                " (position " + std::to_string(k + 1) +
                                ") lies in the span of its predecessors");
        Q(k, k) = rn;
        X.col(k) = r / rn;
    }

    GsDecompositionT<Scalar> out;
    out.X = std::move(X);
    out.Q = std::move(Q);
    out.order = std::move(order);
    out.q_rows = invert_upper_triangular(out.Q);
    return out;
}

template <class Scalar>
GsDecompositionT<Scalar> gram_schmidt(const DesignMatrixT<Scalar>& m) {
    return gram_schmidt(m, identity_order(m.p()));
}

// k-fold row replication [M; M; ...; M]. Gram-Schmidt of the result scales
// Q by sqrt(k) while leaving X's column span structure intact.
template <class Scalar>
DesignMatrixT<Scalar> stack_replicates(const DesignMatrixT<Scalar>& m, Index k) {
    if (k < 1) throw InvalidScenario("replication factor must be >= 1");
    MatrixX<Scalar> v(m.n() * k, m.p());
    for (Index r = 0; r < k; ++r) v.middleRows(r * m.n(), m.n()) = m.values;
    return DesignMatrixT<Scalar>{std::move(v), m.col_names, m.centered, m.scaled};
}

} // namespace gsreg
