#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace lta {

namespace detail {

// True for states that can leak out of the transient block with positive probability.
template <typename Scalar>
std::vector<bool> can_exit(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& Q) {
    const Eigen::Index n = Q.rows();
    std::vector<bool> out(static_cast<std::size_t>(n), false);
    for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = Q.row(i).sum() < Scalar(1) - Scalar(1e-15);
    for (bool changed = true; changed;) {
        changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (out[static_cast<std::size_t>(i)]) continue;
            for (Eigen::Index j = 0; j < n; ++j)
                if (Q(i, j) > Scalar(0) && out[static_cast<std::size_t>(j)]) {
                    out[static_cast<std::size_t>(i)] = changed = true;
                    break;
                }
        }
    }
    return out;
}

// Solves (I - Q) x = b restricted to `keep`; other entries are `fill`.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solve_restricted(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& Q,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b, const std::vector<bool>& keep, Scalar fill) {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < Q.rows(); ++i)
        if (keep[static_cast<std::size_t>(i)]) idx.push_back(i);
    const auto m = static_cast<Eigen::Index>(idx.size());
    Matrix A = Matrix::Identity(m, m);
    Vector rhs(m);
    for (Eigen::Index a = 0; a < m; ++a) {
        rhs[a] = b[idx[a]];
        for (Eigen::Index k = 0; k < m; ++k) A(a, k) -= Q(idx[a], idx[k]);
    }
    Vector out = Vector::Constant(Q.rows(), fill);
    if (m == 0) return out;
    Vector x = A.fullPivLu().solve(rhs);
    for (Eigen::Index a = 0; a < m; ++a) out[idx[a]] = x[a];
    return out;
}

}  // namespace detail

/// Expected accumulated cost until absorption for a chain with transient block
/// `Q` (rows may sum to < 1; the missing mass is absorbed) and per-step
/// expected cost `c`. States absorbed with probability one solve
/// (I - Q) x = c; every other state gets +infinity.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> expected_absorption_cost(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& Q,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& c) {
    const Eigen::Index n = Q.rows();
    std::vector<bool> proper = detail::can_exit<Scalar>(Q);
    // Any chance of reaching a trapped state makes the expected cost unbounded.
    for (bool changed = true; changed;) {
        changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!proper[static_cast<std::size_t>(i)]) continue;
            for (Eigen::Index j = 0; j < n; ++j)
                if (Q(i, j) > Scalar(0) && !proper[static_cast<std::size_t>(j)]) {
                    proper[static_cast<std::size_t>(i)] = false;
                    changed = true;
                    break;
                }
        }
    }
    return detail::solve_restricted<Scalar>(Q, c, proper, std::numeric_limits<Scalar>::infinity());
}

/// Probability of absorption through the per-state exit probabilities `r`
/// (a subset of the leaked mass): solves (I - Q) s = r. Trapped states get 0.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> absorption_probability(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& Q,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& r) {
    return detail::solve_restricted<Scalar>(Q, r, detail::can_exit<Scalar>(Q), Scalar(0));
}

}  // namespace lta
