#pragma once

#include <actloss/errors.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace actloss {

struct SymmetricEigen {
    Eigen::VectorXd values;  // ascending
    Eigen::MatrixXd vectors; // column i pairs with values[i]
    int sweeps = 0;
};

/// max|H - H^T| / max|H|
inline double relative_asymmetry(const Eigen::MatrixXd& H)
{
    const double scale = H.cwiseAbs().maxCoeff();
    return scale > 0.0 ? (H - H.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Only the upper
/// triangle drives the rotations; the input is symmetrized first.
inline SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& H, double asymmetry_tol = 1e-9, int max_sweeps = 100)
{
    if (H.rows() != H.cols())
        throw DimensionError("jacobi_eigen: matrix is not square");
    if (!H.allFinite())
        throw DomainError("jacobi_eigen: non-finite entries");
    if (relative_asymmetry(H) > asymmetry_tol)
        throw DomainError("jacobi_eigen: matrix is not symmetric within tolerance");

    const Eigen::Index n = H.rows();
    Eigen::MatrixXd A = 0.5 * (H + H.transpose());
    Eigen::MatrixXd V = Eigen::MatrixXd::Identity(n, n);
    const double total = A.squaredNorm();
    SymmetricEigen out;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q)
                off += A(p, q) * A(p, q);
        if (off <= 1e-30 * total || off == 0.0)
            break;
        out.sweeps = sweep + 1;
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0)
                    continue;
                const double app = A(p, p), aqq = A(q, q);
                // Entries already negligible against both diagonal terms are dropped.
                if (sweep > 3 && std::abs(apq) < 1e-18 * std::min(std::abs(app), std::abs(aqq))) {
                    A(p, q) = A(q, p) = 0.0;
                    continue;
                }
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                A(p, q) = A(q, p) = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return A(a, a) < A(b, b); });
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values[i] = A(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        out.vectors.col(i) = V.col(order[static_cast<std::size_t>(i)]);
    }
    return out;
}

struct MinEigen {
    double value;
    Eigen::VectorXd vector;
    /// ||H v - lambda v||
    double residual;
};

inline MinEigen min_eigenpair(const Eigen::MatrixXd& H)
{
    const auto eig = jacobi_eigen(H);
    Eigen::VectorXd v = eig.vectors.col(0);
    const double lambda = eig.values[0];
    const double res = (H * v - lambda * v).norm();
    return {lambda, std::move(v), res};
}

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const Eigen::MatrixXd& H) { return min_eigenpair(H).value; }

} // namespace actloss
