#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "hfp/error.hpp"

namespace hfp {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Thin SVD: A (m x n) = U diag(sigma) V^H with k = min(m, n), U m x k,
/// V n x k, sigma descending.
struct SvdResult {
    Matrix U;
    std::vector<double> sigma;
    Matrix V;

    [[nodiscard]] double condition() const noexcept {
        if (sigma.empty()) return std::numeric_limits<double>::infinity();
        if (sigma.back() == 0.0) return std::numeric_limits<double>::infinity();
        return sigma.front() / sigma.back();
    }
};

inline constexpr std::size_t kMaxSvdDim = 512;
inline constexpr int kMaxJacobiSweeps = 100;

namespace detail {

// Replaces the columns of Q flagged in `missing` with unit vectors orthogonal
// to every other column.
inline void complete_orthonormal(Matrix& Q, std::vector<bool> missing) {
    const Eigen::Index m = Q.rows();
    for (Eigen::Index j = 0; j < Q.cols(); ++j) {
        if (!missing[static_cast<std::size_t>(j)]) continue;
        for (Eigen::Index e = 0; e < m; ++e) {
            Vector v = Vector::Zero(m);
            v(e) = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (Eigen::Index k = 0; k < Q.cols(); ++k) {
                    if (k == j || missing[static_cast<std::size_t>(k)]) continue;
                    v -= Q.col(k) * Q.col(k).dot(v);
                }
            }
            if (v.norm() > 0.5) {
                Q.col(j) = v / v.norm();
                break;
            }
        }
        missing[static_cast<std::size_t>(j)] = false;
    }
}

// One-sided (Hestenes) Jacobi on the columns of a tall matrix.
inline SvdResult jacobi_svd_tall(const Matrix& A, int max_sweeps) {
    const Eigen::Index n = A.cols();
    Matrix W = A;
    Matrix V = Matrix::Identity(n, n);
    const double eps = std::numeric_limits<double>::epsilon();
    const double tol = eps * std::max(4.0, std::sqrt(static_cast<double>(A.rows())));
    // columns below this squared norm are rounding noise and never settle
    const double negligible = std::pow(eps * A.norm(), 2);

    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        converged = true;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double alpha = W.col(p).squaredNorm();
                const double beta = W.col(q).squaredNorm();
                const std::complex<double> gamma = W.col(p).dot(W.col(q));
                const double g = std::abs(gamma);
                if (g == 0.0 || g <= tol * std::sqrt(alpha * beta) || std::min(alpha, beta) <= negligible) continue;
                converged = false;

                const double zeta = (beta - alpha) / (2.0 * g);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                const std::complex<double> phase = gamma / g;

                const Vector wp = W.col(p);
                W.col(p) = c * wp - s * std::conj(phase) * W.col(q);
                W.col(q) = s * phase * wp + c * W.col(q);
                const Vector vp = V.col(p);
                V.col(p) = c * vp - s * std::conj(phase) * V.col(q);
                V.col(q) = s * phase * vp + c * V.col(q);
            }
        }
    }
    if (!converged) throw Error(ErrorCode::NoConvergence, "Jacobi SVD did not converge in " + std::to_string(max_sweeps) + " sweeps");

    std::vector<double> norms(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) norms[static_cast<std::size_t>(j)] = W.col(j).norm();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return norms[static_cast<std::size_t>(a)] > norms[static_cast<std::size_t>(b)];
    });

    SvdResult out{Matrix(A.rows(), n), std::vector<double>(static_cast<std::size_t>(n)), Matrix(n, n)};
    const double top = n > 0 ? norms[static_cast<std::size_t>(order[0])] : 0.0;
    const double null_cut = top * static_cast<double>(std::max(A.rows(), n)) * std::numeric_limits<double>::epsilon();
    std::vector<bool> missing(static_cast<std::size_t>(n), false);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index j = order[static_cast<std::size_t>(k)];
        const double sigma = norms[static_cast<std::size_t>(j)];
        out.sigma[static_cast<std::size_t>(k)] = sigma;
        out.V.col(k) = V.col(j);
        if (sigma > null_cut && sigma > 0.0) {
            out.U.col(k) = W.col(j) / sigma;
        } else {
            out.U.col(k).setZero();
            missing[static_cast<std::size_t>(k)] = true;
        }
    }
    complete_orthonormal(out.U, missing);
    return out;
}

} // namespace detail

inline SvdResult svd_small(const Matrix& A, int max_sweeps = kMaxJacobiSweeps) {
    if (A.rows() == 0 || A.cols() == 0) throw Error(ErrorCode::BadShape, "SVD of an empty matrix");
    if (static_cast<std::size_t>(A.rows()) > kMaxSvdDim || static_cast<std::size_t>(A.cols()) > kMaxSvdDim) {
        throw Error(ErrorCode::BadShape, "SVD limited to dimensions <= 512");
    }
    if (!A.allFinite()) throw Error(ErrorCode::SvdFailure, "matrix has non-finite entries");
    if (A.rows() >= A.cols()) return detail::jacobi_svd_tall(A, max_sweeps);
    SvdResult t = detail::jacobi_svd_tall(A.adjoint(), max_sweeps);
    return SvdResult{std::move(t.V), std::move(t.sigma), std::move(t.U)};
}

/// Minimum-norm least-squares solution through the SVD; singular values
/// below rcond * sigma_max are dropped.
inline Vector solve_least_squares(const SvdResult& svd, const Vector& b, double rcond = -1.0) {
    if (rcond < 0.0) rcond = static_cast<double>(std::max(svd.U.rows(), svd.V.rows())) * std::numeric_limits<double>::epsilon();
    const double cut = svd.sigma.empty() ? 0.0 : rcond * svd.sigma.front();
    Vector coeff = svd.U.adjoint() * b;
    for (Eigen::Index k = 0; k < coeff.size(); ++k) {
        const double s = svd.sigma[static_cast<std::size_t>(k)];
        coeff(k) = (s > cut && s > 0.0) ? coeff(k) / s : std::complex<double>{0.0, 0.0};
    }
    return svd.V * coeff;
}

inline Vector solve_least_squares(const Matrix& A, const Vector& b, double rcond = -1.0) {
    return solve_least_squares(svd_small(A), b, rcond);
}

inline Matrix pseudo_inverse(const SvdResult& svd) {
    Matrix inv_sigma = Matrix::Zero(static_cast<Eigen::Index>(svd.sigma.size()), static_cast<Eigen::Index>(svd.sigma.size()));
    for (std::size_t k = 0; k < svd.sigma.size(); ++k) {
        if (svd.sigma[k] > 0.0) inv_sigma(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = 1.0 / svd.sigma[k];
    }
    return svd.V * inv_sigma * svd.U.adjoint();
}

inline std::vector<std::complex<double>> eigenvalues(const Matrix& A) {
    Eigen::ComplexEigenSolver<Matrix> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "eigenvalue iteration failed");
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

} // namespace hfp
