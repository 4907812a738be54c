#pragma once

// Exponential-sum analysis of short sequences P(m) = sum_k a_k z_k^m with a
// Hankel matrix pencil. Model order comes from the Hankel singular values.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "hfp/error.hpp"
#include "hfp/linalg.hpp"

namespace hfp {

struct PronySequence {
    std::vector<std::complex<double>> values;
    std::size_t shift_step = 1;

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

struct ExponentialTerm {
    std::complex<double> amplitude;
    std::complex<double> z;
    double energy = 0.0;
};

struct OrderEstimate {
    std::size_t rank = 0;
    std::vector<double> singular_values;
    double gap_ratio = 0.0;
};

struct PencilOptions {
    std::size_t rows = 0; // 0: ceil(M/2)
    double max_condition = 1e12;
};

struct PencilFit {
    std::vector<ExponentialTerm> terms; // descending |amplitude|
    double residual = 0.0;              // ||P - model|| / ||P||
    std::vector<double> singular_values;
};

inline std::size_t default_pencil_rows(std::size_t M) noexcept { return (M + 1) / 2; }

/// rows x (M - rows + 1), H(i, k) = P(i + k).
inline Matrix hankel(const PronySequence& seq, std::size_t rows) {
    const std::size_t M = seq.size();
    if (rows < 1 || rows > M) throw Error(ErrorCode::BadShape, "Hankel rows must lie in [1, M]");
    const std::size_t cols = M - rows + 1;
    Matrix H(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < cols; ++k) H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = seq.values[i + k];
    }
    return H;
}

/// Largest singular value a rows x cols matrix of i.i.d. complex noise with
/// per-entry standard deviation `entry_sigma` reaches, scaled by `gate`.
inline double noise_singular_floor(double entry_sigma, std::size_t rows, std::size_t cols, double gate) noexcept {
    return gate * entry_sigma * (std::sqrt(static_cast<double>(rows)) + std::sqrt(static_cast<double>(cols)));
}

/// Counts singular values of the ceil(M/2) x (floor(M/2)+1) Hankel matrix at
/// or above max(sigma_rel_tol * sigma_1, abs_floor).
inline OrderEstimate estimate_order(const PronySequence& seq, double sigma_rel_tol, double abs_floor = 0.0) {
    const std::size_t M = seq.size();
    if (M < 3) throw Error(ErrorCode::BadShape, "order estimation needs at least 3 samples");
    OrderEstimate est;
    est.singular_values = svd_small(hankel(seq, default_pencil_rows(M))).sigma;
    const auto& sv = est.singular_values;
    const double cut = std::max(sigma_rel_tol * sv.front(), abs_floor);
    for (double s : sv) {
        if (s > 0.0 && s >= cut) ++est.rank;
    }
    if (est.rank == 0) {
        est.gap_ratio = 0.0;
    } else if (est.rank == sv.size() || sv[est.rank] == 0.0) {
        est.gap_ratio = std::numeric_limits<double>::infinity();
    } else {
        est.gap_ratio = sv[est.rank - 1] / sv[est.rank];
    }
    return est;
}

/// Matrix pencil fit of q exponentials: rank-q signal subspace of the Hankel
/// column space, shift-invariance eigenproblem for the nodes, Vandermonde
/// least squares for the amplitudes.
inline PencilFit pencil_decompose(const PronySequence& seq, std::size_t q, const PencilOptions& opts = {}) {
    const std::size_t M = seq.size();
    if (q < 1 || 2 * q + 1 > M) throw Error(ErrorCode::BadShape, "fit order q must satisfy 1 <= q <= (M-1)/2");
    const std::size_t rows = opts.rows == 0 ? default_pencil_rows(M) : opts.rows;
    if (rows < q + 1 || M - rows + 1 < q) throw Error(ErrorCode::BadShape, "pencil rows incompatible with fit order");

    PencilFit fit;
    SvdResult h;
    SvdResult lower;
    try {
        h = svd_small(hankel(seq, rows));
        fit.singular_values = h.sigma;
        const Eigen::Index qi = static_cast<Eigen::Index>(q);
        const Eigen::Index ri = static_cast<Eigen::Index>(rows);
        const Matrix Uq = h.U.leftCols(qi);
        const Matrix U0 = Uq.topRows(ri - 1);
        const Matrix U1 = Uq.bottomRows(ri - 1);
        lower = svd_small(U0);
        if (lower.condition() > opts.max_condition) {
            throw Error(ErrorCode::IllConditionedPencil, "reduced pencil condition " + std::to_string(lower.condition()));
        }
        const Matrix reduced = pseudo_inverse(lower) * U1;
        std::vector<std::complex<double>> nodes = eigenvalues(reduced);
        std::erase_if(nodes, [](std::complex<double> z) { return std::abs(z) == 0.0 || !std::isfinite(std::abs(z)); });

        const auto Mi = static_cast<Eigen::Index>(M);
        const auto k = static_cast<Eigen::Index>(nodes.size());
        Matrix V(Mi, k);
        for (Eigen::Index c = 0; c < k; ++c) {
            std::complex<double> power{1.0, 0.0};
            for (Eigen::Index m = 0; m < Mi; ++m) {
                V(m, c) = power;
                power *= nodes[static_cast<std::size_t>(c)];
            }
        }
        Vector P(Mi);
        for (Eigen::Index m = 0; m < Mi; ++m) P(m) = seq.values[static_cast<std::size_t>(m)];
        Vector amps = k > 0 ? solve_least_squares(V, P) : Vector{};
        const double norm = P.norm();
        fit.residual = norm > 0.0 ? (P - (k > 0 ? Vector(V * amps) : Vector::Zero(Mi))).norm() / norm : 0.0;

        for (Eigen::Index c = 0; c < k; ++c) {
            fit.terms.push_back({amps(c), nodes[static_cast<std::size_t>(c)], std::abs(amps(c))});
        }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NoConvergence) throw Error(ErrorCode::SvdFailure, e.what());
        throw;
    }
    std::stable_sort(fit.terms.begin(), fit.terms.end(), [](const ExponentialTerm& a, const ExponentialTerm& b) {
        if (a.energy != b.energy) return a.energy > b.energy;
        return std::arg(a.z) < std::arg(b.z);
    });
    return fit;
}

/// Cheap pre-screen: a single tone in a bin keeps the shifted/unshifted ratio
/// on the unit circle.
inline bool no_collision_test(std::complex<double> ratio, double modulus_tol = 0.05) noexcept {
    return std::abs(std::abs(ratio) - 1.0) <= modulus_tol;
}

} // namespace hfp
