#pragma once

// Spectral synchronization certificates on R(S) = (M(S) + M(S)^T) / 2.

#include "kpin/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace kpin {

/// Margin required on top of a threshold before a certificate counts as strict.
inline constexpr double kStrictTol = 1e-8;

/// Smallest eigenvalue of a symmetric matrix. The input is symmetrized first.
/// A 0x0 matrix (every node pinned) has lambda_min = +inf.
inline double lambda_min(const Eigen::MatrixXd& r) {
    if (r.rows() != r.cols()) throw std::invalid_argument("lambda_min: matrix must be square");
    if (r.rows() == 0) return std::numeric_limits<double>::infinity();
    const Eigen::MatrixXd sym = 0.5 * (r + r.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw std::runtime_error("lambda_min: eigensolver failed");
    return solver.eigenvalues()(0);
}

inline Eigen::MatrixXd principal_submatrix(const Eigen::MatrixXd& r, std::span<const int> keep) {
    const auto k = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd out(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
            out(a, b) = r(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(b)]);
    return out;
}

struct Submatrix {
    Eigen::MatrixXd R;
    std::vector<EdgeId> retained;  ///< ascending edge ids kept
};

/// Removes the rows and columns of `removed` from the full R.
inline Submatrix submatrix_R(const Eigen::MatrixXd& r_full, std::span<const EdgeId> removed) {
    if (r_full.rows() != r_full.cols()) throw std::invalid_argument("submatrix_R: matrix must be square");
    std::vector<bool> drop(static_cast<std::size_t>(r_full.rows()), false);
    for (EdgeId e : removed) {
        if (e < 0 || e >= r_full.rows()) throw std::out_of_range("submatrix_R: edge index out of range");
        drop[static_cast<std::size_t>(e)] = true;
    }
    Submatrix s;
    for (EdgeId e = 0; e < r_full.rows(); ++e) {
        if (!drop[static_cast<std::size_t>(e)]) s.retained.push_back(e);
    }
    s.R = principal_submatrix(r_full, s.retained);
    return s;
}

/// Uniform (S-independent) upper bound on ||D(S)^T omega(S)||_2:
/// sqrt(sum over edges (j,i) of max{(w_j - w_i)^2, w_i^2, w_j^2}).
inline double hetero_threshold(const SignedDigraph& g, const Eigen::VectorXd& omega) {
    if (omega.size() != g.num_nodes()) throw GraphError("frequency vector length must equal node count");
    double sum = 0.0;
    for (const Edge& e : g.edges()) {
        const double wj = omega(e.src);
        const double wi = omega(e.dst);
        sum += std::max({(wj - wi) * (wj - wi), wi * wi, wj * wj});
    }
    return std::sqrt(sum);
}

/// ||D(S)^T omega(S)||_2 on a reduced system.
inline double dtw_norm(const ReducedSystem& rs) {
    if (rs.num_free_edges() == 0) return 0.0;
    return (rs.DS.transpose() * rs.omegaS).norm();
}

struct Certificate {
    double lambda_min = 0.0;
    double delta = 0.0;
    double margin = 0.0;  ///< lambda_min - delta
    bool satisfied = false;
};

/// lambda_min(R(S)) > delta + kStrictTol.
inline Certificate certify(const ReducedSystem& rs, double delta) {
    Certificate c;
    c.lambda_min = lambda_min(rs.RS);
    c.delta = delta;
    c.margin = c.lambda_min - delta;
    c.satisfied = c.lambda_min > delta + kStrictTol;
    return c;
}

inline Certificate certify(const SignedDigraph& g, const InputSet& s, double delta) {
    return certify(reduce(g, s), delta);
}

}  // namespace kpin
