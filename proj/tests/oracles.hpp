#pragma once

// Reference computations written directly from the entrywise definitions,
// sharing no code with the library.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>
#include <vector>

namespace oracle {

struct E {
    int src;
    int dst;
    double w;
};

// M(S)_{ab} = sum over free nodes i of D_{i a} * Dhat_{i b} * K_b, with a, b
// running over edges whose head is free, in the order given.
inline Eigen::MatrixXd brute_M(int n, const std::vector<E>& edges, const std::vector<bool>& pinned) {
    std::vector<E> kept;
    for (const E& e : edges)
        if (!pinned[static_cast<std::size_t>(e.dst)]) kept.push_back(e);
    const auto m = static_cast<Eigen::Index>(kept.size());
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                if (pinned[static_cast<std::size_t>(i)]) continue;
                const E& ea = kept[static_cast<std::size_t>(a)];
                const E& eb = kept[static_cast<std::size_t>(b)];
                const double d = (i == ea.dst ? 1.0 : 0.0) - (i == ea.src ? 1.0 : 0.0);
                const double dh = i == eb.dst ? 1.0 : 0.0;
                s += d * dh * eb.w;
            }
            M(a, b) = s;
        }
    }
    return M;
}

inline Eigen::MatrixXd brute_R(int n, const std::vector<E>& edges, const std::vector<bool>& pinned) {
    const Eigen::MatrixXd M = brute_M(n, edges, pinned);
    return 0.5 * (M + M.transpose());
}

/// Cyclic Jacobi rotations; eigenvalues in ascending order.
inline std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a) {
    const auto n = a.rows();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) ev[static_cast<std::size_t>(i)] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

inline double jacobi_lambda_min(const Eigen::MatrixXd& a) {
    if (a.rows() == 0) return std::numeric_limits<double>::infinity();
    return jacobi_eigenvalues(a).front();
}

/// ||D(S)^T omega(S)||_2 with pinned frequencies and phases set to zero.
inline double brute_dtw(const std::vector<E>& edges, const std::vector<double>& omega, const std::vector<bool>& pinned) {
    double s = 0.0;
    for (const E& e : edges) {
        if (pinned[static_cast<std::size_t>(e.dst)]) continue;
        const double wi = omega[static_cast<std::size_t>(e.dst)];
        const double wj = pinned[static_cast<std::size_t>(e.src)] ? 0.0 : omega[static_cast<std::size_t>(e.src)];
        s += (wi - wj) * (wi - wj);
    }
    return std::sqrt(s);
}

/// theta' = -sin(theta): tan(theta/2) = tan(theta0/2) e^{-t}.
inline double decay_solution(double theta0, double t) { return 2.0 * std::atan(std::tan(theta0 / 2.0) * std::exp(-t)); }

/// Largest uniform shrink of the per-edge intervals that still admits a
/// directed cycle with the given signs: the differences must sum to zero.
inline double cycle_max_margin(const std::vector<int>& signs) {
    const double half_pi = std::numbers::pi / 2.0;
    double lo = 0.0, hi = 0.0;
    for (int s : signs) {
        lo += s > 0 ? -half_pi : half_pi;
        hi += s > 0 ? half_pi : 3.0 * half_pi;
    }
    const double n = static_cast<double>(signs.size());
    return std::min(-lo, hi) / n;
}

}  // namespace oracle
