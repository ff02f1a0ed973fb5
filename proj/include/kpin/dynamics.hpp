#pragma once

// Pinned Kuramoto dynamics
//
//     theta_dot = omega(S) - Dhat(S) K(S) sin(D(S)^T theta),   theta_i = 0 for i in S,
//
// integrated with fixed-step RK4, plus the diagnostics used to check
// synchronization certificates against simulation.

#include "kpin/feasibility.hpp"
#include "kpin/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kpin {

struct SimConfig {
    double step_h = 0.01;
    double horizon_T = 200.0;
    double detector_tol = 1e-6;
    double detector_window = 5.0;

    void validate() const {
        if (!(step_h > 0.0) || !std::isfinite(step_h)) throw std::invalid_argument("step_h must be positive");
        if (!(horizon_T > step_h) || !std::isfinite(horizon_T)) throw std::invalid_argument("horizon_T must exceed step_h");
        if (!(detector_tol > 0.0)) throw std::invalid_argument("detector_tol must be positive");
        if (!(detector_window >= 0.0)) throw std::invalid_argument("detector_window must be nonnegative");
    }
};

/// One row per stored time. `z` columns follow `edge_map` (the reduced
/// system's edge order); `theta` and `theta_dot` cover all n nodes.
struct Trajectory {
    std::vector<double> times;
    Eigen::MatrixXd theta;
    Eigen::MatrixXd z;
    Eigen::MatrixXd theta_dot;
    std::vector<double> V_series;
    std::vector<double> sinz_inf_series;
    std::vector<double> sinz_l2sq_series;
    std::vector<EdgeId> edge_map;
    std::vector<NodeId> node_map;
    std::vector<NodeId> inputs;
    double step_h = 0.0;

    [[nodiscard]] int num_nodes() const { return static_cast<int>(theta.cols()); }
    [[nodiscard]] std::size_t size() const { return times.size(); }
};

/// V(z) = sum_e (1 - cos z_e).
inline double storage_function(const Eigen::VectorXd& z) { return (1.0 - z.array().cos()).sum(); }

namespace detail {

// Per-edge view of the reduced system. Rows index free nodes; a pinned tail
// is -1 and contributes theta = 0.
struct PinnedField {
    std::vector<int> head_row;
    std::vector<int> tail_row;
    std::vector<double> k;
    Eigen::VectorXd omega;  // free nodes only

    void edge_diffs(const Eigen::VectorXd& x, Eigen::VectorXd& z) const {
        for (std::size_t e = 0; e < k.size(); ++e) {
            const double tail = tail_row[e] < 0 ? 0.0 : x(tail_row[e]);
            z(static_cast<Eigen::Index>(e)) = x(head_row[e]) - tail;
        }
    }

    void rhs(const Eigen::VectorXd& x, Eigen::VectorXd& out, Eigen::VectorXd& z) const {
        edge_diffs(x, z);
        out = omega;
        for (std::size_t e = 0; e < k.size(); ++e) {
            out(head_row[e]) -= k[e] * std::sin(z(static_cast<Eigen::Index>(e)));
        }
    }
};

inline PinnedField make_field(const SignedDigraph& g, const ReducedSystem& rs) {
    PinnedField f;
    std::vector<int> row_of(static_cast<std::size_t>(g.num_nodes()), -1);
    for (int r = 0; r < rs.num_free_nodes(); ++r) row_of[static_cast<std::size_t>(rs.node_map[static_cast<std::size_t>(r)])] = r;
    for (EdgeId e : rs.edge_map) {
        const Edge& ed = g.edge(e);
        f.head_row.push_back(row_of[static_cast<std::size_t>(ed.dst)]);
        f.tail_row.push_back(row_of[static_cast<std::size_t>(ed.src)]);
        f.k.push_back(ed.weight);
    }
    f.omega = rs.omegaS;
    return f;
}

}  // namespace detail

/// Fixed-step RK4 on the non-input coordinates. Throws std::runtime_error if
/// the state stops being finite.
inline Trajectory simulate(const SignedDigraph& g, const Eigen::VectorXd& omega, const InputSet& s,
                           const Eigen::VectorXd& theta0, const SimConfig& cfg = {}) {
    cfg.validate();
    const int n = g.num_nodes();
    if (omega.size() != n) throw std::invalid_argument("simulate: omega length must equal node count");
    if (theta0.size() != n) throw std::invalid_argument("simulate: theta0 length must equal node count");
    if (s.universe() != n) throw std::invalid_argument("simulate: input set universe must equal node count");
    for (NodeId i : s.members()) {
        if (theta0(i) != 0.0) throw std::invalid_argument("simulate: theta0 must vanish on input nodes");
    }
    if (!theta0.allFinite() || !omega.allFinite()) throw std::invalid_argument("simulate: non-finite initial data");

    Eigen::VectorXd om = omega;
    for (NodeId i : s.members()) om(i) = 0.0;
    const ReducedSystem rs = reduce(g, om, s);
    const detail::PinnedField field = detail::make_field(g, rs);
    const int nf = rs.num_free_nodes();
    const int mf = rs.num_free_edges();

    const auto steps = static_cast<long>(std::llround(cfg.horizon_T / cfg.step_h));
    const double h = cfg.step_h;

    Trajectory tr;
    tr.edge_map = rs.edge_map;
    tr.node_map = rs.node_map;
    tr.inputs = s.members();
    tr.step_h = h;
    tr.times.reserve(static_cast<std::size_t>(steps + 1));
    tr.theta = Eigen::MatrixXd::Zero(steps + 1, n);
    tr.z.resize(steps + 1, mf);
    tr.theta_dot = Eigen::MatrixXd::Zero(steps + 1, n);
    tr.V_series.reserve(static_cast<std::size_t>(steps + 1));
    tr.sinz_inf_series.reserve(static_cast<std::size_t>(steps + 1));
    tr.sinz_l2sq_series.reserve(static_cast<std::size_t>(steps + 1));

    Eigen::VectorXd x(nf);
    for (int r = 0; r < nf; ++r) x(r) = theta0(rs.node_map[static_cast<std::size_t>(r)]);

    Eigen::VectorXd k1(nf), k2(nf), k3(nf), k4(nf), tmp(nf), z(mf);
    auto record = [&](long k) {
        field.rhs(x, k1, z);  // k1 doubles as theta_dot at the stored state
        tr.times.push_back(static_cast<double>(k) * h);
        for (int r = 0; r < nf; ++r) {
            const NodeId v = rs.node_map[static_cast<std::size_t>(r)];
            tr.theta(k, v) = x(r);
            tr.theta_dot(k, v) = k1(r);
        }
        tr.z.row(k) = z.transpose();
        tr.V_series.push_back(storage_function(z));
        const Eigen::ArrayXd sz = z.array().sin();
        tr.sinz_inf_series.push_back(mf == 0 ? 0.0 : sz.abs().maxCoeff());
        tr.sinz_l2sq_series.push_back(sz.square().sum());
    };

    record(0);
    for (long k = 1; k <= steps; ++k) {
        // k1 holds f(x) from record()
        tmp = x + 0.5 * h * k1;
        field.rhs(tmp, k2, z);
        tmp = x + 0.5 * h * k2;
        field.rhs(tmp, k3, z);
        tmp = x + h * k3;
        field.rhs(tmp, k4, z);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!x.allFinite()) {
            throw std::runtime_error("simulate: state became non-finite at t = " +
                                     std::to_string(static_cast<double>(k) * h));
        }
        record(k);
    }
    return tr;
}

// =============================================================================
// Detectors
// =============================================================================

struct SyncVerdict {
    bool synchronized = false;
    double residual = 0.0;  ///< trailing-window max of the sup norm
};

namespace detail {

inline long window_start(const Trajectory& tr, const SimConfig& cfg) {
    cfg.validate();
    if (tr.times.empty()) throw std::invalid_argument("empty trajectory");
    const double t_end = tr.times.back();
    if (t_end - tr.times.front() < cfg.detector_window - 1e-12) {
        throw std::invalid_argument("trajectory is shorter than the detector window");
    }
    const double from = t_end - cfg.detector_window - 1e-9;
    const auto it = std::lower_bound(tr.times.begin(), tr.times.end(), from);
    return static_cast<long>(it - tr.times.begin());
}

inline SyncVerdict trailing_sup(const Eigen::MatrixXd& series, long from, double tol) {
    SyncVerdict v;
    if (series.cols() > 0) {
        v.residual = series.bottomRows(series.rows() - from).cwiseAbs().maxCoeff();
    }
    v.synchronized = v.residual < tol;
    return v;
}

}  // namespace detail

/// Trailing-window max of ||theta_dot||_inf below the tolerance.
inline SyncVerdict detect_frequency_sync(const Trajectory& tr, const SimConfig& cfg = {}) {
    return detail::trailing_sup(tr.theta_dot, detail::window_start(tr, cfg), cfg.detector_tol);
}

/// Trailing-window max of ||theta||_inf below the tolerance (pinned networks
/// synchronize to 0).
inline SyncVerdict detect_phase_sync(const Trajectory& tr, const SimConfig& cfg = {}) {
    return detail::trailing_sup(tr.theta, detail::window_start(tr, cfg), cfg.detector_tol);
}

// =============================================================================
// Bound monitors
// =============================================================================

struct BoundsReport {
    double sup_sinz_inf = 0.0;
    bool stayed_interior = true;
    std::optional<double> first_violation_time;
    std::optional<EdgeId> first_violation_edge;
};

/// sup_t ||sin z(t)||_inf and whether every z_e(t) stayed in its open interval.
inline BoundsReport monitor_bounds(const Trajectory& tr, const SignedDigraph& g) {
    BoundsReport r;
    for (double v : tr.sinz_inf_series) r.sup_sinz_inf = std::max(r.sup_sinz_inf, v);
    std::vector<EdgeInterval> iv;
    for (EdgeId e : tr.edge_map) iv.push_back(interval_for(e, g.edge(e).weight));
    for (std::size_t k = 0; k < tr.size() && r.stayed_interior; ++k) {
        for (std::size_t c = 0; c < iv.size(); ++c) {
            if (!iv[c].contains(tr.z(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)))) {
                r.stayed_interior = false;
                r.first_violation_time = tr.times[k];
                r.first_violation_edge = iv[c].edge;
                break;
            }
        }
    }
    return r;
}

/// Left Riemann sum of ||sin z||_2^2 against (||D(S)^T omega(S)||_2 / lambda)^2 * t,
/// evaluated at the horizon and as the worst ratio over the grid.
struct EnergyReport {
    double integral = 0.0;      ///< sum_{k<N} ||sin z(t_k)||^2 h
    double bound = 0.0;         ///< (dtw / lambda)^2 * t_N
    double ratio = 0.0;         ///< integral / bound at the horizon
    double worst_ratio = 0.0;   ///< max_k of the same ratio at intermediate times
    double worst_ratio_time = 0.0;
};

inline EnergyReport energy_bound(const Trajectory& tr, double lambda, double dtw) {
    if (!(lambda > 0.0)) throw std::invalid_argument("energy_bound: lambda must be positive");
    EnergyReport r;
    const double slope = (dtw / lambda) * (dtw / lambda);
    double acc = 0.0;
    for (std::size_t k = 1; k < tr.size(); ++k) {
        acc += tr.sinz_l2sq_series[k - 1] * tr.step_h;
        const double b = slope * tr.times[k];
        const double q = b > 0.0 ? acc / b : (acc > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        if (q > r.worst_ratio) {
            r.worst_ratio = q;
            r.worst_ratio_time = tr.times[k];
        }
    }
    r.integral = acc;
    r.bound = slope * (tr.times.empty() ? 0.0 : tr.times.back());
    r.ratio = r.bound > 0.0 ? acc / r.bound : (acc > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return r;
}

// =============================================================================
// Metzler diagnostic
// =============================================================================

/// Weights K_e cos z_e at or below this count as nonpositive.
inline constexpr double kWeightTol = 1e-12;

struct MetzlerSample {
    double time = 0.0;
    double min_weight = 0.0;    ///< min_e K_e cos z_e
    double max_row_sum = 0.0;   ///< max |row sum| of -Dhat K_c D^T
    bool metzler = false;       ///< every weight > kWeightTol
};

/// -Dhat K_c D^T over all nodes, restricted to the edges of the reduced
/// system, with K_c = diag(K_e cos z_e).
inline Eigen::MatrixXd cos_weighted_laplacian(const SignedDigraph& g, const std::vector<EdgeId>& edges,
                                              const Eigen::VectorXd& z) {
    const int n = g.num_nodes();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t c = 0; c < edges.size(); ++c) {
        const Edge& e = g.edge(edges[c]);
        const double w = e.weight * std::cos(z(static_cast<Eigen::Index>(c)));
        a(e.dst, e.dst) -= w;
        a(e.dst, e.src) += w;
    }
    return a;
}

inline MetzlerSample metzler_at(const SignedDigraph& g, const std::vector<EdgeId>& edges, const Eigen::VectorXd& z,
                                double time = 0.0) {
    MetzlerSample m;
    m.time = time;
    m.min_weight = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < edges.size(); ++c) {
        m.min_weight = std::min(m.min_weight, g.edge(edges[c]).weight * std::cos(z(static_cast<Eigen::Index>(c))));
    }
    const Eigen::MatrixXd a = cos_weighted_laplacian(g, edges, z);
    m.max_row_sum = a.rows() == 0 ? 0.0 : a.rowwise().sum().cwiseAbs().maxCoeff();
    m.metzler = m.min_weight > kWeightTol;
    return m;
}

struct MetzlerReport {
    int samples = 0;
    bool all_positive = true;
    double min_weight = std::numeric_limits<double>::infinity();
    double max_row_sum = 0.0;
    std::optional<double> first_nonpositive_time;
};

/// Samples every `stride` stored steps (and the last one).
inline MetzlerReport metzler_diagnostic(const Trajectory& tr, const SignedDigraph& g, const InputSet& s,
                                        long stride = 100) {
    if (stride < 1) throw std::invalid_argument("metzler_diagnostic: stride must be positive");
    if (s.members() != tr.inputs) throw std::invalid_argument("metzler_diagnostic: input set does not match trajectory");
    MetzlerReport r;
    const auto last = static_cast<long>(tr.size()) - 1;
    for (long k = 0; k <= last; k = (k == last) ? last + 1 : std::min(k + stride, last)) {
        const MetzlerSample m = metzler_at(g, tr.edge_map, tr.z.row(k).transpose(), tr.times[static_cast<std::size_t>(k)]);
        ++r.samples;
        r.min_weight = std::min(r.min_weight, m.min_weight);
        r.max_row_sum = std::max(r.max_row_sum, m.max_row_sum);
        if (!m.metzler && r.all_positive) {
            r.all_positive = false;
            r.first_nonpositive_time = m.time;
        }
    }
    return r;
}

}  // namespace kpin
