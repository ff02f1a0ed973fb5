#pragma once

// Admissible initial phase differences.
//
// Every edge e = (j -> i) constrains z_e = theta_i - theta_j to an open interval:
// (-pi/2, pi/2) when K_e > 0 and (pi/2, 3pi/2) when K_e < 0. Intervals are taken
// on the real line (phases are not wrapped). Each constraint is a difference
// constraint, so the linear feasibility problem over theta is decided exactly
// by negative-cycle detection on the constraint graph.

#include "kpin/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kpin {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;
inline constexpr double kDefaultMargin = 0.05;

struct EdgeInterval {
    EdgeId edge = 0;
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] bool contains(double z, double margin = 0.0) const {
        return z > lo + margin && z < hi - margin;
    }
    [[nodiscard]] double slack(double z) const { return std::min(z - lo, hi - z); }
};

inline EdgeInterval interval_for(EdgeId e, double weight) {
    if (weight > 0.0) return {e, -kHalfPi, kHalfPi};
    return {e, kHalfPi, 3.0 * kHalfPi};
}

inline std::vector<EdgeInterval> assumption1_intervals(const SignedDigraph& g) {
    std::vector<EdgeInterval> out;
    out.reserve(static_cast<std::size_t>(g.num_edges()));
    for (EdgeId e = 0; e < g.num_edges(); ++e) out.push_back(interval_for(e, g.edge(e).weight));
    return out;
}

// =============================================================================
// Linear feasibility oracle
// =============================================================================

struct LpReport {
    bool feasible = false;
    std::optional<Eigen::VectorXd> witness;  ///< theta(0), when feasible
    double witness_margin = 0.0;  ///< min distance of the witness to an open-interval boundary
    double max_margin = 0.0;      ///< largest uniform shrink that stays feasible (0 if none)
    double requested_margin = 0.0;
};

namespace detail {

// x_v - x_u <= w for each arc (u, v, w). Node `n` is a zero reference used for
// pinned nodes. Returns potentials, or nothing on a negative cycle.
inline std::optional<std::vector<double>> solve_difference_constraints(
    int nodes, const std::vector<std::tuple<int, int, double>>& arcs) {
    std::vector<double> dist(static_cast<std::size_t>(nodes), 0.0);
    constexpr double kRelaxTol = 1e-12;
    for (int round = 0; round < nodes; ++round) {
        bool changed = false;
        for (const auto& [u, v, w] : arcs) {
            const double cand = dist[static_cast<std::size_t>(u)] + w;
            if (cand < dist[static_cast<std::size_t>(v)] - kRelaxTol) {
                dist[static_cast<std::size_t>(v)] = cand;
                changed = true;
            }
        }
        if (!changed) return dist;
    }
    return std::nullopt;
}

struct ConstraintSystem {
    const SignedDigraph* g = nullptr;
    std::vector<EdgeInterval> intervals;
    std::vector<NodeId> pinned;

    [[nodiscard]] std::optional<Eigen::VectorXd> solve(double shrink) const {
        const int n = g->num_nodes();
        std::vector<std::tuple<int, int, double>> arcs;
        for (const EdgeInterval& iv : intervals) {
            const Edge& e = g->edge(iv.edge);
            const double lo = iv.lo + shrink;
            const double hi = iv.hi - shrink;
            if (lo > hi) return std::nullopt;
            // theta_dst - theta_src <= hi ; theta_src - theta_dst <= -lo
            arcs.emplace_back(e.src, e.dst, hi);
            arcs.emplace_back(e.dst, e.src, -lo);
        }
        for (NodeId p : pinned) {
            arcs.emplace_back(n, p, 0.0);
            arcs.emplace_back(p, n, 0.0);
        }
        auto dist = solve_difference_constraints(n + 1, arcs);
        if (!dist) return std::nullopt;
        const double ref = pinned.empty() ? (*dist)[0] : (*dist)[static_cast<std::size_t>(n)];
        Eigen::VectorXd theta(n);
        for (int i = 0; i < n; ++i) theta(i) = (*dist)[static_cast<std::size_t>(i)] - ref;
        for (NodeId p : pinned) theta(p) = 0.0;
        return theta;
    }

    [[nodiscard]] double slack(const Eigen::VectorXd& theta) const {
        double s = std::numeric_limits<double>::infinity();
        for (const EdgeInterval& iv : intervals) {
            const Edge& e = g->edge(iv.edge);
            s = std::min(s, iv.slack(theta(e.dst) - theta(e.src)));
        }
        return s;
    }
};

inline LpReport run_oracle(const ConstraintSystem& sys, double margin) {
    if (!(margin >= 0.0 && margin < kHalfPi / 2.0)) {
        throw std::invalid_argument("margin must lie in [0, pi/4)");
    }
    LpReport r;
    r.requested_margin = margin;
    if (sys.intervals.empty()) {
        r.feasible = true;
        r.max_margin = kHalfPi;
        Eigen::VectorXd zero = Eigen::VectorXd::Zero(sys.g->num_nodes());
        r.witness = zero;
        r.witness_margin = std::numeric_limits<double>::infinity();
        return r;
    }
    // Every interval has width pi, so no shrink beyond pi/2 is possible.
    double lo = 0.0, hi = kHalfPi;
    if (!sys.solve(0.0)) {
        r.max_margin = 0.0;
        return r;
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (sys.solve(mid) ? lo : hi) = mid;
    }
    r.max_margin = lo;
    if (lo <= margin || lo <= 1e-12) return r;
    // Solve strictly inside the requested shrink so the witness is interior.
    auto theta = sys.solve(0.5 * (margin + lo));
    if (!theta) return r;
    r.feasible = true;
    r.witness_margin = sys.slack(*theta);
    r.witness = std::move(*theta);
    return r;
}

}  // namespace detail

/// Decides whether some theta(0) places every z_e(0) inside its interval
/// shrunk by `margin`. Input nodes play no role here.
inline LpReport lp_feasibility_oracle(const SignedDigraph& g, double margin = kDefaultMargin) {
    detail::ConstraintSystem sys{&g, assumption1_intervals(g), {}};
    return detail::run_oracle(sys, margin);
}

/// Same, with theta_i(0) = 0 for i in S and only the edges of the reduced
/// system (heads outside S) constrained.
inline LpReport lp_feasibility_oracle(const SignedDigraph& g, double margin, const InputSet& s) {
    detail::ConstraintSystem sys{&g, {}, s.members()};
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
        if (!s.contains(g.edge(e).dst)) sys.intervals.push_back(interval_for(e, g.edge(e).weight));
    }
    return detail::run_oracle(sys, margin);
}

// =============================================================================
// Parity conditions
// =============================================================================

namespace detail {

inline int mod4(int x) { return ((x % 4) + 4) % 4; }

// Underlying simple graph: unordered pairs with a sign (+1, -1, or 0 when the
// two orientations disagree).
struct Link {
    NodeId a;
    NodeId b;
    int sign;
};

inline std::vector<Link> links_of(const SignedDigraph& g) {
    std::map<std::pair<NodeId, NodeId>, int> sign;
    for (const Edge& e : g.edges()) {
        const auto key = std::minmax(e.src, e.dst);
        const int s = e.weight > 0 ? 1 : -1;
        auto [it, inserted] = sign.emplace(key, s);
        if (!inserted && it->second != s) it->second = 0;
    }
    std::vector<Link> out;
    for (const auto& [k, s] : sign) out.push_back({k.first, k.second, s});
    return out;
}

inline bool single_cycle(int n, const std::vector<Link>& links) {
    if (n < 3 || static_cast<int>(links.size()) != n) return false;
    std::vector<int> deg(static_cast<std::size_t>(n), 0);
    for (const Link& l : links) {
        ++deg[static_cast<std::size_t>(l.a)];
        ++deg[static_cast<std::size_t>(l.b)];
    }
    if (!std::all_of(deg.begin(), deg.end(), [](int d) { return d == 2; })) return false;
    // 2-regular and connected means one cycle.
    std::vector<Edge> tmp;
    for (const Link& l : links) tmp.push_back({l.a, l.b, 1.0});
    return SignedDigraph(n, tmp).weakly_connected();
}

inline bool is_tree(int n, const std::vector<Link>& links) {
    if (static_cast<int>(links.size()) != n - 1) return false;
    std::vector<Edge> tmp;
    for (const Link& l : links) tmp.push_back({l.a, l.b, 1.0});
    return SignedDigraph(n, tmp).weakly_connected();
}

}  // namespace detail

/// Path condition for an edge of sign `edge_sign` against one alternative
/// path with `ep` positive and `en` negative edges. When ep == en either
/// branch may be satisfied.
inline bool path_parity_ok(int edge_sign, int ep, int en) {
    const int d = ep - en;
    if (edge_sign > 0) {
        const bool pos = d >= 0 && (detail::mod4(d) == 0 || detail::mod4(d) == 1);
        const bool neg = d <= 0 && (detail::mod4(-d) == 1 || detail::mod4(-d) == 3);
        return pos || neg;
    }
    const bool pos = d >= 0 && (detail::mod4(d) == 2 || detail::mod4(d) == 3);
    const bool neg = d <= 0 && (detail::mod4(-d) == 1 || detail::mod4(-d) == 2);
    return pos || neg;
}

/// Cycle condition on the positive/negative edge counts.
inline bool cycle_parity_ok(int ep, int en) {
    const int d = ep - en;
    return (d >= 1 && (detail::mod4(d) == 1 || detail::mod4(d) == 2)) ||
           (-d >= 2 && (detail::mod4(-d) == 2 || detail::mod4(-d) == 3));
}

/// Parity verdict for a graph whose underlying simple graph is one cycle
/// through every node.
inline bool check_cycle_parity(const SignedDigraph& g) {
    const auto links = detail::links_of(g);
    if (!detail::single_cycle(g.num_nodes(), links)) {
        throw GraphError("check_cycle_parity: graph is not a single cycle");
    }
    if (!g.undirected() && static_cast<int>(links.size()) != g.num_edges()) {
        throw GraphError("check_cycle_parity: cycle must be oriented (no antiparallel pairs)");
    }
    int ep = 0, en = 0;
    for (const auto& l : links) {
        if (l.sign == 0) return false;
        (l.sign > 0 ? ep : en) += 1;
    }
    return cycle_parity_ok(ep, en);
}

struct LinkDiagnostic {
    NodeId a = 0;
    NodeId b = 0;
    int sign = 0;
    int paths_checked = 0;
    bool passed = true;
    std::vector<NodeId> failing_path;  ///< first offending path, if any
    int failing_ep = 0;
    int failing_en = 0;
};

struct ParityReport {
    bool verdict = false;
    std::string method;  ///< "cycle", "tree" or "paths"
    std::vector<LinkDiagnostic> links;
};

inline constexpr int kDefaultParityCap = 12;

/// Path-parity sufficient condition. Trees pass vacuously, single cycles use
/// the cycle counts, anything else enumerates all simple paths of length > 1
/// between the endpoints of each link.
inline ParityReport check_parity_general(const SignedDigraph& g, int node_cap = kDefaultParityCap) {
    if (g.num_nodes() > node_cap) {
        throw std::invalid_argument("check_parity_general: " + std::to_string(g.num_nodes()) +
                                    " nodes exceeds the cap of " + std::to_string(node_cap));
    }
    const int n = g.num_nodes();
    const auto links = detail::links_of(g);
    ParityReport rep;

    for (const auto& l : links) {
        LinkDiagnostic d;
        d.a = l.a;
        d.b = l.b;
        d.sign = l.sign;
        d.passed = l.sign != 0;  // antiparallel edges of opposite sign never fit
        rep.links.push_back(d);
    }

    if (detail::is_tree(n, links)) {
        rep.method = "tree";
        rep.verdict = std::all_of(rep.links.begin(), rep.links.end(), [](const auto& d) { return d.passed; });
        return rep;
    }
    if (detail::single_cycle(n, links)) {
        rep.method = "cycle";
        int ep = 0, en = 0;
        for (const auto& l : links) (l.sign > 0 ? ep : en) += (l.sign != 0);
        const bool ok = cycle_parity_ok(ep, en);
        for (auto& d : rep.links) {
            d.paths_checked = 1;
            if (!ok && d.passed) {
                d.passed = false;
                d.failing_ep = ep;
                d.failing_en = en;
            }
        }
        rep.verdict = std::all_of(rep.links.begin(), rep.links.end(), [](const auto& d) { return d.passed; });
        return rep;
    }

    rep.method = "paths";
    std::vector<std::vector<std::pair<NodeId, int>>> adj(static_cast<std::size_t>(n));
    for (const auto& l : links) {
        adj[static_cast<std::size_t>(l.a)].push_back({l.b, l.sign});
        adj[static_cast<std::size_t>(l.b)].push_back({l.a, l.sign});
    }
    for (auto& d : rep.links) {
        if (!d.passed) continue;
        std::vector<bool> on_path(static_cast<std::size_t>(n), false);
        std::vector<NodeId> path{d.a};
        on_path[static_cast<std::size_t>(d.a)] = true;
        bool failed = false;
        // Depth-first enumeration of simple paths a -> b, skipping the direct link.
        auto dfs = [&](auto&& self, NodeId u, int ep, int en) -> void {
            if (failed) return;
            for (const auto& [v, s] : adj[static_cast<std::size_t>(u)]) {
                if (on_path[static_cast<std::size_t>(v)]) continue;
                if (u == d.a && v == d.b) continue;
                const int nep = ep + (s > 0);
                const int nen = en + (s < 0);
                if (v == d.b) {
                    ++d.paths_checked;
                    if (s == 0 || !path_parity_ok(d.sign, nep, nen)) {
                        failed = true;
                        d.failing_path = path;
                        d.failing_path.push_back(v);
                        d.failing_ep = nep;
                        d.failing_en = nen;
                        return;
                    }
                    continue;
                }
                if (s == 0) continue;
                on_path[static_cast<std::size_t>(v)] = true;
                path.push_back(v);
                self(self, v, nep, nen);
                path.pop_back();
                on_path[static_cast<std::size_t>(v)] = false;
                if (failed) return;
            }
        };
        dfs(dfs, d.a, 0, 0);
        d.passed = !failed;
    }
    rep.verdict = std::all_of(rep.links.begin(), rep.links.end(), [](const auto& d) { return d.passed; });
    return rep;
}

struct FeasibilityReport {
    std::optional<ParityReport> parity;  ///< empty when the node cap is exceeded
    std::string parity_error;
    LpReport lp;
};

inline FeasibilityReport check_feasibility(const SignedDigraph& g, double margin = kDefaultMargin,
                                           int parity_cap = kDefaultParityCap) {
    FeasibilityReport r;
    r.lp = lp_feasibility_oracle(g, margin);
    try {
        r.parity = check_parity_general(g, parity_cap);
    } catch (const std::invalid_argument& e) {
        r.parity_error = e.what();
    }
    return r;
}

// =============================================================================
// Cycle audit
// =============================================================================

struct CycleAuditEntry {
    int length = 0;
    std::string signs;  ///< '+'/'-' per edge of the cycle 0 -> 1 -> ... -> 0
    int ep = 0;
    int en = 0;
    bool parity = false;
    bool lp_feasible = false;

    [[nodiscard]] bool counterexample() const { return parity && !lp_feasible; }
    [[nodiscard]] bool conservative() const { return !parity && lp_feasible; }
};

inline SignedDigraph signed_cycle(const std::string& signs) {
    const int n = static_cast<int>(signs.size());
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, signs[static_cast<std::size_t>(i)] == '+' ? 1.0 : -1.0});
    return SignedDigraph(n, std::move(edges));
}

/// Every sign pattern of every oriented cycle with length in [min_len, max_len]:
/// cycle parity verdict against the oracle on all cycle edges.
inline std::vector<CycleAuditEntry> cycle_parity_audit(int min_len, int max_len, double margin = kDefaultMargin) {
    std::vector<CycleAuditEntry> out;
    for (int len = min_len; len <= max_len; ++len) {
        for (std::uint32_t mask = 0; mask < (1u << len); ++mask) {
            std::string signs(static_cast<std::size_t>(len), '+');
            for (int i = 0; i < len; ++i)
                if (mask & (1u << i)) signs[static_cast<std::size_t>(i)] = '-';
            const SignedDigraph g = signed_cycle(signs);
            CycleAuditEntry a;
            a.length = len;
            a.signs = signs;
            a.en = static_cast<int>(std::count(signs.begin(), signs.end(), '-'));
            a.ep = len - a.en;
            a.parity = check_cycle_parity(g);
            a.lp_feasible = lp_feasibility_oracle(g, margin).feasible;
            out.push_back(std::move(a));
        }
    }
    return out;
}

// =============================================================================
// Initial phase sampler
// =============================================================================

/// theta(0) with theta_i = 0 on S and every reduced-system edge strictly
/// inside its interval shrunk by `margin`: the oracle witness plus uniform
/// noise, resampled until admissible. Empty when no such theta exists.
inline std::optional<Eigen::VectorXd> sample_initial_phases(const SignedDigraph& g, const InputSet& s,
                                                             std::uint64_t seed, double margin = kDefaultMargin,
                                                             double noise = 0.5) {
    if (!(margin > 0.0)) throw std::invalid_argument("sample_initial_phases: margin must be positive");
    const LpReport lp = lp_feasibility_oracle(g, margin, s);
    if (!lp.feasible) return std::nullopt;
    const Eigen::VectorXd& base = *lp.witness;

    std::vector<EdgeInterval> checks;
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
        if (!s.contains(g.edge(e).dst)) checks.push_back(interval_for(e, g.edge(e).weight));
    }
    auto admissible = [&](const Eigen::VectorXd& th) {
        return std::all_of(checks.begin(), checks.end(), [&](const EdgeInterval& iv) {
            const Edge& e = g.edge(iv.edge);
            return iv.contains(th(e.dst) - th(e.src), margin);
        });
    };

    std::mt19937_64 rng(seed);
    double amp = noise;
    for (int attempt = 0; attempt < 2000; ++attempt) {
        if (attempt > 0 && attempt % 100 == 0) amp *= 0.5;
        std::uniform_real_distribution<double> u(-amp, amp);
        Eigen::VectorXd th = base;
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            th(v) = s.contains(v) ? 0.0 : base(v) + u(rng);
        }
        if (admissible(th)) return th;
    }
    return base;
}

}  // namespace kpin
