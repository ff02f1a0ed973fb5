#pragma once

// Random signed graph ensembles used by the experiment sweeps.

#include "kpin/graph.hpp"
#include "kpin/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kpin {

enum class GraphKind {
    UndirectedER,
    DirectedOriented,
    DirectedOrientedCycle,
    Tree,
};

inline std::string_view to_string(GraphKind k) {
    switch (k) {
        case GraphKind::UndirectedER: return "undirected-ER";
        case GraphKind::DirectedOriented: return "directed-oriented";
        case GraphKind::DirectedOrientedCycle: return "directed-oriented-cycle";
        case GraphKind::Tree: return "tree";
    }
    return "?";
}

inline GraphKind parse_graph_kind(std::string_view s) {
    for (GraphKind k : {GraphKind::UndirectedER, GraphKind::DirectedOriented,
                        GraphKind::DirectedOrientedCycle, GraphKind::Tree}) {
        if (to_string(k) == s) return k;
    }
    if (s == "undirected") return GraphKind::UndirectedER;
    if (s == "cycle") return GraphKind::DirectedOrientedCycle;
    throw GraphError("unknown graph kind: " + std::string(s));
}

struct EnsembleParams {
    GraphKind kind = GraphKind::DirectedOriented;
    int n = 10;
    double edge_prob = 0.3;
    double weight_lo = 1.0;
    double weight_hi = 5.0;
    double neg_fraction = 0.0;
    std::uint64_t seed = 0;
    int max_retries = 1000;
};

namespace detail {

// One "unit" is an undirected pair for UndirectedER and a single edge otherwise,
// so that signs and magnitudes are shared across a symmetric pair.
struct Unit {
    NodeId a;
    NodeId b;
};

inline std::vector<Unit> draw_topology(const EnsembleParams& p, std::mt19937_64& rng) {
    std::vector<Unit> units;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    switch (p.kind) {
        case GraphKind::UndirectedER:
            for (NodeId i = 0; i < p.n; ++i)
                for (NodeId j = i + 1; j < p.n; ++j)
                    if (u01(rng) < p.edge_prob) units.push_back({i, j});
            break;
        case GraphKind::DirectedOriented:
            for (NodeId i = 0; i < p.n; ++i)
                for (NodeId j = i + 1; j < p.n; ++j)
                    if (u01(rng) < p.edge_prob) {
                        if (u01(rng) < 0.5) units.push_back({i, j});
                        else units.push_back({j, i});
                    }
            break;
        case GraphKind::DirectedOrientedCycle:
            for (NodeId i = 0; i < p.n; ++i) units.push_back({i, (i + 1) % p.n});
            break;
        case GraphKind::Tree: {
            // Uniform labelled tree from a random Prüfer sequence, random orientation.
            if (p.n == 2) {
                units.push_back({0, 1});
            } else {
                std::uniform_int_distribution<int> pick(0, p.n - 1);
                std::vector<int> prufer(static_cast<std::size_t>(p.n - 2));
                for (int& x : prufer) x = pick(rng);
                std::vector<int> degree(static_cast<std::size_t>(p.n), 1);
                for (int x : prufer) ++degree[static_cast<std::size_t>(x)];
                for (int x : prufer) {
                    int leaf = 0;
                    while (degree[static_cast<std::size_t>(leaf)] != 1) ++leaf;
                    units.push_back({leaf, x});
                    --degree[static_cast<std::size_t>(leaf)];
                    --degree[static_cast<std::size_t>(x)];
                }
                int u = -1, v = -1;
                for (int i = 0; i < p.n; ++i) {
                    if (degree[static_cast<std::size_t>(i)] == 1) (u < 0 ? u : v) = i;
                }
                units.push_back({u, v});
            }
            for (Unit& e : units) {
                if (u01(rng) < 0.5) std::swap(e.a, e.b);
            }
            break;
        }
    }
    return units;
}

}  // namespace detail

/// Draws one graph. Pure function of `p` (including the seed). Weights are
/// uniform on [weight_lo, weight_hi]; then round(neg_fraction * units) units,
/// chosen uniformly, are negated. Topologies are resampled until weakly
/// connected.
inline SignedDigraph generate_ensemble(const EnsembleParams& p) {
    if (p.n < 2) throw GraphError("ensemble graphs need at least 2 nodes");
    if (p.kind == GraphKind::DirectedOrientedCycle && p.n < 3) {
        throw GraphError("an oriented cycle needs at least 3 nodes");
    }
    if (!(p.edge_prob >= 0.0 && p.edge_prob <= 1.0)) throw GraphError("edge_prob must lie in [0, 1]");
    if (!(p.neg_fraction >= 0.0 && p.neg_fraction <= 1.0)) throw GraphError("neg_fraction must lie in [0, 1]");
    if (!(p.weight_lo > 0.0 && p.weight_hi >= p.weight_lo)) throw GraphError("weight range must satisfy 0 < lo <= hi");
    if (p.max_retries < 1) throw GraphError("max_retries must be positive");

    std::mt19937_64 rng(p.seed);
    for (int attempt = 0; attempt < p.max_retries; ++attempt) {
        std::vector<detail::Unit> units = detail::draw_topology(p, rng);
        std::vector<Edge> edges;
        const bool undirected = p.kind == GraphKind::UndirectedER;
        for (const auto& u : units) {
            edges.push_back({u.a, u.b, 1.0});
            if (undirected) edges.push_back({u.b, u.a, 1.0});
        }
        SignedDigraph topo(p.n, edges, false);
        if (!topo.weakly_connected()) continue;

        std::uniform_real_distribution<double> wdist(p.weight_lo, p.weight_hi);
        std::vector<double> w(units.size());
        for (double& x : w) x = wdist(rng);
        std::vector<std::size_t> order(units.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        const auto negatives = static_cast<std::size_t>(std::llround(p.neg_fraction * static_cast<double>(units.size())));
        for (std::size_t i = 0; i < negatives; ++i) w[order[i]] = -w[order[i]];

        edges.clear();
        for (std::size_t i = 0; i < units.size(); ++i) {
            edges.push_back({units[i].a, units[i].b, w[i]});
            if (undirected) edges.push_back({units[i].b, units[i].a, w[i]});
        }
        return SignedDigraph(p.n, std::move(edges), undirected);
    }
    throw GraphError("could not draw a weakly connected " + std::string(to_string(p.kind)) + " graph in " +
                     std::to_string(p.max_retries) + " attempts");
}

}  // namespace kpin
