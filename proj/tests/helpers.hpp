#pragma once

#include "kpin/kpin.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace testing_helpers {

inline std::vector<oracle::E> oracle_edges(const kpin::SignedDigraph& g) {
    std::vector<oracle::E> out;
    for (const auto& e : g.edges()) out.push_back({e.src, e.dst, e.weight});
    return out;
}

inline std::vector<bool> mask_of(const kpin::InputSet& s) {
    std::vector<bool> m(static_cast<std::size_t>(s.universe()), false);
    for (int v : s.members()) m[static_cast<std::size_t>(v)] = true;
    return m;
}

inline kpin::InputSet random_subset(int n, std::mt19937_64& rng, double p = 0.3) {
    std::bernoulli_distribution coin(p);
    std::vector<int> v;
    for (int i = 0; i < n; ++i)
        if (coin(rng)) v.push_back(i);
    return kpin::InputSet(n, v);
}

inline kpin::InputSet subset_from_mask(int n, std::uint32_t mask) {
    std::vector<int> v;
    for (int i = 0; i < n; ++i)
        if (mask & (1u << i)) v.push_back(i);
    return kpin::InputSet(n, v);
}

inline const kpin::GraphKind kAllKinds[] = {kpin::GraphKind::UndirectedER, kpin::GraphKind::DirectedOriented,
                                           kpin::GraphKind::DirectedOrientedCycle, kpin::GraphKind::Tree};

inline kpin::SignedDigraph random_graph(kpin::GraphKind kind, int n, std::uint64_t seed, double neg = 0.3) {
    kpin::EnsembleParams p;
    p.kind = kind;
    p.n = n;
    p.seed = seed;
    p.neg_fraction = neg;
    p.edge_prob = 0.4;
    return kpin::generate_ensemble(p);
}

/// Directed cycle 0 -> 1 -> ... -> n-1 -> 0 with unit weights.
inline kpin::SignedDigraph unit_cycle(int n) {
    std::vector<kpin::Edge> e;
    for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n, 1.0});
    return kpin::SignedDigraph(n, e);
}

}  // namespace testing_helpers
