#pragma once

// Signed digraphs, incidence matrices and the input-set reduction of the
// pinned Kuramoto model.
//
// Node ids are 0-based in the API. File formats use 1-based ids and convert
// at the boundary (see io.hpp).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kpin {

using NodeId = int;
using EdgeId = int;

struct Edge {
    NodeId src = 0;
    NodeId dst = 0;
    double weight = 0.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

class GraphError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// =============================================================================
// SignedDigraph
// =============================================================================

/// Immutable signed, weighted digraph. Edges are kept in lexicographic
/// (src, dst) order; an edge id is its position in that order.
class SignedDigraph {
public:
    SignedDigraph() = default;

    SignedDigraph(int n, std::vector<Edge> edges, bool undirected = false)
        : n_(n), edges_(std::move(edges)), undirected_(undirected) {
        if (n_ <= 0) {
            throw GraphError("node count must be positive");
        }
        for (const Edge& e : edges_) {
            if (e.src < 0 || e.src >= n_ || e.dst < 0 || e.dst >= n_) {
                throw GraphError("edge endpoint out of range: (" + std::to_string(e.src) + ", " +
                                 std::to_string(e.dst) + ")");
            }
            if (e.src == e.dst) {
                throw GraphError("self-loop at node " + std::to_string(e.src));
            }
            if (e.weight == 0.0 || !std::isfinite(e.weight)) {
                throw GraphError("edge weight must be finite and nonzero");
            }
        }
        std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
            return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
        });
        for (std::size_t i = 1; i < edges_.size(); ++i) {
            if (edges_[i - 1].src == edges_[i].src && edges_[i - 1].dst == edges_[i].dst) {
                throw GraphError("duplicate edge (" + std::to_string(edges_[i].src) + ", " +
                                 std::to_string(edges_[i].dst) + ")");
            }
        }
        in_edges_.assign(static_cast<std::size_t>(n_), {});
        out_edges_.assign(static_cast<std::size_t>(n_), {});
        for (EdgeId e = 0; e < num_edges(); ++e) {
            in_edges_[static_cast<std::size_t>(edges_[static_cast<std::size_t>(e)].dst)].push_back(e);
            out_edges_[static_cast<std::size_t>(edges_[static_cast<std::size_t>(e)].src)].push_back(e);
        }
        if (undirected_) {
            for (const Edge& e : edges_) {
                auto rev = find_edge(e.dst, e.src);
                if (!rev || edge(*rev).weight != e.weight) {
                    throw GraphError("undirected graph requires symmetric edge pairs with equal weights");
                }
            }
        }
    }

    [[nodiscard]] int num_nodes() const { return n_; }
    [[nodiscard]] int num_edges() const { return static_cast<int>(edges_.size()); }
    [[nodiscard]] bool undirected() const { return undirected_; }

    [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
    [[nodiscard]] const Edge& edge(EdgeId e) const { return edges_.at(static_cast<std::size_t>(e)); }

    /// Edges whose head is `i`, i.e. E(i).
    [[nodiscard]] const std::vector<EdgeId>& in_edges(NodeId i) const {
        return in_edges_.at(static_cast<std::size_t>(i));
    }
    [[nodiscard]] const std::vector<EdgeId>& out_edges(NodeId i) const {
        return out_edges_.at(static_cast<std::size_t>(i));
    }

    [[nodiscard]] std::optional<EdgeId> find_edge(NodeId src, NodeId dst) const {
        auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair(src, dst),
                                   [](const Edge& a, const std::pair<NodeId, NodeId>& key) {
                                       return std::pair(a.src, a.dst) < key;
                                   });
        if (it != edges_.end() && it->src == src && it->dst == dst) {
            return static_cast<EdgeId>(it - edges_.begin());
        }
        return std::nullopt;
    }

    /// Weighted in-degree d_in(i) = sum of K_ji over incoming edges.
    [[nodiscard]] double weighted_in_degree(NodeId i) const {
        double sum = 0.0;
        for (EdgeId e : in_edges(i)) sum += edge(e).weight;
        return sum;
    }

    [[nodiscard]] bool weakly_connected() const {
        if (n_ == 1) return true;
        std::vector<int> parent(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i) parent[static_cast<std::size_t>(i)] = i;
        auto find = [&](int x) {
            while (parent[static_cast<std::size_t>(x)] != x) {
                parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
                x = parent[static_cast<std::size_t>(x)];
            }
            return x;
        };
        int components = n_;
        for (const Edge& e : edges_) {
            int a = find(e.src), b = find(e.dst);
            if (a != b) {
                parent[static_cast<std::size_t>(a)] = b;
                --components;
            }
        }
        return components == 1;
    }

    friend bool operator==(const SignedDigraph& a, const SignedDigraph& b) {
        return a.n_ == b.n_ && a.undirected_ == b.undirected_ && a.edges_ == b.edges_;
    }

private:
    int n_ = 0;
    std::vector<Edge> edges_;
    bool undirected_ = false;
    std::vector<std::vector<EdgeId>> in_edges_;
    std::vector<std::vector<EdgeId>> out_edges_;
};

inline SignedDigraph build_graph(int n, std::vector<Edge> edges, bool undirected = false) {
    return SignedDigraph(n, std::move(edges), undirected);
}

// =============================================================================
// InputSet
// =============================================================================

/// Set of pinned nodes S over the universe {0, .., n-1}; members are sorted.
class InputSet {
public:
    InputSet() = default;

    InputSet(int n, std::vector<NodeId> members) : n_(n), members_(std::move(members)) {
        std::sort(members_.begin(), members_.end());
        mask_.assign(static_cast<std::size_t>(n_), false);
        for (std::size_t i = 0; i < members_.size(); ++i) {
            NodeId v = members_[i];
            if (v < 0 || v >= n_) {
                throw GraphError("input node out of range: " + std::to_string(v));
            }
            if (i > 0 && members_[i - 1] == v) {
                throw GraphError("duplicate input node " + std::to_string(v));
            }
            mask_[static_cast<std::size_t>(v)] = true;
        }
    }

    static InputSet none(int n) { return InputSet(n, {}); }
    static InputSet all(int n) {
        std::vector<NodeId> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
        return InputSet(n, std::move(v));
    }

    [[nodiscard]] bool contains(NodeId v) const { return mask_.at(static_cast<std::size_t>(v)); }
    [[nodiscard]] int size() const { return static_cast<int>(members_.size()); }
    [[nodiscard]] int universe() const { return n_; }
    [[nodiscard]] bool empty() const { return members_.empty(); }
    [[nodiscard]] const std::vector<NodeId>& members() const { return members_; }

    [[nodiscard]] InputSet with(NodeId v) const {
        if (contains(v)) return *this;
        auto m = members_;
        m.push_back(v);
        return InputSet(n_, std::move(m));
    }

    friend bool operator==(const InputSet& a, const InputSet& b) {
        return a.n_ == b.n_ && a.members_ == b.members_;
    }

private:
    int n_ = 0;
    std::vector<NodeId> members_;
    std::vector<bool> mask_;
};

/// E(S): edges whose head is an input node, in ascending id order.
inline std::vector<EdgeId> edges_into(const SignedDigraph& g, const InputSet& s) {
    std::vector<EdgeId> out;
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
        if (s.contains(g.edge(e).dst)) out.push_back(e);
    }
    return out;
}

// =============================================================================
// Incidence matrices
// =============================================================================

struct IncidenceBundle {
    Eigen::MatrixXd D;     ///< n x m, +1 at the head of each edge, -1 at its tail
    Eigen::MatrixXd Dhat;  ///< n x m, +1 at the head only
    Eigen::VectorXd k;     ///< diagonal of K, one weight per edge
    std::vector<int> edge_index;  ///< edge id -> column

    [[nodiscard]] Eigen::MatrixXd K() const { return k.asDiagonal(); }
};

inline IncidenceBundle incidence_bundle(const SignedDigraph& g) {
    const int n = g.num_nodes();
    const int m = g.num_edges();
    IncidenceBundle b;
    b.D = Eigen::MatrixXd::Zero(n, m);
    b.Dhat = Eigen::MatrixXd::Zero(n, m);
    b.k.resize(m);
    b.edge_index.resize(static_cast<std::size_t>(m));
    for (EdgeId e = 0; e < m; ++e) {
        const Edge& ed = g.edge(e);
        b.D(ed.dst, e) = 1.0;
        b.D(ed.src, e) = -1.0;
        b.Dhat(ed.dst, e) = 1.0;
        b.k(e) = ed.weight;
        b.edge_index[static_cast<std::size_t>(e)] = e;
    }
    return b;
}

// =============================================================================
// S-partition
// =============================================================================

enum class EdgeBlock : int {
    FreeToFree = 0,    ///< E(S̄, S̄)
    InputToFree = 1,   ///< E(S, S̄)
    FreeToInput = 2,   ///< E(S̄, S)
    InputToInput = 3,  ///< E(S, S)
};

inline EdgeBlock edge_block(const Edge& e, const InputSet& s) {
    const bool src_in = s.contains(e.src);
    const bool dst_in = s.contains(e.dst);
    if (!dst_in) return src_in ? EdgeBlock::InputToFree : EdgeBlock::FreeToFree;
    return src_in ? EdgeBlock::InputToInput : EdgeBlock::FreeToInput;
}

struct PartitionIndex {
    std::vector<NodeId> node_order;  ///< position -> node; non-input nodes first
    std::vector<EdgeId> edge_order;  ///< position -> edge; blocks in EdgeBlock order
    std::array<int, 4> block_sizes{};

    [[nodiscard]] std::span<const EdgeId> block(EdgeBlock b) const {
        std::size_t start = 0;
        for (int i = 0; i < static_cast<int>(b); ++i) start += static_cast<std::size_t>(block_sizes[static_cast<std::size_t>(i)]);
        return std::span<const EdgeId>(edge_order).subspan(start, static_cast<std::size_t>(block_sizes[static_cast<std::size_t>(b)]));
    }
};

inline PartitionIndex partition(const SignedDigraph& g, const InputSet& s) {
    if (s.universe() != g.num_nodes()) throw GraphError("input set universe does not match graph");
    PartitionIndex p;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        if (!s.contains(v)) p.node_order.push_back(v);
    }
    for (NodeId v : s.members()) p.node_order.push_back(v);
    for (int b = 0; b < 4; ++b) {
        for (EdgeId e = 0; e < g.num_edges(); ++e) {
            if (static_cast<int>(edge_block(g.edge(e), s)) == b) {
                p.edge_order.push_back(e);
                ++p.block_sizes[static_cast<std::size_t>(b)];
            }
        }
    }
    return p;
}

// =============================================================================
// Reduced (pinned) system
// =============================================================================

/// The S-restricted model matrices. Retained nodes are S̄ in ascending order;
/// retained edges are E(S̄,S̄) followed by E(S,S̄), each block ascending.
struct ReducedSystem {
    Eigen::MatrixXd DS;
    Eigen::MatrixXd DhatS;
    Eigen::VectorXd kS;
    Eigen::MatrixXd MS;
    Eigen::MatrixXd RS;
    Eigen::VectorXd omegaS;
    std::vector<EdgeId> edge_map;  ///< retained column -> original edge
    std::vector<NodeId> node_map;  ///< retained row -> original node

    [[nodiscard]] int num_free_nodes() const { return static_cast<int>(node_map.size()); }
    [[nodiscard]] int num_free_edges() const { return static_cast<int>(edge_map.size()); }
    [[nodiscard]] Eigen::MatrixXd KS() const { return kS.asDiagonal(); }
};

inline ReducedSystem reduce(const SignedDigraph& g, const Eigen::VectorXd& omega, const InputSet& s) {
    if (omega.size() != g.num_nodes()) throw GraphError("frequency vector length must equal node count");
    const PartitionIndex p = partition(g, s);
    ReducedSystem r;
    const int n_free = g.num_nodes() - s.size();
    r.node_map.assign(p.node_order.begin(), p.node_order.begin() + n_free);
    for (EdgeBlock b : {EdgeBlock::FreeToFree, EdgeBlock::InputToFree}) {
        for (EdgeId e : p.block(b)) r.edge_map.push_back(e);
    }
    const int m_free = static_cast<int>(r.edge_map.size());

    std::vector<int> row_of(static_cast<std::size_t>(g.num_nodes()), -1);
    for (int row = 0; row < n_free; ++row) row_of[static_cast<std::size_t>(r.node_map[static_cast<std::size_t>(row)])] = row;

    r.DS = Eigen::MatrixXd::Zero(n_free, m_free);
    r.DhatS = Eigen::MatrixXd::Zero(n_free, m_free);
    r.kS.resize(m_free);
    for (int col = 0; col < m_free; ++col) {
        const Edge& e = g.edge(r.edge_map[static_cast<std::size_t>(col)]);
        const int head = row_of[static_cast<std::size_t>(e.dst)];
        r.DS(head, col) = 1.0;
        r.DhatS(head, col) = 1.0;
        // Tails at input nodes have no row; those edges carry only the +1.
        if (const int tail = row_of[static_cast<std::size_t>(e.src)]; tail >= 0) r.DS(tail, col) = -1.0;
        r.kS(col) = e.weight;
    }
    r.omegaS.resize(n_free);
    for (int row = 0; row < n_free; ++row) r.omegaS(row) = omega(r.node_map[static_cast<std::size_t>(row)]);

    r.MS = r.DS.transpose() * r.DhatS * r.kS.asDiagonal();
    r.RS = 0.5 * (r.MS + r.MS.transpose());
    return r;
}

inline ReducedSystem reduce(const SignedDigraph& g, const InputSet& s) {
    return reduce(g, Eigen::VectorXd::Zero(g.num_nodes()), s);
}

/// Full-graph R (the S = ∅ case).
inline Eigen::MatrixXd full_R(const SignedDigraph& g) {
    return reduce(g, InputSet::none(g.num_nodes())).RS;
}

}  // namespace kpin
