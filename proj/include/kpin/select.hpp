#pragma once

// Minimum-set input selection.
//
// The submodular algorithm ranks candidates with a Monte-Carlo estimate of the
// capped spectral surrogate
//
//     Q(E(S)) = E[ min{ w^T (R + alpha * diag(E(S))) w, delta } ],
//
// with w uniform on the unit sphere, and stops on the exact certificate
// lambda_min(R(S)) > delta + kStrictTol. Greedy, random and exhaustive
// baselines share the same stopping rule.

#include "kpin/graph.hpp"
#include "kpin/rng.hpp"
#include "kpin/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kpin {

enum class Algorithm { Submodular, Greedy, Random, Optimal };

inline std::string_view to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Submodular: return "submodular";
        case Algorithm::Greedy: return "greedy";
        case Algorithm::Random: return "random";
        case Algorithm::Optimal: return "optimal";
    }
    return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
    for (Algorithm a : {Algorithm::Submodular, Algorithm::Greedy, Algorithm::Random, Algorithm::Optimal}) {
        if (to_string(a) == s) return a;
    }
    throw std::invalid_argument("unknown algorithm: " + std::string(s));
}

struct QEstimatorConfig {
    int sample_count = 2000;
    std::optional<double> alpha;  ///< empty: choose_alpha()
    std::uint64_t rng_seed = 0;
    bool shared_samples = true;

    void validate() const {
        if (sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
        if (alpha && !(*alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    }
};

struct QEstimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// alpha = max(1, delta - lambda_min(R) + ||R||_F).
inline double choose_alpha(const Eigen::MatrixXd& r_full, double delta) {
    if (delta < 0.0) throw std::invalid_argument("choose_alpha: delta must be nonnegative");
    if (r_full.size() == 0) return 1.0;
    return std::max(1.0, delta - lambda_min(r_full) + r_full.norm());
}

// =============================================================================
// Monte-Carlo surrogate
// =============================================================================

/// Rows are i.i.d. standard Gaussian vectors normalized to unit length.
inline Eigen::MatrixXd unit_sphere_samples(int dim, int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd w(count, dim);
    for (int k = 0; k < count; ++k) {
        double norm2 = 0.0;
        do {
            for (int i = 0; i < dim; ++i) w(k, i) = normal(rng);
            norm2 = w.row(k).squaredNorm();
        } while (norm2 == 0.0);
        w.row(k) /= std::sqrt(norm2);
    }
    return w;
}

/// Evaluates Q on one fixed sample set, so that every candidate in a greedy
/// step sees the same random numbers.
class SurrogateEvaluator {
public:
    SurrogateEvaluator(const Eigen::MatrixXd& r_full, double alpha, double delta, Eigen::MatrixXd samples)
        : alpha_(alpha), delta_(delta), w2_(samples.cwiseAbs2()) {
        base_ = ((samples * r_full).cwiseProduct(samples)).rowwise().sum();
    }

    [[nodiscard]] QEstimate operator()(std::span<const EdgeId> pinned) const {
        const Eigen::Index count = base_.size();
        if (count == 0 || w2_.cols() == 0) return {delta_, 0.0};
        Eigen::VectorXd q = base_;
        for (EdgeId e : pinned) q += alpha_ * w2_.col(e);
        q = q.cwiseMin(delta_);
        const double mean = q.mean();
        double var = 0.0;
        if (count > 1) var = (q.array() - mean).square().sum() / static_cast<double>(count - 1);
        return {mean, std::sqrt(var / static_cast<double>(count))};
    }

    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] double delta() const { return delta_; }

private:
    double alpha_;
    double delta_;
    Eigen::MatrixXd w2_;
    Eigen::VectorXd base_;
};

/// One-shot estimate of Q(E(S)) for the pinned edge set.
inline QEstimate q_estimate(const Eigen::MatrixXd& r_full, std::span<const EdgeId> pinned, double delta,
                            const QEstimatorConfig& cfg) {
    cfg.validate();
    if (delta < 0.0) throw std::invalid_argument("q_estimate: delta must be nonnegative");
    if (r_full.rows() != r_full.cols()) throw std::invalid_argument("q_estimate: matrix must be square");
    const int m = static_cast<int>(r_full.rows());
    if (m == 0) return {delta, 0.0};
    const double alpha = cfg.alpha.value_or(choose_alpha(r_full, delta));
    SurrogateEvaluator eval(r_full, alpha, delta, unit_sphere_samples(m, cfg.sample_count, cfg.rng_seed));
    return eval(pinned);
}

// =============================================================================
// Selection results
// =============================================================================

struct IterationTrace {
    NodeId chosen = -1;
    std::optional<double> q;         ///< surrogate value of the chosen set (submodular only)
    std::optional<double> q_stderr;
    double lambda_min = 0.0;         ///< exact lambda_min(R(S)) after adding `chosen`
};

/// Greedy set-cover optimality report. `stated_log_ratio` is
/// log((delta - lambda_min(R)) / (delta - Q(E(S_{T-1})))); `proof_log_ratio`
/// uses the recorded Q(E(S_T)) in place of delta. Either is empty when undefined.
struct BoundReport {
    std::optional<double> stated_log_ratio;
    std::optional<double> proof_log_ratio;
    std::optional<int> optimal_size;
    std::optional<int> excess_over_optimal;  ///< |S_T| - |S*|
    std::optional<double> proof_rhs;         ///< |S*| * proof_log_ratio
};

struct SelectionResult {
    InputSet S;
    Algorithm algorithm = Algorithm::Submodular;
    std::vector<IterationTrace> iterations;
    double delta = 0.0;
    double initial_lambda_min = 0.0;  ///< lambda_min(R), i.e. S = ∅
    double final_lambda_min = 0.0;
    std::optional<double> alpha;
    int sample_count = 0;
    std::uint64_t seed = 0;
    BoundReport bound;
    bool terminated_ok = false;
};

namespace detail {

// Values closer than this count as ties.
inline constexpr double kTieTol = 1e-12;

inline bool certified(double lambda, double delta) { return lambda > delta + kStrictTol; }

inline double lambda_after(const SignedDigraph& g, const InputSet& s) { return lambda_min(reduce(g, s).RS); }

inline std::vector<EdgeId> pinned_edges(const SignedDigraph& g, const InputSet& s) { return edges_into(g, s); }

inline SelectionResult start(const SignedDigraph& g, Algorithm a, double delta) {
    if (!(delta >= 0.0) || !std::isfinite(delta)) throw std::invalid_argument("delta must be finite and nonnegative");
    SelectionResult r;
    r.algorithm = a;
    r.delta = delta;
    r.S = InputSet::none(g.num_nodes());
    r.initial_lambda_min = lambda_min(full_R(g));
    r.final_lambda_min = r.initial_lambda_min;
    return r;
}

}  // namespace detail

// =============================================================================
// Algorithms
// =============================================================================

/// Algorithm 1: add the node whose incoming edges maximize Q; S accumulates.
inline SelectionResult select_submodular(const SignedDigraph& g, double delta, const QEstimatorConfig& cfg = {}) {
    cfg.validate();
    SelectionResult r = detail::start(g, Algorithm::Submodular, delta);
    const Eigen::MatrixXd R = full_R(g);
    const int m = g.num_edges();
    const double alpha = cfg.alpha.value_or(choose_alpha(R, delta));
    r.alpha = alpha;
    r.sample_count = cfg.sample_count;
    r.seed = cfg.rng_seed;
    const std::uint64_t stream = derive_seed(cfg.rng_seed, {tag_hash("submodular")});

    int iteration = 0;
    while (!detail::certified(r.final_lambda_min, delta)) {
        std::optional<SurrogateEvaluator> shared;
        if (cfg.shared_samples && m > 0) {
            shared.emplace(R, alpha, delta,
                           unit_sphere_samples(m, cfg.sample_count,
                                               derive_seed(stream, {static_cast<std::uint64_t>(iteration)})));
        }
        const std::vector<EdgeId> base = detail::pinned_edges(g, r.S);
        NodeId best = -1;
        QEstimate best_q{-std::numeric_limits<double>::infinity(), 0.0};
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            if (r.S.contains(v)) continue;
            std::vector<EdgeId> pinned = base;
            pinned.insert(pinned.end(), g.in_edges(v).begin(), g.in_edges(v).end());
            QEstimate q{delta, 0.0};
            if (m > 0) {
                if (shared) {
                    q = (*shared)(pinned);
                } else {
                    const auto seed = derive_seed(stream, {static_cast<std::uint64_t>(iteration),
                                                           static_cast<std::uint64_t>(v)});
                    q = SurrogateEvaluator(R, alpha, delta, unit_sphere_samples(m, cfg.sample_count, seed))(pinned);
                }
            }
            if (best < 0 || q.value > best_q.value + detail::kTieTol) {  // ties keep the lowest id
                best_q = q;
                best = v;
            }
        }
        r.S = r.S.with(best);
        r.final_lambda_min = detail::lambda_after(g, r.S);
        r.iterations.push_back({best, best_q.value, best_q.std_error, r.final_lambda_min});
        ++iteration;
    }
    r.terminated_ok = true;
    return r;
}

/// Adds the node maximizing the exact lambda_min(R(S ∪ {i})).
inline SelectionResult select_greedy_lambda(const SignedDigraph& g, double delta) {
    SelectionResult r = detail::start(g, Algorithm::Greedy, delta);
    while (!detail::certified(r.final_lambda_min, delta)) {
        NodeId best = -1;
        double best_lambda = -std::numeric_limits<double>::infinity();
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            if (r.S.contains(v)) continue;
            const double lam = detail::lambda_after(g, r.S.with(v));
            if (best < 0 || lam > best_lambda + detail::kTieTol) {
                best_lambda = lam;
                best = v;
            }
        }
        r.S = r.S.with(best);
        r.final_lambda_min = best_lambda;
        r.iterations.push_back({best, std::nullopt, std::nullopt, best_lambda});
    }
    r.terminated_ok = true;
    return r;
}

/// Adds a uniformly random non-member until certified.
inline SelectionResult select_random(const SignedDigraph& g, double delta, std::uint64_t seed) {
    SelectionResult r = detail::start(g, Algorithm::Random, delta);
    r.seed = seed;
    std::mt19937_64 rng(derive_seed(seed, {tag_hash("random")}));
    while (!detail::certified(r.final_lambda_min, delta)) {
        std::vector<NodeId> pool;
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            if (!r.S.contains(v)) pool.push_back(v);
        }
        std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
        const NodeId v = pool[pick(rng)];
        r.S = r.S.with(v);
        r.final_lambda_min = detail::lambda_after(g, r.S);
        r.iterations.push_back({v, std::nullopt, std::nullopt, r.final_lambda_min});
    }
    r.terminated_ok = true;
    return r;
}

inline constexpr int kDefaultOptimalCap = 16;

/// Exhaustive search: smallest certified S, ties broken by lexicographic order.
inline SelectionResult select_optimal(const SignedDigraph& g, double delta, int node_cap = kDefaultOptimalCap) {
    const int n = g.num_nodes();
    if (n > node_cap) {
        throw std::invalid_argument("select_optimal: " + std::to_string(n) + " nodes exceeds the cap of " +
                                    std::to_string(node_cap));
    }
    SelectionResult r = detail::start(g, Algorithm::Optimal, delta);
    if (detail::certified(r.final_lambda_min, delta)) {
        r.terminated_ok = true;
        return r;
    }
    for (int k = 1; k <= n; ++k) {
        std::vector<int> combo(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) combo[static_cast<std::size_t>(i)] = i;
        while (true) {
            InputSet s(n, combo);
            const double lam = detail::lambda_after(g, s);
            if (detail::certified(lam, delta)) {
                r.S = s;
                r.final_lambda_min = lam;
                r.terminated_ok = true;
                return r;
            }
            // next k-combination in lexicographic order
            int i = k - 1;
            while (i >= 0 && combo[static_cast<std::size_t>(i)] == n - k + i) --i;
            if (i < 0) break;
            ++combo[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k; ++j) combo[static_cast<std::size_t>(j)] = combo[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    // S = V is always certified (lambda_min of an empty matrix is +inf).
    throw std::logic_error("select_optimal: exhaustive search found no certified set");
}

inline SelectionResult run_selection(Algorithm a, const SignedDigraph& g, double delta, const QEstimatorConfig& cfg,
                                     int optimal_cap = kDefaultOptimalCap) {
    switch (a) {
        case Algorithm::Submodular: return select_submodular(g, delta, cfg);
        case Algorithm::Greedy: return select_greedy_lambda(g, delta);
        case Algorithm::Random: return select_random(g, delta, cfg.rng_seed);
        case Algorithm::Optimal: return select_optimal(g, delta, optimal_cap);
    }
    throw std::invalid_argument("unknown algorithm");
}

// =============================================================================
// Optimality bound
// =============================================================================

inline BoundReport optimality_bound(const SelectionResult& result, const Eigen::MatrixXd& r_full,
                                    std::optional<int> optimal_size = std::nullopt) {
    BoundReport b;
    b.optimal_size = optimal_size;
    if (optimal_size) b.excess_over_optimal = result.S.size() - *optimal_size;

    const auto T = result.iterations.size();
    if (T == 0) return b;
    // Q(∅) is taken to be lambda_min(R).
    const double q_empty = lambda_min(r_full);
    const double delta = result.delta;
    const auto q_at = [&](std::size_t t) -> std::optional<double> {
        if (t == 0) return q_empty;
        return result.iterations[t - 1].q;
    };
    const std::optional<double> q_prev = q_at(T - 1);
    if (!q_prev) return b;

    const double denom = delta - *q_prev;
    if (std::abs(denom) > kStrictTol) {
        const double ratio = (delta - q_empty) / denom;
        if (ratio > 0.0) b.stated_log_ratio = std::log(ratio);
    }
    if (const std::optional<double> q_last = q_at(T)) {
        const double d = *q_last - *q_prev;
        if (std::abs(d) > kStrictTol) {
            const double ratio = (*q_last - q_empty) / d;
            if (ratio > 0.0) b.proof_log_ratio = std::log(ratio);
        } else if (T == 1) {
            b.proof_log_ratio = 0.0;
        }
    }
    if (optimal_size && b.proof_log_ratio) b.proof_rhs = *optimal_size * *b.proof_log_ratio;
    return b;
}

/// Threshold used by Algorithm 1: 0 for identical natural frequencies,
/// the uniform bound from hetero_threshold() otherwise.
inline double auto_delta(const SignedDigraph& g, const Eigen::VectorXd& omega) {
    if (omega.size() == 0 || (omega.array() == omega(0)).all()) return 0.0;
    return hetero_threshold(g, omega);
}

}  // namespace kpin
