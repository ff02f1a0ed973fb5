#pragma once

// Seeded selection sweeps over the negative-edge fraction or the WF
// heterogeneity parameter, comparing the selection algorithms.

#include "kpin/ensemble.hpp"
#include "kpin/graph.hpp"
#include "kpin/io.hpp"
#include "kpin/rng.hpp"
#include "kpin/select.hpp"
#include "kpin/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace kpin {

/// WF = ||D^T omega||_2 / max_i d_in(i) on the full graph.
inline double wf_parameter(const SignedDigraph& g, const Eigen::VectorXd& omega) {
    if (omega.size() != g.num_nodes()) throw GraphError("frequency vector length must equal node count");
    double max_in = -std::numeric_limits<double>::infinity();
    for (NodeId i = 0; i < g.num_nodes(); ++i) max_in = std::max(max_in, g.weighted_in_degree(i));
    if (max_in == 0.0) throw GraphError("wf_parameter: maximum weighted in-degree is zero");
    double sum = 0.0;
    for (const Edge& e : g.edges()) sum += (omega(e.dst) - omega(e.src)) * (omega(e.dst) - omega(e.src));
    return std::sqrt(sum) / max_in;
}

enum class SweepAxis { NegFraction, WF };
enum class DeltaMode { Homogeneous, Heterogeneous };

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SweepConfig {
    GraphKind graph_kind = GraphKind::DirectedOriented;
    int n = 10;
    int realizations = 100;
    SweepAxis sweep_axis = SweepAxis::NegFraction;
    /// NegFraction: the fractions. WF: ascending bin edges.
    std::vector<double> grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    DeltaMode delta_mode = DeltaMode::Homogeneous;
    double omega_lo = 0.0;
    double omega_hi = 2.0;
    double weight_lo = 1.0;
    double weight_hi = 5.0;
    double edge_prob = 0.3;
    double neg_fraction = 0.3;  ///< used when the axis is WF
    std::uint64_t master_seed = 0;
    std::vector<Algorithm> algorithms{Algorithm::Submodular, Algorithm::Greedy, Algorithm::Random, Algorithm::Optimal};
    int sample_count = 2000;
    int optimal_cap = kDefaultOptimalCap;
    bool timing = false;  ///< wall_ms is 0 unless set, so output stays reproducible

    void validate() const {
        if (n < 2) throw ConfigError("n must be at least 2");
        if (realizations < 1) throw ConfigError("realizations must be at least 1");
        if (grid.empty()) throw ConfigError("grid must be nonempty");
        if (algorithms.empty()) throw ConfigError("algorithms must be nonempty");
        if (sample_count < 1) throw ConfigError("sample_count must be positive");
        if (!(weight_lo > 0.0 && weight_hi >= weight_lo)) throw ConfigError("weight_range must satisfy 0 < lo <= hi");
        if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) throw ConfigError("edge_prob must lie in [0, 1]");
        if (sweep_axis == SweepAxis::NegFraction) {
            if (delta_mode != DeltaMode::Homogeneous) {
                throw ConfigError("neg_fraction sweeps use the homogeneous setting");
            }
            for (double f : grid) {
                if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("neg_fraction grid values must lie in [0, 1]");
            }
        } else {
            if (grid.size() < 2) throw ConfigError("WF sweeps need at least two bin edges");
            if (!std::is_sorted(grid.begin(), grid.end()) ||
                std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
                throw ConfigError("WF bin edges must be strictly increasing");
            }
            if (!(neg_fraction >= 0.0 && neg_fraction <= 1.0)) throw ConfigError("neg_fraction must lie in [0, 1]");
        }
        if (delta_mode == DeltaMode::Heterogeneous && !(omega_hi >= omega_lo)) {
            throw ConfigError("omega_range must satisfy lo <= hi");
        }
    }
};

struct SweepRecord {
    GraphKind graph_kind = GraphKind::DirectedOriented;
    double point = 0.0;  ///< grid value, or the realized WF for WF sweeps
    int point_index = 0; ///< grid index, or the WF bin
    int realization = 0;
    std::uint64_t seed = 0;
    Algorithm algorithm = Algorithm::Submodular;
    int num_inputs = -1;  ///< -1 when the algorithm failed
    double lambda_min = std::numeric_limits<double>::quiet_NaN();
    double delta = 0.0;
    double wall_ms = 0.0;
    std::vector<NodeId> inputs;
    std::string error;

    friend bool operator==(const SweepRecord& a, const SweepRecord& b) {
        auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
        return a.graph_kind == b.graph_kind && same(a.point, b.point) && a.point_index == b.point_index &&
               a.realization == b.realization && a.seed == b.seed && a.algorithm == b.algorithm &&
               a.num_inputs == b.num_inputs && same(a.lambda_min, b.lambda_min) && same(a.delta, b.delta) &&
               same(a.wall_ms, b.wall_ms) && a.inputs == b.inputs && a.error == b.error;
    }
};

struct Stat {
    int count = 0;
    double mean = 0.0;
    double std_error = 0.0;
};

inline Stat make_stat(const std::vector<double>& xs) {
    Stat s;
    s.count = static_cast<int>(xs.size());
    if (xs.empty()) return s;
    double sum = 0.0;
    for (double x : xs) sum += x;
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - s.mean) * (x - s.mean);
        s.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return s;
}

struct PointSummary {
    int point_index = 0;
    double point = 0.0;  ///< grid value, or the bin's lower edge
    std::map<Algorithm, Stat> num_inputs;
    std::optional<Stat> gap;  ///< submodular - optimal, paired by realization
};

struct SweepSummary {
    std::vector<PointSummary> points;
    std::optional<Stat> gap;
    int failures = 0;
    int unbinned = 0;  ///< WF realizations outside every bin
};

struct SweepResult {
    std::vector<SweepRecord> records;
    SweepSummary summary;
};

/// Graph and natural frequencies for one realization; a pure function of
/// the config and the realization seed.
struct Realization {
    SignedDigraph graph;
    Eigen::VectorXd omega;
    double delta = 0.0;
    double wf = 0.0;  ///< NaN unless the axis is WF
};

inline Realization make_realization(const SweepConfig& cfg, double neg_fraction, std::uint64_t seed) {
    EnsembleParams p;
    p.kind = cfg.graph_kind;
    p.n = cfg.n;
    p.edge_prob = cfg.edge_prob;
    p.weight_lo = cfg.weight_lo;
    p.weight_hi = cfg.weight_hi;
    p.neg_fraction = neg_fraction;
    p.seed = seed;
    Realization r{generate_ensemble(p), Eigen::VectorXd::Zero(cfg.n), 0.0, 0.0};
    if (cfg.delta_mode == DeltaMode::Heterogeneous) {
        std::mt19937_64 rng(derive_seed(seed, {tag_hash("omega")}));
        std::uniform_real_distribution<double> u(cfg.omega_lo, cfg.omega_hi);
        for (int i = 0; i < cfg.n; ++i) r.omega(i) = u(rng);
        r.delta = auto_delta(r.graph, r.omega);
    }
    r.wf = cfg.sweep_axis == SweepAxis::WF ? wf_parameter(r.graph, r.omega) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

inline std::uint64_t realization_seed(const SweepConfig& cfg, int grid_index, int realization) {
    return derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(grid_index), static_cast<std::uint64_t>(realization)});
}

namespace detail {

struct Job {
    int grid_index;
    int realization;
};

inline std::vector<SweepRecord> run_job(const SweepConfig& cfg, const Job& job) {
    const std::uint64_t seed = realization_seed(cfg, job.grid_index, job.realization);
    const double neg = cfg.sweep_axis == SweepAxis::NegFraction ? cfg.grid[static_cast<std::size_t>(job.grid_index)]
                                                               : cfg.neg_fraction;
    std::vector<SweepRecord> out;
    SweepRecord base;
    base.graph_kind = cfg.graph_kind;
    base.realization = job.realization;
    base.seed = seed;
    std::optional<Realization> real;
    std::string gen_error;
    try {
        real = make_realization(cfg, neg, seed);
    } catch (const std::exception& e) {
        gen_error = e.what();
    }
    if (cfg.sweep_axis == SweepAxis::NegFraction) {
        base.point = neg;
        base.point_index = job.grid_index;
    } else {
        base.point = real ? real->wf : std::numeric_limits<double>::quiet_NaN();
        base.point_index = -1;
        if (real) {
            const auto it = std::upper_bound(cfg.grid.begin(), cfg.grid.end(), real->wf);
            const auto bin = static_cast<int>(it - cfg.grid.begin()) - 1;
            if (bin >= 0 && bin + 1 < static_cast<int>(cfg.grid.size())) base.point_index = bin;
        }
    }
    for (Algorithm a : cfg.algorithms) {
        SweepRecord r = base;
        r.algorithm = a;
        if (!real) {
            r.error = gen_error;
            out.push_back(std::move(r));
            continue;
        }
        r.delta = real->delta;
        QEstimatorConfig q;
        q.sample_count = cfg.sample_count;
        q.rng_seed = seed;
        const auto start = std::chrono::steady_clock::now();
        try {
            const SelectionResult sel = run_selection(a, real->graph, real->delta, q, cfg.optimal_cap);
            r.num_inputs = sel.S.size();
            r.lambda_min = sel.final_lambda_min;
            r.inputs = sel.S.members();
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        if (cfg.timing) {
            r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline SweepSummary summarize(const SweepConfig& cfg, const std::vector<SweepRecord>& records) {
    SweepSummary s;
    const int points = cfg.sweep_axis == SweepAxis::NegFraction ? static_cast<int>(cfg.grid.size())
                                                                : static_cast<int>(cfg.grid.size()) - 1;
    std::vector<std::map<Algorithm, std::vector<double>>> sizes(static_cast<std::size_t>(points));
    std::vector<std::vector<double>> gaps(static_cast<std::size_t>(points));
    std::vector<double> all_gaps;
    std::map<std::pair<int, int>, std::map<Algorithm, int>> by_realization;
    for (const SweepRecord& r : records) {
        if (r.num_inputs < 0) {
            ++s.failures;
            continue;
        }
        if (r.point_index < 0) continue;
        sizes[static_cast<std::size_t>(r.point_index)][r.algorithm].push_back(r.num_inputs);
        by_realization[{r.point_index, r.realization}][r.algorithm] = r.num_inputs;
    }
    if (cfg.sweep_axis == SweepAxis::WF) {
        for (const SweepRecord& r : records) {
            if (r.point_index < 0 && r.algorithm == cfg.algorithms.front()) ++s.unbinned;
        }
    }
    for (const auto& [key, algs] : by_realization) {
        const auto sub = algs.find(Algorithm::Submodular);
        const auto opt = algs.find(Algorithm::Optimal);
        if (sub == algs.end() || opt == algs.end()) continue;
        const double gap = sub->second - opt->second;
        gaps[static_cast<std::size_t>(key.first)].push_back(gap);
        all_gaps.push_back(gap);
    }
    for (int p = 0; p < points; ++p) {
        PointSummary ps;
        ps.point_index = p;
        ps.point = cfg.grid[static_cast<std::size_t>(p)];
        for (const auto& [a, xs] : sizes[static_cast<std::size_t>(p)]) ps.num_inputs[a] = make_stat(xs);
        if (!gaps[static_cast<std::size_t>(p)].empty()) ps.gap = make_stat(gaps[static_cast<std::size_t>(p)]);
        s.points.push_back(std::move(ps));
    }
    if (!all_gaps.empty()) s.gap = make_stat(all_gaps);
    return s;
}

}  // namespace detail

/// Runs every (grid point, realization) job on `threads` workers. Records are
/// ordered by grid index, realization and the configured algorithm order, so
/// the output does not depend on the thread count.
inline SweepResult run_sweep(const SweepConfig& cfg, int threads = 1) {
    cfg.validate();
    if (threads < 1) throw ConfigError("threads must be positive");
    std::vector<detail::Job> jobs;
    const int grid_points = cfg.sweep_axis == SweepAxis::NegFraction ? static_cast<int>(cfg.grid.size()) : 1;
    for (int p = 0; p < grid_points; ++p)
        for (int r = 0; r < cfg.realizations; ++r) jobs.push_back({p, r});

    std::vector<std::vector<SweepRecord>> slots(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) slots[i] = detail::run_job(cfg, jobs[i]);
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    SweepResult res;
    for (auto& slot : slots)
        for (auto& r : slot) res.records.push_back(std::move(r));
    res.summary = detail::summarize(cfg, res.records);
    return res;
}

/// Recomputes lambda_min(R(S)) for every successful record from its seed and
/// returns the records that fail lambda_min > delta + kStrictTol.
inline std::vector<SweepRecord> revalidate(const SweepConfig& cfg, const std::vector<SweepRecord>& records) {
    std::vector<SweepRecord> bad;
    for (const SweepRecord& r : records) {
        if (r.num_inputs < 0) continue;
        const double neg = cfg.sweep_axis == SweepAxis::NegFraction ? r.point : cfg.neg_fraction;
        const Realization real = make_realization(cfg, neg, r.seed);
        const double lam = lambda_min(reduce(real.graph, InputSet(cfg.n, r.inputs)).RS);
        if (!(lam > r.delta + kStrictTol)) bad.push_back(r);
    }
    return bad;
}

// =============================================================================
// Serialization
// =============================================================================

inline constexpr const char* kSweepCsvHeader =
    "graph_kind,point,realization,seed,algorithm,num_inputs,lambda_min,delta,wall_ms";

inline std::string records_csv(const std::vector<SweepRecord>& records) {
    std::string out = kSweepCsvHeader;
    out += '\n';
    for (const SweepRecord& r : records) {
        out += to_string(r.graph_kind);
        out += ',' + format_double(r.point);
        out += ',' + std::to_string(r.realization);
        out += ',' + std::to_string(r.seed);
        out += ',';
        out += to_string(r.algorithm);
        out += ',' + std::to_string(r.num_inputs);
        out += ',' + format_double(r.lambda_min);
        out += ',' + format_double(r.delta);
        out += ',' + format_double(r.wall_ms);
        out += '\n';
    }
    return out;
}

inline json record_to_json(const SweepRecord& r) {
    json j;
    j["graph_kind"] = std::string(to_string(r.graph_kind));
    j["point"] = json_number(r.point);
    j["point_index"] = r.point_index;
    j["realization"] = r.realization;
    j["seed"] = r.seed;
    j["algorithm"] = std::string(to_string(r.algorithm));
    j["num_inputs"] = r.num_inputs;
    j["lambda_min"] = json_number(r.lambda_min);
    j["delta"] = json_number(r.delta);
    j["wall_ms"] = json_number(r.wall_ms);
    j["inputs"] = json::array();
    for (NodeId v : r.inputs) j["inputs"].push_back(v + 1);
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

inline SweepRecord record_from_json(const json& j) {
    SweepRecord r;
    r.graph_kind = parse_graph_kind(j.at("graph_kind").get<std::string>());
    r.point = number_from_json(j.at("point"));
    r.point_index = j.at("point_index").get<int>();
    r.realization = j.at("realization").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
    r.num_inputs = j.at("num_inputs").get<int>();
    r.lambda_min = number_from_json(j.at("lambda_min"));
    r.delta = number_from_json(j.at("delta"));
    r.wall_ms = number_from_json(j.at("wall_ms"));
    for (const auto& v : j.at("inputs")) r.inputs.push_back(v.get<int>() - 1);
    r.error = j.value("error", std::string{});
    return r;
}

inline std::string records_json(const std::vector<SweepRecord>& records) {
    json a = json::array();
    for (const auto& r : records) a.push_back(record_to_json(r));
    return a.dump(1) + "\n";
}

inline std::vector<SweepRecord> parse_records_json(const std::string& text) {
    std::vector<SweepRecord> out;
    for (const auto& j : json::parse(text)) out.push_back(record_from_json(j));
    return out;
}

enum class ResultFormat { Csv, Json };

inline void emit_results(const std::vector<SweepRecord>& records, const std::string& path, ResultFormat format) {
    write_text_file(path, format == ResultFormat::Csv ? records_csv(records) : records_json(records));
}

inline json stat_to_json(const Stat& s) {
    return {{"count", s.count}, {"mean", json_number(s.mean)}, {"std_error", json_number(s.std_error)}};
}

inline json summary_to_json(const SweepSummary& s) {
    json j;
    j["points"] = json::array();
    for (const auto& p : s.points) {
        json pj;
        pj["point_index"] = p.point_index;
        pj["point"] = json_number(p.point);
        for (const auto& [a, st] : p.num_inputs) pj["num_inputs"][std::string(to_string(a))] = stat_to_json(st);
        pj["gap_submodular_optimal"] = p.gap ? stat_to_json(*p.gap) : json(nullptr);
        j["points"].push_back(pj);
    }
    j["gap_submodular_optimal"] = s.gap ? stat_to_json(*s.gap) : json(nullptr);
    j["failures"] = s.failures;
    j["unbinned"] = s.unbinned;
    return j;
}

// =============================================================================
// Config JSON
// =============================================================================

inline SweepConfig sweep_config_from_json(const json& j) {
    SweepConfig c;
    try {
        for (const auto& [key, _] : j.items()) {
            static const char* known[] = {"graph_kind",   "n",          "realizations", "sweep_axis",   "grid",
                                          "delta_mode",   "omega_range", "weight_range", "edge_prob",   "neg_fraction",
                                          "master_seed",  "algorithms",  "sample_count", "optimal_cap", "timing"};
            if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
                throw ConfigError("unknown config key: " + key);
            }
        }
        if (j.contains("graph_kind")) c.graph_kind = parse_graph_kind(j.at("graph_kind").get<std::string>());
        c.n = j.value("n", c.n);
        c.realizations = j.value("realizations", c.realizations);
        if (j.contains("sweep_axis")) {
            const auto axis = j.at("sweep_axis").get<std::string>();
            if (axis == "neg_fraction") c.sweep_axis = SweepAxis::NegFraction;
            else if (axis == "wf") c.sweep_axis = SweepAxis::WF;
            else throw ConfigError("sweep_axis must be neg_fraction or wf");
        }
        if (j.contains("grid")) c.grid = j.at("grid").get<std::vector<double>>();
        if (j.contains("delta_mode")) {
            const auto mode = j.at("delta_mode").get<std::string>();
            if (mode == "homogeneous") c.delta_mode = DeltaMode::Homogeneous;
            else if (mode == "heterogeneous") c.delta_mode = DeltaMode::Heterogeneous;
            else throw ConfigError("delta_mode must be homogeneous or heterogeneous");
        }
        auto range = [&](const char* key, double& lo, double& hi) {
            if (!j.contains(key)) return;
            const auto v = j.at(key).get<std::vector<double>>();
            if (v.size() != 2) throw ConfigError(std::string(key) + " must have two entries");
            lo = v[0];
            hi = v[1];
        };
        range("omega_range", c.omega_lo, c.omega_hi);
        range("weight_range", c.weight_lo, c.weight_hi);
        c.edge_prob = j.value("edge_prob", c.edge_prob);
        c.neg_fraction = j.value("neg_fraction", c.neg_fraction);
        c.master_seed = j.value("master_seed", c.master_seed);
        if (j.contains("algorithms")) {
            c.algorithms.clear();
            for (const auto& a : j.at("algorithms")) c.algorithms.push_back(parse_algorithm(a.get<std::string>()));
        }
        c.sample_count = j.value("sample_count", c.sample_count);
        c.optimal_cap = j.value("optimal_cap", c.optimal_cap);
        c.timing = j.value("timing", c.timing);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed sweep config: ") + e.what());
    } catch (const GraphError& e) {
        throw ConfigError(e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (c.sweep_axis == SweepAxis::WF && !j.contains("grid")) c.grid = {0.0, 0.5, 1.0, 1.5, 2.0};
    c.validate();
    return c;
}

inline json sweep_config_to_json(const SweepConfig& c) {
    json j;
    j["graph_kind"] = std::string(to_string(c.graph_kind));
    j["n"] = c.n;
    j["realizations"] = c.realizations;
    j["sweep_axis"] = c.sweep_axis == SweepAxis::NegFraction ? "neg_fraction" : "wf";
    j["grid"] = c.grid;
    j["delta_mode"] = c.delta_mode == DeltaMode::Homogeneous ? "homogeneous" : "heterogeneous";
    j["omega_range"] = {c.omega_lo, c.omega_hi};
    j["weight_range"] = {c.weight_lo, c.weight_hi};
    j["edge_prob"] = c.edge_prob;
    j["neg_fraction"] = c.neg_fraction;
    j["master_seed"] = c.master_seed;
    j["algorithms"] = json::array();
    for (Algorithm a : c.algorithms) j["algorithms"].push_back(std::string(to_string(a)));
    j["sample_count"] = c.sample_count;
    j["optimal_cap"] = c.optimal_cap;
    j["timing"] = c.timing;
    return j;
}

}  // namespace kpin
