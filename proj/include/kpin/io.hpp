#pragma once

// File formats. Node ids are 1-based on disk and 0-based in memory.

#include "kpin/dynamics.hpp"
#include "kpin/feasibility.hpp"
#include "kpin/graph.hpp"
#include "kpin/select.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace kpin {

using json = nlohmann::json;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest representation that parses back to the same double.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// JSON has no inf/nan; those become strings.
inline json json_number(double x) {
    if (std::isfinite(x)) return x;
    return format_double(x);
}

inline double number_from_json(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw IoError("expected a number, got " + j.dump());
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

// =============================================================================
// Graphs
// =============================================================================

struct GraphFile {
    SignedDigraph graph;
    std::optional<Eigen::VectorXd> omega;
};

/// For undirected graphs each pair may be listed once or in both directions.
inline GraphFile graph_from_json(const json& j) {
    try {
        const int n = j.at("n").get<int>();
        const bool undirected = j.value("undirected", false);
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges")) {
            const int src = e.at("src").get<int>();
            const int dst = e.at("dst").get<int>();
            if (src < 1 || src > n || dst < 1 || dst > n) {
                throw GraphError("edge endpoint out of range 1.." + std::to_string(n) + ": (" +
                                 std::to_string(src) + ", " + std::to_string(dst) + ")");
            }
            edges.push_back({src - 1, dst - 1, e.at("w").get<double>()});
        }
        if (undirected) {
            std::vector<Edge> sym;
            for (const Edge& e : edges) {
                sym.push_back(e);
                const bool listed = std::any_of(edges.begin(), edges.end(),
                                                [&](const Edge& f) { return f.src == e.dst && f.dst == e.src; });
                if (!listed) sym.push_back({e.dst, e.src, e.weight});
            }
            edges = std::move(sym);
        }
        GraphFile f{SignedDigraph(n, std::move(edges), undirected), std::nullopt};
        if (j.contains("omega") && !j.at("omega").is_null()) {
            const auto w = j.at("omega").get<std::vector<double>>();
            if (static_cast<int>(w.size()) != n) throw GraphError("omega length must equal n");
            f.omega = Eigen::Map<const Eigen::VectorXd>(w.data(), n);
        }
        return f;
    } catch (const json::exception& e) {
        throw GraphError(std::string("malformed graph JSON: ") + e.what());
    }
}

inline GraphFile load_graph(const std::string& path) { return graph_from_json(read_json_file(path)); }

inline json graph_to_json(const SignedDigraph& g, const std::optional<Eigen::VectorXd>& omega = std::nullopt) {
    json j;
    j["n"] = g.num_nodes();
    j["undirected"] = g.undirected();
    j["edges"] = json::array();
    for (const Edge& e : g.edges()) j["edges"].push_back({{"src", e.src + 1}, {"dst", e.dst + 1}, {"w", e.weight}});
    if (omega) j["omega"] = std::vector<double>(omega->data(), omega->data() + omega->size());
    return j;
}

/// "1,3,4" (1-based) or "" for the empty set.
inline InputSet parse_input_list(std::string_view text, int n) {
    std::vector<NodeId> ids;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        std::string_view tok = text.substr(pos, comma - pos);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        if (!tok.empty()) {
            int v = 0;
            const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
                throw GraphError("bad node id in input list: " + std::string(tok));
            }
            if (v < 1 || v > n) throw GraphError("input node out of range 1.." + std::to_string(n) + ": " + std::to_string(v));
            ids.push_back(v - 1);
        }
        pos = comma + 1;
    }
    return InputSet(n, std::move(ids));
}

inline json input_set_to_json(const InputSet& s) {
    json a = json::array();
    for (NodeId v : s.members()) a.push_back(v + 1);
    return a;
}

// =============================================================================
// Selection
// =============================================================================

inline json selection_to_json(const SelectionResult& r) {
    json j;
    j["algorithm"] = std::string(to_string(r.algorithm));
    j["S"] = input_set_to_json(r.S);
    j["delta"] = json_number(r.delta);
    j["alpha"] = r.alpha ? json_number(*r.alpha) : json(nullptr);
    j["sample_count"] = r.sample_count;
    j["seed"] = r.seed;
    j["initial_lambda_min"] = json_number(r.initial_lambda_min);
    j["final_lambda_min"] = json_number(r.final_lambda_min);
    j["terminated_ok"] = r.terminated_ok;
    j["iterations"] = json::array();
    for (const auto& it : r.iterations) {
        json t;
        t["chosen"] = it.chosen + 1;
        t["q"] = it.q ? json_number(*it.q) : json(nullptr);
        t["q_stderr"] = it.q_stderr ? json_number(*it.q_stderr) : json(nullptr);
        t["lambda_min"] = json_number(it.lambda_min);
        j["iterations"].push_back(t);
    }
    json b;
    auto opt = [](const auto& o) { return o ? json_number(static_cast<double>(*o)) : json(nullptr); };
    b["stated_log_ratio"] = opt(r.bound.stated_log_ratio);
    b["proof_log_ratio"] = opt(r.bound.proof_log_ratio);
    b["optimal_size"] = r.bound.optimal_size ? json(*r.bound.optimal_size) : json(nullptr);
    b["excess_over_optimal"] = r.bound.excess_over_optimal ? json(*r.bound.excess_over_optimal) : json(nullptr);
    b["proof_rhs"] = opt(r.bound.proof_rhs);
    j["bound"] = b;
    return j;
}

// =============================================================================
// Feasibility
// =============================================================================

inline json lp_to_json(const LpReport& lp) {
    json j;
    j["feasible"] = lp.feasible;
    j["requested_margin"] = lp.requested_margin;
    j["max_margin"] = lp.max_margin;
    if (lp.witness) {
        j["witness"] = std::vector<double>(lp.witness->data(), lp.witness->data() + lp.witness->size());
        j["witness_margin"] = json_number(lp.witness_margin);
    } else {
        j["witness"] = nullptr;
    }
    return j;
}

inline json feasibility_to_json(const FeasibilityReport& r) {
    json j;
    j["lp"] = lp_to_json(r.lp);
    if (r.parity) {
        json p;
        p["verdict"] = r.parity->verdict;
        p["method"] = r.parity->method;
        p["links"] = json::array();
        for (const auto& d : r.parity->links) {
            json l;
            l["nodes"] = {d.a + 1, d.b + 1};
            l["sign"] = d.sign;
            l["paths_checked"] = d.paths_checked;
            l["passed"] = d.passed;
            if (!d.passed) {
                json path = json::array();
                for (NodeId v : d.failing_path) path.push_back(v + 1);
                l["failing_path"] = path;
                l["failing_ep"] = d.failing_ep;
                l["failing_en"] = d.failing_en;
            }
            p["links"].push_back(l);
        }
        j["parity"] = p;
    } else {
        j["parity"] = nullptr;
        j["parity_error"] = r.parity_error;
    }
    return j;
}

inline json audit_entry_to_json(const CycleAuditEntry& a) {
    return {{"length", a.length}, {"signs", a.signs},   {"ep", a.ep},
            {"en", a.en},         {"parity", a.parity}, {"lp_feasible", a.lp_feasible}};
}

/// One JSON object per line for every parity-true, oracle-infeasible cycle.
/// Returns the number of lines written.
inline std::size_t write_discrepancy_log(const std::vector<CycleAuditEntry>& audit, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    std::size_t count = 0;
    for (const auto& a : audit) {
        if (!a.counterexample()) continue;
        out << audit_entry_to_json(a).dump() << '\n';
        ++count;
    }
    if (!out) throw IoError("write failed: " + path);
    return count;
}

// =============================================================================
// Trajectories
// =============================================================================

/// CSV with columns t, theta_1..theta_n, one row per `stride` steps (the last
/// step is always included).
inline std::string trajectory_csv(const Trajectory& tr, long stride = 1) {
    if (stride < 1) throw std::invalid_argument("stride must be positive");
    std::string out = "t";
    for (int i = 1; i <= tr.num_nodes(); ++i) out += ",theta_" + std::to_string(i);
    out += '\n';
    const auto last = static_cast<long>(tr.size()) - 1;
    for (long k = 0; k <= last; ++k) {
        if (k % stride != 0 && k != last) continue;
        out += format_double(tr.times[static_cast<std::size_t>(k)]);
        for (int i = 0; i < tr.num_nodes(); ++i) {
            out += ',';
            out += format_double(tr.theta(k, i));
        }
        out += '\n';
    }
    return out;
}

}  // namespace kpin
