// kuramoto-pin: input selection, simulation and feasibility checks for signed
// Kuramoto networks.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include "kpin/kpin.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct ConfigFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Anything raised while reading user input counts as a configuration error.
template <class F>
auto as_config(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigFailure(e.what());
    }
}

void print_json(const kpin::json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
    } else {
        kpin::write_text_file(path, j.dump(2) + "\n");
    }
}

// ---------------------------------------------------------------------------

struct SweepArgs {
    std::string config;
    std::string out;
    std::string format = "csv";
    std::string summary;
    int threads = 1;
};

int run_sweep(const SweepArgs& a) {
    const kpin::SweepConfig cfg = as_config([&] { return kpin::sweep_config_from_json(kpin::read_json_file(a.config)); });
    if (a.threads < 1) throw ConfigFailure("--threads must be positive");
    const auto format = as_config([&] {
        if (a.format == "csv") return kpin::ResultFormat::Csv;
        if (a.format == "json") return kpin::ResultFormat::Json;
        throw ConfigFailure("--format must be csv or json");
    });
    const kpin::SweepResult res = kpin::run_sweep(cfg, a.threads);
    kpin::emit_results(res.records, a.out, format);
    const kpin::json summary = kpin::summary_to_json(res.summary);
    if (!a.summary.empty()) print_json(summary, a.summary);
    std::cerr << "sweep: " << res.records.size() << " records, " << res.summary.failures << " failures\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct SelectArgs {
    std::string graph;
    std::string delta = "auto";
    std::string algorithm = "submodular";
    int samples = 2000;
    std::uint64_t seed = 0;
    std::optional<double> alpha;
    int optimal_cap = kpin::kDefaultOptimalCap;
    bool bound = false;
    std::string out;
};

int run_select(const SelectArgs& a) {
    const kpin::GraphFile gf = as_config([&] { return kpin::load_graph(a.graph); });
    const kpin::SignedDigraph& g = gf.graph;
    const auto algorithm = as_config([&] { return kpin::parse_algorithm(a.algorithm); });
    const double delta = as_config([&] {
        if (a.delta == "auto") return kpin::auto_delta(g, gf.omega.value_or(Eigen::VectorXd::Zero(g.num_nodes())));
        std::size_t used = 0;
        const double d = std::stod(a.delta, &used);
        if (used != a.delta.size() || !(d >= 0.0)) throw ConfigFailure("--delta must be 'auto' or a nonnegative number");
        return d;
    });
    kpin::QEstimatorConfig q;
    q.sample_count = a.samples;
    q.rng_seed = a.seed;
    q.alpha = a.alpha;
    as_config([&] { q.validate(); });

    kpin::SelectionResult r = kpin::run_selection(algorithm, g, delta, q, a.optimal_cap);
    if (a.bound) {
        std::optional<int> opt;
        if (g.num_nodes() <= a.optimal_cap) opt = kpin::select_optimal(g, delta, a.optimal_cap).S.size();
        r.bound = kpin::optimality_bound(r, kpin::full_R(g), opt);
    }
    print_json(kpin::selection_to_json(r), a.out);
    return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string graph;
    std::string inputs;
    std::string theta0 = "sampled";
    std::string theta0_file;
    std::uint64_t seed = 0;
    double margin = kpin::kDefaultMargin;
    kpin::SimConfig sim;
    long stride = 1;
    std::string out;
    std::string diagnostics;
};

kpin::json trajectory_diagnostics(const kpin::SignedDigraph& g, const Eigen::VectorXd& omega, const kpin::InputSet& s,
                                  const kpin::Trajectory& tr, const kpin::SimConfig& cfg) {
    using kpin::json_number;
    kpin::json j;
    Eigen::VectorXd om = omega;
    for (kpin::NodeId i : s.members()) om(i) = 0.0;
    const kpin::ReducedSystem rs = kpin::reduce(g, om, s);
    const double lam = kpin::lambda_min(rs.RS);
    const double dtw = kpin::dtw_norm(rs);
    j["inputs"] = kpin::input_set_to_json(s);
    j["lambda_min"] = json_number(lam);
    j["dtw_norm"] = json_number(dtw);
    j["certified"] = lam > dtw + kpin::kStrictTol;

    const auto freq = kpin::detect_frequency_sync(tr, cfg);
    const auto phase = kpin::detect_phase_sync(tr, cfg);
    j["frequency_sync"] = {{"synchronized", freq.synchronized}, {"residual", json_number(freq.residual)}};
    j["phase_sync"] = {{"synchronized", phase.synchronized}, {"residual", json_number(phase.residual)}};

    const auto b = kpin::monitor_bounds(tr, g);
    j["bounds"] = {{"sup_sinz_inf", json_number(b.sup_sinz_inf)},
                   {"stayed_interior", b.stayed_interior},
                   {"first_violation_time", b.first_violation_time ? json_number(*b.first_violation_time) : kpin::json(nullptr)},
                   {"first_violation_edge", b.first_violation_edge ? kpin::json(*b.first_violation_edge + 1) : kpin::json(nullptr)}};

    const auto m = kpin::metzler_diagnostic(tr, g, s);
    j["metzler"] = {{"samples", m.samples},
                    {"all_positive", m.all_positive},
                    {"min_weight", json_number(m.min_weight)},
                    {"max_row_sum", json_number(m.max_row_sum)},
                    {"first_nonpositive_time", m.first_nonpositive_time ? json_number(*m.first_nonpositive_time) : kpin::json(nullptr)}};

    if (lam > 0.0 && std::isfinite(lam)) {
        const auto e = kpin::energy_bound(tr, lam, dtw);
        j["energy"] = {{"integral", json_number(e.integral)},
                       {"bound", json_number(e.bound)},
                       {"ratio", json_number(e.ratio)},
                       {"worst_ratio", json_number(e.worst_ratio)},
                       {"worst_ratio_time", json_number(e.worst_ratio_time)}};
    }
    j["storage_initial"] = json_number(tr.V_series.front());
    j["storage_final"] = json_number(tr.V_series.back());
    j["steps"] = tr.size() - 1;
    j["step_h"] = cfg.step_h;
    j["horizon_T"] = cfg.horizon_T;
    return j;
}

int run_simulate(const SimulateArgs& a) {
    const kpin::GraphFile gf = as_config([&] { return kpin::load_graph(a.graph); });
    const kpin::SignedDigraph& g = gf.graph;
    const int n = g.num_nodes();
    const Eigen::VectorXd omega = gf.omega.value_or(Eigen::VectorXd::Zero(n));
    const kpin::InputSet s = as_config([&] { return kpin::parse_input_list(a.inputs, n); });
    as_config([&] { a.sim.validate(); });
    if (a.stride < 1) throw ConfigFailure("--stride must be positive");

    Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(n);
    if (a.theta0 == "zero") {
    } else if (a.theta0 == "sampled") {
        auto th = as_config([&] { return kpin::sample_initial_phases(g, s, a.seed, a.margin); });
        if (!th) throw std::runtime_error("no initial phases satisfy the interval constraints for this graph and input set");
        theta0 = *th;
    } else if (a.theta0 == "file") {
        theta0 = as_config([&] {
            const auto v = kpin::read_json_file(a.theta0_file).get<std::vector<double>>();
            if (static_cast<int>(v.size()) != n) throw ConfigFailure("theta0 file must hold n values");
            Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(v.data(), n);
            for (kpin::NodeId i : s.members()) {
                if (t(i) != 0.0) throw ConfigFailure("theta0 must be 0 on input node " + std::to_string(i + 1));
            }
            return t;
        });
    } else {
        throw ConfigFailure("--theta0 must be zero, sampled or file");
    }

    const kpin::Trajectory tr = kpin::simulate(g, omega, s, theta0, a.sim);
    kpin::write_text_file(a.out, kpin::trajectory_csv(tr, a.stride));
    const std::string side = a.diagnostics.empty() ? a.out + ".json" : a.diagnostics;
    kpin::json diag = trajectory_diagnostics(g, omega, s, tr, a.sim);
    diag["theta0"] = std::vector<double>(theta0.data(), theta0.data() + n);
    kpin::write_text_file(side, diag.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------------------

struct CheckArgs {
    std::string graph;
    double margin = kpin::kDefaultMargin;
    int parity_cap = kpin::kDefaultParityCap;
    std::string out;
    std::string audit_log;
    int audit_min = 3;
    int audit_max = 8;
};

int run_check(const CheckArgs& a) {
    if (!a.audit_log.empty()) {
        if (a.audit_min < 3 || a.audit_max < a.audit_min || a.audit_max > 16) {
            throw ConfigFailure("--audit-min/--audit-max must satisfy 3 <= min <= max <= 16");
        }
        const auto audit = kpin::cycle_parity_audit(a.audit_min, a.audit_max, a.margin);
        const auto count = kpin::write_discrepancy_log(audit, a.audit_log);
        std::cerr << "audit: " << audit.size() << " cycles, " << count << " discrepancies\n";
    }
    if (a.graph.empty()) {
        if (a.audit_log.empty()) throw ConfigFailure("check needs --graph or --audit-log");
        return 0;
    }
    const kpin::GraphFile gf = as_config([&] { return kpin::load_graph(a.graph); });
    const auto rep = as_config([&] { return kpin::check_feasibility(gf.graph, a.margin, a.parity_cap); });
    print_json(kpin::feasibility_to_json(rep), a.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimum-input pinning control for signed Kuramoto networks"};
    app.require_subcommand(1);

    SweepArgs sweep;
    auto* sw = app.add_subcommand("sweep", "Run a seeded selection sweep");
    sw->add_option("--config", sweep.config, "Sweep config JSON")->required();
    sw->add_option("--out", sweep.out, "Results file")->required();
    sw->add_option("--format", sweep.format, "csv or json");
    sw->add_option("--summary", sweep.summary, "Write per-point means here ('-' for stdout)");
    sw->add_option("--threads", sweep.threads, "Worker threads");

    SelectArgs sel;
    auto* se = app.add_subcommand("select", "Select pinned input nodes");
    se->add_option("--graph", sel.graph, "Graph JSON")->required();
    se->add_option("--delta", sel.delta, "'auto' or a threshold");
    se->add_option("--algorithm", sel.algorithm, "submodular, greedy, random or optimal");
    se->add_option("--samples", sel.samples, "Monte-Carlo samples per estimate");
    se->add_option("--seed", sel.seed, "RNG seed");
    se->add_option("--alpha", sel.alpha, "Surrogate penalty (default: automatic)");
    se->add_option("--optimal-cap", sel.optimal_cap, "Node cap for exhaustive search");
    se->add_flag("--bound", sel.bound, "Report the optimality bound against exhaustive search");
    se->add_option("--out", sel.out, "Output JSON (default stdout)");

    SimulateArgs sim;
    auto* si = app.add_subcommand("simulate", "Integrate the pinned dynamics");
    si->add_option("--graph", sim.graph, "Graph JSON")->required();
    si->add_option("--inputs", sim.inputs, "Pinned nodes, 1-based, comma separated");
    si->add_option("--theta0", sim.theta0, "zero, sampled or file");
    si->add_option("--theta0-file", sim.theta0_file, "JSON array of initial phases");
    si->add_option("--seed", sim.seed, "Seed for sampled initial phases");
    si->add_option("--margin", sim.margin, "Interior margin for sampled initial phases");
    si->add_option("--step", sim.sim.step_h, "Step size");
    si->add_option("--T", sim.sim.horizon_T, "Horizon");
    si->add_option("--tol", sim.sim.detector_tol, "Detector tolerance");
    si->add_option("--window", sim.sim.detector_window, "Detector window");
    si->add_option("--stride", sim.stride, "Write every k-th step");
    si->add_option("--out", sim.out, "Trajectory CSV")->required();
    si->add_option("--diagnostics", sim.diagnostics, "Diagnostics JSON (default <out>.json)");

    CheckArgs chk;
    auto* ch = app.add_subcommand("check", "Initial-condition feasibility report");
    ch->add_option("--graph", chk.graph, "Graph JSON");
    ch->add_option("--margin", chk.margin, "Interval shrink for the oracle");
    ch->add_option("--parity-cap", chk.parity_cap, "Node cap for path enumeration");
    ch->add_option("--out", chk.out, "Output JSON (default stdout)");
    ch->add_option("--audit-log", chk.audit_log, "Run the signed-cycle audit and write discrepancies here");
    ch->add_option("--audit-min", chk.audit_min, "Shortest audited cycle");
    ch->add_option("--audit-max", chk.audit_max, "Longest audited cycle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sw) return run_sweep(sweep);
        if (*se) return run_select(sel);
        if (*si) return run_simulate(sim);
        if (*ch) return run_check(chk);
    } catch (const ConfigFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitConfig;
}
