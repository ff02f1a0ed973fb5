#include "catch_amalgamated.hpp"
#include "helpers.hpp"

using namespace kpin;
using namespace testing_helpers;
using Catch::Matchers::WithinAbs;

namespace {

SweepConfig small_config() {
    SweepConfig c;
    c.graph_kind = GraphKind::DirectedOrientedCycle;
    c.n = 7;
    c.realizations = 5;
    c.grid = {0.0, 0.3};
    c.sample_count = 300;
    c.master_seed = 99;
    return c;
}

}  // namespace

TEST_CASE("WF parameter", "[experiments]") {
    CHECK_THAT(wf_parameter(build_graph(2, {{0, 1, 1}}), Eigen::Vector2d(0, 0.5)), WithinAbs(0.5, 1e-15));
    CHECK(wf_parameter(unit_cycle(3), Eigen::Vector3d::Constant(2.0)) == 0.0);
    CHECK_THAT(wf_parameter(unit_cycle(3), Eigen::Vector3d(1, 2, 3)), WithinAbs(std::sqrt(6.0), 1e-12));
    CHECK_THROWS_AS(wf_parameter(build_graph(3, {{0, 1, 1}, {2, 1, -1}}), Eigen::Vector3d::Zero()), GraphError);
}

TEST_CASE("sweep bookkeeping", "[experiments]") {
    const auto cfg = small_config();
    const auto res = run_sweep(cfg);
    REQUIRE(res.records.size() == 2 * 5 * 4);
    CHECK(res.summary.failures == 0);
    for (std::size_t i = 0; i < res.records.size(); ++i) {
        const auto& r = res.records[i];
        CHECK(r.algorithm == cfg.algorithms[i % 4]);
        CHECK(r.num_inputs >= 0);
        CHECK(r.num_inputs <= cfg.n);
        CHECK(r.wall_ms == 0.0);
        CHECK(r.delta == 0.0);
        CHECK(r.seed == realization_seed(cfg, r.point_index, r.realization));
    }
    for (std::size_t i = 0; i < res.records.size(); i += 4) {
        const int sub = res.records[i].num_inputs;
        const int greedy = res.records[i + 1].num_inputs;
        const int opt = res.records[i + 3].num_inputs;
        CHECK(opt <= sub);
        CHECK(opt <= greedy);
    }
    CHECK(revalidate(cfg, res.records).empty());
    REQUIRE(res.summary.points.size() == 2);
    REQUIRE(res.summary.gap.has_value());
    CHECK(res.summary.gap->count == 10);
    CHECK(res.summary.gap->mean >= 0.0);
}

TEST_CASE("sweep output does not depend on the thread count", "[experiments]") {
    auto cfg = small_config();
    cfg.graph_kind = GraphKind::DirectedOriented;
    const std::string one = records_csv(run_sweep(cfg, 1).records);
    const std::string three = records_csv(run_sweep(cfg, 3).records);
    CHECK(one == three);
    CHECK(records_csv(run_sweep(cfg, 1).records) == one);
    cfg.master_seed = 100;
    CHECK(records_csv(run_sweep(cfg, 1).records) != one);
}

TEST_CASE("result serialization", "[experiments]") {
    CHECK(records_csv({}) == "graph_kind,point,realization,seed,algorithm,num_inputs,lambda_min,delta,wall_ms\n");

    const auto res = run_sweep(small_config());
    const auto csv = records_csv(res.records);
    CHECK(csv.substr(0, csv.find('\n')) == kSweepCsvHeader);
    CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == res.records.size() + 1);

    const auto back = parse_records_json(records_json(res.records));
    CHECK(back == res.records);

    SweepRecord failed;
    failed.error = "boom";
    failed.lambda_min = std::numeric_limits<double>::infinity();
    const auto again = parse_records_json(records_json({failed}));
    REQUIRE(again.size() == 1);
    CHECK(again[0] == failed);

    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
    CHECK(std::stod(format_double(2.0 / 3.0)) == 2.0 / 3.0);
}

TEST_CASE("heterogeneous WF sweep bins realizations", "[experiments]") {
    SweepConfig c;
    c.graph_kind = GraphKind::DirectedOriented;
    c.n = 7;
    c.realizations = 12;
    c.sweep_axis = SweepAxis::WF;
    c.delta_mode = DeltaMode::Heterogeneous;
    c.grid = {0.0, 0.5, 1.0, 100.0};
    c.sample_count = 300;
    c.master_seed = 4;
    c.algorithms = {Algorithm::Submodular, Algorithm::Optimal};
    const auto res = run_sweep(c);
    REQUIRE(res.records.size() == 24);
    for (const auto& r : res.records) {
        CHECK(r.delta > 0.0);
        if (r.point_index >= 0) {
            CHECK(r.point >= c.grid[static_cast<std::size_t>(r.point_index)]);
            CHECK(r.point < c.grid[static_cast<std::size_t>(r.point_index) + 1]);
        }
        if (r.num_inputs >= 0) CHECK(r.lambda_min > r.delta);
    }
    CHECK(revalidate(c, res.records).empty());
    CHECK(res.summary.points.size() == 3);
}

TEST_CASE("sweep config JSON", "[experiments]") {
    const auto cfg = small_config();
    const auto back = sweep_config_from_json(sweep_config_to_json(cfg));
    CHECK(sweep_config_to_json(back) == sweep_config_to_json(cfg));

    CHECK_THROWS_AS(sweep_config_from_json(json{{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(sweep_config_from_json(json{{"grid", json::array()}}), ConfigError);
    CHECK_THROWS_AS(sweep_config_from_json(json{{"realizations", 0}}), ConfigError);
    CHECK_THROWS_AS(sweep_config_from_json(json{{"delta_mode", "heterogeneous"}}), ConfigError);
    CHECK_THROWS_AS(sweep_config_from_json(json{{"graph_kind", "petersen"}}), ConfigError);
    CHECK_THROWS_AS(sweep_config_from_json(json{{"algorithms", {"magic"}}}), ConfigError);
    CHECK_THROWS_AS(sweep_config_from_json(json{{"n", "ten"}}), ConfigError);

    const auto wf = sweep_config_from_json(json{{"sweep_axis", "wf"}, {"delta_mode", "heterogeneous"}});
    CHECK(wf.grid.size() >= 2);
    CHECK(wf.neg_fraction == 0.3);
    CHECK(wf.omega_lo == 0.0);
    CHECK(wf.omega_hi == 2.0);
}

TEST_CASE("failed realizations are recorded, not fatal", "[experiments]") {
    SweepConfig c = small_config();
    c.algorithms = {Algorithm::Optimal};
    c.optimal_cap = 3;
    const auto res = run_sweep(c);
    REQUIRE(res.records.size() == 10);
    for (const auto& r : res.records) {
        CHECK(r.num_inputs == -1);
        CHECK_FALSE(r.error.empty());
    }
    CHECK(res.summary.failures == 10);
    CHECK(records_csv(res.records).find(",-1,nan,") != std::string::npos);
}
