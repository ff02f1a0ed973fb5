#include "catch_amalgamated.hpp"
#include "helpers.hpp"

using namespace kpin;
using namespace testing_helpers;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::MatrixXd lifted(const Eigen::MatrixXd& R, const std::vector<EdgeId>& pinned, double alpha) {
    Eigen::MatrixXd a = R;
    for (EdgeId e : pinned) a(e, e) += alpha;
    return a;
}

SignedDigraph five_node_graph() {
    return build_graph(5, {{0, 1, -1.86}, {2, 1, 1.29}, {3, 1, -1.92}, {4, 1, -1.86}, {3, 4, 1.27}});
}

}  // namespace

TEST_CASE("alpha selection", "[select]") {
    CHECK(choose_alpha(Eigen::MatrixXd::Ones(1, 1), 0.5) == 1.0);
    const auto R = full_R(unit_cycle(3));
    CHECK_THAT(choose_alpha(R, 0.0), WithinAbs(std::max(1.0, R.norm() - lambda_min(R)), 1e-12));
    CHECK_THROWS(choose_alpha(R, -1.0));

    QEstimatorConfig cfg;
    cfg.alpha = 5.0;
    CHECK(select_submodular(unit_cycle(3), 0.0, cfg).alpha == 5.0);
    cfg.alpha = -1.0;
    CHECK_THROWS(cfg.validate());
    cfg.alpha.reset();
    cfg.sample_count = 0;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("surrogate estimates", "[select]") {
    QEstimatorConfig cfg;
    cfg.rng_seed = 4;
    const auto id = q_estimate(Eigen::MatrixXd::Identity(2, 2), {}, 0.5, cfg);
    CHECK(id.value == 0.5);
    CHECK(id.std_error == 0.0);

    const auto g = unit_cycle(3);
    const auto R = full_R(g);
    const auto empty = q_estimate(R, {}, 0.25, cfg);
    CHECK(empty.value < 0.25 - 3.0 * empty.std_error);

    const std::vector<EdgeId> pinned{*g.find_edge(2, 0)};
    const double alpha = choose_alpha(R, 0.25);
    REQUIRE(oracle::jacobi_lambda_min(lifted(R, pinned, alpha)) >= 0.25);
    const auto lifted_q = q_estimate(R, pinned, 0.25, cfg);
    CHECK(lifted_q.value >= 0.25 - 2.0 * lifted_q.std_error - 1e-15);

    CHECK(q_estimate(Eigen::MatrixXd(0, 0), {}, 0.7, cfg).value == 0.7);
}

TEST_CASE("unit sphere samples", "[select]") {
    const auto w = unit_sphere_samples(4, 100, 9);
    CHECK((w.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(unit_sphere_samples(4, 100, 9) == w);
    CHECK(unit_sphere_samples(4, 100, 10) != w);
}

TEST_CASE("the surrogate is monotone with shared samples", "[select][property]") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        const auto g = random_graph(kAllKinds[trial % 4], 7, static_cast<std::uint64_t>(trial));
        const auto R = full_R(g);
        const double delta = 0.3;
        SurrogateEvaluator eval(R, choose_alpha(R, delta), delta, unit_sphere_samples(g.num_edges(), 500, trial));
        std::vector<EdgeId> pinned;
        double prev = eval(pinned).value;
        std::vector<EdgeId> order(static_cast<std::size_t>(g.num_edges()));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (EdgeId e : order) {
            pinned.push_back(e);
            const double q = eval(pinned).value;
            CHECK(q >= prev - 1e-12);
            prev = q;
        }
        CHECK(prev <= delta);
    }
}

TEST_CASE("the surrogate has diminishing returns with shared samples", "[select][property]") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        const auto g = random_graph(kAllKinds[trial % 4], 7, static_cast<std::uint64_t>(50 + trial));
        const auto R = full_R(g);
        const double delta = 0.5;
        SurrogateEvaluator eval(R, choose_alpha(R, delta), delta, unit_sphere_samples(g.num_edges(), 1000, trial));
        const auto s = random_subset(7, rng, 0.2);
        auto t = s;
        for (int v = 0; v < 7; ++v)
            if (rng() % 3 == 0) t = t.with(v);
        const NodeId v = static_cast<NodeId>(rng() % 7);
        if (t.contains(v)) continue;
        const auto qs = eval(edges_into(g, s));
        const auto qsv = eval(edges_into(g, s.with(v)));
        const auto qt = eval(edges_into(g, t));
        const auto qtv = eval(edges_into(g, t.with(v)));
        const double slack = 2.0 * std::max({qs.std_error, qsv.std_error, qt.std_error, qtv.std_error});
        CHECK(qsv.value - qs.value >= qtv.value - qt.value - slack);
    }
}

TEST_CASE("surrogate threshold agrees with the lifted eigenvalue", "[select][property]") {
    const auto g = five_node_graph();
    const auto R = full_R(g);
    const double delta = 0.5;
    QEstimatorConfig cfg;
    cfg.rng_seed = 1;
    const double alpha = choose_alpha(R, delta);
    for (std::uint32_t mask = 0; mask < 32; ++mask) {
        const auto pinned = edges_into(g, subset_from_mask(5, mask));
        const double lam = lambda_min(lifted(R, pinned, alpha));
        const auto q = q_estimate(R, pinned, delta, cfg);
        INFO("mask " << mask << " lambda " << lam << " q " << q.value << " se " << q.std_error);
        CHECK((lam >= delta) == (q.value >= delta - 3.0 * q.std_error));
        if (lam < delta - 0.05) CHECK(q.value < delta - q.std_error);
    }
}

TEST_CASE("selection on the 3-cycle", "[select]") {
    const auto g = unit_cycle(3);
    for (Algorithm a : {Algorithm::Submodular, Algorithm::Greedy, Algorithm::Random, Algorithm::Optimal}) {
        const auto r = run_selection(a, g, 0.0, {});
        CHECK(r.S.size() == 1);
        CHECK(r.terminated_ok);
        CHECK_THAT(r.final_lambda_min, WithinAbs(0.5, 1e-12));
    }
    CHECK(select_greedy_lambda(g, 0.0).S.members() == std::vector<NodeId>{0});
    CHECK(select_optimal(g, 0.0).S.members() == std::vector<NodeId>{0});
}

TEST_CASE("already certified graphs need no inputs", "[select]") {
    const auto edge = build_graph(2, {{0, 1, 1.0}});
    CHECK(lambda_min(full_R(edge)) == 1.0);
    for (Algorithm a : {Algorithm::Submodular, Algorithm::Greedy, Algorithm::Random, Algorithm::Optimal}) {
        const auto r = run_selection(a, edge, 0.0, {});
        CHECK(r.S.empty());
        CHECK(r.iterations.empty());
    }
    const double bar = auto_delta(edge, Eigen::Vector2d(0, 0.5));
    CHECK(bar == 0.5);
    const auto het = select_submodular(edge, bar);
    CHECK(certify(edge, het.S, bar).satisfied);

    const auto path = build_graph(3, {{0, 1, 1}, {1, 2, 1}});
    CHECK_THAT(oracle::jacobi_lambda_min(oracle::brute_R(3, oracle_edges(path), {false, false, false})),
               WithinAbs(0.5, 1e-12));
    CHECK(select_greedy_lambda(path, 0.0).S.empty());
}

TEST_CASE("exhaustive search", "[select]") {
    const auto ten = unit_cycle(10);
    const auto opt = select_optimal(ten, 0.0);
    CHECK(opt.S.size() == 1);
    CHECK(opt.S.size() <= select_submodular(ten, 0.0).S.size());
    CHECK_THROWS(select_optimal(ten, 0.0, 8));
}

TEST_CASE("every algorithm returns a certified set", "[select][property]") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    for (int trial = 0; trial < 24; ++trial) {
        const auto g = random_graph(kAllKinds[trial % 4], 8, static_cast<std::uint64_t>(trial), 0.3);
        Eigen::VectorXd om = Eigen::VectorXd::Zero(8);
        if (trial % 2 == 1)
            for (int i = 0; i < 8; ++i) om(i) = u(rng);
        const double delta = auto_delta(g, om);
        QEstimatorConfig cfg;
        cfg.sample_count = 500;
        cfg.rng_seed = static_cast<std::uint64_t>(trial);
        const auto opt = select_optimal(g, delta);
        for (Algorithm a : {Algorithm::Submodular, Algorithm::Greedy, Algorithm::Random, Algorithm::Optimal}) {
            const auto r = run_selection(a, g, delta, cfg);
            CHECK(certify(g, r.S, delta).satisfied);
            CHECK(r.S.size() >= opt.S.size());
            CHECK_THAT(r.final_lambda_min, WithinAbs(lambda_min(reduce(g, r.S).RS), 1e-12));
        }
        const auto greedy = select_greedy_lambda(g, delta);
        for (std::size_t i = 1; i < greedy.iterations.size(); ++i) {
            CHECK(greedy.iterations[i].lambda_min >= greedy.iterations[i - 1].lambda_min - 1e-12);
        }
    }
}

TEST_CASE("seeded selections are reproducible", "[select]") {
    const auto g = random_graph(GraphKind::DirectedOriented, 9, 3);
    const auto a = select_random(g, 0.0, 77);
    const auto b = select_random(g, 0.0, 77);
    CHECK(a.S == b.S);
    QEstimatorConfig cfg;
    cfg.rng_seed = 5;
    CHECK(select_submodular(g, 0.0, cfg).S == select_submodular(g, 0.0, cfg).S);
}

TEST_CASE("optimality bound report", "[select]") {
    const auto g = unit_cycle(3);
    const auto R = full_R(g);
    const auto r = select_submodular(g, 0.0);
    REQUIRE(r.iterations.size() == 1);
    // delta = 0 = lambda_min(R): the stated ratio is 0/0 and is reported absent.
    const auto b = optimality_bound(r, R, 1);
    CHECK_FALSE(b.stated_log_ratio.has_value());
    REQUIRE(b.proof_log_ratio.has_value());
    CHECK(*b.proof_log_ratio == 0.0);
    CHECK(b.excess_over_optimal == 0);

    const auto r2 = select_submodular(g, 0.25);
    const auto b2 = optimality_bound(r2, R);
    if (r2.iterations.size() == 1) {
        REQUIRE(b2.stated_log_ratio.has_value());
        CHECK_THAT(*b2.stated_log_ratio, WithinAbs(0.0, 1e-15));
    } else {
        CHECK(b2.stated_log_ratio.value_or(0.0) >= 0.0);
    }

    const auto none = select_submodular(build_graph(2, {{0, 1, 1}}), 0.0);
    const auto b3 = optimality_bound(none, full_R(build_graph(2, {{0, 1, 1}})));
    CHECK_FALSE(b3.stated_log_ratio.has_value());
    CHECK_FALSE(b3.proof_log_ratio.has_value());
}
