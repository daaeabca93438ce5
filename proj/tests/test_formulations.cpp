#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "secnet/formulations.hpp"
#include "secnet/lp.hpp"
#include "secnet/netmodel.hpp"
#include "testutil.hpp"

using namespace secnet;
using formulations::Algo;
using formulations::FormulationConfig;
using testutil::objective_of;

namespace {

double solve_with_halved_timeshare(const Network& net) {
    FormulationConfig cfg;
    cfg.algo = Algo::Algo2;
    auto prog = formulations::build(net, cfg);
    for (auto& c : prog.constraints)
        if (c.label.rfind("timeshare:", 0) == 0) c.rhs *= 0.5;
    auto sol = lp::solve(prog);
    REQUIRE(sol.status == lp::SolveStatus::Optimal);
    return sol.objective;
}

}  // namespace

TEST_CASE("delivered randomness minus conservative leakage equals the link-key size") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 200; ++t) {
        double delta = testutil::uniform(rng, 0.0, 0.99);
        double delta_e = testutil::uniform(rng, 0.0, 1.0);
        double r = testutil::uniform(rng, 0.0, 1.0);
        double k = testutil::uniform(rng, 0.0, 1.0);
        auto c = formulations::edge_coeffs(delta, delta_e);
        double s = r + k * c.mds_deliver;
        double conservative = r * c.eve_arq + k * c.eve_mds;
        double key = (r + k) * c.link_key;
        REQUIRE(std::abs((s - conservative) - key) <= 1e-12);
    }
}

TEST_CASE("end-to-end LP on a single edge") {
    REQUIRE(objective_of(testutil::single_edge(0.0, 0.5), Algo::Algo1) == Catch::Approx(0.5));
    REQUIRE(objective_of(testutil::single_edge(0.0, 0.0), Algo::Algo1) ==
            Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("single-edge rate matches the closed form on a parameter grid") {
    for (double delta : {0.0, 0.2, 0.5, 0.8, 1.0})
        for (double delta_e : {0.0, 0.25, 0.5, 0.9, 1.0}) {
            double expect = testutil::single_edge_rate(delta, delta_e);
            double got = objective_of(testutil::single_edge(delta, delta_e), Algo::Algo1);
            INFO("delta=" << delta << " deltaE=" << delta_e);
            REQUIRE(got == Catch::Approx(expect).margin(1e-7));
        }
}

TEST_CASE("two parallel lossless edges reach the secure network coding rate") {
    REQUIRE(objective_of(testutil::two_parallel(0, 0, 0, 0), Algo::Algo1) == Catch::Approx(1.0));
    REQUIRE(objective_of(testutil::two_parallel(0, 0, 0, 0), Algo::SncBaseline) == Catch::Approx(1.0));
}

TEST_CASE("a deaf eavesdropper reduces every formulation to max flow") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 6; ++t) {
        auto base = testutil::random_dag(rng, 6);
        std::vector<EdgeChannel> edges(base.edges().begin(), base.edges().end());
        for (auto& e : edges) e.delta_e = 1.0;
        Network net(base.vertices(), edges, base.sources(), base.destination());
        std::vector<double> caps;
        for (const auto& e : net.edges()) caps.push_back(1.0 - e.delta);
        double flow = max_flow(net, caps);
        for (Algo algo : {Algo::Algo1, Algo::Algo2, Algo::Algo3})
            REQUIRE(objective_of(net, algo) == Catch::Approx(flow).margin(1e-7));
        FormulationConfig cfg4;
        cfg4.algo = Algo::Algo4;
        cfg4.wiretap_count = 1;
        auto sol4 = lp::solve(formulations::build(net, cfg4));
        REQUIRE(sol4.objective == Catch::Approx(flow).margin(1e-7));
    }
}

TEST_CASE("lossless unit networks achieve mincut minus one") {
    std::mt19937_64 rng(19);
    for (int t = 0; t < 8; ++t) {
        auto net = testutil::random_dag(rng, 8, /*lossless=*/true);
        std::vector<double> unit(net.edge_count(), 1.0);
        double mincut = max_flow(net, unit);
        REQUIRE(objective_of(net, Algo::Algo1) == Catch::Approx(mincut - 1.0).margin(1e-7));
    }
}

TEST_CASE("multi-source networks are rejected where a single source is required") {
    Network net({}, {{"e1", "s1", "d", 0, 0.5}, {"e2", "s2", "d", 0, 0.5}}, {"s1", "s2"}, "d");
    for (Algo algo : {Algo::Algo1, Algo::Algo2, Algo::Algo3, Algo::Algo4, Algo::SncBaseline}) {
        FormulationConfig cfg;
        cfg.algo = algo;
        REQUIRE_THROWS_AS(formulations::build(net, cfg), InputError);
    }
}

TEST_CASE("path formulation on the lossless two-hop line with a deaf second hop") {
    auto net = testutil::line_network({{0.0, 0.5}, {0.0, 1.0}});
    REQUIRE(objective_of(net, Algo::Algo2) == Catch::Approx(0.5));
}

TEST_CASE("path formulation equals the end-to-end LP on a single edge") {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 10; ++t) {
        auto net = testutil::single_edge(testutil::uniform(rng, 0, 0.95), testutil::random_prob(rng));
        REQUIRE(objective_of(net, Algo::Algo2) ==
                Catch::Approx(objective_of(net, Algo::Algo1)).margin(1e-9));
    }
}

TEST_CASE("path and virtual-flow formulations dominate the conservative one") {
    std::mt19937_64 rng(29);
    for (int t = 0; t < 10; ++t) {
        auto net = testutil::random_dag(rng, 6);
        double a1 = objective_of(net, Algo::Algo1);
        REQUIRE(objective_of(net, Algo::Algo2) >= a1 - 1e-6);
        REQUIRE(objective_of(net, Algo::Algo3) >= a1 - 1e-6);
    }
}

TEST_CASE("virtual-flow formulation equals the end-to-end LP on a single edge") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 10; ++t) {
        auto net = testutil::single_edge(testutil::uniform(rng, 0, 0.95), testutil::random_prob(rng));
        REQUIRE(objective_of(net, Algo::Algo3) ==
                Catch::Approx(objective_of(net, Algo::Algo1)).margin(1e-9));
    }
}

TEST_CASE("exact accounting strictly beats the conservative bound on a lossy relay") {
    // the relay's MDS forwarding loses randomness, so the conservative bound
    // overstates what the eavesdropper on edge 1 shares with the destination
    auto net = testutil::line_network({{0.0, 0.6}, {0.7, 0.6}});
    double a1 = objective_of(net, Algo::Algo1);
    double a3 = objective_of(net, Algo::Algo3);
    double a2 = objective_of(net, Algo::Algo2);
    REQUIRE(a3 > a1 + 5e-3);
    REQUIRE(a3 == Catch::Approx(a2).margin(1e-7));  // polynomial form matches the path form here
}

TEST_CASE("both exact formulations dominate the conservative one") {
    // The two exact forms are incomparable with each other: link keys favour
    // the path form, while relay re-mixing lets the virtual-flow form dilute
    // what the eavesdropper's packets say about the delivered randomness.
    std::mt19937_64 rng(59);
    bool mixing_won = false;
    for (int t = 0; t < 12; ++t) {
        auto net = testutil::random_dag(rng, 6);
        double a1 = objective_of(net, Algo::Algo1);
        double a3 = objective_of(net, Algo::Algo3);
        double a2 = objective_of(net, Algo::Algo2);
        REQUIRE(a3 >= a1 - 1e-7);
        REQUIRE(a2 >= a1 - 1e-7);
        if (a3 > a2 + 1e-6) mixing_won = true;
    }
    REQUIRE(mixing_won);  // this seed includes such an instance
}

TEST_CASE("multi-eavesdropper LP with one wiretap reproduces the end-to-end LP") {
    std::mt19937_64 rng(37);
    for (int t = 0; t < 6; ++t) {
        auto net = testutil::random_dag(rng, 6);
        FormulationConfig cfg;
        cfg.algo = Algo::Algo4;
        cfg.wiretap_count = 1;
        auto sol = lp::solve(formulations::build(net, cfg));
        REQUIRE(sol.status == lp::SolveStatus::Optimal);
        REQUIRE(sol.objective == Catch::Approx(objective_of(net, Algo::Algo1)).margin(1e-7));
    }
}

TEST_CASE("two wiretaps on two parallel lossless edges kill the rate") {
    auto net = testutil::two_parallel(0, 0, 0, 0);
    FormulationConfig cfg;
    cfg.algo = Algo::Algo4;
    cfg.wiretap_count = 2;
    auto sol = lp::solve(formulations::build(net, cfg));
    REQUIRE(sol.objective == Catch::Approx(0.0).margin(1e-9));
    cfg.wiretap_count = 1;
    REQUIRE(lp::solve(formulations::build(net, cfg)).objective == Catch::Approx(1.0));
}

TEST_CASE("multi-eavesdropper guards") {
    auto net = testutil::diamond();
    REQUIRE_THROWS_AS(formulations::build_algo4(net, 0), InputError);
    REQUIRE_THROWS_AS(formulations::build_algo4(net, 5), InputError);
    REQUIRE_THROWS_AS(formulations::build_algo4(net, 2, /*max_security_rows=*/3), CapacityError);
}

TEST_CASE("multi-source LP with one source reproduces the path formulation") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 6; ++t) {
        auto net = testutil::random_dag(rng, 6);
        FormulationConfig cfg;
        cfg.algo = Algo::Algo5;
        auto sol = lp::solve(formulations::build(net, cfg));
        REQUIRE(sol.status == lp::SolveStatus::Optimal);
        REQUIRE(sol.objective == Catch::Approx(objective_of(net, Algo::Algo2)).margin(1e-7));
    }
}

TEST_CASE("multi-source LP pools randomness into a shared link key") {
    // two sources feed a shared relay->destination bottleneck
    Network full({},
                 {{"e1", "s1", "r", 0.1, 0.6},
                  {"e2", "s2", "r", 0.1, 0.6},
                  {"e3", "r", "d", 0.2, 0.5}},
                 {"s1", "s2"}, "d");
    FormulationConfig cfg;
    cfg.algo = Algo::Algo5;
    auto sum_rate = lp::solve(formulations::build(full, cfg));
    REQUIRE(sum_rate.status == lp::SolveStatus::Optimal);

    Network sub1({}, {{"e1", "s1", "r", 0.1, 0.6}, {"e3", "r", "d", 0.2, 0.5}}, {"s1"}, "d");
    Network sub2({}, {{"e2", "s2", "r", 0.1, 0.6}, {"e3", "r", "d", 0.2, 0.5}}, {"s2"}, "d");
    double independent = solve_with_halved_timeshare(sub1) + solve_with_halved_timeshare(sub2);
    REQUIRE(sum_rate.objective >= independent - 1e-7);

    // a deaf eavesdropper turns it into multi-source max flow
    Network deaf({},
                 {{"e1", "s1", "r", 0.1, 1.0}, {"e2", "s2", "r", 0.1, 1.0}, {"e3", "r", "d", 0.2, 1.0}},
                 {"s1", "s2"}, "d");
    auto deaf_sol = lp::solve(formulations::build(deaf, cfg));
    REQUIRE(deaf_sol.objective ==
            Catch::Approx(max_flow(deaf, {0.9, 0.9, 0.8})).margin(1e-7));
}

TEST_CASE("channel-coded baseline on unit mincut-two networks") {
    REQUIRE(objective_of(testutil::diamond(), Algo::SncBaseline) == Catch::Approx(1.0));
    // at fig4-style parameters the erasure-aware LP strictly wins
    Network net({}, {{"e1", "s", "d", 0.6, 0.8}, {"e2", "s", "d", 0.6, 0.9}}, {"s"}, "d");
    REQUIRE(objective_of(net, Algo::Algo1) > objective_of(net, Algo::SncBaseline) + 1e-6);
}

TEST_CASE("dead edges are pinned to zero everywhere") {
    auto net = testutil::two_parallel(1.0, 0.3, 0.0, 0.5);
    FormulationConfig cfg;
    auto outcome = formulations::solve_scheme(net, cfg);
    REQUIRE(outcome.scheme.per_edge[0].m == 0.0);
    REQUIRE(outcome.scheme.per_edge[0].k == 0.0);
    REQUIRE(outcome.scheme.per_edge[0].r == 0.0);
    REQUIRE(outcome.scheme.per_edge[0].s == 0.0);
    REQUIRE(outcome.scheme.rate == Catch::Approx(0.5));  // only the live edge contributes
}

TEST_CASE("arq-only pinning can only lower the rate") {
    auto net = testutil::line_network({{0.2, 0.6}, {0.8, 0.6}});
    double full = objective_of(net, Algo::Algo1);
    FormulationConfig cfg;
    cfg.arq_only = true;
    auto sol = lp::solve(formulations::build(net, cfg));
    REQUIRE(sol.objective <= full + 1e-9);
}

TEST_CASE("scheme extraction on the single-edge optimum") {
    auto net = testutil::single_edge(0.0, 0.5);
    auto outcome = formulations::solve_scheme(net, {});
    REQUIRE(outcome.scheme.rate == Catch::Approx(0.5));
    const auto& e = outcome.scheme.per_edge[0];
    REQUIRE(e.m == Catch::Approx(0.5));
    REQUIRE(e.k + e.r == Catch::Approx(0.5));
    REQUIRE(e.s == Catch::Approx(0.5));
}

TEST_CASE("extraction drops gratuitous randomness when the eavesdropper is deaf") {
    auto net = testutil::two_parallel(0.25, 1.0, 0.5, 1.0);
    auto outcome = formulations::solve_scheme(net, {});
    for (const auto& e : outcome.scheme.per_edge) {
        REQUIRE(e.k == Catch::Approx(0.0).margin(1e-9));
        REQUIRE(e.r == Catch::Approx(0.0).margin(1e-9));
    }
    REQUIRE(outcome.scheme.rate == Catch::Approx(0.75 + 0.5).margin(1e-7));
}

TEST_CASE("virtual flows never exceed their diagonal") {
    auto net = testutil::diamond(0.2, 0.5);
    FormulationConfig cfg;
    cfg.algo = Algo::Algo3;
    auto outcome = formulations::solve_scheme(net, cfg);
    REQUIRE(outcome.scheme.virtual_flows.has_value());
    for (const auto& [pair, flow] : *outcome.scheme.virtual_flows) {
        double diag = outcome.scheme.per_edge[static_cast<std::size_t>(pair.second)].s;
        REQUIRE(flow <= diag + 1e-7);
    }
}

TEST_CASE("extracted schemes satisfy the built LP and the original security form") {
    std::mt19937_64 rng(47);
    for (int t = 0; t < 6; ++t) {
        auto net = testutil::random_dag(rng, 6);
        for (Algo algo : {Algo::Algo1, Algo::Algo2, Algo::Algo3}) {
            FormulationConfig cfg;
            cfg.algo = algo;
            auto outcome = formulations::solve_scheme(net, cfg);
            REQUIRE(lp::check_feasibility(outcome.lp, outcome.refined.values) <= 1e-7);
            if (algo == Algo::Algo3)
                REQUIRE(formulations::algo3_security_residual(net, outcome.scheme) <= 1e-7);
        }
    }
}

TEST_CASE("solve_scheme is deterministic") {
    auto net = testutil::diamond(0.3, 0.7);
    auto a = formulations::solve_scheme(net, {});
    auto b = formulations::solve_scheme(net, {});
    REQUIRE(a.scheme.rate == b.scheme.rate);
    REQUIRE(a.refined.values == b.refined.values);
}

TEST_CASE("extraction refuses non-optimal solutions") {
    auto net = testutil::single_edge(0, 0.5);
    FormulationConfig cfg;
    auto prog = formulations::build(net, cfg);
    lp::LpSolution bogus;
    bogus.status = lp::SolveStatus::Infeasible;
    REQUIRE_THROWS_AS(formulations::extract_scheme(net, prog, bogus, cfg), InputError);
}
