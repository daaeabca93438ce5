#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <random>

#include "secnet/formulations.hpp"
#include "secnet/lp.hpp"
#include "testutil.hpp"

using namespace secnet::lp;

TEST_CASE("two box constraints") {
    LinearProgram prog;
    int x1 = prog.add_variable("x1", 1.0);
    int x2 = prog.add_variable("x2", 1.0);
    prog.add_constraint({{x1, 1.0}}, Relation::LessEq, 1.0);
    prog.add_constraint({{x2, 1.0}}, Relation::LessEq, 1.0);
    auto sol = solve(prog);
    REQUIRE(sol.status == SolveStatus::Optimal);
    REQUIRE(sol.objective == Catch::Approx(2.0));
    REQUIRE(check_feasibility(prog, sol.values) <= 1e-7);
}

TEST_CASE("infeasible and unbounded detection") {
    LinearProgram infeas;
    int x = infeas.add_variable("x", 1.0);
    infeas.add_constraint({{x, 1.0}}, Relation::LessEq, -1.0);
    REQUIRE(solve(infeas).status == SolveStatus::Infeasible);

    LinearProgram unb;
    unb.add_variable("x", 1.0);
    REQUIRE(solve(unb).status == SolveStatus::Unbounded);
}

TEST_CASE("equality constraints go through phase one") {
    LinearProgram prog;
    int x1 = prog.add_variable("x1", 1.0);
    int x2 = prog.add_variable("x2", 0.0);
    prog.add_constraint({{x1, 1.0}, {x2, 1.0}}, Relation::Eq, 1.0);
    auto sol = solve(prog);
    REQUIRE(sol.status == SolveStatus::Optimal);
    REQUIRE(sol.objective == Catch::Approx(1.0));

    // redundant equality pair stays feasible
    LinearProgram red;
    int y1 = red.add_variable("y1", 1.0);
    int y2 = red.add_variable("y2", 1.0);
    red.add_constraint({{y1, 1.0}, {y2, 1.0}}, Relation::Eq, 1.0);
    red.add_constraint({{y1, 2.0}, {y2, 2.0}}, Relation::Eq, 2.0);
    auto rsol = solve(red);
    REQUIRE(rsol.status == SolveStatus::Optimal);
    REQUIRE(rsol.objective == Catch::Approx(1.0));
}

TEST_CASE("degenerate cycling-prone instance terminates at the right optimum") {
    // Beale's classic example
    LinearProgram prog;
    int x1 = prog.add_variable("x1", 0.75);
    int x2 = prog.add_variable("x2", -150.0);
    int x3 = prog.add_variable("x3", 0.02);
    int x4 = prog.add_variable("x4", -6.0);
    prog.add_constraint({{x1, 0.25}, {x2, -60.0}, {x3, -0.04}, {x4, 9.0}}, Relation::LessEq, 0.0);
    prog.add_constraint({{x1, 0.5}, {x2, -90.0}, {x3, -0.02}, {x4, 3.0}}, Relation::LessEq, 0.0);
    prog.add_constraint({{x3, 1.0}}, Relation::LessEq, 1.0);
    auto sol = solve(prog);
    REQUIRE(sol.status == SolveStatus::Optimal);
    double brute = 0.0;
    REQUIRE(testutil::brute_force_lp(prog, brute));
    REQUIRE(sol.objective == Catch::Approx(brute).margin(1e-9));
    REQUIRE(check_feasibility(prog, sol.values) <= 1e-7);
}

TEST_CASE("negative right-hand sides force surplus rows") {
    LinearProgram prog;
    int x = prog.add_variable("x", -1.0);  // minimize x
    prog.add_constraint({{x, -1.0}}, Relation::LessEq, -2.0);  // x >= 2
    auto sol = solve(prog);
    REQUIRE(sol.status == SolveStatus::Optimal);
    REQUIRE(sol.objective == Catch::Approx(-2.0));
    REQUIRE(sol.values[0] == Catch::Approx(2.0));
}

TEST_CASE("objective scaling keeps the solution and scales the value") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 10; ++t) {
        auto prog = testutil::random_lp(rng);
        auto base = solve(prog);
        REQUIRE(base.status == SolveStatus::Optimal);
        LinearProgram scaled = prog;
        const double lambda = 3.5;
        for (auto& c : scaled.objective) c *= lambda;
        auto again = solve(scaled);
        REQUIRE(again.status == SolveStatus::Optimal);
        REQUIRE(again.values == base.values);
        if (std::abs(base.objective) > 1e-12)
            REQUIRE(std::abs(again.objective - lambda * base.objective) <=
                    1e-9 * std::abs(lambda * base.objective));
    }
}

TEST_CASE("solve is deterministic bit for bit") {
    std::mt19937_64 rng(5);
    auto prog = testutil::random_lp(rng);
    auto a = solve(prog);
    auto b = solve(prog);
    REQUIRE(a.status == b.status);
    REQUIRE(std::memcmp(&a.objective, &b.objective, sizeof(double)) == 0);
    REQUIRE(a.values.size() == b.values.size());
    REQUIRE(std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0);
    REQUIRE(a.iterations == b.iterations);
}

TEST_CASE("random LPs match brute-force vertex enumeration") {
    std::mt19937_64 rng(9);
    int solved = 0;
    while (solved < 20) {
        auto prog = testutil::random_lp(rng);
        double brute = 0.0;
        if (!testutil::brute_force_lp(prog, brute)) continue;
        auto sol = solve(prog);
        REQUIRE(sol.status == SolveStatus::Optimal);
        REQUIRE(sol.objective == Catch::Approx(brute).margin(1e-7));
        REQUIRE(check_feasibility(prog, sol.values) <= 1e-7);
        ++solved;
    }
}

TEST_CASE("iteration limit reported distinctly") {
    LinearProgram prog;
    for (int j = 0; j < 6; ++j) prog.add_variable("x" + std::to_string(j), 1.0);
    for (int i = 0; i < 6; ++i) {
        std::vector<std::pair<int, double>> terms;
        for (int j = 0; j < 6; ++j) terms.emplace_back(j, (i == j) ? 2.0 : 1.0);
        prog.add_constraint(std::move(terms), Relation::LessEq, 5.0);
    }
    Tolerances tight;
    tight.iteration_limit = 1;
    REQUIRE_THROWS_AS(solve(prog, tight), secnet::CapacityError);
}

TEST_CASE("check_feasibility flags violations and unknown names") {
    LinearProgram prog;
    int x1 = prog.add_variable("x1", 1.0);
    int x2 = prog.add_variable("x2", 1.0);
    prog.add_constraint({{x1, 1.0}, {x2, 1.0}}, Relation::Eq, 1.0);
    REQUIRE(check_feasibility(prog, std::vector<double>{0.0, 0.0}) == Catch::Approx(1.0));
    REQUIRE(check_feasibility(prog, std::map<std::string, double>{{"x1", 1.0}}) == Catch::Approx(0.0));
    REQUIRE_THROWS_AS(check_feasibility(prog, std::map<std::string, double>{{"bogus", 1.0}}),
                      secnet::InputError);
    REQUIRE(check_feasibility(prog, std::vector<double>{-0.25, 1.25}) == Catch::Approx(0.25));
}

TEST_CASE("hand-built end-to-end scheme is exactly feasible for the flow LP") {
    auto net = testutil::two_parallel(0, 0, 0, 0);
    auto prog = secnet::formulations::build_algo1(net);
    std::map<std::string, double> named{{"m#0", 1.0}, {"k#1", 1.0}, {"s#1", 1.0}};
    REQUIRE(check_feasibility(prog, named) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("dump renders objective and rows") {
    LinearProgram prog;
    int x = prog.add_variable("x", 1.0);
    prog.add_constraint({{x, 2.0}}, Relation::LessEq, 3.0, "cap");
    auto text = dump(prog);
    REQUIRE_THAT(text, Catch::Matchers::ContainsSubstring("max 1*x"));
    REQUIRE_THAT(text, Catch::Matchers::ContainsSubstring("2*x <= 3"));
    REQUIRE_THAT(text, Catch::Matchers::ContainsSubstring("[cap]"));
}
