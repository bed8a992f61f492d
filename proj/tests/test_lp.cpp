#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "interplab/kfun.hpp"
#include "interplab/lp.hpp"
#include "interplab/space.hpp"
#include "interplab/util.hpp"
#include "oracle_helpers.hpp"

using namespace interplab;

namespace {

LinearProgram tiny_lp() {
    // x >= 1, y >= 2, x + y >= 4
    LinearProgram lp;
    lp.nvars = 2;
    lp.rows.push_back(SparseRow{{0}, {1.0}, 1.0});
    lp.rows.push_back(SparseRow{{1}, {1.0}, 2.0});
    lp.rows.push_back(SparseRow{{0, 1}, {1.0, 1.0}, 4.0});
    return lp;
}

}  // namespace

TEST_CASE("two variable program solved from a feasible vertex") {
    LinearProgram lp = tiny_lp();
    // rows 0 and 2 are tight at (1, 3), which is feasible
    DualSimplex solver(lp, {0, 2});
    LpSolution sol = solver.solve({1.0, 1.0});
    CHECK(sol.certified);
    CHECK(sol.value == doctest::Approx(4.0));
    CHECK(sol.x[0] + sol.x[1] == doctest::Approx(4.0));
    CHECK(sol.max_violation <= 1e-9);
}

TEST_CASE("warm restarts across changing objectives") {
    LinearProgram lp = tiny_lp();
    DualSimplex solver(lp, {0, 2});
    CHECK(solver.solve({1.0, 1.0}).value == doctest::Approx(4.0));
    // steeper cost on y moves the optimum to (2, 2)
    LpSolution s2 = solver.solve({1.0, 2.0});
    CHECK(s2.certified);
    CHECK(s2.value == doctest::Approx(6.0));
    CHECK(s2.x[0] == doctest::Approx(2.0));
    // and back: steeper cost on x moves it to (1, 3)
    LpSolution s3 = solver.solve({2.0, 1.0});
    CHECK(s3.certified);
    CHECK(s3.value == doctest::Approx(5.0));
    CHECK(s3.x[1] == doctest::Approx(3.0));
}

TEST_CASE("pinned variable through opposing rows") {
    LinearProgram lp;
    lp.nvars = 2;
    lp.rows.push_back(SparseRow{{0}, {1.0}, 3.0});
    lp.rows.push_back(SparseRow{{0}, {-1.0}, -3.0});
    lp.rows.push_back(SparseRow{{1}, {1.0}, 0.0});
    DualSimplex solver(lp, {0, 2});
    LpSolution sol = solver.solve({1.0, 1.0});
    CHECK(sol.certified);
    CHECK(sol.x[0] == doctest::Approx(3.0));
    CHECK(sol.x[1] == doctest::Approx(0.0));
}

TEST_CASE("infeasible starting basis is rejected") {
    LinearProgram lp = tiny_lp();
    // rows 0 and 1 are tight at (1, 2), which violates row 2
    CHECK_THROWS_AS(DualSimplex(lp, {0, 1}), construction_error);
}

TEST_CASE("splitting problem solutions are certified across modes") {
    testref::Rng rng(7);
    for (int rep = 0; rep < 4; ++rep) {
        int n = 3 + rng.pick(4);
        std::vector<double> pos, w;
        double x = 0.0;
        for (int i = 0; i < n; ++i) {
            pos.push_back(x);
            x += rng.uniform(0.4, 1.1);
            w.push_back(rng.uniform(0.3, 1.4));
        }
        Space sp = testref::make_line(pos, w);
        ScalarField f(static_cast<size_t>(n));
        for (double& v : f) v = rng.uniform(-2.0, 2.0);
        double tau = rng.uniform(0.05, 1.5);

        for (KProblemMode mode :
             {KProblemMode::full, KProblemMode::value_only, KProblemMode::gradient_only}) {
            KProblem kp = build_k_problem(sp, f, mode);
            DualSimplex solver(kp.lp, kp.basis);
            LpSolution sol = solver.solve(k_problem_objective(kp, sp, tau));
            CHECK(sol.certified);
            CHECK(sol.max_violation <= 1e-7 * (1.0 + std::fabs(sol.value)));
            CHECK(sol.min_basic >= -1e-7 * (1.0 + std::fabs(sol.value)));
            // objective value is the inner product it claims to be
            std::vector<double> c = k_problem_objective(kp, sp, tau);
            double dot = 0.0;
            for (size_t k = 0; k < c.size(); ++k) dot += c[k] * sol.x[k];
            CHECK(sol.value == doctest::Approx(dot).epsilon(1e-12));
        }
    }
}

TEST_CASE("full mode matches the quantized grid search on small instances") {
    testref::Rng rng(15);
    for (int rep = 0; rep < 3; ++rep) {
        int n = 3 + rep;
        std::vector<double> pos, w;
        double x = 0.0;
        for (int i = 0; i < n; ++i) {
            pos.push_back(x);
            x += rng.uniform(0.5, 1.0);
            w.push_back(rng.uniform(0.4, 1.0));
        }
        Space sp = testref::make_line(pos, w);
        ScalarField f(static_cast<size_t>(n));
        for (double& v : f) v = rng.uniform(-1.5, 1.5);
        double tau = rng.uniform(0.1, 1.0);

        KProblem kp = build_k_problem(sp, f, KProblemMode::full);
        DualSimplex solver(kp.lp, kp.basis);
        LpSolution sol = solver.solve(k_problem_objective(kp, sp, tau));
        REQUIRE(sol.certified);
        double ref = testref::grid_search_k(sp, f, tau);
        CHECK(sol.value == doctest::Approx(ref).epsilon(5e-6));
    }
}

TEST_CASE("warm sweep agrees with cold solves") {
    Space sp = build_grid({8}, 0.125);
    ScalarField f = random_smooth_field(sp, 41);
    KProblem kp = build_k_problem(sp, f, KProblemMode::full);
    std::vector<double> taus{2.0, 1.0, 0.5, 0.2, 0.08};
    DualSimplex warm(kp.lp, kp.basis);
    for (double tau : taus) {
        LpSolution ws = warm.solve(k_problem_objective(kp, sp, tau));
        DualSimplex cold(kp.lp, kp.basis);
        LpSolution cs = cold.solve(k_problem_objective(kp, sp, tau));
        CHECK(ws.certified);
        CHECK(cs.certified);
        CHECK(ws.value == doctest::Approx(cs.value).epsilon(1e-9));
    }
}
