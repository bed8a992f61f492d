#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "interplab/maximal.hpp"
#include "interplab/space.hpp"
#include "interplab/util.hpp"
#include "oracle_helpers.hpp"

using namespace interplab;

TEST_CASE("maximal function of a point mass on a line, frozen by hand") {
    Space sp = testref::make_line({0.0, 1.0, 2.0}, {1.0, 1.0, 1.0});
    ScalarField f{0.0, 0.0, 3.0};
    ScalarField mf = maximal_function(sp, f);
    // p0 only sees the full-space average, p1 the right pair, p2 itself
    CHECK(mf[0] == 1.0);
    CHECK(mf[1] == 1.5);
    CHECK(mf[2] == 3.0);
}

TEST_CASE("maximal dominates the function and the global mean") {
    Space sp = build_grid({6, 6}, 0.2, WeightProfile::power(1.0));
    ScalarField f = random_fourier_field(sp, 17);
    ScalarField mf = maximal_function(sp, f);
    double mean = 0.0;
    for (int i = 0; i < sp.n(); ++i)
        mean += sp.weights[static_cast<size_t>(i)] * std::fabs(f[static_cast<size_t>(i)]);
    mean /= sp.mu();
    for (int i = 0; i < sp.n(); ++i) {
        CHECK(mf[static_cast<size_t>(i)] >= std::fabs(f[static_cast<size_t>(i)]));
        CHECK(mf[static_cast<size_t>(i)] >= mean - 1e-15);
    }
}

TEST_CASE("maximal function matches ball enumeration") {
    testref::Rng rng(31);
    for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> pos, w;
        int n = 6 + rng.pick(10);
        double x = 0.0;
        for (int i = 0; i < n; ++i) {
            pos.push_back(x);
            x += rng.uniform(0.1, 1.0);
            w.push_back(rng.uniform(0.2, 2.0));
        }
        Space sp = testref::make_line(pos, w);
        ScalarField f(static_cast<size_t>(n));
        for (double& v : f) v = rng.uniform(-4.0, 4.0);
        ScalarField mf = maximal_function(sp, f);
        ScalarField ref = testref::naive_maximal(sp, f);
        for (size_t i = 0; i < mf.size(); ++i)
            CHECK(mf[i] == doctest::Approx(ref[i]).epsilon(1e-13));
    }

    Space grid = build_grid({5, 4}, 0.3);
    ScalarField f = random_smooth_field(grid, 9);
    ScalarField mf = maximal_function(grid, f);
    ScalarField ref = testref::naive_maximal(grid, f);
    for (size_t i = 0; i < mf.size(); ++i) CHECK(mf[i] == doctest::Approx(ref[i]).epsilon(1e-13));
}

TEST_CASE("constant fields are fixed points") {
    Space sp = build_grid({7}, 0.2);
    ScalarField f(7, -2.5);
    ScalarField mf = maximal_function(sp, f);
    for (double v : mf) CHECK(v == doctest::Approx(2.5));
}

TEST_CASE("relative maximal equals the subspace maximal") {
    Space sp = build_grid({10}, 0.1);
    ScalarField f = random_smooth_field(sp, 13);
    std::vector<int> members{0, 2, 3, 4, 7, 8};
    ScalarField rel = relative_maximal(sp, members, f);
    REQUIRE(rel.size() == members.size());

    Space sub = subspace(sp, members);
    ScalarField fsub;
    for (int m : members) fsub.push_back(f[static_cast<size_t>(m)]);
    ScalarField ref = testref::naive_maximal(sub, fsub);
    for (size_t k = 0; k < members.size(); ++k)
        CHECK(rel[k] == doctest::Approx(ref[k]).epsilon(1e-13));
}

TEST_CASE("weak type ratio realizes its own definition") {
    Space sp = build_grid({9}, 1.0 / 9.0);
    ScalarField f = random_fourier_field(sp, 23);
    double wt = weak_type_ratio(sp, f);
    CHECK(std::isfinite(wt));
    CHECK(wt > 0.0);

    ScalarField mf = maximal_function(sp, f);
    double l1 = lp_norm(sp, f, 1.0);
    std::vector<double> levels(mf);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    double sup = 0.0;
    for (double v : levels) {
        if (v <= 0.0) continue;
        double lam = v * (1.0 - std::ldexp(1.0, -40));
        double mass = 0.0;
        for (int i = 0; i < sp.n(); ++i)
            if (mf[static_cast<size_t>(i)] > lam) mass += sp.weights[static_cast<size_t>(i)];
        sup = std::max(sup, lam * mass / l1);
    }
    CHECK(wt == doctest::Approx(sup).epsilon(1e-12));
}

TEST_CASE("weak type ratio is scale invariant and rejects zero") {
    Space sp = build_grid({4, 4}, 0.25);
    ScalarField f = random_smooth_field(sp, 3);
    ScalarField f4(f);
    for (double& v : f4) v *= 4.0;  // power of two: averages scale exactly
    CHECK(weak_type_ratio(sp, f) == weak_type_ratio(sp, f4));
    CHECK_THROWS_AS(weak_type_ratio(sp, ScalarField(16, 0.0)), validation_error);
}
