#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "interplab/cover.hpp"
#include "interplab/space.hpp"
#include "interplab/util.hpp"
#include "oracle_helpers.hpp"

using namespace interplab;

namespace {

// Exhaustive postconditions every Whitney family must satisfy.
void check_whitney_contract(const Space& sp, const std::vector<int>& omega,
                            const BallFamily& fam) {
    std::vector<char> in_omega(static_cast<size_t>(sp.n()), 0);
    for (int i : omega) in_omega[static_cast<size_t>(i)] = 1;

    // radii: half the true distance to the complement
    for (size_t k = 0; k < fam.balls.size(); ++k) {
        int c = fam.balls[k].center;
        CHECK(in_omega[static_cast<size_t>(c)] == 1);
        double df = 1e300;
        for (int j = 0; j < sp.n(); ++j)
            if (!in_omega[static_cast<size_t>(j)]) df = std::min(df, sp.d(c, j));
        CHECK(fam.dist_to_complement[k] == df);
        CHECK(fam.r[k] == df / 2.0);
        // the c2 dilation must still reach the complement
        bool touches = false;
        for (int j = 0; j < sp.n(); ++j)
            if (!in_omega[static_cast<size_t>(j)] && sp.d(c, j) < fam.c2 * fam.r[k]) touches = true;
        CHECK(touches);
    }

    // every point of omega is covered, and only omega is covered
    std::vector<char> hit(static_cast<size_t>(sp.n()), 0);
    for (const Ball& b : fam.balls)
        for (int m : b.members) {
            CHECK(in_omega[static_cast<size_t>(m)] == 1);  // balls stay inside omega
            hit[static_cast<size_t>(m)] = 1;
        }
    for (int i : omega) CHECK(hit[static_cast<size_t>(i)] == 1);
    CHECK(fam.covered == [&] {
        std::vector<int> sorted(omega);
        std::sort(sorted.begin(), sorted.end());
        return sorted;
    }());

    // cores are pairwise disjoint
    for (size_t a = 0; a < fam.core_balls.size(); ++a)
        for (size_t b = a + 1; b < fam.core_balls.size(); ++b)
            for (int m : fam.core_balls[a].members)
                CHECK(!std::binary_search(fam.core_balls[b].members.begin(),
                                          fam.core_balls[b].members.end(), m));

    // measured overlap matches a direct count
    int worst = 0;
    for (int i = 0; i < sp.n(); ++i) {
        int cnt = 0;
        for (const Ball& b : fam.balls)
            if (std::binary_search(b.members.begin(), b.members.end(), i)) ++cnt;
        worst = std::max(worst, cnt);
    }
    CHECK(fam.overlap == worst);
}

}  // namespace

TEST_CASE("whitney family on a line segment, frozen by hand") {
    // ten points at unit spacing; omega = {3,4,5,6}
    std::vector<double> pos, w;
    for (int i = 0; i < 10; ++i) {
        pos.push_back(i);
        w.push_back(1.0);
    }
    Space sp = testref::make_line(pos, w);
    std::vector<int> omega{3, 4, 5, 6};
    BallFamily fam = whitney(sp, omega);
    check_whitney_contract(sp, omega, fam);

    // interior points sit two steps from the complement, edges one step
    for (size_t k = 0; k < fam.balls.size(); ++k) {
        int c = fam.balls[k].center;
        double expect = std::min(c - 2, 7 - c);
        CHECK(fam.dist_to_complement[k] == expect);
        CHECK(fam.r[k] == expect / 2.0);
        CHECK(fam.core_balls[k].radius == expect / 4.0);
    }
    CHECK(fam.c1 == 2.0);
    CHECK(fam.c2 == 8.0);
}

TEST_CASE("whitney contract on random open sets") {
    testref::Rng rng(59);
    Space sp = build_grid({6, 6}, 0.25, WeightProfile::power(0.5));
    for (int rep = 0; rep < 8; ++rep) {
        std::vector<int> omega;
        for (int i = 0; i < sp.n(); ++i)
            if (rng.pick(3) != 0) omega.push_back(i);
        if (omega.empty() || static_cast<int>(omega.size()) == sp.n()) continue;
        BallFamily fam = whitney(sp, omega);
        check_whitney_contract(sp, omega, fam);
        CHECK(fam.radius_ratio_min <= 1.0);
        CHECK(fam.radius_ratio_max >= 1.0);
        CHECK(fam.radius_ratio_min * fam.radius_ratio_max == doctest::Approx(1.0));
    }
}

TEST_CASE("whitney rejects degenerate inputs") {
    Space sp = build_grid({5}, 0.2);
    std::vector<int> all{0, 1, 2, 3, 4};
    CHECK_THROWS_AS(whitney(sp, all), validation_error);  // no complement to anchor radii
    BallFamily empty = whitney(sp, {});
    CHECK(empty.balls.empty());
    CHECK(empty.covered.empty());
    CHECK_THROWS_AS(whitney(sp, {1, 2}, 1.0), validation_error);  // c1 must exceed 1
}

TEST_CASE("partition of unity sums to one on omega") {
    Space sp = build_grid({12}, 1.0 / 12.0);
    std::vector<int> omega{2, 3, 4, 5, 8, 9};
    BallFamily fam = whitney(sp, omega);
    PartitionOfUnity pou = partition_of_unity(sp, fam);
    REQUIRE(pou.chi.size() == fam.balls.size());

    std::vector<double> sum(static_cast<size_t>(sp.n()), 0.0);
    for (size_t k = 0; k < pou.chi.size(); ++k) {
        for (int i = 0; i < sp.n(); ++i) {
            double v = pou.chi[k][static_cast<size_t>(i)];
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            // supported inside the ball
            if (v > 0.0)
                CHECK(std::binary_search(fam.balls[k].members.begin(), fam.balls[k].members.end(), i));
            sum[static_cast<size_t>(i)] += v;
        }
    }
    for (int i : omega) CHECK(sum[static_cast<size_t>(i)] == doctest::Approx(1.0));
    for (int i = 0; i < sp.n(); ++i)
        if (!std::binary_search(omega.begin(), omega.end(), i))
            CHECK(sum[static_cast<size_t>(i)] == 0.0);

    CHECK(pou.max_lipschitz_scaled > 0.0);
    for (size_t k = 0; k < pou.chi.size(); ++k) {
        // measured Lipschitz constant is genuine: check it against all pairs
        double worst = 0.0;
        for (int a = 0; a < sp.n(); ++a)
            for (int b = a + 1; b < sp.n(); ++b) {
                double d = sp.d(a, b);
                if (d > 0.0)
                    worst = std::max(worst, std::fabs(pou.chi[k][static_cast<size_t>(a)] -
                                                      pou.chi[k][static_cast<size_t>(b)]) / d);
            }
        CHECK(pou.lipschitz[k] == doctest::Approx(worst).epsilon(1e-12));
    }
}

TEST_CASE("unit ball cover spans the space with bounded overlap") {
    Space sp = build_grid({9, 4}, 0.2);
    double rho = 0.75;
    UnitCover uc = unit_ball_cover(sp, rho);
    CHECK(uc.rho == rho);
    REQUIRE(!uc.family.balls.empty());

    // net property: centers are rho/2-separated, half-radius balls cover
    for (size_t a = 0; a < uc.family.balls.size(); ++a)
        for (size_t b = a + 1; b < uc.family.balls.size(); ++b)
            CHECK(sp.d(uc.family.balls[a].center, uc.family.balls[b].center) >= rho / 2.0);
    std::vector<char> hit(static_cast<size_t>(sp.n()), 0);
    for (const Ball& b : uc.family.core_balls)
        for (int m : b.members) hit[static_cast<size_t>(m)] = 1;
    for (int i = 0; i < sp.n(); ++i) CHECK(hit[static_cast<size_t>(i)] == 1);

    // partition sums to one everywhere
    std::vector<double> sum(static_cast<size_t>(sp.n()), 0.0);
    for (const ScalarField& chi : uc.partition.chi)
        for (int i = 0; i < sp.n(); ++i) sum[static_cast<size_t>(i)] += chi[static_cast<size_t>(i)];
    for (int i = 0; i < sp.n(); ++i) CHECK(sum[static_cast<size_t>(i)] == doctest::Approx(1.0));

    CHECK_THROWS_AS(unit_ball_cover(sp, 0.0), validation_error);
}

TEST_CASE("measure_family_constants recomputes in place") {
    Space sp = build_grid({14}, 1.0 / 14.0);
    BallFamily fam = whitney(sp, {4, 5, 6, 7, 8});
    int overlap = fam.overlap;
    double rmin = fam.radius_ratio_min, rmax = fam.radius_ratio_max;
    fam.overlap = -1;
    fam.radius_ratio_min = fam.radius_ratio_max = -1.0;
    measure_family_constants(sp, fam);
    CHECK(fam.overlap == overlap);
    CHECK(fam.radius_ratio_min == rmin);
    CHECK(fam.radius_ratio_max == rmax);
}

TEST_CASE("relative doubling inside a covering ball") {
    Space sp = build_grid({8, 8}, 0.25);
    double rho = 1.0;
    Ball bj = ball(sp, 27, rho);
    RadiusLadder lad = RadiusLadder::for_space(sp);
    RelativeDoublingReport rep = relative_doubling_check(sp, bj, rho, lad);
    CHECK(rep.inside_ratio >= 1.0);
    CHECK(rep.containment_ratio >= 1.0);
    CHECK(std::isfinite(rep.inside_ratio));
    CHECK(std::isfinite(rep.containment_ratio));

    // direct recomputation of the inside ratio
    double worst = 1.0;
    for (int c : bj.members)
        for (double r : lad.radii) {
            double num = 0.0, den = 0.0;
            for (int m : bj.members) {
                if (sp.d(c, m) < 2.0 * r) num += sp.weights[static_cast<size_t>(m)];
                if (sp.d(c, m) < r) den += sp.weights[static_cast<size_t>(m)];
            }
            if (den > 0.0) worst = std::max(worst, num / den);
        }
    CHECK(rep.inside_ratio == doctest::Approx(worst).epsilon(1e-12));
}
