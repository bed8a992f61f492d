#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "interplab/calculus.hpp"
#include "interplab/czd.hpp"
#include "interplab/kfun.hpp"
#include "interplab/maximal.hpp"
#include "interplab/space.hpp"
#include "interplab/util.hpp"
#include "oracle_helpers.hpp"

using namespace interplab;

namespace {

double mid_alpha(const Space& sp, const ScalarField& f, double q) {
    return alpha_of_t(sp, f, q, 0.4 * sp.mu());
}

const CertClause* find_clause(const Certificate& cert, const std::string& name) {
    for (const CertClause& c : cert.clauses)
        if (c.name == name) return &c;
    return nullptr;
}

}  // namespace

TEST_CASE("global decomposition certificate on line and grid") {
    Space line = build_grid({16}, 1.0 / 16.0);
    Space grid = build_grid({6, 6}, 1.0 / 6.0, WeightProfile::power(0.5));
    for (const Space& sp : {line, grid}) {
        ScalarField f = random_smooth_field(sp, 19);
        for (double q : {1.0, 2.0})
            for (double p : {2.0, 4.0}) {
                double alpha = mid_alpha(sp, f, q);
                REQUIRE(alpha > 0.0);
                Decomposition dec = czd_global(sp, f, q, p, alpha);
                CHECK(dec.cert.all_pass());
                CHECK(dec.mu_omega > 0.0);
                REQUIRE(!dec.pieces.empty());

                // reconstruction, directly: f = g + sum of pieces
                for (int i = 0; i < sp.n(); ++i) {
                    double sum = dec.g[static_cast<size_t>(i)];
                    for (const ScalarField& b : dec.pieces) sum += b[static_cast<size_t>(i)];
                    CHECK(sum == doctest::Approx(f[static_cast<size_t>(i)]).epsilon(1e-10));
                }

                // pieces vanish off their balls; inside, each one is a damped
                // difference against the recomputed ball average of f, so it
                // never exceeds |f - avg| and never flips its sign
                for (size_t k = 0; k < dec.pieces.size(); ++k) {
                    const Ball& b = dec.fam.balls[k];
                    double wsum = 0.0, fsum = 0.0;
                    for (int m : b.members) {
                        wsum += sp.weights[static_cast<size_t>(m)];
                        fsum += sp.weights[static_cast<size_t>(m)] * f[static_cast<size_t>(m)];
                    }
                    double avg = fsum / wsum;
                    for (int i = 0; i < sp.n(); ++i) {
                        double v = dec.pieces[k][static_cast<size_t>(i)];
                        if (!std::binary_search(b.members.begin(), b.members.end(), i)) {
                            CHECK(v == 0.0);
                        } else {
                            double diff = f[static_cast<size_t>(i)] - avg;
                            CHECK(std::fabs(v) <= std::fabs(diff) * (1.0 + 1e-12) + 1e-13);
                            CHECK(v * diff >= -1e-13);
                        }
                    }
                }

                // g stays under its sup clause and f = g off omega
                std::vector<char> in_omega(static_cast<size_t>(sp.n()), 0);
                for (int i : dec.omega) in_omega[static_cast<size_t>(i)] = 1;
                for (int i = 0; i < sp.n(); ++i)
                    if (!in_omega[static_cast<size_t>(i)])
                        CHECK(dec.g[static_cast<size_t>(i)] == f[static_cast<size_t>(i)]);
            }
    }
}

TEST_CASE("verifier reproduces the construction certificate") {
    Space sp = build_grid({5, 5}, 0.2);
    ScalarField f = random_fourier_field(sp, 29);
    Decomposition dec = czd_global(sp, f, 2.0, 2.0, mid_alpha(sp, f, 2.0));
    Certificate again = verify_decomposition(sp, dec, f);
    CHECK(again.all_pass());
    const CertClause* om = find_clause(again, "omega_match");
    REQUIRE(om != nullptr);
    CHECK(om->pass);
    CHECK(om->constant == 0.0);
    for (const CertClause& c : dec.cert.clauses) {
        const CertClause* rc = find_clause(again, c.name);
        REQUIRE(rc != nullptr);
        CHECK(rc->pass == c.pass);
        CHECK(rc->constant == doctest::Approx(c.constant).epsilon(1e-12));
    }
}

TEST_CASE("verifier flags tampered artifacts") {
    Space sp = build_grid({12}, 1.0 / 12.0);
    ScalarField f = random_smooth_field(sp, 37);
    Decomposition dec = czd_global(sp, f, 1.0, 2.0, mid_alpha(sp, f, 1.0));
    REQUIRE(!dec.omega.empty());

    SUBCASE("broken reconstruction") {
        Decomposition bad = dec;
        bad.g[static_cast<size_t>(bad.omega.front())] += 0.25;
        Certificate cert = verify_decomposition(sp, bad, f);
        const CertClause* c = find_clause(cert, "reconstruction");
        REQUIRE(c != nullptr);
        CHECK(!c->pass);
    }
    SUBCASE("piece leaking off its ball") {
        Decomposition bad = dec;
        const Ball& b0 = bad.fam.balls[0];
        int outside = -1;
        for (int i = 0; i < sp.n(); ++i)
            if (!std::binary_search(b0.members.begin(), b0.members.end(), i)) outside = i;
        REQUIRE(outside >= 0);
        bad.pieces[0][static_cast<size_t>(outside)] = 0.125;
        Certificate cert = verify_decomposition(sp, bad, f);
        const CertClause* c = find_clause(cert, "support");
        REQUIRE(c != nullptr);
        CHECK(!c->pass);
    }
    SUBCASE("tampered bad set") {
        Decomposition bad = dec;
        bad.omega.pop_back();
        Certificate cert = verify_decomposition(sp, bad, f);
        const CertClause* c = find_clause(cert, "omega_match");
        REQUIRE(c != nullptr);
        CHECK(!c->pass);
    }
}

TEST_CASE("decomposition commutes exactly with dyadic scaling") {
    Space sp = build_grid({14}, 1.0 / 14.0);
    ScalarField f = random_smooth_field(sp, 43);
    double q = 2.0, p = 2.0;
    double alpha = mid_alpha(sp, f, q);
    Decomposition dec = czd_global(sp, f, q, p, alpha);

    ScalarField f4(f);
    for (double& v : f4) v *= -4.0;
    Decomposition dec4 = czd_global(sp, f4, q, p, 4.0 * alpha);

    CHECK(dec4.omega == dec.omega);
    CHECK(dec4.mu_omega == dec.mu_omega);
    REQUIRE(dec4.pieces.size() == dec.pieces.size());
    for (int i = 0; i < sp.n(); ++i)
        CHECK(dec4.g[static_cast<size_t>(i)] == -4.0 * dec.g[static_cast<size_t>(i)]);
    for (size_t k = 0; k < dec.pieces.size(); ++k)
        for (int i = 0; i < sp.n(); ++i)
            CHECK(dec4.pieces[k][static_cast<size_t>(i)] == -4.0 * dec.pieces[k][static_cast<size_t>(i)]);
}

TEST_CASE("empty bad set returns the trivial splitting") {
    Space sp = build_grid({9}, 1.0 / 9.0);
    ScalarField f = random_smooth_field(sp, 47);
    double huge = 100.0 * (1.0 + lp_norm(sp, f, std::numeric_limits<double>::infinity()) +
                           homogeneous_seminorm(sp, f, std::numeric_limits<double>::infinity()));
    Decomposition dec = czd_global(sp, f, 1.0, 2.0, huge);
    CHECK(dec.omega.empty());
    CHECK(dec.mu_omega == 0.0);
    CHECK(dec.pieces.empty());
    CHECK(dec.g == f);
    CHECK(dec.cert.all_pass());
}

TEST_CASE("full bad set pushes to the local variant") {
    Space sp = build_grid({10}, 0.1);
    ScalarField f = random_smooth_field(sp, 53);
    // below the minimum of the maximal level function the bad set is everything
    ScalarField hq(static_cast<size_t>(sp.n()));
    ScalarField grad = gradient(sp, f);
    for (int i = 0; i < sp.n(); ++i)
        hq[static_cast<size_t>(i)] = std::fabs(f[static_cast<size_t>(i)]) + grad[static_cast<size_t>(i)];
    ScalarField mh = maximal_function(sp, hq);
    double tiny = 0.5 * *std::min_element(mh.begin(), mh.end());
    REQUIRE(tiny > 0.0);

    CHECK_THROWS_AS(czd_global(sp, f, 1.0, 2.0, tiny), needs_local_variant);

    Decomposition dec = czd_local(sp, f, 1.0, 2.0, tiny, 2.5 * sp.diameter());
    CHECK(dec.omega_is_all);
    CHECK(dec.cert.all_pass());
    const CertClause* direct = find_clause(dec.cert, "direct_branch");
    REQUIRE(direct != nullptr);
    CHECK(direct->pass);
    // everything lands in the single piece, g vanishes
    REQUIRE(dec.pieces.size() == 1);
    CHECK(dec.pieces[0] == f);
    for (double v : dec.g) CHECK(v == 0.0);
    Certificate again = verify_decomposition(sp, dec, f);
    CHECK(again.all_pass());
}

TEST_CASE("local variant with a genuine cover") {
    Space sp = build_grid({8, 8}, 0.125);
    ScalarField f = random_smooth_field(sp, 61);
    double q = 1.0, p = 2.0;
    double alpha = alpha_of_t(sp, f, q, 0.3 * sp.mu());
    REQUIRE(alpha > 0.0);
    double rho = 2.5 * sp.diameter();
    Decomposition dec = czd_local(sp, f, q, p, alpha, rho);
    CHECK(!dec.omega_is_all);
    CHECK(dec.rho == rho);
    CHECK(dec.transfer_constant >= 1.0);
    CHECK(find_clause(dec.cert, "cover_overlap") != nullptr);
    CHECK(find_clause(dec.cert, "transfer_constant") != nullptr);
    CHECK(dec.cert.all_pass());
    Certificate again = verify_decomposition(sp, dec, f);
    CHECK(again.all_pass());

    // with one covering ball the local construction reduces to the global one
    Decomposition glob = czd_global(sp, f, q, p, alpha);
    CHECK(dec.omega == glob.omega);
    CHECK(dec.g == glob.g);
    REQUIRE(dec.pieces.size() == glob.pieces.size());
    for (size_t k = 0; k < dec.pieces.size(); ++k) CHECK(dec.pieces[k] == glob.pieces[k]);
}

TEST_CASE("homogeneous variant thresholds on the gradient alone") {
    Space sp = build_grid({6, 6}, 1.0 / 6.0);
    ScalarField f = random_fourier_field(sp, 67);
    ScalarField grad = gradient(sp, f);
    ScalarField mg = maximal_function(sp, grad);
    StepFunction rearr = decreasing_rearrangement(sp, mg);
    double alpha = rearr.value_at(0.4 * sp.mu());
    REQUIRE(alpha > 0.0);

    Decomposition dec = czd_homogeneous(sp, f, 1.0, 2.0, alpha);
    CHECK(dec.cert.all_pass());
    CHECK(find_clause(dec.cert, "piece_grad_norms") != nullptr);
    CHECK(find_clause(dec.cert, "g_sup") == nullptr);           // no value-side clauses
    CHECK(find_clause(dec.cert, "mean_f_over_alpha") == nullptr);
    CHECK(find_clause(dec.cert, "g_grad_sup") != nullptr);

    // the bad set only sees the gradient: adding a constant changes nothing
    ScalarField shifted(f);
    for (double& v : shifted) v += 17.0;
    Decomposition dec2 = czd_homogeneous(sp, shifted, 1.0, 2.0, alpha);
    CHECK(dec2.omega == dec.omega);
    REQUIRE(dec2.pieces.size() == dec.pieces.size());
    for (size_t k = 0; k < dec.pieces.size(); ++k)
        for (int i = 0; i < sp.n(); ++i)
            CHECK(dec2.pieces[k][static_cast<size_t>(i)] ==
                  doctest::Approx(dec.pieces[k][static_cast<size_t>(i)]).epsilon(1e-9));
    Certificate again = verify_decomposition(sp, dec2, shifted);
    CHECK(again.all_pass());
}

TEST_CASE("threshold override pins the bad set") {
    Space sp = build_grid({11}, 1.0 / 11.0);
    ScalarField f = random_smooth_field(sp, 71);
    double q = 2.0;
    ScalarField grad = gradient(sp, f);
    ScalarField hq(static_cast<size_t>(sp.n()));
    for (int i = 0; i < sp.n(); ++i) {
        double h = std::fabs(f[static_cast<size_t>(i)]) + grad[static_cast<size_t>(i)];
        hq[static_cast<size_t>(i)] = h * h;
    }
    StepFunction rearr = decreasing_rearrangement(sp, maximal_function(sp, hq));
    double t = 0.35 * sp.mu();
    double thr = rearr.value_at(t);
    REQUIRE(thr > 0.0);
    double alpha = std::sqrt(thr);
    Decomposition dec = czd_global(sp, f, q, 2.0, alpha, &thr);
    CHECK(dec.threshold == thr);
    // with the exact rearrangement value as the cut, the strict super-level
    // set has mass at most t by construction
    CHECK(dec.mu_omega <= t);
    CHECK(dec.cert.all_pass());
}

TEST_CASE("input validation") {
    Space sp = build_grid({6}, 0.25);
    ScalarField f = random_smooth_field(sp, 3);
    CHECK_THROWS_AS(czd_global(sp, f, 0.5, 2.0, 1.0), validation_error);  // q < 1
    CHECK_THROWS_AS(czd_global(sp, f, 2.0, 1.5, 1.0), validation_error);  // p < q
    CHECK_THROWS_AS(czd_global(sp, f, 1.0, 2.0, 0.0), validation_error);  // alpha <= 0
    CHECK_THROWS_AS(czd_local(sp, f, 1.0, 2.0, 1.0, 0.0), validation_error);  // rho <= 0
}
