#include "interplab/cover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace interplab {

namespace {

// tent profile: 1 up to u0, 0 from u1 on, linear between
double hat(double u, double u0, double u1) {
    if (u <= u0) return 1.0;
    if (u >= u1) return 0.0;
    return (u1 - u) / (u1 - u0);
}

}  // namespace

void measure_family_constants(const Space& sp, BallFamily& fam) {
    std::vector<std::vector<int>> through(sp.n());  // balls containing each point
    for (size_t i = 0; i < fam.balls.size(); ++i)
        for (int m : fam.balls[i].members) through[m].push_back(static_cast<int>(i));
    fam.overlap = 0;
    fam.radius_ratio_min = 1.0;
    fam.radius_ratio_max = 1.0;
    for (int x = 0; x < sp.n(); ++x) {
        fam.overlap = std::max(fam.overlap, static_cast<int>(through[x].size()));
        if (through[x].empty()) continue;
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int i : through[x]) {
            lo = std::min(lo, fam.r[i]);
            hi = std::max(hi, fam.r[i]);
        }
        if (lo > 0.0) {
            fam.radius_ratio_max = std::max(fam.radius_ratio_max, hi / lo);
            fam.radius_ratio_min = std::min(fam.radius_ratio_min, lo / hi);
        }
    }
}

BallFamily whitney(const Space& sp, const std::vector<int>& omega, double c1) {
    if (!(c1 > 1.0)) throw validation_error("whitney: c1 must exceed 1");
    std::vector<char> in_omega(sp.n(), 0);
    for (int x : omega) {
        if (x < 0 || x >= sp.n()) throw validation_error("whitney: index out of range");
        in_omega[x] = 1;
    }
    BallFamily fam;
    fam.c1 = c1;
    fam.c2 = 4.0 * c1;
    for (int x = 0; x < sp.n(); ++x)
        if (in_omega[x]) fam.covered.push_back(x);
    if (fam.covered.empty()) return fam;
    if (static_cast<int>(fam.covered.size()) == sp.n())
        throw validation_error("whitney: set equals the whole space, no complement to anchor radii");

    // distance to the complement for every candidate center
    std::vector<double> dF(sp.n(), 0.0);
    for (int x : fam.covered) {
        double best = std::numeric_limits<double>::infinity();
        for (int y = 0; y < sp.n(); ++y)
            if (!in_omega[y]) best = std::min(best, sp.d(x, y));
        if (!(best > 0.0)) throw construction_error("whitney: zero distance to the complement");
        dF[x] = best;
    }

    std::vector<int> order(fam.covered);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return dF[a] != dF[b] ? dF[a] > dF[b] : a < b;
    });

    std::vector<char> core_taken(sp.n(), 0), is_covered(sp.n(), 0);
    for (int x : order) {
        double core_radius = dF[x] / (2.0 * c1);
        Ball core = ball(sp, x, core_radius);
        bool disjoint = true;
        for (int m : core.members)
            if (core_taken[m]) { disjoint = false; break; }
        if (!disjoint) continue;
        Ball b = ball(sp, x, dF[x] / 2.0);
        bool adds = false;
        for (int m : b.members)
            if (!is_covered[m]) { adds = true; break; }
        if (!adds) continue;
        for (int m : core.members) core_taken[m] = 1;
        for (int m : b.members) is_covered[m] = 1;
        fam.r.push_back(b.radius);
        fam.dist_to_complement.push_back(dF[x]);
        fam.core_balls.push_back(std::move(core));
        fam.balls.push_back(std::move(b));
    }

    for (int x : fam.covered)
        if (!is_covered[x])
            throw construction_error("whitney: greedy selection left a point uncovered");
    measure_family_constants(sp, fam);
    return fam;
}

PartitionOfUnity partition_of_unity(const Space& sp, const BallFamily& fam) {
    PartitionOfUnity pou;
    size_t nb = fam.balls.size();
    pou.chi.assign(nb, ScalarField(sp.n(), 0.0));
    pou.lipschitz.assign(nb, 0.0);
    if (nb == 0) return pou;

    // Full weight on a core fraction of each ball, linear decay to the ball
    // boundary.  Members satisfy d < r, so every covered point carries a
    // strictly positive raw weight from at least one ball; the normalization
    // below can therefore never divide by zero.
    double u0 = (1.0 + 1.0 / fam.c1) / 2.0;
    std::vector<ScalarField> num(nb, ScalarField(sp.n(), 0.0));
    for (size_t i = 0; i < nb; ++i) {
        int xi = fam.balls[i].center;
        for (int m : fam.balls[i].members)
            num[i][m] = hat(sp.d(xi, m) / fam.r[i], u0, 1.0);
    }
    for (int x : fam.covered) {
        double den = 0.0;
        for (size_t i = 0; i < nb; ++i) den += num[i][x];
        if (!(den > 0.0))
            throw construction_error("partition_of_unity: weights vanish at a covered point");
        for (size_t i = 0; i < nb; ++i) pou.chi[i][x] = num[i][x] / den;
    }

    pou.max_lipschitz_scaled = 0.0;
    for (size_t i = 0; i < nb; ++i) {
        double lip = 0.0;
        for (int x : fam.balls[i].members) {
            if (pou.chi[i][x] == 0.0) continue;
            for (int y = 0; y < sp.n(); ++y) {
                if (y == x) continue;
                double dd = sp.d(x, y);
                if (dd > 0.0) lip = std::max(lip, std::abs(pou.chi[i][x] - pou.chi[i][y]) / dd);
            }
        }
        pou.lipschitz[i] = lip;
        pou.max_lipschitz_scaled = std::max(pou.max_lipschitz_scaled, lip * fam.r[i]);
    }
    return pou;
}

UnitCover unit_ball_cover(const Space& sp, double rho) {
    if (!(rho > 0.0)) throw validation_error("unit_ball_cover: radius must be positive");
    UnitCover uc;
    uc.rho = rho;
    BallFamily& fam = uc.family;
    fam.c1 = 2.0;
    fam.c2 = 8.0;
    std::vector<int> centers;
    for (int x = 0; x < sp.n(); ++x) {
        bool separated = true;
        for (int c : centers)
            if (sp.d(x, c) < rho / 2.0) { separated = false; break; }
        if (separated) centers.push_back(x);
    }
    for (int c : centers) {
        fam.balls.push_back(ball(sp, c, rho));
        fam.core_balls.push_back(ball(sp, c, rho / 2.0));
        fam.r.push_back(rho);
    }
    fam.covered.resize(sp.n());
    std::iota(fam.covered.begin(), fam.covered.end(), 0);
    measure_family_constants(sp, fam);

    // every point lies in some half-radius ball, where its weight is 1
    size_t nb = centers.size();
    PartitionOfUnity& pou = uc.partition;
    pou.chi.assign(nb, ScalarField(sp.n(), 0.0));
    pou.lipschitz.assign(nb, 0.0);
    std::vector<ScalarField> num(nb, ScalarField(sp.n(), 0.0));
    for (size_t j = 0; j < nb; ++j)
        for (int m : fam.balls[j].members)
            num[j][m] = hat(2.0 * sp.d(centers[j], m) / rho, 1.0, 1.5);
    for (int x = 0; x < sp.n(); ++x) {
        double den = 0.0;
        for (size_t j = 0; j < nb; ++j) den += num[j][x];
        if (!(den > 0.0))
            throw construction_error("unit_ball_cover: net failed to cover a point");
        for (size_t j = 0; j < nb; ++j) pou.chi[j][x] = num[j][x] / den;
    }
    for (size_t j = 0; j < nb; ++j) {
        double lip = 0.0;
        for (int x : fam.balls[j].members) {
            if (pou.chi[j][x] == 0.0) continue;
            for (int y = 0; y < sp.n(); ++y) {
                if (y == x) continue;
                double dd = sp.d(x, y);
                if (dd > 0.0) lip = std::max(lip, std::abs(pou.chi[j][x] - pou.chi[j][y]) / dd);
            }
        }
        pou.lipschitz[j] = lip;
        pou.max_lipschitz_scaled = std::max(pou.max_lipschitz_scaled, lip * rho);
    }
    return uc;
}

RelativeDoublingReport relative_doubling_check(const Space& sp, const Ball& bj, double rho,
                                               const RadiusLadder& ladder) {
    RelativeDoublingReport rep;
    std::vector<char> in_bj(sp.n(), 0);
    for (int m : bj.members) in_bj[m] = 1;
    for (int x : bj.members) {
        // sort everything by distance from x once; prefix sums of full and
        // restricted weight give every ball mass in one sweep
        std::vector<int> idx(sp.n());
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<double> dd(sp.n());
        for (int y = 0; y < sp.n(); ++y) dd[y] = sp.d(x, y);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return dd[a] < dd[b]; });
        std::vector<double> sorted_d(sp.n()), w_all(sp.n() + 1, 0.0), w_in(sp.n() + 1, 0.0);
        for (int k = 0; k < sp.n(); ++k) {
            sorted_d[k] = dd[idx[k]];
            w_all[k + 1] = w_all[k] + sp.weights[idx[k]];
            w_in[k + 1] = w_in[k] + (in_bj[idx[k]] ? sp.weights[idx[k]] : 0.0);
        }
        auto mass = [&](const std::vector<double>& pw, double radius) {
            size_t k = std::lower_bound(sorted_d.begin(), sorted_d.end(), radius) - sorted_d.begin();
            return pw[k];
        };
        for (double radius : ladder.radii) {
            double inner = mass(w_in, radius);
            if (inner > 0.0)
                rep.inside_ratio = std::max(rep.inside_ratio, mass(w_in, 2.0 * radius) / inner);
            if (radius <= 2.0 * rho && inner > 0.0)
                rep.containment_ratio =
                    std::max(rep.containment_ratio, mass(w_all, radius) / inner);
        }
    }
    return rep;
}

}  // namespace interplab
