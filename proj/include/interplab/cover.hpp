#pragma once
// Ball coverings: a greedy Whitney-type decomposition of an open set with
// measured constants, Lipschitz partitions of unity subordinate to it, a
// fixed-radius net covering of the whole space, and relative doubling
// measurements inside a covering ball.

#include "interplab/calculus.hpp"
#include "interplab/space.hpp"

namespace interplab {

struct BallFamily {
    // For the Whitney family, ball i has radius r[i] = d(x_i, complement)/2
    // and its core has radius r[i]/c1; cores are pairwise disjoint and the
    // balls cover the set.  For a net covering the balls share one radius,
    // the cores are the half-radius balls (covering, not disjoint), and the
    // complement-related fields stay empty.
    std::vector<Ball> balls;
    std::vector<Ball> core_balls;
    double c1 = 2.0;
    double c2 = 8.0;                         // dilation factor tested against the complement
    int overlap = 0;                         // max number of balls through one point
    std::vector<double> r;                   // per-ball radius
    std::vector<double> dist_to_complement;  // d(x_i, complement), Whitney only
    std::vector<int> covered;                // the covered point set, ascending
    // min and max of r_i / r_j over pairs of balls sharing at least one point
    double radius_ratio_min = 1.0;
    double radius_ratio_max = 1.0;
};

// Greedy Vitali selection of a Whitney family for the open set `omega`
// (indices, any order): candidate cores B(x, d(x,F)/(2*c1)) are scanned by
// decreasing radius (ties by index) and accepted when the core avoids all
// accepted cores and the c1-dilation covers a new point.  Requires c1 > 1
// and omega != X; c1 >= 2 guarantees a full cover, smaller values may leave
// points uncovered, which raises construction_error.
BallFamily whitney(const Space& sp, const std::vector<int>& omega, double c1 = 2.0);

struct PartitionOfUnity {
    std::vector<ScalarField> chi;   // one field per ball, zero off its ball
    std::vector<double> lipschitz;  // measured per-ball Lipschitz constant
    double max_lipschitz_scaled = 0.0;  // max over balls of lipschitz[i] * r[i]
};

// chi_i(x) = psi(c1 d(x_i,x)/r_i) / sum_k psi(c1 d(x_k,x)/r_k) with psi = 1
// on [0,1], 0 from (1+c1)/2 on, linear between; supports sit strictly inside
// the balls.  A covered point where every psi vanishes (geometrically
// possible when balls overlap only near their rims) raises
// construction_error rather than dividing by zero.
PartitionOfUnity partition_of_unity(const Space& sp, const BallFamily& fam);

struct UnitCover {
    BallFamily family;       // balls of radius rho around a rho/2-net
    PartitionOfUnity partition;
    double rho = 0.0;
};

// Greedy rho/2-net in index order; the half-radius balls cover the space, so
// the partition weights psi(2 d/rho) have a positive sum everywhere.
UnitCover unit_ball_cover(const Space& sp, double rho);

// Recomputes overlap and the radius-comparability interval of a family in
// place — useful after assembling a family from several constructions.
void measure_family_constants(const Space& sp, BallFamily& fam);

struct RelativeDoublingReport {
    // max over centers in the ball and ladder radii of
    //   mu(B(x,2r) ∩ B^j) / mu(B(x,r) ∩ B^j)
    double inside_ratio = 1.0;
    // max over centers in the ball and ladder radii r <= 2 rho of
    //   mu(B(x,r)) / mu(B(x,r) ∩ B^j)
    double containment_ratio = 1.0;
};

RelativeDoublingReport relative_doubling_check(const Space& sp, const Ball& bj, double rho,
                                               const RadiusLadder& ladder);

}  // namespace interplab
