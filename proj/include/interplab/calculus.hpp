#pragma once
// Pointwise Lipschitz calculus on a finite metric-measure space.  The
// gradient of f at x is the largest difference quotient |f(y)-f(x)|/d(x,y)
// over neighbors y with d(x,y) <= neighbor_radius (zero when x has none).

#include <cstdint>
#include <string>
#include <vector>

#include "interplab/space.hpp"

namespace interplab {

using ScalarField = std::vector<double>;

// (neighbor index, distance) lists per point; reused by gradients and by the
// K-functional linear programs so both see the same difference quotients.
struct NeighborTable {
    double radius = 0.0;
    std::vector<std::vector<std::pair<int, double>>> adj;
    static NeighborTable build(const Space& sp, double radius);
};

ScalarField gradient(const Space& sp, const ScalarField& f, const NeighborTable& nb);
// Uses sp.neighbor_radius (or the explicit radius if positive).
ScalarField gradient(const Space& sp, const ScalarField& f, double radius = 0.0);

// p in [1, inf]; pass infinity for the sup norm.
double lp_norm(const Space& sp, const ScalarField& f, double p);
double sobolev_norm(const Space& sp, const ScalarField& f, double p, double radius = 0.0);
double homogeneous_seminorm(const Space& sp, const ScalarField& f, double p, double radius = 0.0);

struct PoincareRecord {
    int center = -1;
    double radius = 0.0;
    int test = -1;
    double ratio = 0.0;
};

struct PoincareReport {
    double q = 1.0, lambda = 1.0, r1 = 0.0;
    double max_ratio = 0.0;       // 0 when every ball/test pair was skipped
    PoincareRecord argmax;
    std::vector<PoincareRecord> per_center_best;  // best ratio seen at each center
    long evaluated = 0;           // (ball, test) pairs with positive gradient energy
    long skipped = 0;             // pairs skipped for zero gradient energy on lambda*B
};

// Sweep all balls (centers x ladder radii r < r1) and all test fields;
// ratio = (avg_B |u-u_B|^q)^{1/q} / (r * (avg_{lambda B} |grad u|^q)^{1/q}).
// This is a lower-bound certificate: a large max ratio witnesses that no
// Poincare inequality with a small constant can hold at scale r1.
PoincareReport poincare_scan(const Space& sp, double q, double lambda, double r1,
                             const std::vector<ScalarField>& tests, double radius = 0.0);

// Named test families for the scan.
ScalarField coordinate_field(const Space& sp, int axis);
ScalarField tent_field(const Space& sp);
// max(0, 1 - d(center,x)/r): a Lipschitz bump supported on B(center, r).
ScalarField ball_bump_field(const Space& sp, int center, double r);
// Seeded sum of plane-wave sines of the coordinates; smooth and stable under
// grid refinement.  Falls back to smoothed noise when coords are absent.
ScalarField random_fourier_field(const Space& sp, uint64_t seed, int terms = 5);
// Seeded noise smoothed by a few neighbor-averaging passes.
ScalarField random_smooth_field(const Space& sp, uint64_t seed, int passes = 3);

// +1 where the last coordinate is positive, -1 where negative, 0 on the
// symmetry plane; the standard two-halves test for the double cone.
ScalarField two_halves_field(const Space& sp);

enum class PoincareFamily { coordinates, ball_bumps, random_smooth };
std::vector<ScalarField> poincare_test_family(const Space& sp, PoincareFamily fam,
                                              uint64_t seed = 1, int count = 4);

}  // namespace interplab
