#pragma once
// Finite metric-measure spaces: a dense symmetric distance matrix plus one
// positive weight per point.  Balls are open (strict inequality), so every
// radius between two consecutive realized distances selects the same point
// set; the RadiusLadder enumerates enough radii to realize every distinct
// ball and the two extremes (singletons, full space).

#include <string>
#include <utility>
#include <vector>

#include "interplab/util.hpp"

namespace interplab {

struct Space {
    std::vector<std::string> ids;     // external point names, index order
    std::vector<double> weights;      // mu({x}) > 0
    std::vector<double> dist;         // row-major n*n, symmetric, zero diagonal
    std::vector<std::vector<double>> coords;  // optional embedding, empty if absent
    double neighbor_radius = 0.0;     // default scale for difference quotients

    int n() const { return static_cast<int>(ids.size()); }
    double d(int i, int j) const { return dist[static_cast<size_t>(i) * ids.size() + j]; }
    double& d_mut(int i, int j) { return dist[static_cast<size_t>(i) * ids.size() + j]; }
    bool has_coords() const { return !coords.empty(); }

    double mu() const;        // total measure
    double diameter() const;  // max pairwise distance
    double min_weight() const;
    int index_of(const std::string& id) const;  // -1 if unknown
};

struct Ball {
    int center = -1;
    double radius = 0.0;
    std::vector<int> members;  // indices with d(center, x) < radius, ascending
    double measure = 0.0;
};

// Open ball; radius must be positive, so the center always belongs.
Ball ball(const Space& sp, int center, double radius);

// Same point set as ball(sp, b.center, lambda * b.radius).
Ball dilate(const Space& sp, const Ball& b, double lambda);

// Restriction to the given point indices (ascending, non-empty, unique):
// weights and pairwise distances carry over, ids are preserved.
Space subspace(const Space& sp, const std::vector<int>& members);

struct RadiusLadder {
    std::vector<double> radii;  // strictly increasing

    // All distinct positive pairwise distances, the midpoints between
    // consecutive ones, one value below the minimum positive distance
    // (singleton balls) and one above the maximum (full space).
    static RadiusLadder for_space(const Space& sp);
};

struct DoublingReport {
    double constant = 1.0;                            // max over (x, r)
    std::vector<std::pair<double, double>> profile;   // (r, max ratio at r)
};

// Ratio mu(B(x,2r)) / mu(B(x,r)) maximized over centers and ladder radii.
DoublingReport doubling_constant(const Space& sp, const RadiusLadder& ladder);

// Smallest r such that the graph with edges {d(x,y) <= r} is connected
// (bottleneck edge of a minimum spanning tree).
double connectivity_radius(const Space& sp);

struct WeightProfile {
    enum class Kind { uniform, power } kind = Kind::uniform;
    double beta = 0.0;  // exponent for the power profile
    static WeightProfile uniform() { return {}; }
    static WeightProfile power(double beta) { return {Kind::power, beta}; }
};

// Rectangular lattice with the given per-axis point counts and spacing.
// Uniform profile: every cell weighs spacing^n.  Power profile: weight
// |x|^beta * spacing^n with |0|^beta read as spacing^beta so the origin
// keeps positive measure.
Space build_grid(const std::vector<int>& dims, double spacing, const WeightProfile& profile = {});

// Double cone {x_1^2 + ... + x_{n-1}^2 <= x_n^2} truncated to |x_n| <= levels,
// sampled with rings at integer heights; the ring at height l carries
// per_ring * l points so the mesh width stays bounded as the cone grows.
// Weights approximate local cell volume; distances are Euclidean through the
// embedding, and the two halves touch only at the vertex.
Space build_cone(int dimension, int levels, int per_ring);

}  // namespace interplab
