#include "interplab/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace interplab {

double Space::mu() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

double Space::diameter() const {
    double m = 0.0;
    for (double v : dist) m = std::max(m, v);
    return m;
}

double Space::min_weight() const {
    double m = std::numeric_limits<double>::infinity();
    for (double w : weights) m = std::min(m, w);
    return m;
}

int Space::index_of(const std::string& id) const {
    for (int i = 0; i < n(); ++i)
        if (ids[i] == id) return i;
    return -1;
}

Ball ball(const Space& sp, int center, double radius) {
    if (center < 0 || center >= sp.n()) throw validation_error("ball: center index out of range");
    if (!(radius > 0.0)) throw validation_error("ball: radius must be positive");
    Ball b;
    b.center = center;
    b.radius = radius;
    for (int j = 0; j < sp.n(); ++j) {
        if (sp.d(center, j) < radius) {
            b.members.push_back(j);
            b.measure += sp.weights[j];
        }
    }
    return b;
}

Ball dilate(const Space& sp, const Ball& b, double lambda) {
    return ball(sp, b.center, lambda * b.radius);
}

Space subspace(const Space& sp, const std::vector<int>& members) {
    if (members.empty()) throw validation_error("subspace: empty member set");
    Space out;
    out.ids.reserve(members.size());
    out.weights.reserve(members.size());
    for (int m : members) {
        if (m < 0 || m >= sp.n()) throw validation_error("subspace: index out of range");
        out.ids.push_back(sp.ids[m]);
        out.weights.push_back(sp.weights[m]);
        if (sp.has_coords()) out.coords.push_back(sp.coords[m]);
    }
    size_t k = members.size();
    out.dist.assign(k * k, 0.0);
    for (size_t a = 0; a < k; ++a)
        for (size_t b = 0; b < k; ++b) out.dist[a * k + b] = sp.d(members[a], members[b]);
    out.neighbor_radius = sp.neighbor_radius;
    return out;
}

RadiusLadder RadiusLadder::for_space(const Space& sp) {
    std::vector<double> ds;
    const int n = sp.n();
    ds.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) ds.push_back(sp.d(i, j));
    std::sort(ds.begin(), ds.end());
    ds.erase(std::unique(ds.begin(), ds.end()), ds.end());

    RadiusLadder lad;
    if (ds.empty()) {
        // Single point: one radius is enough; it realizes both the singleton
        // ball and the full space.
        lad.radii.push_back(1.0);
        return lad;
    }
    lad.radii.push_back(ds.front() / 2.0);  // singletons
    for (size_t k = 0; k < ds.size(); ++k) {
        lad.radii.push_back(ds[k]);
        if (k + 1 < ds.size()) lad.radii.push_back((ds[k] + ds[k + 1]) / 2.0);
    }
    lad.radii.push_back(ds.back() * 1.125);  // strictly above the diameter: full space
    lad.radii.erase(std::unique(lad.radii.begin(), lad.radii.end()), lad.radii.end());
    return lad;
}

DoublingReport doubling_constant(const Space& sp, const RadiusLadder& ladder) {
    const int n = sp.n();
    DoublingReport rep;
    rep.profile.reserve(ladder.radii.size());
    // Per center: points sorted by distance, prefix weights; mu(B(x,r)) is a
    // prefix sum found by binary search, so each (x, r) pair costs O(log n).
    std::vector<std::vector<double>> sorted_d(n), prefix_w(n);
    for (int i = 0; i < n; ++i) {
        std::vector<double> pw(n + 1, 0.0);
        std::vector<int> idx(n);
        for (int j = 0; j < n; ++j) idx[j] = j;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return sp.d(i, a) < sp.d(i, b); });
        for (int k = 0; k < n; ++k) pw[k + 1] = pw[k] + sp.weights[idx[k]];
        std::vector<double> sd(n);
        for (int k = 0; k < n; ++k) sd[k] = sp.d(i, idx[k]);
        sorted_d[i] = std::move(sd);
        prefix_w[i] = std::move(pw);
    }
    auto mu_ball = [&](int i, double r) {
        const auto& sd = sorted_d[i];
        size_t k = std::lower_bound(sd.begin(), sd.end(), r) - sd.begin();  // # of d < r
        return prefix_w[i][k];
    };
    for (double r : ladder.radii) {
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            double num = mu_ball(i, 2.0 * r);
            double den = mu_ball(i, r);  // >= weight of the center, positive
            worst = std::max(worst, num / den);
        }
        rep.profile.emplace_back(r, worst);
        rep.constant = std::max(rep.constant, worst);
    }
    return rep;
}

double connectivity_radius(const Space& sp) {
    const int n = sp.n();
    if (n <= 1) return 0.0;
    // Prim with dense distances; the answer is the largest edge on the MST.
    std::vector<double> best(n, std::numeric_limits<double>::infinity());
    std::vector<char> in_tree(n, 0);
    best[0] = 0.0;
    double bottleneck = 0.0;
    for (int it = 0; it < n; ++it) {
        int u = -1;
        for (int i = 0; i < n; ++i)
            if (!in_tree[i] && (u < 0 || best[i] < best[u])) u = i;
        bottleneck = std::max(bottleneck, best[u]);
        in_tree[u] = 1;
        for (int v = 0; v < n; ++v)
            if (!in_tree[v]) best[v] = std::min(best[v], sp.d(u, v));
    }
    return bottleneck;
}

namespace {

double euclid(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

void fill_distances_from_coords(Space& sp) {
    const int n = sp.n();
    sp.dist.assign(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = euclid(sp.coords[i], sp.coords[j]);
            sp.d_mut(i, j) = v;
            sp.d_mut(j, i) = v;
        }
}

}  // namespace

Space build_grid(const std::vector<int>& dims, double spacing, const WeightProfile& profile) {
    if (dims.empty()) throw validation_error("build_grid: need at least one dimension");
    for (int d : dims)
        if (d < 1) throw validation_error("build_grid: each dimension must be >= 1");
    if (!(spacing > 0.0)) throw validation_error("build_grid: spacing must be positive");

    const int nd = static_cast<int>(dims.size());
    long total = 1;
    for (int d : dims) total *= d;
    if (total > 200000) throw validation_error("build_grid: grid too large");

    Space sp;
    sp.ids.reserve(total);
    sp.weights.reserve(total);
    sp.coords.reserve(total);
    const double cell = std::pow(spacing, nd);
    std::vector<int> idx(nd, 0);
    for (long p = 0; p < total; ++p) {
        std::string id;
        std::vector<double> c(nd);
        for (int k = 0; k < nd; ++k) {
            if (!id.empty()) id += '_';
            id += std::to_string(idx[k]);
            c[k] = idx[k] * spacing;
        }
        double w = cell;
        if (profile.kind == WeightProfile::Kind::power) {
            double norm = 0.0;
            for (double v : c) norm += v * v;
            norm = std::sqrt(norm);
            // |0|^beta is read as spacing^beta so the origin keeps mass
            double base = norm > 0.0 ? std::pow(norm, profile.beta) : std::pow(spacing, profile.beta);
            w = base * cell;
        }
        sp.ids.push_back("p" + id);
        sp.weights.push_back(w);
        sp.coords.push_back(std::move(c));
        for (int k = nd - 1; k >= 0; --k) {
            if (++idx[k] < dims[k]) break;
            idx[k] = 0;
        }
    }
    fill_distances_from_coords(sp);
    sp.neighbor_radius = 1.5 * spacing;
    return sp;
}

Space build_cone(int dimension, int levels, int per_ring) {
    if (dimension < 2) throw validation_error("build_cone: dimension must be >= 2");
    if (levels < 1) throw validation_error("build_cone: levels must be >= 1");
    if (per_ring < 1) throw validation_error("build_cone: per_ring must be >= 1");

    const int nd = dimension;
    // Volume of the unit (n-1)-ball, for cross-section cell volumes.
    const double omega = std::pow(M_PI, (nd - 1) / 2.0) / std::tgamma((nd - 1) / 2.0 + 1.0);

    Space sp;
    // Vertex cell: the tip of the double cone up to height 1/2.
    sp.ids.push_back("vertex");
    sp.weights.push_back(2.0 * omega * std::pow(0.5, nd) / nd);
    sp.coords.push_back(std::vector<double>(nd, 0.0));

    for (int sign = +1; sign >= -1; sign -= 2) {
        const char* half = sign > 0 ? "u" : "d";
        for (int l = 1; l <= levels; ++l) {
            const int ring_n = per_ring * l;  // bounded mesh width as the cone grows
            const double slab = omega * std::pow(static_cast<double>(l), nd - 1);
            for (int j = 0; j < ring_n; ++j) {
                std::vector<double> c(nd, 0.0);
                if (nd == 2) {
                    // cross-section [-l, l]; cell midpoints
                    c[0] = -l + (2.0 * j + 1.0) * l / ring_n;
                } else {
                    // one ring at half the cross-section radius
                    double ang = 2.0 * M_PI * j / ring_n;
                    c[0] = 0.5 * l * std::cos(ang);
                    c[1] = 0.5 * l * std::sin(ang);
                }
                c[nd - 1] = sign * l;
                sp.ids.push_back(std::string(half) + std::to_string(l) + "_" + std::to_string(j));
                sp.weights.push_back(slab / ring_n);
                sp.coords.push_back(std::move(c));
            }
        }
    }
    fill_distances_from_coords(sp);
    sp.neighbor_radius = connectivity_radius(sp);
    return sp;
}

}  // namespace interplab
