#include "interplab/calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace interplab {

NeighborTable NeighborTable::build(const Space& sp, double radius) {
    NeighborTable nb;
    nb.radius = radius;
    const int n = sp.n();
    nb.adj.resize(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            double dij = sp.d(i, j);
            if (dij <= radius) nb.adj[i].emplace_back(j, dij);
        }
    return nb;
}

ScalarField gradient(const Space& sp, const ScalarField& f, const NeighborTable& nb) {
    if (static_cast<int>(f.size()) != sp.n()) throw validation_error("gradient: field size mismatch");
    ScalarField g(f.size(), 0.0);
    for (int i = 0; i < sp.n(); ++i) {
        double m = 0.0;
        for (auto [j, dij] : nb.adj[i]) m = std::max(m, std::abs(f[j] - f[i]) / dij);
        g[i] = m;  // 0 at isolated points
    }
    return g;
}

ScalarField gradient(const Space& sp, const ScalarField& f, double radius) {
    double r = radius > 0.0 ? radius : sp.neighbor_radius;
    if (!(r > 0.0)) throw validation_error("gradient: no neighbor radius available");
    return gradient(sp, f, NeighborTable::build(sp, r));
}

double lp_norm(const Space& sp, const ScalarField& f, double p) {
    if (static_cast<int>(f.size()) != sp.n()) throw validation_error("lp_norm: field size mismatch");
    if (std::isinf(p)) {
        double m = 0.0;
        for (double v : f) m = std::max(m, std::abs(v));
        return m;
    }
    if (!(p >= 1.0)) throw validation_error("lp_norm: p must be >= 1");
    double s = 0.0;
    for (int i = 0; i < sp.n(); ++i) s += sp.weights[i] * std::pow(std::abs(f[i]), p);
    return std::pow(s, 1.0 / p);
}

double sobolev_norm(const Space& sp, const ScalarField& f, double p, double radius) {
    return lp_norm(sp, f, p) + lp_norm(sp, gradient(sp, f, radius), p);
}

double homogeneous_seminorm(const Space& sp, const ScalarField& f, double p, double radius) {
    return lp_norm(sp, gradient(sp, f, radius), p);
}

PoincareReport poincare_scan(const Space& sp, double q, double lambda, double r1,
                             const std::vector<ScalarField>& tests, double radius) {
    if (!(q >= 1.0)) throw validation_error("poincare_scan: q must be >= 1");
    if (!(lambda >= 1.0)) throw validation_error("poincare_scan: lambda must be >= 1");
    const int n = sp.n();
    const int T = static_cast<int>(tests.size());
    PoincareReport rep;
    rep.q = q;
    rep.lambda = lambda;
    rep.r1 = r1;
    rep.per_center_best.assign(n, {});
    if (T == 0) return rep;

    std::vector<ScalarField> grads(T);
    for (int t = 0; t < T; ++t) grads[t] = gradient(sp, tests[t], radius);

    RadiusLadder ladder = RadiusLadder::for_space(sp);

    // Per center: sort by distance once; balls are prefixes of that order.
    std::vector<int> idx(n);
    std::vector<double> sd(n);
    for (int c = 0; c < n; ++c) {
        for (int j = 0; j < n; ++j) idx[j] = j;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return sp.d(c, a) < sp.d(c, b); });
        for (int k = 0; k < n; ++k) sd[k] = sp.d(c, idx[k]);

        std::vector<double> pw(n + 1, 0.0);
        for (int k = 0; k < n; ++k) pw[k + 1] = pw[k] + sp.weights[idx[k]];
        // prefix sums of w*u (means) and w*|grad u|^q (gradient energy)
        std::vector<std::vector<double>> pwu(T), pge(T);
        for (int t = 0; t < T; ++t) {
            pwu[t].assign(n + 1, 0.0);
            pge[t].assign(n + 1, 0.0);
            for (int k = 0; k < n; ++k) {
                int j = idx[k];
                pwu[t][k + 1] = pwu[t][k] + sp.weights[j] * tests[t][j];
                pge[t][k + 1] = pge[t][k] + sp.weights[j] * std::pow(grads[t][j], q);
            }
        }
        // oscillation sums per distinct prefix
        std::vector<size_t> prefix_sizes;
        for (int k = 1; k <= n; ++k)
            if (k == n || sd[k] > sd[k - 1]) prefix_sizes.push_back(k);
        std::vector<std::vector<double>> osc(prefix_sizes.size(), std::vector<double>(T));
        for (size_t pi = 0; pi < prefix_sizes.size(); ++pi) {
            size_t k = prefix_sizes[pi];
            for (int t = 0; t < T; ++t) {
                double mean = pwu[t][k] / pw[k];
                double s = 0.0;
                for (size_t j = 0; j < k; ++j)
                    s += sp.weights[idx[j]] * std::pow(std::abs(tests[t][idx[j]] - mean), q);
                osc[pi][t] = s;
            }
        }
        auto prefix_of = [&](double r) {
            // number of points with d < r
            return static_cast<size_t>(std::lower_bound(sd.begin(), sd.end(), r) - sd.begin());
        };
        for (double r : ladder.radii) {
            if (!(r < r1)) break;
            size_t k = prefix_of(r);
            if (k == 0) continue;
            size_t pi = std::lower_bound(prefix_sizes.begin(), prefix_sizes.end(), k) - prefix_sizes.begin();
            size_t kl = prefix_of(lambda * r);
            for (int t = 0; t < T; ++t) {
                double ge = pge[t][kl] / pw[kl];
                if (!(ge > 0.0)) {
                    ++rep.skipped;
                    continue;
                }
                ++rep.evaluated;
                double o = std::pow(osc[pi][t] / pw[k], 1.0 / q);
                double ratio = o / (r * std::pow(ge, 1.0 / q));
                if (ratio > rep.per_center_best[c].ratio)
                    rep.per_center_best[c] = {c, r, t, ratio};
                if (ratio > rep.max_ratio) {
                    rep.max_ratio = ratio;
                    rep.argmax = {c, r, t, ratio};
                }
            }
        }
    }
    return rep;
}

ScalarField coordinate_field(const Space& sp, int axis) {
    if (!sp.has_coords()) throw validation_error("coordinate_field: space has no coordinates");
    if (axis < 0 || axis >= static_cast<int>(sp.coords[0].size()))
        throw validation_error("coordinate_field: axis out of range");
    ScalarField f(sp.n());
    for (int i = 0; i < sp.n(); ++i) f[i] = sp.coords[i][axis];
    return f;
}

ScalarField tent_field(const Space& sp) {
    if (!sp.has_coords()) throw validation_error("tent_field: space has no coordinates");
    const int nd = static_cast<int>(sp.coords[0].size());
    std::vector<double> lo(nd, std::numeric_limits<double>::infinity());
    std::vector<double> hi(nd, -std::numeric_limits<double>::infinity());
    for (int i = 0; i < sp.n(); ++i)
        for (int k = 0; k < nd; ++k) {
            lo[k] = std::min(lo[k], sp.coords[i][k]);
            hi[k] = std::max(hi[k], sp.coords[i][k]);
        }
    ScalarField f(sp.n(), 1.0);
    for (int i = 0; i < sp.n(); ++i)
        for (int k = 0; k < nd; ++k) {
            double len = hi[k] - lo[k];
            double v = len > 0.0 ? 1.0 - 2.0 * std::abs(sp.coords[i][k] - (lo[k] + hi[k]) / 2.0) / len : 1.0;
            f[i] *= std::max(0.0, v);
        }
    return f;
}

ScalarField ball_bump_field(const Space& sp, int center, double r) {
    if (!(r > 0.0)) throw validation_error("ball_bump_field: radius must be positive");
    ScalarField f(sp.n());
    for (int i = 0; i < sp.n(); ++i) f[i] = std::max(0.0, 1.0 - sp.d(center, i) / r);
    return f;
}

ScalarField random_fourier_field(const Space& sp, uint64_t seed, int terms) {
    if (!sp.has_coords()) return random_smooth_field(sp, seed);
    const int nd = static_cast<int>(sp.coords[0].size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 2.0 * M_PI);
    double scale = std::max(sp.diameter(), 1e-300);
    ScalarField f(sp.n(), 0.0);
    for (int k = 1; k <= terms; ++k) {
        std::vector<double> dir(nd);
        double norm = 0.0;
        for (int a = 0; a < nd; ++a) {
            dir[a] = gauss(rng);
            norm += dir[a] * dir[a];
        }
        norm = std::sqrt(std::max(norm, 1e-12));
        double amp = gauss(rng) / k;
        double phase = unif(rng);
        for (int i = 0; i < sp.n(); ++i) {
            double dot = 0.0;
            for (int a = 0; a < nd; ++a) dot += dir[a] / norm * sp.coords[i][a];
            f[i] += amp * std::sin(M_PI * k * dot / scale + phase);
        }
    }
    return f;
}

ScalarField random_smooth_field(const Space& sp, uint64_t seed, int passes) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    ScalarField f(sp.n());
    for (double& v : f) v = unif(rng);
    double r = sp.neighbor_radius > 0.0 ? sp.neighbor_radius : connectivity_radius(sp);
    NeighborTable nb = NeighborTable::build(sp, r);
    for (int pass = 0; pass < passes; ++pass) {
        ScalarField g(sp.n());
        for (int i = 0; i < sp.n(); ++i) {
            double sw = sp.weights[i], sv = sp.weights[i] * f[i];
            for (auto [j, dij] : nb.adj[i]) {
                sw += sp.weights[j];
                sv += sp.weights[j] * f[j];
            }
            g[i] = sv / sw;
        }
        f.swap(g);
    }
    return f;
}

ScalarField two_halves_field(const Space& sp) {
    if (!sp.has_coords()) throw validation_error("two_halves_field: space has no coordinates");
    const int last = static_cast<int>(sp.coords[0].size()) - 1;
    ScalarField f(sp.n());
    for (int i = 0; i < sp.n(); ++i) {
        double h = sp.coords[i][last];
        f[i] = h > 0.0 ? 1.0 : (h < 0.0 ? -1.0 : 0.0);
    }
    return f;
}

std::vector<ScalarField> poincare_test_family(const Space& sp, PoincareFamily fam,
                                              uint64_t seed, int count) {
    std::vector<ScalarField> out;
    switch (fam) {
        case PoincareFamily::coordinates: {
            if (sp.has_coords()) {
                for (int a = 0; a < static_cast<int>(sp.coords[0].size()); ++a)
                    out.push_back(coordinate_field(sp, a));
            } else {
                // distance fields from a farthest-point anchor triple
                int a0 = 0;
                for (int rep = 0; rep < 2; ++rep) {
                    int far = a0;
                    for (int i = 0; i < sp.n(); ++i)
                        if (sp.d(a0, i) > sp.d(a0, far)) far = i;
                    a0 = far;
                }
                std::vector<int> anchors = {a0};
                while (static_cast<int>(anchors.size()) < std::min(3, sp.n())) {
                    int best = 0;
                    double bestd = -1.0;
                    for (int i = 0; i < sp.n(); ++i) {
                        double mind = std::numeric_limits<double>::infinity();
                        for (int a : anchors) mind = std::min(mind, sp.d(a, i));
                        if (mind > bestd) {
                            bestd = mind;
                            best = i;
                        }
                    }
                    anchors.push_back(best);
                }
                for (int a : anchors) {
                    ScalarField f(sp.n());
                    for (int i = 0; i < sp.n(); ++i) f[i] = sp.d(a, i);
                    out.push_back(std::move(f));
                }
            }
            break;
        }
        case PoincareFamily::ball_bumps: {
            double r = sp.diameter() / 4.0;
            if (!(r > 0.0)) r = 1.0;
            std::mt19937_64 rng(seed);
            std::uniform_int_distribution<int> pick(0, sp.n() - 1);
            for (int k = 0; k < count; ++k) out.push_back(ball_bump_field(sp, pick(rng), r));
            break;
        }
        case PoincareFamily::random_smooth: {
            for (int k = 0; k < count; ++k) out.push_back(random_smooth_field(sp, seed + k));
            break;
        }
    }
    return out;
}

}  // namespace interplab
