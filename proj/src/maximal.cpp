#include "interplab/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace interplab {

ScalarField maximal_function(const Space& sp, const ScalarField& f) {
    int n = sp.n();
    if (static_cast<int>(f.size()) != n)
        throw validation_error("maximal_function: field size mismatch");
    ScalarField out(n, 0.0);
    std::vector<int> idx(n);
    std::vector<double> dists(n);
    for (int c = 0; c < n; ++c) {
        std::iota(idx.begin(), idx.end(), 0);
        for (int j = 0; j < n; ++j) dists[j] = sp.d(c, j);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            return dists[a] != dists[b] ? dists[a] < dists[b] : a < b;
        });
        // prefix sums along increasing distance from c
        double w = 0.0, s = 0.0;
        std::vector<double> mean(n + 1, 0.0);
        for (int k = 0; k < n; ++k) {
            w += sp.weights[idx[k]];
            s += sp.weights[idx[k]] * std::abs(f[idx[k]]);
            mean[k + 1] = s / w;
        }
        // a prefix of length k is an actual ball iff the next point sits
        // strictly farther; sweep back carrying the best such mean
        double best = -std::numeric_limits<double>::infinity();
        for (int j = n - 1; j >= 0; --j) {
            if (j + 1 == n || dists[idx[j]] < dists[idx[j + 1]])
                best = std::max(best, mean[j + 1]);
            out[idx[j]] = std::max(out[idx[j]], best);
        }
    }
    return out;
}

ScalarField relative_maximal(const Space& sp, const std::vector<int>& members,
                             const ScalarField& f) {
    if (members.empty()) throw validation_error("relative_maximal: empty subset");
    if (static_cast<int>(f.size()) != sp.n())
        throw validation_error("relative_maximal: field size mismatch");
    Space sub = subspace(sp, members);
    ScalarField g(members.size());
    for (size_t k = 0; k < members.size(); ++k) g[k] = f[members[k]];
    return maximal_function(sub, g);
}

double weak_type_ratio(const Space& sp, const ScalarField& f) {
    double l1 = 0.0;
    for (int i = 0; i < sp.n(); ++i) l1 += sp.weights[i] * std::abs(f[i]);
    if (l1 <= 0.0) throw validation_error("weak_type_ratio: f vanishes identically");
    ScalarField mf = maximal_function(sp, f);
    // sort (value, weight) descending so super-level masses are prefix sums
    std::vector<std::pair<double, double>> vw(sp.n());
    for (int i = 0; i < sp.n(); ++i) vw[i] = {mf[i], sp.weights[i]};
    std::sort(vw.begin(), vw.end(), [](auto& a, auto& b) { return a.first > b.first; });
    const double eps = std::ldexp(1.0, -40);
    double best = 0.0, mass = 0.0;
    for (size_t i = 0; i < vw.size(); ++i) {
        mass += vw[i].second;
        bool last_of_class = (i + 1 == vw.size()) || vw[i + 1].first < vw[i].first;
        if (!last_of_class) continue;
        double lambda = vw[i].first * (1.0 - eps);
        if (lambda <= 0.0) continue;
        // everything sorted so far has Mf >= value > lambda
        best = std::max(best, lambda * mass / l1);
    }
    return best;
}

}  // namespace interplab
