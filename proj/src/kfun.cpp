#include "interplab/kfun.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "interplab/maximal.hpp"

namespace interplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Warm-started sweeps occasionally inherit a basis from which the pivot path
// is far longer than from the default starting basis; bound the warm solve
// and fall back to a cold solve of the same objective when it trips.
constexpr long kWarmPivotBudget = 40000;

double tau_of(double t, double r) { return r == 1.0 ? t : std::pow(t, 1.0 / r); }

double root_of(double v, double r) { return r == 1.0 ? v : std::pow(v, 1.0 / r); }

ScalarField abs_power_field(const ScalarField& v, double e) {
    ScalarField out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = pow_exp(std::abs(v[i]), e);
    return out;
}

double sup_abs(const ScalarField& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

// Zero out entries that are solver noise; candidates are compared by objective
// afterwards, so snapping never worsens the reported value.
ScalarField snap_small(const ScalarField& g, double thr) {
    ScalarField out = g;
    for (double& v : out)
        if (std::abs(v) <= thr) v = 0.0;
    return out;
}

double values_objective(const Space& sp, const ScalarField& f, const ScalarField& g, double t) {
    ScalarField h(f.size());
    for (size_t i = 0; i < f.size(); ++i) h[i] = f[i] - g[i];
    return lp_norm(sp, h, 1.0) + t * lp_norm(sp, g, kInf);
}

}  // namespace

double k_objective(const Space& sp, const ScalarField& f, const ScalarField& g, double t, double r,
                   const NeighborTable& nb) {
    if (f.size() != g.size() || static_cast<int>(f.size()) != sp.n())
        throw validation_error("k_objective: field size mismatch");
    ScalarField h(f.size());
    for (size_t i = 0; i < f.size(); ++i) h[i] = f[i] - g[i];
    double tau = tau_of(t, r);
    return lp_norm(sp, h, r) + lp_norm(sp, gradient(sp, h, nb), r) +
           tau * (lp_norm(sp, g, kInf) + lp_norm(sp, gradient(sp, g, nb), kInf));
}

double k_objective(const Space& sp, const ScalarField& f, const ScalarField& g, double t,
                   double r) {
    NeighborTable nb = NeighborTable::build(sp, sp.neighbor_radius);
    return k_objective(sp, f, g, t, r, nb);
}

double k_objective_gradient(const Space& sp, const ScalarField& f, const ScalarField& g, double t,
                            double r, const NeighborTable& nb) {
    if (f.size() != g.size() || static_cast<int>(f.size()) != sp.n())
        throw validation_error("k_objective: field size mismatch");
    ScalarField h(f.size());
    for (size_t i = 0; i < f.size(); ++i) h[i] = f[i] - g[i];
    double tau = tau_of(t, r);
    return lp_norm(sp, gradient(sp, h, nb), r) + tau * lp_norm(sp, gradient(sp, g, nb), kInf);
}

double k_objective_gradient(const Space& sp, const ScalarField& f, const ScalarField& g, double t,
                            double r) {
    NeighborTable nb = NeighborTable::build(sp, sp.neighbor_radius);
    return k_objective_gradient(sp, f, g, t, r, nb);
}

double alpha_of_t(const Space& sp, const ScalarField& f, double q, double t) {
    if (static_cast<int>(f.size()) != sp.n()) throw validation_error("alpha_of_t: size mismatch");
    if (!(t > 0.0)) throw validation_error("alpha_of_t: t must be positive");
    if (!(q >= 1.0)) throw validation_error("alpha_of_t: q must be >= 1");
    NeighborTable nb = NeighborTable::build(sp, sp.neighbor_radius);
    ScalarField grad = gradient(sp, f, nb);
    ScalarField hq(sp.n());
    for (int i = 0; i < sp.n(); ++i) hq[i] = pow_exp(std::abs(f[i]) + grad[i], q);
    ScalarField mh = maximal_function(sp, hq);
    double v = decreasing_rearrangement(sp, mh).value_at(t);
    return root_of(v, q);
}

double k_lower(const Space& sp, const ScalarField& f, double t, double r) {
    if (static_cast<int>(f.size()) != sp.n()) throw validation_error("k_lower: size mismatch");
    if (!(t > 0.0)) throw validation_error("k_lower: t must be positive");
    if (!(r >= 1.0)) throw validation_error("k_lower: r must be >= 1");
    ScalarField grad = gradient(sp, f, 0.0);
    StepFunction fr = decreasing_rearrangement(sp, abs_power_field(f, r));
    StepFunction gr = decreasing_rearrangement(sp, abs_power_field(grad, r));
    return tau_of(t, r) * (root_of(fr.double_star(t), r) + root_of(gr.double_star(t), r));
}

// ---------------------------------------------------------------------------
// Constructive upper bounds: all per-t state a curve needs, computed once.

namespace {

struct UpperMachine {
    const Space& sp;
    const ScalarField& f;
    double r, q, p_eff, rho;
    CzdVariant variant;
    bool grad_only;
    NeighborTable nb;
    ScalarField grad;
    bool level_zero = true;          // whole level function vanishes
    StepFunction mh_rearr;           // rearranged maximal function of level^q
    StepFunction fr_rearr, gr_rearr; // r-power rearrangements (lower quantity)
    StepFunction fq_rearr, gq_rearr; // q-power rearrangements (upper quantity)

    UpperMachine(const Space& s, const ScalarField& field, double r_, double q_, double p_,
                 CzdVariant var, double rho_)
        : sp(s), f(field), r(r_), q(q_), p_eff(p_ > 0.0 ? p_ : q_), rho(rho_), variant(var),
          grad_only(var == CzdVariant::homogeneous) {
        if (static_cast<int>(f.size()) != sp.n())
            throw validation_error("k_upper: field size mismatch");
        if (!(r >= 1.0 && q >= r && p_eff >= q))
            throw validation_error("k_upper: exponents must satisfy 1 <= r <= q <= p");
        if (variant == CzdVariant::local && !(rho > 0.0))
            throw validation_error("k_upper: local variant needs rho > 0");
        nb = NeighborTable::build(sp, sp.neighbor_radius);
        grad = gradient(sp, f, nb);
        ScalarField levelq(sp.n());
        for (int i = 0; i < sp.n(); ++i) {
            double base = grad_only ? grad[i] : std::abs(f[i]) + grad[i];
            levelq[i] = pow_exp(base, q);
            if (levelq[i] != 0.0) level_zero = false;
        }
        mh_rearr = decreasing_rearrangement(sp, maximal_function(sp, levelq));
        if (!grad_only) {
            fr_rearr = decreasing_rearrangement(sp, abs_power_field(f, r));
            fq_rearr = decreasing_rearrangement(sp, abs_power_field(f, q));
        }
        gr_rearr = decreasing_rearrangement(sp, abs_power_field(grad, r));
        gq_rearr = decreasing_rearrangement(sp, abs_power_field(grad, q));
    }

    double objective(const ScalarField& g, double t) const {
        return grad_only ? k_objective_gradient(sp, f, g, t, r, nb)
                         : k_objective(sp, f, g, t, r, nb);
    }

    double lower_at(double t) const {
        double gpart = root_of(gr_rearr.double_star(t), r);
        double fpart = grad_only ? 0.0 : root_of(fr_rearr.double_star(t), r);
        return tau_of(t, r) * (fpart + gpart);
    }

    double bracket_at(double t) const {
        double gpart = root_of(gq_rearr.double_star(t), q);
        double fpart = grad_only ? 0.0 : root_of(fq_rearr.double_star(t), q);
        return tau_of(t, r) * (fpart + gpart);
    }

    UpperBound at(double t) const {
        if (!(t > 0.0)) throw validation_error("k_upper: t must be positive");
        UpperBound ub;
        ub.bracket = bracket_at(t);
        double v = mh_rearr.value_at(t);
        if (v <= 0.0) {
            Decomposition w;
            w.variant = variant;
            w.q = q;
            w.p = p_eff;
            w.rho = variant == CzdVariant::local ? rho : 0.0;
            w.cert.clauses.push_back({"reconstruction", 0.0, true, ""});
            if (level_zero) {
                // nothing exceeds any threshold: keep all of f on the sup side
                w.g = f;
                ub.value = objective(f, t);
                ub.mu_omega = 0.0;
            } else {
                // t is beyond the rearrangement support: everything is cut
                w.omega.resize(sp.n());
                std::iota(w.omega.begin(), w.omega.end(), 0);
                w.mu_omega = sp.mu();
                w.omega_is_all = true;
                w.g.assign(sp.n(), 0.0);
                w.pieces.push_back(f);
                w.piece_group.push_back(-1);
                w.cert.clauses.push_back(
                    {"direct_branch", 1.0, true, "threshold level is zero; single piece carries f"});
                ub.value = objective(w.g, t);
                ub.mu_omega = w.mu_omega;
            }
            ub.witness = std::move(w);
            return ub;
        }
        double a = root_of(v, q);
        Decomposition dec;
        switch (variant) {
            case CzdVariant::global:
                dec = czd_global(sp, f, q, p_eff, a, &v);
                break;
            case CzdVariant::homogeneous:
                dec = czd_homogeneous(sp, f, q, p_eff, a, &v);
                break;
            case CzdVariant::local:
                dec = czd_local(sp, f, q, p_eff, a, rho, &v);
                break;
        }
        ub.value = objective(dec.g, t);
        ub.mu_omega = dec.mu_omega;
        ub.witness = std::move(dec);
        return ub;
    }
};

}  // namespace

UpperBound k_upper(const Space& sp, const ScalarField& f, double t, double r, double q,
                   CzdVariant variant, double rho, double p) {
    UpperMachine um(sp, f, r, q, p, variant, rho);
    return um.at(t);
}

// ---------------------------------------------------------------------------
// Linear program construction.

KProblem build_k_problem(const Space& sp, const ScalarField& f, KProblemMode mode) {
    if (static_cast<int>(f.size()) != sp.n())
        throw validation_error("k problem: field size mismatch");
    const int n = sp.n();
    const bool want_values = mode != KProblemMode::gradient_only;
    const bool want_grad = mode != KProblemMode::value_only;

    NeighborTable nb;
    if (want_grad) {
        if (!(sp.neighbor_radius > 0.0))
            throw validation_error("k problem: space has no neighbor radius");
        nb = NeighborTable::build(sp, sp.neighbor_radius);
    }

    KProblem kp;
    kp.mode = mode;
    kp.n = n;
    int next = n;  // g block occupies [0, n)
    if (want_values) {
        kp.var_u = next;
        next += n;
    }
    if (want_grad) {
        kp.var_s = next;
        next += n;
    }
    if (want_values) kp.var_a = next++;
    if (want_grad) kp.var_b = next++;
    kp.lp.nvars = next;

    auto add_row = [&kp](std::vector<std::pair<int, double>> entries, double rhs) {
        std::sort(entries.begin(), entries.end());
        SparseRow row;
        row.rhs = rhs;
        for (auto& [i, v] : entries) {
            row.idx.push_back(i);
            row.val.push_back(v);
        }
        kp.lp.rows.push_back(std::move(row));
        return static_cast<int>(kp.lp.rows.size()) - 1;
    };

    std::vector<int> u_plus(n, -1), u_minus(n, -1);
    if (want_values)
        for (int i = 0; i < n; ++i) {
            u_plus[i] = add_row({{i, 1.0}, {kp.var_u + i, 1.0}}, f[i]);
            u_minus[i] = add_row({{i, -1.0}, {kp.var_u + i, 1.0}}, -f[i]);
        }

    // epigraph rows for the largest difference quotient at each point
    std::vector<std::vector<int>> s_plus(n), s_minus(n);
    std::vector<int> s_nonneg(n, -1);
    std::unordered_map<long long, int> pair_row;  // unordered neighbor pair -> dilation row
    std::vector<int> b_plus_first;                // first dilation row, for the default basis
    if (want_grad) {
        for (int i = 0; i < n; ++i) {
            for (const auto& [j, d] : nb.adj[i]) {
                s_plus[i].push_back(
                    add_row({{i, 1.0}, {j, -1.0}, {kp.var_s + i, d}}, f[i] - f[j]));
                s_minus[i].push_back(
                    add_row({{i, -1.0}, {j, 1.0}, {kp.var_s + i, d}}, f[j] - f[i]));
            }
        }
        for (int i = 0; i < n; ++i) s_nonneg[i] = add_row({{kp.var_s + i, 1.0}}, 0.0);
    }

    std::vector<int> a_plus(n, -1), a_minus(n, -1);
    int a_nonneg = -1;
    if (want_values) {
        for (int i = 0; i < n; ++i) {
            a_plus[i] = add_row({{i, 1.0}, {kp.var_a, 1.0}}, 0.0);
            a_minus[i] = add_row({{i, -1.0}, {kp.var_a, 1.0}}, 0.0);
        }
        a_nonneg = add_row({{kp.var_a, 1.0}}, 0.0);
    }

    int b_nonneg = -1;
    if (want_grad) {
        for (int i = 0; i < n; ++i)
            for (const auto& [j, d] : nb.adj[i]) {
                if (j <= i) continue;
                int rp = add_row({{i, 1.0}, {j, -1.0}, {kp.var_b, d}}, 0.0);
                add_row({{i, -1.0}, {j, 1.0}, {kp.var_b, d}}, 0.0);
                pair_row[static_cast<long long>(i) * n + j] = rp;
                if (b_plus_first.empty()) b_plus_first.push_back(rp);
            }
        b_nonneg = add_row({{kp.var_b, 1.0}}, 0.0);
    }

    // one representative of each connected component pinned to zero when no
    // value term anchors g
    std::vector<int> component(n, -1);
    std::vector<int> gauge_rows;
    std::vector<std::pair<int, int>> tree_edges;
    if (mode == KProblemMode::gradient_only) {
        int ncomp = 0;
        std::vector<int> stack;
        for (int s = 0; s < n; ++s) {
            if (component[s] >= 0) continue;
            int comp = ncomp++;
            component[s] = comp;
            gauge_rows.push_back(add_row({{s, 1.0}}, 0.0));
            add_row({{s, -1.0}}, 0.0);
            stack.push_back(s);
            while (!stack.empty()) {
                int x = stack.back();
                stack.pop_back();
                for (const auto& edge : nb.adj[x]) {
                    int j = edge.first;
                    if (component[j] < 0) {
                        component[j] = comp;
                        tree_edges.emplace_back(std::min(x, j), std::max(x, j));
                        stack.push_back(j);
                    }
                }
            }
        }
    }

    // starting basis: tight rows of the vertex g = 0, u = |f|, s = |grad f|,
    // bounds at zero
    auto pick_s_row = [&](int i) {
        double best = 0.0;
        int kbest = -1;
        const auto& nbrs = nb.adj[i];
        for (size_t k = 0; k < nbrs.size(); ++k) {
            double quot = std::abs(f[i] - f[nbrs[k].first]) / nbrs[k].second;
            if (quot > best) {
                best = quot;
                kbest = static_cast<int>(k);
            }
        }
        if (kbest < 0) return s_nonneg[i];
        return f[i] > f[nbrs[kbest].first] ? s_plus[i][kbest] : s_minus[i][kbest];
    };

    if (want_values)
        for (int i = 0; i < n; ++i) kp.basis.push_back(f[i] >= 0.0 ? u_plus[i] : u_minus[i]);
    if (want_grad)
        for (int i = 0; i < n; ++i) kp.basis.push_back(pick_s_row(i));
    if (want_values) {
        for (int i = 0; i < n; ++i) kp.basis.push_back(a_plus[i]);
        kp.basis.push_back(a_minus[0]);
        (void)a_nonneg;  // kept in the program as the explicit lower bound
    }
    if (mode == KProblemMode::gradient_only) {
        for (int row : gauge_rows) kp.basis.push_back(row);
        for (auto& [i, j] : tree_edges)
            kp.basis.push_back(pair_row.at(static_cast<long long>(i) * n + j));
        kp.basis.push_back(b_nonneg);
    } else if (want_grad) {
        kp.basis.push_back(b_plus_first.empty() ? b_nonneg : b_plus_first.front());
    }
    return kp;
}

std::vector<double> k_problem_objective(const KProblem& kp, const Space& sp, double tau) {
    if (!(tau > 0.0)) throw validation_error("k problem: tau must be positive");
    if (kp.n != sp.n()) throw validation_error("k problem: space mismatch");
    std::vector<double> c(kp.lp.nvars, 0.0);
    if (kp.var_u >= 0)
        for (int i = 0; i < kp.n; ++i) c[kp.var_u + i] = sp.weights[i];
    if (kp.var_s >= 0)
        for (int i = 0; i < kp.n; ++i) c[kp.var_s + i] = sp.weights[i];
    if (kp.var_a >= 0) c[kp.var_a] = tau;
    if (kp.var_b >= 0) c[kp.var_b] = tau;
    return c;
}

// ---------------------------------------------------------------------------
// Oracles.

namespace {

struct PolishResult {
    double value = 0.0;
    ScalarField g;
};

// Evaluate the raw solver point together with cleaned copies — components
// snapped to zero, components snapped onto the data, and the data itself —
// with the same objective routine used for witnesses, and keep the best
// competitor.  Every candidate is feasible, so the reported value is always a
// true objective value; the snaps only strip solver noise, which is what lets
// exact bound comparisons hold at the two trivial ends (g = 0 and g = f).
template <typename Objective>
PolishResult polish(const ScalarField& f, const ScalarField& g_raw, Objective&& obj) {
    double thr = 1e-11 * std::max(1.0, sup_abs(f));
    ScalarField matched = g_raw;
    for (size_t i = 0; i < matched.size(); ++i)
        if (std::fabs(matched[i] - f[i]) <= thr) matched[i] = f[i];
    PolishResult best{obj(snap_small(g_raw, thr)), snap_small(g_raw, thr)};
    double v_match = obj(matched);
    if (v_match < best.value) best = {v_match, std::move(matched)};
    double v_f = obj(f);
    if (v_f < best.value) best = {v_f, f};
    double v_raw = obj(g_raw);
    if (v_raw < best.value) best = {v_raw, g_raw};
    return best;
}

struct DescentSpec {
    double p1 = 1.0;
    double p2 = kInf;
    double coef = 1.0;
    bool grad_only = false;
};

// Subgradient of the lp norm of v, scaled into `out` through the linear map
// described by sign/index pairs; shared by the value and gradient parts.
void add_lp_subgradient(const Space& sp, const ScalarField& v, double p, double scale,
                        const std::vector<int>& argmax, const std::vector<double>& sign,
                        ScalarField& out, bool toward_g) {
    // empty argmax means v holds point values; otherwise v holds difference
    // quotients and the subgradient splits across the quotient endpoints
    const int n = sp.n();
    double nrm = lp_norm(sp, v, p);
    if (nrm <= 0.0) return;
    double sgn_flip = toward_g ? 1.0 : -1.0;
    if (std::isinf(p)) {
        int best = 0;
        for (int i = 1; i < n; ++i)
            if (std::abs(v[i]) > std::abs(v[best])) best = i;
        double s = v[best] >= 0.0 ? 1.0 : -1.0;
        if (argmax.empty()) {
            out[best] += scale * sgn_flip * s;
        } else if (argmax[best] >= 0) {
            double dir = scale * s * sign[best];
            out[best] += sgn_flip * dir;
            out[argmax[best]] -= sgn_flip * dir;
        }
        return;
    }
    double denom = pow_exp(nrm, p - 1.0);
    for (int i = 0; i < n; ++i) {
        if (v[i] == 0.0) continue;
        double mag = sp.weights[i] * pow_exp(std::abs(v[i]), p - 1.0) / denom;
        if (argmax.empty()) {
            double s = v[i] >= 0.0 ? 1.0 : -1.0;
            out[i] += scale * sgn_flip * mag * s;
        } else if (argmax[i] >= 0) {
            double dir = scale * mag * sign[i];
            out[i] += sgn_flip * dir;
            out[argmax[i]] -= sgn_flip * dir;
        }
    }
}

OracleResult subgradient_min(const Space& sp, const ScalarField& f, const NeighborTable& nb,
                             const DescentSpec& spec) {
    const int n = sp.n();
    ScalarField g(n, 0.0);

    // gradient magnitude, argmax neighbor, and quotient sign of a field
    auto grad_parts = [&](const ScalarField& h, ScalarField& mag, std::vector<int>& amax,
                          std::vector<double>& sgn) {
        mag.assign(n, 0.0);
        amax.assign(n, -1);
        sgn.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            for (const auto& [j, d] : nb.adj[i]) {
                double quot = std::abs(h[i] - h[j]) / d;
                if (quot > mag[i]) {
                    mag[i] = quot;
                    amax[i] = j;
                    sgn[i] = (h[i] - h[j] >= 0.0 ? 1.0 : -1.0) / d;
                }
            }
        }
    };

    ScalarField h(n), hmag, gmag;
    std::vector<int> hamax, gamax;
    std::vector<double> hsgn, gsgn;
    auto eval = [&](const ScalarField& gg, ScalarField* sub) {
        for (int i = 0; i < n; ++i) h[i] = f[i] - gg[i];
        grad_parts(h, hmag, hamax, hsgn);
        grad_parts(gg, gmag, gamax, gsgn);
        double value = lp_norm(sp, hmag, spec.p1) + spec.coef * lp_norm(sp, gmag, spec.p2);
        if (!spec.grad_only)
            value += lp_norm(sp, h, spec.p1) + spec.coef * lp_norm(sp, gg, spec.p2);
        if (sub) {
            sub->assign(n, 0.0);
            if (!spec.grad_only) {
                add_lp_subgradient(sp, h, spec.p1, 1.0, {}, {}, *sub, false);
                add_lp_subgradient(sp, gg, spec.p2, spec.coef, {}, {}, *sub, true);
            }
            add_lp_subgradient(sp, hmag, spec.p1, 1.0, hamax, hsgn, *sub, false);
            add_lp_subgradient(sp, gmag, spec.p2, spec.coef, gamax, gsgn, *sub, true);
        }
        return value;
    };

    OracleResult res;
    res.certified = false;
    double best = eval(g, nullptr);
    ScalarField g_best = g;
    double radius = std::max(sup_abs(f), 1e-6);
    const int max_iters = 20000, window = 500;
    double window_best = best;
    res.converged = false;
    ScalarField sub;
    int k = 0;
    for (k = 1; k <= max_iters; ++k) {
        double v = eval(g, &sub);
        if (v < best) {
            best = v;
            g_best = g;
        }
        double norm2 = 0.0;
        for (double s : sub) norm2 += s * s;
        if (norm2 <= 1e-30) {
            res.converged = true;
            break;
        }
        double step = radius / (std::sqrt(static_cast<double>(k)) * std::sqrt(norm2));
        for (int i = 0; i < n; ++i) g[i] -= step * sub[i];
        if (k % window == 0) {
            if (window_best - best <= 1e-6 * (1.0 + std::abs(best))) {
                res.converged = true;
                break;
            }
            window_best = best;
        }
    }
    res.iterations = k;
    res.value = best;
    res.g = std::move(g_best);
    return res;
}

}  // namespace

OracleResult k_oracle(const Space& sp, const ScalarField& f, double t, double r) {
    if (static_cast<int>(f.size()) != sp.n()) throw validation_error("k_oracle: size mismatch");
    if (!(t > 0.0)) throw validation_error("k_oracle: t must be positive");
    if (!(r >= 1.0)) throw validation_error("k_oracle: r must be >= 1");
    NeighborTable nb = NeighborTable::build(sp, sp.neighbor_radius);
    if (r == 1.0) {
        KProblem kp = build_k_problem(sp, f, KProblemMode::full);
        DualSimplex solver(kp.lp, kp.basis);
        LpSolution sol = solver.solve(k_problem_objective(kp, sp, t));
        ScalarField g_raw(sol.x.begin(), sol.x.begin() + sp.n());
        PolishResult pr = polish(f, g_raw,
                                 [&](const ScalarField& g) { return k_objective(sp, f, g, t, 1.0, nb); });
        OracleResult res;
        res.value = pr.value;
        res.g = std::move(pr.g);
        res.certified = sol.certified;
        res.converged = true;
        res.iterations = sol.iterations;
        return res;
    }
    DescentSpec spec{r, kInf, tau_of(t, r), false};
    return subgradient_min(sp, f, nb, spec);
}

OracleResult k_oracle_values_only(const Space& sp, const ScalarField& f, double t) {
    if (static_cast<int>(f.size()) != sp.n())
        throw validation_error("k_oracle: size mismatch");
    if (!(t > 0.0)) throw validation_error("k_oracle: t must be positive");
    KProblem kp = build_k_problem(sp, f, KProblemMode::value_only);
    DualSimplex solver(kp.lp, kp.basis);
    LpSolution sol = solver.solve(k_problem_objective(kp, sp, t));
    ScalarField g_raw(sol.x.begin(), sol.x.begin() + sp.n());
    PolishResult pr =
        polish(f, g_raw, [&](const ScalarField& g) { return values_objective(sp, f, g, t); });
    OracleResult res;
    res.value = pr.value;
    res.g = std::move(pr.g);
    res.certified = sol.certified;
    res.converged = true;
    res.iterations = sol.iterations;
    return res;
}

OracleResult k_oracle_gradient(const Space& sp, const ScalarField& f, double t, double r) {
    if (static_cast<int>(f.size()) != sp.n()) throw validation_error("k_oracle: size mismatch");
    if (!(t > 0.0)) throw validation_error("k_oracle: t must be positive");
    if (!(r >= 1.0)) throw validation_error("k_oracle: r must be >= 1");
    NeighborTable nb = NeighborTable::build(sp, sp.neighbor_radius);
    if (r == 1.0) {
        KProblem kp = build_k_problem(sp, f, KProblemMode::gradient_only);
        DualSimplex solver(kp.lp, kp.basis);
        LpSolution sol = solver.solve(k_problem_objective(kp, sp, t));
        ScalarField g_raw(sol.x.begin(), sol.x.begin() + sp.n());
        // report in the zero-at-first-point gauge
        double shift = g_raw[0];
        for (double& v : g_raw) v -= shift;
        PolishResult pr = polish(f, g_raw, [&](const ScalarField& g) {
            return k_objective_gradient(sp, f, g, t, 1.0, nb);
        });
        OracleResult res;
        res.value = pr.value;
        res.g = std::move(pr.g);
        res.certified = sol.certified;
        res.converged = true;
        res.iterations = sol.iterations;
        return res;
    }
    DescentSpec spec{r, kInf, tau_of(t, r), true};
    OracleResult res = subgradient_min(sp, f, nb, spec);
    double shift = res.g[0];
    for (double& v : res.g) v -= shift;
    return res;
}

double k_oracle_pair(const Space& sp, const ScalarField& f, double t, double p1, double p2) {
    if (!(p1 >= 1.0 && p1 < p2)) throw validation_error("k_oracle_pair: need 1 <= p1 < p2");
    if (!(t > 0.0)) throw validation_error("k_oracle_pair: t must be positive");
    if (p1 == 1.0 && std::isinf(p2)) return k_oracle(sp, f, t, 1.0).value;
    NeighborTable nb = NeighborTable::build(sp, sp.neighbor_radius);
    DescentSpec spec{p1, p2, t, false};
    return subgradient_min(sp, f, nb, spec).value;
}

// ---------------------------------------------------------------------------
// Curves, interpolation norms, reports.

std::vector<double> log_spaced_grid(double lo, double hi, int n) {
    if (!(lo > 0.0 && hi > lo)) throw validation_error("log grid: need 0 < lo < hi");
    if (n < 2) throw validation_error("log grid: need at least two points");
    std::vector<double> xs(n);
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 1; i + 1 < n; ++i)
        xs[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / (n - 1));
    xs[0] = lo;
    xs[n - 1] = hi;
    return xs;
}

std::vector<double> default_t_grid(const Space& sp, int n) {
    return log_spaced_grid(sp.min_weight() / 4.0, 4.0 * sp.mu(), n);
}

KCurve k_curve(const Space& sp, const ScalarField& f, double r, double q, double p,
               const std::vector<double>& tgrid, CzdVariant variant, double rho) {
    if (tgrid.empty()) throw validation_error("k_curve: empty t grid");
    for (size_t i = 0; i < tgrid.size(); ++i) {
        if (!(tgrid[i] > 0.0)) throw validation_error("k_curve: t values must be positive");
        if (i > 0 && !(tgrid[i] > tgrid[i - 1]))
            throw validation_error("k_curve: t grid must be strictly increasing");
    }
    UpperMachine um(sp, f, r, q, p, variant, rho);
    const int N = static_cast<int>(tgrid.size());
    KCurve kc;
    kc.t = tgrid;
    kc.r = r;
    kc.q = q;
    kc.p = um.p_eff;
    kc.lower.resize(N);
    kc.oracle.resize(N);
    kc.upper.resize(N);
    kc.bracket.resize(N);
    kc.mu_omega.resize(N);

    const bool grad_only = variant == CzdVariant::homogeneous;
    if (r == 1.0) {
        KProblem kp = build_k_problem(
            sp, f, grad_only ? KProblemMode::gradient_only : KProblemMode::full);
        DualSimplex solver(kp.lp, kp.basis);
        solver.set_pivot_budget(kWarmPivotBudget);
        bool cert = true;
        for (int i = N - 1; i >= 0; --i) {
            std::vector<double> obj = k_problem_objective(kp, sp, tgrid[i]);
            LpSolution sol = solver.solve(obj);
            if (!sol.certified) {
                // restart this t from the default basis and continue the sweep
                // from wherever the retry lands
                DualSimplex cold(kp.lp, kp.basis);
                sol = cold.solve(obj);
                solver = std::move(cold);
                solver.set_pivot_budget(kWarmPivotBudget);
            }
            ScalarField g_raw(sol.x.begin(), sol.x.begin() + sp.n());
            if (grad_only) {
                double shift = g_raw[0];
                for (double& v : g_raw) v -= shift;
            }
            PolishResult pr = polish(f, g_raw,
                                     [&](const ScalarField& g) { return um.objective(g, tgrid[i]); });
            kc.oracle[i] = pr.value;
            cert = cert && sol.certified;
        }
        kc.oracle_certified = cert;
    } else {
        bool conv = true;
        for (int i = 0; i < N; ++i) {
            OracleResult orc = grad_only ? k_oracle_gradient(sp, f, tgrid[i], r)
                                         : k_oracle(sp, f, tgrid[i], r);
            kc.oracle[i] = orc.value;
            conv = conv && orc.converged;
        }
        kc.oracle_certified = false;
        if (!conv) log_msg(log_level::info, "k_curve: descent oracle did not converge everywhere");
    }

    for (int i = 0; i < N; ++i) {
        kc.lower[i] = um.lower_at(tgrid[i]);
        UpperBound ub = um.at(tgrid[i]);
        kc.upper[i] = ub.value;
        kc.bracket[i] = ub.bracket;
        kc.mu_omega[i] = ub.mu_omega;
    }

    double c_lo = kInf, c_hi = 0.0;
    bool any_lo = false;
    for (int i = 0; i < N; ++i) {
        if (kc.lower[i] > 0.0) {
            c_lo = std::min(c_lo, kc.oracle[i] / kc.lower[i]);
            any_lo = true;
        }
        if (kc.bracket[i] > 0.0) c_hi = std::max(c_hi, kc.upper[i] / kc.bracket[i]);
    }
    kc.c_lower = any_lo ? c_lo : 0.0;
    kc.c_upper = c_hi;
    return kc;
}

double interpolation_norm(const Space& sp, const ScalarField& f, double theta, double q_exp,
                          SpacePair pair, int grid_points) {
    if (static_cast<int>(f.size()) != sp.n())
        throw validation_error("interpolation_norm: size mismatch");
    if (!(theta > 0.0 && theta < 1.0))
        throw validation_error("interpolation_norm: theta must lie in (0, 1)");
    if (!(q_exp >= 1.0)) throw validation_error("interpolation_norm: q must be >= 1");
    if (!(pair.p1 >= 1.0 && pair.p1 < pair.p2))
        throw validation_error("interpolation_norm: need 1 <= p1 < p2");
    if (grid_points < 3) throw validation_error("interpolation_norm: need at least three points");

    std::vector<double> s = log_spaced_grid(sp.min_weight() / 4.0, 4.0 * sp.mu(), grid_points);
    std::vector<double> K(grid_points, 0.0);
    if (pair.p1 == 1.0 && std::isinf(pair.p2)) {
        NeighborTable nb = NeighborTable::build(sp, sp.neighbor_radius);
        KProblem kp = build_k_problem(sp, f, KProblemMode::full);
        DualSimplex solver(kp.lp, kp.basis);
        solver.set_pivot_budget(kWarmPivotBudget);
        for (int i = grid_points - 1; i >= 0; --i) {
            std::vector<double> obj = k_problem_objective(kp, sp, s[i]);
            LpSolution sol = solver.solve(obj);
            if (!sol.certified) {
                DualSimplex cold(kp.lp, kp.basis);
                sol = cold.solve(obj);
                solver = std::move(cold);
                solver.set_pivot_budget(kWarmPivotBudget);
            }
            ScalarField g_raw(sol.x.begin(), sol.x.begin() + sp.n());
            PolishResult pr = polish(f, g_raw, [&](const ScalarField& g) {
                return k_objective(sp, f, g, s[i], 1.0, nb);
            });
            K[i] = pr.value;
        }
    } else {
        for (int i = 0; i < grid_points; ++i)
            K[i] = k_oracle_pair(sp, f, s[i], pair.p1, pair.p2);
    }

    if (std::isinf(q_exp)) {
        double best = 0.0;
        for (int i = 0; i < grid_points; ++i)
            best = std::max(best, std::pow(s[i], -theta) * K[i]);
        return best;
    }

    double dx = (std::log(s.back()) - std::log(s.front())) / (grid_points - 1);
    double acc = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        double v = pow_exp(std::pow(s[i], -theta) * K[i], q_exp);
        acc += (i == 0 || i == grid_points - 1) ? 0.5 * v : v;
    }
    acc *= dx;
    // below the window K grows linearly: integral of (c0 s^{1-theta})^q ds/s
    double c0 = K.front() / s.front();
    acc += pow_exp(c0, q_exp) * std::pow(s.front(), (1.0 - theta) * q_exp) /
           ((1.0 - theta) * q_exp);
    // above it K is the full first-space norm
    double kinf = sobolev_norm(sp, f, pair.p1);
    acc += pow_exp(kinf, q_exp) * std::pow(s.back(), -theta * q_exp) / (theta * q_exp);
    return std::pow(acc, 1.0 / q_exp);
}

EquivalenceReport norm_equivalence_report(const Space& sp, const std::vector<ScalarField>& family,
                                          double p, double r, double q) {
    if (family.empty()) throw validation_error("norm_equivalence_report: empty family");
    if (!(r >= 1.0 && r <= q && q < p && std::isfinite(p)))
        throw validation_error("norm_equivalence_report: need 1 <= r <= q < p < inf");
    EquivalenceReport rep;
    rep.theta = 1.0 - r / p;
    rep.p = p;
    rep.r = r;
    rep.q = q;
    rep.min_ratio = kInf;
    rep.max_ratio = 0.0;
    for (const ScalarField& f : family) {
        double den = sobolev_norm(sp, f, p);
        if (den <= 0.0)
            throw validation_error("norm_equivalence_report: family contains the zero field");
        double num = interpolation_norm(sp, f, rep.theta, p, SpacePair{r, kInf});
        double ratio = num / den;
        rep.ratios.push_back(ratio);
        rep.min_ratio = std::min(rep.min_ratio, ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
    }
    return rep;
}

HomogeneousK k_homogeneous(const Space& sp, const ScalarField& f, double t, double r, double q) {
    UpperMachine um(sp, f, r, q, 0.0, CzdVariant::homogeneous, 0.0);
    if (!(t > 0.0)) throw validation_error("k_homogeneous: t must be positive");
    HomogeneousK hk;
    hk.lower = um.lower_at(t);
    UpperBound ub = um.at(t);
    hk.upper = ub.value;
    hk.bracket = ub.bracket;
    hk.mu_omega = ub.mu_omega;
    OracleResult orc = k_oracle_gradient(sp, f, t, r);
    hk.oracle = orc.value;
    hk.oracle_certified = orc.certified;
    return hk;
}

}  // namespace interplab
