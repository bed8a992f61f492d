#include "interplab/czd.hpp"

#include <algorithm>
#include <cmath>

#include "interplab/maximal.hpp"

namespace interplab {

namespace {

constexpr double kReconTol = 1e-10;
constexpr double kChainTol = 1e-12;

void validate_inputs(const Space& sp, const ScalarField& f, double q, double p, double alpha) {
    if (static_cast<int>(f.size()) != sp.n()) throw validation_error("czd: field size mismatch");
    if (!(alpha > 0.0)) throw validation_error("czd: alpha must be positive");
    if (!(q >= 1.0 && q <= p && std::isfinite(p)))
        throw validation_error("czd: exponents must satisfy 1 <= q <= p < inf");
}

double mean_over(const Space& sp, const std::vector<int>& members, const ScalarField& v) {
    double w = 0.0, s = 0.0;
    for (int m : members) {
        w += sp.weights[m];
        s += sp.weights[m] * v[m];
    }
    return s / w;
}

// |f| + |grad f| (or just |grad f|), and its q-th power
struct LevelFields {
    ScalarField grad, base, baseq;
};

LevelFields level_fields(const Space& sp, const ScalarField& f, const NeighborTable& nb, double q,
                         bool grad_only) {
    LevelFields lv;
    lv.grad = gradient(sp, f, nb);
    lv.base.resize(sp.n());
    lv.baseq.resize(sp.n());
    for (int i = 0; i < sp.n(); ++i) {
        lv.base[i] = grad_only ? lv.grad[i] : std::abs(f[i]) + lv.grad[i];
        lv.baseq[i] = pow_exp(lv.base[i], q);
    }
    return lv;
}

// Shared clause computations for constructor-side certificates.

CertClause reconstruction_clause(const Space& sp, const ScalarField& f, const ScalarField& g,
                                 const std::vector<ScalarField>& pieces) {
    ScalarField sum = g;
    for (const ScalarField& b : pieces)
        for (int i = 0; i < sp.n(); ++i) sum[i] += b[i];
    double fmax = 1.0, dev = 0.0;
    for (int i = 0; i < sp.n(); ++i) fmax = std::max(fmax, std::abs(f[i]));
    for (int i = 0; i < sp.n(); ++i) dev = std::max(dev, std::abs(f[i] - sum[i]));
    CertClause c{"reconstruction", dev / fmax, dev / fmax <= kReconTol, ""};
    return c;
}

CertClause support_clause(const Space& sp, const std::vector<ScalarField>& pieces,
                          const std::vector<Ball>& balls) {
    int violations = 0;
    std::vector<char> inside(sp.n());
    for (size_t i = 0; i < pieces.size(); ++i) {
        std::fill(inside.begin(), inside.end(), 0);
        for (int m : balls[i].members) inside[m] = 1;
        for (int x = 0; x < sp.n(); ++x)
            if (!inside[x] && pieces[i][x] != 0.0) ++violations;
    }
    return {"support", static_cast<double>(violations), violations == 0, ""};
}

}  // namespace

static Decomposition build_threshold_variant(const Space& sp, const ScalarField& f, double q,
                                             double p, double alpha,
                                             const double* threshold_override, bool grad_only) {
    validate_inputs(sp, f, q, p, alpha);
    Decomposition dec;
    dec.variant = grad_only ? CzdVariant::homogeneous : CzdVariant::global;
    dec.q = q;
    dec.p = p;
    dec.alpha = alpha;

    double nr = sp.neighbor_radius;
    if (!(nr > 0.0)) throw validation_error("czd: space has no neighbor radius");
    NeighborTable nb = NeighborTable::build(sp, nr);
    LevelFields lv = level_fields(sp, f, nb, q, grad_only);
    ScalarField mh = maximal_function(sp, lv.baseq);
    double thr = threshold_override ? *threshold_override : pow_exp(alpha, q);
    dec.threshold = thr;
    for (int i = 0; i < sp.n(); ++i)
        if (mh[i] > thr) {
            dec.omega.push_back(i);
            dec.mu_omega += sp.weights[i];
        }
    if (static_cast<int>(dec.omega.size()) == sp.n())
        throw needs_local_variant("czd: bad set covers the whole space, use the local variant");

    PartitionOfUnity pou;
    std::vector<double> means;
    if (dec.omega.empty()) {
        dec.g = f;
    } else {
        dec.fam = whitney(sp, dec.omega, 2.0);
        pou = partition_of_unity(sp, dec.fam);
        size_t nballs = dec.fam.balls.size();
        means.resize(nballs);
        dec.pieces.assign(nballs, ScalarField(sp.n(), 0.0));
        dec.piece_group.assign(nballs, -1);
        for (size_t i = 0; i < nballs; ++i) {
            means[i] = mean_over(sp, dec.fam.balls[i].members, f);
            for (int m : dec.fam.balls[i].members)
                if (pou.chi[i][m] != 0.0) dec.pieces[i][m] = (f[m] - means[i]) * pou.chi[i][m];
        }
        // good part in closed form: f off the bad set, blended ball means on it
        dec.g = f;
        ScalarField blend(sp.n(), 0.0);
        for (size_t i = 0; i < nballs; ++i)
            for (int m : dec.fam.balls[i].members) blend[m] += means[i] * pou.chi[i][m];
        for (int x : dec.omega) dec.g[x] = blend[x];
    }

    // certificate
    Certificate& cert = dec.cert;
    cert.clauses.push_back(reconstruction_clause(sp, f, dec.g, dec.pieces));
    cert.clauses.push_back(support_clause(sp, dec.pieces, dec.fam.balls));
    if (!grad_only) {
        double gs = 0.0;
        for (double v : dec.g) gs = std::max(gs, std::abs(v));
        cert.clauses.push_back({"g_sup", gs / alpha, std::isfinite(gs / alpha), ""});
    }
    {
        ScalarField gg = gradient(sp, dec.g, nb);
        double ggs = 0.0;
        for (double v : gg) ggs = std::max(ggs, v);
        cert.clauses.push_back({"g_grad_sup", ggs / alpha, std::isfinite(ggs / alpha), ""});
    }
    {
        double worst = 0.0;
        double aq = pow_exp(alpha, q);
        for (size_t i = 0; i < dec.pieces.size(); ++i) {
            ScalarField bg = gradient(sp, dec.pieces[i], nb);
            double acc = 0.0;
            for (int m : dec.fam.balls[i].members) {
                double t = pow_exp(bg[m], q);
                if (!grad_only) t += pow_exp(std::abs(dec.pieces[i][m]), q);
                acc += sp.weights[m] * t;
            }
            worst = std::max(worst, acc / (aq * dec.fam.balls[i].measure));
        }
        cert.clauses.push_back({grad_only ? "piece_grad_norms" : "piece_norms", worst,
                                std::isfinite(worst), ""});
        if (grad_only) {
            // first-power version of the same bound
            double worst1 = 0.0;
            for (size_t i = 0; i < dec.pieces.size(); ++i) {
                ScalarField bg = gradient(sp, dec.pieces[i], nb);
                double acc = 0.0;
                for (int m : dec.fam.balls[i].members) acc += sp.weights[m] * bg[m];
                worst1 = std::max(worst1, acc / (alpha * dec.fam.balls[i].measure));
            }
            cert.clauses.push_back({"piece_grad_norms_r1", worst1, std::isfinite(worst1), ""});
        }
    }
    {
        double mass = 0.0;
        for (const Ball& b : dec.fam.balls) mass += b.measure;
        double denom = 0.0;
        for (int i = 0; i < sp.n(); ++i) denom += sp.weights[i] * pow_exp(lv.base[i], p);
        denom /= pow_exp(alpha, p);
        double ratio = mass == 0.0 ? 0.0 : mass / denom;
        cert.clauses.push_back({"ball_mass", ratio, std::isfinite(ratio), ""});
    }
    cert.clauses.push_back(
        {"overlap", static_cast<double>(dec.fam.overlap), true, ""});
    {
        // means of the level function over the big dilations stay below the
        // threshold because each big ball reaches a point outside the bad set
        double worst = 0.0;
        for (size_t i = 0; i < dec.fam.balls.size(); ++i) {
            Ball big = ball(sp, dec.fam.balls[i].center, dec.fam.c2 * dec.fam.r[i]);
            worst = std::max(worst, mean_over(sp, big.members, lv.baseq) / thr);
        }
        cert.clauses.push_back({"mean_chain", worst, worst <= 1.0 + kChainTol, ""});
    }
    if (!grad_only) {
        double worst = 0.0;
        for (size_t i = 0; i < dec.fam.balls.size(); ++i)
            worst = std::max(worst, std::abs(means[i]) / alpha);
        cert.clauses.push_back({"mean_f_over_alpha", worst, std::isfinite(worst), ""});
    }
    return dec;
}

Decomposition czd_global(const Space& sp, const ScalarField& f, double q, double p, double alpha,
                         const double* threshold_override) {
    return build_threshold_variant(sp, f, q, p, alpha, threshold_override, false);
}

Decomposition czd_homogeneous(const Space& sp, const ScalarField& f, double q, double p,
                              double alpha, const double* threshold_override) {
    return build_threshold_variant(sp, f, q, p, alpha, threshold_override, true);
}

Decomposition czd_local(const Space& sp, const ScalarField& f, double q, double p, double alpha,
                        double rho, const double* threshold_override) {
    validate_inputs(sp, f, q, p, alpha);
    if (!(rho > 0.0)) throw validation_error("czd: rho must be positive");
    Decomposition dec;
    dec.variant = CzdVariant::local;
    dec.q = q;
    dec.p = p;
    dec.alpha = alpha;
    dec.rho = rho;

    double nr = sp.neighbor_radius;
    if (!(nr > 0.0)) throw validation_error("czd: space has no neighbor radius");
    NeighborTable nb = NeighborTable::build(sp, nr);
    LevelFields lv = level_fields(sp, f, nb, q, false);
    ScalarField mh = maximal_function(sp, lv.baseq);
    double thr = threshold_override ? *threshold_override : pow_exp(alpha, q);
    dec.threshold = thr;
    for (int i = 0; i < sp.n(); ++i)
        if (mh[i] > thr) {
            dec.omega.push_back(i);
            dec.mu_omega += sp.weights[i];
        }

    if (static_cast<int>(dec.omega.size()) == sp.n()) {
        // nothing survives thresholding: hand all of f to the integrable side
        dec.omega_is_all = true;
        dec.g.assign(sp.n(), 0.0);
        dec.pieces.push_back(f);
        dec.piece_group.push_back(-1);
        dec.cert.clauses.push_back(reconstruction_clause(sp, f, dec.g, dec.pieces));
        dec.cert.clauses.push_back(
            {"direct_branch", 1.0, true, "bad set is the whole space; single piece carries f"});
        return dec;
    }

    dec.unit_cover = unit_ball_cover(sp, rho);
    const BallFamily& cov = dec.unit_cover.family;
    int J = static_cast<int>(cov.balls.size());

    // localized fields and their restricted maximal functions
    std::vector<ScalarField> fj(J), hqj(J), relm(J);
    double ctr = 1.0;
    for (int j = 0; j < J; ++j) {
        fj[j].assign(sp.n(), 0.0);
        for (int m : cov.balls[j].members) fj[j][m] = f[m] * dec.unit_cover.partition.chi[j][m];
        ScalarField gj = gradient(sp, fj[j], nb);
        hqj[j].resize(sp.n());
        for (int i = 0; i < sp.n(); ++i)
            hqj[j][i] = pow_exp(std::abs(fj[j][i]) + gj[i], q);
        relm[j] = relative_maximal(sp, cov.balls[j].members, hqj[j]);
        for (size_t k = 0; k < cov.balls[j].members.size(); ++k) {
            double denom = mh[cov.balls[j].members[k]];
            if (denom > 0.0) ctr = std::max(ctr, relm[j][k] / denom);
        }
    }
    dec.transfer_constant = ctr;

    dec.g.assign(sp.n(), 0.0);
    double local_chain = 0.0;
    for (int j = 0; j < J; ++j) {
        std::vector<int> omega_j;
        for (size_t k = 0; k < cov.balls[j].members.size(); ++k)
            if (relm[j][k] > ctr * thr) omega_j.push_back(cov.balls[j].members[k]);
        BallFamily famj = whitney(sp, omega_j, 2.0);
        PartitionOfUnity pouj = partition_of_unity(sp, famj);

        ScalarField gj = fj[j];
        ScalarField blend(sp.n(), 0.0);
        std::vector<char> in_bj(sp.n(), 0);
        for (int m : cov.balls[j].members) in_bj[m] = 1;
        for (size_t k = 0; k < famj.balls.size(); ++k) {
            double mean = mean_over(sp, famj.balls[k].members, fj[j]);
            ScalarField piece(sp.n(), 0.0);
            for (int m : famj.balls[k].members)
                if (pouj.chi[k][m] != 0.0) piece[m] = (fj[j][m] - mean) * pouj.chi[k][m];
            for (int m : famj.balls[k].members) blend[m] += mean * pouj.chi[k][m];
            dec.pieces.push_back(std::move(piece));
            dec.piece_group.push_back(j);
            dec.fam.balls.push_back(famj.balls[k]);
            dec.fam.core_balls.push_back(famj.core_balls[k]);
            dec.fam.r.push_back(famj.r[k]);
            dec.fam.dist_to_complement.push_back(famj.dist_to_complement[k]);
            // chain constant: mean of the localized level function over the
            // part of the big dilation seen by this cover element
            Ball big = ball(sp, famj.balls[k].center, famj.c2 * famj.r[k]);
            double w = 0.0, s = 0.0;
            for (int m : big.members)
                if (in_bj[m]) {
                    w += sp.weights[m];
                    s += sp.weights[m] * hqj[j][m];
                }
            if (w > 0.0) local_chain = std::max(local_chain, (s / w) / (ctr * thr));
        }
        for (int x : omega_j) gj[x] = blend[x];
        for (int i = 0; i < sp.n(); ++i) dec.g[i] += gj[i];
    }
    std::vector<char> in_union(sp.n(), 0);
    for (const Ball& b : dec.fam.balls)
        for (int m : b.members) in_union[m] = 1;
    for (int i = 0; i < sp.n(); ++i)
        if (in_union[i]) dec.fam.covered.push_back(i);
    measure_family_constants(sp, dec.fam);

    Certificate& cert = dec.cert;
    cert.clauses.push_back(reconstruction_clause(sp, f, dec.g, dec.pieces));
    cert.clauses.push_back(support_clause(sp, dec.pieces, dec.fam.balls));
    {
        double gs = 0.0;
        for (double v : dec.g) gs = std::max(gs, std::abs(v));
        cert.clauses.push_back({"g_sup", gs / alpha, std::isfinite(gs / alpha), ""});
    }
    {
        ScalarField gg = gradient(sp, dec.g, nb);
        double ggs = 0.0;
        for (double v : gg) ggs = std::max(ggs, v);
        cert.clauses.push_back({"g_grad_sup", ggs / alpha, std::isfinite(ggs / alpha), ""});
    }
    {
        double worst = 0.0;
        double aq = pow_exp(alpha, q);
        for (size_t i = 0; i < dec.pieces.size(); ++i) {
            ScalarField bg = gradient(sp, dec.pieces[i], nb);
            double acc = 0.0;
            for (int m : dec.fam.balls[i].members)
                acc += sp.weights[m] *
                       (pow_exp(std::abs(dec.pieces[i][m]), q) + pow_exp(bg[m], q));
            worst = std::max(worst, acc / (aq * dec.fam.balls[i].measure));
        }
        cert.clauses.push_back({"piece_norms", worst, std::isfinite(worst), ""});
    }
    {
        double mass = 0.0;
        for (const Ball& b : dec.fam.balls) mass += b.measure;
        double denom = 0.0;
        for (int i = 0; i < sp.n(); ++i) denom += sp.weights[i] * pow_exp(lv.base[i], p);
        denom /= pow_exp(alpha, p);
        double ratio = mass == 0.0 ? 0.0 : mass / denom;
        cert.clauses.push_back({"ball_mass", ratio, std::isfinite(ratio), ""});
    }
    cert.clauses.push_back({"overlap", static_cast<double>(dec.fam.overlap), true, ""});
    cert.clauses.push_back(
        {"cover_overlap", static_cast<double>(cov.overlap), true, ""});
    cert.clauses.push_back({"transfer_constant", ctr, std::isfinite(ctr), ""});
    cert.clauses.push_back({"mean_chain", local_chain, std::isfinite(local_chain),
                            "informational: anchor point may fall outside the cover element"});
    return dec;
}

Certificate verify_decomposition(const Space& sp, const Decomposition& dec, const ScalarField& f) {
    if (static_cast<int>(f.size()) != sp.n())
        throw validation_error("verify_decomposition: field size mismatch");
    Certificate rep;
    bool grad_only = dec.variant == CzdVariant::homogeneous;

    double nr = sp.neighbor_radius;
    if (!(nr > 0.0)) throw validation_error("verify_decomposition: space has no neighbor radius");
    NeighborTable nb = NeighborTable::build(sp, nr);
    ScalarField grad = gradient(sp, f, nb);
    ScalarField base(sp.n()), baseq(sp.n());
    for (int i = 0; i < sp.n(); ++i) {
        base[i] = grad_only ? grad[i] : std::abs(f[i]) + grad[i];
        baseq[i] = pow_exp(base[i], dec.q);
    }
    ScalarField mh = maximal_function(sp, baseq);
    {
        // re-derive the bad set and compare membership
        std::vector<char> expect(sp.n(), 0), got(sp.n(), 0);
        for (int i = 0; i < sp.n(); ++i) expect[i] = mh[i] > dec.threshold;
        if (dec.omega_is_all) {
            // marker branch: the recorded set must be everything
            int mism = 0;
            for (int i = 0; i < sp.n(); ++i)
                if (!expect[i]) ++mism;
            rep.clauses.push_back(
                {"omega_match", static_cast<double>(mism), mism == 0, "direct branch"});
        } else {
            for (int x : dec.omega) got[x] = 1;
            int mism = 0;
            for (int i = 0; i < sp.n(); ++i)
                if (expect[i] != got[i]) ++mism;
            rep.clauses.push_back({"omega_match", static_cast<double>(mism), mism == 0, ""});
        }
    }

    rep.clauses.push_back(reconstruction_clause(sp, f, dec.g, dec.pieces));
    if (dec.omega_is_all) {
        rep.clauses.push_back(
            {"direct_branch", 1.0, true, "bad set is the whole space; single piece carries f"});
        return rep;
    }
    rep.clauses.push_back(support_clause(sp, dec.pieces, dec.fam.balls));
    if (!grad_only) {
        double gs = 0.0;
        for (double v : dec.g) gs = std::max(gs, std::abs(v));
        rep.clauses.push_back({"g_sup", gs / dec.alpha, std::isfinite(gs / dec.alpha), ""});
    }
    {
        ScalarField gg = gradient(sp, dec.g, nb);
        double ggs = 0.0;
        for (double v : gg) ggs = std::max(ggs, v);
        rep.clauses.push_back({"g_grad_sup", ggs / dec.alpha, std::isfinite(ggs / dec.alpha), ""});
    }
    {
        double worst = 0.0, worst1 = 0.0;
        double aq = pow_exp(dec.alpha, dec.q);
        for (size_t i = 0; i < dec.pieces.size(); ++i) {
            ScalarField bg = gradient(sp, dec.pieces[i], nb);
            double acc = 0.0, acc1 = 0.0;
            for (int m : dec.fam.balls[i].members) {
                double t = pow_exp(bg[m], dec.q);
                if (!grad_only) t += pow_exp(std::abs(dec.pieces[i][m]), dec.q);
                acc += sp.weights[m] * t;
                acc1 += sp.weights[m] * bg[m];
            }
            worst = std::max(worst, acc / (aq * dec.fam.balls[i].measure));
            worst1 = std::max(worst1, acc1 / (dec.alpha * dec.fam.balls[i].measure));
        }
        if (grad_only) {
            rep.clauses.push_back({"piece_grad_norms", worst, std::isfinite(worst), ""});
            rep.clauses.push_back({"piece_grad_norms_r1", worst1, std::isfinite(worst1), ""});
        } else {
            rep.clauses.push_back({"piece_norms", worst, std::isfinite(worst), ""});
        }
    }
    {
        double mass = 0.0;
        for (const Ball& b : dec.fam.balls) mass += b.measure;
        double denom = 0.0;
        for (int i = 0; i < sp.n(); ++i) denom += sp.weights[i] * pow_exp(base[i], dec.p);
        denom /= pow_exp(dec.alpha, dec.p);
        double ratio = mass == 0.0 ? 0.0 : mass / denom;
        rep.clauses.push_back({"ball_mass", ratio, std::isfinite(ratio), ""});
    }
    {
        BallFamily check = dec.fam;
        measure_family_constants(sp, check);
        rep.clauses.push_back({"overlap", static_cast<double>(check.overlap), true, ""});
    }
    if (dec.variant == CzdVariant::local) {
        rep.clauses.push_back(
            {"cover_overlap", static_cast<double>(dec.unit_cover.family.overlap), true, ""});
        rep.clauses.push_back(
            {"transfer_constant", dec.transfer_constant, std::isfinite(dec.transfer_constant), ""});
        double local_chain = 0.0;
        std::vector<char> in_bj(sp.n(), 0);
        for (size_t i = 0; i < dec.pieces.size(); ++i) {
            int j = dec.piece_group[i];
            if (j < 0) continue;
            const Ball& bj = dec.unit_cover.family.balls[j];
            std::fill(in_bj.begin(), in_bj.end(), 0);
            for (int m : bj.members) in_bj[m] = 1;
            ScalarField fjf(sp.n(), 0.0);
            for (int m : bj.members) fjf[m] = f[m] * dec.unit_cover.partition.chi[j][m];
            ScalarField gj = gradient(sp, fjf, nb);
            Ball big = ball(sp, dec.fam.balls[i].center, dec.fam.c2 * dec.fam.r[i]);
            double w = 0.0, s = 0.0;
            for (int m : big.members)
                if (in_bj[m]) {
                    w += sp.weights[m];
                    s += sp.weights[m] * pow_exp(std::abs(fjf[m]) + gj[m], dec.q);
                }
            if (w > 0.0)
                local_chain =
                    std::max(local_chain, (s / w) / (dec.transfer_constant * dec.threshold));
        }
        rep.clauses.push_back({"mean_chain", local_chain, std::isfinite(local_chain),
                               "informational: anchor point may fall outside the cover element"});
    } else {
        double worst = 0.0, worstf = 0.0;
        for (size_t i = 0; i < dec.fam.balls.size(); ++i) {
            Ball big = ball(sp, dec.fam.balls[i].center, dec.fam.c2 * dec.fam.r[i]);
            worst = std::max(worst, mean_over(sp, big.members, baseq) / dec.threshold);
            worstf = std::max(worstf, std::abs(mean_over(sp, dec.fam.balls[i].members, f)) /
                                          dec.alpha);
        }
        rep.clauses.push_back({"mean_chain", worst, worst <= 1.0 + kChainTol, ""});
        if (!grad_only)
            rep.clauses.push_back({"mean_f_over_alpha", worstf, std::isfinite(worstf), ""});
    }
    return rep;
}

}  // namespace interplab
