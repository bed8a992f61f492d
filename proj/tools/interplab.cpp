// interplab command-line front end.
//
// Subcommands: space (build/check), rearrange, maximal, whitney, czd, kfun,
// verify, report.  Artifacts are JSON/CSV written through the io layer, so
// every file embeds the tool version, input digests, and the producing flag
// set, and identical invocations reproduce bit-identically.
//
// Exit codes: 0 success, 2 validation/construction error, 3 failed check in
// `verify`, 64 usage error.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "interplab/calculus.hpp"
#include "interplab/cover.hpp"
#include "interplab/czd.hpp"
#include "interplab/io.hpp"
#include "interplab/kfun.hpp"
#include "interplab/maximal.hpp"
#include "interplab/rearrange.hpp"
#include "interplab/space.hpp"
#include "interplab/util.hpp"

namespace {

using namespace interplab;
using nlohmann::ordered_json;

// Tracked loads: every input file lands in the meta block as (path, digest).
Space load_space_tracked(const std::string& path, Meta& meta) {
    Space sp = load_space(path);
    meta.inputs.emplace_back(path, digest_file(path));
    return sp;
}

ScalarField load_field_tracked(const Space& sp, const std::string& path, Meta& meta) {
    ScalarField f = load_field(sp, path);
    meta.inputs.emplace_back(path, digest_file(path));
    return f;
}

void emit_json(const ordered_json& j, const std::string& out) {
    std::string text = j.dump(2);
    text.push_back('\n');
    if (out.empty())
        std::fputs(text.c_str(), stdout);
    else
        write_text_file(out, text);
}

CzdVariant parse_variant(const std::string& s) {
    if (s == "global") return CzdVariant::global;
    if (s == "local") return CzdVariant::local;
    if (s == "homogeneous") return CzdVariant::homogeneous;
    throw validation_error("unknown variant: " + s);
}

double sup_abs_field(const ScalarField& f) {
    double m = 0.0;
    for (double v : f) m = std::max(m, std::fabs(v));
    return m;
}

// ---------------------------------------------------------------------------
// Options shared by the subcommands.  Everything lives in one bag; each
// subcommand registers only the flags it understands.

struct Options {
    std::string space_path, fn_path, out;
    double q = 1.0, p = 0.0, r = 1.0;
    double alpha = 0.0, t = 0.0, theta = 0.0, rho = 0.0;
    int grid = 65;
    int dims = 1;
    double spacing = 1.0;
    std::string shape = "grid";
    std::string profile = "uniform";
    double beta = 0.0;
    int cone_dim = 2, cone_levels = 8, cone_ring = 8;
    std::string variant = "global";
    std::string suite = "all";
    unsigned seed = 1;
    int threads = 1;
    bool alpha_set = false, t_set = false, theta_set = false, p_set = false;
};

void add_threads_flag(CLI::App* cmd, Options& o) {
    cmd->add_option("--threads", o.threads,
                    "worker threads (accepted for compatibility; execution is serial)");
}

// ---------------------------------------------------------------------------
// space build / space check

int run_space_build(Options& o, Meta& meta) {
    Space sp = [&] {
        if (o.shape == "cone") return build_cone(o.cone_dim, o.cone_levels, o.cone_ring);
        if (o.shape != "grid") throw validation_error("unknown shape: " + o.shape);
        if (o.grid < 1) throw validation_error("--grid must be at least 1");
        if (o.dims < 1) throw validation_error("--dims must be at least 1");
        WeightProfile prof = o.profile == "power" ? WeightProfile::power(o.beta)
                                                  : WeightProfile::uniform();
        if (o.profile != "uniform" && o.profile != "power")
            throw validation_error("unknown profile: " + o.profile);
        std::vector<int> dims(static_cast<size_t>(o.dims), o.grid);
        return build_grid(dims, o.spacing, prof);
    }();
    save_space(sp, o.out, meta);
    log_msg(log_level::info, "space build: %d points, mass %s", sp.n(),
            fmt_double(sp.mu()).c_str());
    return 0;
}

int run_space_check(Options& o, Meta& meta) {
    Space sp = load_space_tracked(o.space_path, meta);
    RadiusLadder ladder = RadiusLadder::for_space(sp);
    DoublingReport doubling = doubling_constant(sp, ladder);
    ordered_json j;
    j["schema"] = "interplab.space_check/1";
    j["points"] = sp.n();
    j["total_mass"] = sp.mu();
    j["min_weight"] = sp.min_weight();
    j["diameter"] = sp.diameter();
    j["neighbor_radius"] = sp.neighbor_radius;
    j["connectivity_radius"] = connectivity_radius(sp);
    j["doubling_constant"] = doubling.constant;
    j["ladder_radii"] = ladder.radii.size();
    j["meta"] = meta_block(meta);
    emit_json(j, o.out);
    return 0;
}

// ---------------------------------------------------------------------------
// rearrange / maximal / whitney

int run_rearrange(Options& o, Meta& meta) {
    Space sp = load_space_tracked(o.space_path, meta);
    ScalarField f = load_field_tracked(sp, o.fn_path, meta);
    StepFunction sf = decreasing_rearrangement(sp, f);
    save_step_function(sf, o.out, &meta);
    return 0;
}

int run_maximal(Options& o, Meta& meta) {
    Space sp = load_space_tracked(o.space_path, meta);
    ScalarField f = load_field_tracked(sp, o.fn_path, meta);
    ScalarField mf = maximal_function(sp, f);
    save_field(sp, mf, o.out, &meta);
    return 0;
}

int run_whitney(Options& o, Meta& meta) {
    Space sp = load_space_tracked(o.space_path, meta);
    ScalarField f = load_field_tracked(sp, o.fn_path, meta);
    if (!o.alpha_set && !o.t_set)
        throw validation_error("whitney: one of --alpha or --t is required");
    double alpha = o.alpha_set ? o.alpha : alpha_of_t(sp, f, o.q, o.t);
    if (!(alpha > 0.0))
        throw validation_error("whitney: level threshold is zero; the superlevel set is empty");
    NeighborTable nb = NeighborTable::build(sp, sp.neighbor_radius);
    ScalarField grad = gradient(sp, f, nb);
    ScalarField hq(f.size());
    for (size_t i = 0; i < f.size(); ++i)
        hq[i] = pow_exp(std::fabs(f[i]) + grad[i], o.q);
    ScalarField mh = maximal_function(sp, hq);
    double thr = pow_exp(alpha, o.q);
    std::vector<int> omega;
    for (int i = 0; i < sp.n(); ++i)
        if (mh[static_cast<size_t>(i)] > thr) omega.push_back(i);
    BallFamily fam = whitney(sp, omega);
    save_ball_family(sp, fam, o.out, meta);
    log_msg(log_level::info, "whitney: %zu balls over a bad set of %zu points",
            fam.balls.size(), omega.size());
    return 0;
}

// ---------------------------------------------------------------------------
// czd

int run_czd(Options& o, Meta& meta) {
    Space sp = load_space_tracked(o.space_path, meta);
    ScalarField f = load_field_tracked(sp, o.fn_path, meta);
    if (!o.alpha_set && !o.t_set)
        throw validation_error("czd: one of --alpha or --t is required");
    double p = o.p_set ? o.p : std::max(o.q, 2.0);
    CzdVariant variant_probe = parse_variant(o.variant);
    double alpha = o.alpha;
    if (!o.alpha_set) {
        if (variant_probe == CzdVariant::homogeneous) {
            // the homogeneous variant thresholds on the gradient-only level,
            // so the mass parameter must be read off that rearrangement
            NeighborTable nb = NeighborTable::build(sp, sp.neighbor_radius);
            ScalarField grad = gradient(sp, f, nb);
            ScalarField hq(grad.size());
            for (size_t i = 0; i < grad.size(); ++i) hq[i] = pow_exp(grad[i], o.q);
            StepFunction mh = decreasing_rearrangement(sp, maximal_function(sp, hq));
            alpha = pow_exp(mh.value_at(o.t), 1.0 / o.q);
        } else {
            alpha = alpha_of_t(sp, f, o.q, o.t);
        }
    }
    if (!(alpha > 0.0))
        throw validation_error(
            "czd: level threshold is zero at this t; the decomposition is trivial (g = f)");
    Decomposition dec = [&] {
        switch (variant_probe) {
            case CzdVariant::global:
                return czd_global(sp, f, o.q, p, alpha);
            case CzdVariant::homogeneous:
                return czd_homogeneous(sp, f, o.q, p, alpha);
            default: {
                double rho = o.rho > 0.0 ? o.rho : 2.5 * sp.diameter();
                return czd_local(sp, f, o.q, p, alpha, rho);
            }
        }
    }();
    save_decomposition(sp, dec, o.out, meta);
    log_msg(log_level::info, "czd: bad set mass %s, %zu pieces, certificate %s",
            fmt_double(dec.mu_omega).c_str(), dec.pieces.size(),
            dec.cert.all_pass() ? "pass" : "FAIL");
    return 0;
}

// ---------------------------------------------------------------------------
// kfun

int run_kfun(Options& o, Meta& meta) {
    Space sp = load_space_tracked(o.space_path, meta);
    ScalarField f = load_field_tracked(sp, o.fn_path, meta);
    if (o.theta_set) {
        if (!(o.theta > 0.0 && o.theta < 1.0))
            throw validation_error("kfun: --theta must lie strictly between 0 and 1");
        double value = interpolation_norm(sp, f, o.theta, o.q, SpacePair{}, o.grid);
        ordered_json j;
        j["schema"] = "interplab.interp/1";
        j["theta"] = o.theta;
        j["q"] = o.q;
        j["p1"] = 1.0;
        j["p2"] = "inf";
        j["grid_points"] = o.grid;
        j["value"] = value;
        j["meta"] = meta_block(meta);
        emit_json(j, o.out);
        return 0;
    }
    if (o.out.empty())
        throw validation_error("kfun: -o is required for curve output");
    double p = o.p_set ? o.p : o.q;
    std::vector<double> tgrid = default_t_grid(sp, o.grid);
    KCurve kc = k_curve(sp, f, o.r, o.q, p, tgrid, parse_variant(o.variant), o.rho);
    save_k_curve(kc, o.out, &meta);
    log_msg(log_level::info, "kfun: %zu rows, c_lower %s, c_upper %s", kc.t.size(),
            fmt_double(kc.c_lower).c_str(), fmt_double(kc.c_upper).c_str());
    return 0;
}

// ---------------------------------------------------------------------------
// verify

void push_check(std::vector<CertClause>& checks, const std::string& name, double constant,
                bool pass, const std::string& note = "") {
    checks.push_back(CertClause{name, constant, pass, note});
}

void verify_space(const Space& sp, std::vector<CertClause>& checks) {
    push_check(checks, "space_valid", static_cast<double>(sp.n()), true,
               "file loaded and metric axioms validated");
    push_check(checks, "positive_mass", sp.mu(), sp.mu() > 0.0);
    RadiusLadder ladder = RadiusLadder::for_space(sp);
    DoublingReport doubling = doubling_constant(sp, ladder);
    push_check(checks, "doubling_finite", doubling.constant, std::isfinite(doubling.constant));
    double conn = connectivity_radius(sp);
    push_check(checks, "connectivity_within_diameter", conn,
               sp.n() < 2 || conn <= sp.diameter() * (1.0 + 1e-12));
    push_check(checks, "neighbor_radius_positive", sp.neighbor_radius,
               sp.n() < 2 || sp.neighbor_radius > 0.0);
}

void verify_rearrange(const Space& sp, const ScalarField& f, std::vector<CertClause>& checks) {
    StepFunction sf = decreasing_rearrangement(sp, f);
    double l1 = lp_norm(sp, f, 1.0);
    double dev = std::fabs(sf.integral(sp.mu()) - l1);
    push_check(checks, "rearrangement_mass", dev, dev <= 1e-9 * (1.0 + l1),
               "layer-cake mass agrees with the L1 norm");
    bool monotone = true;
    for (size_t k = 1; k < sf.values.size(); ++k)
        if (!(sf.values[k] < sf.values[k - 1])) monotone = false;
    push_check(checks, "rearrangement_monotone", 0.0, monotone);
    double kdev = std::fabs(k_lp_linf(sp, f, sp.mu(), 1.0) - l1);
    push_check(checks, "k_identity_at_total_mass", kdev, kdev <= 1e-9 * (1.0 + l1),
               "K(f, mu(X); L1, Linf) collapses to the L1 norm");
}

void verify_maximal(const Space& sp, const ScalarField& f, std::vector<CertClause>& checks) {
    ScalarField mf = maximal_function(sp, f);
    double worst = 0.0;
    for (size_t i = 0; i < f.size(); ++i)
        worst = std::max(worst, std::fabs(f[i]) - mf[i]);
    push_check(checks, "maximal_dominates", worst, worst <= 1e-12 * (1.0 + sup_abs_field(f)),
               "Mf >= |f| pointwise");
    if (sup_abs_field(f) == 0.0) {
        push_check(checks, "weak_type_finite", 0.0, true, "zero field: ratio trivially bounded");
    } else {
        double wt = weak_type_ratio(sp, f);
        push_check(checks, "weak_type_finite", wt, std::isfinite(wt));
    }
}

void verify_czd(const Space& sp, const ScalarField& f, const Options& o,
                std::vector<CertClause>& checks) {
    double t = o.t_set ? o.t : 0.5 * sp.mu();
    double alpha = o.alpha_set ? o.alpha : alpha_of_t(sp, f, o.q, t);
    if (!(alpha > 0.0)) {
        push_check(checks, "czd_trivial_level", 0.0, true,
                   "level threshold vanishes at t; decomposition is trivial");
        return;
    }
    double p = o.p_set ? o.p : std::max(o.q, 2.0);
    CzdVariant variant = parse_variant(o.variant);
    Decomposition dec = [&] {
        try {
            switch (variant) {
                case CzdVariant::global:
                    return czd_global(sp, f, o.q, p, alpha);
                case CzdVariant::homogeneous:
                    return czd_homogeneous(sp, f, o.q, p, alpha);
                default:
                    break;
            }
        } catch (const needs_local_variant&) {
            log_msg(log_level::info, "verify: bad set covers the space, switching to local");
        }
        double rho = o.rho > 0.0 ? o.rho : 2.5 * sp.diameter();
        return czd_local(sp, f, o.q, p, alpha, rho);
    }();
    Certificate cert = verify_decomposition(sp, dec, f);
    for (const CertClause& c : cert.clauses) checks.push_back(c);
}

void verify_kfun(const Space& sp, const ScalarField& f, const Options& o,
                 std::vector<CertClause>& checks) {
    int grid = std::min(o.grid, 9);
    std::vector<double> tgrid = default_t_grid(sp, grid);
    double p = o.p_set ? o.p : o.q;
    KCurve kc = k_curve(sp, f, o.r, o.q, p, tgrid, parse_variant(o.variant), o.rho);
    double worst = 0.0;
    for (size_t k = 0; k < kc.t.size(); ++k)
        worst = std::max(worst, kc.oracle[k] - kc.upper[k]);
    double slack = o.r == 1.0 ? 0.0 : 1e-9 * (1.0 + sobolev_norm(sp, f, o.r));
    push_check(checks, "kfun_oracle_below_witness", worst, worst <= slack,
               o.r == 1.0 ? "exact: the witness is a feasible competitor"
                          : "descent oracle within tolerance of the witness");
    bool zero = sup_abs_field(f) == 0.0;
    push_check(checks, "kfun_lower_ratio_positive", kc.c_lower, zero || kc.c_lower > 0.0,
               zero ? "zero field: all columns vanish" : "");
    push_check(checks, "kfun_upper_ratio_finite", kc.c_upper, std::isfinite(kc.c_upper));
    double growth = 0.0;
    for (size_t k = 1; k < kc.t.size(); ++k)
        growth = std::max(growth, kc.oracle[k - 1] - kc.oracle[k]);
    push_check(checks, "kfun_monotone_in_t", growth,
               growth <= 1e-9 * (1.0 + sobolev_norm(sp, f, o.r)),
               "K(f, t) is nondecreasing in t");
}

int run_verify(Options& o, Meta& meta) {
    Space sp = load_space_tracked(o.space_path, meta);
    ScalarField f(static_cast<size_t>(sp.n()), 0.0);
    if (!o.fn_path.empty()) f = load_field_tracked(sp, o.fn_path, meta);
    std::vector<CertClause> checks;
    bool all = o.suite == "all";
    if (all || o.suite == "space") verify_space(sp, checks);
    if (all || o.suite == "rearrange") verify_rearrange(sp, f, checks);
    if (all || o.suite == "maximal") verify_maximal(sp, f, checks);
    if (all || o.suite == "czd") verify_czd(sp, f, o, checks);
    if (all || o.suite == "kfun") verify_kfun(sp, f, o, checks);
    if (checks.empty()) throw validation_error("unknown suite: " + o.suite);
    bool all_pass = true;
    ordered_json items = ordered_json::array();
    for (const CertClause& c : checks) {
        all_pass = all_pass && c.pass;
        ordered_json e;
        e["name"] = c.name;
        e["constant"] = c.constant;
        e["pass"] = c.pass;
        if (!c.note.empty()) e["note"] = c.note;
        items.push_back(e);
    }
    ordered_json j;
    j["schema"] = "interplab.verify/1";
    j["suite"] = o.suite;
    j["checks"] = items;
    j["all_pass"] = all_pass;
    j["meta"] = meta_block(meta);
    emit_json(j, o.out);
    return all_pass ? 0 : 3;
}

// ---------------------------------------------------------------------------
// report

int run_report(Options& o, Meta& meta) {
    Space sp = load_space_tracked(o.space_path, meta);
    RadiusLadder ladder = RadiusLadder::for_space(sp);
    DoublingReport doubling = doubling_constant(sp, ladder);
    ordered_json j;
    j["schema"] = "interplab.report/1";
    ordered_json js;
    js["points"] = sp.n();
    js["total_mass"] = sp.mu();
    js["min_weight"] = sp.min_weight();
    js["diameter"] = sp.diameter();
    js["neighbor_radius"] = sp.neighbor_radius;
    js["connectivity_radius"] = connectivity_radius(sp);
    js["doubling_constant"] = doubling.constant;
    j["space"] = js;
    if (!o.fn_path.empty()) {
        ScalarField f = load_field_tracked(sp, o.fn_path, meta);
        ordered_json jf;
        jf["l1"] = lp_norm(sp, f, 1.0);
        jf["l2"] = lp_norm(sp, f, 2.0);
        jf["sup"] = sup_abs_field(f);
        jf["sobolev_1"] = sobolev_norm(sp, f, 1.0);
        jf["sobolev_2"] = sobolev_norm(sp, f, 2.0);
        jf["sobolev_sup"] = sobolev_norm(sp, f, std::numeric_limits<double>::infinity());
        if (sup_abs_field(f) > 0.0) jf["weak_type_ratio"] = weak_type_ratio(sp, f);
        jf["rearrangement_steps"] = decreasing_rearrangement(sp, f).values.size();
        j["field"] = jf;
    }
    ScalarField probe = random_smooth_field(sp, o.seed);
    ordered_json jp;
    jp["seed"] = o.seed;
    jp["sup"] = sup_abs_field(probe);
    jp["sobolev_1"] = sobolev_norm(sp, probe, 1.0);
    jp["weak_type_ratio"] = weak_type_ratio(sp, probe);
    j["probe"] = jp;
    j["meta"] = meta_block(meta);
    emit_json(j, o.out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"interplab: rearrangements, maximal functions, Calderon-Zygmund "
                 "decompositions, and K-functional estimates on finite metric-measure spaces"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(interplab::tool_version));

    Options o;
    Meta meta;
    for (int i = 1; i < argc; ++i) meta.flags.emplace_back(argv[i]);

    // space
    CLI::App* sp_cmd = app.add_subcommand("space", "build or inspect a metric-measure space");
    sp_cmd->require_subcommand(1);
    CLI::App* sp_build = sp_cmd->add_subcommand("build", "construct a grid or cone space");
    sp_build->add_option("--shape", o.shape, "grid|cone (default grid)");
    sp_build->add_option("--grid", o.grid, "points per axis for grid shapes");
    sp_build->add_option("--dims", o.dims, "number of axes (default 1: a line)");
    sp_build->add_option("--spacing", o.spacing, "lattice spacing");
    sp_build->add_option("--profile", o.profile, "weight profile: uniform|power");
    sp_build->add_option("--beta", o.beta, "exponent for the power profile");
    sp_build->add_option("--cone-dim", o.cone_dim, "ambient dimension of the cone");
    sp_build->add_option("--cone-levels", o.cone_levels, "truncation height of the cone");
    sp_build->add_option("--cone-ring", o.cone_ring, "ring population scale of the cone");
    sp_build->add_option("-o,--output", o.out, "output space JSON")->required();
    add_threads_flag(sp_build, o);
    CLI::App* sp_check = sp_cmd->add_subcommand("check", "validate a space file and summarize it");
    sp_check->add_option("--space", o.space_path, "space JSON")->required();
    sp_check->add_option("-o,--output", o.out, "summary JSON (stdout if omitted)");
    add_threads_flag(sp_check, o);

    // rearrange
    CLI::App* re_cmd = app.add_subcommand("rearrange", "decreasing rearrangement of a field");
    re_cmd->add_option("--space", o.space_path, "space JSON")->required();
    re_cmd->add_option("--fn", o.fn_path, "field CSV")->required();
    re_cmd->add_option("-o,--output", o.out, "step-function CSV")->required();
    add_threads_flag(re_cmd, o);

    // maximal
    CLI::App* mx_cmd = app.add_subcommand("maximal", "Hardy-Littlewood maximal function");
    mx_cmd->add_option("--space", o.space_path, "space JSON")->required();
    mx_cmd->add_option("--fn", o.fn_path, "field CSV")->required();
    mx_cmd->add_option("-o,--output", o.out, "field CSV of Mf")->required();
    add_threads_flag(mx_cmd, o);

    // whitney
    CLI::App* wh_cmd = app.add_subcommand(
        "whitney", "Whitney ball cover of the superlevel set of the maximal level function");
    wh_cmd->add_option("--space", o.space_path, "space JSON")->required();
    wh_cmd->add_option("--fn", o.fn_path, "field CSV")->required();
    wh_cmd->add_option("--q", o.q, "level exponent (default 1)");
    auto* wh_alpha = wh_cmd->add_option("--alpha", o.alpha, "level threshold");
    auto* wh_t = wh_cmd->add_option("--t", o.t, "mass parameter; threshold taken at the rearrangement");
    wh_alpha->excludes(wh_t);
    wh_cmd->add_option("-o,--output", o.out, "ball family JSON")->required();
    add_threads_flag(wh_cmd, o);

    // czd
    CLI::App* cz_cmd = app.add_subcommand("czd", "Calderon-Zygmund decomposition with certificate");
    cz_cmd->add_option("--space", o.space_path, "space JSON")->required();
    cz_cmd->add_option("--fn", o.fn_path, "field CSV")->required();
    cz_cmd->add_option("--q", o.q, "level exponent (default 1)");
    cz_cmd->add_option("--p", o.p, "piece-norm exponent (default max(q,2))");
    auto* cz_alpha = cz_cmd->add_option("--alpha", o.alpha, "level threshold");
    auto* cz_t = cz_cmd->add_option("--t", o.t, "mass parameter; threshold taken at the rearrangement");
    cz_alpha->excludes(cz_t);
    cz_cmd->add_option("--variant", o.variant, "global|local|homogeneous (default global)")
        ->check(CLI::IsMember({"global", "local", "homogeneous"}));
    cz_cmd->add_option("--rho", o.rho, "cover radius for the local variant (default 2.5 x diameter)");
    cz_cmd->add_option("-o,--output", o.out, "decomposition JSON")->required();
    add_threads_flag(cz_cmd, o);

    // kfun
    CLI::App* kf_cmd = app.add_subcommand(
        "kfun", "two-sided K-functional curve, or the interpolation norm with --theta");
    kf_cmd->add_option("--space", o.space_path, "space JSON")->required();
    kf_cmd->add_option("--fn", o.fn_path, "field CSV")->required();
    kf_cmd->add_option("--r", o.r, "base-space exponent (default 1; exact oracle at 1)");
    kf_cmd->add_option("--q", o.q, "level exponent; second exponent of the interpolation norm");
    kf_cmd->add_option("--p", o.p, "piece-norm exponent (default q)");
    kf_cmd->add_option("--grid", o.grid, "t-grid size (default 65)");
    kf_cmd->add_option("--theta", o.theta, "interpolation parameter; switches to norm output");
    kf_cmd->add_option("--variant", o.variant, "global|local|homogeneous (default global)")
        ->check(CLI::IsMember({"global", "local", "homogeneous"}));
    kf_cmd->add_option("--rho", o.rho, "cover radius for the local variant");
    kf_cmd->add_option("-o,--output", o.out, "curve CSV, or JSON for --theta (stdout if omitted)");
    add_threads_flag(kf_cmd, o);

    // verify
    CLI::App* vf_cmd = app.add_subcommand("verify", "run consistency suites; exit 3 on failure");
    vf_cmd->add_option("--suite", o.suite, "all|space|rearrange|maximal|czd|kfun (default all)")
        ->check(CLI::IsMember({"all", "space", "rearrange", "maximal", "czd", "kfun"}));
    vf_cmd->add_option("--space", o.space_path, "space JSON")->required();
    vf_cmd->add_option("--fn", o.fn_path, "field CSV (default: the zero field)");
    vf_cmd->add_option("--q", o.q, "level exponent");
    vf_cmd->add_option("--p", o.p, "piece-norm exponent");
    vf_cmd->add_option("--r", o.r, "base-space exponent");
    auto* vf_alpha = vf_cmd->add_option("--alpha", o.alpha, "level threshold for the czd suite");
    auto* vf_t = vf_cmd->add_option("--t", o.t, "mass parameter for the czd suite");
    vf_alpha->excludes(vf_t);
    vf_cmd->add_option("--grid", o.grid, "t-grid size for the kfun suite");
    vf_cmd->add_option("--variant", o.variant, "global|local|homogeneous")
        ->check(CLI::IsMember({"global", "local", "homogeneous"}));
    vf_cmd->add_option("--rho", o.rho, "cover radius for the local variant");
    vf_cmd->add_option("-o,--output", o.out, "report JSON (stdout if omitted)");
    add_threads_flag(vf_cmd, o);

    // report
    CLI::App* rp_cmd = app.add_subcommand("report", "summary statistics of a space (and field)");
    rp_cmd->add_option("--space", o.space_path, "space JSON")->required();
    rp_cmd->add_option("--fn", o.fn_path, "field CSV (optional)");
    rp_cmd->add_option("--seed", o.seed, "seed for the probe field");
    rp_cmd->add_option("-o,--output", o.out, "report JSON (stdout if omitted)");
    add_threads_flag(rp_cmd, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::fputs(app.help().c_str(), stdout);
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        std::fputs(app.help(std::string{}, CLI::AppFormatMode::All).c_str(), stdout);
        return 0;
    } catch (const CLI::CallForVersion&) {
        std::printf("%s\n", interplab::tool_version);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n\n%s", e.what(), app.help().c_str());
        return 64;
    }

    o.alpha_set = cz_alpha->count() > 0 || wh_alpha->count() > 0 || vf_alpha->count() > 0;
    o.t_set = cz_t->count() > 0 || wh_t->count() > 0 || vf_t->count() > 0;
    o.theta_set = kf_cmd->count("--theta") > 0;
    o.p_set = cz_cmd->count("--p") > 0 || kf_cmd->count("--p") > 0 || vf_cmd->count("--p") > 0;

    try {
        if (app.got_subcommand(sp_cmd)) {
            if (sp_cmd->got_subcommand(sp_build)) return run_space_build(o, meta);
            if (sp_cmd->got_subcommand(sp_check)) return run_space_check(o, meta);
        }
        if (app.got_subcommand(re_cmd)) return run_rearrange(o, meta);
        if (app.got_subcommand(mx_cmd)) return run_maximal(o, meta);
        if (app.got_subcommand(wh_cmd)) return run_whitney(o, meta);
        if (app.got_subcommand(cz_cmd)) return run_czd(o, meta);
        if (app.got_subcommand(kf_cmd)) return run_kfun(o, meta);
        if (app.got_subcommand(vf_cmd)) return run_verify(o, meta);
        if (app.got_subcommand(rp_cmd)) return run_report(o, meta);
    } catch (const interplab::needs_local_variant& e) {
        std::fprintf(stderr, "interplab: %s\n", e.what());
        return 2;
    } catch (const interplab::validation_error& e) {
        std::fprintf(stderr, "interplab: %s\n", e.what());
        return 2;
    } catch (const interplab::construction_error& e) {
        std::fprintf(stderr, "interplab: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "interplab: internal error: %s\n", e.what());
        return 1;
    }
    return 0;
}
