#include "interplab/io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

namespace interplab {

using nlohmann::ordered_json;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw validation_error("cannot write file: " + path);
    out << content;
    if (!out) throw validation_error("write failed: " + path);
}

std::string digest_file(const std::string& path) {
    std::string bytes = read_text_file(path);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ordered_json meta_block(const Meta& meta) {
    ordered_json m;
    m["tool"] = "interplab";
    m["version"] = tool_version;
    ordered_json inputs = ordered_json::array();
    for (const auto& [path, digest] : meta.inputs)
        inputs.push_back(ordered_json{{"path", path}, {"digest", digest}});
    m["inputs"] = std::move(inputs);
    m["flags"] = meta.flags;
    return m;
}

// ---------------------------------------------------------------------------
// Space files.

namespace {

Space space_from_json(const ordered_json& j) {
    if (!j.is_object() || !j.contains("points") || !j.contains("dist"))
        throw validation_error("space file: missing points or dist");
    const auto& pts = j.at("points");
    if (!pts.is_array() || pts.empty()) throw validation_error("space file: empty point list");

    Space sp;
    const int n = static_cast<int>(pts.size());
    int coord_dim = -1;
    for (const auto& p : pts) {
        if (!p.is_object() || !p.contains("id") || !p.contains("weight"))
            throw validation_error("space file: point needs id and weight");
        std::string id = p.at("id").get<std::string>();
        if (sp.index_of(id) >= 0) throw validation_error("space file: duplicate id " + id);
        double w = p.at("weight").get<double>();
        if (!(w > 0.0)) throw validation_error("space file: nonpositive weight at " + id);
        sp.ids.push_back(std::move(id));
        sp.weights.push_back(w);
        if (p.contains("coords")) {
            std::vector<double> c = p.at("coords").get<std::vector<double>>();
            if (coord_dim < 0) coord_dim = static_cast<int>(c.size());
            if (static_cast<int>(c.size()) != coord_dim)
                throw validation_error("space file: inconsistent coordinate dimensions");
            sp.coords.push_back(std::move(c));
        } else if (coord_dim >= 0) {
            throw validation_error("space file: coords given for only some points");
        }
    }

    const auto& dist = j.at("dist");
    std::string type = dist.value("type", "");
    sp.dist.assign(static_cast<size_t>(n) * n, 0.0);
    if (type == "matrix") {
        const auto& vals = dist.at("values");
        if (!vals.is_array() || static_cast<int>(vals.size()) != n)
            throw validation_error("space file: distance matrix has wrong row count");
        for (int i = 0; i < n; ++i) {
            const auto& row = vals.at(i);
            if (!row.is_array() || static_cast<int>(row.size()) != n)
                throw validation_error("space file: distance matrix has wrong column count");
            for (int k = 0; k < n; ++k) sp.d_mut(i, k) = row.at(k).get<double>();
        }
        for (int i = 0; i < n; ++i) {
            if (sp.d(i, i) != 0.0) throw validation_error("space file: nonzero diagonal distance");
            for (int k = i + 1; k < n; ++k) {
                if (sp.d(i, k) != sp.d(k, i))
                    throw validation_error("space file: asymmetric distances");
                if (!(sp.d(i, k) > 0.0))
                    throw validation_error("space file: nonpositive distance between points");
            }
        }
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    if (sp.d(i, l) > sp.d(i, k) + sp.d(k, l) + 1e-12 * sp.d(i, l))
                        throw validation_error("space file: triangle inequality violation");
    } else if (type == "graph") {
        // shortest-path closure over positive edge lengths
        constexpr double kUnset = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                if (i != k) sp.d_mut(i, k) = kUnset;
        for (const auto& e : dist.at("edges")) {
            int a = sp.index_of(e.at("a").get<std::string>());
            int b = sp.index_of(e.at("b").get<std::string>());
            if (a < 0 || b < 0) throw validation_error("space file: edge references unknown id");
            if (a == b) throw validation_error("space file: self-loop edge");
            double len = e.at("len").get<double>();
            if (!(len > 0.0)) throw validation_error("space file: nonpositive edge length");
            if (len < sp.d(a, b)) {
                sp.d_mut(a, b) = len;
                sp.d_mut(b, a) = len;
            }
        }
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int l = 0; l < n; ++l)
                    if (sp.d(i, k) + sp.d(k, l) < sp.d(i, l))
                        sp.d_mut(i, l) = sp.d(i, k) + sp.d(k, l);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                if (std::isinf(sp.d(i, k)))
                    throw validation_error("space file: graph is disconnected");
    } else {
        throw validation_error("space file: dist.type must be matrix or graph");
    }

    if (j.contains("neighbor_radius"))
        sp.neighbor_radius = j.at("neighbor_radius").get<double>();
    else
        sp.neighbor_radius = connectivity_radius(sp);
    if (!(sp.neighbor_radius > 0.0))
        throw validation_error("space file: neighbor_radius must be positive");
    return sp;
}

}  // namespace

Space load_space(const std::string& path) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("space file: malformed JSON: ") + e.what());
    }
    try {
        return space_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("space file: malformed structure: ") + e.what());
    }
}

void save_space(const Space& sp, const std::string& path, const Meta& meta) {
    ordered_json j;
    j["schema"] = "interplab.space/1";
    j["meta"] = meta_block(meta);
    ordered_json pts = ordered_json::array();
    for (int i = 0; i < sp.n(); ++i) {
        ordered_json p;
        p["id"] = sp.ids[i];
        p["weight"] = sp.weights[i];
        if (sp.has_coords()) p["coords"] = sp.coords[i];
        pts.push_back(std::move(p));
    }
    j["points"] = std::move(pts);
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < sp.n(); ++i) {
        ordered_json row = ordered_json::array();
        for (int k = 0; k < sp.n(); ++k) row.push_back(sp.d(i, k));
        rows.push_back(std::move(row));
    }
    j["dist"] = ordered_json{{"type", "matrix"}, {"values", std::move(rows)}};
    j["neighbor_radius"] = sp.neighbor_radius;
    write_text_file(path, j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Field and step-function CSV.

ScalarField load_field(const Space& sp, const std::string& path) {
    std::string text = read_text_file(path);
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw validation_error("function file: empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "id,value") throw validation_error("function file: header must be id,value");
    ScalarField f(sp.n(), 0.0);
    std::vector<char> seen(sp.n(), 0);
    int count = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw validation_error("function file: row without comma: " + line);
        std::string id = line.substr(0, comma);
        int idx = sp.index_of(id);
        if (idx < 0) throw validation_error("function file: unknown id " + id);
        if (seen[idx]) throw validation_error("function file: duplicate id " + id);
        seen[idx] = 1;
        size_t pos = 0;
        std::string valtext = line.substr(comma + 1);
        try {
            f[idx] = std::stod(valtext, &pos);
        } catch (const std::exception&) {
            throw validation_error("function file: bad value for " + id);
        }
        if (pos != valtext.size()) throw validation_error("function file: bad value for " + id);
        ++count;
    }
    if (count != sp.n()) throw validation_error("function file: missing points");
    return f;
}

namespace {

void write_sidecar(const std::string& path, const Meta* meta, ordered_json extra = {}) {
    if (!meta && extra.is_null()) return;
    ordered_json j;
    j["schema"] = "interplab.sidecar/1";
    j["meta"] = meta_block(meta ? *meta : Meta{});
    if (!extra.is_null())
        for (auto& [k, v] : extra.items()) j[k] = v;
    write_text_file(path + ".meta.json", j.dump(2) + "\n");
}

}  // namespace

void save_field(const Space& sp, const ScalarField& f, const std::string& path, const Meta* meta) {
    if (static_cast<int>(f.size()) != sp.n())
        throw validation_error("save_field: field size mismatch");
    std::string out = "id,value\n";
    for (int i = 0; i < sp.n(); ++i) out += sp.ids[i] + "," + fmt_double(f[i]) + "\n";
    write_text_file(path, out);
    if (meta) write_sidecar(path, meta);
}

void save_step_function(const StepFunction& sf, const std::string& path, const Meta* meta) {
    std::string out = "t_break,value\n";
    for (size_t i = 0; i < sf.ends.size(); ++i)
        out += fmt_double(sf.ends[i]) + "," + fmt_double(sf.values[i]) + "\n";
    out += fmt_double(sf.total_mass) + ",0\n";
    write_text_file(path, out);
    if (meta) write_sidecar(path, meta);
}

// ---------------------------------------------------------------------------
// Families and decompositions.

ordered_json ball_family_json(const Space& sp, const BallFamily& fam) {
    ordered_json j;
    j["c1"] = fam.c1;
    j["c2"] = fam.c2;
    j["overlap"] = fam.overlap;
    j["radius_ratio_min"] = fam.radius_ratio_min;
    j["radius_ratio_max"] = fam.radius_ratio_max;
    j["covered_count"] = fam.covered.size();
    ordered_json balls = ordered_json::array();
    for (size_t i = 0; i < fam.balls.size(); ++i) {
        ordered_json b;
        b["center"] = sp.ids[fam.balls[i].center];
        b["radius"] = fam.balls[i].radius;
        b["core_radius"] = i < fam.core_balls.size() ? fam.core_balls[i].radius : 0.0;
        b["r"] = i < fam.r.size() ? fam.r[i] : 0.0;
        if (i < fam.dist_to_complement.size())
            b["dist_to_complement"] = fam.dist_to_complement[i];
        b["measure"] = fam.balls[i].measure;
        b["size"] = fam.balls[i].members.size();
        balls.push_back(std::move(b));
    }
    j["balls"] = std::move(balls);
    return j;
}

void save_ball_family(const Space& sp, const BallFamily& fam, const std::string& path,
                      const Meta& meta) {
    ordered_json j;
    j["schema"] = "interplab.balls/1";
    j["meta"] = meta_block(meta);
    j["family"] = ball_family_json(sp, fam);
    write_text_file(path, j.dump(2) + "\n");
}

ordered_json certificate_json(const Certificate& cert) {
    ordered_json arr = ordered_json::array();
    for (const CertClause& c : cert.clauses) {
        ordered_json e;
        e["name"] = c.name;
        e["constant"] = c.constant;
        e["pass"] = c.pass;
        if (!c.note.empty()) e["note"] = c.note;
        arr.push_back(std::move(e));
    }
    return arr;
}

namespace {

std::string field_csv(const Space& sp, const ScalarField& f) {
    std::string out = "id,value\n";
    for (int i = 0; i < sp.n(); ++i) out += sp.ids[i] + "," + fmt_double(f[i]) + "\n";
    return out;
}

}  // namespace

void save_decomposition(const Space& sp, const Decomposition& dec, const std::string& path,
                        const Meta& meta) {
    ordered_json j;
    j["schema"] = "interplab.czd/1";
    j["meta"] = meta_block(meta);
    switch (dec.variant) {
        case CzdVariant::global: j["variant"] = "global"; break;
        case CzdVariant::homogeneous: j["variant"] = "homogeneous"; break;
        case CzdVariant::local: j["variant"] = "local"; break;
    }
    j["q"] = dec.q;
    j["p"] = dec.p;
    j["alpha"] = dec.alpha;
    j["threshold"] = dec.threshold;
    if (dec.variant == CzdVariant::local) {
        j["rho"] = dec.rho;
        j["transfer_constant"] = dec.transfer_constant;
    }
    j["mu_omega"] = dec.mu_omega;
    j["omega_is_all"] = dec.omega_is_all;
    ordered_json omega = ordered_json::array();
    for (int x : dec.omega) omega.push_back(sp.ids[x]);
    j["omega"] = std::move(omega);
    j["family"] = ball_family_json(sp, dec.fam);
    j["g_csv"] = field_csv(sp, dec.g);
    ordered_json pieces = ordered_json::array();
    for (size_t i = 0; i < dec.pieces.size(); ++i) {
        ordered_json p;
        p["group"] = dec.piece_group[i];
        p["csv"] = field_csv(sp, dec.pieces[i]);
        pieces.push_back(std::move(p));
    }
    j["pieces"] = std::move(pieces);
    j["certificate"] = certificate_json(dec.cert);
    write_text_file(path, j.dump(2) + "\n");
}

void save_k_curve(const KCurve& kc, const std::string& path, const Meta* meta) {
    std::string out = "t,lower,oracle,upper,witness_mu_Omega\n";
    for (size_t i = 0; i < kc.t.size(); ++i)
        out += fmt_double(kc.t[i]) + "," + fmt_double(kc.lower[i]) + "," +
               fmt_double(kc.oracle[i]) + "," + fmt_double(kc.upper[i]) + "," +
               fmt_double(kc.mu_omega[i]) + "\n";
    write_text_file(path, out);
    ordered_json extra;
    extra["exponents"] = ordered_json{{"r", kc.r}, {"q", kc.q}, {"p", kc.p}};
    extra["constants"] = ordered_json{{"c_lower", kc.c_lower}, {"c_upper", kc.c_upper}};
    extra["oracle_certified"] = kc.oracle_certified;
    extra["bracket"] = kc.bracket;
    write_sidecar(path, meta, std::move(extra));
}

}  // namespace interplab
