#pragma once
// Artifact serialization.  Spaces travel as JSON (dense matrix or graph with
// shortest-path closure), fields and step functions as CSV, families and
// decompositions as JSON.  Every writer embeds — or, for CSV, places in a
// .meta.json sidecar — the tool version, digests of the inputs, and the flag
// set of the producing command, so artifacts are self-describing and runs
// reproduce bit-identically.

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "interplab/cover.hpp"
#include "interplab/czd.hpp"
#include "interplab/kfun.hpp"
#include "interplab/rearrange.hpp"
#include "interplab/space.hpp"

namespace interplab {

struct Meta {
    std::vector<std::pair<std::string, std::string>> inputs;  // (path, digest)
    std::vector<std::string> flags;                           // argv of the producing command
};

// 64-bit FNV-1a of the file bytes, as fixed-width hex.
std::string digest_file(const std::string& path);

nlohmann::ordered_json meta_block(const Meta& meta);

Space load_space(const std::string& path);
void save_space(const Space& sp, const std::string& path, const Meta& meta = {});

ScalarField load_field(const Space& sp, const std::string& path);
void save_field(const Space& sp, const ScalarField& f, const std::string& path,
                const Meta* meta = nullptr);

void save_step_function(const StepFunction& sf, const std::string& path,
                        const Meta* meta = nullptr);

nlohmann::ordered_json ball_family_json(const Space& sp, const BallFamily& fam);
void save_ball_family(const Space& sp, const BallFamily& fam, const std::string& path,
                      const Meta& meta = {});

nlohmann::ordered_json certificate_json(const Certificate& cert);
void save_decomposition(const Space& sp, const Decomposition& dec, const std::string& path,
                        const Meta& meta = {});

// CSV `t,lower,oracle,upper,witness_mu_Omega` plus a sidecar with the
// measured constants and the bracket column.
void save_k_curve(const KCurve& kc, const std::string& path, const Meta* meta = nullptr);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace interplab
