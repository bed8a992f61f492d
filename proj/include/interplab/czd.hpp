#pragma once
// Calderón–Zygmund style decompositions f = g + sum b_i over a finite space:
// the bad set is a strict super-level set of a maximal function, a Whitney
// family covers it, and each piece subtracts a ball mean under a partition
// weight.  Three variants: full norms, gradient-only thresholds, and a
// localized version that decomposes within a net of fixed-radius balls and
// never fails.  Every construction returns a certificate of measured
// constants, and an independent verifier recomputes the certificate from the
// stored artifact.

#include <string>
#include <vector>

#include "interplab/calculus.hpp"
#include "interplab/cover.hpp"
#include "interplab/space.hpp"

namespace interplab {

enum class CzdVariant { global, homogeneous, local };

struct CertClause {
    std::string name;
    double constant = 0.0;  // the measured value
    bool pass = true;
    std::string note;
};

struct Certificate {
    std::vector<CertClause> clauses;

    bool all_pass() const {
        for (const CertClause& c : clauses)
            if (!c.pass) return false;
        return true;
    }
    const CertClause* find(const std::string& name) const {
        for (const CertClause& c : clauses)
            if (c.name == name) return &c;
        return nullptr;
    }
};

struct Decomposition {
    CzdVariant variant = CzdVariant::global;
    double q = 1.0, p = 1.0, alpha = 0.0;
    double threshold = 0.0;  // level actually used for the bad set (alpha^q by default)
    double rho = 0.0;        // net radius, local variant only

    std::vector<int> omega;  // the bad set, ascending indices
    double mu_omega = 0.0;
    bool omega_is_all = false;  // local direct branch: everything goes to the L_r side

    BallFamily fam;                    // aggregated over cover elements for local
    std::vector<ScalarField> pieces;   // b_i, full-length fields, zero off their balls
    std::vector<int> piece_group;      // cover element each piece came from; -1 otherwise
    ScalarField g;

    Certificate cert;

    // local-variant bookkeeping kept for verification
    UnitCover unit_cover;
    double transfer_constant = 1.0;  // measured factor relating restricted and full maximal
};

// Bad set from M((|f| + |grad f|)^q); fails over to the local variant when it
// is the whole space.  threshold_override, when given, replaces alpha^q in
// the super-level comparison so callers can pass an exact rearrangement value
// without a power round trip.
Decomposition czd_global(const Space& sp, const ScalarField& f, double q, double p, double alpha,
                         const double* threshold_override = nullptr);

// Bad set from M(|grad f|^q) alone; certificate tracks only gradient bounds.
Decomposition czd_homogeneous(const Space& sp, const ScalarField& f, double q, double p,
                              double alpha, const double* threshold_override = nullptr);

// Decomposes f within each ball of a rho/2-net via the restricted maximal
// operator, then aggregates.  Total: the whole-space bad set becomes a marker
// decomposition with everything in the pieces.
Decomposition czd_local(const Space& sp, const ScalarField& f, double q, double p, double alpha,
                        double rho, const double* threshold_override = nullptr);

// Recomputes every certificate clause from the stored artifact and f alone,
// including re-deriving the bad set and rechecking membership.
Certificate verify_decomposition(const Space& sp, const Decomposition& dec, const ScalarField& f);

}  // namespace interplab
