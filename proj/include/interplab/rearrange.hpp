#pragma once
// Decreasing rearrangements as exact step functions, the running average
// f**(t) = (1/t) * integral of f* over [0,t], and the L_p(0,t) primitives
// used by the K-functional brackets.  Everything here is closed-form.

#include <vector>

#include "interplab/calculus.hpp"
#include "interplab/space.hpp"

namespace interplab {

// Right-continuous non-increasing step function on [0, infinity):
// value values[i] on [ends[i-1], ends[i]) with ends[-1] := 0, and 0 beyond
// ends.back().  total_mass records mu(X) for serialization and plotting.
struct StepFunction {
    std::vector<double> ends;    // strictly increasing, positive
    std::vector<double> values;  // strictly decreasing, positive (ties merged)
    double total_mass = 0.0;

    double value_at(double t) const;            // f*(t), 0 for t >= ends.back()
    double integral(double T) const;            // exact integral of f* over [0, min(T, support)]
    double power_integral(double p, double T) const;  // same for (f*)^p
    double lp_norm(double p) const;             // ||f*||_{L_p(0,inf)}
    double sup() const { return values.empty() ? 0.0 : values.front(); }
    double support_end() const { return ends.empty() ? 0.0 : ends.back(); }

    double double_star(double t) const;         // f**(t), t > 0
    // ||f**||_{L_l(0,inf)} for l > 1, piecewise exact: on each step f** is
    // c + d/t, integrated in closed form for integer and half-integer l and
    // by high-order panel quadrature for other exponents.
    double double_star_lp_norm(double l) const;
};

StepFunction decreasing_rearrangement(const Space& sp, const ScalarField& f);

// Exact K(f, t, L_p, L_inf) formula value: (integral of (f*)^p over [0, t^p])^{1/p}.
// For p = 1 this IS the K-functional; for p > 1 it is a two-sided equivalent.
double k_lp_linf(const Space& sp, const ScalarField& f, double t, double p);

}  // namespace interplab
