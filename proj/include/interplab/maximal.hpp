#pragma once
// Uncentered maximal averages over open balls, absolute and restricted to a
// subset, plus the measured weak (1,1) constant.

#include "interplab/calculus.hpp"
#include "interplab/space.hpp"

namespace interplab {

// Mf(x) = largest mean of |f| over any open ball containing x.  Computed per
// center from distance-sorted prefixes: every ball centered at c is a prefix
// of the points sorted by distance from c, so a suffix maximum over prefix
// means gives the exact sup over all centers and radii at once.
ScalarField maximal_function(const Space& sp, const ScalarField& f);

// Same operator with centers and averages restricted to the points listed in
// `members` (ascending indices): sup over balls centered in the subset of the
// mean of |f| over ball ∩ subset.  The result is indexed like `members`.
ScalarField relative_maximal(const Space& sp, const std::vector<int>& members,
                             const ScalarField& f);

// Measured weak (1,1) constant: sup of lambda * mu({Mf > lambda}) / ||f||_1,
// with lambda running just below each distinct value of Mf — the points where
// the super-level measure is about to drop, which realize the sup exactly.
double weak_type_ratio(const Space& sp, const ScalarField& f);

}  // namespace interplab
