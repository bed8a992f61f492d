#pragma once
// Revised simplex for the least-norm problems behind the K-functional
// oracle.  Problems arrive as  minimize c'x  subject to  Ax >= b  with x free;
// the engine runs the dual simplex method on the dual program
// (maximize b'y subject to A'y = c, y >= 0), whose basis has one column per
// primal variable while rows may number in the tens of thousands.
//
// The caller supplies a starting basis of rows that are tight at some primal
// feasible vertex (for the K problems, g = 0 with every epigraph variable at
// its bound).  Multipliers of such a basis satisfy every primal constraint,
// which is exactly dual-simplex readiness; the solver then walks basic values
// back to nonnegativity.  Changing the objective keeps the basis valid —
// reduced costs do not depend on c — so parameter sweeps re-solve from the
// previous basis at the cost of a few pivots.
//
// Basis rows carry only a handful of nonzeros, so the basis matrix is kept as
// a sparse LU factorization plus a short product-form update chain instead of
// a dense inverse; each pivot then costs two sparse solves rather than a pass
// over an n-by-n matrix.

#include <memory>
#include <vector>

#include "interplab/util.hpp"

namespace interplab {

struct SparseRow {
    std::vector<int> idx;     // variable indices, strictly increasing
    std::vector<double> val;  // matching coefficients
    double rhs = 0.0;         // row states  sum val*x >= rhs
};

struct LinearProgram {
    int nvars = 0;
    std::vector<SparseRow> rows;
};

struct LpSolution {
    std::vector<double> x;       // primal point recovered from the multipliers
    double value = 0.0;          // c'x
    double max_violation = 0.0;  // worst amount by which x misses a constraint
    double min_basic = 0.0;      // most negative dual basic value at exit
    double residual = 0.0;       // drift of the maintained factorization
    int iterations = 0;
    bool certified = false;      // all three diagnostics within tolerance
};

class DualSimplex {
  public:
    // basis: row indices forming an invertible square system whose tight
    // point satisfies every row of the program.
    DualSimplex(const LinearProgram& lp, std::vector<int> basis);
    ~DualSimplex();
    DualSimplex(DualSimplex&&) noexcept;
    DualSimplex& operator=(DualSimplex&&) noexcept;

    // Solve min c'x over the constraint rows; repeat calls warm-start from
    // the final basis of the previous call.
    LpSolution solve(const std::vector<double>& objective);

    // Stop a solve (uncertified) after this many pivots; 0 means no limit.
    // Lets sweep callers abandon a bad warm start and re-solve cold.
    void set_pivot_budget(long pivots) { pivot_budget_ = pivots; }

    int rows() const { return m_; }
    int vars() const { return nv_; }

  private:
    struct Factor;                    // sparse LU of the basis matrix

    void factorize();                 // refactorize; clears the update chain
    void refresh_basics();            // y = B^-1 c
    void compute_multipliers();       // pi = B^-T b_basis
    double price_all();               // reduced costs from pi; returns worst
    int pivot_once(bool bland);       // one dual simplex step; <0 on exit codes
    void ftran(double* x);            // x <- B^-1 x
    void btran(double* x);            // x <- B^-T x

    int nv_ = 0, m_ = 0;
    std::vector<int> off_;            // CSR over rows
    std::vector<int> cidx_;
    std::vector<double> cval_;
    std::vector<double> rhs_;

    std::vector<int> basis_;          // row index per basis slot
    std::vector<int> slot_of_;        // inverse map, -1 when nonbasic
    std::unique_ptr<Factor> fac_;     // LU of the current refactorization point
    std::vector<int> eta_slot_;       // product-form updates since then
    std::vector<double> eta_v_;       // their column vectors, nv_ each
    std::vector<double> y_;           // dual basic values
    std::vector<double> pi_;          // primal point
    std::vector<double> red_;         // reduced cost per row (0 on basis)
    std::vector<double> c_;           // current objective
    std::vector<double> alpha_;       // scratch: pivot row in column space
    std::vector<double> colx_;        // scratch: B^-T e_l
    std::vector<double> w_;           // scratch: B^-1 * entering column
    double scale_ = 1.0;
    double last_theta_ = 0.0;         // step length of the most recent pivot
    int etas_ = 0;                    // updates since last factorization
    long total_iters_ = 0;
    long pivot_budget_ = 0;
};

}  // namespace interplab
