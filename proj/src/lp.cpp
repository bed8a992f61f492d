#include "interplab/lp.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>

namespace interplab {

namespace {
constexpr double kFeasRel = 1e-9;    // tolerated negativity in basic values
constexpr double kCertRel = 1e-7;    // certification thresholds
constexpr double kPerturb = 1e-9;    // relative size of one anti-degeneracy shift
constexpr double kShiftCap = 5e-8;   // cumulative relative shift cap per row
constexpr double kDegenRel = 1e-14;  // steps below this (times scale) count as ties
constexpr int kRefreshEvery = 100;   // refactorize and recompute y = B^-1 c
constexpr int kRepriceEvery = 500;   // recompute multipliers and reduced costs
constexpr int kStallLimit = 50;      // consecutive tie pivots before perturbing
constexpr long kHardCap = 400000;

// deterministic per-row mixing for the perturbation magnitudes; a fixed
// direction keeps the induced tie-break ordering stable across rounds
double row_unit(int j) {
    uint64_t z = static_cast<uint64_t>(j) + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return 1.0 + static_cast<double>(z >> 11) * 0x1p-53;
}
}  // namespace

// The basis matrix B has one column per basis slot holding that constraint
// row's coefficients, at most a few nonzeros each, so an LU factorization of
// B stays sparse.  Pivots append product-form updates (column l of B becomes
// the entering row's coefficients) instead of refactorizing; ftran/btran run
// the factorization plus the update chain, and the chain is folded back into
// a fresh factorization every kRefreshEvery pivots.
struct DualSimplex::Factor {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    Eigen::VectorXd in, out;  // solve scratch
};

DualSimplex::DualSimplex(const LinearProgram& lp, std::vector<int> basis)
    : nv_(lp.nvars), m_(static_cast<int>(lp.rows.size())), basis_(std::move(basis)) {
    if (static_cast<int>(basis_.size()) != nv_)
        throw construction_error("simplex: basis size must equal the variable count");
    off_.reserve(m_ + 1);
    off_.push_back(0);
    for (const SparseRow& row : lp.rows) {
        if (row.idx.size() != row.val.size())
            throw construction_error("simplex: malformed sparse row");
        for (size_t k = 0; k < row.idx.size(); ++k) {
            if (row.idx[k] < 0 || row.idx[k] >= nv_)
                throw construction_error("simplex: row index out of range");
            cidx_.push_back(row.idx[k]);
            cval_.push_back(row.val[k]);
        }
        off_.push_back(static_cast<int>(cidx_.size()));
        rhs_.push_back(row.rhs);
    }
    scale_ = 1.0;
    for (double v : rhs_) scale_ = std::max(scale_, std::abs(v));
    for (double v : cval_) scale_ = std::max(scale_, std::abs(v));
    slot_of_.assign(m_, -1);
    for (int s = 0; s < nv_; ++s) {
        int r = basis_[s];
        if (r < 0 || r >= m_ || slot_of_[r] != -1)
            throw construction_error("simplex: invalid or repeated basis row");
        slot_of_[r] = s;
    }
    y_.assign(nv_, 0.0);
    pi_.assign(nv_, 0.0);
    red_.assign(m_, 0.0);
    alpha_.assign(m_, 0.0);
    colx_.assign(nv_, 0.0);
    w_.assign(nv_, 0.0);
    c_.assign(nv_, 0.0);
    eta_v_.reserve(static_cast<size_t>(kRefreshEvery) * nv_);
    eta_slot_.reserve(kRefreshEvery);
    factorize();
    compute_multipliers();
    double worst = price_all();
    if (worst > kCertRel * scale_)
        throw construction_error("simplex: starting basis is not tight at a feasible point");
}

DualSimplex::~DualSimplex() = default;
DualSimplex::DualSimplex(DualSimplex&&) noexcept = default;
DualSimplex& DualSimplex::operator=(DualSimplex&&) noexcept = default;

void DualSimplex::factorize() {
    if (!fac_) fac_ = std::make_unique<Factor>();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(cidx_.size());
    for (int s = 0; s < nv_; ++s) {
        int j = basis_[s];
        for (int k = off_[j]; k < off_[j + 1]; ++k)
            trips.emplace_back(cidx_[k], s, cval_[k]);
    }
    Eigen::SparseMatrix<double> bmat(nv_, nv_);
    bmat.setFromTriplets(trips.begin(), trips.end());
    fac_->lu.compute(bmat);
    eta_slot_.clear();
    eta_v_.clear();
    etas_ = 0;
    if (fac_->lu.info() != Eigen::Success)
        throw construction_error("simplex: basis rows are numerically dependent");
    // probe the factorization once; a near-singular basis shows up as a large
    // residual even when the decomposition formally succeeds
    std::vector<double> probe(nv_), sol(nv_);
    for (int i = 0; i < nv_; ++i)
        probe[i] = sol[i] = 1.0 + static_cast<double>(i) / std::max(1, nv_ - 1);
    ftran(sol.data());
    std::vector<double> back(nv_, 0.0);
    for (int s = 0; s < nv_; ++s) {
        int j = basis_[s];
        for (int k = off_[j]; k < off_[j + 1]; ++k) back[cidx_[k]] += cval_[k] * sol[s];
    }
    double err = 0.0;
    for (int i = 0; i < nv_; ++i) err = std::max(err, std::abs(back[i] - probe[i]));
    if (!(err < 1e-6 * 2.0))
        throw construction_error("simplex: basis rows are numerically dependent");
}

void DualSimplex::ftran(double* x) {
    Factor& f = *fac_;
    Eigen::Map<Eigen::VectorXd> xm(x, nv_);
    f.in = xm;
    f.out = f.lu.solve(f.in);
    xm = f.out;
    for (int e = 0; e < etas_; ++e) {
        const double* v = &eta_v_[static_cast<size_t>(e) * nv_];
        int l = eta_slot_[e];
        double t = x[l] / v[l];
        if (t != 0.0)
            for (int i = 0; i < nv_; ++i) x[i] -= t * v[i];
        x[l] = t;
    }
}

void DualSimplex::btran(double* x) {
    for (int e = etas_ - 1; e >= 0; --e) {
        const double* v = &eta_v_[static_cast<size_t>(e) * nv_];
        int l = eta_slot_[e];
        double d = 0.0;
        for (int i = 0; i < nv_; ++i) d += v[i] * x[i];
        x[l] = (x[l] - d + v[l] * x[l]) / v[l];
    }
    Factor& f = *fac_;
    Eigen::Map<Eigen::VectorXd> xm(x, nv_);
    f.in = xm;
    f.out = f.lu.transpose().solve(f.in);
    xm = f.out;
}

void DualSimplex::refresh_basics() {
    std::copy(c_.begin(), c_.end(), y_.begin());
    ftran(y_.data());
}

void DualSimplex::compute_multipliers() {
    for (int s = 0; s < nv_; ++s) pi_[s] = rhs_[basis_[s]];
    btran(pi_.data());
}

double DualSimplex::price_all() {
    double worst = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < m_; ++j) {
        if (slot_of_[j] >= 0) {
            red_[j] = 0.0;
            continue;
        }
        double dot = 0.0;
        for (int k = off_[j]; k < off_[j + 1]; ++k) dot += cval_[k] * pi_[cidx_[k]];
        red_[j] = rhs_[j] - dot;
        worst = std::max(worst, red_[j]);
    }
    return worst;
}

// One dual simplex step.  Returns 0 after a pivot, 1 when every basic value
// is already nonnegative, -1 when no entering column exists (the primal
// program is infeasible), -2 when the chosen pivot is numerically unusable.
int DualSimplex::pivot_once(bool bland) {
    const double feas_tol = kFeasRel * scale_;
    int l = -1;
    if (!bland) {
        double most = -feas_tol;
        for (int s = 0; s < nv_; ++s)
            if (y_[s] < most) {
                most = y_[s];
                l = s;
            }
    } else {
        int best_row = INT_MAX;
        for (int s = 0; s < nv_; ++s)
            if (y_[s] < -feas_tol && basis_[s] < best_row) {
                best_row = basis_[s];
                l = s;
            }
    }
    if (l < 0) return 1;

    std::fill(colx_.begin(), colx_.end(), 0.0);
    colx_[l] = 1.0;
    btran(colx_.data());  // row l of B^-1
    double amax = 0.0;
    for (int j = 0; j < m_; ++j) {
        if (slot_of_[j] >= 0) {
            alpha_[j] = 0.0;
            continue;
        }
        double a = 0.0;
        for (int k = off_[j]; k < off_[j + 1]; ++k) a += cval_[k] * colx_[cidx_[k]];
        alpha_[j] = a;
        amax = std::max(amax, std::abs(a));
    }
    const double eligible = -1e-10 * std::max(1.0, amax);
    double theta = std::numeric_limits<double>::infinity();
    int enter = -1;
    double enter_alpha = 0.0;
    if (!bland) {
        for (int j = 0; j < m_; ++j) {
            if (slot_of_[j] >= 0 || alpha_[j] >= eligible) continue;
            double ratio = red_[j] / alpha_[j];
            if (ratio < theta - 1e-12 * (1.0 + std::abs(theta)) ||
                (ratio <= theta + 1e-12 * (1.0 + std::abs(theta)) &&
                 std::abs(alpha_[j]) > std::abs(enter_alpha))) {
                theta = ratio;
                enter = j;
                enter_alpha = alpha_[j];
            }
        }
    } else {
        for (int j = 0; j < m_; ++j) {
            if (slot_of_[j] >= 0 || alpha_[j] >= eligible) continue;
            theta = std::min(theta, red_[j] / alpha_[j]);
        }
        for (int j = 0; j < m_ && enter < 0; ++j) {
            if (slot_of_[j] >= 0 || alpha_[j] >= eligible) continue;
            if (red_[j] / alpha_[j] <= theta + 1e-12 * (1.0 + std::abs(theta))) {
                enter = j;
                enter_alpha = alpha_[j];
            }
        }
    }
    if (enter < 0) return -1;

    std::fill(w_.begin(), w_.end(), 0.0);
    for (int k = off_[enter]; k < off_[enter + 1]; ++k) w_[cidx_[k]] = cval_[k];
    ftran(w_.data());  // B^-1 * entering column
    double piv = w_[l];
    if (std::abs(piv) < 1e-12 * std::max(1.0, amax)) return -2;

    double th = red_[enter] / piv;
    last_theta_ = th;
    for (int j = 0; j < m_; ++j)
        if (slot_of_[j] < 0 && alpha_[j] != 0.0) red_[j] -= th * alpha_[j];
    red_[basis_[l]] = -th;  // the leaving column prices out with alpha exactly 1
    red_[enter] = 0.0;
    slot_of_[basis_[l]] = -1;
    slot_of_[enter] = l;
    basis_[l] = enter;

    // y <- E^-1 y for the new update column, i.e. the same rank-1 correction
    // the dense inverse would have applied
    double t = y_[l] / piv;
    if (t != 0.0)
        for (int i = 0; i < nv_; ++i) y_[i] -= t * w_[i];
    y_[l] = t;
    eta_slot_.push_back(l);
    eta_v_.insert(eta_v_.end(), w_.begin(), w_.end());
    ++etas_;
    return 0;
}

LpSolution DualSimplex::solve(const std::vector<double>& objective) {
    if (static_cast<int>(objective.size()) != nv_)
        throw construction_error("simplex: objective size mismatch");
    c_ = objective;
    for (double v : c_) scale_ = std::max(scale_, std::abs(v));
    refresh_basics();

    long iters = 0;
    int degen = 0, attempts = 0, bad_pivots = 0, rounds = 0, missing_dir = 0;
    bool bland = false;
    // Anti-degeneracy device: a pivot with positive step length strictly
    // lowers the objective, so the solver can only spin on chains of tie
    // (zero-step) pivots.  When such a chain persists, shift the right-hand
    // sides of the currently nonbasic rows down by tiny deterministic amounts:
    // the current vertex stays feasible and untouched (only inactive rows
    // move) and the ties become strict.  The direction is fixed, so repeated
    // rounds deepen one consistent tie-break ordering instead of reshuffling
    // it, and the cumulative shift per row is capped so the final basis still
    // certifies against the exact data.  Once every reachable row sits at its
    // cap the shifted program no longer changes, monotone pivoting must
    // terminate, and Bland's rule bridges any residual tie chain.  The exact
    // right-hand sides are restored before the certification pass below.
    std::vector<double> rhs_exact;
    std::vector<double> shift_acc;
    auto perturb_nonbasic = [&]() -> bool {
        if (rhs_exact.empty()) {
            rhs_exact = rhs_;
            shift_acc.assign(m_, 0.0);
        }
        bool moved = false;
        for (int j = 0; j < m_; ++j) {
            if (slot_of_[j] >= 0) continue;
            double unit = 1.0 + std::abs(rhs_exact[j]);
            double room = kShiftCap * unit - shift_acc[j];
            if (room <= 0.0) continue;
            double eps = std::min(kPerturb * unit * row_unit(j), room);
            shift_acc[j] += eps;
            rhs_[j] -= eps;
            red_[j] -= eps;  // x is untouched, so the slack shifts by the same amount
            moved = true;
        }
        ++rounds;
        return moved;
    };
    long real_steps = 0;
    while (true) {
        int code = pivot_once(bland);
        if (code == 0) {
            ++iters;
            ++total_iters_;
            bad_pivots = 0;
            if (etas_ >= kRefreshEvery) {
                factorize();
                refresh_basics();
            } else if (iters % kRefreshEvery == 0) {
                refresh_basics();
            }
            if (iters % kRepriceEvery == 0) {
                compute_multipliers();
                price_all();
            }
            if (iters % 20000 == 0)
                log_msg(log_level::debug,
                        "simplex: %ld pivots so far (%ld real), %d shift rounds, bland=%d", iters,
                        real_steps, rounds, bland ? 1 : 0);
            if (last_theta_ > kDegenRel * scale_) {
                ++real_steps;
                degen = 0;
                bland = false;  // a real step ended the tie chain
            } else if (++degen > kStallLimit) {
                if (!perturb_nonbasic()) {
                    if (!bland)
                        log_msg(log_level::debug,
                                "simplex: ties persist at the shift cap, Bland fallback (round %d)",
                                rounds);
                    bland = true;
                }
                degen = 0;
            }
            if (iters > kHardCap) {
                log_msg(log_level::info, "simplex: iteration cap reached");
                break;
            }
            if (pivot_budget_ > 0 && iters >= pivot_budget_) {
                log_msg(log_level::debug, "simplex: pivot budget reached, stopping");
                break;
            }
            continue;
        }
        if (code == -2) {
            // unusable pivot: rebuild the factorization, then vary the pivot
            // choice; give up (uncertified) if the state never improves
            if (++bad_pivots > 4) {
                log_msg(log_level::info, "simplex: repeated degenerate pivots, stopping");
                break;
            }
            if (bad_pivots == 1) factorize();
            bland = bad_pivots >= 2;
            refresh_basics();
            compute_multipliers();
            price_all();
            continue;
        }
        if (code == -1) {
            // Every program this solver is handed has a nonempty feasible set
            // and a bounded objective, so a missing direction is numerical:
            // repair the factorization, break remaining ties, and retry; stop
            // uncertified if it persists rather than aborting the caller.
            if (++missing_dir > 2) {
                log_msg(log_level::info, "simplex: no usable direction, stopping");
                break;
            }
            factorize();
            refresh_basics();
            compute_multipliers();
            price_all();
            perturb_nonbasic();
            continue;
        }
        // tentative optimum: recompute the basics exactly and either accept
        // or resume after repairing drift
        refresh_basics();
        double ymin = 0.0;
        for (double v : y_) ymin = std::min(ymin, v);
        if (ymin < -10.0 * kFeasRel * scale_ && attempts < 4) {
            ++attempts;
            if (attempts >= 2) {
                factorize();
                refresh_basics();
            }
            compute_multipliers();
            price_all();
            continue;
        }
        break;
    }

    // certify against the exact data, not the perturbed copy
    if (!rhs_exact.empty()) rhs_ = std::move(rhs_exact);
    compute_multipliers();
    double worst = price_all();
    refresh_basics();
    LpSolution sol;
    sol.x = pi_;
    for (int i = 0; i < nv_; ++i) sol.value += c_[i] * pi_[i];
    sol.max_violation = std::max(0.0, worst);
    sol.min_basic = 0.0;
    for (double v : y_) sol.min_basic = std::min(sol.min_basic, v);
    // residual of the maintained factorization: A_B y - c
    {
        std::vector<double> acc(c_);
        for (double& v : acc) v = -v;
        for (int s = 0; s < nv_; ++s) {
            int j = basis_[s];
            for (int k = off_[j]; k < off_[j + 1]; ++k) acc[cidx_[k]] += cval_[k] * y_[s];
        }
        for (double v : acc) sol.residual = std::max(sol.residual, std::abs(v));
    }
    sol.iterations = static_cast<int>(iters);
    double tol = kCertRel * scale_;
    sol.certified =
        sol.max_violation <= tol && sol.min_basic >= -tol && sol.residual <= tol;
    if (!sol.certified)
        log_msg(log_level::debug, "simplex: uncertified solve (viol %.3g basic %.3g resid %.3g)",
                sol.max_violation, sol.min_basic, sol.residual);
    if (rounds > 0)
        log_msg(log_level::debug, "simplex: solve took %ld pivots, %d shift rounds%s", iters,
                rounds, bland ? ", ended under Bland's rule" : "");
    return sol;
}

}  // namespace interplab
