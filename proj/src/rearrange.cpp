#include "interplab/rearrange.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace interplab {

namespace {

// log((sqrt(u)-sqrt(c))/(sqrt(u)+sqrt(c))) written to avoid cancellation when
// u is close to c: sqrt(u)-sqrt(c) = (u-c)/(sqrt(u)+sqrt(c)).
double log_ratio_sqrt(double u, double c) {
    double s = std::sqrt(u) + std::sqrt(c);
    return std::log(u - c) - 2.0 * std::log(s);
}

// Antiderivative of (c + d/t)^l at t, valid for t > 0, c >= 0, d > 0, with
// l = m + 1/2 a positive half-integer.  Derived by substituting u = c + d/t
// and expanding u^m around (u - c); the j=0 and j=1 pieces produce the
// sqrt-log terms, everything else is a polynomial in sqrt(u).
double half_integer_antiderivative(double t, double c, double d, int m) {
    double u = c + d / t;
    // J_j = integral of sqrt(u) * (u-c)^(j-2) du
    // antiderivative in u, then multiplied by -d (from dt = -d/(u-c)^2 du)
    double total = 0.0;
    auto binom = [](int n, int k) {
        double r = 1.0;
        for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
        return r;
    };
    double L = c > 0.0 ? log_ratio_sqrt(u, c) : 0.0;
    for (int j = 0; j <= m; ++j) {
        double coef = binom(m, j) * std::pow(c, m - j);
        double term;
        if (j == 0) {
            // integral sqrt(u) (u-c)^-2 du = -sqrt(u)/(u-c) + L/(2 sqrt(c));
            // at c == 0 it degenerates to integral u^{-3/2} du = -2/sqrt(u)
            term = c > 0.0 ? -std::sqrt(u) / (u - c) + L / (2.0 * std::sqrt(c))
                           : -2.0 / std::sqrt(u);
        } else if (j == 1) {
            // integral sqrt(u)/(u-c) du = 2 sqrt(u) + sqrt(c) L
            term = c > 0.0 ? 2.0 * std::sqrt(u) + std::sqrt(c) * L : 2.0 * std::sqrt(u);
        } else {
            // integral sqrt(u) (u-c)^{j-2} du, expand (u-c)^{j-2}
            term = 0.0;
            for (int i = 0; i <= j - 2; ++i) {
                double e = i + 1.5;
                term += binom(j - 2, i) * std::pow(-c, j - 2 - i) * std::pow(u, e) / e;
            }
        }
        total += coef * term;
    }
    return -d * total;
}

// 20-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr int GL_N = 20;
const double GL_X[GL_N] = {
    -0.9931285991850949, -0.9639719272779138, -0.9122344282513259, -0.8391169718222188,
    -0.7463319064601508, -0.6360536807265150, -0.5108670019508271, -0.3737060887154195,
    -0.2277858511416451, -0.0765265211334973, 0.0765265211334973,  0.2277858511416451,
    0.3737060887154195,  0.5108670019508271,  0.6360536807265150,  0.7463319064601508,
    0.8391169718222188,  0.9122344282513259,  0.9639719272779138,  0.9931285991850949};
const double GL_W[GL_N] = {
    0.0176140071391521, 0.0406014298003869, 0.0626720483341091, 0.0832767415767048,
    0.1019301198172404, 0.1181945319615184, 0.1316886384491766, 0.1420961093183820,
    0.1491729864726037, 0.1527533871307258, 0.1527533871307258, 0.1491729864726037,
    0.1420961093183820, 0.1316886384491766, 0.1181945319615184, 0.1019301198172404,
    0.0832767415767048, 0.0626720483341091, 0.0406014298003869, 0.0176140071391521};

double gl_panel(double a, double b, double c, double d, double l) {
    double mid = (a + b) / 2.0, half = (b - a) / 2.0, s = 0.0;
    for (int i = 0; i < GL_N; ++i) {
        double t = mid + half * GL_X[i];
        s += GL_W[i] * std::pow(c + d / t, l);
    }
    return s * half;
}

// integral over [a, b] of (c + d/t)^l with 0 < a <= b, c,d >= 0, l > 1
double piece_power_integral(double a, double b, double c, double d, double l) {
    if (b <= a) return 0.0;
    double scale = c + d / a;  // the largest value on the piece
    if (scale <= 0.0) return 0.0;
    if (d <= scale * 1e-15 * a) return std::pow(c, l) * (b - a);  // constant piece
    if (c <= scale * 1e-15) {
        // pure d/t piece
        return std::pow(d, l) * (std::pow(b, 1.0 - l) - std::pow(a, 1.0 - l)) / (1.0 - l);
    }
    double li;
    if (std::abs(l - std::round(l)) < 1e-12 && l < 60.0) {
        // integer exponent: binomial expansion, antiderivative termwise
        int n = static_cast<int>(std::round(l));
        auto F = [&](double t) {
            double tot = 0.0, cf = 1.0;
            for (int j = 0; j <= n; ++j) {
                if (j > 0) cf = cf * (n - j + 1) / j;
                double cc = cf * std::pow(c, n - j) * std::pow(d, j);
                if (j == 0)
                    tot += cc * t;
                else if (j == 1)
                    tot += cc * std::log(t);
                else
                    tot += cc * std::pow(t, 1.0 - j) / (1.0 - j);
            }
            return tot;
        };
        li = F(b) - F(a);
    } else if (std::abs(l - std::round(l - 0.5) - 0.5) < 1e-12 && l < 60.0) {
        int m = static_cast<int>(std::round(l - 0.5));
        li = half_integer_antiderivative(b, c, d, m) - half_integer_antiderivative(a, c, d, m);
    } else {
        // general exponent: panel quadrature with geometric subdivision so the
        // integrand is analytic and well-resolved on every panel
        li = 0.0;
        double lo = a;
        while (lo < b) {
            double hi = std::min(b, lo * 1.5);
            li += gl_panel(lo, hi, c, d, l);
            lo = hi;
        }
    }
    return li;
}

}  // namespace

double StepFunction::value_at(double t) const {
    if (t < 0.0) throw validation_error("StepFunction: negative argument");
    // first step whose right end exceeds t
    size_t i = std::upper_bound(ends.begin(), ends.end(), t) - ends.begin();
    return i < values.size() ? values[i] : 0.0;
}

double StepFunction::integral(double T) const {
    double s = 0.0, prev = 0.0;
    for (size_t i = 0; i < ends.size(); ++i) {
        if (T <= prev) break;
        s += values[i] * (std::min(T, ends[i]) - prev);
        prev = ends[i];
    }
    return s;
}

double StepFunction::power_integral(double p, double T) const {
    double s = 0.0, prev = 0.0;
    for (size_t i = 0; i < ends.size(); ++i) {
        if (T <= prev) break;
        s += std::pow(values[i], p) * (std::min(T, ends[i]) - prev);
        prev = ends[i];
    }
    return s;
}

double StepFunction::lp_norm(double p) const {
    if (!(p >= 1.0)) throw validation_error("StepFunction::lp_norm: p must be >= 1");
    return std::pow(power_integral(p, support_end() + 1.0), 1.0 / p);
}

double StepFunction::double_star(double t) const {
    if (!(t > 0.0)) throw validation_error("StepFunction::double_star: t must be positive");
    return integral(t) / t;
}

double StepFunction::double_star_lp_norm(double l) const {
    if (!(l > 1.0)) throw validation_error("StepFunction::double_star_lp_norm: need l > 1");
    if (values.empty()) return 0.0;
    double total = 0.0, prev = 0.0, area = 0.0;  // area = integral of f* over [0, prev]
    for (size_t i = 0; i < ends.size(); ++i) {
        // on [prev, ends[i]): f**(t) = v + (area - v*prev)/t
        double c = values[i];
        double d = area - c * prev;
        if (prev == 0.0)
            total += std::pow(c, l) * ends[i];  // d == 0 exactly on the first step
        else
            total += piece_power_integral(prev, ends[i], c, d, l);
        area += c * (ends[i] - prev);
        prev = ends[i];
    }
    // tail: f**(t) = area / t for t >= support end; converges since l > 1
    total += std::pow(area, l) * std::pow(prev, 1.0 - l) / (l - 1.0);
    return std::pow(total, 1.0 / l);
}

StepFunction decreasing_rearrangement(const Space& sp, const ScalarField& f) {
    if (static_cast<int>(f.size()) != sp.n())
        throw validation_error("decreasing_rearrangement: field size mismatch");
    std::vector<std::pair<double, double>> av(sp.n());  // (|f|, weight)
    for (int i = 0; i < sp.n(); ++i) av[i] = {std::abs(f[i]), sp.weights[i]};
    std::sort(av.begin(), av.end(), [](auto& a, auto& b) { return a.first > b.first; });
    StepFunction sf;
    sf.total_mass = sp.mu();
    double acc = 0.0;
    for (size_t i = 0; i < av.size();) {
        double v = av[i].first;
        double w = 0.0;
        while (i < av.size() && av[i].first == v) w += av[i++].second;  // exact ties merge
        acc += w;
        if (v > 0.0) {
            sf.ends.push_back(acc);
            sf.values.push_back(v);
        }
    }
    return sf;
}

double k_lp_linf(const Space& sp, const ScalarField& f, double t, double p) {
    if (!(t > 0.0)) throw validation_error("k_lp_linf: t must be positive");
    if (!(p >= 1.0)) throw validation_error("k_lp_linf: p must be >= 1");
    StepFunction sf = decreasing_rearrangement(sp, f);
    return std::pow(sf.power_integral(p, std::pow(t, p)), 1.0 / p);
}

}  // namespace interplab
