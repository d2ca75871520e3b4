#pragma once

// The killing constant C(p; alpha, F), the half-space boundary profile F0
// induced by the product model, its symmetrization, and the boundary exponent
// q solving kappa0 = C(q; alpha, F).

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hklab/common.hpp"
#include "hklab/quadrature.hpp"
#include "hklab/scaling.hpp"

namespace hklab {

namespace detail {

// F0 for the exact-product model in half-space coordinates w = (y-x)/x_d:
// with m = 1 ^ (1+w_d), M = 1 v (1+w_d),
//   F0(w) = phi1(m/|w|) phi2(M/|w|) ell(m / (M ^ |w|)).
// Only |w~| and w_d enter, so the radial form is exact. The evaluation point
// is carried as (|w~|, 1+w_d): the killing-constant integrand works at
// 1+w_d = s down to underflow scale, where forming w_d = s-1 would hit -1.
inline double f0_radial(const ScalingTriple& t, double wt_norm, double one_plus_wd) {
    if (!(one_plus_wd > 0.0)) throw std::domain_error("F0: w_d must be > -1");
    double wd = one_plus_wd - 1.0;
    double norm = std::hypot(wt_norm, wd);
    if (norm == 0.0) throw std::domain_error("F0: w must be nonzero");
    double m = std::min(1.0, one_plus_wd);
    double M = std::max(1.0, one_plus_wd);
    return t.phi1(m / norm) * t.phi2(M / norm) * t.ell(m / std::min(M, norm));
}

}  // namespace detail

inline double f0_model_eval(const ScalingTriple& t, const Vec& w) {
    double wt2 = 0.0;
    for (int i = 0; i + 1 < w.dim(); ++i) wt2 += w[i] * w[i];
    return detail::f0_radial(t, std::sqrt(wt2), 1.0 + w[w.dim() - 1]);
}

// Symmetrization F(w) = (F0(w) + F0(-w/(1+w_d))) / 2; the result satisfies
// F(w) = F(-w/(1+w_d)) identically.
inline double F_symmetrize(const std::function<double(const Vec&)>& f0, const Vec& w) {
    double wd = w[w.dim() - 1];
    if (!(wd > -1.0)) throw std::domain_error("F_symmetrize: w_d must be > -1");
    Vec mapped = w * (-1.0 / (1.0 + wd));
    return 0.5 * (f0(w) + f0(mapped));
}

// Bounded profile on the half space {w_d > -1}, radial in the tangential
// coordinates (all provided profiles are). beta1 is the decay index of F
// toward w_d = -1; it bounds the feasible exponent range of C(p; alpha, F).
class BoundaryProfile {
public:
    static BoundaryProfile one() {
        BoundaryProfile f;
        f.fn_ = [](double, double) { return 1.0; };
        f.symmetrized_ = true;
        f.beta1_ = 0.0;
        return f;
    }

    // Symmetrized model profile of the product triple.
    static BoundaryProfile from_triple(const ScalingTriple& t) {
        BoundaryProfile f;
        f.fn_ = [t](double wt, double opl) {
            double a = detail::f0_radial(t, wt, opl);
            // w -> -w/(1+w_d): tangential norm scales by 1/(1+w_d) and
            // 1+w_d maps to 1/(1+w_d).
            double b = detail::f0_radial(t, wt / opl, 1.0 / opl);
            return 0.5 * (a + b);
        };
        f.symmetrized_ = true;
        f.beta1_ = t.beta1();
        return f;
    }

    // arguments: tangential norm |w~| and 1 + w_d
    double operator()(double wt_norm, double one_plus_wd) const {
        return fn_(wt_norm, one_plus_wd);
    }
    double eval_point(const Vec& w) const {
        double wt2 = 0.0;
        for (int i = 0; i + 1 < w.dim(); ++i) wt2 += w[i] * w[i];
        return fn_(std::sqrt(wt2), 1.0 + w[w.dim() - 1]);
    }
    bool symmetrized() const { return symmetrized_; }
    double beta1() const { return beta1_; }

private:
    std::function<double(double, double)> fn_;
    bool symmetrized_ = false;
    double beta1_ = 0.0;
};

namespace detail {

// (s^p - 1)(1 - s^(alpha-1-p)) (1-s)^(-1-alpha), evaluated through
// expm1/log1p so the double zero at s = 1 keeps full relative accuracy
// against the (1-s)^(-1-alpha) blowup.
inline double killing_s_factor(double s, double p, double alpha) {
    double ls = std::log(s);
    double f1 = std::expm1(p * ls);                  // s^p - 1        (<= 0)
    double f2 = -std::expm1((alpha - 1.0 - p) * ls); // 1 - s^(a-1-p)  (<= 0)
    return f1 * f2 * std::pow(1.0 - s, -1.0 - alpha);
}

// surface area of the unit sphere S^(n-1) in R^n; n = 1 gives the two-point
// "sphere" {-1, 1}.
inline double sphere_surface(int n) {
    if (n == 1) return 2.0;
    return 2.0 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);
}

// s-quadrature for C(p; alpha, F): Gauss nodes with the stabilized factor
// folded into the weights, shared across every tangential node. Panels
// accumulate at s = 1 (integrand ~ (1-s)^(1-alpha)) and sweep toward s = 0 in
// ratio-8 log panels (integrand ~ s^(alpha-1-p+beta1), approaching
// non-integrability as p -> alpha + beta1). The sweep stops once a panel's
// factor mass is negligible; F is bounded, so the criterion is
// profile-independent.
struct KillingSQuad {
    std::vector<double> nodes;
    std::vector<double> weights;  // Gauss weight * s-factor
};

inline KillingSQuad build_killing_s_quad(double p, double alpha, int order) {
    std::vector<double> gx, gw;
    gauss_legendre(order, gx, gw);
    KillingSQuad q;
    auto add_panel = [&](double a, double b) {
        double c = 0.5 * (a + b), hw = 0.5 * (b - a);
        double mass = 0.0;
        for (int i = 0; i < order; ++i) {
            double s = c + hw * gx[static_cast<std::size_t>(i)];
            double w = hw * gw[static_cast<std::size_t>(i)] * killing_s_factor(s, p, alpha);
            q.nodes.push_back(s);
            q.weights.push_back(w);
            mass += std::abs(w);
        }
        return mass;
    };
    const double s0 = 0.5;
    double total = 0.0;
    {
        double w = 1.0 - s0;
        while (w > 1e-12) {
            total += add_panel(1.0 - w, 1.0 - w / 8.0);
            w /= 8.0;
        }
        total += add_panel(1.0 - w, 1.0);
    }
    {
        // s^(alpha-1-p) overflows below exp(-709/(p+1-alpha)); stop above it.
        double s_floor = std::max(1e-250, std::exp(-690.0 / std::max(0.2, p + 1.0 - alpha)));
        double hi = s0;
        int quiet = 0;
        while (hi > s_floor && quiet < 2) {
            double lo = hi / 8.0;
            double mass = add_panel(lo, hi);
            total += mass;
            if (mass < 1e-15 * total)
                ++quiet;
            else
                quiet = 0;
            hi = lo;
        }
    }
    return q;
}

}  // namespace detail

// C(p; alpha, F): the double integral over R^(d-1) x (0,1), reduced to radial
// tangential coordinates. The rho-integral is truncated at 1e3; the dropped
// tail is below rho^(-1-alpha)/(1+alpha) ~ 1e-8 relative for alpha >= 1 and
// far below the quadrature tolerance elsewhere. Accuracy is driven by panel
// refinement until successive refinements agree to quad.rel_tol.
inline double C_const_eval(double alpha, double p, const BoundaryProfile& F,
                           const QuadratureSpec& quad, int dim) {
    if (!(alpha > 0.0 && alpha < 2.0))
        throw std::domain_error("C_const_eval: alpha must be in (0,2)");
    if (dim < 2) throw std::domain_error("C_const_eval: dim must be >= 2");
    double p_lo = std::max(alpha - 1.0, 0.0);
    double p_hi = alpha + F.beta1();
    if (!(p >= p_lo && p < p_hi))
        throw std::domain_error("C_const_eval: p outside [(alpha-1)+, alpha+beta1)");
    if (p == p_lo) return 0.0;
    quad.validate();

    const int order = 16;
    detail::KillingSQuad sq = detail::build_killing_s_quad(p, alpha, order);
    auto inner = [&](double rho) {
        double acc = 0.0;
        for (std::size_t i = 0; i < sq.nodes.size(); ++i) {
            double s = sq.nodes[i];
            acc += sq.weights[i] * F((1.0 - s) * rho, s);
        }
        return acc;
    };

    double surf = detail::sphere_surface(dim - 1);
    double prev = 0.0;
    for (int level = 0; level < 6; ++level) {
        int n_unit = 8 << level;   // panels on rho in [0,1]
        std::vector<double> breaks;
        for (int i = 0; i <= n_unit; ++i)
            breaks.push_back(static_cast<double>(i) / n_unit);
        // geometric panels out to the truncation radius
        double w = 1.0 / n_unit;
        double x = 1.0;
        while (x < 1e3) {
            x = std::min(1e3, x + w);
            breaks.push_back(x);
            w *= 1.6;
        }
        auto outer = [&](double rho) {
            double weight = std::pow(rho, dim - 2) *
                            std::pow(rho * rho + 1.0, -(dim + alpha) / 2.0);
            return weight * inner(rho);
        };
        double val = surf * integrate_panels_gl(outer, breaks, order);
        if (level > 0 &&
            std::abs(val - prev) <= std::max(quad.abs_tol, quad.rel_tol * std::abs(val)))
            return val;
        prev = val;
    }
    throw numeric_error("C_const_eval: quadrature did not stabilize");
}

// Boundary exponent q with kappa0 = C(q; alpha, F). kappa0 = 0 (alpha > 1)
// gives q = alpha - 1 exactly; otherwise bisection on the strictly increasing
// p -> C(p). beta1 caps the search range together with the profile's own
// decay index.
inline double solve_q(double alpha, double kappa0, const BoundaryProfile& F, double beta1,
                      const QuadratureSpec& quad, int dim = 2) {
    if (kappa0 < 0.0) throw std::domain_error("solve_q: kappa0 must be >= 0");
    if (alpha <= 1.0 && kappa0 == 0.0)
        throw std::domain_error("solve_q: alpha <= 1 requires kappa0 > 0");
    if (kappa0 == 0.0) return alpha - 1.0;

    double lo = std::max(alpha - 1.0, 0.0);
    double hi = alpha + std::min(beta1, F.beta1()) - 1e-6;
    if (!(hi > lo)) throw infeasible_error("solve_q: empty exponent range");
    double c_hi = C_const_eval(alpha, hi, F, quad, dim);
    if (kappa0 >= c_hi)
        throw infeasible_error("solve_q: kappa0 = " + std::to_string(kappa0) +
                               " >= C(p) at the upper end of the range (" +
                               std::to_string(c_hi) + ")");
    double tol = 1e-8 * std::max(1.0, kappa0);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double c = (mid <= std::max(alpha - 1.0, 0.0)) ? 0.0
                                                       : C_const_eval(alpha, mid, F, quad, dim);
        if (std::abs(c - kappa0) <= tol) return mid;
        if (c < kappa0)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14) return 0.5 * (lo + hi);
    }
    throw numeric_error("solve_q: bisection did not meet tolerance");
}

}  // namespace hklab
