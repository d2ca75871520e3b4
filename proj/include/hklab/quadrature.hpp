#pragma once

// 1-d quadrature plumbing: adaptive Simpson over seeded panels (the envelope
// integrands are piecewise smooth with kinks at known locations), and fixed
// Gauss-Legendre panels for the killing-constant integral.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hklab/common.hpp"

namespace hklab {

struct QuadratureSpec {
    double rel_tol = 1e-6;
    double abs_tol = 1e-12;
    int max_subdivisions = 2000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
            throw std::invalid_argument("QuadratureSpec: tolerances must be positive");
        if (max_subdivisions < 1)
            throw std::invalid_argument("QuadratureSpec: max_subdivisions >= 1");
    }
};

namespace detail {

struct SimpsonState {
    int splits_left;
    bool converged = true;
};

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth, SimpsonState& st) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double err = left + right - whole;
    if (depth > 0 && std::abs(err) <= 15.0 * tol) return left + right + err / 15.0;
    if (depth >= 48 || st.splits_left <= 0) {
        st.converged = false;
        return left + right;
    }
    st.splits_left -= 2;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, st) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, st);
}

}  // namespace detail

// Integrate f over [a,b]. `seeds` lists interior points where the integrand
// has kinks; each seeded panel is refined independently. Throws numeric_error
// when the subdivision budget runs out before the tolerance is met.
template <typename F>
double integrate_adaptive(const F& f, double a, double b, const QuadratureSpec& spec,
                          std::vector<double> seeds = {}) {
    spec.validate();
    if (!(b > a)) throw std::range_error("integrate_adaptive: empty range");
    seeds.push_back(a);
    seeds.push_back(b);
    std::sort(seeds.begin(), seeds.end());
    seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

    std::vector<double> pts;
    for (double s : seeds)
        if (s >= a && s <= b && (pts.empty() || s > pts.back())) pts.push_back(s);
    if (pts.front() != a) pts.insert(pts.begin(), a);
    if (pts.back() != b) pts.push_back(b);

    // First pass for the scale of the integral; sets the absolute goal.
    double rough = 0.0;
    std::vector<std::array<double, 3>> panels;  // a, b, rough value
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double pa = pts[i], pb = pts[i + 1];
        if (!(pb > pa)) continue;
        double pm = 0.5 * (pa + pb);
        double v = (pb - pa) / 6.0 * (f(pa) + 4.0 * f(pm) + f(pb));
        panels.push_back({pa, pb, v});
        rough += std::abs(v);
    }
    double goal = std::max(spec.abs_tol, spec.rel_tol * rough);

    detail::SimpsonState st{spec.max_subdivisions};
    double total = 0.0;
    for (const auto& [pa, pb, v] : panels) {
        double tol = goal * std::max(1e-3, std::abs(v) / std::max(rough, 1e-300));
        double pm = 0.5 * (pa + pb);
        double fa = f(pa), fm = f(pm), fb = f(pb);
        double whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
        total += detail::adaptive_simpson_rec(f, pa, pb, fa, fm, fb, whole, tol, 0, st);
    }
    if (!st.converged)
        throw numeric_error("integrate_adaptive: subdivision budget exhausted (range [" +
                            std::to_string(a) + ", " + std::to_string(b) + "])");
    return total;
}

// Integral of g(u) du/u^(alpha+1) over [lo,hi] via v = log u, so the measure
// becomes e^(-alpha v) dv and panels refine multiplicatively. Seeds are given
// in u-space.
template <typename G>
double integrate_du_alpha(const G& g, double lo, double hi, double alpha,
                          const QuadratureSpec& spec, const std::vector<double>& u_seeds = {}) {
    if (!(lo > 0.0)) throw std::range_error("integrate_du_alpha: lower limit must be > 0");
    if (!(hi > lo)) throw std::range_error("integrate_du_alpha: empty range");
    std::vector<double> vseeds;
    vseeds.reserve(u_seeds.size() + 16);
    for (double s : u_seeds)
        if (s > lo && s < hi) vseeds.push_back(std::log(s));
    // floor of uniform panels in log space so narrow features are not missed
    double la = std::log(lo), lb = std::log(hi);
    int base = 16;
    for (int i = 1; i < base; ++i) vseeds.push_back(la + (lb - la) * i / base);
    auto fv = [&](double v) {
        double u = std::exp(v);
        return g(u) * std::exp(-alpha * v);
    };
    return integrate_adaptive(fv, la, lb, spec, std::move(vseeds));
}

// Nodes/weights of n-point Gauss-Legendre on [-1,1], computed by Newton on
// Legendre polynomials.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        weights[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[static_cast<std::size_t>(n - 1 - i)] = weights[static_cast<std::size_t>(i)];
    }
}

// Fixed-order Gauss-Legendre over an explicit panel decomposition.
template <typename F>
double integrate_panels_gl(const F& f, const std::vector<double>& breaks, int order) {
    std::vector<double> xs, ws;
    gauss_legendre(order, xs, ws);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        double a = breaks[i], b = breaks[i + 1];
        if (!(b > a)) continue;
        double c = 0.5 * (a + b), hw = 0.5 * (b - a);
        double acc = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) acc += ws[k] * f(c + hw * xs[k]);
        total += hw * acc;
    }
    return total;
}

// Panels of [a,b] accumulating geometrically at the right endpoint, ratio 1/2,
// down to width min_width.
inline std::vector<double> graded_breaks_right(double a, double b, double min_width) {
    std::vector<double> out{a};
    double w = (b - a) / 2.0;
    while (w > min_width) {
        out.push_back(b - w);
        w *= 0.5;
    }
    out.push_back(b);
    return out;
}

// Geometric panels from a toward b on a log scale (for decaying tails).
inline std::vector<double> geometric_breaks(double a, double b, double first_width) {
    std::vector<double> out{a};
    double x = a, w = first_width;
    while (x + w < b) {
        x += w;
        out.push_back(x);
        w *= 2.0;
    }
    out.push_back(b);
    return out;
}

}  // namespace hklab
