#pragma once

// The concrete model: boundary weight B(x,y) as the exact product of the
// scaling triple, jump kernel J = B |x-y|^(-d-alpha), and the critically
// scaled killing potential kappa = kappa0 * delta^(-alpha) (capped).

#include <cmath>
#include <stdexcept>

#include "hklab/common.hpp"
#include "hklab/geometry.hpp"
#include "hklab/scaling.hpp"

namespace hklab {

enum class CaseTag { CaseI, CaseII, General };

class KernelModel {
public:
    KernelModel(double alpha, ScalingTriple triple, double kappa0)
        : alpha_(alpha), triple_(std::move(triple)), kappa0_(kappa0) {
        if (!(alpha > 0.0 && alpha < 2.0))
            throw std::invalid_argument("KernelModel: alpha must be in (0,2)");
        if (kappa0 < 0.0) throw std::invalid_argument("KernelModel: kappa0 must be >= 0");
    }

    double alpha() const { return alpha_; }
    double kappa0() const { return kappa0_; }
    const ScalingTriple& triple() const { return triple_; }

    // beta1* < alpha + beta1; required for any two-sided envelope claim.
    bool upper_gap_ok() const {
        return triple_.beta1_star() < alpha_ + triple_.beta1();
    }

    CaseTag case_tag() const {
        if (triple_.beta2_star() < alpha_ + triple_.beta1()) return CaseTag::CaseI;
        if (triple_.beta2() > alpha_ + triple_.beta1_star()) return CaseTag::CaseII;
        return CaseTag::General;
    }

    // B(x,y) = phi1((dmin)/r) phi2((dmax)/r) ell(dmin/(dmax ^ r)), r = |x-y|,
    // with the comparison constants of the defining condition taken as 1.
    double B_eval(const Domain& dom, const Vec& x, const Vec& y) const {
        if (!dom.contains(x) || !dom.contains(y))
            throw std::domain_error("B_eval: points must lie in D");
        double r = distance(x, y);
        if (r == 0.0) throw std::domain_error("B_eval: x == y (use B_diag)");
        double dx = dom.dist_to_boundary(x);
        double dy = dom.dist_to_boundary(y);
        return B_from_dists(std::min(dx, dy), std::max(dx, dy), r);
    }

    // Limit of B(x,y) as y -> x under the extension convention.
    double B_diag() const { return 1.0; }

    double J_eval(const Domain& dom, const Vec& x, const Vec& y) const {
        double r = distance(x, y);
        if (r == 0.0) throw std::domain_error("J_eval: x == y");
        return B_eval(dom, x, y) * std::pow(r, -static_cast<double>(dom.dim()) - alpha_);
    }

    // kappa(x) = kappa0 * min(delta,1)^(-alpha): the exact critical form for
    // delta < 1, capped at kappa0 beyond.
    double kappa_eval(const Domain& dom, const Vec& x) const {
        if (!dom.contains(x)) throw std::domain_error("kappa_eval: point not in D");
        if (kappa0_ == 0.0) return 0.0;
        double d = dom.dist_to_boundary(x);
        return kappa0_ * std::pow(std::min(d, 1.0), -alpha_);
    }

    // B evaluated directly from the two boundary distances and separation;
    // used by the envelope and killing modules where points are implicit.
    double B_from_dists(double dmin, double dmax, double r) const {
        return triple_.phi1(dmin / r) * triple_.phi2(dmax / r) *
               triple_.ell(dmin / std::min(dmax, r));
    }

    void hash_into(Fnv1a& h) const {
        h.add(alpha_).add(kappa0_);
        triple_.hash_into(h);
    }

private:
    double alpha_;
    ScalingTriple triple_;
    double kappa0_;
};

}  // namespace hklab
