#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hklab/quadrature.hpp"
#include "hklab/scaling.hpp"

using namespace hklab;
using Catch::Approx;

TEST_CASE("eval: PowerLog direct substitution", "[scaling]") {
    auto f = ScalingFunction::power_log(0.4, 0.0);
    // 0.25^0.4, hand-checked
    CHECK(f(0.25) == Approx(0.57434917749851742).epsilon(1e-13));
    CHECK(f(1.0) == 1.0);
    CHECK(f(2.0) == 1.0);
    CHECK(f(1e9) == 1.0);
}

TEST_CASE("eval: extension and constant family", "[scaling]") {
    auto c = ScalingFunction::constant();
    CHECK(c(1e-9) == 1.0);
    CHECK(c(1.0) == 1.0);
    auto pl = ScalingFunction::power_log(0.7, -1.2);
    CHECK(pl(1.0) == 1.0);
    CHECK(pl(3.5) == 1.0);
    auto tab = ScalingFunction::user_table({{0.01, 0.1}, {1.0, 1.0}}, 0.5, 0.5);
    CHECK(tab(1.0) == 1.0);
    CHECK(tab(17.0) == 1.0);
}

TEST_CASE("eval: nonpositive argument rejected", "[scaling]") {
    auto f = ScalingFunction::power_log(0.4, 0.0);
    CHECK_THROWS_AS(f(0.0), std::domain_error);
    CHECK_THROWS_AS(f(-1.0), std::domain_error);
}

TEST_CASE("eval: PowerLog log factor", "[scaling]") {
    // f(r) = r^0.4 * (log(e+1/r)/log(e+1))^-1
    auto f = ScalingFunction::power_log(0.4, 1.0);
    double r = 0.1;
    double expect = std::pow(r, 0.4) /
                    (std::log(std::exp(1.0) + 10.0) / std::log(std::exp(1.0) + 1.0));
    CHECK(f(r) == Approx(expect).epsilon(1e-13));
    CHECK(f.log_eval(r) == Approx(std::log(expect)).epsilon(1e-12));
}

TEST_CASE("eval: user table log-log interpolation", "[scaling]") {
    auto tab = ScalingFunction::user_table({{0.01, 0.2}, {0.1, 0.5}, {1.0, 1.0}}, 0.0, 0.5);
    CHECK(tab(0.1) == Approx(0.5).epsilon(1e-13));
    // geometric midpoint of (0.01, 0.1) maps to geometric midpoint of (0.2, 0.5)
    double mid = std::sqrt(0.01 * 0.1);
    CHECK(tab(mid) == Approx(std::sqrt(0.2 * 0.5)).epsilon(1e-13));
    // clamped below the first knot
    CHECK(tab(1e-5) == Approx(0.2).epsilon(1e-13));
}

TEST_CASE("compose_phi0: pointwise product", "[scaling]") {
    auto phi1 = ScalingFunction::power_log(0.4, 0.0);
    auto ell_one = ScalingFunction::constant();
    ScalingTriple t1(phi1, ScalingFunction::power_log(0.6, 0.0), ell_one);
    auto p0 = compose_phi0(t1);
    for (double r : {0.001, 0.03, 0.25, 0.9, 1.0, 4.0}) CHECK(p0(r) == phi1(r));
    CHECK(p0(1.0) == 1.0);
    CHECK(p0.lower_index() == 0.4);
    CHECK(p0.upper_index() == 0.4);

    auto ell_log = ScalingFunction::power_log(0.0, -0.5);
    ScalingTriple t2(phi1, ScalingFunction::power_log(0.6, 0.0), ell_log);
    auto p0b = compose_phi0(t2);
    CHECK(p0b(0.1) == Approx(phi1(0.1) * ell_log(0.1)).epsilon(1e-15));
    for (double r : {1e-6, 0.02, 0.77}) CHECK(p0b(r) == phi1(r) * ell_log(r));
}

TEST_CASE("check_scaling_indices: correct declaration passes with C ~ 1", "[scaling]") {
    auto f = ScalingFunction::power_log(0.4, 0.0);
    auto rep = check_scaling_indices(f, 128, 0.01);
    CHECK(rep.pass);
    CHECK(rep.constant == Approx(1.0).margin(1e-9));
}

TEST_CASE("check_scaling_indices: misdeclared indices fail", "[scaling]") {
    // true index 0.4 declared as 0.5: the lower scaling inequality needs
    // C >= (r/s)^0.09, which blows past the cap on the deep dyadic grid
    auto wrong = ScalingFunction::power_log(0.4, 0.0).with_declared_indices(0.5, 0.5);
    auto rep = check_scaling_indices(wrong, 128, 0.01);
    CHECK_FALSE(rep.pass);
    CHECK(rep.constant > 1e3);
}

TEST_CASE("check_scaling_indices: log factor absorbed by the slack", "[scaling]") {
    auto f = ScalingFunction::power_log(0.4, 1.0);
    auto rep = check_scaling_indices(f, 128, 0.05);
    CHECK(rep.pass);
    auto tight = check_scaling_indices(f, 128, 0.01);
    CHECK(tight.constant > rep.constant);
}

TEST_CASE("check_ell_condition: constant ell", "[scaling]") {
    ScalingTriple t(ScalingFunction::power_log(0.4, 0.0), ScalingFunction::power_log(0.6, 0.0),
                    ScalingFunction::constant());
    auto rep = check_ell_condition(t, 0.5, 64);
    CHECK(rep.pass);
    CHECK(rep.constant == Approx(1.0).margin(1e-12));
}

TEST_CASE("check_ell_condition: slowly varying log passes", "[scaling]") {
    ScalingTriple t(ScalingFunction::power_log(0.4, 0.0), ScalingFunction::power_log(0.4, 0.0),
                    ScalingFunction::power_log(0.0, -0.5));
    auto rep = check_ell_condition(t, 0.1, 128);
    CHECK(rep.pass);
}

TEST_CASE("check_ell_condition: hidden power detected", "[scaling]") {
    // a genuine power r^0.2 declared as slowly varying
    auto fake_ell = ScalingFunction::power_log(0.2, 0.0).with_declared_indices(0.0, 0.0);
    ScalingTriple t(ScalingFunction::power_log(0.4, 0.0), ScalingFunction::power_log(0.4, 0.0),
                    fake_ell);
    auto rep = check_ell_condition(t, 0.1, 128);
    CHECK_FALSE(rep.pass);
}

// Combined monotonicity of phi * ell in the first argument: for phi a genuine
// power and ell slowly varying there is a single C with
// phi(s) ell(s/k) <= C phi(r) ell(r/k) for all 0 < s <= r <= 1 and k > 0.
namespace {

double fit_monotone_combination_constant(const ScalingFunction& phi, const ScalingFunction& ell,
                                         int n_grid) {
    double worst = 0.0;
    for (int a = 0; a <= n_grid; ++a) {
        double r = std::pow(10.0, -6.0 * a / n_grid);
        for (int b = a; b <= n_grid; ++b) {
            double s = std::pow(10.0, -6.0 * b / n_grid);
            for (int c = -3; c <= 3; ++c) {
                double k = std::pow(10.0, c);
                double lhs = phi.log_eval(s) + ell.log_eval(s / k);
                double rhs = phi.log_eval(r) + ell.log_eval(r / k);
                worst = std::max(worst, lhs - rhs);
            }
        }
    }
    return std::exp(worst);
}

}  // namespace

TEST_CASE("combined monotonicity of phi * ell (single constant)", "[scaling]") {
    auto phi = ScalingFunction::power_log(0.4, 0.0);
    for (double g : {0.5, -0.5}) {
        auto ell = ScalingFunction::power_log(0.0, g);
        double c_coarse = fit_monotone_combination_constant(phi, ell, 24);
        double c_fine = fit_monotone_combination_constant(phi, ell, 48);
        CHECK(std::isfinite(c_fine));
        CHECK(c_fine < 1e3);
        CHECK(c_fine <= c_coarse * 1.2);  // stable under grid refinement
    }
}

// Time-integral bound: for q < alpha + beta,
//   int_0^t (1 ^ k/s^(1/a))^q Phi((k v s^(1/a))/r) ell(m/(k v s^(1/a))) ds
//     <= C t (1 ^ k/t^(1/a))^q Phi((k v t^(1/a))/r) ell(m/(k v t^(1/a))).
namespace {

double time_integral_lhs(const ScalingFunction& phi, const ScalingFunction& ell, double alpha,
                         double q, double r, double t, double k, double m) {
    QuadratureSpec spec;
    spec.rel_tol = 1e-8;
    auto f = [&](double s) {
        double sa = std::pow(s, 1.0 / alpha);
        double kv = std::max(k, sa);
        return std::pow(std::min(1.0, k / sa), q) * phi(kv / r) * ell(m / kv);
    };
    std::vector<double> seeds{std::pow(k, alpha)};
    return integrate_adaptive(f, 1e-300, t, spec, seeds);
}

double fit_time_integral_constant(const ScalingFunction& phi, const ScalingFunction& ell,
                                  double alpha, double q, int n) {
    double worst = 0.0;
    for (int ir = 0; ir < n; ++ir) {
        double r = 0.1 + 0.9 * ir / std::max(1, n - 1);
        for (int it = 0; it < n; ++it) {
            double t = std::pow(10.0, -4.0 + 3.0 * it / std::max(1, n - 1)) * std::pow(r, alpha);
            for (int ik = 0; ik < n; ++ik) {
                double k = std::pow(10.0, -3.0 + 3.0 * ik / std::max(1, n - 1));
                for (double m : {0.01, 1.0}) {
                    double ta = std::pow(t, 1.0 / alpha);
                    double kv = std::max(k, ta);
                    double rhs = t * std::pow(std::min(1.0, k / ta), q) * phi(kv / r) *
                                 ell(m / kv);
                    double lhs = time_integral_lhs(phi, ell, alpha, q, r, t, k, m);
                    worst = std::max(worst, lhs / rhs);
                }
            }
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("time-integral bound holds with a stable constant", "[scaling]") {
    double alpha = 1.0, beta = 0.4;
    auto phi = ScalingFunction::power_log(beta, 0.0);
    auto ell = ScalingFunction::power_log(0.0, -0.5);
    for (double q : {0.0, 0.5, 1.2}) {
        REQUIRE(q < alpha + beta);
        double c4 = fit_time_integral_constant(phi, ell, alpha, q, 4);
        double c6 = fit_time_integral_constant(phi, ell, alpha, q, 6);
        CHECK(std::isfinite(c6));
        CHECK(c6 < 1e3);
        CHECK(c6 <= c4 * 1.25);
    }
}

TEST_CASE("triple validation", "[scaling]") {
    auto incr = ScalingFunction::power_log(0.4, 0.0);
    auto decr = ScalingFunction::power_log(0.0, -0.5);  // almost decreasing
    CHECK_THROWS_AS(ScalingTriple(decr, incr, ScalingFunction::constant()),
                    std::invalid_argument);
    CHECK_THROWS_AS(ScalingTriple(incr, incr, incr), std::invalid_argument);
    CHECK_NOTHROW(ScalingTriple(incr, incr, decr));
}
