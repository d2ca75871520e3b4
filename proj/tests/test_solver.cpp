#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <numeric>

#include "hklab/solver.hpp"

using namespace hklab;
using Catch::Approx;

namespace {

KernelModel trivial_model(double alpha) {
    ScalingTriple t(ScalingFunction::constant(), ScalingFunction::constant(),
                    ScalingFunction::constant());
    return KernelModel(alpha, t, 0.0);
}

KernelModel case_i_model(double alpha = 1.0) {
    ScalingTriple t(ScalingFunction::power_log(0.4, 0.0), ScalingFunction::power_log(0.6, 0.0),
                    ScalingFunction::constant());
    return KernelModel(alpha, t, 0.0);
}

}  // namespace

TEST_CASE("build_generator: node count tracks the cell density", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = case_i_model();
    for (double h : {1.0 / 8, 1.0 / 16}) {
        GeneratorGrid g(m, disc, h, SolverMode::Conservative);
        double expect = M_PI / (h * h);
        CHECK(std::abs(static_cast<double>(g.n()) - expect) <= 0.05 * expect);
        for (double d : g.node_dists()) CHECK(d > 0.0);
    }
}

TEST_CASE("build_generator: rates are J times the cell volume", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = trivial_model(1.0);
    double h = 1.0 / 8;
    GeneratorGrid g(m, disc, h, SolverMode::Conservative);
    Rng rng(10);
    for (int k = 0; k < 100; ++k) {
        std::size_t i = rng.index(g.n()), j = rng.index(g.n());
        if (i == j) continue;
        double r = distance(g.nodes()[i], g.nodes()[j]);
        CHECK(g.rate(i, j) == Approx(std::pow(r, -3.0) * h * h).epsilon(1e-13));
        CHECK(g.rate(i, j) == g.rate(j, i));
    }
}

TEST_CASE("build_generator: conservative mode has zero killing and row sums", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = case_i_model();
    GeneratorGrid g(m, disc, 1.0 / 8, SolverMode::Conservative);
    for (std::size_t i = 0; i < g.n(); ++i) {
        CHECK(g.kill()[i] == 0.0);
        double row = 0.0;
        for (std::size_t j = 0; j < g.n(); ++j)
            if (j != i) row += g.rate(i, j);
        // generator row sum = off-diagonal total minus total_rate = -kill = 0
        CHECK(g.total_rate(i) == Approx(row).epsilon(1e-12));
        CHECK(g.total_rate(i) <= g.uniformization_constant());
    }
}

TEST_CASE("build_generator: configuration gates", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto box = Domain::box(Vec(0.0, 0.0), Vec(1.0, 1.0));
    auto m = case_i_model(1.5);
    CHECK_THROWS_AS(GeneratorGrid(m, disc, 0.5, SolverMode::Conservative), config_error);
    CHECK_THROWS_AS(GeneratorGrid(m, box, 1.0 / 8, SolverMode::Killed), config_error);
    auto sub = case_i_model(0.8);  // alpha <= 1 and kappa0 = 0
    CHECK_THROWS_AS(GeneratorGrid(sub, disc, 1.0 / 8, SolverMode::Killed), config_error);
    CHECK_NOTHROW(GeneratorGrid(m, box, 1.0 / 12, SolverMode::Conservative));
}

TEST_CASE("killed mode: boundary absorption appears for alpha > 1", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = case_i_model(1.5);
    GeneratorGrid g(m, disc, 1.0 / 12, SolverMode::Killed);
    // absorption decays away from the boundary
    double near = 0.0, far = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i) {
        if (g.node_dists()[i] < 0.15) near = std::max(near, g.kill()[i]);
        if (g.node_dists()[i] > 0.7) far = std::max(far, g.kill()[i]);
        CHECK(g.kill()[i] > 0.0);
    }
    CHECK(near > 10.0 * far);
}

TEST_CASE("heat_kernel_column: tiny time is a near-indicator", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = case_i_model();
    GeneratorGrid g(m, disc, 1.0 / 8, SolverMode::Conservative);
    double t = 1e-9 / g.uniformization_constant();
    auto col = heat_kernel_column(g, 7, t, 1e-10);
    double off = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i)
        if (i != 7) off += col.masses[i];
    CHECK(off < 1e-6);
    CHECK(col.masses[7] == Approx(1.0).margin(1e-6));
}

TEST_CASE("heat_kernel_column: conservative mass conservation", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = case_i_model();
    GeneratorGrid g(m, disc, 1.0 / 8, SolverMode::Conservative);
    for (double t : {0.01, 0.1, 0.5}) {
        auto col = heat_kernel_column(g, 3, t, 1e-9);
        double sum = std::accumulate(col.masses.begin(), col.masses.end(), 0.0);
        CHECK(sum == Approx(1.0).margin(1e-8));
        for (double v : col.masses) CHECK(v >= 0.0);
    }
}

TEST_CASE("heat_kernel_column: symmetry of the weighted kernel", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = case_i_model();
    GeneratorGrid g(m, disc, 1.0 / 8, SolverMode::Conservative);
    double tol = 1e-10;
    Rng rng(21);
    for (int k = 0; k < 10; ++k) {
        std::size_t i = rng.index(g.n()), j = rng.index(g.n());
        if (i == j) continue;
        auto ci = heat_kernel_column(g, i, 0.05, tol);
        auto cj = heat_kernel_column(g, j, 0.05, tol);
        CHECK(std::abs(ci.masses[j] - cj.masses[i]) <= 2.0 * tol);
    }
}

TEST_CASE("heat_kernel_column: truncation padding changes nothing", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = case_i_model();
    GeneratorGrid g(m, disc, 1.0 / 8, SolverMode::Conservative);
    double tol = 1e-9;
    auto base = heat_kernel_column(g, 11, 0.2, tol);
    auto padded = heat_kernel_column(g, 11, 0.2, tol, 10);
    for (std::size_t i = 0; i < g.n(); ++i)
        CHECK(std::abs(base.masses[i] - padded.masses[i]) < tol);
}

TEST_CASE("heat_kernel_column: Chapman-Kolmogorov", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = case_i_model();
    GeneratorGrid g(m, disc, 1.0 / 8, SolverMode::Conservative);
    double tol = 1e-9, t = 0.3;
    std::size_t src = 5;
    auto full = heat_kernel_column(g, src, t, tol);
    auto half = heat_kernel_column(g, src, t / 2, tol);
    // propagate the half column another t/2
    std::vector<double> v = half.masses;
    detail::uniformized_propagate(g, v, 1, t / 2, tol);
    for (std::size_t i = 0; i < g.n(); ++i)
        CHECK(std::abs(full.masses[i] - v[i]) <= 3.0 * tol);
}

TEST_CASE("heat_kernel_column: guards", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = case_i_model();
    GeneratorGrid g(m, disc, 1.0 / 8, SolverMode::Conservative);
    CHECK_THROWS_AS(heat_kernel_column(g, 0, 2e5 / g.uniformization_constant(), 1e-8),
                    numeric_error);
    CHECK_THROWS_AS(heat_kernel_column(g, 0, 0.0, 1e-8), std::domain_error);
    CHECK_THROWS_AS(heat_kernel_column(g, g.n(), 0.1, 1e-8), std::out_of_range);
}

TEST_CASE("heat_kernel_columns: block propagation matches single columns", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = case_i_model();
    GeneratorGrid g(m, disc, 1.0 / 8, SolverMode::Conservative);
    std::vector<std::size_t> sources{2, 17, 40};
    auto block = heat_kernel_columns(g, sources, 0.1, 1e-9);
    for (std::size_t c = 0; c < sources.size(); ++c) {
        auto single = heat_kernel_column(g, sources[c], 0.1, 1e-9);
        for (std::size_t i = 0; i < g.n(); ++i)
            CHECK(std::abs(block[c].masses[i] - single.masses[i]) < 1e-14);
    }
}

TEST_CASE("refinement stability away from the boundary", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = case_i_model(1.0);
    Vec x(0.25, 0.1), y(-0.3, -0.2);
    double t = 0.1;
    double p_prev = 0.0;
    for (double h : {1.0 / 16, 1.0 / 32}) {
        GeneratorGrid g(m, disc, h, SolverMode::Conservative);
        std::size_t i = g.nearest_node(x), j = g.nearest_node(y);
        auto col = heat_kernel_column(g, j, t, 1e-9);
        double p = col.density(i);
        if (p_prev != 0.0) CHECK(std::abs(p - p_prev) / p_prev < 0.15);
        p_prev = p;
    }
}

TEST_CASE("survival_vector: basic contracts", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = case_i_model(1.5);
    GeneratorGrid g(m, disc, 1.0 / 12, SolverMode::Killed);
    CHECK_THROWS_AS(survival_vector(GeneratorGrid(m, disc, 1.0 / 12, SolverMode::Conservative),
                                    0.1, 1e-9),
                    std::logic_error);

    auto tiny = survival_vector(g, 1e-9 / g.uniformization_constant(), 1e-10);
    for (double s : tiny) CHECK(s == Approx(1.0).margin(1e-6));

    auto sv = survival_vector(g, 0.3, 1e-9);
    double near = 0.0, far = 0.0;
    int n_near = 0, n_far = 0;
    for (std::size_t i = 0; i < g.n(); ++i) {
        CHECK(sv[i] > 0.0);
        CHECK(sv[i] <= 1.0);
        if (g.node_dists()[i] < 0.2) {
            near += sv[i];
            ++n_near;
        }
        if (g.node_dists()[i] > 0.6) {
            far += sv[i];
            ++n_far;
        }
    }
    // boundary nodes decay fastest
    CHECK(near / n_near < far / n_far);
}

TEST_CASE("survival ordering with explicit killing potential", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    ScalingTriple t(ScalingFunction::constant(), ScalingFunction::constant(),
                    ScalingFunction::constant());
    KernelModel m(1.5, t, 0.3);
    GeneratorGrid g(m, disc, 1.0 / 12, SolverMode::Killed);
    auto sv = survival_vector(g, 0.2, 1e-9);
    double near = 0.0, far = 0.0;
    int n_near = 0, n_far = 0;
    for (std::size_t i = 0; i < g.n(); ++i) {
        if (g.node_dists()[i] < 0.2) {
            near += sv[i];
            ++n_near;
        }
        if (g.node_dists()[i] > 0.6) {
            far += sv[i];
            ++n_far;
        }
    }
    CHECK(near / n_near < far / n_far);
}

TEST_CASE("principal_eigenpair: positivity and decay rate", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = trivial_model(1.5);
    GeneratorGrid g(m, disc, 1.0 / 16, SolverMode::Killed);
    auto ep = principal_eigenpair(g);
    CHECK(ep.lambda1 > 0.0);
    double sup = 0.0;
    for (double v : ep.phi1) {
        CHECK(v > 0.0);
        sup = std::max(sup, v);
    }
    CHECK(sup == Approx(1.0));

    // phi1 / delta^q bounded within a factor over nodes with delta >= 2h
    double q = 0.5;  // alpha - 1 for the zero-kappa0 model
    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 0; i < g.n(); ++i) {
        if (g.node_dists()[i] < 2.0 / 16) continue;
        double ratio = ep.phi1[i] / std::pow(g.node_dists()[i], q);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(hi / lo <= 20.0);

    // large-time column decays like exp(-lambda1 t)
    std::size_t c = g.nearest_node(Vec(0.0, 0.0));
    auto col1 = heat_kernel_column(g, c, 2.0, 1e-10);
    auto col2 = heat_kernel_column(g, c, 2.5, 1e-10);
    double m1 = std::accumulate(col1.masses.begin(), col1.masses.end(), 0.0);
    double m2 = std::accumulate(col2.masses.begin(), col2.masses.end(), 0.0);
    CHECK(std::log(m1 / m2) / 0.5 == Approx(ep.lambda1).epsilon(0.05));

    CHECK_THROWS_AS(
        principal_eigenpair(GeneratorGrid(m, disc, 1.0 / 12, SolverMode::Conservative)),
        std::logic_error);
}

TEST_CASE("cache: roundtrip reproduces the grid", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m = case_i_model(1.5);
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "hklab_cache_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    GeneratorGrid g(m, disc, 1.0 / 10, SolverMode::Killed);
    fs::path file = dir / cache_key(m, disc, 1.0 / 10, SolverMode::Killed);
    g.write_cache(file);
    auto g2 = GeneratorGrid::read_cache(file, m, disc, SolverMode::Killed);

    REQUIRE(g2.n() == g.n());
    CHECK(g2.h() == g.h());
    CHECK(g2.uniformization_constant() == Approx(g.uniformization_constant()).epsilon(1e-15));
    Rng rng(9);
    for (int k = 0; k < 200; ++k) {
        std::size_t i = rng.index(g.n()), j = rng.index(g.n());
        CHECK(g2.rate(i, j) == g.rate(i, j));
    }
    for (std::size_t i = 0; i < g.n(); ++i) {
        CHECK(g2.nodes()[i] == g.nodes()[i]);
        CHECK(g2.kill()[i] == Approx(g.kill()[i]).epsilon(1e-14));
    }

    // cached_generator: second call hits the file
    auto g3 = cached_generator(m, disc, 1.0 / 10, SolverMode::Killed, dir);
    CHECK(g3.n() == g.n());
    CHECK(fs::exists(dir / cache_key(m, disc, 1.0 / 10, SolverMode::Killed)));
    fs::remove_all(dir);
}

TEST_CASE("cache: distinct keys for distinct inputs", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    auto m1 = case_i_model(1.5);
    auto m2 = case_i_model(1.2);
    CHECK(cache_key(m1, disc, 0.1, SolverMode::Killed) !=
          cache_key(m2, disc, 0.1, SolverMode::Killed));
    CHECK(cache_key(m1, disc, 0.1, SolverMode::Killed) !=
          cache_key(m1, disc, 0.1, SolverMode::Conservative));
    CHECK(cache_key(m1, disc, 0.1, SolverMode::Killed) !=
          cache_key(m1, disc, 0.05, SolverMode::Killed));
}

TEST_CASE("principal_eigenpair: accelerated matches plain power iteration", "[solver]") {
    auto disc = Domain::ball(Vec(0.0, 0.0), 1.0);
    ScalingTriple t(ScalingFunction::constant(), ScalingFunction::constant(),
                    ScalingFunction::constant());
    KernelModel m(1.5, t, 0.0);
    GeneratorGrid g(m, disc, 1.0 / 12, SolverMode::Killed);
    auto fast = principal_eigenpair(g, true);
    auto plain = principal_eigenpair(g, false);
    CHECK(fast.lambda1 == Approx(plain.lambda1).epsilon(1e-5));
    for (std::size_t i = 0; i < g.n(); ++i)
        CHECK(fast.phi1[i] == Approx(plain.phi1[i]).margin(5e-3));

    // the accelerated pair satisfies the eigen equation at least as well
    auto residual = [&](const EigenPair& ep) {
        double nu = 1.0 - ep.lambda1 / g.uniformization_constant();
        std::vector<double> w(g.n());
        g.apply_phat(ep.phi1.data(), w.data(), 1);
        double r = 0.0;
        for (std::size_t i = 0; i < g.n(); ++i)
            r = std::max(r, std::abs(w[i] - nu * ep.phi1[i]));
        return r;
    };
    double rf = residual(fast), rp = residual(plain);
    CHECK(rf <= rp * 1.5 + 1e-12);
    CHECK(rf < 1e-6);
}
