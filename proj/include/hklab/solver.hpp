#pragma once

// Exactly solvable lattice surrogate: discrete generator of the jump process
// on cell centers inside D, heat-kernel columns by uniformization, survival
// masses, and the principal eigenpair of the killed generator.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "hklab/common.hpp"
#include "hklab/geometry.hpp"
#include "hklab/kernel.hpp"

namespace hklab {

enum class SolverMode { Conservative, Killed };

inline const char* to_string(SolverMode m) {
    return m == SolverMode::Conservative ? "conservative" : "killed";
}

struct HeatKernelColumn {
    double t = 0.0;
    std::size_t source = 0;
    std::vector<double> masses;   // per-node masses of e^(tQ) e_source
    double density_scale = 1.0;   // 1/h^d; density = mass * density_scale

    double density(std::size_t i) const { return masses[i] * density_scale; }
};

class GeneratorGrid {
public:
    // Jump rates R(i,j) = J(x_i, x_j) h^d between cell centers inside D.
    // Killed mode adds the killing-potential rates and, for alpha > 1, an
    // absorption rate equal to the J-mass of the uncovered boundary sliver
    // D \ (union of cells with center in D): jumps landing between the last
    // cell layer and the boundary are treated as absorbed. This is what makes
    // the lattice chain lose mass the way the killed process does when
    // kappa0 = 0 and alpha > 1; with kill identically zero the killed grid
    // would be indistinguishable from the conservative one.
    GeneratorGrid(const KernelModel& m, const Domain& dom, double h, SolverMode mode)
        : h_(h), dim_(dom.dim()), mode_(mode), alpha_(m.alpha()) {
        if (!(h > 0.0)) throw config_error("build_generator: h must be > 0");
        if (mode == SolverMode::Killed && dom.shape() != DomainShape::Ball)
            throw config_error("build_generator: killed mode requires a ball domain");
        if (mode == SolverMode::Killed && m.alpha() <= 1.0 && m.kappa0() == 0.0)
            throw config_error("build_generator: killed mode with alpha <= 1 needs kappa0 > 0");

        collect_nodes(dom);
        if (nodes_.size() < 100)
            throw config_error("build_generator: fewer than 100 nodes at h = " +
                               std::to_string(h));
        if (nodes_.size() > 60000)
            throw config_error("build_generator: node cap (60000) exceeded");

        build_rates(m);
        build_kill(m, dom);

        total_rate_.assign(n(), 0.0);
        for (std::size_t i = 0; i < n(); ++i) {
            double s = kill_[i];
            for (std::size_t j = 0; j < n(); ++j)
                if (j != i) s += rate(i, j);
            total_rate_[i] = s;
        }
        lambda_ = *std::max_element(total_rate_.begin(), total_rate_.end());
    }

    std::size_t n() const { return nodes_.size(); }
    double h() const { return h_; }
    int dim() const { return dim_; }
    SolverMode mode() const { return mode_; }
    double uniformization_constant() const { return lambda_; }
    const std::vector<Vec>& nodes() const { return nodes_; }
    const std::vector<double>& kill() const { return kill_; }
    const std::vector<double>& node_dists() const { return dists_; }
    double total_rate(std::size_t i) const { return total_rate_[i]; }

    double rate(std::size_t i, std::size_t j) const {
        if (i == j) return 0.0;
        return rates_[packed_index(std::min(i, j), std::max(i, j))];
    }

    std::size_t nearest_node(const Vec& x) const {
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n(); ++i) {
            double d = distance(nodes_[i], x);
            if (d < bd) {
                bd = d;
                best = i;
            }
        }
        return best;
    }

    // y = (I + Q/Lambda) x, the uniformized substochastic step. Symmetric
    // because Q is. Block form: X and Y hold `k` interleaved vectors. The
    // row accumulation is unrolled into independent partial sums so the
    // floating add chain does not serialize the stream.
    void apply_phat(const double* x, double* y, std::size_t k) const {
        std::size_t N = n();
        for (std::size_t i = 0; i < N; ++i) {
            double diag = 1.0 - total_rate_[i] / lambda_;
            for (std::size_t c = 0; c < k; ++c) y[i * k + c] = diag * x[i * k + c];
        }

        unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        std::size_t nthreads = std::min<std::size_t>(hw, 8);
        if (N < 512) nthreads = 1;
        // balanced row ranges: row i owns N-1-i packed entries
        std::vector<std::size_t> starts{0};
        double total_work = 0.5 * static_cast<double>(N) * static_cast<double>(N - 1);
        double acc = 0.0;
        for (std::size_t i = 0; i < N && starts.size() < nthreads; ++i) {
            acc += static_cast<double>(N - 1 - i);
            if (acc >= total_work / static_cast<double>(nthreads) * starts.size())
                starts.push_back(i + 1);
        }
        starts.push_back(N);
        std::vector<std::vector<double>> partials(starts.size() - 1);
        std::vector<std::thread> pool;
        const double inv_lambda = 1.0 / lambda_;
        for (std::size_t tix = 0; tix + 1 < starts.size(); ++tix) {
            pool.emplace_back([&, tix] {
                std::size_t lo = starts[tix], hi = starts[tix + 1];
                std::vector<double>& part = partials[tix];
                part.assign(N * k, 0.0);
                if (k == 1) {
                    for (std::size_t i = lo; i < hi; ++i) {
                        const double* row = rates_.data() + packed_index(i, i + 1);
                        const double xi = x[i];
                        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
                        std::size_t len = N - i - 1, j = 0;
                        double* py = part.data() + i + 1;
                        const double* px = x + i + 1;
                        for (; j + 4 <= len; j += 4) {
                            double w0 = row[j] * inv_lambda;
                            double w1 = row[j + 1] * inv_lambda;
                            double w2 = row[j + 2] * inv_lambda;
                            double w3 = row[j + 3] * inv_lambda;
                            a0 += w0 * px[j];
                            a1 += w1 * px[j + 1];
                            a2 += w2 * px[j + 2];
                            a3 += w3 * px[j + 3];
                            py[j] += w0 * xi;
                            py[j + 1] += w1 * xi;
                            py[j + 2] += w2 * xi;
                            py[j + 3] += w3 * xi;
                        }
                        for (; j < len; ++j) {
                            double w = row[j] * inv_lambda;
                            a0 += w * px[j];
                            py[j] += w * xi;
                        }
                        part[i] += (a0 + a1) + (a2 + a3);
                    }
                } else {
                    std::vector<double> accv(k);
                    for (std::size_t i = lo; i < hi; ++i) {
                        const double* row = rates_.data() + packed_index(i, i + 1);
                        const double* xi = x + i * k;
                        std::fill(accv.begin(), accv.end(), 0.0);
                        for (std::size_t j = i + 1; j < N; ++j) {
                            double w = row[j - i - 1] * inv_lambda;
                            const double* xj = x + j * k;
                            double* yj = part.data() + j * k;
                            for (std::size_t c = 0; c < k; ++c) {
                                accv[c] += w * xj[c];
                                yj[c] += w * xi[c];
                            }
                        }
                        double* yi = part.data() + i * k;
                        for (std::size_t c = 0; c < k; ++c) yi[c] += accv[c];
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        for (const auto& part : partials)
            for (std::size_t i = 0; i < N * k; ++i) y[i] += part[i];
    }

    void hash_into(Fnv1a& h) const {
        h.add(h_).add_u64(static_cast<std::uint64_t>(mode_)).add_u64(n());
    }

    // --- cache io ---------------------------------------------------------
    // header {version, d, h, node count} + node coordinates + row-major rate
    // table, little-endian 64-bit floats. Kill rates and uniformization data
    // are recomputed on load (they derive from the model and mode).
    void write_cache(const std::filesystem::path& path) const {
        static_assert(std::endian::native == std::endian::little,
                      "cache format is little-endian");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cache: cannot open " + path.string());
        std::uint64_t version = 1, d = static_cast<std::uint64_t>(dim_), N = n();
        out.write(reinterpret_cast<const char*>(&version), 8);
        out.write(reinterpret_cast<const char*>(&d), 8);
        out.write(reinterpret_cast<const char*>(&h_), 8);
        out.write(reinterpret_cast<const char*>(&N), 8);
        for (const auto& p : nodes_)
            for (int i = 0; i < dim_; ++i) {
                double c = p[i];
                out.write(reinterpret_cast<const char*>(&c), 8);
            }
        std::vector<double> row(N);
        for (std::size_t i = 0; i < N; ++i) {
            for (std::size_t j = 0; j < N; ++j) row[j] = rate(i, j);
            out.write(reinterpret_cast<const char*>(row.data()),
                      static_cast<std::streamsize>(8 * N));
        }
        if (!out) throw std::runtime_error("cache: short write to " + path.string());
    }

    // Rebuild a grid from a cache file; kill vector and rates come from the
    // file/model exactly as a fresh build would produce them.
    static GeneratorGrid read_cache(const std::filesystem::path& path, const KernelModel& m,
                                    const Domain& dom, SolverMode mode) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cache: cannot open " + path.string());
        std::uint64_t version = 0, d = 0, N = 0;
        double h = 0.0;
        in.read(reinterpret_cast<char*>(&version), 8);
        in.read(reinterpret_cast<char*>(&d), 8);
        in.read(reinterpret_cast<char*>(&h), 8);
        in.read(reinterpret_cast<char*>(&N), 8);
        if (!in || version != 1) throw std::runtime_error("cache: bad header");
        GeneratorGrid g(m, h, mode, static_cast<int>(d), static_cast<std::size_t>(N));
        for (std::size_t i = 0; i < N; ++i) {
            Vec p = Vec::zero(static_cast<int>(d));
            for (std::uint64_t c = 0; c < d; ++c) in.read(reinterpret_cast<char*>(&p[static_cast<int>(c)]), 8);
            g.nodes_[i] = p;
        }
        std::vector<double> row(N);
        for (std::size_t i = 0; i < N; ++i) {
            in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(8 * N));
            for (std::size_t j = i + 1; j < N; ++j)
                g.rates_[g.packed_index(i, j)] = row[j];
        }
        if (!in) throw std::runtime_error("cache: truncated file");
        g.dists_.resize(N);
        for (std::size_t i = 0; i < N; ++i) g.dists_[i] = dom.dist_to_boundary(g.nodes_[i]);
        g.build_kill(m, dom);
        g.total_rate_.assign(N, 0.0);
        for (std::size_t i = 0; i < N; ++i) {
            double s = g.kill_[i];
            for (std::size_t j = 0; j < N; ++j)
                if (j != i) s += g.rate(i, j);
            g.total_rate_[i] = s;
        }
        g.lambda_ = *std::max_element(g.total_rate_.begin(), g.total_rate_.end());
        return g;
    }

private:
    // raw shell for read_cache
    GeneratorGrid(const KernelModel& m, double h, SolverMode mode, int d, std::size_t N)
        : h_(h), dim_(d), mode_(mode), alpha_(m.alpha()) {
        nodes_.resize(N);
        rates_.assign(N * (N - 1) / 2, 0.0);
        kill_.assign(N, 0.0);
    }

    std::size_t packed_index(std::size_t i, std::size_t j) const {
        // strictly upper triangle, row-major: row i starts at i*N - i(i+1)/2 - i
        std::size_t N = nodes_.size();
        return i * N - i * (i + 1) / 2 + (j - i - 1);
    }

    void collect_nodes(const Domain& dom) {
        Vec lo, hi;
        if (dom.shape() == DomainShape::Ball) {
            lo = dom.ball_center();
            hi = dom.ball_center();
            for (int c = 0; c < dim_; ++c) {
                lo[c] -= dom.ball_radius();
                hi[c] += dom.ball_radius();
            }
        } else {
            lo = dom.box_lo();
            hi = dom.box_hi();
        }
        std::array<long, 3> klo{}, khi{};
        for (int c = 0; c < dim_; ++c) {
            klo[static_cast<std::size_t>(c)] = static_cast<long>(std::floor(lo[c] / h_)) - 1;
            khi[static_cast<std::size_t>(c)] = static_cast<long>(std::ceil(hi[c] / h_)) + 1;
        }
        auto push_if_inside = [&](const Vec& p) {
            if (dom.contains(p) && dom.dist_to_boundary(p) > 0.0) {
                nodes_.push_back(p);
                dists_.push_back(dom.dist_to_boundary(p));
            }
        };
        if (dim_ == 2) {
            for (long i = klo[0]; i <= khi[0]; ++i)
                for (long j = klo[1]; j <= khi[1]; ++j)
                    push_if_inside(Vec((static_cast<double>(i) + 0.5) * h_,
                                       (static_cast<double>(j) + 0.5) * h_));
        } else {
            for (long i = klo[0]; i <= khi[0]; ++i)
                for (long j = klo[1]; j <= khi[1]; ++j)
                    for (long k = klo[2]; k <= khi[2]; ++k)
                        push_if_inside(Vec((static_cast<double>(i) + 0.5) * h_,
                                           (static_cast<double>(j) + 0.5) * h_,
                                           (static_cast<double>(k) + 0.5) * h_));
        }
    }

    void build_rates(const KernelModel& m) {
        std::size_t N = n();
        rates_.assign(N * (N - 1) / 2, 0.0);
        double hd = std::pow(h_, dim_);
        parallel_for(N, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                double di = dists_[i];
                for (std::size_t j = i + 1; j < N; ++j) {
                    double r = distance(nodes_[i], nodes_[j]);
                    double dj = dists_[j];
                    double B = m.B_from_dists(std::min(di, dj), std::max(di, dj), r);
                    rates_[packed_index(i, j)] =
                        B * std::pow(r, -static_cast<double>(dim_) - alpha_) * hd;
                }
            }
        }, 8);
    }

    void build_kill(const KernelModel& m, const Domain& dom) {
        std::size_t N = n();
        kill_.assign(N, 0.0);
        if (mode_ == SolverMode::Conservative) return;
        if (m.kappa0() > 0.0)
            for (std::size_t i = 0; i < N; ++i) kill_[i] = m.kappa_eval(dom, nodes_[i]);
        if (alpha_ <= 1.0) return;

        // boundary-sliver absorption: subsample D \ (covered cells)
        std::vector<Vec> pts;
        std::vector<double> wts;
        const int ns = 4;
        double subw = std::pow(h_ / ns, dim_);
        auto visit_cell = [&](const Vec& center) {
            if (dom.contains(center)) return;  // covered cell
            // cell may still intersect D; subsample
            if (dim_ == 2) {
                for (int a = 0; a < ns; ++a)
                    for (int b = 0; b < ns; ++b) {
                        Vec p(center[0] + (a + 0.5) * h_ / ns - h_ / 2,
                              center[1] + (b + 0.5) * h_ / ns - h_ / 2);
                        if (dom.contains(p) && dom.dist_to_boundary(p) > 0.0) {
                            pts.push_back(p);
                            wts.push_back(subw);
                        }
                    }
            } else {
                for (int a = 0; a < ns; ++a)
                    for (int b = 0; b < ns; ++b)
                        for (int c = 0; c < ns; ++c) {
                            Vec p(center[0] + (a + 0.5) * h_ / ns - h_ / 2,
                                  center[1] + (b + 0.5) * h_ / ns - h_ / 2,
                                  center[2] + (c + 0.5) * h_ / ns - h_ / 2);
                            if (dom.contains(p) && dom.dist_to_boundary(p) > 0.0) {
                                pts.push_back(p);
                                wts.push_back(subw);
                            }
                        }
            }
        };
        // sweep one-cell collar around the domain bounding lattice
        Vec lo = dom.ball_center(), hi = dom.ball_center();
        for (int c = 0; c < dim_; ++c) {
            lo[c] -= dom.ball_radius() + h_;
            hi[c] += dom.ball_radius() + h_;
        }
        if (dim_ == 2) {
            for (long i = static_cast<long>(std::floor(lo[0] / h_)); i <= static_cast<long>(std::ceil(hi[0] / h_)); ++i)
                for (long j = static_cast<long>(std::floor(lo[1] / h_)); j <= static_cast<long>(std::ceil(hi[1] / h_)); ++j)
                    visit_cell(Vec((static_cast<double>(i) + 0.5) * h_,
                                   (static_cast<double>(j) + 0.5) * h_));
        } else {
            for (long i = static_cast<long>(std::floor(lo[0] / h_)); i <= static_cast<long>(std::ceil(hi[0] / h_)); ++i)
                for (long j = static_cast<long>(std::floor(lo[1] / h_)); j <= static_cast<long>(std::ceil(hi[1] / h_)); ++j)
                    for (long k = static_cast<long>(std::floor(lo[2] / h_)); k <= static_cast<long>(std::ceil(hi[2] / h_)); ++k)
                        visit_cell(Vec((static_cast<double>(i) + 0.5) * h_,
                                       (static_cast<double>(j) + 0.5) * h_,
                                       (static_cast<double>(k) + 0.5) * h_));
        }
        std::vector<double> pt_dists(pts.size());
        for (std::size_t p = 0; p < pts.size(); ++p) pt_dists[p] = dom.dist_to_boundary(pts[p]);
        parallel_for(N, [&](std::size_t a, std::size_t b) {
            for (std::size_t i = a; i < b; ++i) {
                double di = dists_[i];
                double acc = 0.0;
                for (std::size_t p = 0; p < pts.size(); ++p) {
                    double r = distance(nodes_[i], pts[p]);
                    double dp = pt_dists[p];
                    double B = m.B_from_dists(std::min(di, dp), std::max(di, dp), r);
                    acc += B * std::pow(r, -static_cast<double>(dim_) - alpha_) * wts[p];
                }
                kill_[i] += acc;
            }
        }, 8);
    }

    double h_;
    int dim_;
    SolverMode mode_;
    double alpha_;
    std::vector<Vec> nodes_;
    std::vector<double> dists_;
    std::vector<double> rates_;  // strictly upper triangle, row-major
    std::vector<double> kill_;
    std::vector<double> total_rate_;
    double lambda_ = 0.0;
};

inline GeneratorGrid build_generator(const KernelModel& m, const Domain& dom, double h,
                                     SolverMode mode) {
    return GeneratorGrid(m, dom, h, mode);
}

namespace detail {

// v <- e^(tQ) v for a block of k interleaved vectors, by the Poisson series
// over powers of the uniformized step. Truncation: the series stops once the
// accumulated Poisson mass reaches 1 - tol, so the dropped tail is < tol in
// total variation. k_pad forces extra terms past the stopping point.
inline void uniformized_propagate(const GeneratorGrid& g, std::vector<double>& block,
                                  std::size_t k, double t, double tol, int k_pad = 0) {
    double lt = g.uniformization_constant() * t;
    if (lt > 1e5)
        throw numeric_error("heat_kernel_column: Lambda*t = " + std::to_string(lt) +
                            " exceeds the 1e5 guard");
    std::size_t N = g.n();
    std::vector<double> acc(N * k, 0.0), next(N * k, 0.0);
    double cum = 0.0;
    int kmax = 16 + static_cast<int>(lt + 12.0 * std::sqrt(lt + 1.0));
    int stop_k = -1;
    for (int kk = 0;; ++kk) {
        double lw = -lt + kk * std::log(std::max(lt, 1e-300)) - std::lgamma(kk + 1.0);
        double w = std::exp(lw);
        if (lt == 0.0) w = (kk == 0) ? 1.0 : 0.0;
        if (w > 0.0)
            for (std::size_t i = 0; i < N * k; ++i) acc[i] += w * block[i];
        cum += w;
        if (stop_k < 0 && cum >= 1.0 - tol) stop_k = kk;
        if (stop_k >= 0 && kk >= stop_k + k_pad) break;
        if (kk > kmax + k_pad)
            throw numeric_error("heat_kernel_column: Poisson series failed to accumulate");
        g.apply_phat(block.data(), next.data(), k);
        block.swap(next);
    }
    block.swap(acc);
}

}  // namespace detail

inline HeatKernelColumn heat_kernel_column(const GeneratorGrid& g, std::size_t source, double t,
                                           double tol, int k_pad = 0) {
    if (!(t > 0.0)) throw std::domain_error("heat_kernel_column: t must be > 0");
    if (source >= g.n()) throw std::out_of_range("heat_kernel_column: bad source index");
    std::vector<double> v(g.n(), 0.0);
    v[source] = 1.0;
    detail::uniformized_propagate(g, v, 1, t, tol, k_pad);
    HeatKernelColumn col;
    col.t = t;
    col.source = source;
    col.masses = std::move(v);
    col.density_scale = std::pow(g.h(), -g.dim());
    return col;
}

// Several sources propagated together (one pass over the rate table per
// series term).
inline std::vector<HeatKernelColumn> heat_kernel_columns(const GeneratorGrid& g,
                                                         const std::vector<std::size_t>& sources,
                                                         double t, double tol) {
    if (!(t > 0.0)) throw std::domain_error("heat_kernel_columns: t must be > 0");
    std::size_t k = sources.size();
    std::vector<double> block(g.n() * k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        if (sources[c] >= g.n()) throw std::out_of_range("heat_kernel_columns: bad source");
        block[sources[c] * k + c] = 1.0;
    }
    detail::uniformized_propagate(g, block, k, t, tol);
    std::vector<HeatKernelColumn> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        out[c].t = t;
        out[c].source = sources[c];
        out[c].density_scale = std::pow(g.h(), -g.dim());
        out[c].masses.resize(g.n());
        for (std::size_t i = 0; i < g.n(); ++i) out[c].masses[i] = block[i * k + c];
    }
    return out;
}

// Remaining mass at time t per starting node; killed mode only.
inline std::vector<double> survival_vector(const GeneratorGrid& g, double t, double tol) {
    if (g.mode() != SolverMode::Killed)
        throw std::logic_error("survival_vector: killed mode only");
    if (!(t > 0.0)) throw std::domain_error("survival_vector: t must be > 0");
    std::vector<double> v(g.n(), 1.0);
    detail::uniformized_propagate(g, v, 1, t, tol);
    for (double& x : v) x = std::min(x, 1.0);
    return v;
}

struct EigenPair {
    double lambda1 = 0.0;            // decay rate: largest eigenvalue of -Q
    std::vector<double> phi1;        // positive, sup-norm 1
    int iterations = 0;              // matrix applications spent
};

// Power iteration on the uniformized step; lambda1 = Lambda (1 - nu_max).
// With acceleration (the default) each outer power step applies a Chebyshev
// filter in P-hat that damps the spectrum below the current Rayleigh
// quotient; plain power iteration needs ~Lambda/gap steps, which runs to
// tens of thousands on fine grids where the boundary absorption rates
// dominate Lambda. The iterate stays a polynomial in P-hat applied to a
// positive vector, so the Perron direction and every output contract are
// unchanged; a unit test pins the accelerated result to the plain one.
inline EigenPair principal_eigenpair(const GeneratorGrid& g, bool accelerate = true) {
    if (g.mode() != SolverMode::Killed)
        throw std::logic_error("principal_eigenpair: killed mode only");
    bool any_kill = false;
    for (double k : g.kill())
        if (k > 0.0) any_kill = true;
    if (!any_kill)
        throw std::logic_error("principal_eigenpair: generator has no killing");

    std::size_t N = g.n();
    std::vector<double> v(N), w(N, 0.0);
    // warm start near the expected boundary profile
    for (std::size_t i = 0; i < N; ++i) v[i] = std::sqrt(g.node_dists()[i]);
    auto normalize = [&](std::vector<double>& x) {
        double nrm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
        for (double& e : x) e /= nrm;
    };
    normalize(v);
    auto rayleigh = [&](const std::vector<double>& x) {
        g.apply_phat(x.data(), w.data(), 1);
        return std::inner_product(x.begin(), x.end(), w.begin(), 0.0) /
               std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
    };

    const int max_apply = 100000;
    int applied = 0;
    double nu = 0.0;
    // a few plain steps to seed the Rayleigh quotient
    for (int k = 0; k < 20; ++k) {
        g.apply_phat(v.data(), w.data(), 1);
        ++applied;
        v.swap(w);
        normalize(v);
    }
    nu = rayleigh(v);
    ++applied;

    int streak = 0;
    while (applied < max_apply) {
        if (!accelerate) {
            g.apply_phat(v.data(), w.data(), 1);
            ++applied;
            v.swap(w);
            normalize(v);
        } else {
            // degree-m Chebyshev filter on [-1, cut]; cut sits just below the
            // Rayleigh quotient, which never exceeds nu_max
            double cut = nu - std::max(0.5 * (1.0 - nu), 1e-13);
            double half_span = 0.5 * (cut + 1.0);
            double center = 0.5 * (cut - 1.0);
            const int m = 64;
            std::vector<double> tk(v), tk1(N);  // T_0 x = x
            g.apply_phat(tk.data(), tk1.data(), 1);
            ++applied;
            for (std::size_t i = 0; i < N; ++i)
                tk1[i] = (tk1[i] - center * tk[i]) / half_span;  // T_1 x
            std::vector<double> next(N);
            for (int k = 1; k < m && applied < max_apply; ++k) {
                g.apply_phat(tk1.data(), next.data(), 1);
                ++applied;
                double scale = 2.0 / half_span;
                for (std::size_t i = 0; i < N; ++i)
                    next[i] = scale * (next[i] - center * tk1[i]) - tk[i];
                tk.swap(tk1);
                tk1.swap(next);
                // keep magnitudes in range; direction is all that matters
                double mx = 0.0;
                for (double e : tk1) mx = std::max(mx, std::abs(e));
                if (mx > 1e100) {
                    for (std::size_t i = 0; i < N; ++i) {
                        tk1[i] /= mx;
                        tk[i] /= mx;
                    }
                }
            }
            v.swap(tk1);
            normalize(v);
        }
        double nu_next = rayleigh(v);
        ++applied;
        if (std::abs(nu_next - nu) <= 1e-8 * std::abs(nu_next)) {
            if (++streak >= 3) {
                nu = nu_next;
                break;
            }
        } else {
            streak = 0;
        }
        nu = nu_next;
    }
    if (applied >= max_apply)
        throw numeric_error("principal_eigenpair: no convergence within 1e5 applications");
    double sup = *std::max_element(v.begin(), v.end());
    EigenPair ep;
    ep.lambda1 = g.uniformization_constant() * (1.0 - nu);
    ep.iterations = applied;
    ep.phi1.resize(N);
    for (std::size_t i = 0; i < N; ++i) {
        ep.phi1[i] = v[i] / sup;
        if (!(ep.phi1[i] > 0.0))
            throw numeric_error("principal_eigenpair: eigenvector not strictly positive");
    }
    return ep;
}

// --- cache keying ----------------------------------------------------------

inline std::string cache_key(const KernelModel& m, const Domain& dom, double h,
                             SolverMode mode) {
    Fnv1a mh;
    m.hash_into(mh);
    Fnv1a dh;
    dom.hash_into(dh);
    std::uint64_t hbits;
    std::memcpy(&hbits, &h, 8);
    char buf[128];
    std::snprintf(buf, sizeof buf, "grid_%016llx_%016llx_%016llx_%s.bin",
                  static_cast<unsigned long long>(mh.value()),
                  static_cast<unsigned long long>(dh.value()),
                  static_cast<unsigned long long>(hbits), to_string(mode));
    return buf;
}

// Build through the cache directory: load on hit, build+store on miss.
inline GeneratorGrid cached_generator(const KernelModel& m, const Domain& dom, double h,
                                      SolverMode mode, const std::filesystem::path& cache_dir) {
    std::filesystem::create_directories(cache_dir);
    auto path = cache_dir / cache_key(m, dom, h, mode);
    if (std::filesystem::exists(path)) return GeneratorGrid::read_cache(path, m, dom, mode);
    GeneratorGrid g(m, dom, h, mode);
    g.write_cache(path);
    return g;
}

}  // namespace hklab
