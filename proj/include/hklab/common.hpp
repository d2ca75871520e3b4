#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hklab {

// Thrown when an experiment configuration cannot be parsed or validated.
// The CLI maps this to exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a quadrature, series, or iteration fails to converge.
// The CLI maps this to exit code 3.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Thrown when a root-finding problem has no solution in its feasible range.
struct infeasible_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Point in R^d, d in {2,3}. Fixed storage, runtime dimension.
class Vec {
public:
    Vec() = default;
    Vec(double x, double y) : v_{x, y, 0.0}, dim_(2) {}
    Vec(double x, double y, double z) : v_{x, y, z}, dim_(3) {}
    static Vec zero(int dim) {
        Vec p;
        p.dim_ = dim;
        return p;
    }

    int dim() const { return dim_; }
    double operator[](int i) const { return v_[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return v_[static_cast<std::size_t>(i)]; }

    Vec operator+(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim_; ++i) r.v_[static_cast<std::size_t>(i)] += o[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r = *this;
        for (int i = 0; i < dim_; ++i) r.v_[static_cast<std::size_t>(i)] -= o[i];
        return r;
    }
    Vec operator*(double s) const {
        Vec r = *this;
        for (int i = 0; i < dim_; ++i) r.v_[static_cast<std::size_t>(i)] *= s;
        return r;
    }
    double dot(const Vec& o) const {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) s += v_[static_cast<std::size_t>(i)] * o[i];
        return s;
    }
    double norm() const { return std::sqrt(dot(*this)); }

    bool operator==(const Vec& o) const {
        if (dim_ != o.dim_) return false;
        for (int i = 0; i < dim_; ++i)
            if (v_[static_cast<std::size_t>(i)] != o[i]) return false;
        return true;
    }

private:
    std::array<double, 3> v_{0.0, 0.0, 0.0};
    int dim_ = 2;
};

inline double distance(const Vec& a, const Vec& b) { return (a - b).norm(); }

// splitmix64: deterministic across platforms, unlike std::uniform_real_distribution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    // uniform in [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // log-uniform in [lo,hi], lo>0
    double log_uniform(double lo, double hi) {
        return std::exp(uniform(std::log(lo), std::log(hi)));
    }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

private:
    std::uint64_t state_;
};

// Static-partition parallel loop over [0, n). Falls back to serial for small n.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                         std::size_t min_grain = 1024) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw < 2 || n < 2 * min_grain) {
        body(0, n);
        return;
    }
    std::size_t nthreads = std::min<std::size_t>(hw, (n + min_grain - 1) / min_grain);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        std::size_t lo = t * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

// FNV-1a over the byte image of doubles/strings; used for cache keys.
class Fnv1a {
public:
    Fnv1a& add(double x) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(x));
        std::memcpy(&bits, &x, sizeof(bits));
        return add_u64(bits);
    }
    Fnv1a& add_u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            hash_ ^= (v >> (8 * i)) & 0xffu;
            hash_ *= 0x100000001b3ull;
        }
        return *this;
    }
    Fnv1a& add(const std::string& s) {
        for (unsigned char c : s) {
            hash_ ^= c;
            hash_ *= 0x100000001b3ull;
        }
        return *this;
    }
    std::uint64_t value() const { return hash_; }

private:
    std::uint64_t hash_ = 0xcbf29ce484222325ull;
};

}  // namespace hklab
