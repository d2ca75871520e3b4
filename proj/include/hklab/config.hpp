#pragma once

// Plain-text experiment configuration: `key = value` lines, `#` comments.
// The grammar is documented in the README. Unknown keys are rejected so a
// typo cannot silently change an experiment.

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hklab/common.hpp"
#include "hklab/geometry.hpp"
#include "hklab/kernel.hpp"
#include "hklab/quadrature.hpp"
#include "hklab/scaling.hpp"
#include "hklab/solver.hpp"

namespace hklab {

enum class ExperimentKind {
    LemmaEquivalence,
    RegimeDichotomy,
    NonDominanceTrend,
    SolverVsEnvelope,
    SurvivalProfile,
    EigenProfile,
    KillingConstantTable,
    ScalingAudit,
};

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::LemmaEquivalence: return "lemma_equivalence";
        case ExperimentKind::RegimeDichotomy: return "regime_dichotomy";
        case ExperimentKind::NonDominanceTrend: return "non_dominance_trend";
        case ExperimentKind::SolverVsEnvelope: return "solver_vs_envelope";
        case ExperimentKind::SurvivalProfile: return "survival_profile";
        case ExperimentKind::EigenProfile: return "eigen_profile";
        case ExperimentKind::KillingConstantTable: return "killing_constant_table";
        case ExperimentKind::ScalingAudit: return "scaling_audit";
    }
    return "?";
}

struct SamplingSpec {
    int n_triples = 100;
    double delta_floor = 1e-4;
    std::vector<double> t_grid{0.01};
    std::uint64_t seed = 1;
};

struct SolverSpec {
    double h = 1.0 / 16;
    SolverMode mode = SolverMode::Conservative;
    double tol = 1e-9;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::LemmaEquivalence;

    double alpha = 1.0;
    double kappa0 = 0.0;
    ScalingFunction phi1 = ScalingFunction::constant();
    ScalingFunction phi2 = ScalingFunction::constant();
    ScalingFunction ell = ScalingFunction::constant();

    DomainShape shape = DomainShape::Ball;
    Vec center{0.0, 0.0};
    double radius = 1.0;
    Vec box_min{0.0, 0.0};
    Vec box_max{1.0, 1.0};

    SamplingSpec sampling;
    QuadratureSpec quadrature;
    SolverSpec solver;

    std::string output_dir = "out";
    std::string cache_dir = "hklab-cache";
    double spread_cap = 50.0;

    // experiment-specific knobs
    double trend_delta = 0.3;
    double trend_r = 1.0;
    double audit_tolerance = 0.05;
    int audit_grid_size = 128;
    double audit_epsilon = 0.1;
    double killing_p_min = -1.0;  // default: (alpha-1)+ resolved at run time
    double killing_p_max = -1.0;  // default: alpha + beta1 - 0.05
    double killing_p_step = 0.1;
    int killing_dim = 2;
    double survival_slope_tol = 0.1;
    double eigen_spread_cap = 20.0;

    KernelModel build_model() const {
        return KernelModel(alpha, ScalingTriple(phi1, phi2, ell), kappa0);
    }
    Domain build_domain() const {
        if (shape == DomainShape::Ball) return Domain::ball(center, radius);
        return Domain::box(box_min, box_max);
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw config_error("config: bad number '" + s + "' for " + key);
    }
}

inline ScalingFunction parse_scaling(const std::string& value, const std::string& key) {
    auto toks = split_ws(value);
    if (toks.empty()) throw config_error("config: empty scaling spec for " + key);
    auto take_indices = [&](std::size_t at) -> std::optional<std::pair<double, double>> {
        if (at >= toks.size()) return std::nullopt;
        if (toks[at] != "indices")
            throw config_error("config: trailing tokens in scaling spec for " + key);
        if (toks.size() != at + 3)
            throw config_error("config: indices needs two numbers in " + key);
        return std::make_pair(parse_double(toks[at + 1], key), parse_double(toks[at + 2], key));
    };
    if (toks[0] == "constant") {
        if (toks.size() != 1)
            throw config_error("config: constant takes no arguments in " + key);
        return ScalingFunction::constant();
    }
    if (toks[0] == "powerlog") {
        if (toks.size() != 3 && toks.size() != 6)
            throw config_error("config: powerlog needs beta gamma [indices lo hi] in " + key);
        auto f = ScalingFunction::power_log(parse_double(toks[1], key),
                                            parse_double(toks[2], key));
        if (auto idx = take_indices(3)) f = f.with_declared_indices(idx->first, idx->second);
        return f;
    }
    if (toks[0] == "table") {
        // table r:v r:v ... indices lo hi
        std::vector<std::pair<double, double>> knots;
        std::size_t i = 1;
        for (; i < toks.size() && toks[i] != "indices"; ++i) {
            auto colon = toks[i].find(':');
            if (colon == std::string::npos)
                throw config_error("config: table entries are r:v in " + key);
            knots.emplace_back(parse_double(toks[i].substr(0, colon), key),
                               parse_double(toks[i].substr(colon + 1), key));
        }
        auto idx = take_indices(i);
        if (!idx) throw config_error("config: table requires indices lo hi in " + key);
        return ScalingFunction::user_table(knots, idx->first, idx->second);
    }
    throw config_error("config: unknown scaling family '" + toks[0] + "' in " + key);
}

inline Vec parse_vec(const std::string& value, const std::string& key) {
    auto toks = split_ws(value);
    if (toks.size() == 2)
        return Vec(parse_double(toks[0], key), parse_double(toks[1], key));
    if (toks.size() == 3)
        return Vec(parse_double(toks[0], key), parse_double(toks[1], key),
                   parse_double(toks[2], key));
    throw config_error("config: " + key + " needs 2 or 3 coordinates");
}

}  // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::map<std::string, std::string> seen;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config: line " + std::to_string(lineno) + " is not key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw config_error("config: line " + std::to_string(lineno) + " missing key or value");
        if (!seen.emplace(key, value).second)
            throw config_error("config: duplicate key " + key);

        using detail::parse_double;
        if (key == "experiment") {
            bool ok = false;
            for (auto k : {ExperimentKind::LemmaEquivalence, ExperimentKind::RegimeDichotomy,
                           ExperimentKind::NonDominanceTrend, ExperimentKind::SolverVsEnvelope,
                           ExperimentKind::SurvivalProfile, ExperimentKind::EigenProfile,
                           ExperimentKind::KillingConstantTable, ExperimentKind::ScalingAudit})
                if (value == to_string(k)) {
                    cfg.experiment = k;
                    ok = true;
                }
            if (!ok) throw config_error("config: unknown experiment '" + value + "'");
        } else if (key == "model.alpha") {
            cfg.alpha = parse_double(value, key);
        } else if (key == "model.kappa0") {
            cfg.kappa0 = parse_double(value, key);
        } else if (key == "model.phi1") {
            cfg.phi1 = detail::parse_scaling(value, key);
        } else if (key == "model.phi2") {
            cfg.phi2 = detail::parse_scaling(value, key);
        } else if (key == "model.ell") {
            cfg.ell = detail::parse_scaling(value, key);
        } else if (key == "domain.shape") {
            if (value == "ball")
                cfg.shape = DomainShape::Ball;
            else if (value == "box")
                cfg.shape = DomainShape::Box;
            else
                throw config_error("config: unknown domain.shape '" + value + "'");
        } else if (key == "domain.center") {
            cfg.center = detail::parse_vec(value, key);
        } else if (key == "domain.radius") {
            cfg.radius = parse_double(value, key);
        } else if (key == "domain.min") {
            cfg.box_min = detail::parse_vec(value, key);
        } else if (key == "domain.max") {
            cfg.box_max = detail::parse_vec(value, key);
        } else if (key == "sampling.n_triples") {
            cfg.sampling.n_triples = static_cast<int>(parse_double(value, key));
        } else if (key == "sampling.delta_floor") {
            cfg.sampling.delta_floor = parse_double(value, key);
        } else if (key == "sampling.t_grid") {
            cfg.sampling.t_grid.clear();
            for (const auto& tok : detail::split_ws(value))
                cfg.sampling.t_grid.push_back(parse_double(tok, key));
            if (cfg.sampling.t_grid.empty())
                throw config_error("config: sampling.t_grid is empty");
        } else if (key == "sampling.seed") {
            cfg.sampling.seed = static_cast<std::uint64_t>(parse_double(value, key));
        } else if (key == "quadrature.rel_tol") {
            cfg.quadrature.rel_tol = parse_double(value, key);
        } else if (key == "quadrature.abs_tol") {
            cfg.quadrature.abs_tol = parse_double(value, key);
        } else if (key == "quadrature.max_subdivisions") {
            cfg.quadrature.max_subdivisions = static_cast<int>(parse_double(value, key));
        } else if (key == "solver.h") {
            cfg.solver.h = parse_double(value, key);
        } else if (key == "solver.mode") {
            if (value == "conservative")
                cfg.solver.mode = SolverMode::Conservative;
            else if (value == "killed")
                cfg.solver.mode = SolverMode::Killed;
            else
                throw config_error("config: unknown solver.mode '" + value + "'");
        } else if (key == "solver.tol") {
            cfg.solver.tol = parse_double(value, key);
        } else if (key == "output_dir") {
            cfg.output_dir = value;
        } else if (key == "cache.dir") {
            cfg.cache_dir = value;
        } else if (key == "spread_cap") {
            cfg.spread_cap = parse_double(value, key);
        } else if (key == "trend.delta") {
            cfg.trend_delta = parse_double(value, key);
        } else if (key == "trend.r") {
            cfg.trend_r = parse_double(value, key);
        } else if (key == "audit.tolerance") {
            cfg.audit_tolerance = parse_double(value, key);
        } else if (key == "audit.grid_size") {
            cfg.audit_grid_size = static_cast<int>(parse_double(value, key));
        } else if (key == "audit.epsilon") {
            cfg.audit_epsilon = parse_double(value, key);
        } else if (key == "killing.p_min") {
            cfg.killing_p_min = parse_double(value, key);
        } else if (key == "killing.p_max") {
            cfg.killing_p_max = parse_double(value, key);
        } else if (key == "killing.p_step") {
            cfg.killing_p_step = parse_double(value, key);
        } else if (key == "killing.dim") {
            cfg.killing_dim = static_cast<int>(parse_double(value, key));
        } else if (key == "survival.slope_tol") {
            cfg.survival_slope_tol = parse_double(value, key);
        } else if (key == "eigen.spread_cap") {
            cfg.eigen_spread_cap = parse_double(value, key);
        } else {
            throw config_error("config: unknown key '" + key + "'");
        }
    }
    if (cfg.sampling.n_triples < 1) throw config_error("config: sampling.n_triples >= 1");
    cfg.quadrature.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace hklab
