#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "phtess/base.hpp"
#include "phtess/zonotope.hpp"

namespace phtess {

enum class DistributionKind { atoms, cuboid, isotropic_discretized, isotropic_closed_form };

inline const char* kind_name(DistributionKind k) {
    switch (k) {
        case DistributionKind::atoms: return "atoms";
        case DistributionKind::cuboid: return "cuboid";
        case DistributionKind::isotropic_discretized: return "isotropic-discretized";
        case DistributionKind::isotropic_closed_form: return "isotropic-closed-form";
    }
    return "?";
}

struct SimulationBlock {
    long replicates = 0;
    std::uint64_t seed = 0;
    double window_factor = 1.0;
    int workers = 1;
    int retry_cap = 6;
};

struct RunConfig {
    int dimension = 0;
    double intensity = 0.0;
    DistributionKind kind = DistributionKind::atoms;
    std::vector<SphereAtom> atoms;       // kind == atoms
    int discretization_n = 0;            // kind == isotropic_discretized
    std::vector<int> k_list;
    std::vector<std::pair<int, int>> moments; // (r, s) pairs
    std::optional<SimulationBlock> simulation;
    Tolerances tolerances;
    std::string out_dir = "out";
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                                const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) known = true;
        if (!known) throw ConfigError("config: unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
inline T require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError("config: missing key '" + std::string(key) + "' in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value for '" + std::string(key) + "' in " + where);
    }
}

template <class T>
inline T optional_value(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: bad value for '" + std::string(key) + "' in " + where);
    }
}

} // namespace detail

inline RunConfig parse_config(const std::string& text) {
    using detail::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    detail::reject_unknown_keys(
        root, {"dimension", "intensity", "distribution", "k", "moments", "simulation", "tolerances", "output"},
        "top level");

    RunConfig cfg;
    cfg.dimension = detail::require<int>(root, "dimension", "top level");
    if (cfg.dimension < 2) throw ConfigError("config: dimension must be >= 2");
    cfg.intensity = detail::require<double>(root, "intensity", "top level");
    if (!(cfg.intensity > 0.0)) throw ConfigError("config: intensity must be positive");

    const json& dj = root.contains("distribution") ? root.at("distribution") : json::object();
    if (!root.contains("distribution")) throw ConfigError("config: missing key 'distribution'");
    if (!dj.is_object()) throw ConfigError("config: 'distribution' must be an object");
    detail::reject_unknown_keys(dj, {"kind", "atoms", "n"}, "distribution");
    std::string kind = detail::require<std::string>(dj, "kind", "distribution");
    if (kind != "atoms" && dj.contains("atoms"))
        throw ConfigError("config: 'atoms' only applies to the atoms kind");
    if (kind != "isotropic-discretized" && dj.contains("n"))
        throw ConfigError("config: 'n' only applies to the isotropic-discretized kind");
    if (kind == "atoms") {
        cfg.kind = DistributionKind::atoms;
        if (!dj.contains("atoms")) throw ConfigError("config: distribution kind 'atoms' needs 'atoms'");
        for (const auto& aj : dj.at("atoms")) {
            if (!aj.is_object()) throw ConfigError("config: each atom must be an object");
            detail::reject_unknown_keys(aj, {"direction", "weight"}, "atom");
            SphereAtom atom;
            atom.direction = detail::require<std::vector<double>>(aj, "direction", "atom");
            atom.weight = detail::require<double>(aj, "weight", "atom");
            cfg.atoms.push_back(std::move(atom));
        }
    } else if (kind == "cuboid") {
        cfg.kind = DistributionKind::cuboid;
    } else if (kind == "isotropic-discretized") {
        cfg.kind = DistributionKind::isotropic_discretized;
        cfg.discretization_n = detail::require<int>(dj, "n", "distribution");
        if (cfg.discretization_n < cfg.dimension)
            throw ConfigError("config: isotropic discretization needs n >= dimension");
    } else if (kind == "isotropic-closed-form") {
        cfg.kind = DistributionKind::isotropic_closed_form;
    } else {
        throw ConfigError("config: unknown distribution kind '" + kind + "'");
    }

    if (root.contains("k")) {
        cfg.k_list = detail::require<std::vector<int>>(root, "k", "top level");
    } else {
        for (int k = 1; k <= cfg.dimension; ++k) cfg.k_list.push_back(k);
    }
    if (cfg.k_list.empty()) throw ConfigError("config: 'k' must not be empty");
    int kmax = 0;
    for (int k : cfg.k_list) {
        if (k < 1 || k > cfg.dimension) throw ConfigError("config: k values must lie in 1..dimension");
        kmax = std::max(kmax, k);
    }

    if (root.contains("moments")) {
        for (const auto& mj : root.at("moments")) {
            auto pair = [&]() -> std::pair<int, int> {
                try {
                    auto v = mj.get<std::vector<int>>();
                    if (v.size() != 2) throw ConfigError("config: each moment entry is a pair [r, s]");
                    return {v[0], v[1]};
                } catch (const detail::json::exception&) {
                    throw ConfigError("config: each moment entry is a pair [r, s]");
                }
            }();
            if (pair.first < 0 || pair.second < 0 || pair.first > kmax || pair.second > kmax)
                throw ConfigError("config: moment orders must lie in 0..max(k)");
            cfg.moments.push_back(pair);
        }
        if (cfg.moments.empty()) throw ConfigError("config: 'moments' must not be empty");
    } else {
        for (int r = 0; r <= kmax; ++r)
            for (int s = r; s <= kmax; ++s) cfg.moments.push_back({r, s});
    }

    if (root.contains("simulation")) {
        const json& sj = root.at("simulation");
        if (!sj.is_object()) throw ConfigError("config: 'simulation' must be an object");
        detail::reject_unknown_keys(sj, {"replicates", "seed", "window_factor", "workers", "retry_cap"},
                                    "simulation");
        SimulationBlock sim;
        sim.replicates = detail::require<long>(sj, "replicates", "simulation");
        if (sim.replicates < 1) throw ConfigError("config: replicates must be >= 1");
        sim.seed = detail::optional_value<std::uint64_t>(sj, "seed", 0, "simulation");
        sim.window_factor = detail::optional_value<double>(sj, "window_factor", 1.0, "simulation");
        if (!(sim.window_factor > 0.0)) throw ConfigError("config: window_factor must be positive");
        sim.workers = detail::optional_value<int>(sj, "workers", 1, "simulation");
        if (sim.workers < 1) throw ConfigError("config: workers must be >= 1");
        sim.retry_cap = detail::optional_value<int>(sj, "retry_cap", 6, "simulation");
        if (sim.retry_cap < 0) throw ConfigError("config: retry_cap must be >= 0");
        cfg.simulation = sim;
    }

    if (root.contains("tolerances")) {
        const json& tj = root.at("tolerances");
        if (!tj.is_object()) throw ConfigError("config: 'tolerances' must be an object");
        detail::reject_unknown_keys(
            tj, {"pivot_rel", "vertex_merge", "on_constraint", "unbounded_box_scale", "generator_cap"},
            "tolerances");
        cfg.tolerances.pivot_rel =
            detail::optional_value<double>(tj, "pivot_rel", cfg.tolerances.pivot_rel, "tolerances");
        cfg.tolerances.vertex_merge =
            detail::optional_value<double>(tj, "vertex_merge", cfg.tolerances.vertex_merge, "tolerances");
        cfg.tolerances.on_constraint =
            detail::optional_value<double>(tj, "on_constraint", cfg.tolerances.on_constraint, "tolerances");
        cfg.tolerances.unbounded_box_scale = detail::optional_value<double>(
            tj, "unbounded_box_scale", cfg.tolerances.unbounded_box_scale, "tolerances");
        cfg.tolerances.generator_cap =
            detail::optional_value<int>(tj, "generator_cap", cfg.tolerances.generator_cap, "tolerances");
    }

    if (root.contains("output")) {
        const json& oj = root.at("output");
        if (!oj.is_object()) throw ConfigError("config: 'output' must be an object");
        detail::reject_unknown_keys(oj, {"dir"}, "output");
        cfg.out_dir = detail::optional_value<std::string>(oj, "dir", cfg.out_dir, "output");
    }

    // atoms are validated by constructing the distribution
    if (cfg.kind == DistributionKind::atoms) {
        DirectionalDistribution probe(cfg.dimension, cfg.intensity, cfg.atoms);
        (void)probe;
    }
    return cfg;
}

// Canonical serialization: fixed key order, full-precision numbers. Parsing
// the output reproduces the config exactly.
inline std::string canonical_json(const RunConfig& cfg) {
    using detail::json;
    json root;
    root["dimension"] = cfg.dimension;
    root["intensity"] = cfg.intensity;
    json dj;
    dj["kind"] = kind_name(cfg.kind);
    if (cfg.kind == DistributionKind::atoms) {
        json atoms = json::array();
        for (const auto& a : cfg.atoms) {
            json aj;
            aj["direction"] = a.direction;
            aj["weight"] = a.weight;
            atoms.push_back(aj);
        }
        dj["atoms"] = atoms;
    }
    if (cfg.kind == DistributionKind::isotropic_discretized) dj["n"] = cfg.discretization_n;
    root["distribution"] = dj;
    root["k"] = cfg.k_list;
    json moments = json::array();
    for (const auto& [r, s] : cfg.moments) moments.push_back(json::array({r, s}));
    root["moments"] = moments;
    if (cfg.simulation) {
        json sj;
        sj["replicates"] = cfg.simulation->replicates;
        sj["seed"] = cfg.simulation->seed;
        sj["window_factor"] = cfg.simulation->window_factor;
        sj["workers"] = cfg.simulation->workers;
        sj["retry_cap"] = cfg.simulation->retry_cap;
        root["simulation"] = sj;
    }
    json tj;
    tj["pivot_rel"] = cfg.tolerances.pivot_rel;
    tj["vertex_merge"] = cfg.tolerances.vertex_merge;
    tj["on_constraint"] = cfg.tolerances.on_constraint;
    tj["unbounded_box_scale"] = cfg.tolerances.unbounded_box_scale;
    tj["generator_cap"] = cfg.tolerances.generator_cap;
    root["tolerances"] = tj;
    json oj;
    oj["dir"] = cfg.out_dir;
    root["output"] = oj;
    return root.dump(2) + "\n";
}

// Realizes the configured directional distribution; the closed-form kind has
// no atomic representation and is rejected here.
inline DirectionalDistribution make_distribution(const RunConfig& cfg) {
    switch (cfg.kind) {
        case DistributionKind::atoms:
            return DirectionalDistribution(cfg.dimension, cfg.intensity, cfg.atoms);
        case DistributionKind::cuboid:
            return cuboid_distribution(cfg.dimension, cfg.intensity);
        case DistributionKind::isotropic_discretized:
            return isotropic_discretized(cfg.dimension, cfg.discretization_n, cfg.intensity);
        case DistributionKind::isotropic_closed_form:
            throw ConfigError("config: the closed-form isotropic kind has no atomic realization; "
                              "use 'isotropic-discretized' for simulation");
    }
    throw ConfigError("config: unreachable distribution kind");
}

} // namespace phtess
