#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "phtess/base.hpp"
#include "phtess/geometry.hpp"
#include "phtess/oracle.hpp"
#include "phtess/rng.hpp"
#include "phtess/zonotope.hpp"

namespace phtess {

struct ProcessSample {
    std::vector<Hyperplane> hyperplanes;
    double window_radius = 0.0;
    std::uint64_t replicate = 0;
};

inline std::vector<double> cumulative_weights(const DirectionalDistribution& dist) {
    std::vector<double> cum;
    cum.reserve(dist.atoms.size());
    double acc = 0.0;
    for (const auto& a : dist.atoms) {
        acc += a.weight;
        cum.push_back(acc);
    }
    cum.back() = 1.0;
    return cum;
}

// Poisson sample of the hyperplanes hitting B(0, R): count with mean
// intensity * 2R, directions by atom weight with a fair sign, offsets uniform
// on [-R, R] and bounded away from 0.
inline ProcessSample sample_process(const DirectionalDistribution& dist, double window_radius,
                                    Rng& rng, const std::vector<double>* cum = nullptr) {
    std::vector<double> local;
    if (!cum) {
        local = cumulative_weights(dist);
        cum = &local;
    }
    ProcessSample s;
    s.window_radius = window_radius;
    int n = rng.poisson(dist.intensity * 2.0 * window_radius);
    s.hyperplanes.reserve(n);
    for (int i = 0; i < n; ++i) {
        int a = rng.discrete(*cum);
        double sign = rng.coin() ? 1.0 : -1.0;
        double offset;
        do {
            offset = rng.uniform(-window_radius, window_radius);
        } while (std::abs(offset) <= 1e-12);
        s.hyperplanes.push_back({scaled(dist.atoms[a].direction, sign), offset});
    }
    return s;
}

// Adds the hyperplanes hitting the shell between the old and new radius, so
// a window retry stays on the same underlying realization. Retrying with an
// independent resample would under-represent large cells.
inline void extend_sample(ProcessSample& s, const DirectionalDistribution& dist, double new_radius,
                          Rng& rng, const std::vector<double>* cum = nullptr) {
    std::vector<double> local;
    if (!cum) {
        local = cumulative_weights(dist);
        cum = &local;
    }
    double old_radius = s.window_radius;
    if (new_radius <= old_radius) return;
    int n = rng.poisson(dist.intensity * 2.0 * (new_radius - old_radius));
    for (int i = 0; i < n; ++i) {
        int a = rng.discrete(*cum);
        double sign = rng.coin() ? 1.0 : -1.0;
        double mag = rng.uniform(old_radius, new_radius);
        double offset = (rng.coin() ? 1.0 : -1.0) * mag;
        s.hyperplanes.push_back({scaled(dist.atoms[a].direction, sign), offset});
    }
    s.window_radius = new_radius;
}

struct ZeroCellResult {
    enum class Status { ok, window_too_small, unbounded };
    Status status = Status::window_too_small;
    VPolytope cell;
    std::vector<Halfspace> support; // halfspaces that determine the cell
};

// Cell of the induced tessellation containing the origin. Constraints are
// consumed nearest-first; the prefix grows until no excluded hyperplane can
// touch the cell. The window box doubles as the unboundedness detector; a
// cell reaching past radius/2 reports window_too_small so the caller retries
// with a doubled window.
inline ZeroCellResult zero_cell(const ProcessSample& sample,
                                const Tolerances& tol = default_tolerances()) {
    ZeroCellResult out;
    if (sample.hyperplanes.empty()) {
        out.status = ZeroCellResult::Status::window_too_small;
        return out;
    }
    const int d = static_cast<int>(sample.hyperplanes[0].normal.size());
    const double R = sample.window_radius;
    std::vector<Halfspace> hs;
    hs.reserve(sample.hyperplanes.size());
    for (const auto& h : sample.hyperplanes) {
        double sgn = h.offset >= 0.0 ? 1.0 : -1.0;
        hs.push_back({scaled(h.normal, sgn), std::abs(h.offset)});
    }
    std::sort(hs.begin(), hs.end(), [](const Halfspace& a, const Halfspace& b) { return a.offset < b.offset; });
    const int n = static_cast<int>(hs.size());
    int m = std::min(n, 2 * d + 6);
    std::vector<Halfspace> active(hs.begin(), hs.begin() + m);
    auto trim_to_active = [&](const VPolytope& p, const std::vector<Halfspace>& cons) {
        std::vector<char> used(cons.size(), 0);
        for (const auto& act : p.active)
            for (int i : act)
                if (i < static_cast<int>(cons.size())) used[i] = 1;
        std::vector<Halfspace> kept;
        for (std::size_t i = 0; i < cons.size(); ++i)
            if (used[i]) kept.push_back(cons[i]);
        return kept;
    };
    while (true) {
        IntersectionResult res = intersect_halfspaces(active, d, tol, R);
        if (res.status != Feasibility::bounded) {
            if (m < n) {
                int grow = std::min(n, 2 * m);
                active.insert(active.end(), hs.begin() + m, hs.begin() + grow);
                m = grow;
                continue;
            }
            std::vector<Vec> normals;
            normals.reserve(hs.size());
            for (const auto& h : hs) normals.push_back(h.normal);
            bool rank_deficient = static_cast<int>(orthonormal_span(normals).size()) < d;
            out.status = rank_deficient ? ZeroCellResult::Status::unbounded
                                        : ZeroCellResult::Status::window_too_small;
            return out;
        }
        double rho = 0.0;
        for (const Vec& v : res.polytope.vertices) rho = std::max(rho, norm(v));
        int needed = static_cast<int>(std::upper_bound(hs.begin(), hs.end(), rho,
                                                       [](double r, const Halfspace& h) {
                                                           return r < h.offset;
                                                       }) -
                                      hs.begin());
        if (needed > m) {
            // keep only facet-defining constraints (the intersection is
            // unchanged) and pull in the newly reachable hyperplanes
            std::vector<Halfspace> next = trim_to_active(res.polytope, active);
            next.insert(next.end(), hs.begin() + m, hs.begin() + needed);
            active = std::move(next);
            m = needed;
            continue;
        }
        if (rho > R / 2.0) {
            out.status = ZeroCellResult::Status::window_too_small;
            return out;
        }
        out.support = trim_to_active(res.polytope, active);
        if (out.support.size() != active.size()) {
            // re-express the cell over the facet-defining constraints so the
            // stored active indices match the returned support
            res = intersect_halfspaces(out.support, d, tol, R);
        }
        out.status = ZeroCellResult::Status::ok;
        out.cell = std::move(res.polytope);
        return out;
    }
}

// The k-faces containing the origin of the tessellation induced by a sample
// together with (d - s) hyperplanes through 0. For each (d-k)-subset of the
// added directions the cell section is split by the remaining added
// hyperplanes; 2^{k-s} pieces per subset in general position.
inline std::vector<VPolytope> origin_k_faces(const std::vector<Halfspace>& support,
                                             const std::vector<Vec>& added_directions, int k, int d,
                                             double window_radius,
                                             const Tolerances& tol = default_tolerances()) {
    const int added = static_cast<int>(added_directions.size());
    const int s = d - added;
    if (s < 0 || s > k || k > d) throw DegeneratePosition("origin_k_faces: bad added count for (k, d)");
    if (static_cast<int>(orthonormal_span(added_directions).size()) != added)
        throw DegeneratePosition("origin_k_faces: added directions are dependent");

    std::vector<VPolytope> out;
    for_each_subset(added, d - k, [&](const std::vector<int>& M) {
        std::vector<Vec> mdirs;
        mdirs.reserve(M.size());
        for (int i : M) mdirs.push_back(added_directions[i]);
        std::vector<Vec> basis = orthonormal_complement(mdirs, d, tol.pivot_rel);
        if (static_cast<int>(basis.size()) != k)
            throw DegeneratePosition("origin_k_faces: degenerate subset");
        SectionResult sect = section(support, basis);
        if (sect.empty) throw DegeneratePosition("origin_k_faces: empty cell section");
        std::vector<Vec> rem;
        for (int i = 0; i < added; ++i)
            if (!std::binary_search(M.begin(), M.end(), i)) {
                Vec a(k);
                for (int c = 0; c < k; ++c) a[c] = dot(added_directions[i], basis[c]);
                double an = norm(a);
                if (an < 1e-10) throw DegeneratePosition("origin_k_faces: added direction parallel to section");
                for (double& x : a) x /= an;
                rem.push_back(std::move(a));
            }
        const int splits = static_cast<int>(rem.size()); // k - s
        for (int mask = 0; mask < (1 << splits); ++mask) {
            std::vector<Halfspace> cons = sect.halfspaces;
            for (int i = 0; i < splits; ++i) {
                double sgn = (mask >> i) & 1 ? 1.0 : -1.0;
                cons.push_back({scaled(rem[i], -sgn), 0.0});
            }
            // pieces are subsets of the bounded cell
            IntersectionResult res =
                intersect_halfspaces(cons, k, tol, 2.0 * window_radius, /*assume_bounded=*/true);
            if (res.status == Feasibility::bounded && res.polytope.dim == k)
                out.push_back(std::move(res.polytope));
        }
    });
    return out;
}

// Z_0 intersected with the orthogonal complement of a set of added
// directions, as a polytope in subspace coordinates.
inline VPolytope cell_section(const std::vector<Halfspace>& support, const std::vector<Vec>& dirs,
                              int d, double window_radius, const Tolerances& tol) {
    std::vector<Vec> basis = orthonormal_complement(dirs, d, tol.pivot_rel);
    if (static_cast<int>(basis.size()) != d - static_cast<int>(dirs.size()))
        throw DegeneratePosition("cell_section: dependent directions");
    SectionResult sect = section(support, basis);
    if (sect.empty) throw DegeneratePosition("cell_section: empty section");
    IntersectionResult res = intersect_halfspaces(sect.halfspaces, static_cast<int>(basis.size()), tol,
                                                  2.0 * window_radius, /*assume_bounded=*/true);
    if (res.status != Feasibility::bounded) throw DegeneratePosition("cell_section: unbounded section");
    return res.polytope;
}

// Combinatorial multiplicity identity for the faces around the origin: the
// total r-content of the origin k-faces equals the multiplicity-weighted
// r-contents of the cell sections over subsets of the added hyperplanes.
// Returns (lhs, rhs); the two agree per realization in general position.
inline std::pair<double, double> face_multiplicity_identity(const std::vector<Halfspace>& support,
                                                            const std::vector<Vec>& added_directions,
                                                            int k, int r, int d, double window_radius,
                                                            const Tolerances& tol = default_tolerances()) {
    const int added = static_cast<int>(added_directions.size());
    const int s = d - added;
    std::vector<VPolytope> pieces = origin_k_faces(support, added_directions, k, d, window_radius, tol);
    double lhs = 0.0;
    for (const VPolytope& p : pieces) lhs += face_content(p, r);

    double rhs = 0.0;
    for (int j = std::max(r, s); j <= k; ++j) {
        double coeff = binomial(d - j, k - j) * pow_int(2.0, k - j);
        double inner = 0.0;
        for_each_subset(added, d - j, [&](const std::vector<int>& M) {
            if (j == 0) {
                inner += (r == 0) ? 1.0 : 0.0;
                return;
            }
            std::vector<Vec> mdirs;
            mdirs.reserve(M.size());
            for (int i : M) mdirs.push_back(added_directions[i]);
            inner += face_content(cell_section(support, mdirs, d, window_radius, tol), r);
        });
        rhs += coeff * inner;
    }
    return {lhs, rhs};
}

struct EstimateSummary {
    std::string target;
    std::string estimator_id;
    int k = 0, r = 0, s = 0;
    double mean = 0.0;
    double std_error = 0.0;
    long replicates = 0;
    bool has_oracle = false;
    double oracle_value = 0.0;
    double z_score = 0.0; // meaningful when has_oracle and std_error > 0
};

struct WindowPolicy {
    double window_factor = 1.0;
    int retry_cap = 6;
    double initial_radius(const DirectionalDistribution& dist) const {
        return window_factor * 10.0 * dist.d / dist.intensity;
    }
};

// Importance weights below this threshold are treated as zero; it also keeps
// the subspace constructions away from rank decisions on nearly dependent
// direction draws.
inline constexpr double nabla_gate = 1e-8;

namespace detail {

struct ReplicateGeometry {
    ZeroCellResult zc;
    double radius = 0.0;
    std::vector<Vec> added; // d directions drawn from the atom distribution
};

inline ReplicateGeometry make_replicate_geometry(const DirectionalDistribution& dist,
                                                 const std::vector<double>& cum,
                                                 const WindowPolicy& policy, Rng& rng,
                                                 const Tolerances& tol) {
    ReplicateGeometry g;
    g.added.reserve(dist.d);
    for (int i = 0; i < dist.d; ++i) g.added.push_back(dist.atoms[rng.discrete(cum)].direction);
    double R = policy.initial_radius(dist);
    ProcessSample sample = sample_process(dist, R, rng, &cum);
    for (int attempt = 0; attempt <= policy.retry_cap; ++attempt) {
        g.zc = zero_cell(sample, tol);
        if (g.zc.status == ZeroCellResult::Status::ok) {
            g.radius = sample.window_radius;
            return g;
        }
        extend_sample(sample, dist, 2.0 * sample.window_radius, rng, &cum);
    }
    throw SimulationDidNotConverge("zero cell not contained after retry cap");
}

inline double nabla(const std::vector<Vec>& dirs, int count, int d) {
    std::vector<double> rows(static_cast<std::size_t>(count) * d);
    for (int i = 0; i < count; ++i) std::copy(dirs[i].begin(), dirs[i].end(), rows.begin() + i * d);
    return gram_volume(rows.data(), count, d);
}

// Runs fn(replicate_index, rng) over replicates with per-replicate streams,
// reducing in index order regardless of worker count.
template <class F>
inline void run_replicates(long replicates, int workers, std::uint64_t master_seed, F&& fn) {
    workers = std::max(1, workers);
    if (workers == 1) {
        for (long i = 0; i < replicates; ++i) {
            Rng rng = Rng::replicate_stream(master_seed, static_cast<std::uint64_t>(i));
            fn(i, rng);
        }
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w]() {
            try {
                for (long i = w; i < replicates; i += workers) {
                    Rng rng = Rng::replicate_stream(master_seed, static_cast<std::uint64_t>(i));
                    fn(i, rng);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

inline std::pair<double, double> mean_and_stderr(const std::vector<double>& xs) {
    const long n = static_cast<long>(xs.size());
    if (n == 0) return {0.0, 0.0};
    KahanSum s;
    for (double x : xs) s.add(x);
    double mean = s.value() / n;
    if (n < 2) return {mean, 0.0};
    KahanSum q;
    for (double x : xs) q.add((x - mean) * (x - mean));
    double sd = std::sqrt(q.value() / (n - 1));
    return {mean, sd / std::sqrt(static_cast<double>(n))};
}

} // namespace detail

// Monte Carlo estimate of E(L_r L_s)(Z) through the zero cell: the zero-cell
// law is the volume-weighted typical-cell law, so the estimator averages
// (L_r L_s / V_d)(Z_0) / gamma.
inline EstimateSummary estimate_typical_cell_moment(const DirectionalDistribution& dist, int r, int s,
                                                    long replicates, std::uint64_t master_seed,
                                                    const WindowPolicy& policy = {},
                                                    int workers = 1,
                                                    const Tolerances& tol = default_tolerances()) {
    const int d = dist.d;
    if (r < 0 || s < 0 || r > d || s > d || replicates < 1)
        throw DegenerateInput("estimate_typical_cell_moment: bad arguments");
    const double gamma = cell_intensity(dist);
    const std::vector<double> cum = cumulative_weights(dist);
    std::vector<double> vals(replicates);
    detail::run_replicates(replicates, workers, master_seed, [&](long i, Rng& rng) {
        detail::ReplicateGeometry g = detail::make_replicate_geometry(dist, cum, policy, rng, tol);
        double vd = hausdorff_measure(g.zc.cell);
        double lr = face_content(g.zc.cell, r);
        double ls = face_content(g.zc.cell, s);
        vals[i] = lr * ls / (vd * gamma);
    });
    auto [mean, se] = detail::mean_and_stderr(vals);
    EstimateSummary out;
    out.target = "E(L_" + std::to_string(r) + " L_" + std::to_string(s) + ")(Z)";
    out.estimator_id = "zero_cell";
    out.k = d;
    out.r = r;
    out.s = s;
    out.mean = mean;
    out.std_error = se;
    out.replicates = replicates;
    return out;
}

// Monte Carlo estimate of E(L_r L_s)(Z^(k)) for s < d via the origin k-faces
// of the sample augmented by (d - s) hyperplanes through 0, importance
// weighted by the parallelepiped volume of the drawn directions.
inline EstimateSummary estimate_kface_moment(const DirectionalDistribution& dist, int k, int r, int s,
                                             long replicates, std::uint64_t master_seed,
                                             const WindowPolicy& policy = {}, int workers = 1,
                                             const Tolerances& tol = default_tolerances()) {
    const int d = dist.d;
    if (k < 1 || k > d || r < 0 || r > k || s < 0 || s > std::min(k, d - 1) || replicates < 1)
        throw DegenerateInput("estimate_kface_moment: bad arguments");
    const double gamma = cell_intensity(dist);
    const std::vector<double> cum = cumulative_weights(dist);
    const double pref = pow_int(dist.intensity, d - s) / (gamma * factorial(d - s) * binomial(d, k));
    std::vector<double> vals(replicates);
    detail::run_replicates(replicates, workers, master_seed, [&](long i, Rng& rng) {
        detail::ReplicateGeometry g = detail::make_replicate_geometry(dist, cum, policy, rng, tol);
        double w = detail::nabla(g.added, d - s, d);
        if (w < nabla_gate) {
            vals[i] = 0.0;
            return;
        }
        std::vector<Vec> added(g.added.begin(), g.added.begin() + (d - s));
        double sum = 0.0;
        for (const VPolytope& p : origin_k_faces(g.zc.support, added, k, d, g.radius, tol))
            sum += face_content(p, r);
        vals[i] = pref * w * sum;
    });
    auto [mean, se] = detail::mean_and_stderr(vals);
    EstimateSummary out;
    out.target = "E(L_" + std::to_string(r) + " L_" + std::to_string(s) + ")(Z^(" + std::to_string(k) + "))";
    out.estimator_id = "origin_faces";
    out.k = k;
    out.r = r;
    out.s = s;
    out.mean = mean;
    out.std_error = se;
    out.replicates = replicates;
    return out;
}

struct SimTarget {
    enum class Kind { second_moment, vertex_mean };
    Kind kind = Kind::second_moment;
    int k = 0, r = 0, s = 0;
};

struct SimPlan {
    std::vector<SimTarget> targets;
    long replicates = 0;
    std::uint64_t seed = 0;
    int workers = 1;
    WindowPolicy window;
};

// One pass over shared replicates for every requested target; a single
// process sample and direction draw serves the whole moment table (common
// random numbers), and replicate streams make the output independent of the
// worker count.
inline std::vector<EstimateSummary> run_experiment(const DirectionalDistribution& dist,
                                                   const SimPlan& plan,
                                                   const Tolerances& tol = default_tolerances()) {
    const int d = dist.d;
    if (plan.replicates < 1) throw ConfigError("run_experiment: replicates must be >= 1");
    for (const auto& t : plan.targets) {
        if (t.k < 1 || t.k > d) throw ConfigError("run_experiment: target k out of range");
        if (t.kind == SimTarget::Kind::second_moment &&
            (t.r < 0 || t.s < 0 || t.r > t.k || t.s > t.k))
            throw ConfigError("run_experiment: target (r, s) out of range");
    }
    const double gamma = cell_intensity(dist);
    const std::vector<double> cum = cumulative_weights(dist);
    const int nt = static_cast<int>(plan.targets.size());
    std::vector<std::vector<double>> vals(nt, std::vector<double>(plan.replicates));

    detail::run_replicates(plan.replicates, plan.workers, plan.seed, [&](long i, Rng& rng) {
        detail::ReplicateGeometry g = detail::make_replicate_geometry(dist, cum, plan.window, rng, tol);
        std::map<std::pair<int, int>, std::vector<VPolytope>> piece_cache;
        double cell_vd = -1.0;
        auto pieces_for = [&](int k, int s) -> const std::vector<VPolytope>& {
            auto key = std::make_pair(k, s);
            auto it = piece_cache.find(key);
            if (it != piece_cache.end()) return it->second;
            std::vector<Vec> added(g.added.begin(), g.added.begin() + (d - s));
            return piece_cache
                .emplace(key, origin_k_faces(g.zc.support, added, k, d, g.radius, tol))
                .first->second;
        };
        for (int t = 0; t < nt; ++t) {
            const SimTarget& tg = plan.targets[t];
            double v = 0.0;
            if (tg.kind == SimTarget::Kind::vertex_mean) {
                double w = detail::nabla(g.added, d, d);
                if (w >= nabla_gate) {
                    double count = static_cast<double>(pieces_for(tg.k, 0).size());
                    v = pow_int(dist.intensity, d) / (gamma * factorial(d) * binomial(d, tg.k)) * w *
                        count;
                }
            } else if (tg.s == d) {
                if (cell_vd < 0.0) cell_vd = hausdorff_measure(g.zc.cell);
                v = face_content(g.zc.cell, tg.r) * face_content(g.zc.cell, tg.s) / (cell_vd * gamma);
            } else {
                double w = detail::nabla(g.added, d - tg.s, d);
                if (w >= nabla_gate) {
                    double sum = 0.0;
                    for (const VPolytope& p : pieces_for(tg.k, tg.s)) sum += face_content(p, tg.r);
                    v = pow_int(dist.intensity, d - tg.s) /
                        (gamma * factorial(d - tg.s) * binomial(d, tg.k)) * w * sum;
                }
            }
            vals[t][i] = v;
        }
    });

    // oracle values, one engine per k
    std::map<int, MomentEngine> engines;
    std::vector<EstimateSummary> out;
    out.reserve(nt);
    for (int t = 0; t < nt; ++t) {
        const SimTarget& tg = plan.targets[t];
        auto [mean, se] = detail::mean_and_stderr(vals[t]);
        EstimateSummary es;
        es.k = tg.k;
        es.r = tg.r;
        es.s = tg.s;
        es.mean = mean;
        es.std_error = se;
        es.replicates = plan.replicates;
        es.has_oracle = true;
        if (tg.kind == SimTarget::Kind::vertex_mean) {
            es.target = "E f_0(Z^(" + std::to_string(tg.k) + "))";
            es.estimator_id = "origin_face_count";
            es.oracle_value = pow_int(2.0, tg.k);
        } else {
            es.target =
                "E(L_" + std::to_string(tg.r) + " L_" + std::to_string(tg.s) + ")(Z^(" + std::to_string(tg.k) + "))";
            es.estimator_id = (tg.s == d) ? "zero_cell" : "origin_faces";
            auto it = engines.find(tg.k);
            if (it == engines.end()) it = engines.emplace(tg.k, MomentEngine(dist, tg.k, tol)).first;
            es.oracle_value = it->second.second_moment(tg.r, tg.s);
        }
        if (es.std_error > 0.0) es.z_score = (es.mean - es.oracle_value) / es.std_error;
        out.push_back(std::move(es));
    }
    return out;
}

} // namespace phtess
