#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "phtess/base.hpp"
#include "phtess/geometry.hpp"
#include "phtess/linalg.hpp"

namespace phtess {

// One stored direction per antipodal pair {+u, -u}; `weight` carries the
// pair's total spherical mass.
struct SphereAtom {
    Vec direction;
    double weight = 0.0;
};

// Even discrete directional distribution of a stationary hyperplane process,
// together with its intensity (expected hyperplanes per unit distance of
// normal displacement).
struct DirectionalDistribution {
    int d = 0;
    double intensity = 0.0;
    std::vector<SphereAtom> atoms;

    DirectionalDistribution(int dim, double gamma_hat, std::vector<SphereAtom> atom_list)
        : d(dim), intensity(gamma_hat), atoms(std::move(atom_list)) {
        if (d < 2) throw ConfigError("DirectionalDistribution: dimension must be >= 2");
        if (!(intensity > 0.0)) throw ConfigError("DirectionalDistribution: intensity must be positive");
        if (atoms.empty()) throw ConfigError("DirectionalDistribution: no atoms");
        double wsum = 0.0;
        for (auto& a : atoms) {
            if (!(a.weight > 0.0)) throw ConfigError("DirectionalDistribution: atom weight must be positive");
            if (static_cast<int>(a.direction.size()) != d)
                throw ConfigError("DirectionalDistribution: atom direction has wrong dimension");
            double n = norm(a.direction);
            if (std::abs(n - 1.0) > 1e-6)
                throw ConfigError("DirectionalDistribution: atom direction is not a unit vector");
            for (double& x : a.direction) x /= n;
            wsum += a.weight;
        }
        if (std::abs(wsum - 1.0) > 1e-12)
            throw ConfigError("DirectionalDistribution: atom weights must sum to 1, got " + fmt_g17(wsum));
        for (std::size_t i = 0; i < atoms.size(); ++i)
            for (std::size_t k = i + 1; k < atoms.size(); ++k)
                if (std::abs(dot(atoms[i].direction, atoms[k].direction)) > 1.0 - 1e-9)
                    throw ConfigError("DirectionalDistribution: duplicate or antipodal atom directions");
        std::vector<Vec> dirs;
        dirs.reserve(atoms.size());
        for (const auto& a : atoms) dirs.push_back(a.direction);
        if (static_cast<int>(orthonormal_span(dirs).size()) != d)
            throw ConfigError("DirectionalDistribution: directions do not span the space");
    }

    int atom_count() const { return static_cast<int>(atoms.size()); }
};

// Directions concentrated on an orthonormal basis with equal weights; the
// induced tessellation consists of axis-aligned boxes.
inline DirectionalDistribution cuboid_distribution(int d, double intensity) {
    std::vector<SphereAtom> atoms;
    for (int i = 0; i < d; ++i) {
        Vec e(d, 0.0);
        e[i] = 1.0;
        atoms.push_back({std::move(e), 1.0 / d});
    }
    return DirectionalDistribution(d, intensity, std::move(atoms));
}

// d = 2: n equally spaced directions on the half-circle, equal weights.
inline DirectionalDistribution isotropic_discretized_2d(int n, double intensity) {
    std::vector<SphereAtom> atoms;
    for (int i = 0; i < n; ++i) {
        double th = M_PI * i / n;
        atoms.push_back({{std::cos(th), std::sin(th)}, 1.0 / n});
    }
    return DirectionalDistribution(2, intensity, std::move(atoms));
}

// d = 3: near-uniform point set on the upper hemisphere (Fibonacci lattice),
// equal weights.
inline DirectionalDistribution isotropic_discretized_3d(int n, double intensity) {
    std::vector<SphereAtom> atoms;
    const double ga = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        double z = (i + 0.5) / n;
        double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        double phi = ga * i;
        atoms.push_back({{rho * std::cos(phi), rho * std::sin(phi), z}, 1.0 / n});
    }
    return DirectionalDistribution(3, intensity, std::move(atoms));
}

inline DirectionalDistribution isotropic_discretized(int d, int n, double intensity) {
    if (d == 2) return isotropic_discretized_2d(n, intensity);
    if (d == 3) return isotropic_discretized_3d(n, intensity);
    throw ConfigError("isotropic_discretized: only d = 2, 3 supported");
}

// Centered zonotope sum_i [-z_i, +z_i].
struct Zonotope {
    std::vector<Vec> generators;
    int ambient_dim = 0;
};

// Polar body in the coordinates of the zonotope's linear hull.
struct PolarBody {
    std::vector<Halfspace> halfspaces;
    int dim = 0;
};

// Associated zonoid of the process: support function
// h(u) = (intensity/2) * integral |<u,v>| dphi(v), realized exactly as the
// zonotope with generators (intensity * weight_i / 2) * direction_i.
inline Zonotope associated_zonotope(const DirectionalDistribution& dist) {
    Zonotope z;
    z.ambient_dim = dist.d;
    z.generators.reserve(dist.atoms.size());
    for (const auto& a : dist.atoms)
        z.generators.push_back(scaled(a.direction, dist.intensity * a.weight / 2.0));
    return z;
}

inline double support(const Zonotope& z, const Vec& u) {
    double s = 0.0;
    for (const Vec& g : z.generators) s += std::abs(dot(g, u));
    return s;
}

// Orthogonal projection onto the subspace spanned by an orthonormal basis,
// expressed in basis coordinates. An empty basis yields the origin (a point).
inline Zonotope project(const Zonotope& z, const std::vector<Vec>& basis) {
    Zonotope out;
    out.ambient_dim = static_cast<int>(basis.size());
    out.generators.reserve(z.generators.size());
    for (const Vec& g : z.generators) {
        Vec q(out.ambient_dim);
        for (int c = 0; c < out.ambient_dim; ++c) q[c] = dot(g, basis[c]);
        out.generators.push_back(std::move(q));
    }
    return out;
}

// V_j of a zonotope: 2^j * sum over j-subsets of generator parallelepiped
// volumes. V_0 = 1.
inline double intrinsic_volume(const Zonotope& z, int j) {
    if (j < 0 || j > z.ambient_dim) throw DegenerateInput("intrinsic_volume: j out of range");
    if (j == 0) return 1.0;
    const int m = static_cast<int>(z.generators.size());
    const int dim = z.ambient_dim;
    KahanSum sum;
    std::vector<double> rows(static_cast<std::size_t>(j) * dim);
    for_each_subset(m, j, [&](const std::vector<int>& sel) {
        for (int a = 0; a < j; ++a)
            std::copy(z.generators[sel[a]].begin(), z.generators[sel[a]].end(), rows.begin() + a * dim);
        sum.add(gram_volume(rows.data(), j, dim));
    });
    return pow_int(2.0, j) * sum.value();
}

inline std::vector<double> intrinsic_volumes_up_to(const Zonotope& z, int jmax) {
    std::vector<double> v(jmax + 1);
    for (int j = 0; j <= jmax; ++j) v[j] = intrinsic_volume(z, j);
    return v;
}

// All points sum_i eps_i z_i over sign vectors, deduplicated. Superset of the
// vertex set; every extreme point is included.
inline std::vector<Vec> zonotope_sign_points(const Zonotope& z, int cap) {
    const int m = static_cast<int>(z.generators.size());
    if (m > cap) throw TooManyGenerators("zonotope has " + std::to_string(m) + " generators, cap " +
                                         std::to_string(cap));
    const int dim = z.ambient_dim;
    std::vector<Vec> pts;
    Vec v(dim, 0.0);
    for (const Vec& g : z.generators) v = sub(v, g);
    pts.push_back(v);
    const std::uint64_t total = 1ULL << m;
    std::uint64_t gray = 0;
    for (std::uint64_t c = 1; c < total; ++c) {
        std::uint64_t g2 = c ^ (c >> 1);
        std::uint64_t flipped = gray ^ g2;
        int bit = 0;
        while (!((flipped >> bit) & 1ULL)) ++bit;
        bool up = (g2 >> bit) & 1ULL;
        for (int i = 0; i < dim; ++i) v[i] += (up ? 2.0 : -2.0) * z.generators[bit][i];
        gray = g2;
        pts.push_back(v);
    }
    std::sort(pts.begin(), pts.end());
    double scale = 0.0;
    for (const Vec& p : pts) scale = std::max(scale, norm(p));
    double tol2 = 1e-20 * (1.0 + scale) * (1.0 + scale);
    std::vector<Vec> out;
    for (const Vec& p : pts) {
        if (!out.empty()) {
            double d2 = 0.0;
            for (int i = 0; i < dim; ++i) {
                double dd = out.back()[i] - p[i];
                d2 += dd * dd;
            }
            if (d2 <= tol2) continue;
        }
        out.push_back(p);
    }
    return out;
}

// Polar body {x : <x, v> <= 1 for all sign points v}, by sign-vector
// enumeration. Requires the zonotope to be full-dimensional in its ambient
// coordinates.
inline PolarBody polar(const Zonotope& z, const Tolerances& tol = default_tolerances()) {
    if (z.ambient_dim < 1) throw DegenerateZonotope("polar: zero-dimensional zonotope");
    std::vector<Vec> dirs = z.generators;
    if (static_cast<int>(orthonormal_span(dirs).size()) != z.ambient_dim)
        throw DegenerateZonotope("polar: zonotope is lower-dimensional in the given coordinates");
    PolarBody pb;
    pb.dim = z.ambient_dim;
    for (const Vec& p : zonotope_sign_points(z, tol.generator_cap)) {
        double n = norm(p);
        if (n < 1e-14) continue;
        pb.halfspaces.push_back({scaled(p, 1.0 / n), 1.0 / n});
    }
    if (pb.halfspaces.empty()) throw DegenerateZonotope("polar: no usable constraints");
    return pb;
}

namespace detail {

// Canonical representative of an axis direction: flips the sign so the last
// significantly nonzero coordinate is positive.
inline void canonicalize_sign(Vec& v, double tol) {
    for (int i = static_cast<int>(v.size()) - 1; i >= 0; --i) {
        if (std::abs(v[i]) > tol) {
            if (v[i] < 0.0)
                for (double& x : v) x = -x;
            return;
        }
    }
}

// Drops negligible generators and merges parallel ones; safe because
// [-a,a] + [-b,b] = [-(a+b), a+b] for parallel a, b.
inline std::vector<Vec> merged_generators(const std::vector<Vec>& gens) {
    double scale = 0.0;
    for (const Vec& g : gens) scale = std::max(scale, norm(g));
    std::vector<Vec> out;
    for (Vec g : gens) {
        double gn = norm(g);
        if (gn <= 1e-13 * scale) continue;
        canonicalize_sign(g, 1e-13 * scale);
        bool merged = false;
        for (Vec& h : out) {
            double hn = norm(h);
            double c = dot(g, h) / (gn * hn);
            if (c > 1.0 - 1e-12) {
                h = add(h, g);
                merged = true;
                break;
            }
        }
        if (!merged) out.push_back(std::move(g));
    }
    return out;
}

inline double zonogon_polar_area(const std::vector<Vec>& gens_in) {
    std::vector<Vec> g = merged_generators(gens_in);
    const int m = static_cast<int>(g.size());
    if (m < 2) throw DegenerateZonotope("zonogon polar: rank below 2");
    std::sort(g.begin(), g.end(),
              [](const Vec& a, const Vec& b) { return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]); });
    // boundary chain from -sum(g) adding 2 g_t in angular order; the full
    // vertex cycle is the chain followed by its antipode
    Vec p(2, 0.0);
    for (const Vec& gg : g) p = sub(p, gg);
    std::vector<std::array<double, 2>> cyc;
    cyc.reserve(2 * m);
    for (int t = 0; t < m; ++t) {
        cyc.push_back({p[0], p[1]});
        p[0] += 2.0 * g[t][0];
        p[1] += 2.0 * g[t][1];
    }
    for (int t = 0; t < m; ++t) cyc.push_back({-cyc[t][0], -cyc[t][1]});
    // polar vertices from consecutive constraint pairs <q_i, x> = 1
    double area2 = 0.0;
    std::array<double, 2> prev{}, first{};
    const int M = static_cast<int>(cyc.size());
    for (int i = 0; i < M; ++i) {
        const auto& a = cyc[i];
        const auto& b = cyc[(i + 1) % M];
        double det = a[0] * b[1] - a[1] * b[0];
        if (std::abs(det) < 1e-300) throw DegenerateZonotope("zonogon polar: singular corner");
        std::array<double, 2> q{(b[1] - a[1]) / det, (a[0] - b[0]) / det};
        if (i > 0) area2 += prev[0] * q[1] - q[0] * prev[1];
        else first = q;
        prev = q;
    }
    area2 += prev[0] * first[1] - first[0] * prev[1];
    return 0.5 * std::abs(area2);
}

// Volume of the polar of a full-dimensional zonotope in R^3 for arbitrary
// generator counts, via the chamber complex of the central great-circle
// arrangement. Each chamber carries the zonotope vertex maximizing over it;
// the polar decomposes into cones over the dual facet polygons.
inline double zonotope_polar_volume_3d(const std::vector<Vec>& gens_in) {
    std::vector<Vec> g = merged_generators(gens_in);
    const int m = static_cast<int>(g.size());
    if (m < 3) throw DegenerateZonotope("3d polar: rank below 3");
    std::vector<Vec> gh(m);
    for (int i = 0; i < m; ++i) gh[i] = normalized(g[i]);

    // intersection directions of circle pairs
    std::vector<Vec> nodes;
    for (int i = 0; i < m; ++i)
        for (int k = i + 1; k < m; ++k) {
            Vec c = cross3(gh[i], gh[k]);
            double cn = norm(c);
            if (cn < 1e-12) continue;
            for (double& x : c) x /= cn;
            canonicalize_sign(c, 1e-13);
            bool dup = false;
            for (const Vec& n : nodes)
                if (std::abs(dot(n, c)) > 1.0 - 1e-12) {
                    dup = true;
                    break;
                }
            if (dup) continue;
            nodes.push_back(std::move(c));
        }

    const int words = (m + 63) / 64;
    struct ChamberData {
        std::vector<Vec> corners;
    };
    std::map<std::vector<std::uint64_t>, ChamberData> chambers;

    std::vector<double> angles;
    for (int i = 0; i < m; ++i) {
        std::vector<Vec> cb = orthonormal_complement({gh[i]}, 3);
        const Vec &p = cb[0], &q = cb[1];
        angles.clear();
        for (const Vec& n : nodes) {
            if (std::abs(dot(n, gh[i])) > 1e-9) continue;
            double th = std::atan2(dot(n, q), dot(n, p));
            if (th < 0) th += 2.0 * M_PI;
            angles.push_back(th);
            double th2 = th + M_PI;
            if (th2 >= 2.0 * M_PI) th2 -= 2.0 * M_PI;
            angles.push_back(th2);
        }
        std::sort(angles.begin(), angles.end());
        angles.erase(std::unique(angles.begin(), angles.end(),
                                 [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                     angles.end());
        if (angles.size() >= 2 &&
            std::abs(angles.back() - angles.front() - 2.0 * M_PI) < 1e-12)
            angles.pop_back();
        if (angles.size() < 2) throw DegenerateZonotope("3d polar: circle without crossings");

        const int na = static_cast<int>(angles.size());
        for (int a = 0; a < na; ++a) {
            double t0 = angles[a];
            double t1 = angles[(a + 1) % na] + (a + 1 == na ? 2.0 * M_PI : 0.0);
            double tm = 0.5 * (t0 + t1);
            Vec mid = add(scaled(p, std::cos(tm)), scaled(q, std::sin(tm)));
            std::vector<std::uint64_t> key(words, 0);
            for (int l = 0; l < m; ++l) {
                if (l == i) continue;
                double s = dot(gh[l], mid);
                if (std::abs(s) < 1e-10) throw DegenerateZonotope("3d polar: degenerate arc midpoint");
                if (s > 0.0) key[l / 64] |= (1ULL << (l % 64));
            }
            Vec e0 = add(scaled(p, std::cos(t0)), scaled(q, std::sin(t0)));
            Vec e1 = add(scaled(p, std::cos(t1)), scaled(q, std::sin(t1)));
            for (int side = 0; side < 2; ++side) {
                if (side == 1) key[i / 64] |= (1ULL << (i % 64));
                else key[i / 64] &= ~(1ULL << (i % 64));
                ChamberData& cd = chambers[key];
                cd.corners.push_back(e0);
                cd.corners.push_back(e1);
            }
        }
    }

    double vol = 0.0;
    for (auto& [key, cd] : chambers) {
        Vec v(3, 0.0);
        for (int l = 0; l < m; ++l) {
            bool plus = (key[l / 64] >> (l % 64)) & 1ULL;
            for (int c = 0; c < 3; ++c) v[c] += (plus ? 1.0 : -1.0) * g[l][c];
        }
        double vn = norm(v);
        if (vn < 1e-13) throw DegenerateZonotope("3d polar: zero support vertex");
        // dedupe corner directions
        std::vector<Vec> cs;
        for (const Vec& c : cd.corners) {
            bool dup = false;
            for (const Vec& u : cs)
                if (dot(u, c) > 1.0 - 1e-12) {
                    dup = true;
                    break;
                }
            if (!dup) cs.push_back(c);
        }
        if (cs.size() < 3) continue;
        std::vector<Vec> plane_basis = orthonormal_complement({v}, 3);
        const Vec &e = plane_basis[0], &f = plane_basis[1];
        std::vector<std::array<double, 2>> poly;
        poly.reserve(cs.size());
        for (const Vec& u : cs) {
            double denom = dot(v, u);
            if (denom < 1e-12 * vn) throw DegenerateZonotope("3d polar: corner below support plane");
            poly.push_back({dot(u, e) / denom, dot(u, f) / denom});
        }
        vol += convex_polygon_area(std::move(poly)) / (3.0 * vn);
    }
    return vol;
}

} // namespace detail

// Volume of the polar body of a zonotope given in full-dimensional
// coordinates. Dimensions 1-3 use closed geometric constructions valid for
// any generator count; higher dimensions fall back to sign enumeration.
inline double polar_volume(const Zonotope& z, const Tolerances& tol = default_tolerances()) {
    const int j = z.ambient_dim;
    if (j == 0) return 1.0;
    if (j == 1) {
        double a = 0.0;
        for (const Vec& g : z.generators) a += std::abs(g[0]);
        if (a <= 0.0) throw DegenerateZonotope("polar_volume: degenerate segment");
        return 2.0 / a;
    }
    if (j == 2) return detail::zonogon_polar_area(z.generators);
    auto generic = [&]() {
        PolarBody pb = polar(z, tol);
        IntersectionResult res = intersect_halfspaces(pb.halfspaces, j, tol);
        if (res.status != Feasibility::bounded)
            throw DegenerateZonotope("polar_volume: polar body not bounded");
        return hausdorff_measure(res.polytope);
    };
    if (j == 3) {
        try {
            return detail::zonotope_polar_volume_3d(z.generators);
        } catch (const DegenerateZonotope&) {
            if (static_cast<int>(z.generators.size()) <= tol.generator_cap) return generic();
            throw;
        }
    }
    return generic();
}

// vp(K) = V_j(K) V_j(K°), computed within the linear hull of the zonotope.
// The volume product of a point is 1.
inline double volume_product(const Zonotope& z, const Tolerances& tol = default_tolerances()) {
    std::vector<Vec> basis = orthonormal_span(z.generators);
    const int j = static_cast<int>(basis.size());
    if (j == 0) return 1.0;
    Zonotope zl = (j == z.ambient_dim) ? z : project(z, basis);
    return intrinsic_volume(zl, j) * polar_volume(zl, tol);
}

} // namespace phtess
