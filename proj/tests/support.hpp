#pragma once

#include <cmath>
#include <vector>

#include "phtess/geometry.hpp"
#include "phtess/rng.hpp"
#include "phtess/zonotope.hpp"

namespace phtess::testing {

// Axis-aligned box [lo, hi]^d as 2d halfspaces: x_i <= hi, -x_i <= -lo.
inline std::vector<Halfspace> box_halfspaces(int d, double lo, double hi) {
    std::vector<Halfspace> hs;
    for (int i = 0; i < d; ++i) {
        Vec e(d, 0.0);
        e[i] = 1.0;
        hs.push_back({e, hi});
        Vec f(d, 0.0);
        f[i] = -1.0;
        hs.push_back({f, -lo});
    }
    return hs;
}

inline double gauss(Rng& rng) {
    double u = rng.uniform01(), v = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
}

inline Vec random_unit(Rng& rng, int d) {
    Vec v(d);
    double n = 0.0;
    do {
        for (double& x : v) x = gauss(rng);
        n = norm(v);
    } while (n < 1e-6);
    for (double& x : v) x /= n;
    return v;
}

// Random orthogonal map as a list of orthonormal rows.
inline std::vector<Vec> random_orthogonal(Rng& rng, int d) {
    std::vector<Vec> rows;
    while (static_cast<int>(rows.size()) < d) {
        std::vector<Vec> cand;
        for (int i = 0; i < d; ++i) cand.push_back(random_unit(rng, d));
        rows = orthonormal_span(cand);
    }
    return rows;
}

inline Vec apply_map(const std::vector<Vec>& rows, const Vec& x) {
    Vec y(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) y[i] = dot(rows[i], x);
    return y;
}

// Random nondegenerate atom set: directions on a canonical half-sphere with
// pairwise separation, weights bounded away from 0.
inline DirectionalDistribution random_distribution(Rng& rng, int d, int atom_count, double intensity) {
    while (true) {
        std::vector<SphereAtom> atoms;
        std::vector<double> weights;
        double wsum = 0.0;
        for (int i = 0; i < atom_count; ++i) {
            Vec u = random_unit(rng, d);
            for (int t = d - 1; t >= 0; --t) {
                if (std::abs(u[t]) > 1e-9) {
                    if (u[t] < 0.0)
                        for (double& x : u) x = -x;
                    break;
                }
            }
            atoms.push_back({std::move(u), 0.0});
            double w = rng.uniform(0.2, 1.0);
            weights.push_back(w);
            wsum += w;
        }
        for (int i = 0; i < atom_count; ++i) atoms[i].weight = weights[i] / wsum;
        double total = 0.0;
        for (const auto& a : atoms) total += a.weight;
        atoms.back().weight += 1.0 - total;
        bool separated = true;
        for (std::size_t i = 0; i < atoms.size() && separated; ++i)
            for (std::size_t k = i + 1; k < atoms.size(); ++k)
                if (std::abs(dot(atoms[i].direction, atoms[k].direction)) > 0.999) {
                    separated = false;
                    break;
                }
        if (!separated) continue;
        std::vector<Vec> dirs;
        for (const auto& a : atoms) dirs.push_back(a.direction);
        if (static_cast<int>(orthonormal_span(dirs).size()) != d) continue;
        return DirectionalDistribution(d, intensity, std::move(atoms));
    }
}

// Independent planar shoelace on vertices given in cyclic order.
inline double shoelace(const std::vector<std::array<double, 2>>& poly) {
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const auto& a = poly[i];
        const auto& b = poly[(i + 1) % poly.size()];
        s += a[0] * b[1] - b[0] * a[1];
    }
    return 0.5 * std::abs(s);
}

inline double det3(const Vec& a, const Vec& b, const Vec& c) {
    return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
           a[2] * (b[0] * c[1] - b[1] * c[0]);
}

} // namespace phtess::testing
