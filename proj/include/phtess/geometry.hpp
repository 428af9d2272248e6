#pragma once

#include <algorithm>
#include <array>
#include <set>
#include <vector>

#include "phtess/base.hpp"
#include "phtess/linalg.hpp"

namespace phtess {

// Closed halfspace {x : <x, normal> <= offset}, |normal| = 1.
struct Halfspace {
    Vec normal;
    double offset = 0.0;
};

// Hyperplane {x : <x, normal> = offset}, |normal| = 1.
struct Hyperplane {
    Vec normal;
    double offset = 0.0;
};

// Vertex representation of a bounded convex polytope. `active` keeps, per
// vertex, the sorted indices of the constraints of the generating
// H-representation that are tight there.
struct VPolytope {
    int ambient_dim = 0;
    int dim = -1; // affine-hull dimension; -1 for the empty polytope
    std::vector<Vec> vertices;
    std::vector<std::vector<int>> active;

    bool empty() const { return vertices.empty(); }
    int vertex_count() const { return static_cast<int>(vertices.size()); }
};

enum class Feasibility { bounded, unbounded, empty };

struct IntersectionResult {
    Feasibility status = Feasibility::empty;
    VPolytope polytope;
};

namespace detail {

inline void merge_sorted_into(std::vector<int>& into, const std::vector<int>& from) {
    std::vector<int> merged;
    merged.reserve(into.size() + from.size());
    std::set_union(into.begin(), into.end(), from.begin(), from.end(), std::back_inserter(merged));
    into = std::move(merged);
}

} // namespace detail

// Vertex enumeration by exhausting d-subsets of the constraints. A synthetic
// bounding box (2d extra constraints) detects unboundedness: an unbounded
// intersection always produces a vertex on the box. `box_radius <= 0` selects
// the default scale-derived box. Callers that already know the intersection
// is bounded (a subset of a bounded cell) pass `assume_bounded` to skip the
// box entirely.
inline IntersectionResult intersect_halfspaces(const std::vector<Halfspace>& halfspaces, int d,
                                               const Tolerances& tol = default_tolerances(),
                                               double box_radius = 0.0, bool assume_bounded = false) {
    const int n = static_cast<int>(halfspaces.size());
    if (n == 0 || d < 1) throw DegenerateInput("intersect_halfspaces: empty input");
    std::vector<Halfspace> cons(halfspaces);
    if (!assume_bounded) {
        double M = box_radius;
        if (M <= 0.0) {
            double bmax = 0.0;
            for (const auto& h : halfspaces) bmax = std::max(bmax, std::abs(h.offset));
            M = tol.unbounded_box_scale * (1.0 + bmax);
        }
        for (int i = 0; i < d; ++i) {
            Vec e(d, 0.0);
            e[i] = 1.0;
            cons.push_back({e, M});
            for (double& x : e) x = -x;
            cons.push_back({e, M});
        }
    }
    const int m = static_cast<int>(cons.size());

    std::vector<Vec> vertices;
    std::vector<std::vector<int>> active; // over all constraints incl. box

    std::vector<double> A(d * d), b(d), x(d);
    for_each_subset(m, d, [&](const std::vector<int>& sel) {
        for (int r = 0; r < d; ++r) {
            const Halfspace& h = cons[sel[r]];
            for (int c = 0; c < d; ++c) A[r * d + c] = h.normal[c];
            b[r] = h.offset;
        }
        if (!solve_linear(d, A.data(), b.data(), x.data(), tol.pivot_rel)) return;
        double vn = 0.0;
        for (int c = 0; c < d; ++c) vn += x[c] * x[c];
        double act_tol = tol.on_constraint * (1.0 + std::sqrt(vn));
        std::vector<int> act;
        for (int i = 0; i < m; ++i) {
            double s = -cons[i].offset;
            for (int c = 0; c < d; ++c) s += cons[i].normal[c] * x[c];
            if (s > act_tol) return; // infeasible
            if (s > -act_tol) act.push_back(i);
        }
        // merge with an existing coincident vertex if present
        double merge_tol = tol.vertex_merge * (1.0 + std::sqrt(vn));
        for (std::size_t v = 0; v < vertices.size(); ++v) {
            double dist2 = 0.0;
            for (int c = 0; c < d; ++c) {
                double dd = vertices[v][c] - x[c];
                dist2 += dd * dd;
            }
            if (dist2 <= merge_tol * merge_tol) {
                detail::merge_sorted_into(active[v], act);
                return;
            }
        }
        vertices.push_back(Vec(x.begin(), x.end()));
        active.push_back(std::move(act));
    });

    IntersectionResult res;
    if (vertices.empty()) {
        res.status = Feasibility::empty;
        return res;
    }
    bool on_box = false;
    for (const auto& act : active)
        for (int i : act)
            if (i >= n) on_box = true;
    if (on_box) {
        res.status = Feasibility::unbounded;
        return res;
    }
    res.status = Feasibility::bounded;
    res.polytope.ambient_dim = d;
    res.polytope.vertices = std::move(vertices);
    res.polytope.active = std::move(active);
    res.polytope.dim = affine_rank(res.polytope.vertices);
    return res;
}

// All r-faces of p, identified as maximal vertex clusters sharing at least
// (ambient_dim - r) active constraints with affine dimension exactly r.
inline std::vector<VPolytope> faces(const VPolytope& p, int r) {
    if (p.empty()) return {};
    const int d = p.ambient_dim;
    if (r < 0 || r > p.dim) throw DegenerateInput("faces: r out of range");
    if (r == p.dim) return {p};
    std::vector<VPolytope> out;
    if (r == 0) {
        out.reserve(p.vertices.size());
        for (std::size_t v = 0; v < p.vertices.size(); ++v) {
            VPolytope f;
            f.ambient_dim = d;
            f.dim = 0;
            f.vertices = {p.vertices[v]};
            f.active = {p.active[v]};
            out.push_back(std::move(f));
        }
        return out;
    }

    const int need = d - r;
    std::set<std::vector<int>> seen; // clusters by sorted vertex index set
    for (std::size_t v = 0; v < p.vertices.size(); ++v) {
        const std::vector<int>& av = p.active[v];
        if (static_cast<int>(av.size()) < need) continue;
        for_each_subset(static_cast<int>(av.size()), need, [&](const std::vector<int>& pick) {
            std::vector<int> S(need);
            for (int i = 0; i < need; ++i) S[i] = av[pick[i]];
            std::vector<int> cluster;
            for (std::size_t w = 0; w < p.vertices.size(); ++w)
                if (std::includes(p.active[w].begin(), p.active[w].end(), S.begin(), S.end()))
                    cluster.push_back(static_cast<int>(w));
            if (static_cast<int>(cluster.size()) < r + 1) return;
            if (!seen.insert(cluster).second) return;
            std::vector<Vec> pts;
            pts.reserve(cluster.size());
            for (int w : cluster) pts.push_back(p.vertices[w]);
            if (affine_rank(pts) != r) return;
            VPolytope f;
            f.ambient_dim = d;
            f.dim = r;
            f.vertices = std::move(pts);
            for (int w : cluster) f.active.push_back(p.active[w]);
            out.push_back(std::move(f));
        });
    }
    return out;
}

namespace detail {

// Volume of a full-dimensional polytope given by vertex coordinates in its
// own m-dimensional frame plus the inherited active sets. Facets are clusters
// on one additional shared constraint; the decomposition is centroid cones.
inline double volume_in_frame(const std::vector<Vec>& pts, const std::vector<std::vector<int>>& act,
                              int m);

inline double polygon_area_in_frame(const std::vector<Vec>& pts) {
    std::vector<std::array<double, 2>> q;
    q.reserve(pts.size());
    for (const Vec& p : pts) q.push_back({p[0], p[1]});
    return convex_polygon_area(std::move(q));
}

inline double volume_in_frame(const std::vector<Vec>& pts, const std::vector<std::vector<int>>& act,
                              int m) {
    if (m == 0) return 1.0;
    if (m == 1) {
        double lo = pts[0][0], hi = pts[0][0];
        for (const Vec& p : pts) {
            lo = std::min(lo, p[0]);
            hi = std::max(hi, p[0]);
        }
        return hi - lo;
    }
    if (m == 2) return polygon_area_in_frame(pts);

    // constraints common to every vertex never define a facet
    std::vector<int> common = act[0];
    for (const auto& a : act) {
        std::vector<int> inter;
        std::set_intersection(common.begin(), common.end(), a.begin(), a.end(),
                              std::back_inserter(inter));
        common = std::move(inter);
    }
    std::set<int> candidates;
    for (const auto& a : act)
        for (int c : a)
            if (!std::binary_search(common.begin(), common.end(), c)) candidates.insert(c);

    Vec centroid(m, 0.0);
    for (const Vec& p : pts) centroid = add(centroid, p);
    centroid = scaled(centroid, 1.0 / pts.size());

    std::set<std::vector<int>> seen;
    double vol = 0.0;
    for (int c : candidates) {
        std::vector<int> cluster;
        for (std::size_t v = 0; v < pts.size(); ++v)
            if (std::binary_search(act[v].begin(), act[v].end(), c)) cluster.push_back(static_cast<int>(v));
        if (static_cast<int>(cluster.size()) < m) continue;
        if (!seen.insert(cluster).second) continue;
        std::vector<Vec> fpts;
        for (int v : cluster) fpts.push_back(pts[v]);
        // facet frame
        std::vector<Vec> diffs;
        for (std::size_t i = 1; i < fpts.size(); ++i) diffs.push_back(sub(fpts[i], fpts[0]));
        std::vector<Vec> fb = orthonormal_span(diffs);
        if (static_cast<int>(fb.size()) != m - 1) continue;
        std::vector<Vec> fcoords;
        std::vector<std::vector<int>> facts;
        fcoords.reserve(fpts.size());
        for (std::size_t i = 0; i < fpts.size(); ++i) {
            Vec rel = sub(fpts[i], fpts[0]);
            Vec q(m - 1);
            for (int a = 0; a < m - 1; ++a) q[a] = dot(rel, fb[a]);
            fcoords.push_back(std::move(q));
            facts.push_back(act[cluster[i]]);
        }
        double fvol = volume_in_frame(fcoords, facts, m - 1);
        // distance from centroid to the facet's affine hull
        Vec rel = sub(centroid, fpts[0]);
        Vec proj(rel.size(), 0.0);
        for (const Vec& bvec : fb) {
            double cc = dot(rel, bvec);
            for (std::size_t i = 0; i < proj.size(); ++i) proj[i] += cc * bvec[i];
        }
        double h = norm(sub(rel, proj));
        vol += h * fvol / m;
    }
    return vol;
}

} // namespace detail

// Intrinsic-dimensional (Hausdorff) measure of a polytope: counting measure
// for points, length/area/volume otherwise, computed in an orthonormal frame
// of the affine hull.
inline double hausdorff_measure(const VPolytope& p) {
    if (p.empty()) return 0.0;
    if (p.dim == 0) return 1.0;
    std::vector<Vec> diffs;
    for (std::size_t i = 1; i < p.vertices.size(); ++i) diffs.push_back(sub(p.vertices[i], p.vertices[0]));
    std::vector<Vec> basis = orthonormal_span(diffs);
    int m = static_cast<int>(basis.size());
    std::vector<Vec> coords;
    coords.reserve(p.vertices.size());
    for (const Vec& v : p.vertices) {
        Vec rel = sub(v, p.vertices[0]);
        Vec q(m);
        for (int a = 0; a < m; ++a) q[a] = dot(rel, basis[a]);
        coords.push_back(std::move(q));
    }
    return detail::volume_in_frame(coords, p.active, m);
}

// Total r-face content L_r(p): sum of the r-dimensional Hausdorff measures of
// the r-faces. L_0 is the vertex count, L_dim the intrinsic volume.
inline double face_content(const VPolytope& p, int r) {
    if (p.empty()) return 0.0;
    if (r < 0) throw DegenerateInput("face_content: negative r");
    if (r > p.dim) return 0.0;
    if (r == 0) return static_cast<double>(p.vertex_count());
    if (r == p.dim) return hausdorff_measure(p);
    double s = 0.0;
    for (const VPolytope& f : faces(p, r)) s += hausdorff_measure(f);
    return s;
}

struct SectionResult {
    bool empty = false;
    std::vector<Halfspace> halfspaces; // expressed in the basis coordinates of L
};

// Restriction of a halfspace system to the linear subspace spanned by an
// orthonormal basis. Halfspaces parallel to L are dropped when they contain L
// and make the section empty when they exclude it.
inline SectionResult section(const std::vector<Halfspace>& halfspaces, const std::vector<Vec>& basis,
                             double parallel_tol = 1e-12) {
    SectionResult out;
    const int j = static_cast<int>(basis.size());
    for (const Halfspace& h : halfspaces) {
        Vec a(j);
        for (int c = 0; c < j; ++c) a[c] = dot(h.normal, basis[c]);
        double an = norm(a);
        if (an <= parallel_tol) {
            if (h.offset < -parallel_tol) {
                out.empty = true;
                out.halfspaces.clear();
                return out;
            }
            continue; // contains L entirely
        }
        for (double& x : a) x /= an;
        out.halfspaces.push_back({std::move(a), h.offset / an});
    }
    return out;
}

} // namespace phtess
