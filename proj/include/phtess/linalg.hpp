#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <vector>

#include "phtess/base.hpp"

namespace phtess {

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec normalized(const Vec& a) {
    double n = norm(a);
    Vec r(a);
    for (double& x : r) x /= n;
    return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec r(a);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

inline Vec add(const Vec& a, const Vec& b) {
    Vec r(a);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
    return r;
}

inline Vec scaled(const Vec& a, double c) {
    Vec r(a);
    for (double& x : r) x *= c;
    return r;
}

inline Vec cross3(const Vec& a, const Vec& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// Solves A x = b for small n (row-major A), Gaussian elimination with partial
// pivoting. Returns false if the matrix is singular relative to its scale.
inline bool solve_linear(int n, double* A, double* b, double* x, double pivot_rel) {
    double scale = 0.0;
    for (int i = 0; i < n * n; ++i) scale = std::max(scale, std::abs(A[i]));
    if (scale == 0.0) return false;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
        if (std::abs(A[piv * n + col]) < pivot_rel * scale) return false;
        if (piv != col) {
            for (int c = col; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        double d = A[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            double f = A[r * n + col] / d;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r * n + c] * x[c];
        x[r] = s / A[r * n + r];
    }
    return true;
}

// j-volume of the parallelepiped spanned by the rows of V (j rows, dim columns),
// via the Gram determinant. Returns 0 for linearly dependent input.
inline double gram_volume(const double* rows, int j, int dim) {
    if (j == 0) return 1.0;
    double G[64];
    double diag_max = 0.0;
    for (int a = 0; a < j; ++a)
        for (int b = a; b < j; ++b) {
            double s = 0.0;
            for (int c = 0; c < dim; ++c) s += rows[a * dim + c] * rows[b * dim + c];
            G[a * j + b] = s;
            G[b * j + a] = s;
            if (a == b) diag_max = std::max(diag_max, s);
        }
    // Cholesky; the Gram matrix is positive semidefinite. Pivots at rounding
    // scale are flushed to zero, otherwise exactly dependent rows surface as
    // sqrt(eps) instead of 0.
    double prod = 1.0;
    for (int a = 0; a < j; ++a) {
        double d = G[a * j + a];
        for (int c = 0; c < a; ++c) d -= G[a * j + c] * G[a * j + c];
        if (d <= 1e-12 * diag_max) return 0.0;
        d = std::sqrt(d);
        prod *= d;
        G[a * j + a] = d;
        for (int r = a + 1; r < j; ++r) {
            double s = G[r * j + a];
            for (int c = 0; c < a; ++c) s -= G[r * j + c] * G[a * j + c];
            G[r * j + a] = s / d;
        }
    }
    return prod;
}

inline double parallelepiped_volume(const std::vector<Vec>& vectors) {
    if (vectors.empty()) return 1.0;
    int dim = static_cast<int>(vectors[0].size());
    int j = static_cast<int>(vectors.size());
    std::vector<double> rows(static_cast<std::size_t>(j) * dim);
    for (int a = 0; a < j; ++a) std::copy(vectors[a].begin(), vectors[a].end(), rows.begin() + a * dim);
    return gram_volume(rows.data(), j, dim);
}

// Modified Gram-Schmidt with re-orthogonalization. Returns the orthonormal
// basis of span(vectors); rank is implied by the result size.
inline std::vector<Vec> orthonormal_span(const std::vector<Vec>& vectors, double pivot_rel = 1e-10) {
    std::vector<Vec> basis;
    if (vectors.empty()) return basis;
    double scale = 0.0;
    for (const Vec& v : vectors) scale = std::max(scale, norm(v));
    if (scale == 0.0) return basis;
    for (const Vec& v : vectors) {
        Vec w(v);
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& b : basis) {
                double c = dot(w, b);
                for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * b[i];
            }
        double n = norm(w);
        if (n > pivot_rel * scale) {
            for (double& x : w) x /= n;
            basis.push_back(std::move(w));
        }
    }
    return basis;
}

// Orthonormal basis of the orthogonal complement of span(vectors) in R^dim.
inline std::vector<Vec> orthonormal_complement(const std::vector<Vec>& vectors, int dim,
                                               double pivot_rel = 1e-10) {
    std::vector<Vec> basis = orthonormal_span(vectors, pivot_rel);
    std::vector<Vec> result;
    for (int e = 0; e < dim && static_cast<int>(basis.size()) < dim; ++e) {
        Vec w(dim, 0.0);
        w[e] = 1.0;
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& b : basis) {
                double c = dot(w, b);
                for (int i = 0; i < dim; ++i) w[i] -= c * b[i];
            }
        double n = norm(w);
        if (n > 1e-7) {
            for (double& x : w) x /= n;
            basis.push_back(w);
            result.push_back(basis.back());
        }
    }
    return result;
}

inline int affine_rank(const std::vector<Vec>& points, double pivot_rel = 1e-9) {
    if (points.empty()) return -1;
    if (points.size() == 1) return 0;
    std::vector<Vec> diffs;
    diffs.reserve(points.size() - 1);
    for (std::size_t i = 1; i < points.size(); ++i) diffs.push_back(sub(points[i], points[0]));
    double scale = 0.0;
    for (const Vec& d : diffs) scale = std::max(scale, norm(d));
    if (scale == 0.0) return 0;
    return static_cast<int>(orthonormal_span(diffs, pivot_rel).size());
}

// Eigenvalues of a small symmetric matrix (row-major), cyclic Jacobi sweeps.
inline std::vector<double> symmetric_eigenvalues(std::vector<double> A, int n) {
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A[p * n + q] * A[p * n + q];
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                double apq = A[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                double theta = (A[q * n + q] - A[p * n + p]) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = A[k * n + p], akq = A[k * n + q];
                    A[k * n + p] = c * akp - s * akq;
                    A[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = A[p * n + k], aqk = A[q * n + k];
                    A[p * n + k] = c * apk - s * aqk;
                    A[q * n + k] = s * apk + c * aqk;
                }
            }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = A[i * n + i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

// Area of a convex planar polygon given in arbitrary vertex order.
inline double convex_polygon_area(std::vector<std::array<double, 2>> pts) {
    if (pts.size() < 3) return 0.0;
    double cx = 0.0, cy = 0.0;
    for (auto& p : pts) {
        cx += p[0];
        cy += p[1];
    }
    cx /= pts.size();
    cy /= pts.size();
    std::sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
        return std::atan2(a[1] - cy, a[0] - cx) < std::atan2(b[1] - cy, b[0] - cx);
    });
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        s += a[0] * b[1] - b[0] * a[1];
    }
    return 0.5 * std::abs(s);
}

} // namespace phtess
