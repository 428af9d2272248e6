#pragma once

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "phtess/base.hpp"
#include "phtess/linalg.hpp"
#include "phtess/zonotope.hpp"

namespace phtess {

// gamma = V_d(associated zonoid): intensity of the cell process.
inline double cell_intensity(const DirectionalDistribution& dist) {
    double v = intrinsic_volume(associated_zonotope(dist), dist.d);
    if (!(v > 0.0)) throw DegenerateDistribution("cell_intensity: degenerate directional distribution");
    return v;
}

// E L_r(Z^(k)) = 2^{k-r} C(k,r) V_{d-r}(Pi) / (gamma C(d,r)).
inline double first_moment(const DirectionalDistribution& dist, int k, int r) {
    const int d = dist.d;
    if (k < 1 || k > d || r < 0 || r > k) throw DegenerateInput("first_moment: bad (k, r)");
    Zonotope pi = associated_zonotope(dist);
    double gamma = intrinsic_volume(pi, d);
    return pow_int(2.0, k - r) * binomial(k, r) * intrinsic_volume(pi, d - r) / (gamma * binomial(d, r));
}

// Evaluates the second-moment formula for discrete directional distributions.
// The tuple integral over (d-s)-tuples of directions is summed exactly: it is
// factored over the unordered (d-j)-subset S fixing the subspace
// L = span(S)^perp, with a completion sum over the remaining (j-s) slots.
// Per-subset geometry (projected intrinsic volumes and polar volumes) is
// cached so that a full moment table reuses one pass.
class MomentEngine {
public:
    struct SubsetGeom {
        double weight = 0.0;            // product of atom weights over S
        double pvol = 0.0;              // V_j((Pi|L)°)
        std::array<double, 8> vols{};   // V_0..V_j of Pi|L
        bool ok = false;                // false when the subset directions are dependent
    };

    MomentEngine(const DirectionalDistribution& dist, int k,
                 const Tolerances& tol = default_tolerances())
        : dist_(dist), tol_(tol), k_(k), d_(dist.d), n_(dist.atom_count()) {
        if (k_ < 1 || k_ > d_) throw DegenerateInput("MomentEngine: k out of range");
        pi_ = associated_zonotope(dist_);
        gamma_ = intrinsic_volume(pi_, d_);
        if (!(gamma_ > 0.0)) throw DegenerateDistribution("MomentEngine: degenerate distribution");
    }

    int k() const { return k_; }
    int d() const { return d_; }
    double gamma() const { return gamma_; }

    // E(L_r L_s)(Z^(k))
    double second_moment(int r, int s) {
        if (r < 0 || s < 0 || r > k_ || s > k_)
            throw DegenerateInput("second_moment: (r, s) out of range");
        KahanSum total;
        for (int j = std::max(r, s); j <= k_; ++j) {
            double coeff = factorial(k_) * factorial(j) * pow_int(2.0, k_ - 2 * j) *
                           factorial(d_ - j) / factorial(k_ - j) *
                           pow_int(dist_.intensity, d_ - s) / (gamma_ * factorial(d_));
            double inner;
            if (j == 0) {
                inner = level0_sum();
            } else {
                const auto& lvl = level(j);
                const auto& comp = completion(j, s);
                KahanSum in;
                for (std::size_t t = 0; t < lvl.size(); ++t)
                    if (lvl[t].ok) in.add(lvl[t].weight * lvl[t].vols[j - r] * lvl[t].pvol * comp[t]);
                inner = in.value();
            }
            total.add(coeff * inner);
        }
        return total.value();
    }

    // Stability functional: the j < d part of the vertex-number second moment
    // with volume-product integrand, shifted by -2^{3d}/d!. Requires k = d.
    double stability_phi() {
        if (k_ != d_) throw DegenerateInput("stability_phi: requires k = d");
        KahanSum phi;
        for (int j = 0; j <= d_ - 1; ++j) {
            double coeff = pow_int(2.0, 2 * (d_ - j)) * factorial(j) *
                           pow_int(dist_.intensity, d_) / (gamma_ * factorial(d_));
            double inner;
            if (j == 0) {
                inner = level0_sum();
            } else {
                const auto& lvl = level(j);
                const auto& comp = completion(j, 0);
                KahanSum in;
                for (std::size_t t = 0; t < lvl.size(); ++t)
                    if (lvl[t].ok) in.add(lvl[t].weight * lvl[t].vols[j] * lvl[t].pvol * comp[t]);
                inner = in.value();
            }
            phi.add(coeff * inner);
        }
        phi.add(-pow_int(2.0, 3 * d_) / factorial(d_));
        return phi.value();
    }

    // Volume products of every projected zonoid touched at level j >= 1, as
    // (j, vp) pairs; exposed for the sandwich-bound checks.
    std::vector<std::pair<int, double>> projected_volume_products() {
        std::vector<std::pair<int, double>> out;
        for (int j = 1; j <= k_; ++j)
            for (const auto& sg : level(j))
                if (sg.ok) out.emplace_back(j, sg.vols[j] * sg.pvol);
        return out;
    }

private:
    const std::vector<SubsetGeom>& level(int j) {
        auto it = levels_.find(j);
        if (it != levels_.end()) return it->second;
        std::vector<SubsetGeom> lvl;
        const int sz = d_ - j;
        std::vector<Vec> dirs(sz, Vec(d_));
        for_each_subset(n_, sz, [&](const std::vector<int>& S) {
            SubsetGeom sg;
            sg.weight = 1.0;
            for (int i = 0; i < sz; ++i) {
                dirs[i] = dist_.atoms[S[i]].direction;
                sg.weight *= dist_.atoms[S[i]].weight;
            }
            std::vector<Vec> basis = orthonormal_complement(dirs, d_, tol_.pivot_rel);
            if (static_cast<int>(basis.size()) != j) {
                lvl.push_back(sg); // dependent directions; contributes nothing
                return;
            }
            Zonotope proj = project(pi_, basis);
            for (int t = 0; t <= j; ++t) sg.vols[t] = intrinsic_volume(proj, t);
            sg.pvol = polar_volume(proj, tol_);
            sg.ok = true;
            lvl.push_back(sg);
        });
        return levels_.emplace(j, std::move(lvl)).first->second;
    }

    // j = 0 term (only reachable for r = s = 0): sum over d-subsets of
    // weighted parallelepiped volumes of the directions.
    double level0_sum() {
        if (!level0_valid_) {
            KahanSum sum;
            std::vector<double> rows(static_cast<std::size_t>(d_) * d_);
            for_each_subset(n_, d_, [&](const std::vector<int>& S) {
                double w = 1.0;
                for (int i = 0; i < d_; ++i) {
                    const Vec& u = dist_.atoms[S[i]].direction;
                    std::copy(u.begin(), u.end(), rows.begin() + i * d_);
                    w *= dist_.atoms[S[i]].weight;
                }
                sum.add(w * gram_volume(rows.data(), d_, d_));
            });
            level0_ = sum.value();
            level0_valid_ = true;
        }
        return level0_;
    }

    // completion(j, s)[t] = sum over (j-s)-subsets T disjoint from the t-th
    // (d-j)-subset S of  prod(w_T) * nabla_{d-s}(directions of S and T).
    const std::vector<double>& completion(int j, int s) {
        auto key = std::make_pair(j, s);
        auto it = completions_.find(key);
        if (it != completions_.end()) return it->second;
        const int sz = d_ - j;     // |S|
        const int tsz = j - s;     // |T|
        const int rows_n = d_ - s; // tuple length
        std::vector<double> comp;
        std::vector<double> rows(static_cast<std::size_t>(rows_n) * d_);
        std::vector<int> complement;
        complement.reserve(n_);
        for_each_subset(n_, sz, [&](const std::vector<int>& S) {
            for (int i = 0; i < sz; ++i) {
                const Vec& u = dist_.atoms[S[i]].direction;
                std::copy(u.begin(), u.end(), rows.begin() + i * d_);
            }
            if (tsz == 0) {
                comp.push_back(gram_volume(rows.data(), rows_n, d_));
                return;
            }
            complement.clear();
            int si = 0;
            for (int a = 0; a < n_; ++a) {
                if (si < sz && S[si] == a) {
                    ++si;
                    continue;
                }
                complement.push_back(a);
            }
            KahanSum sum;
            for_each_subset(static_cast<int>(complement.size()), tsz, [&](const std::vector<int>& Tsel) {
                double w = 1.0;
                for (int i = 0; i < tsz; ++i) {
                    int a = complement[Tsel[i]];
                    const Vec& u = dist_.atoms[a].direction;
                    std::copy(u.begin(), u.end(), rows.begin() + (sz + i) * d_);
                    w *= dist_.atoms[a].weight;
                }
                sum.add(w * gram_volume(rows.data(), rows_n, d_));
            });
            comp.push_back(sum.value());
        });
        return completions_.emplace(key, std::move(comp)).first->second;
    }

    const DirectionalDistribution& dist_;
    Tolerances tol_;
    int k_, d_, n_;
    Zonotope pi_;
    double gamma_ = 0.0;
    std::map<int, std::vector<SubsetGeom>> levels_;
    std::map<std::pair<int, int>, std::vector<double>> completions_;
    double level0_ = 0.0;
    bool level0_valid_ = false;
};

inline double second_moment_general(const DirectionalDistribution& dist, int k, int r, int s,
                                    const Tolerances& tol = default_tolerances()) {
    MomentEngine engine(dist, k, tol);
    return engine.second_moment(r, s);
}

// E(L_r L_d)(Z) = d!/(2^d gamma) V_{d-r}(Pi) V_d(Pi°): the volume-weighted
// route, read with the tuple integrations deleted.
inline double second_moment_volume_weighted(const DirectionalDistribution& dist, int r,
                                            const Tolerances& tol = default_tolerances()) {
    const int d = dist.d;
    if (r < 0 || r > d) throw DegenerateInput("second_moment_volume_weighted: bad r");
    Zonotope pi = associated_zonotope(dist);
    double gamma = intrinsic_volume(pi, d);
    return factorial(d) / (pow_int(2.0, d) * gamma) * intrinsic_volume(pi, d - r) *
           polar_volume(pi, tol);
}

// Isotropic closed form for E(L_r L_s)(Z^(k)), kappa parametrization.
inline double isotropic_second_moment(double gamma_hat, int d, int k, int r, int s) {
    if (!(gamma_hat > 0.0) || k < 1 || k > d || r < 0 || s < 0 || r > k || s > k)
        throw DegenerateInput("isotropic_second_moment: bad arguments");
    double x = d * unit_ball_volume(d) / (unit_ball_volume(d - 1) * gamma_hat);
    KahanSum sum;
    for (int j = std::max(r, s); j <= k; ++j) {
        double kj = unit_ball_volume(j);
        sum.add(kj * kj * binomial(j, r) * binomial(j, s) / (pow_int(4.0, j) * factorial(k - j)));
    }
    return pow_int(2.0, k) * factorial(k) / (unit_ball_volume(r) * unit_ball_volume(s)) *
           pow_int(x, r + s) * sum.value();
}

// The same quantity through the Gamma-function parametrization.
inline double isotropic_second_moment_gamma_form(double gamma_hat, int d, int k, int r, int s) {
    if (!(gamma_hat > 0.0) || k < 1 || k > d || r < 0 || s < 0 || r > k || s > k)
        throw DegenerateInput("isotropic_second_moment_gamma_form: bad arguments");
    auto falling = [](int j, int t) { return factorial(j) / factorial(j - t); };
    double pref = pow_int(2.0, k) * std::sqrt(M_PI) /
                  (std::tgamma(0.5 * (r + 1)) * std::tgamma(0.5 * (s + 1)));
    double ratio = std::exp(std::lgamma(0.5 * (d + 1)) - std::lgamma(0.5 * d)) / gamma_hat;
    pref *= pow_int(ratio, r + s);
    KahanSum sum;
    for (int j = std::max(r, s); j <= k; ++j) {
        double g = std::exp(std::lgamma(0.5 * (j + 1)) - std::lgamma(0.5 * j + 1.0));
        sum.add(binomial(k, j) * pow_int(M_PI / 2.0, j) * g * falling(j, r) * falling(j, s));
    }
    return pref * sum.value();
}

// Exact isotropic counterparts of the zonoid-based first moments: the
// associated zonoid is the ball of radius intensity * kappa_{d-1} / (d kappa_d).
inline double isotropic_zonoid_radius(double gamma_hat, int d) {
    return gamma_hat * unit_ball_volume(d - 1) / (d * unit_ball_volume(d));
}

inline double isotropic_cell_intensity(double gamma_hat, int d) {
    return unit_ball_volume(d) * pow_int(isotropic_zonoid_radius(gamma_hat, d), d);
}

inline double isotropic_first_moment(double gamma_hat, int d, int k, int r) {
    if (k < 1 || k > d || r < 0 || r > k) throw DegenerateInput("isotropic_first_moment: bad (k, r)");
    double R = isotropic_zonoid_radius(gamma_hat, d);
    double v_ball = binomial(d, d - r) * unit_ball_volume(d) / unit_ball_volume(r); // V_{d-r}(B^d)
    double v = v_ball * pow_int(R, d - r);
    return pow_int(2.0, k - r) * binomial(k, r) * v /
           (isotropic_cell_intensity(gamma_hat, d) * binomial(d, r));
}

inline double cuboid_combinatorial_sum(int d, int r, int s) {
    KahanSum sum;
    for (int j = std::max(r, s); j <= d; ++j) sum.add(binomial(d, j) * binomial(j, r) * binomial(j, s));
    return sum.value();
}

// Quasi-isotropic cuboid process, k = d. Prefactor 2^d a^{-(r+s)} with the
// associated-zonoid cube edge a = gamma_hat / d.
inline double cuboid_second_moment(double gamma_hat, int d, int r, int s) {
    if (d < 2) throw DegenerateInput("cuboid_second_moment: requires d >= 2");
    if (!(gamma_hat > 0.0) || r < 0 || s < 0 || r > d || s > d)
        throw DegenerateInput("cuboid_second_moment: bad arguments");
    return pow_int(2.0, d) * pow_int(static_cast<double>(d) / gamma_hat, r + s) *
           cuboid_combinatorial_sum(d, r, s);
}

// Alternate prefactor normalization 2^{d(r+s+1)} gamma_hat^{-(r+s)}; kept so
// the validator can report which variant the general formula matches.
inline double cuboid_second_moment_alt(double gamma_hat, int d, int r, int s) {
    if (d < 2) throw DegenerateInput("cuboid_second_moment_alt: requires d >= 2");
    if (!(gamma_hat > 0.0) || r < 0 || s < 0 || r > d || s > d)
        throw DegenerateInput("cuboid_second_moment_alt: bad arguments");
    return pow_int(2.0, d * (r + s + 1)) / pow_int(gamma_hat, r + s) *
           cuboid_combinatorial_sum(d, r, s);
}

// Right side of the sharp variance inequality for the vertex number.
inline double vertex_variance_upper_bound(int k) {
    KahanSum sum;
    for (int j = 0; j <= k; ++j) {
        double kj = unit_ball_volume(j);
        sum.add(kj * kj / (pow_int(4.0, j) * factorial(k - j)));
    }
    return pow_int(2.0, k) * factorial(k) * sum.value() - pow_int(4.0, k);
}

inline double stability_lower_constant(int d) { return -pow_int(4.0, d) / factorial(d); }

inline double stability_upper_constant(int d) {
    KahanSum sum;
    for (int j = 0; j <= d - 1; ++j) {
        double kj = unit_ball_volume(j);
        sum.add(pow_int(2.0, 2 * (d - j)) * kj * kj / factorial(d - j));
    }
    return sum.value() - pow_int(2.0, 3 * d) / factorial(d);
}

struct StabilityReport {
    double phi = 0.0;
    double lower = 0.0; // c_d
    double upper = 0.0; // C_d
};

inline StabilityReport stability_functional(const DirectionalDistribution& dist,
                                            const Tolerances& tol = default_tolerances()) {
    MomentEngine engine(dist, dist.d, tol);
    return {engine.stability_phi(), stability_lower_constant(dist.d), stability_upper_constant(dist.d)};
}

struct BoundsReport {
    int k = 0;
    double variance = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool within_bounds = false;
    bool has_stability = false; // populated for k = d
    double phi = 0.0;
    double phi_lower = 0.0;
    double phi_upper = 0.0;
};

inline BoundsReport variance_bounds(const DirectionalDistribution& dist, int k,
                                    const Tolerances& tol = default_tolerances()) {
    if (k < 2 || k > dist.d) throw DegenerateInput("variance_bounds: requires 2 <= k <= d");
    BoundsReport rep;
    rep.k = k;
    MomentEngine engine(dist, k, tol);
    rep.variance = engine.second_moment(0, 0) - pow_int(4.0, k);
    rep.lower = 0.0;
    rep.upper = vertex_variance_upper_bound(k);
    rep.within_bounds = rep.variance >= rep.lower - 1e-8 && rep.variance <= rep.upper + 1e-8;
    if (k == dist.d) {
        rep.has_stability = true;
        rep.phi = engine.stability_phi();
        rep.phi_lower = stability_lower_constant(dist.d);
        rep.phi_upper = stability_upper_constant(dist.d);
    }
    return rep;
}

// Var V_d(Z) / (E V_d(Z))^2 = 2^{-d} d! vp(Pi) - 1.
inline double volume_variance_ratio(const DirectionalDistribution& dist,
                                    const Tolerances& tol = default_tolerances()) {
    return pow_int(2.0, -dist.d) * factorial(dist.d) *
               volume_product(associated_zonotope(dist), tol) -
           1.0;
}

struct MomentTable {
    int k = 0;
    int d = 0;
    double gamma_hat = 0.0;
    double cell_intensity = 0.0;
    std::vector<double> first_moments;                // E L_r, r = 0..k
    std::vector<std::vector<double>> second_moments;  // E(L_r L_s)
    std::vector<std::vector<double>> covariances;
    double symmetrization_discrepancy = 0.0; // max relative (r,s)/(s,r) gap
    double min_covariance_eigenvalue = 0.0;
    double covariance_trace = 0.0;
};

namespace detail {

inline void finish_moment_table(MomentTable& t, const std::vector<std::vector<double>>& raw) {
    const int k = t.k;
    t.second_moments.assign(k + 1, std::vector<double>(k + 1, 0.0));
    for (int r = 0; r <= k; ++r)
        for (int s = 0; s <= k; ++s) {
            t.second_moments[r][s] = 0.5 * (raw[r][s] + raw[s][r]);
            t.symmetrization_discrepancy =
                std::max(t.symmetrization_discrepancy, rel_diff(raw[r][s], raw[s][r]));
        }
    t.covariances.assign(k + 1, std::vector<double>(k + 1, 0.0));
    for (int r = 0; r <= k; ++r)
        for (int s = 0; s <= k; ++s)
            t.covariances[r][s] = t.second_moments[r][s] - t.first_moments[r] * t.first_moments[s];
    std::vector<double> flat((k + 1) * (k + 1));
    for (int r = 0; r <= k; ++r)
        for (int s = 0; s <= k; ++s) flat[r * (k + 1) + s] = t.covariances[r][s];
    std::vector<double> ev = symmetric_eigenvalues(flat, k + 1);
    t.min_covariance_eigenvalue = ev.front();
    for (int r = 0; r <= k; ++r) t.covariance_trace += t.covariances[r][r];
}

} // namespace detail

inline MomentTable build_moment_table(const DirectionalDistribution& dist, int k,
                                      const Tolerances& tol = default_tolerances()) {
    MomentTable t;
    t.k = k;
    t.d = dist.d;
    t.gamma_hat = dist.intensity;
    MomentEngine engine(dist, k, tol);
    t.cell_intensity = engine.gamma();
    t.first_moments.resize(k + 1);
    for (int r = 0; r <= k; ++r) t.first_moments[r] = first_moment(dist, k, r);
    std::vector<std::vector<double>> raw(k + 1, std::vector<double>(k + 1, 0.0));
    for (int r = 0; r <= k; ++r)
        for (int s = 0; s <= k; ++s) raw[r][s] = engine.second_moment(r, s);
    detail::finish_moment_table(t, raw);
    return t;
}

// Moment table for the exactly isotropic process, entirely from closed forms.
inline MomentTable build_isotropic_moment_table(double gamma_hat, int d, int k) {
    MomentTable t;
    t.k = k;
    t.d = d;
    t.gamma_hat = gamma_hat;
    t.cell_intensity = isotropic_cell_intensity(gamma_hat, d);
    t.first_moments.resize(k + 1);
    for (int r = 0; r <= k; ++r) t.first_moments[r] = isotropic_first_moment(gamma_hat, d, k, r);
    std::vector<std::vector<double>> raw(k + 1, std::vector<double>(k + 1, 0.0));
    for (int r = 0; r <= k; ++r)
        for (int s = 0; s <= k; ++s) raw[r][s] = isotropic_second_moment(gamma_hat, d, k, r, s);
    detail::finish_moment_table(t, raw);
    return t;
}

} // namespace phtess
