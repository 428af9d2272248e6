#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace phtess {

using Vec = std::vector<double>;

// Numerical policy shared by the geometry kernel. All thresholds can be
// overridden through the run configuration.
struct Tolerances {
    double pivot_rel = 1e-10;         // relative pivot threshold for singular systems
    double vertex_merge = 1e-9;       // vertex coincidence, scaled by (1 + |v|)
    double on_constraint = 1e-9;      // constraint activity, scaled by (1 + |v|)
    double unbounded_box_scale = 1e7; // synthetic bounding box for unboundedness detection
    int generator_cap = 22;           // sign-enumeration cap for polar bodies
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateDistribution : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateZonotope : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooManyGenerators : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegeneratePosition : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SimulationDidNotConverge : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    if (k > n - k) k = n - k;
    double b = 1.0;
    for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
    return std::round(b);
}

inline double pow_int(double x, int n) {
    if (n < 0) return 1.0 / pow_int(x, -n);
    double r = 1.0, b = x;
    while (n > 0) {
        if (n & 1) r *= b;
        b *= b;
        n >>= 1;
    }
    return r;
}

// Volume of the j-dimensional unit ball, exact integer/half-integer recurrence.
inline double unit_ball_volume(int j) {
    if (j < 0) throw std::invalid_argument("unit_ball_volume: negative dimension");
    double v = (j % 2 == 0) ? 1.0 : 2.0;
    for (int m = (j % 2 == 0) ? 2 : 3; m <= j; m += 2) v *= 2.0 * M_PI / m;
    return v;
}

// Visits every k-element subset of {0,...,n-1} in lexicographic order.
template <class F>
inline void for_each_subset(int n, int k, F&& fn) {
    if (k < 0 || k > n) return;
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    while (true) {
        fn(const_cast<const std::vector<int>&>(idx));
        int i = k - 1;
        while (i >= 0 && idx[i] == n - k + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int t = i + 1; t < k; ++t) idx[t] = idx[t - 1] + 1;
    }
}

// Compensated accumulator; subset sums can run to millions of terms.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;
    void add(double x) {
        double y = x - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline double rel_diff(double a, double b) {
    double scale = std::max(std::abs(a), std::abs(b));
    if (scale == 0.0) return 0.0;
    return std::abs(a - b) / scale;
}

} // namespace phtess
