#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "phtess/base.hpp"
#include "phtess/oracle.hpp"
#include "phtess/simulate.hpp"

namespace phtess {

// Fixed CSV contract: this exact header, '.' decimal separator, 17
// significant digits, one row per (k, r, s, estimator). z_score is empty when
// no oracle comparison exists; wall_time_ms is empty unless timing was
// requested, so default runs are byte-stable for equal seeds.
inline const char* csv_header() {
    return "k,r,s,oracle_value,mc_mean,mc_std_error,z_score,estimator_id,replicates,wall_time_ms";
}

inline std::string csv_report(const std::vector<EstimateSummary>& rows, const std::string& wall_time_ms) {
    std::ostringstream out;
    out << csv_header() << "\n";
    for (const auto& r : rows) {
        out << r.k << ',' << r.r << ',' << r.s << ',';
        out << (r.has_oracle ? fmt_g17(r.oracle_value) : std::string()) << ',';
        out << fmt_g17(r.mean) << ',' << fmt_g17(r.std_error) << ',';
        if (r.has_oracle && r.std_error > 0.0) out << fmt_g17(r.z_score);
        out << ',' << r.estimator_id << ',' << r.replicates << ',' << wall_time_ms << "\n";
    }
    return out.str();
}

inline std::string moment_table_text(const MomentTable& t) {
    std::ostringstream out;
    out << "# typical k-face moment table\n";
    out << "k " << t.k << "\n";
    out << "d " << t.d << "\n";
    out << "intensity " << fmt_g17(t.gamma_hat) << "\n";
    out << "cell_intensity " << fmt_g17(t.cell_intensity) << "\n";
    out << "first_moments\n";
    for (int r = 0; r <= t.k; ++r) out << fmt_g17(t.first_moments[r]) << (r == t.k ? "\n" : " ");
    out << "second_moments\n";
    for (int r = 0; r <= t.k; ++r)
        for (int s = 0; s <= t.k; ++s)
            out << fmt_g17(t.second_moments[r][s]) << (s == t.k ? "\n" : " ");
    out << "covariances\n";
    for (int r = 0; r <= t.k; ++r)
        for (int s = 0; s <= t.k; ++s)
            out << fmt_g17(t.covariances[r][s]) << (s == t.k ? "\n" : " ");
    out << "symmetrization_discrepancy " << fmt_g17(t.symmetrization_discrepancy) << "\n";
    out << "min_covariance_eigenvalue " << fmt_g17(t.min_covariance_eigenvalue) << "\n";
    return out.str();
}

inline std::string bounds_text(const BoundsReport& b) {
    std::ostringstream out;
    out << "# vertex-number variance bounds\n";
    out << "k " << b.k << "\n";
    out << "variance " << fmt_g17(b.variance) << "\n";
    out << "lower " << fmt_g17(b.lower) << "\n";
    out << "upper " << fmt_g17(b.upper) << "\n";
    out << "within_bounds " << (b.within_bounds ? 1 : 0) << "\n";
    if (b.has_stability) {
        out << "phi " << fmt_g17(b.phi) << "\n";
        out << "phi_lower " << fmt_g17(b.phi_lower) << "\n";
        out << "phi_upper " << fmt_g17(b.phi_upper) << "\n";
    }
    return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write file: " + path);
    f << content;
}

} // namespace phtess
