#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phtess/simulate.hpp"
#include "support.hpp"

using namespace phtess;
using namespace phtess::testing;

namespace {

ProcessSample square_sample() {
    ProcessSample s;
    s.window_radius = 10.0;
    s.hyperplanes = {{{1.0, 0.0}, 1.0}, {{1.0, 0.0}, -1.0}, {{0.0, 1.0}, 1.0}, {{0.0, 1.0}, -1.0}};
    return s;
}

} // namespace

TEST_SUITE("sample_process") {
    TEST_CASE("hit count has the prescribed mean") {
        auto dist = cuboid_distribution(2, 1.0);
        Rng rng(1);
        double R = 10.0;
        long total = 0;
        int reps = 4000;
        for (int i = 0; i < reps; ++i) total += sample_process(dist, R, rng).hyperplanes.size();
        double mean = static_cast<double>(total) / reps;
        double expect = dist.intensity * 2.0 * R; // 20
        double sigma = std::sqrt(expect / reps);
        CHECK(std::abs(mean - expect) < 4.0 * sigma);
    }

    TEST_CASE("offsets avoid the origin and stay in the window") {
        auto dist = cuboid_distribution(3, 2.0);
        Rng rng(2);
        for (int i = 0; i < 50; ++i) {
            auto s = sample_process(dist, 5.0, rng);
            for (const auto& h : s.hyperplanes) {
                CHECK(std::abs(h.offset) > 1e-12);
                CHECK(std::abs(h.offset) <= 5.0);
            }
        }
    }

    TEST_CASE("vanishing window gives an empty sample") {
        auto dist = cuboid_distribution(2, 1.0);
        Rng rng(12);
        CHECK(sample_process(dist, 1e-9, rng).hyperplanes.empty());
    }

    TEST_CASE("direction frequencies follow the weights") {
        Rng seed_rng(3);
        auto dist = random_distribution(seed_rng, 2, 4, 1.5);
        Rng rng(4);
        std::vector<long> counts(dist.atom_count(), 0);
        long total = 0;
        for (int i = 0; i < 400; ++i) {
            auto s = sample_process(dist, 8.0, rng);
            for (const auto& h : s.hyperplanes) {
                for (int a = 0; a < dist.atom_count(); ++a)
                    if (std::abs(std::abs(dot(h.normal, dist.atoms[a].direction)) - 1.0) < 1e-9) {
                        ++counts[a];
                        break;
                    }
                ++total;
            }
        }
        for (int a = 0; a < dist.atom_count(); ++a) {
            double freq = static_cast<double>(counts[a]) / total;
            double w = dist.atoms[a].weight;
            CHECK(std::abs(freq - w) < 4.0 * std::sqrt(w * (1.0 - w) / total));
        }
    }
}

TEST_SUITE("zero_cell") {
    TEST_CASE("four fixed lines give the centered square") {
        auto zc = zero_cell(square_sample());
        REQUIRE(zc.status == ZeroCellResult::Status::ok);
        CHECK(zc.cell.vertex_count() == 4);
        CHECK(face_content(zc.cell, 0) == 4.0);
        CHECK(hausdorff_measure(zc.cell) == doctest::Approx(4.0).epsilon(1e-12));
    }

    TEST_CASE("parallel lines only leave an unbounded strip") {
        ProcessSample s;
        s.window_radius = 10.0;
        s.hyperplanes = {{{1.0, 0.0}, 0.5}, {{1.0, 0.0}, -0.7}, {{1.0, 0.0}, 2.0}, {{1.0, 0.0}, -3.0}};
        auto zc = zero_cell(s);
        CHECK(zc.status == ZeroCellResult::Status::unbounded);
    }

    TEST_CASE("mean zero-cell vertex number is half the volume product") {
        // volume-weighted vertex mean: E f_0(Z_0) = 2^{-d} d! vp(Pi)
        auto dist = isotropic_discretized_2d(48, 2.0);
        double expect = 0.5 * volume_product(associated_zonotope(dist));
        std::vector<double> cum = cumulative_weights(dist);
        WindowPolicy policy;
        std::vector<double> vals;
        for (long i = 0; i < 3000; ++i) {
            Rng rng = Rng::replicate_stream(77, i);
            auto g = detail::make_replicate_geometry(dist, cum, policy, rng, default_tolerances());
            vals.push_back(face_content(g.zc.cell, 0));
        }
        auto [mean, se] = detail::mean_and_stderr(vals);
        CHECK(std::abs(mean - expect) < 4.0 * se);
    }
}

TEST_SUITE("origin_k_faces") {
    TEST_CASE("no added hyperplanes returns the cell itself") {
        auto zc = zero_cell(square_sample());
        auto pieces = origin_k_faces(zc.support, {}, 2, 2, 10.0);
        REQUIRE(pieces.size() == 1);
        CHECK(hausdorff_measure(pieces[0]) == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(pieces[0].vertex_count() == 4);
    }

    TEST_CASE("two added lines quarter the square") {
        auto zc = zero_cell(square_sample());
        std::vector<Vec> added{{0.6, 0.8}, {-0.8, 0.6}};
        auto pieces = origin_k_faces(zc.support, added, 2, 2, 10.0);
        REQUIRE(pieces.size() == 4);
        double total = 0.0;
        for (const auto& p : pieces) total += hausdorff_measure(p);
        CHECK(total == doctest::Approx(4.0).epsilon(1e-10));
    }

    TEST_CASE("chords split by the other line give four segments") {
        auto zc = zero_cell(square_sample());
        std::vector<Vec> added{{0.6, 0.8}, {-0.8, 0.6}};
        auto pieces = origin_k_faces(zc.support, added, 1, 2, 10.0);
        REQUIRE(pieces.size() == 4);
        for (const auto& p : pieces) {
            CHECK(p.dim == 1);
            CHECK(p.vertex_count() == 2);
        }
    }

    TEST_CASE("piece count matches the general-position formula") {
        Rng rng(11);
        for (int trial = 0; trial < 12; ++trial) {
            int d = 2 + trial % 2;
            auto dist = random_distribution(rng, d, d + 2, 1.5);
            std::vector<double> cum = cumulative_weights(dist);
            auto g = detail::make_replicate_geometry(dist, cum, WindowPolicy{}, rng,
                                                     default_tolerances());
            for (int k = 1; k <= d; ++k)
                for (int s = 0; s <= k; ++s) {
                    std::vector<Vec> added;
                    for (int i = 0; i < d - s; ++i) added.push_back(random_unit(rng, d));
                    auto pieces = origin_k_faces(g.zc.support, added, k, d, g.radius);
                    double expect = binomial(d - s, d - k) * pow_int(2.0, k - s);
                    CHECK(static_cast<double>(pieces.size()) == expect);
                }
        }
    }
}

TEST_SUITE("face_multiplicity_identity") {
    TEST_CASE("square with two added lines, vertex count bookkeeping") {
        auto zc = zero_cell(square_sample());
        std::vector<Vec> added{{0.6, 0.8}, {-0.8, 0.6}};
        auto [lhs, rhs] = face_multiplicity_identity(zc.support, added, 2, 0, 2, 10.0);
        // 4 pieces of 4 vertices each; subsets: the origin (j=0, weight 4),
        // two chords (j=1, weight 2 each, 2 endpoints), the cell (j=2, f_0=4)
        CHECK(lhs == doctest::Approx(16.0));
        CHECK(rhs == doctest::Approx(4.0 + 2.0 * (2.0 + 2.0) + 4.0));
        CHECK(rel_diff(lhs, rhs) < 1e-12);
    }

    TEST_CASE("holds per realization across dimensions and orders") {
        Rng rng(13);
        int checked = 0;
        for (int trial = 0; trial < 10; ++trial) {
            int d = 2 + trial % 2;
            auto dist = random_distribution(rng, d, d + 2 + trial % 3, rng.uniform(0.8, 2.5));
            std::vector<double> cum = cumulative_weights(dist);
            auto g = detail::make_replicate_geometry(dist, cum, WindowPolicy{}, rng,
                                                     default_tolerances());
            for (int k = 1; k <= d; ++k)
                for (int s = 0; s <= k; ++s)
                    for (int r = 0; r <= k; ++r) {
                        std::vector<Vec> added;
                        for (int i = 0; i < d - s; ++i) added.push_back(random_unit(rng, d));
                        auto [lhs, rhs] =
                            face_multiplicity_identity(g.zc.support, added, k, r, d, g.radius);
                        CHECK(rel_diff(lhs, rhs) < 1e-7);
                        ++checked;
                    }
        }
        CHECK(checked > 100);
    }

    TEST_CASE("s = k reduces both sides to the section sum") {
        auto zc = zero_cell(square_sample());
        std::vector<Vec> added{{0.6, 0.8}};
        auto [lhs, rhs] = face_multiplicity_identity(zc.support, added, 1, 1, 2, 10.0);
        auto pieces = origin_k_faces(zc.support, added, 1, 2, 10.0);
        REQUIRE(pieces.size() == 1);
        CHECK(lhs == doctest::Approx(hausdorff_measure(pieces[0])));
        CHECK(rel_diff(lhs, rhs) < 1e-12);
    }
}

TEST_SUITE("estimate_typical_cell_moment") {
    TEST_CASE("cuboid vertex-volume moment is constant across replicates") {
        auto dist = cuboid_distribution(2, 2.0);
        auto es = estimate_typical_cell_moment(dist, 0, 2, 400, 5);
        CHECK(es.std_error == 0.0);
        CHECK(es.mean == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(rel_diff(es.mean, second_moment_volume_weighted(dist, 0)) < 1e-12);
    }

    TEST_CASE("cuboid second vertex moment converges despite the heavy volume weight") {
        // per-replicate values 16/(gamma V_d(Z_0)) vary; the mean is still 16
        auto dist = cuboid_distribution(2, 2.0);
        auto es = estimate_typical_cell_moment(dist, 0, 0, 20000, 8, {}, 2);
        CHECK(std::abs(es.mean - 16.0) < 1.5);
        CHECK(es.std_error > 0.0);
    }

    TEST_CASE("matches the volume-weighted closed form on a random distribution") {
        Rng rng(17);
        auto dist = random_distribution(rng, 2, 4, 1.5);
        auto es = estimate_typical_cell_moment(dist, 0, 2, 4000, 19, {}, 2);
        double oracle = second_moment_volume_weighted(dist, 0);
        REQUIRE(es.std_error > 0.0);
        CHECK(std::abs(es.mean - oracle) < 4.0 * es.std_error);
    }

    TEST_CASE("isotropic second vertex moment") {
        auto dist = isotropic_discretized_2d(60, 1.0);
        auto es = estimate_typical_cell_moment(dist, 0, 0, 10000, 23, {}, 2);
        double oracle = second_moment_general(dist, 2, 0, 0);
        CHECK(std::abs(es.mean - oracle) < 4.0 * es.std_error);
    }
}

TEST_SUITE("estimate_kface_moment") {
    TEST_CASE("cuboid second vertex moment") {
        auto dist = cuboid_distribution(2, 2.0);
        auto es = estimate_kface_moment(dist, 2, 0, 0, 3000, 29, {}, 2);
        CHECK(std::abs(es.mean - 16.0) < 4.0 * es.std_error);
    }

    TEST_CASE("segments always have two endpoints") {
        Rng rng(31);
        auto dist = random_distribution(rng, 2, 4, 2.0);
        auto es = estimate_kface_moment(dist, 1, 0, 0, 3000, 37, {}, 2);
        CHECK(std::abs(es.mean - 4.0) < 4.0 * es.std_error);
    }

    TEST_CASE("three-dimensional edge moment against the engine oracle") {
        auto dist = isotropic_discretized_3d(40, 1.0);
        auto es = estimate_kface_moment(dist, 2, 0, 0, 2000, 41, {}, 2);
        double oracle = second_moment_general(dist, 2, 0, 0);
        CHECK(std::abs(es.mean - oracle) < 4.0 * es.std_error);
    }
}

TEST_SUITE("run_experiment") {
    TEST_CASE("deterministic and worker-count independent") {
        auto dist = isotropic_discretized_2d(36, 1.0);
        SimPlan plan;
        plan.targets = {{SimTarget::Kind::second_moment, 2, 0, 0},
                        {SimTarget::Kind::second_moment, 2, 1, 2},
                        {SimTarget::Kind::vertex_mean, 1, 0, 0},
                        {SimTarget::Kind::vertex_mean, 2, 0, 0}};
        plan.replicates = 500;
        plan.seed = 43;
        plan.workers = 1;
        auto a = run_experiment(dist, plan);
        plan.workers = 2;
        auto b = run_experiment(dist, plan);
        auto c = run_experiment(dist, plan);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].mean == b[i].mean);
            CHECK(a[i].std_error == b[i].std_error);
            CHECK(b[i].mean == c[i].mean);
        }
    }

    TEST_CASE("vertex means hit 2^k") {
        Rng rng(47);
        for (int d = 2; d <= 3; ++d) {
            auto dist = random_distribution(rng, d, d + 3, 1.2);
            SimPlan plan;
            for (int k = 1; k <= d; ++k) plan.targets.push_back({SimTarget::Kind::vertex_mean, k, 0, 0});
            plan.replicates = 2500;
            plan.seed = 1000 + d;
            plan.workers = 2;
            for (const auto& es : run_experiment(dist, plan)) {
                REQUIRE(es.std_error > 0.0);
                CHECK(std::abs(es.mean - es.oracle_value) < 4.0 * es.std_error);
            }
        }
    }

    TEST_CASE("standard error shrinks like the replicate root") {
        auto dist = isotropic_discretized_2d(36, 1.0);
        SimPlan plan;
        plan.targets = {{SimTarget::Kind::second_moment, 2, 0, 0}};
        plan.seed = 53;
        plan.workers = 2;
        plan.replicates = 2000;
        double se1 = run_experiment(dist, plan)[0].std_error;
        plan.replicates = 4000;
        double se2 = run_experiment(dist, plan)[0].std_error;
        double ratio = se1 / se2;
        CHECK(ratio > std::sqrt(2.0) * 0.8);
        CHECK(ratio < std::sqrt(2.0) * 1.2);
    }

    TEST_CASE("estimates are stable under window doubling") {
        auto dist = isotropic_discretized_2d(36, 1.0);
        SimPlan plan;
        plan.targets = {{SimTarget::Kind::second_moment, 2, 0, 0},
                        {SimTarget::Kind::second_moment, 2, 1, 1}};
        plan.seed = 59;
        plan.workers = 2;
        plan.replicates = 4000;
        auto base = run_experiment(dist, plan);
        plan.window.window_factor = 2.0;
        auto wide = run_experiment(dist, plan);
        for (std::size_t i = 0; i < base.size(); ++i) {
            double gap = std::abs(base[i].mean - wide[i].mean);
            double se = std::sqrt(base[i].std_error * base[i].std_error +
                                  wide[i].std_error * wide[i].std_error);
            CHECK(gap < 2.0 * se);
        }
    }

    TEST_CASE("retries at default settings succeed") {
        Rng rng(61);
        auto dist = random_distribution(rng, 2, 3, 0.9);
        std::vector<double> cum = cumulative_weights(dist);
        int failures = 0;
        for (long i = 0; i < 500; ++i) {
            Rng stream = Rng::replicate_stream(67, i);
            try {
                detail::make_replicate_geometry(dist, cum, WindowPolicy{}, stream,
                                                default_tolerances());
            } catch (const SimulationDidNotConverge&) {
                ++failures;
            }
        }
        CHECK(failures == 0);
    }
}
