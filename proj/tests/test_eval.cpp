#include "doctest.h"
#include "testutil.hpp"

#include "tdfmatch/benchmark.hpp"
#include "tdfmatch/eval.hpp"
#include "tdfmatch/sampler.hpp"
#include "tdfmatch/rng.hpp"

#include <algorithm>
#include <cmath>

using namespace tdfmatch;

namespace {

// Brute-force oracle: try every distinct distance as the threshold, take the
// smallest with recall >= target, report its false-positive rate.
double fpr_oracle(const std::vector<ScoredPair>& pairs, double target) {
    std::vector<double> thresholds;
    for (const ScoredPair& p : pairs) thresholds.push_back(p.distance);
    std::sort(thresholds.begin(), thresholds.end());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    size_t matches = 0, non_matches = 0;
    for (const ScoredPair& p : pairs) (p.is_match ? matches : non_matches) += 1;
    for (double theta : thresholds) {
        size_t tp = 0, fp = 0;
        for (const ScoredPair& p : pairs) {
            if (p.distance <= theta) (p.is_match ? tp : fp) += 1;
        }
        if (static_cast<double>(tp) / matches >= target) {
            return static_cast<double>(fp) / non_matches;
        }
    }
    return 1.0;
}

std::vector<ScoredPair> random_scored(Rng& rng, size_t n) {
    std::vector<ScoredPair> pairs;
    for (size_t i = 0; i < n; ++i) {
        const bool is_match = rng.uniform() < 0.5;
        // Overlapping but distinct distributions; occasional exact ties.
        double d = is_match ? rng.uniform(0.0, 1.0) : rng.uniform(0.4, 1.6);
        if (rng.uniform() < 0.1) d = std::round(d * 8.0) / 8.0;
        pairs.push_back({d, is_match});
    }
    // Guarantee both classes.
    pairs.push_back({0.3, true});
    pairs.push_back({0.9, false});
    return pairs;
}

}  // namespace

TEST_CASE("fpr_at_recall separable and degenerate cases") {
    std::vector<ScoredPair> separable;
    for (int i = 0; i < 10; ++i) separable.push_back({0.1 + i * 0.01, true});
    for (int i = 0; i < 10; ++i) separable.push_back({0.5 + i * 0.01, false});
    CHECK(fpr_at_recall(separable, 0.95) == 0.0);

    std::vector<ScoredPair> constant;
    for (int i = 0; i < 8; ++i) constant.push_back({0.25, i % 2 == 0});
    CHECK(fpr_at_recall(constant, 0.95) == 1.0);

    std::vector<ScoredPair> one_class{{0.1, true}};
    CHECK_THROWS(fpr_at_recall(one_class, 0.95));
}

TEST_CASE("fpr_at_recall equals the threshold-enumeration oracle") {
    Rng rng(10);
    for (int trial = 0; trial < 30; ++trial) {
        const auto pairs = random_scored(rng, 20 + rng.uniform_u64(60));
        const double target = trial % 3 == 0 ? 0.95 : rng.uniform(0.5, 1.0);
        CHECK(fpr_at_recall(pairs, target) == fpr_oracle(pairs, target));
    }
}

TEST_CASE("fpr_at_recall is monotone in the recall target") {
    Rng rng(11);
    const auto pairs = random_scored(rng, 80);
    double prev = -1.0;
    for (double target = 0.05; target <= 1.0; target += 0.05) {
        const double fpr = fpr_at_recall(pairs, target);
        CHECK(fpr >= prev);
        prev = fpr;
    }
}

TEST_CASE("eval_transform hand cases") {
    std::vector<std::pair<Point3, Point3>> corr;
    Rng rng(12);
    RigidTransform gt;
    gt.rotation = rotation_about_axis(Eigen::Vector3d(0, 0, 1), 0.4);
    gt.translation << 0.1, 0.2, 0.3;
    for (int i = 0; i < 15; ++i) {
        const Point3 p{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        corr.emplace_back(p, gt.apply(p));
    }
    SUBCASE("exact transform passes with zero rmse") {
        const TransformEval e = eval_transform(gt, corr, 0.2);
        CHECK(e.rmse <= 1e-12);
        CHECK(e.pass);
    }
    SUBCASE("uniform 0.3 m offset fails at tau 0.2") {
        RigidTransform off = gt;
        off.translation.x() += 0.3;
        const TransformEval e = eval_transform(off, corr, 0.2);
        CHECK(e.rmse == doctest::Approx(0.3).epsilon(1e-9));
        CHECK_FALSE(e.pass);
    }
    SUBCASE("boundary residual exactly tau fails (strict inequality)") {
        // Residual 0.25 exactly: 0.25 and 0.0625 are exact binary values.
        std::vector<std::pair<Point3, Point3>> exact;
        for (int i = 0; i < 4; ++i) {
            const Point3 p{double(i), 0, 0};
            exact.emplace_back(p, Point3{p.x + 0.25, 0, 0});
        }
        const TransformEval e = eval_transform(RigidTransform::identity(), exact, 0.25);
        CHECK(e.rmse == 0.25);
        CHECK_FALSE(e.pass);
    }
    SUBCASE("order of correspondences is irrelevant") {
        RigidTransform off = gt;
        off.translation.x() += 0.05;
        const TransformEval e1 = eval_transform(off, corr, 0.2);
        std::reverse(corr.begin(), corr.end());
        const TransformEval e2 = eval_transform(off, corr, 0.2);
        CHECK(e1.rmse == doctest::Approx(e2.rmse).epsilon(1e-15));
    }
    SUBCASE("empty correspondences error") {
        CHECK_THROWS(eval_transform(gt, {}, 0.2));
    }
}

TEST_CASE("overlap_fraction_of ground cases") {
    Rng rng(13);
    PointCloud a = testutil::random_cloud(rng, 400);
    RigidTransform t;
    t.rotation = rotation_about_axis(Eigen::Vector3d(1, 1, 0).normalized(), 0.3);
    t.translation << 0.2, 0, -0.1;
    SUBCASE("perfect overlap") {
        const PointCloud b = transform_cloud(t, a);
        CHECK(overlap_fraction_of(t, a, b, 0.03) == 1.0);
    }
    SUBCASE("disjoint clouds") {
        PointCloud far = a;
        for (Point3& p : far.points) p.x += 10.0;
        CHECK(overlap_fraction_of(RigidTransform::identity(), a, far, 0.03) == 0.0);
    }
    SUBCASE("half displaced") {
        // Lattice spacing 0.1 m rules out accidental neighbors within 3 cm.
        PointCloud grid;
        for (int x = 0; x < 8; ++x) {
            for (int y = 0; y < 8; ++y) {
                for (int z = 0; z < 8; ++z) grid.points.push_back({x * 0.1, y * 0.1, z * 0.1});
            }
        }
        PointCloud b = transform_cloud(t, grid);
        for (size_t i = 0; i < b.size() / 2; ++i) b.points[i].z += 1.0;
        const double frac = overlap_fraction_of(t, grid, b, 0.03);
        CHECK(std::abs(frac - 0.5) <= 1.0 / static_cast<double>(grid.size()) + 1e-12);
    }
}

TEST_CASE("registration_pr hand-tallied cases") {
    Rng rng(14);
    // Ten synthetic pairs: identical clouds under known transforms.
    std::vector<FragmentPair> pairs;
    std::vector<std::optional<RigidTransform>> preds;
    for (int i = 0; i < 10; ++i) {
        FragmentPair fp;
        fp.cloud_a = testutil::random_cloud(rng, 300);
        RigidTransform gt;
        gt.rotation = random_rotation(rng);
        gt.translation << rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1);
        fp.cloud_b = transform_cloud(gt, fp.cloud_a);
        fp.gt_transform = gt;
        for (int k = 0; k < 50; ++k) {
            const Point3& p = fp.cloud_a.points[k];
            fp.gt_correspondences.emplace_back(p, gt.apply(p));
        }
        fp.overlap_gt = true;
        pairs.push_back(std::move(fp));
        preds.push_back(gt);
    }

    SUBCASE("all exact predictions give recall and precision 1") {
        const PrResult r = registration_pr(pairs, preds, {});
        CHECK(r.recall == 1.0);
        CHECK(r.precision == 1.0);
        CHECK(r.true_positives == 10);
        CHECK_FALSE(r.precision_degenerate);
    }
    SUBCASE("no predictions reports degenerate precision") {
        std::vector<std::optional<RigidTransform>> none(10, std::nullopt);
        const PrResult r = registration_pr(pairs, none, {});
        CHECK(r.recall == 0.0);
        CHECK(r.precision == 0.0);
        CHECK(r.precision_degenerate);
        CHECK(r.predictions == 0);
    }
    SUBCASE("corrupted predictions match the hand tally") {
        // Corrupt 3 of 10: translation off by 1 m (fails both criteria).
        for (int i = 0; i < 3; ++i) {
            RigidTransform bad = *preds[i];
            bad.translation.x() += 1.0;
            preds[i] = bad;
        }
        // Drop 2 more: explicit no-prediction.
        preds[3] = std::nullopt;
        preds[4] = std::nullopt;
        const PrResult r = registration_pr(pairs, preds, {});
        CHECK(r.true_positives == 5);
        CHECK(r.gt_positives == 10);
        CHECK(r.predictions == 8);
        CHECK(r.recall == doctest::Approx(0.5));
        CHECK(r.precision == doctest::Approx(5.0 / 8.0));
        CHECK(r.recall >= 0.0);
        CHECK(r.recall <= 1.0);
        CHECK(r.true_positives <= r.predictions);
        CHECK(r.true_positives <= r.gt_positives);
    }
}

TEST_CASE("synthetic benchmark generation is deterministic and well formed") {
    testutil::TempDir tmp_a, tmp_b;
    BenchmarkOptions opts;
    opts.patch_pairs_per_split = 8;  // desk-scale smoke; acceptance runs full size
    opts.num_scenes = 2;
    const BenchmarkPaths pa = generate_synthetic_benchmark(77, tmp_a.path(), opts);
    const BenchmarkPaths pb = generate_synthetic_benchmark(77, tmp_b.path(), opts);
    CHECK(testutil::dirs_identical(tmp_a.path(), tmp_b.path()));

    SUBCASE("manifest counts are exactly half matches, half non-matches") {
        const auto entries = read_manifest(pa.train_manifest);
        size_t matches = 0;
        for (const auto& e : entries) matches += e.is_match;
        CHECK(entries.size() == 8);
        CHECK(matches == 4);
    }

    SUBCASE("match pair patch origins coincide in world space") {
        const auto entries = read_manifest(pa.train_manifest);
        for (const auto& e : entries) {
            if (!e.is_match) continue;
            const TdfPatch a = read_tdf(e.patch_a);
            const TdfPatch b = read_tdf(e.patch_b);
            // Shared keypoint, different grid axes: both origins sit on the
            // sphere of radius (dim/2)*voxel*sqrt(3) around the keypoint.
            const double r = 15.0 * 0.01 * std::sqrt(3.0);
            CHECK(distance(a.origin, b.origin) <= 2.0 * r + 1e-6);
        }
    }

    SUBCASE("fragment ground truth is self consistent") {
        const auto records = read_fragment_benchmark(pa.fragments_meta);
        CHECK(records.size() == 4);  // two adjacent pairs per scene
        size_t positives = 0;
        for (const auto& rec : records) {
            const FragmentPair fp = load_fragment_pair(rec);
            positives += fp.overlap_gt;
            // Correspondences consistent with the gt transform.
            double worst = 0.0;
            for (const auto& [p, q] : fp.gt_correspondences) {
                worst = std::max(worst, distance(fp.gt_transform.apply(p), q));
            }
            CHECK(worst <= 1e-6);
            CHECK(fp.gt_correspondences.size() == 200);
            // The stored flag agrees with the actual overlap.
            const double frac =
                overlap_fraction_of(fp.gt_transform, fp.cloud_a, fp.cloud_b, 0.03);
            CHECK(fp.overlap_gt == (frac >= 0.30));
        }
        CHECK(positives >= 1);
    }
}
