#include "doctest.h"
#include "testutil.hpp"

#include "tdfmatch/geometry.hpp"

#include <Eigen/Geometry>
#include "tdfmatch/rng.hpp"

#include <cmath>
#include <limits>

using namespace tdfmatch;

namespace {

DepthFrame make_frame(int width, int height, double fx, double fy, double cx, double cy,
                      std::vector<double> depth, RigidTransform pose = RigidTransform::identity()) {
    return DepthFrame(std::move(depth), CameraIntrinsics(fx, fy, cx, cy, width, height), pose);
}

RigidTransform rot_z_90() {
    RigidTransform t;
    t.rotation << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    return t;
}

}  // namespace

TEST_CASE("Point3 rejects non-finite components") {
    CHECK_THROWS(Point3(std::nan(""), 0, 0));
    CHECK_THROWS(Point3(0, std::numeric_limits<double>::infinity(), 0));
    CHECK_NOTHROW(Point3(1.0, -2.0, 3.0));
}

TEST_CASE("back_project principal point ray is the optical axis") {
    std::vector<double> depth(64 * 48, 0.0);
    depth[24 * 64 + 32] = 1.0;  // pixel (32, 24) = (cx, cy)
    const DepthFrame frame = make_frame(64, 48, 50, 50, 32, 24, depth);
    const PointCloud cloud = back_project(frame);
    REQUIRE(cloud.size() == 1);
    CHECK(cloud.points[0].x == doctest::Approx(0.0));
    CHECK(cloud.points[0].y == doctest::Approx(0.0));
    CHECK(cloud.points[0].z == doctest::Approx(1.0));
}

TEST_CASE("back_project skips missing depth") {
    const DepthFrame frame = make_frame(8, 8, 10, 10, 4, 4, std::vector<double>(64, 0.0));
    CHECK(back_project(frame).empty());
}

TEST_CASE("back_project hand-evaluated pinhole case") {
    std::vector<double> depth(960 * 480, 0.0);
    depth[240 * 960 + 905] = 1.0;
    const DepthFrame frame = make_frame(960, 480, 585, 585, 320, 240, depth);
    const PointCloud cloud = back_project(frame);
    REQUIRE(cloud.size() == 1);
    CHECK(cloud.points[0].x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cloud.points[0].y == doctest::Approx(0.0));
    CHECK(cloud.points[0].z == doctest::Approx(1.0));
}

TEST_CASE("back_project then reprojection recovers pixel centers") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const int w = 32, h = 24;
        const double fx = rng.uniform(40, 80), fy = rng.uniform(40, 80);
        const double cx = rng.uniform(10, 20), cy = rng.uniform(8, 14);
        std::vector<double> depth(w * h);
        for (double& d : depth) d = rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.5, 4.0);
        const DepthFrame frame = make_frame(w, h, fx, fy, cx, cy, depth);
        const PointCloud cloud = back_project(frame);
        size_t k = 0;
        for (int v = 0; v < h; ++v) {
            for (int u = 0; u < w; ++u) {
                if (frame.at(u, v) <= 0.0) continue;
                const Point3& p = cloud.points[k++];
                CHECK(std::abs(fx * p.x / p.z + cx - u) < 0.5);
                CHECK(std::abs(fy * p.y / p.z + cy - v) < 0.5);
                CHECK(std::abs(p.z - frame.at(u, v)) < 1e-9);
            }
        }
        CHECK(k == cloud.size());
    }
}

TEST_CASE("transform_cloud identity and translation") {
    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {1, 2, 3}};
    const PointCloud same = transform_cloud(RigidTransform::identity(), cloud);
    CHECK(same.points[1].x == 1.0);
    RigidTransform shift;
    shift.translation << 0.3, 0, 0;
    const PointCloud moved = transform_cloud(shift, cloud);
    CHECK(moved.points[0].x == doctest::Approx(0.3));
    CHECK(moved.points[0].y == 0.0);
}

TEST_CASE("transform_cloud rotation about z") {
    PointCloud cloud;
    cloud.points = {{1, 0, 0}};
    const PointCloud rotated = transform_cloud(rot_z_90(), cloud);
    CHECK(std::abs(rotated.points[0].x - 0.0) < 1e-9);
    CHECK(std::abs(rotated.points[0].y - 1.0) < 1e-9);
    CHECK(std::abs(rotated.points[0].z - 0.0) < 1e-9);
}

TEST_CASE("compose with identity and invert of identity") {
    Rng rng(3);
    RigidTransform t = rot_z_90();
    t.translation << 0.5, -1.5, 2.0;
    const RigidTransform c = compose(RigidTransform::identity(), t);
    CHECK((c.rotation - t.rotation).norm() == doctest::Approx(0.0));
    CHECK((c.translation - t.translation).norm() == doctest::Approx(0.0));
    const RigidTransform inv_id = invert(RigidTransform::identity());
    CHECK((inv_id.rotation - Eigen::Matrix3d::Identity()).norm() == doctest::Approx(0.0));
}

TEST_CASE("invert composed with original is the identity map") {
    Rng rng(11);
    RigidTransform t;
    // Random rotation from an axis-angle pair.
    const Eigen::Vector3d axis =
        Eigen::Vector3d(rng.gaussian(), rng.gaussian(), rng.gaussian()).normalized();
    const double angle = rng.uniform(0, 3.0);
    t.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
    t.translation << rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2);
    const RigidTransform round = compose(invert(t), t);
    for (int i = 0; i < 100; ++i) {
        const Point3 p{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
        const Point3 q = round.apply(p);
        CHECK(distance(p, q) < 1e-9);
    }
}

TEST_CASE("rotation validity preserved under compose and invert") {
    Rng rng(23);
    RigidTransform acc = RigidTransform::identity();
    for (int i = 0; i < 50; ++i) {
        RigidTransform t;
        const Eigen::Vector3d axis =
            Eigen::Vector3d(rng.gaussian(), rng.gaussian(), rng.gaussian()).normalized();
        t.rotation = Eigen::AngleAxisd(rng.uniform(0, 6.28), axis).toRotationMatrix();
        t.translation << rng.gaussian(), rng.gaussian(), rng.gaussian();
        acc = compose(acc, i % 2 == 0 ? t : invert(t));
        CHECK(rotation_error(acc.rotation) <= 1e-6);
    }
}

TEST_CASE("DepthFrame validates dimensions and values") {
    CHECK_THROWS(make_frame(8, 8, 10, 10, 4, 4, std::vector<double>(63, 0.0)));
    std::vector<double> neg(64, 0.0);
    neg[0] = -1.0;
    CHECK_THROWS(make_frame(8, 8, 10, 10, 4, 4, neg));
}

TEST_CASE("CameraIntrinsics invariants") {
    CHECK_THROWS(CameraIntrinsics(0, 10, 4, 4, 8, 8));
    CHECK_THROWS(CameraIntrinsics(10, 10, 8, 4, 8, 8));  // cx == width
    CHECK_NOTHROW(CameraIntrinsics(10, 10, 0, 0, 8, 8));
}

TEST_CASE("nearest_neighbor trivial cases") {
    PointCloud cloud;
    cloud.points = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
    SUBCASE("query equals a cloud point") {
        const auto [idx, d] = nearest_neighbor(cloud.points[3], cloud);
        CHECK(idx == 3);
        CHECK(d == 0.0);
    }
    SUBCASE("forced by geometry") {
        PointCloud two;
        two.points = {{0, 0, 0}, {1, 0, 0}};
        const auto [idx, d] = nearest_neighbor({0.4, 0, 0}, two);
        CHECK(idx == 0);
        CHECK(d == doctest::Approx(0.4));
    }
    SUBCASE("empty cloud errors") {
        CHECK_THROWS_WITH(nearest_neighbor({0, 0, 0}, PointCloud{}), "empty cloud");
    }
}

TEST_CASE("KdTree equals exhaustive search on random data") {
    Rng rng(41);
    PointCloud cloud = testutil::random_cloud(rng, 1000);
    // Duplicates force the lowest-index tie rule.
    for (int i = 0; i < 20; ++i) {
        cloud.points.push_back(cloud.points[rng.uniform_u64(cloud.size())]);
    }
    const KdTree tree(cloud);
    for (int q = 0; q < 100; ++q) {
        Point3 query{rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)};
        if (q % 5 == 0) query = cloud.points[rng.uniform_u64(cloud.size())];
        const auto [bi, bd] = nearest_neighbor(query, cloud);
        const auto [ti, td] = tree.nearest(query);
        CHECK(ti == bi);
        CHECK(td == bd);
    }
}

TEST_CASE("KdTree duplicate points resolve to the lowest index") {
    PointCloud cloud;
    cloud.points = {{1, 1, 1}, {0, 0, 0}, {0, 0, 0}, {1, 1, 1}};
    const KdTree tree(cloud);
    CHECK(tree.nearest({0.1, 0, 0}).first == 1);
    CHECK(tree.nearest({0.9, 1, 1}).first == 0);
}

TEST_CASE("KdTree nearest_within excludes the cap distance") {
    PointCloud cloud;
    cloud.points = {{1, 0, 0}};
    const KdTree tree(cloud);
    CHECK(tree.nearest_within({0, 0, 0}, 1.0).first == KdTree::npos);
    CHECK(tree.nearest_within({0, 0, 0}, 1.0 + 1e-9).first == 0);
}
