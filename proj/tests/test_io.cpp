#include "doctest.h"
#include "testutil.hpp"

#include "tdfmatch/io.hpp"

#include <Eigen/Geometry>

#include <fstream>

using namespace tdfmatch;

TEST_CASE("depth PGM round trip at millimeter resolution") {
    testutil::TempDir tmp;
    DepthImage img;
    img.width = 5;
    img.height = 3;
    img.depth_m = {0.0,   0.001, 1.0,   2.5,  65.535, 0.25, 0.5, 0.75,
                   1.234, 3.456, 0.002, 10.0, 0.0,    4.2,  0.333};
    const std::string path = tmp.file("d.pgm");
    write_depth_pgm(path, img);
    const DepthImage back = read_depth_pgm(path);
    REQUIRE(back.width == 5);
    REQUIRE(back.height == 3);
    for (size_t i = 0; i < img.depth_m.size(); ++i) {
        CHECK(std::abs(back.depth_m[i] - img.depth_m[i]) < 5e-4 + 1e-12);
    }
}

TEST_CASE("depth PGM rejects bad headers and short files") {
    testutil::TempDir tmp;
    {
        std::ofstream out(tmp.file("bad.pgm"), std::ios::binary);
        out << "P6\n2 2\n65535\n";
    }
    CHECK_THROWS(read_depth_pgm(tmp.file("bad.pgm")));
    {
        std::ofstream out(tmp.file("short.pgm"), std::ios::binary);
        out << "P5\n4 4\n65535\n";
        out << "xx";  // 2 of 32 bytes
    }
    CHECK_THROWS_WITH(read_depth_pgm(tmp.file("short.pgm")),
                      doctest::Contains("unexpected end of file"));
}

TEST_CASE("pose file round trip and validation") {
    testutil::TempDir tmp;
    RigidTransform t;
    t.rotation = Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, -1).normalized()).toRotationMatrix();
    t.translation << 0.25, -1.5, 3.0;
    const std::string path = tmp.file("pose.txt");
    write_pose(path, t);
    const RigidTransform back = read_pose(path);
    CHECK((back.rotation - t.rotation).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((back.translation - t.translation).cwiseAbs().maxCoeff() < 1e-15);

    const RigidTransform inv = read_pose(path, true);
    CHECK((inv.rotation - t.rotation.transpose()).cwiseAbs().maxCoeff() < 1e-12);

    {
        std::ofstream out(tmp.file("badrow.txt"));
        out << "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 1 1\n";
    }
    CHECK_THROWS_WITH(read_pose(tmp.file("badrow.txt")), doctest::Contains("bottom row"));
    {
        std::ofstream out(tmp.file("notrot.txt"));
        out << "2 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n";
    }
    CHECK_THROWS(read_pose(tmp.file("notrot.txt")));
}

TEST_CASE("intrinsics file round trip") {
    testutil::TempDir tmp;
    const std::string path = tmp.file("k.txt");
    write_intrinsics(path, {585.5, 584.25, 320.0, 240.0});
    const IntrinsicsMatrix k = read_intrinsics(path);
    CHECK(k.fx == 585.5);
    CHECK(k.fy == 584.25);
    CHECK(k.cx == 320.0);
    CHECK(k.cy == 240.0);
    {
        std::ofstream out(tmp.file("skewed.txt"));
        out << "585 0.5 320 0 585 240 0 0 1\n";
    }
    CHECK_THROWS(read_intrinsics(tmp.file("skewed.txt")));
}

TEST_CASE("PLY round trip preserves float32 coordinates") {
    testutil::TempDir tmp;
    Rng rng(5);
    const PointCloud cloud = testutil::random_cloud(rng, 200, 2.0);
    const std::string path = tmp.file("c.ply");
    write_ply(path, cloud);
    const PointCloud back = read_ply(path);
    REQUIRE(back.size() == cloud.size());
    for (size_t i = 0; i < cloud.size(); ++i) {
        CHECK(back.points[i].x == static_cast<double>(static_cast<float>(cloud.points[i].x)));
        CHECK(back.points[i].y == static_cast<double>(static_cast<float>(cloud.points[i].y)));
        CHECK(back.points[i].z == static_cast<double>(static_cast<float>(cloud.points[i].z)));
    }
}

TEST_CASE("PLY reader requires exactly x y z float properties") {
    testutil::TempDir tmp;
    {
        std::ofstream out(tmp.file("extra.ply"));
        out << "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
               "property float z\nproperty float nx\nend_header\n0 0 0 0\n";
    }
    CHECK_THROWS(read_ply(tmp.file("extra.ply")));
    {
        std::ofstream out(tmp.file("short.ply"));
        out << "ply\nformat ascii 1.0\nelement vertex 3\nproperty float x\nproperty float y\n"
               "property float z\nend_header\n0 0 0\n";
    }
    CHECK_THROWS_WITH(read_ply(tmp.file("short.ply")), doctest::Contains("unexpected end of file"));
}

TEST_CASE("scene directory loader pairs frames with poses") {
    testutil::TempDir tmp;
    write_intrinsics(tmp.file("camera-intrinsics.txt"), {40, 40, 16, 12});
    DepthImage img;
    img.width = 32;
    img.height = 24;
    img.depth_m.assign(32 * 24, 1.5);
    RigidTransform pose0 = RigidTransform::identity();
    RigidTransform pose1 = RigidTransform::identity();
    pose1.translation << 2.0, 0, 0;
    write_depth_pgm(tmp.file("frame-000000.depth.pgm"), img);
    write_pose(tmp.file("frame-000000.pose.txt"), pose0);
    write_depth_pgm(tmp.file("frame-000001.depth.pgm"), img);
    write_pose(tmp.file("frame-000001.pose.txt"), pose1);

    const auto frames = load_scene_dir(tmp.path());
    REQUIRE(frames.size() == 2);
    CHECK(frames[0].intrinsics.width == 32);
    CHECK(frames[1].pose.translation.x() == doctest::Approx(2.0));
    CHECK(frames[0].at(5, 5) == doctest::Approx(1.5));
}
