#include "doctest.h"
#include "testutil.hpp"

#include "tdfmatch/benchmark.hpp"
#include "tdfmatch/eval.hpp"
#include "tdfmatch/io.hpp"
#include "tdfmatch/net.hpp"
#include "tdfmatch/sampler.hpp"
#include "tdfmatch/tdf.hpp"

#include <cstdlib>
#include <fstream>

using namespace tdfmatch;

namespace {

struct RunResult {
    int status = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const std::string& scratch) {
    const std::string out_file = scratch + "/cli-output.txt";
    const std::string cmd = std::string(TDFMATCH_CLI) + " " + args + " > " + out_file + " 2>&1";
    const int rc = std::system(cmd.c_str());
    RunResult r;
    r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    r.output = testutil::read_file(out_file);
    return r;
}

}  // namespace

TEST_CASE("cli rejects missing arguments and unknown flags") {
    testutil::TempDir tmp;
    const RunResult missing = run_cli("register --net x.3dmc", tmp.path());
    CHECK(missing.status != 0);
    CHECK(missing.output.find("--cloud-a") != std::string::npos);  // usage names the gap

    const RunResult unknown = run_cli("gen-bench --out o --frobnicate", tmp.path());
    CHECK(unknown.status != 0);

    const RunResult no_sub = run_cli("", tmp.path());
    CHECK(no_sub.status != 0);
}

TEST_CASE("cli reports malformed inputs with a diagnostic naming the file") {
    testutil::TempDir tmp;
    {
        std::ofstream bad(tmp.file("bad.ply"));
        bad << "not a ply\n";
    }
    const RunResult r = run_cli("voxelize --cloud " + tmp.file("bad.ply") +
                                    " --point 0 0 0 --out " + tmp.file("o.tdf"),
                                tmp.path());
    CHECK(r.status != 0);
    CHECK(r.output.find("bad.ply") != std::string::npos);
}

TEST_CASE("cli end-to-end pipeline on a small synthetic benchmark") {
    testutil::TempDir tmp;
    const std::string bench_dir = tmp.file("bench");

    // gen-bench (small) writes both patch splits and the fragment benchmark.
    const RunResult gen = run_cli(
        "--seed 11 gen-bench --out " + bench_dir + " --pairs 6 --scenes 1", tmp.path());
    REQUIRE(gen.status == 0);
    const std::string train_manifest = bench_dir + "/patches/train/manifest.txt";
    const std::string test_manifest = bench_dir + "/patches/test/manifest.txt";
    REQUIRE(read_manifest(train_manifest).size() == 6);

    SUBCASE("gen-bench twice with one seed is byte identical") {
        const RunResult again = run_cli(
            "--seed 11 gen-bench --out " + tmp.file("bench2") + " --pairs 6 --scenes 1",
            tmp.path());
        REQUIRE(again.status == 0);
        CHECK(testutil::dirs_identical(bench_dir, tmp.file("bench2")));
    }

    // train a few steps on the small manifest.
    {
        std::ofstream cfg(tmp.file("train.cfg"));
        cfg << "batch_size = 4\nmomentum = 0.9\n";
    }
    const std::string ckpt = tmp.file("net.3dmc");
    const RunResult train = run_cli("--seed 3 --config " + tmp.file("train.cfg") +
                                        " train --manifest " + train_manifest + " --out " + ckpt +
                                        " --arch reduced --steps 2",
                                    tmp.path());
    REQUIRE(train.status == 0);
    CHECK(train.output.find("iter 1 loss ") != std::string::npos);
    CHECK(train.output.find("time_ms") != std::string::npos);

    SUBCASE("training checkpoints are deterministic across runs") {
        const std::string ckpt2 = tmp.file("net2.3dmc");
        const RunResult train2 = run_cli("--seed 3 --config " + tmp.file("train.cfg") +
                                             " train --manifest " + train_manifest + " --out " +
                                             ckpt2 + " --arch reduced --steps 2",
                                         tmp.path());
        REQUIRE(train2.status == 0);
        CHECK(testutil::read_file(ckpt) == testutil::read_file(ckpt2));
    }

    // describe the first two patches.
    const auto entries = read_manifest(test_manifest);
    const RunResult desc = run_cli("describe --net " + ckpt + " --out " + tmp.file("d.txt") +
                                       " " + entries[0].patch_a + " " + entries[0].patch_b,
                                   tmp.path());
    REQUIRE(desc.status == 0);
    {
        std::ifstream din(tmp.file("d.txt"));
        std::string line1, line2;
        REQUIRE(std::getline(din, line1));
        REQUIRE(std::getline(din, line2));
    }

    // eval-keypoints over the benchmark manifest prints the metric line.
    const RunResult evk = run_cli(
        "eval-keypoints --net " + ckpt + " --manifest " + test_manifest, tmp.path());
    REQUIRE(evk.status == 0);
    CHECK(evk.output.find("error_at_95_recall ") != std::string::npos);
}

TEST_CASE("eval-keypoints prints zero error on the separable fixture") {
    testutil::TempDir tmp;
    {
        std::ofstream scores(tmp.file("scores.txt"));
        for (int i = 0; i < 20; ++i) scores << 0.1 + i * 0.001 << " 1\n";
        for (int i = 0; i < 20; ++i) scores << 0.9 + i * 0.001 << " 0\n";
    }
    const RunResult r = run_cli("eval-keypoints --scores " + tmp.file("scores.txt"), tmp.path());
    REQUIRE(r.status == 0);
    CHECK(r.output.find("error_at_95_recall 0.000000") != std::string::npos);
}

TEST_CASE("register recovers a rigid copy and is deterministic") {
    testutil::TempDir tmp;

    // Distinctive synthetic cloud and a rigidly moved copy.
    Rng rng(500);
    Scene scene;
    Primitive ground;
    ground.kind = PrimitiveKind::Plane;
    ground.a = 0.5;
    ground.b = 0.5;
    scene.push_back(ground);
    Primitive corner;
    corner.kind = PrimitiveKind::Corner;
    corner.a = 0.3;
    corner.pose.translation << -0.2, -0.2, 0.1;
    scene.push_back(corner);
    Primitive sphere;
    sphere.kind = PrimitiveKind::Sphere;
    sphere.a = 0.12;
    sphere.pose.translation << 0.25, 0.15, 0.2;
    scene.push_back(sphere);
    PointCloud cloud_a;
    for (int i = 0; i < 9000; ++i) cloud_a.points.push_back(sample_scene_surface(scene, rng));
    RigidTransform gt;
    gt.rotation = rotation_about_axis(Eigen::Vector3d(0.1, 0.9, 0.2).normalized(), 0.2);
    gt.translation << 0.15, -0.1, 0.25;
    const PointCloud cloud_b = transform_cloud(gt, cloud_a);
    write_ply(tmp.file("a.ply"), cloud_a);
    write_ply(tmp.file("b.ply"), cloud_b);

    // Untrained checkpoint.
    {
        const NetworkSpec spec = NetworkSpec::reduced();
        save_checkpoint(tmp.file("net.3dmc"), spec, init_xavier(spec, 5));
    }
    {
        std::ofstream cfg(tmp.file("reg.cfg"));
        cfg << "ransac_iterations = 4000\nkeypoints = 150\n";
    }
    const std::string cmd = "--seed 9 --config " + tmp.file("reg.cfg") + " register --net " +
                            tmp.file("net.3dmc") + " --cloud-a " + tmp.file("a.ply") +
                            " --cloud-b " + tmp.file("b.ply") + " --out ";
    const RunResult r1 = run_cli(cmd + tmp.file("r1.txt"), tmp.path());
    REQUIRE(r1.status == 0);
    CHECK(r1.output.find("converged 1") != std::string::npos);

    // The result file passes the Eq-1 style evaluation against ground truth.
    {
        std::ifstream in(tmp.file("r1.txt"));
        std::vector<double> m(16);
        for (double& v : m) REQUIRE((in >> v));
        RigidTransform pred;
        pred.rotation << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
        pred.translation << m[3], m[7], m[11];
        std::vector<std::pair<Point3, Point3>> corr;
        for (size_t i = 0; i < cloud_a.size(); i += 37) {
            corr.emplace_back(cloud_a.points[i], cloud_b.points[i]);
        }
        const TransformEval ev = eval_transform(pred, corr, 0.2);
        CHECK(ev.pass);
        std::string kw;
        size_t inliers;
        REQUIRE((in >> kw >> inliers));
        CHECK(kw == "inliers");
        CHECK(inliers >= 10);
    }

    // Same seed, byte-identical result file.
    const RunResult r2 = run_cli(cmd + tmp.file("r2.txt"), tmp.path());
    REQUIRE(r2.status == 0);
    CHECK(testutil::read_file(tmp.file("r1.txt")) == testutil::read_file(tmp.file("r2.txt")));
}

TEST_CASE("voxelize and surf-corr round trip through files") {
    testutil::TempDir tmp;
    Rng rng(41);
    Scene scene;
    Primitive sphere;
    sphere.kind = PrimitiveKind::Sphere;
    sphere.a = 0.15;
    scene.push_back(sphere);
    PointCloud cloud;
    for (int i = 0; i < 4000; ++i) cloud.points.push_back(sample_scene_surface(scene, rng));
    write_ply(tmp.file("c.ply"), cloud);

    const RunResult vox = run_cli("voxelize --cloud " + tmp.file("c.ply") +
                                      " --point 0 0 0.15 --out " + tmp.file("p.tdf"),
                                  tmp.path());
    REQUIRE(vox.status == 0);
    const TdfPatch patch = read_tdf(tmp.file("p.tdf"));
    CHECK(patch.config.grid_dim == 30);

    {
        const NetworkSpec spec = NetworkSpec::reduced();
        save_checkpoint(tmp.file("net.3dmc"), spec, init_xavier(spec, 2));
    }
    const RunResult surf = run_cli("surf-corr --net " + tmp.file("net.3dmc") + " --target " +
                                       tmp.file("c.ply") + " --query-tdf " + tmp.file("p.tdf") +
                                       " --out " + tmp.file("heat.ply") + " --stride 40",
                                   tmp.path());
    REQUIRE(surf.status == 0);
    const std::string heat = testutil::read_file(tmp.file("heat.ply"));
    CHECK(heat.find("property float heat") != std::string::npos);
}

TEST_CASE("sample-corr runs on a scene directory written to disk") {
    testutil::TempDir tmp;
    // Render a two-camera plane scene and store it in the on-disk layout.
    Rng rng(7);
    Scene scene;
    Primitive plane;
    plane.kind = PrimitiveKind::Plane;
    plane.a = 2.5;
    plane.b = 2.5;
    scene.push_back(plane);
    const CameraIntrinsics k(120.0, 120.0, 80.0, 60.0, 160, 120);
    const std::string scene_dir = tmp.file("scene0");
    std::filesystem::create_directories(scene_dir);
    write_intrinsics(scene_dir + "/camera-intrinsics.txt", {k.fx, k.fy, k.cx, k.cy});
    int idx = 0;
    for (const double x : {-0.75, 0.75}) {
        const RigidTransform pose =
            look_at_pose(Eigen::Vector3d(x, 0, 1.4), Eigen::Vector3d(x * 0.7, 0, 0), 0.0);
        const DepthFrame frame = render_depth(scene, pose, k, 0.001, rng);
        DepthImage img;
        img.width = k.width;
        img.height = k.height;
        img.depth_m = frame.depth;
        char name[64];
        std::snprintf(name, sizeof(name), "/frame-%06d.depth.pgm", idx);
        write_depth_pgm(scene_dir + name, img);
        std::snprintf(name, sizeof(name), "/frame-%06d.pose.txt", idx);
        write_pose(scene_dir + name, pose);
        ++idx;
    }

    {
        std::ofstream cfg(tmp.file("g.cfg"));
        cfg << "grid_dim = 16\n";
    }
    const std::string cmd = "--seed 21 --config " + tmp.file("g.cfg") + " sample-corr --scene " +
                            scene_dir + " --pairs 4 --out ";
    const RunResult r = run_cli(cmd + tmp.file("data"), tmp.path());
    REQUIRE(r.status == 0);
    const auto entries = read_manifest(tmp.file("data") + "/manifest.txt");
    CHECK(entries.size() == 4);

    SUBCASE("byte-identical regeneration") {
        const RunResult r2 = run_cli(cmd + tmp.file("data2"), tmp.path());
        REQUIRE(r2.status == 0);
        CHECK(testutil::dirs_identical(tmp.file("data"), tmp.file("data2")));
    }

    SUBCASE("odd pair count fails with the documented diagnostic") {
        const RunResult odd = run_cli("--seed 21 sample-corr --scene " + scene_dir +
                                          " --pairs 3 --out " + tmp.file("odd"),
                                      tmp.path());
        CHECK(odd.status != 0);
        CHECK(odd.output.find("pair count must be even") != std::string::npos);
    }
}
