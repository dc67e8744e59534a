#include "tdfmatch/benchmark.hpp"

#include "tdfmatch/io.hpp"

#include <Eigen/Geometry>
#include "tdfmatch/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace tdfmatch {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double surface_area(const Primitive& p) {
    switch (p.kind) {
        case PrimitiveKind::Plane:
            return 4.0 * p.a * p.b;
        case PrimitiveKind::Edge:
            return 2.0 * p.b * 2.0 * p.c;
        case PrimitiveKind::Corner:
            return 3.0 * p.a * p.a;
        case PrimitiveKind::Sphere:
            return 4.0 * kPi * p.a * p.a;
        case PrimitiveKind::Cylinder:
            return 2.0 * kPi * p.a * 2.0 * p.b;
    }
    return 0.0;
}

namespace {

Eigen::Vector3d edge_face_dir(double opening, int face) {
    const double half = opening * 0.5;
    return {std::cos(half), 0.0, face == 0 ? std::sin(half) : -std::sin(half)};
}

Point3 to_world(const Primitive& p, const Eigen::Vector3d& obj) {
    return Point3::from(p.pose.rotation * obj + p.pose.translation);
}

}  // namespace

Point3 sample_surface(const Primitive& p, Rng& rng) {
    Eigen::Vector3d obj = Eigen::Vector3d::Zero();
    switch (p.kind) {
        case PrimitiveKind::Plane:
            obj = {rng.uniform(-p.a, p.a), rng.uniform(-p.b, p.b), 0.0};
            break;
        case PrimitiveKind::Edge: {
            const int face = rng.uniform_u64(2) == 0 ? 0 : 1;
            obj = rng.uniform(0.0, p.b) * edge_face_dir(p.a, face);
            obj.y() = rng.uniform(-p.c, p.c);
            break;
        }
        case PrimitiveKind::Corner: {
            const uint64_t face = rng.uniform_u64(3);
            const double s = rng.uniform(0.0, p.a), t = rng.uniform(0.0, p.a);
            if (face == 0) obj = {s, t, 0.0};
            else if (face == 1) obj = {0.0, s, t};
            else obj = {t, 0.0, s};
            break;
        }
        case PrimitiveKind::Sphere: {
            Eigen::Vector3d v;
            do {
                v = {rng.gaussian(), rng.gaussian(), rng.gaussian()};
            } while (v.norm() < 1e-9);
            obj = p.a * v.normalized();
            break;
        }
        case PrimitiveKind::Cylinder: {
            const double theta = rng.uniform(0.0, 2.0 * kPi);
            obj = {p.a * std::cos(theta), rng.uniform(-p.b, p.b), p.a * std::sin(theta)};
            break;
        }
    }
    return to_world(p, obj);
}

Point3 sample_scene_surface(const Scene& scene, Rng& rng) {
    double total = 0.0;
    for (const Primitive& p : scene) total += surface_area(p);
    double pick = rng.uniform() * total;
    for (const Primitive& p : scene) {
        pick -= surface_area(p);
        if (pick <= 0.0) return sample_surface(p, rng);
    }
    return sample_surface(scene.back(), rng);
}

Point3 anchor_point(const Primitive& p) {
    switch (p.kind) {
        case PrimitiveKind::Sphere:
            return to_world(p, {p.a, 0.0, 0.0});
        case PrimitiveKind::Cylinder:
            return to_world(p, {p.a, 0.0, 0.0});
        default:
            return to_world(p, Eigen::Vector3d::Zero());
    }
}

Eigen::Vector3d open_direction(const Primitive& p) {
    Eigen::Vector3d obj;
    switch (p.kind) {
        case PrimitiveKind::Plane:
            obj = {0.0, 0.0, 1.0};
            break;
        case PrimitiveKind::Edge:
            obj = {1.0, 0.0, 0.0};
            break;
        case PrimitiveKind::Corner:
            obj = Eigen::Vector3d(1.0, 1.0, 1.0).normalized();
            break;
        case PrimitiveKind::Sphere:
        case PrimitiveKind::Cylinder:
            obj = {1.0, 0.0, 0.0};
            break;
    }
    return p.pose.rotation * obj;
}

namespace {

// Nearest valid root of a*t^2 + 2b*t + c = 0 above t_min.
std::optional<double> quadratic_hit(double a, double b, double c, double t_min) {
    const double disc = b * b - a * c;
    if (disc < 0.0 || a == 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    const double t0 = (-b - sq) / a;
    const double t1 = (-b + sq) / a;
    if (t0 > t_min) return t0;
    if (t1 > t_min) return t1;
    return std::nullopt;
}

std::optional<double> rect_plane_hit(const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                                     double t_min, double lo_x, double hi_x, double lo_y,
                                     double hi_y) {
    if (std::abs(d.z()) < 1e-14) return std::nullopt;
    const double t = -o.z() / d.z();
    if (t <= t_min) return std::nullopt;
    const double x = o.x() + t * d.x();
    const double y = o.y() + t * d.y();
    if (x < lo_x || x > hi_x || y < lo_y || y > hi_y) return std::nullopt;
    return t;
}

}  // namespace

std::optional<double> raycast(const Primitive& p, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& dir, double t_min) {
    const Eigen::Vector3d o = p.pose.rotation.transpose() * (origin - p.pose.translation);
    const Eigen::Vector3d d = p.pose.rotation.transpose() * dir;
    switch (p.kind) {
        case PrimitiveKind::Plane:
            return rect_plane_hit(o, d, t_min, -p.a, p.a, -p.b, p.b);
        case PrimitiveKind::Edge: {
            std::optional<double> best;
            for (int face = 0; face < 2; ++face) {
                const Eigen::Vector3d u = edge_face_dir(p.a, face);
                const Eigen::Vector3d n(-u.z(), 0.0, u.x());
                const double denom = n.dot(d);
                if (std::abs(denom) < 1e-14) continue;
                const double t = -n.dot(o) / denom;
                if (t <= t_min) continue;
                const Eigen::Vector3d h = o + t * d;
                const double s = h.dot(u);
                if (s < 0.0 || s > p.b || std::abs(h.y()) > p.c) continue;
                if (!best || t < *best) best = t;
            }
            return best;
        }
        case PrimitiveKind::Corner: {
            std::optional<double> best;
            const auto try_face = [&](const Eigen::Vector3d& oo, const Eigen::Vector3d& dd) {
                const auto t = rect_plane_hit(oo, dd, t_min, 0.0, p.a, 0.0, p.a);
                if (t && (!best || *t < *best)) best = t;
            };
            try_face(o, d);                                            // z = 0 face
            try_face({o.y(), o.z(), o.x()}, {d.y(), d.z(), d.x()});    // x = 0 face
            try_face({o.z(), o.x(), o.y()}, {d.z(), d.x(), d.y()});    // y = 0 face
            return best;
        }
        case PrimitiveKind::Sphere:
            return quadratic_hit(d.dot(d), o.dot(d), o.dot(o) - p.a * p.a, t_min);
        case PrimitiveKind::Cylinder: {
            const double a = d.x() * d.x() + d.z() * d.z();
            const double b = o.x() * d.x() + o.z() * d.z();
            const double c = o.x() * o.x() + o.z() * o.z() - p.a * p.a;
            const double disc = b * b - a * c;
            if (disc < 0.0 || a < 1e-14) return std::nullopt;
            const double sq = std::sqrt(disc);
            for (const double t : {(-b - sq) / a, (-b + sq) / a}) {
                if (t > t_min && std::abs(o.y() + t * d.y()) <= p.b) return t;
            }
            return std::nullopt;
        }
    }
    return std::nullopt;
}

std::optional<double> raycast_scene(const Scene& scene, const Eigen::Vector3d& origin,
                                    const Eigen::Vector3d& dir, double t_min) {
    std::optional<double> best;
    for (const Primitive& p : scene) {
        const auto t = raycast(p, origin, dir, t_min);
        if (t && (!best || *t < *best)) best = t;
    }
    return best;
}

Eigen::Matrix3d rotation_about_axis(const Eigen::Vector3d& axis, double angle) {
    const Eigen::Vector3d a = axis.normalized();
    const double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix3d k;
    k << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
    return Eigen::Matrix3d::Identity() + s * k + (1.0 - c) * k * k;
}

Eigen::Matrix3d random_rotation(Rng& rng) {
    // Uniform rotation from a normalized Gaussian quaternion.
    double q[4];
    double norm;
    do {
        for (double& v : q) v = rng.gaussian();
        norm = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    } while (norm < 1e-9);
    const double w = q[0] / norm, x = q[1] / norm, y = q[2] / norm, z = q[3] / norm;
    Eigen::Matrix3d r;
    r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
        2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
        2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return r;
}

Eigen::Vector3d perturb_direction(const Eigen::Vector3d& dir, double max_angle, Rng& rng) {
    const Eigen::Vector3d d = dir.normalized();
    Eigen::Vector3d axis;
    do {
        const Eigen::Vector3d r{rng.gaussian(), rng.gaussian(), rng.gaussian()};
        axis = d.cross(r);
    } while (axis.norm() < 1e-9);
    return rotation_about_axis(axis.normalized(), rng.uniform(0.0, max_angle)) * d;
}

RigidTransform look_at_pose(const Eigen::Vector3d& center, const Eigen::Vector3d& target,
                            double roll) {
    const Eigen::Vector3d z = (target - center).normalized();
    Eigen::Vector3d up(0.0, 0.0, 1.0);
    if (std::abs(z.dot(up)) > 0.99) up = {0.0, 1.0, 0.0};
    const Eigen::Vector3d x = up.cross(z).normalized();
    const Eigen::Vector3d y = z.cross(x);
    Eigen::Matrix3d base;
    base.col(0) = x;
    base.col(1) = y;
    base.col(2) = z;
    RigidTransform pose;
    pose.rotation = base * rotation_about_axis(Eigen::Vector3d::UnitZ(), roll);
    pose.translation = center;
    return pose;
}

DepthFrame render_depth(const Scene& scene, const RigidTransform& cam_pose,
                        const CameraIntrinsics& k, double noise_sigma, Rng& rng) {
    std::vector<double> depth(static_cast<size_t>(k.width) * k.height, 0.0);
    const Eigen::Vector3d origin = cam_pose.translation;
    for (int v = 0; v < k.height; ++v) {
        for (int u = 0; u < k.width; ++u) {
            // Direction with camera-space z = 1 so the ray parameter is the depth.
            const Eigen::Vector3d dc{(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0};
            const Eigen::Vector3d dw = cam_pose.rotation * dc;
            const auto t = raycast_scene(scene, origin, dw, 0.1);
            if (!t) continue;
            double d = *t;
            if (noise_sigma > 0.0) d += rng.gaussian(noise_sigma);
            if (d > 0.0) depth[static_cast<size_t>(v) * k.width + u] = d;
        }
    }
    return DepthFrame(std::move(depth), k, cam_pose);
}

namespace {

Primitive make_random_primitive(PrimitiveKind kind, Rng& rng) {
    Primitive p;
    p.kind = kind;
    switch (kind) {
        case PrimitiveKind::Plane:
            p.a = rng.uniform(0.5, 0.8);
            p.b = rng.uniform(0.5, 0.8);
            break;
        case PrimitiveKind::Edge:
            p.a = rng.uniform(60.0, 150.0) * kPi / 180.0;
            p.b = rng.uniform(0.3, 0.5);
            p.c = rng.uniform(0.3, 0.5);
            break;
        case PrimitiveKind::Corner:
            p.a = rng.uniform(0.25, 0.45);
            break;
        case PrimitiveKind::Sphere:
            p.a = rng.uniform(0.06, 0.22);
            break;
        case PrimitiveKind::Cylinder:
            p.a = rng.uniform(0.04, 0.18);
            p.b = rng.uniform(0.25, 0.45);
            break;
    }
    p.pose.rotation = random_rotation(rng);
    return p;
}

// Moves the primitive so its anchor sits at `target`.
void place_anchor(Primitive& p, const Eigen::Vector3d& target) {
    const Eigen::Vector3d cur = anchor_point(p).vec();
    p.pose.translation += target - cur;
}

CameraIntrinsics bench_intrinsics() { return CameraIntrinsics(230.0, 230.0, 120.0, 90.0, 240, 180); }

struct ViewSample {
    DepthFrame frame;
    PointCloud world;
};

// Renders one view of the scene aimed at `target` from direction `dir`
// (unit, pointing from the target toward the camera). Absent when the target
// fails the visibility check.
std::optional<ViewSample> render_view_at(const Scene& scene, const Point3& target,
                                         const Eigen::Vector3d& dir, double noise_sigma,
                                         Rng& rng) {
    const CameraIntrinsics k = bench_intrinsics();
    const double dist = rng.uniform(1.1, 1.7);
    const double roll = rng.uniform(-20.0, 20.0) * kPi / 180.0;
    const RigidTransform pose = look_at_pose(target.vec() + dist * dir, target.vec(), roll);
    DepthFrame frame = render_depth(scene, pose, k, noise_sigma, rng);
    if (!visibility_check(frame, target, 0.03)) return std::nullopt;
    ViewSample view{std::move(frame), {}};
    view.world = transform_cloud(view.frame.pose, back_project(view.frame));
    return view;
}

// Second viewing direction at a controlled angular offset from the first.
Eigen::Vector3d offset_direction(const Eigen::Vector3d& dir, double min_angle, double max_angle,
                                 Rng& rng) {
    Eigen::Vector3d axis;
    do {
        const Eigen::Vector3d r{rng.gaussian(), rng.gaussian(), rng.gaussian()};
        axis = dir.cross(r);
    } while (axis.norm() < 1e-9);
    return rotation_about_axis(axis.normalized(), rng.uniform(min_angle, max_angle)) * dir;
}

TdfPatch view_patch(const ViewSample& view, const Point3& keypoint, const TdfConfig& cfg) {
    RigidTransform axes;
    axes.rotation = view.frame.pose.rotation;
    return extract_patch(view.world, keypoint, cfg, axes);
}

// One split of the patch-pair benchmark: `total/2` matches then non-matches,
// written interleaved like build_dataset output.
std::string generate_patch_split(const std::string& dir, size_t total, const TdfConfig& tdf_cfg,
                                 double noise_sigma, uint64_t seed) {
    fs::create_directories(dir);
    const size_t half = total / 2;
    Rng rng(seed);
    std::ostringstream manifest;
    char name_a[64], name_b[64];

    const auto gen_match = [&](size_t k) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            Scene scene{make_random_primitive(static_cast<PrimitiveKind>(rng.uniform_u64(5)), rng)};
            place_anchor(scene[0], Eigen::Vector3d::Zero());
            const Point3 anchor = anchor_point(scene[0]);
            const Eigen::Vector3d open = open_direction(scene[0]);
            // Wide-ish baseline: the two views differ by 10-35 degrees.
            const Eigen::Vector3d dir_a = perturb_direction(open, 10.0 * kPi / 180.0, rng);
            const Eigen::Vector3d dir_b =
                offset_direction(dir_a, 10.0 * kPi / 180.0, 35.0 * kPi / 180.0, rng);
            const auto va = render_view_at(scene, anchor, dir_a, noise_sigma, rng);
            const auto vb = render_view_at(scene, anchor, dir_b, noise_sigma, rng);
            if (!va || !vb) continue;
            TdfPatch pa, pb;
            try {
                pa = view_patch(*va, anchor, tdf_cfg);
                pb = view_patch(*vb, anchor, tdf_cfg);
            } catch (const std::runtime_error&) {
                continue;
            }
            std::snprintf(name_a, sizeof(name_a), "match-%06zu-a.tdf", k);
            std::snprintf(name_b, sizeof(name_b), "match-%06zu-b.tdf", k);
            write_tdf((fs::path(dir) / name_a).string(), pa);
            write_tdf((fs::path(dir) / name_b).string(), pb);
            manifest << name_a << " " << name_b << " 1\n";
            return;
        }
        throw std::runtime_error("patch benchmark: match generation budget exhausted");
    };

    const auto gen_non_match = [&](size_t k) {
        for (int attempt = 0; attempt < 64; ++attempt) {
            // Half the non-matches pair two instances of the same geometry
            // class with different parameters: the hard negatives.
            const auto kind_a = static_cast<PrimitiveKind>(rng.uniform_u64(5));
            const auto kind_b = rng.uniform_u64(2) == 0
                                    ? kind_a
                                    : static_cast<PrimitiveKind>(rng.uniform_u64(5));
            Scene scene{make_random_primitive(kind_a, rng), make_random_primitive(kind_b, rng)};
            place_anchor(scene[0], Eigen::Vector3d::Zero());
            Eigen::Vector3d offset;
            do {
                offset = {rng.gaussian(), rng.gaussian(), rng.gaussian()};
            } while (offset.norm() < 1e-9);
            offset = offset.normalized() * rng.uniform(0.11, 0.4);
            place_anchor(scene[1], offset);
            const Point3 a1 = anchor_point(scene[0]);
            const Point3 a2 = anchor_point(scene[1]);
            const Eigen::Vector3d dir_a =
                perturb_direction(open_direction(scene[0]), 15.0 * kPi / 180.0, rng);
            const Eigen::Vector3d dir_b =
                perturb_direction(open_direction(scene[1]), 15.0 * kPi / 180.0, rng);
            const auto va = render_view_at(scene, a1, dir_a, noise_sigma, rng);
            const auto vb = render_view_at(scene, a2, dir_b, noise_sigma, rng);
            if (!va || !vb) continue;
            TdfPatch pa, pb;
            try {
                pa = view_patch(*va, a1, tdf_cfg);
                pb = view_patch(*vb, a2, tdf_cfg);
            } catch (const std::runtime_error&) {
                continue;
            }
            std::snprintf(name_a, sizeof(name_a), "nonmatch-%06zu-a.tdf", k);
            std::snprintf(name_b, sizeof(name_b), "nonmatch-%06zu-b.tdf", k);
            write_tdf((fs::path(dir) / name_a).string(), pa);
            write_tdf((fs::path(dir) / name_b).string(), pb);
            manifest << name_a << " " << name_b << " 0\n";
            return;
        }
        throw std::runtime_error("patch benchmark: non-match generation budget exhausted");
    };

    for (size_t k = 0; k < half; ++k) {
        gen_match(k);
        gen_non_match(k);
    }

    const std::string manifest_path = (fs::path(dir) / "manifest.txt").string();
    std::ofstream out(manifest_path);
    if (!out) throw std::runtime_error(manifest_path + ": cannot open for writing");
    out << manifest.str();
    if (!out.flush()) throw std::runtime_error(manifest_path + ": write failed");
    return manifest_path;
}

Scene make_fragment_scene(Rng& rng) {
    Scene scene;
    Primitive ground;
    ground.kind = PrimitiveKind::Plane;
    ground.a = 0.8;
    ground.b = 0.8;
    scene.push_back(ground);
    for (int i = 0; i < 5; ++i) {
        Primitive p =
            make_random_primitive(static_cast<PrimitiveKind>(rng.uniform_u64(5)), rng);
        place_anchor(p, {rng.uniform(-0.45, 0.45), rng.uniform(-0.45, 0.45),
                         rng.uniform(0.08, 0.45)});
        scene.push_back(p);
    }
    return scene;
}

// Each fragment is the union of three nearby rendered views, stored in the
// coordinates of its middle camera (the analog of a fused depth-frame
// fragment with camera-aligned axes). Adjacent fragments sit ~22 degrees
// apart on an orbit, so registered pairs present the same viewpoint deltas
// the descriptor is trained on.
std::string generate_fragment_benchmark(const std::string& dir, size_t num_scenes,
                                        double noise_sigma, uint64_t seed) {
    fs::create_directories(dir);
    std::ostringstream meta;
    char buf[200];
    const CameraIntrinsics k(320.0, 320.0, 120.0, 90.0, 240, 180);

    for (size_t si = 0; si < num_scenes; ++si) {
        Rng rng(derive_seed(seed, 1000 + si));
        const Scene scene = make_fragment_scene(rng);
        const double psi = rng.uniform(0.0, 2.0 * kPi);
        const double elevation = rng.uniform(30.0, 50.0) * kPi / 180.0;
        const double radius = rng.uniform(1.7, 2.1);
        const double step = 22.0 * kPi / 180.0;

        RigidTransform ref_pose[3];
        PointCloud stored[3];
        std::vector<DepthFrame> frames[3];
        for (int f = 0; f < 3; ++f) {
            const double theta_f = psi + f * step;
            PointCloud world_union;
            for (int v = -1; v <= 1; ++v) {
                const double theta = theta_f + v * 8.0 * kPi / 180.0;
                const double el = elevation + rng.uniform(-0.05, 0.05);
                const double r = radius + rng.uniform(-0.1, 0.1);
                const Eigen::Vector3d center{r * std::cos(el) * std::cos(theta),
                                             r * std::cos(el) * std::sin(theta),
                                             r * std::sin(el)};
                const Eigen::Vector3d target{rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1),
                                             rng.uniform(0.0, 0.2)};
                const RigidTransform pose =
                    look_at_pose(center, target, rng.uniform(-0.2, 0.2));
                DepthFrame frame = render_depth(scene, pose, k, noise_sigma, rng);
                if (v == 0) ref_pose[f] = pose;
                const PointCloud world = transform_cloud(pose, back_project(frame));
                world_union.points.insert(world_union.points.end(), world.points.begin(),
                                          world.points.end());
                frames[f].push_back(std::move(frame));
            }
            stored[f] = transform_cloud(invert(ref_pose[f]), world_union);
            std::snprintf(buf, sizeof(buf), "scene-%02zu-frag-%d.ply", si, f);
            write_ply((fs::path(dir) / buf).string(), stored[f]);
        }

        // Adjacent pairs only; the flag is computed from the actual overlap.
        const int pair_a[2] = {0, 1};
        const int pair_b[2] = {1, 2};
        for (int pi = 0; pi < 2; ++pi) {
            const int fa = pair_a[pi], fb = pair_b[pi];
            const RigidTransform gt = compose(invert(ref_pose[fb]), ref_pose[fa]);
            char pose_name[64], corr_name[64], frag_a[64], frag_b[64];
            std::snprintf(pose_name, sizeof(pose_name), "scene-%02zu-pair-%d.pose.txt", si, pi);
            std::snprintf(corr_name, sizeof(corr_name), "scene-%02zu-pair-%d.corr.txt", si, pi);
            std::snprintf(frag_a, sizeof(frag_a), "scene-%02zu-frag-%d.ply", si, fa);
            std::snprintf(frag_b, sizeof(frag_b), "scene-%02zu-frag-%d.ply", si, fb);
            write_pose((fs::path(dir) / pose_name).string(), gt);

            // Noise-free correspondences on surface points visible to both
            // fragments, in each fragment's local coordinates.
            const RigidTransform world_to_a = invert(ref_pose[fa]);
            const RigidTransform world_to_b = invert(ref_pose[fb]);
            std::ofstream corr((fs::path(dir) / corr_name).string());
            if (!corr) throw std::runtime_error(std::string(corr_name) + ": cannot open");
            int written = 0;
            int budget = 40000;
            while (written < 200 && budget-- > 0) {
                const Point3 p = sample_scene_surface(scene, rng);
                const auto seen_by = [&](int f) {
                    for (const DepthFrame& frame : frames[f]) {
                        if (visibility_check(frame, p, 0.03)) return true;
                    }
                    return false;
                };
                if (!seen_by(fa) || !seen_by(fb)) continue;
                const Point3 pa = world_to_a.apply(p);
                const Point3 pb = world_to_b.apply(p);
                std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g %.17g\n", pa.x,
                              pa.y, pa.z, pb.x, pb.y, pb.z);
                corr << buf;
                ++written;
            }
            if (written < 200) {
                throw std::runtime_error("fragment benchmark: too few shared surface points");
            }
            const bool overlap_gt =
                overlap_fraction_of(gt, stored[fa], stored[fb], 0.03) >= 0.30;
            meta << frag_a << " " << frag_b << " " << pose_name << " " << corr_name << " "
                 << (overlap_gt ? 1 : 0) << "\n";
        }
    }

    const std::string meta_path = (fs::path(dir) / "fragments.txt").string();
    std::ofstream out(meta_path);
    if (!out) throw std::runtime_error(meta_path + ": cannot open for writing");
    out << meta.str();
    if (!out.flush()) throw std::runtime_error(meta_path + ": write failed");
    return meta_path;
}

}  // namespace

BenchmarkPaths generate_synthetic_benchmark(uint64_t seed, const std::string& out_dir,
                                            const BenchmarkOptions& opts) {
    if (opts.patch_pairs_per_split % 2 != 0) {
        throw std::runtime_error("pair count must be even");
    }
    fs::create_directories(out_dir);
    BenchmarkPaths paths;
    paths.train_manifest =
        generate_patch_split((fs::path(out_dir) / "patches" / "train").string(),
                             opts.patch_pairs_per_split, opts.tdf, opts.noise_sigma,
                             derive_seed(seed, 1));
    paths.test_manifest =
        generate_patch_split((fs::path(out_dir) / "patches" / "test").string(),
                             opts.patch_pairs_per_split, opts.tdf, opts.noise_sigma,
                             derive_seed(seed, 2));
    paths.fragments_meta = generate_fragment_benchmark((fs::path(out_dir) / "fragments").string(),
                                                       opts.num_scenes, opts.noise_sigma, seed);
    return paths;
}

std::vector<FragmentPairRecord> read_fragment_benchmark(const std::string& meta_path) {
    std::ifstream in(meta_path);
    if (!in) throw std::runtime_error(meta_path + ": cannot open");
    const fs::path base = fs::path(meta_path).parent_path();
    std::vector<FragmentPairRecord> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        FragmentPairRecord rec;
        int flag;
        std::string a, b, pose, corr;
        if (!(ls >> a >> b >> pose >> corr >> flag) || (flag != 0 && flag != 1)) {
            throw std::runtime_error(meta_path + ":" + std::to_string(lineno) +
                                     ": malformed line");
        }
        const auto resolve = [&](const std::string& p) {
            return fs::path(p).is_absolute() ? p : (base / p).string();
        };
        rec.cloud_a_path = resolve(a);
        rec.cloud_b_path = resolve(b);
        rec.pose_path = resolve(pose);
        rec.corr_path = resolve(corr);
        rec.overlap_gt = flag == 1;
        out.push_back(std::move(rec));
    }
    if (out.empty()) throw std::runtime_error(meta_path + ": empty benchmark");
    return out;
}

std::vector<std::pair<Point3, Point3>> read_correspondences(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    std::vector<std::pair<Point3, Point3>> out;
    double px, py, pz, qx, qy, qz;
    while (in >> px >> py >> pz >> qx >> qy >> qz) {
        out.emplace_back(Point3{px, py, pz}, Point3{qx, qy, qz});
    }
    if (out.empty()) throw std::runtime_error(path + ": no correspondences");
    return out;
}

FragmentPair load_fragment_pair(const FragmentPairRecord& rec) {
    FragmentPair pair;
    pair.cloud_a = read_ply(rec.cloud_a_path);
    pair.cloud_b = read_ply(rec.cloud_b_path);
    pair.gt_transform = read_pose(rec.pose_path);
    pair.gt_correspondences = read_correspondences(rec.corr_path);
    pair.overlap_gt = rec.overlap_gt;
    return pair;
}

}  // namespace tdfmatch
