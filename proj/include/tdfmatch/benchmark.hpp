#pragma once

#include "tdfmatch/eval.hpp"
#include "tdfmatch/rng.hpp"
#include "tdfmatch/tdf.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tdfmatch {

// Parametric local geometries used by the synthetic benchmarks. Canonical
// frames: plane rect in z=0; dihedral edge creased along y with its opening
// bisector on +x; trihedral corner at the origin of the +octant; sphere at
// the origin; cylinder tube along y.
enum class PrimitiveKind { Plane, Edge, Corner, Sphere, Cylinder };

struct Primitive {
    PrimitiveKind kind = PrimitiveKind::Plane;
    // Plane: a,b = half extents. Edge: a = opening angle (rad), b = face
    // width, c = half length. Corner: a = face size. Sphere: a = radius.
    // Cylinder: a = radius, b = half length.
    double a = 0.0, b = 0.0, c = 0.0;
    RigidTransform pose;
};

using Scene = std::vector<Primitive>;

double surface_area(const Primitive& p);
Point3 sample_surface(const Primitive& p, Rng& rng);
Point3 sample_scene_surface(const Scene& scene, Rng& rng);
// The primitive's distinctive point (crease midpoint, corner apex, ...).
Point3 anchor_point(const Primitive& p);
// Direction from which the anchor is fully visible.
Eigen::Vector3d open_direction(const Primitive& p);

// Ray parameter of the nearest hit with t > t_min; dir need not be unit.
std::optional<double> raycast(const Primitive& p, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& dir, double t_min);
std::optional<double> raycast_scene(const Scene& scene, const Eigen::Vector3d& origin,
                                    const Eigen::Vector3d& dir, double t_min);

// Camera-to-world pose looking from `center` toward `target`, rolled about
// the optical axis by `roll` radians.
RigidTransform look_at_pose(const Eigen::Vector3d& center, const Eigen::Vector3d& target,
                            double roll);

Eigen::Matrix3d rotation_about_axis(const Eigen::Vector3d& axis, double angle);
Eigen::Matrix3d random_rotation(Rng& rng);
// Unit vector at most `max_angle` away from `dir`, uniform in angle.
Eigen::Vector3d perturb_direction(const Eigen::Vector3d& dir, double max_angle, Rng& rng);

// Per-pixel analytic raycast; depth is the camera-space z of the nearest hit
// plus Gaussian noise (sigma meters), 0 where nothing is hit.
DepthFrame render_depth(const Scene& scene, const RigidTransform& cam_pose,
                        const CameraIntrinsics& k, double noise_sigma, Rng& rng);

struct BenchmarkOptions {
    size_t patch_pairs_per_split = 600;  // 300 matches + 300 non-matches
    size_t num_scenes = 10;
    double noise_sigma = 0.002;  // meters
    TdfConfig tdf;
};

struct BenchmarkPaths {
    std::string train_manifest;
    std::string test_manifest;
    std::string fragments_meta;
};

// Writes the patch-pair benchmark (train and test splits in the corr-sampler
// manifest format) and the fragment benchmark (clouds, ground-truth poses and
// correspondences, pair metadata). Pure function of the seed.
BenchmarkPaths generate_synthetic_benchmark(uint64_t seed, const std::string& out_dir,
                                            const BenchmarkOptions& opts = {});

struct FragmentPairRecord {
    std::string cloud_a_path, cloud_b_path;
    std::string pose_path, corr_path;
    bool overlap_gt = false;
};

std::vector<FragmentPairRecord> read_fragment_benchmark(const std::string& meta_path);
FragmentPair load_fragment_pair(const FragmentPairRecord& rec);
std::vector<std::pair<Point3, Point3>> read_correspondences(const std::string& path);

}  // namespace tdfmatch
