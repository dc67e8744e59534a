#include "tdfmatch/tdf.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace tdfmatch {

void TdfConfig::validate() const {
    if (grid_dim < 2) throw std::runtime_error("grid_dim must be >= 2");
    if (!(voxel_size > 0.0)) throw std::runtime_error("voxel_size must be positive");
    if (!(trunc_margin >= 1.0)) throw std::runtime_error("trunc_margin must be >= 1");
}

TdfPatch compute_tdf(const PointCloud& cloud, const Point3& origin, const TdfConfig& cfg) {
    cfg.validate();
    if (cloud.empty()) throw std::runtime_error("no surface points in region");

    const int dim = cfg.grid_dim;
    const double s = cfg.voxel_size;
    const double trunc = cfg.truncation_m();
    const double trunc_sq = trunc * trunc;

    const KdTree tree(cloud);
    TdfPatch patch;
    patch.config = cfg;
    patch.origin = origin;
    patch.values.resize(static_cast<size_t>(dim) * dim * dim);

    size_t idx = 0;
    size_t prev = KdTree::npos;  // warm start: the scan moves one voxel at a time
    for (int z = 0; z < dim; ++z) {
        for (int y = 0; y < dim; ++y) {
            for (int x = 0; x < dim; ++x, ++idx) {
                const Point3 center{origin.x + (x + 0.5) * s, origin.y + (y + 0.5) * s,
                                    origin.z + (z + 0.5) * s};
                double hint_sq = 1e300;
                if (prev != KdTree::npos) {
                    hint_sq = squared_distance(center, cloud.points[prev]);
                }
                const auto [pi, sq] = tree.nearest_within(center, trunc_sq, prev, hint_sq);
                if (pi == KdTree::npos) {
                    patch.values[idx] = 0.0f;
                } else {
                    patch.values[idx] = static_cast<float>(1.0 - std::sqrt(sq) / trunc);
                    prev = pi;
                }
            }
        }
    }
    return patch;
}

TdfPatch extract_patch(const PointCloud& cloud, const Point3& keypoint, const TdfConfig& cfg,
                       const RigidTransform& axes) {
    cfg.validate();
    const int dim = cfg.grid_dim;
    const double s = cfg.voxel_size;
    const double half = dim * 0.5 * s;
    const double reach = half + cfg.truncation_m();

    // Work in the grid frame: keypoint at the cube center, axes from the
    // columns of axes.rotation.
    const Eigen::Matrix3d world_to_grid = axes.rotation.transpose();
    const Eigen::Vector3d kp = keypoint.vec();

    PointCloud local;
    for (const Point3& p : cloud.points) {
        const Eigen::Vector3d g = world_to_grid * (p.vec() - kp);
        if (std::abs(g.x()) <= reach && std::abs(g.y()) <= reach && std::abs(g.z()) <= reach) {
            local.points.push_back(Point3::from(g));
        }
    }
    if (local.empty()) throw std::runtime_error("empty patch");

    const Point3 grid_origin{-half, -half, -half};
    TdfPatch patch = compute_tdf(local, grid_origin, cfg);
    // Report the world position of the (0,0,0) voxel corner.
    const Eigen::Vector3d world_origin =
        kp + axes.rotation * Eigen::Vector3d(-half, -half, -half);
    patch.origin = Point3::from(world_origin);
    return patch;
}

TdfPatch extract_patch(const DepthFrame& frame, const Point3& keypoint_world,
                       const TdfConfig& cfg) {
    const PointCloud world = transform_cloud(frame.pose, back_project(frame));
    RigidTransform axes;
    axes.rotation = frame.pose.rotation;
    return extract_patch(world, keypoint_world, cfg, axes);
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::runtime_error(path + ": " + what);
}

template <typename T>
void put_le(std::string& out, T v) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &v, sizeof(T));
    out.append(reinterpret_cast<char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& in, const std::string& path) {
    unsigned char bytes[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
        fail(path, "unexpected end of file");
    }
    T v;
    std::memcpy(&v, bytes, sizeof(T));
    return v;
}

}  // namespace

void write_tdf(const std::string& path, const TdfPatch& patch) {
    std::string buf;
    buf.reserve(24 + patch.values.size() * 4 + 16);
    buf.append("TDF1", 4);
    const uint32_t dim = static_cast<uint32_t>(patch.config.grid_dim);
    put_le(buf, dim);
    put_le(buf, dim);
    put_le(buf, dim);
    put_le(buf, static_cast<float>(patch.config.voxel_size));
    put_le(buf, static_cast<float>(patch.config.trunc_margin));
    put_le(buf, static_cast<float>(patch.origin.x));
    put_le(buf, static_cast<float>(patch.origin.y));
    put_le(buf, static_cast<float>(patch.origin.z));
    for (float v : patch.values) put_le(buf, v);

    std::ofstream out(path, std::ios::binary);
    if (!out) fail(path, "cannot open for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) fail(path, "write failed");
}

TdfPatch read_tdf(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    char magic[4];
    if (!in.read(magic, 4)) fail(path, "unexpected end of file");
    if (std::memcmp(magic, "TDF1", 4) != 0) fail(path, "bad magic");

    const uint32_t dx = get_le<uint32_t>(in, path);
    const uint32_t dy = get_le<uint32_t>(in, path);
    const uint32_t dz = get_le<uint32_t>(in, path);
    if (dx != dy || dy != dz || dx < 2) fail(path, "dimension mismatch");

    TdfPatch patch;
    patch.config.grid_dim = static_cast<int>(dx);
    patch.config.voxel_size = get_le<float>(in, path);
    patch.config.trunc_margin = get_le<float>(in, path);
    const float ox = get_le<float>(in, path);
    const float oy = get_le<float>(in, path);
    const float oz = get_le<float>(in, path);
    patch.origin = Point3{ox, oy, oz};
    patch.config.validate();

    const size_t n = static_cast<size_t>(dx) * dy * dz;
    patch.values.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const float v = get_le<float>(in, path);
        if (!(v >= 0.0f && v <= 1.0f)) fail(path, "value out of range");
        patch.values[i] = v;
    }
    return patch;
}

}  // namespace tdfmatch
