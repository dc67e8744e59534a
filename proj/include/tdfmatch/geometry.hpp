#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tdfmatch {

struct Point3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Point3() = default;
    Point3(double px, double py, double pz);

    Eigen::Vector3d vec() const { return {x, y, z}; }
    static Point3 from(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }
};

double distance(const Point3& a, const Point3& b);
double squared_distance(const Point3& a, const Point3& b);

struct PointCloud {
    std::vector<Point3> points;

    bool empty() const { return points.empty(); }
    size_t size() const { return points.size(); }
};

struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;

    CameraIntrinsics() = default;
    CameraIntrinsics(double fx, double fy, double cx, double cy, int width, int height);
};

// Rotation + translation. Rotation must be orthonormal with det +1 within
// 1e-6 (max entry of |R^T R - I|).
struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static RigidTransform identity() { return {}; }

    Point3 apply(const Point3& p) const {
        return Point3::from(rotation * p.vec() + translation);
    }
};

// Max entry of |R^T R - I|; 0 for an exact rotation.
double rotation_error(const Eigen::Matrix3d& r);
bool is_valid_rotation(const Eigen::Matrix3d& r, double tol = 1e-6);
// Throws if the rotation invariant or determinant sign is violated.
void validate_transform(const RigidTransform& t, double tol = 1e-6);

RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

PointCloud transform_cloud(const RigidTransform& t, const PointCloud& c);

// Depth image with pinhole intrinsics and a camera-to-world pose.
// depth(v, u) in meters, row-major, 0 = missing.
struct DepthFrame {
    std::vector<double> depth;
    CameraIntrinsics intrinsics;
    RigidTransform pose;

    DepthFrame() = default;
    DepthFrame(std::vector<double> depth_values, CameraIntrinsics k, RigidTransform cam_to_world);

    double at(int u, int v) const { return depth[static_cast<size_t>(v) * intrinsics.width + u]; }

    Eigen::Vector3d camera_center() const { return pose.translation; }
};

// Camera-space points for every pixel with depth > 0, row-major pixel order.
PointCloud back_project(const DepthFrame& frame);

// Same points in world coordinates (pose applied), plus the source pixel of
// each output point. Used by the correspondence sampler.
struct BackProjection {
    PointCloud world;
    std::vector<std::pair<int, int>> pixels;  // (u, v) per point
};
BackProjection back_project_world(const DepthFrame& frame);

// Index of the closest point and its Euclidean distance; ties broken by the
// lowest index. Throws on an empty cloud.
std::pair<size_t, double> nearest_neighbor(const Point3& query, const PointCloud& cloud);

// Static k-d tree over a point set. Query results are exhaustive-search
// equivalent, including the lowest-index tie rule.
class KdTree {
public:
    KdTree() = default;
    explicit KdTree(const PointCloud& cloud);

    bool empty() const { return nodes_.empty(); }

    // Nearest point with squared distance < max_sq_dist. Returns (index, d^2),
    // or (npos, max_sq_dist) when nothing qualifies. A hint (a known cloud
    // index with its exact squared distance) seeds the search bound; it is
    // returned unless a strictly closer or equal-but-lower-index point exists.
    static constexpr size_t npos = static_cast<size_t>(-1);
    std::pair<size_t, double> nearest_within(const Point3& query, double max_sq_dist,
                                             size_t hint_idx = npos,
                                             double hint_sq = 1e300) const;

    std::pair<size_t, double> nearest(const Point3& query) const;

private:
    struct Node {
        Point3 point;
        double box_min[3] = {0, 0, 0};  // subtree bounding box
        double box_max[3] = {0, 0, 0};
        uint32_t index = 0;  // index into the source cloud
        int axis = -1;       // -1 marks a leaf
        int32_t left = -1, right = -1;
    };
    std::vector<Node> nodes_;
    int32_t root_ = -1;

    int32_t build(std::vector<uint32_t>& ids, size_t lo, size_t hi, const PointCloud& cloud);
    void search(int32_t node, const Point3& q, size_t& best_idx, double& best_sq) const;
};

}  // namespace tdfmatch
