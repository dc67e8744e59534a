#include "tdfmatch/geometry.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tdfmatch {

Point3::Point3(double px, double py, double pz) : x(px), y(py), z(pz) {
    if (!std::isfinite(px) || !std::isfinite(py) || !std::isfinite(pz)) {
        throw std::runtime_error("non-finite point component");
    }
}

double squared_distance(const Point3& a, const Point3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

double distance(const Point3& a, const Point3& b) {
    return std::sqrt(squared_distance(a, b));
}

CameraIntrinsics::CameraIntrinsics(double fx_, double fy_, double cx_, double cy_, int w, int h)
    : fx(fx_), fy(fy_), cx(cx_), cy(cy_), width(w), height(h) {
    if (fx <= 0.0 || fy <= 0.0) throw std::runtime_error("focal length must be positive");
    if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
        throw std::runtime_error("principal point outside image");
    }
}

double rotation_error(const Eigen::Matrix3d& r) {
    const Eigen::Matrix3d e = r.transpose() * r - Eigen::Matrix3d::Identity();
    return e.cwiseAbs().maxCoeff();
}

bool is_valid_rotation(const Eigen::Matrix3d& r, double tol) {
    return rotation_error(r) <= tol && r.determinant() > 0.0;
}

void validate_transform(const RigidTransform& t, double tol) {
    if (!t.translation.allFinite() || !t.rotation.allFinite()) {
        throw std::runtime_error("non-finite transform");
    }
    if (!is_valid_rotation(t.rotation, tol)) {
        throw std::runtime_error("rotation is not orthonormal with det +1");
    }
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform out;
    out.rotation = a.rotation * b.rotation;
    out.translation = a.rotation * b.translation + a.translation;
    return out;
}

RigidTransform invert(const RigidTransform& t) {
    RigidTransform out;
    out.rotation = t.rotation.transpose();
    out.translation = -(out.rotation * t.translation);
    return out;
}

PointCloud transform_cloud(const RigidTransform& t, const PointCloud& c) {
    PointCloud out;
    out.points.reserve(c.size());
    for (const Point3& p : c.points) out.points.push_back(t.apply(p));
    return out;
}

DepthFrame::DepthFrame(std::vector<double> depth_values, CameraIntrinsics k, RigidTransform cam_to_world)
    : depth(std::move(depth_values)), intrinsics(k), pose(std::move(cam_to_world)) {
    if (depth.size() != static_cast<size_t>(intrinsics.width) * intrinsics.height) {
        throw std::runtime_error("depth grid dimensions do not match intrinsics");
    }
    for (double d : depth) {
        if (!(d >= 0.0) || !std::isfinite(d)) {
            throw std::runtime_error("depth values must be finite and >= 0");
        }
    }
    validate_transform(pose);
}

PointCloud back_project(const DepthFrame& frame) {
    const CameraIntrinsics& k = frame.intrinsics;
    PointCloud out;
    for (int v = 0; v < k.height; ++v) {
        for (int u = 0; u < k.width; ++u) {
            const double d = frame.at(u, v);
            if (d <= 0.0) continue;
            out.points.push_back({(u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d});
        }
    }
    return out;
}

BackProjection back_project_world(const DepthFrame& frame) {
    const CameraIntrinsics& k = frame.intrinsics;
    BackProjection out;
    for (int v = 0; v < k.height; ++v) {
        for (int u = 0; u < k.width; ++u) {
            const double d = frame.at(u, v);
            if (d <= 0.0) continue;
            const Point3 cam{(u - k.cx) * d / k.fx, (v - k.cy) * d / k.fy, d};
            out.world.points.push_back(frame.pose.apply(cam));
            out.pixels.emplace_back(u, v);
        }
    }
    return out;
}

std::pair<size_t, double> nearest_neighbor(const Point3& query, const PointCloud& cloud) {
    if (cloud.empty()) throw std::runtime_error("empty cloud");
    size_t best = 0;
    double best_sq = squared_distance(query, cloud.points[0]);
    for (size_t i = 1; i < cloud.size(); ++i) {
        const double sq = squared_distance(query, cloud.points[i]);
        if (sq < best_sq) {
            best = i;
            best_sq = sq;
        }
    }
    return {best, std::sqrt(best_sq)};
}

KdTree::KdTree(const PointCloud& cloud) {
    if (cloud.empty()) return;
    std::vector<uint32_t> ids(cloud.size());
    std::iota(ids.begin(), ids.end(), 0u);
    nodes_.reserve(cloud.size());
    root_ = build(ids, 0, ids.size(), cloud);
}

int32_t KdTree::build(std::vector<uint32_t>& ids, size_t lo, size_t hi, const PointCloud& cloud) {
    if (lo >= hi) return -1;
    // Split on the widest axis of the subrange's bounding box.
    double mins[3] = {1e300, 1e300, 1e300}, maxs[3] = {-1e300, -1e300, -1e300};
    for (size_t i = lo; i < hi; ++i) {
        const Point3& p = cloud.points[ids[i]];
        const double c[3] = {p.x, p.y, p.z};
        for (int a = 0; a < 3; ++a) {
            mins[a] = std::min(mins[a], c[a]);
            maxs[a] = std::max(maxs[a], c[a]);
        }
    }
    int axis = 0;
    for (int a = 1; a < 3; ++a) {
        if (maxs[a] - mins[a] > maxs[axis] - mins[axis]) axis = a;
    }
    const size_t mid = (lo + hi) / 2;
    std::nth_element(ids.begin() + lo, ids.begin() + mid, ids.begin() + hi,
                     [&](uint32_t a, uint32_t b) {
                         const Point3& pa = cloud.points[a];
                         const Point3& pb = cloud.points[b];
                         const double ca = axis == 0 ? pa.x : (axis == 1 ? pa.y : pa.z);
                         const double cb = axis == 0 ? pb.x : (axis == 1 ? pb.y : pb.z);
                         return ca < cb;
                     });
    Node node;
    node.point = cloud.points[ids[mid]];
    node.index = ids[mid];
    node.axis = (hi - lo == 1) ? -1 : axis;
    for (int a = 0; a < 3; ++a) {
        node.box_min[a] = mins[a];
        node.box_max[a] = maxs[a];
    }
    const int32_t self = static_cast<int32_t>(nodes_.size());
    nodes_.push_back(node);
    if (hi - lo > 1) {
        const int32_t l = build(ids, lo, mid, cloud);
        const int32_t r = build(ids, mid + 1, hi, cloud);
        nodes_[self].left = l;
        nodes_[self].right = r;
    }
    return self;
}

void KdTree::search(int32_t ni, const Point3& q, size_t& best_idx, double& best_sq) const {
    if (ni < 0) return;
    const Node& n = nodes_[ni];
    // Subtree bounding-box pruning. The strict > keeps exact-tie candidates
    // reachable so the lowest-index rule is preserved.
    const double qc3[3] = {q.x, q.y, q.z};
    double box_sq = 0.0;
    for (int a = 0; a < 3; ++a) {
        double d = 0.0;
        if (qc3[a] < n.box_min[a]) {
            d = n.box_min[a] - qc3[a];
        } else if (qc3[a] > n.box_max[a]) {
            d = qc3[a] - n.box_max[a];
        }
        box_sq += d * d;
    }
    if (box_sq > best_sq) return;

    const double sq = squared_distance(q, n.point);
    if (sq < best_sq || (sq == best_sq && best_idx != npos && n.index < best_idx)) {
        best_sq = sq;
        best_idx = n.index;
    }
    if (n.axis < 0) return;
    const double qc = qc3[n.axis];
    const double nc = n.axis == 0 ? n.point.x : (n.axis == 1 ? n.point.y : n.point.z);
    const int32_t near = qc < nc ? n.left : n.right;
    const int32_t far = qc < nc ? n.right : n.left;
    search(near, q, best_idx, best_sq);
    search(far, q, best_idx, best_sq);
}

std::pair<size_t, double> KdTree::nearest_within(const Point3& query, double max_sq_dist,
                                                 size_t hint_idx, double hint_sq) const {
    size_t best_idx = npos;
    double best_sq = max_sq_dist;
    if (hint_idx != npos && hint_sq < max_sq_dist) {
        best_idx = hint_idx;
        best_sq = hint_sq;
    }
    search(root_, query, best_idx, best_sq);
    return {best_idx, best_sq};
}

std::pair<size_t, double> KdTree::nearest(const Point3& query) const {
    if (empty()) throw std::runtime_error("empty cloud");
    auto [idx, sq] = nearest_within(query, 1e300);
    return {idx, std::sqrt(sq)};
}

}  // namespace tdfmatch
