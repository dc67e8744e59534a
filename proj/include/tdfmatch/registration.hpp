#pragma once

#include "tdfmatch/net.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace tdfmatch {

struct DescriptorSet {
    std::vector<Point3> keypoints;
    std::vector<Descriptor> descriptors;

    size_t size() const { return keypoints.size(); }
};

struct Match {
    size_t a = 0, b = 0;
    double distance = 0.0;
};

struct MatchSet {
    std::vector<Match> pairs;
};

struct RansacConfig {
    int iterations = 10000;
    double inlier_threshold = 0.05;  // meters
    int sample_size = 3;
    int min_inliers = 10;
    uint64_t seed = 0;
};

struct RegistrationResult {
    RigidTransform transform;
    std::vector<size_t> inlier_indices;  // indices into the MatchSet
    double inlier_rmse = 0.0;            // meters, over the inliers
    bool converged = false;
};

// n points drawn uniformly without replacement (with replacement when n
// exceeds the cloud size); deterministic given seed.
std::vector<Point3> sample_keypoints(const PointCloud& cloud, size_t n, uint64_t seed);

// Pairs (i,j) where j is a_i's closest descriptor in b AND i is b_j's closest
// in a; argmin ties break to the lowest index. Distances are Euclidean.
MatchSet mutual_nearest(const DescriptorSet& a, const DescriptorSet& b);

// Least-squares rigid transform src -> dst (orthogonal Procrustes via SVD
// with determinant sign correction). Throws "degenerate sample" on collinear
// or coincident sources.
RigidTransform fit_rigid(const std::vector<Point3>& src, const std::vector<Point3>& dst);

// RANSAC over the 3D positions of the matches: 3-sample hypotheses, inliers
// at ||T*p_a - p_b|| <= inlier_threshold, best hypothesis by (inlier count,
// lower rmse, earlier iteration), refit on its inliers. Deterministic given
// cfg.seed.
RegistrationResult ransac_align(const DescriptorSet& a, const DescriptorSet& b,
                                const MatchSet& matches, const RansacConfig& cfg);

// Descriptor distance from the query patch to an object-axes patch at every
// stride-th target point. Points with an empty patch get +infinity.
std::vector<double> surface_correspondence_heat(const TdfPatch& query, const PointCloud& target,
                                                const TdfConfig& cfg, const NetworkSpec& spec,
                                                const Parameters& params, size_t stride = 1);

}  // namespace tdfmatch
