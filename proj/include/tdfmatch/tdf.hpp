#pragma once

#include "tdfmatch/geometry.hpp"

#include <string>
#include <vector>

namespace tdfmatch {

enum class Alignment { CameraAxes, ObjectAxes };

struct TdfConfig {
    int grid_dim = 30;           // voxels per side
    double voxel_size = 0.01;    // meters per voxel (0.005 for object models)
    double trunc_margin = 5.0;   // truncation distance in voxels
    Alignment alignment = Alignment::CameraAxes;

    double truncation_m() const { return trunc_margin * voxel_size; }
    void validate() const;
};

// Dense grid of flipped truncated-distance values in [0,1]: 1 on the surface,
// 0 at or beyond trunc_margin voxels from it. Linear layout is x-fastest:
// index = x + dim*(y + dim*z). Values are in the grid frame; origin is the
// world position of the (0,0,0) voxel corner.
struct TdfPatch {
    TdfConfig config;
    Point3 origin;
    std::vector<float> values;

    size_t voxel_count() const { return values.size(); }
    float at(int x, int y, int z) const {
        const int d = config.grid_dim;
        return values[static_cast<size_t>(x) + d * (static_cast<size_t>(y) + d * z)];
    }
};

// TDF over an axis-aligned grid anchored at `origin` (voxel (i,j,k) center at
// origin + (i+0.5, j+0.5, k+0.5)*voxel_size). Each value is
// 1 - min(d/truncation, 1) with d the distance to the nearest cloud point.
// Throws "no surface points in region" on an empty cloud.
TdfPatch compute_tdf(const PointCloud& cloud, const Point3& origin, const TdfConfig& cfg);

// Patch centered on `keypoint` with grid axes given by the columns of
// axes.rotation. The cloud is cropped to the patch cube expanded by the
// truncation distance before voxelizing; the crop cannot change any value.
// Throws "empty patch" when no points survive the crop.
TdfPatch extract_patch(const PointCloud& cloud, const Point3& keypoint, const TdfConfig& cfg,
                       const RigidTransform& axes);

// Camera-axes patch from a single posed depth frame: the frame is
// back-projected into world space and the grid is aligned to the camera.
TdfPatch extract_patch(const DepthFrame& frame, const Point3& keypoint_world,
                       const TdfConfig& cfg);

// TDF patch file: magic "TDF1", then little-endian uint32 dims x3,
// float32 voxel_size, float32 trunc_margin, float32 origin x3, then values.
TdfPatch read_tdf(const std::string& path);
void write_tdf(const std::string& path, const TdfPatch& patch);

}  // namespace tdfmatch
