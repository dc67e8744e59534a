#pragma once

#include "tdfmatch/geometry.hpp"

#include <string>
#include <vector>

namespace tdfmatch {

// Depth image file: binary PGM "P5", maxval 65535, 16-bit big-endian samples,
// value = depth in millimeters, 0 = missing.
struct DepthImage {
    int width = 0, height = 0;
    std::vector<double> depth_m;  // meters, row-major
};
DepthImage read_depth_pgm(const std::string& path);
void write_depth_pgm(const std::string& path, const DepthImage& img);

// Intrinsics file: 9 whitespace-separated reals, row-major
// [[fx,0,cx],[0,fy,cy],[0,0,1]]. Width/height come from the paired depth image.
struct IntrinsicsMatrix {
    double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
};
IntrinsicsMatrix read_intrinsics(const std::string& path);
void write_intrinsics(const std::string& path, const IntrinsicsMatrix& k);

// Pose file: 16 whitespace-separated reals, row-major 4x4 camera-to-world,
// bottom row 0 0 0 1. invert=true loads world-to-camera files.
RigidTransform read_pose(const std::string& path, bool invert = false);
void write_pose(const std::string& path, const RigidTransform& t);

// ASCII PLY with exactly properties float x, float y, float z.
PointCloud read_ply(const std::string& path);
void write_ply(const std::string& path, const PointCloud& cloud);

// ASCII PLY with properties x, y, z, heat (surface-correspondence output).
void write_heat_ply(const std::string& path, const PointCloud& cloud,
                    const std::vector<double>& heat);

// Scene directory: frame-NNNNNN.depth.pgm + frame-NNNNNN.pose.txt pairs and
// one camera-intrinsics.txt. Frames are ordered by index.
std::vector<DepthFrame> load_scene_dir(const std::string& dir, bool invert_poses = false);

}  // namespace tdfmatch
