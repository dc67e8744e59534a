#pragma once

#include "tdfmatch/tdf.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tdfmatch {

struct Reconstruction {
    std::string name;
    std::vector<DepthFrame> frames;  // poses share one world frame
};

struct InterestPoint {
    Point3 position;  // world coordinates
    struct Observation {
        int frame = 0;
        int u = 0, v = 0;
    };
    std::vector<Observation> visible_frames;
};

struct PairMeta {
    int frame_a = 0, frame_b = 0;
    Point3 world_a, world_b;
};

struct CorrespondencePair {
    TdfPatch patch_a, patch_b;
    bool is_match = false;
    PairMeta meta;
};

struct SamplerConfig {
    double occ_tol = 0.03;              // meters, occlusion residual tolerance
    double min_camera_baseline = 1.0;   // meters, match camera separation
    double min_separation = 0.1;        // meters, non-match point separation
    int attempt_budget_factor = 100;    // attempts allowed per requested pair
};

// Projects the world point into the frame. Returns its pixel iff the
// camera-space depth is positive, the pixel is in bounds, the measured depth
// there is valid, and |measured - camera z| <= occ_tol.
std::optional<std::pair<int, int>> visibility_check(const DepthFrame& frame,
                                                    const Point3& world_point, double occ_tol);

// All frames in which the point passes visibility_check.
InterestPoint observe_point(const Reconstruction& rec, const Point3& world_point, double occ_tol);

// Matching pairs: a surface point sampled uniformly over the union of
// back-projected frame points, seen from two frames whose camera centers are
// at least min_camera_baseline apart; both patches camera-axes aligned.
// Throws when the attempt budget runs out before n pairs.
std::vector<CorrespondencePair> sample_matches(const Reconstruction& rec, size_t n,
                                               const TdfConfig& tdf_cfg, const SamplerConfig& cfg,
                                               uint64_t seed);

// Non-matching pairs: two surface points at least min_separation apart, each
// observed from one randomly picked frame that sees it.
std::vector<CorrespondencePair> sample_non_matches(const Reconstruction& rec, size_t n,
                                                   const TdfConfig& tdf_cfg,
                                                   const SamplerConfig& cfg, uint64_t seed);

struct DatasetManifest {
    std::string path;  // manifest file
    size_t match_count = 0;
    size_t non_match_count = 0;
};

// Writes n_pairs/2 matches and n_pairs/2 non-matches as TDF files plus a
// manifest (`<patchA> <patchB> <label>` per line, paths relative to the
// manifest). Pairs are drawn round-robin across reconstructions from
// shard-stable seed streams. Partial output is removed on failure.
DatasetManifest build_dataset(const std::vector<Reconstruction>& recs, size_t n_pairs,
                              const TdfConfig& tdf_cfg, const SamplerConfig& cfg, uint64_t seed,
                              const std::string& out_dir);

struct ManifestEntry {
    std::string patch_a, patch_b;  // resolved paths
    bool is_match = false;
};
std::vector<ManifestEntry> read_manifest(const std::string& path);

}  // namespace tdfmatch
