#include "tdfmatch/sampler.hpp"

#include "tdfmatch/rng.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fs = std::filesystem;

namespace tdfmatch {

std::optional<std::pair<int, int>> visibility_check(const DepthFrame& frame,
                                                    const Point3& world_point, double occ_tol) {
    if (!(occ_tol > 0.0)) throw std::runtime_error("occ_tol must be positive");
    const Eigen::Vector3d cam =
        frame.pose.rotation.transpose() * (world_point.vec() - frame.pose.translation);
    if (!(cam.z() > 0.0)) return std::nullopt;
    const CameraIntrinsics& k = frame.intrinsics;
    const int u = static_cast<int>(std::lround(k.fx * cam.x() / cam.z() + k.cx));
    const int v = static_cast<int>(std::lround(k.fy * cam.y() / cam.z() + k.cy));
    if (u < 0 || u >= k.width || v < 0 || v >= k.height) return std::nullopt;
    const double measured = frame.at(u, v);
    if (!(measured > 0.0)) return std::nullopt;
    if (std::abs(measured - cam.z()) > occ_tol) return std::nullopt;
    return std::make_pair(u, v);
}

InterestPoint observe_point(const Reconstruction& rec, const Point3& world_point, double occ_tol) {
    InterestPoint ip;
    ip.position = world_point;
    for (size_t f = 0; f < rec.frames.size(); ++f) {
        if (const auto px = visibility_check(rec.frames[f], world_point, occ_tol)) {
            ip.visible_frames.push_back({static_cast<int>(f), px->first, px->second});
        }
    }
    return ip;
}

namespace {

// Per-frame world clouds plus cumulative sizes for observation-uniform
// surface sampling.
struct RecGeometry {
    std::vector<PointCloud> world;
    std::vector<size_t> cum;  // cum[f] = points in frames [0, f]
    size_t total = 0;

    explicit RecGeometry(const Reconstruction& rec) {
        if (rec.frames.size() < 2) {
            throw std::runtime_error("reconstruction needs at least 2 frames");
        }
        world.reserve(rec.frames.size());
        for (const DepthFrame& frame : rec.frames) {
            world.push_back(transform_cloud(frame.pose, back_project(frame)));
            total += world.back().size();
            cum.push_back(total);
        }
        if (total == 0) throw std::runtime_error("reconstruction has no surface points");
    }

    Point3 draw_point(Rng& rng) const {
        const size_t g = rng.uniform_u64(total);
        size_t f = 0;
        while (cum[f] <= g) ++f;
        const size_t local = g - (f == 0 ? 0 : cum[f - 1]);
        return world[f].points[local];
    }
};

TdfPatch camera_axes_patch(const PointCloud& frame_world_cloud, const DepthFrame& frame,
                           const Point3& keypoint, const TdfConfig& cfg) {
    RigidTransform axes;
    axes.rotation = frame.pose.rotation;
    return extract_patch(frame_world_cloud, keypoint, cfg, axes);
}

[[noreturn]] void budget_error(size_t produced, size_t requested, size_t attempts) {
    throw std::runtime_error("attempt budget exhausted after " + std::to_string(attempts) +
                             " attempts: produced " + std::to_string(produced) + " of " +
                             std::to_string(requested) + " pairs");
}

}  // namespace

std::vector<CorrespondencePair> sample_matches(const Reconstruction& rec, size_t n,
                                               const TdfConfig& tdf_cfg, const SamplerConfig& cfg,
                                               uint64_t seed) {
    if (n == 0) throw std::runtime_error("pair count must be positive");
    const RecGeometry geo(rec);
    Rng rng(seed);
    std::vector<CorrespondencePair> out;
    out.reserve(n);
    const size_t max_attempts = static_cast<size_t>(cfg.attempt_budget_factor) * n;
    size_t attempts = 0;
    while (out.size() < n) {
        if (attempts >= max_attempts) budget_error(out.size(), n, attempts);
        ++attempts;
        const Point3 p = geo.draw_point(rng);
        const InterestPoint ip = observe_point(rec, p, cfg.occ_tol);
        // Frame pairs with a wide enough camera baseline.
        std::vector<std::pair<int, int>> candidates;
        for (size_t i = 0; i < ip.visible_frames.size(); ++i) {
            for (size_t j = i + 1; j < ip.visible_frames.size(); ++j) {
                const int fi = ip.visible_frames[i].frame;
                const int fj = ip.visible_frames[j].frame;
                const double baseline =
                    (rec.frames[fi].camera_center() - rec.frames[fj].camera_center()).norm();
                if (baseline >= cfg.min_camera_baseline) candidates.emplace_back(fi, fj);
            }
        }
        if (candidates.empty()) continue;
        const auto [fa, fb] = candidates[rng.uniform_u64(candidates.size())];
        CorrespondencePair pair;
        pair.is_match = true;
        pair.meta = {fa, fb, p, p};
        try {
            pair.patch_a = camera_axes_patch(geo.world[fa], rec.frames[fa], p, tdf_cfg);
            pair.patch_b = camera_axes_patch(geo.world[fb], rec.frames[fb], p, tdf_cfg);
        } catch (const std::runtime_error&) {
            continue;  // empty patch; count against the budget
        }
        out.push_back(std::move(pair));
    }
    return out;
}

std::vector<CorrespondencePair> sample_non_matches(const Reconstruction& rec, size_t n,
                                                   const TdfConfig& tdf_cfg,
                                                   const SamplerConfig& cfg, uint64_t seed) {
    if (n == 0) throw std::runtime_error("pair count must be positive");
    const RecGeometry geo(rec);
    Rng rng(seed);
    std::vector<CorrespondencePair> out;
    out.reserve(n);
    const size_t max_attempts = static_cast<size_t>(cfg.attempt_budget_factor) * n;
    size_t attempts = 0;
    while (out.size() < n) {
        if (attempts >= max_attempts) budget_error(out.size(), n, attempts);
        ++attempts;
        const Point3 p1 = geo.draw_point(rng);
        const Point3 p2 = geo.draw_point(rng);
        if (distance(p1, p2) < cfg.min_separation) continue;
        const InterestPoint ip1 = observe_point(rec, p1, cfg.occ_tol);
        const InterestPoint ip2 = observe_point(rec, p2, cfg.occ_tol);
        if (ip1.visible_frames.empty() || ip2.visible_frames.empty()) continue;
        const int fa = ip1.visible_frames[rng.uniform_u64(ip1.visible_frames.size())].frame;
        const int fb = ip2.visible_frames[rng.uniform_u64(ip2.visible_frames.size())].frame;
        CorrespondencePair pair;
        pair.is_match = false;
        pair.meta = {fa, fb, p1, p2};
        try {
            pair.patch_a = camera_axes_patch(geo.world[fa], rec.frames[fa], p1, tdf_cfg);
            pair.patch_b = camera_axes_patch(geo.world[fb], rec.frames[fb], p2, tdf_cfg);
        } catch (const std::runtime_error&) {
            continue;
        }
        out.push_back(std::move(pair));
    }
    return out;
}

DatasetManifest build_dataset(const std::vector<Reconstruction>& recs, size_t n_pairs,
                              const TdfConfig& tdf_cfg, const SamplerConfig& cfg, uint64_t seed,
                              const std::string& out_dir) {
    if (n_pairs % 2 != 0) throw std::runtime_error("pair count must be even");
    if (n_pairs == 0) throw std::runtime_error("pair count must be positive");
    if (recs.empty()) throw std::runtime_error("no reconstructions");
    fs::create_directories(out_dir);

    const size_t half = n_pairs / 2;
    std::vector<std::string> written;
    const auto cleanup = [&]() {
        for (const std::string& f : written) {
            std::error_code ec;
            fs::remove(f, ec);
        }
    };

    std::ostringstream manifest;
    try {
        // Independent seed streams per (reconstruction, label) shard.
        std::vector<std::vector<CorrespondencePair>> match_shards(recs.size());
        std::vector<std::vector<CorrespondencePair>> non_match_shards(recs.size());
        std::vector<size_t> match_need(recs.size(), 0), non_match_need(recs.size(), 0);
        for (size_t k = 0; k < half; ++k) {
            ++match_need[k % recs.size()];
            ++non_match_need[k % recs.size()];
        }
        for (size_t r = 0; r < recs.size(); ++r) {
            if (match_need[r] > 0) {
                match_shards[r] = sample_matches(recs[r], match_need[r], tdf_cfg, cfg,
                                                 derive_seed(seed, 2 * r));
            }
            if (non_match_need[r] > 0) {
                non_match_shards[r] = sample_non_matches(recs[r], non_match_need[r], tdf_cfg, cfg,
                                                         derive_seed(seed, 2 * r + 1));
            }
        }

        std::vector<size_t> match_next(recs.size(), 0), non_match_next(recs.size(), 0);
        char name_a[64], name_b[64];
        for (size_t k = 0; k < half; ++k) {
            const size_t r = k % recs.size();
            const CorrespondencePair& m = match_shards[r][match_next[r]++];
            const CorrespondencePair& nm = non_match_shards[r][non_match_next[r]++];
            std::snprintf(name_a, sizeof(name_a), "match-%06zu-a.tdf", k);
            std::snprintf(name_b, sizeof(name_b), "match-%06zu-b.tdf", k);
            write_tdf((fs::path(out_dir) / name_a).string(), m.patch_a);
            written.push_back((fs::path(out_dir) / name_a).string());
            write_tdf((fs::path(out_dir) / name_b).string(), m.patch_b);
            written.push_back((fs::path(out_dir) / name_b).string());
            manifest << name_a << " " << name_b << " 1\n";
            std::snprintf(name_a, sizeof(name_a), "nonmatch-%06zu-a.tdf", k);
            std::snprintf(name_b, sizeof(name_b), "nonmatch-%06zu-b.tdf", k);
            write_tdf((fs::path(out_dir) / name_a).string(), nm.patch_a);
            written.push_back((fs::path(out_dir) / name_a).string());
            write_tdf((fs::path(out_dir) / name_b).string(), nm.patch_b);
            written.push_back((fs::path(out_dir) / name_b).string());
            manifest << name_a << " " << name_b << " 0\n";
        }
    } catch (...) {
        cleanup();
        throw;
    }

    DatasetManifest result;
    result.path = (fs::path(out_dir) / "manifest.txt").string();
    result.match_count = half;
    result.non_match_count = half;
    std::ofstream out(result.path);
    if (!out) {
        cleanup();
        throw std::runtime_error(result.path + ": cannot open for writing");
    }
    out << manifest.str();
    if (!out.flush()) {
        cleanup();
        throw std::runtime_error(result.path + ": write failed");
    }
    return result;
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open");
    const fs::path base = fs::path(path).parent_path();
    std::vector<ManifestEntry> entries;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b;
        int label;
        if (!(ls >> a >> b >> label) || (label != 0 && label != 1)) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed line");
        }
        ManifestEntry e;
        e.patch_a = fs::path(a).is_absolute() ? a : (base / a).string();
        e.patch_b = fs::path(b).is_absolute() ? b : (base / b).string();
        e.is_match = label == 1;
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw std::runtime_error(path + ": empty manifest");
    return entries;
}

}  // namespace tdfmatch
