#include "tdfmatch/registration.hpp"

#include "tdfmatch/rng.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tdfmatch {

std::vector<Point3> sample_keypoints(const PointCloud& cloud, size_t n, uint64_t seed) {
    if (cloud.empty()) throw std::runtime_error("empty cloud");
    Rng rng(seed);
    std::vector<Point3> out;
    out.reserve(n);
    if (n > cloud.size()) {
        for (size_t i = 0; i < n; ++i) {
            out.push_back(cloud.points[rng.uniform_u64(cloud.size())]);
        }
        return out;
    }
    // Partial Fisher-Yates: the first n slots are a uniform draw without
    // replacement.
    std::vector<uint32_t> ids(cloud.size());
    std::iota(ids.begin(), ids.end(), 0u);
    for (size_t i = 0; i < n; ++i) {
        const size_t j = i + rng.uniform_u64(cloud.size() - i);
        std::swap(ids[i], ids[j]);
        out.push_back(cloud.points[ids[i]]);
    }
    return out;
}

namespace {

double descriptor_sq_dist(const Descriptor& a, const Descriptor& b) {
    double sq = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sq += d * d;
    }
    return sq;
}

}  // namespace

MatchSet mutual_nearest(const DescriptorSet& a, const DescriptorSet& b) {
    if (a.size() == 0 || b.size() == 0) throw std::runtime_error("empty descriptor set");
    if (a.descriptors[0].size() != b.descriptors[0].size()) {
        throw std::runtime_error("descriptor dimension mismatch");
    }
    const size_t na = a.size(), nb = b.size();
    std::vector<size_t> best_b(na, 0);
    std::vector<double> best_b_sq(na, std::numeric_limits<double>::infinity());
    std::vector<size_t> best_a(nb, 0);
    std::vector<double> best_a_sq(nb, std::numeric_limits<double>::infinity());
    for (size_t i = 0; i < na; ++i) {
        for (size_t j = 0; j < nb; ++j) {
            const double sq = descriptor_sq_dist(a.descriptors[i], b.descriptors[j]);
            if (sq < best_b_sq[i]) {
                best_b_sq[i] = sq;
                best_b[i] = j;
            }
            if (sq < best_a_sq[j]) {
                best_a_sq[j] = sq;
                best_a[j] = i;
            }
        }
    }
    MatchSet out;
    for (size_t i = 0; i < na; ++i) {
        const size_t j = best_b[i];
        if (best_a[j] == i) {
            out.pairs.push_back({i, j, std::sqrt(best_b_sq[i])});
        }
    }
    return out;
}

RigidTransform fit_rigid(const std::vector<Point3>& src, const std::vector<Point3>& dst) {
    if (src.size() != dst.size()) throw std::runtime_error("point count mismatch");
    if (src.size() < 3) throw std::runtime_error("need at least 3 points");
    const double n = static_cast<double>(src.size());
    Eigen::Vector3d cs = Eigen::Vector3d::Zero(), cd = Eigen::Vector3d::Zero();
    for (size_t i = 0; i < src.size(); ++i) {
        cs += src[i].vec();
        cd += dst[i].vec();
    }
    cs /= n;
    cd /= n;
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (size_t i = 0; i < src.size(); ++i) {
        h += (src[i].vec() - cs) * (dst[i].vec() - cd).transpose();
    }
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    // Rank < 2 means collinear or coincident sources: rotation about the line
    // is unconstrained.
    if (!(sv(1) > sv(0) * 1e-9)) throw std::runtime_error("degenerate sample");
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
    RigidTransform t;
    t.rotation = svd.matrixV() * d * svd.matrixU().transpose();
    t.translation = cd - t.rotation * cs;
    return t;
}

RegistrationResult ransac_align(const DescriptorSet& a, const DescriptorSet& b,
                                const MatchSet& matches, const RansacConfig& cfg) {
    const size_t m = matches.pairs.size();
    if (m < static_cast<size_t>(cfg.sample_size)) throw std::runtime_error("insufficient matches");
    if (cfg.iterations < 1 || !(cfg.inlier_threshold > 0.0)) {
        throw std::runtime_error("invalid ransac config");
    }
    const double thr_sq = cfg.inlier_threshold * cfg.inlier_threshold;

    Rng rng(cfg.seed);
    std::vector<size_t> sample(cfg.sample_size);
    std::vector<Point3> src(cfg.sample_size), dst(cfg.sample_size);

    bool have_best = false;
    RigidTransform best_t;
    size_t best_inliers = 0;
    double best_rmse = std::numeric_limits<double>::infinity();

    const auto score = [&](const RigidTransform& t, size_t& inliers, double& rmse) {
        inliers = 0;
        double sq_sum = 0.0;
        for (const Match& match : matches.pairs) {
            const Point3 p = t.apply(a.keypoints[match.a]);
            const double sq = squared_distance(p, b.keypoints[match.b]);
            if (sq <= thr_sq) {
                ++inliers;
                sq_sum += sq;
            }
        }
        rmse = inliers > 0 ? std::sqrt(sq_sum / static_cast<double>(inliers))
                           : std::numeric_limits<double>::infinity();
    };

    for (int it = 0; it < cfg.iterations; ++it) {
        // Distinct match indices, drawn by rejection so the stream is stable.
        for (int k = 0; k < cfg.sample_size; ++k) {
            size_t idx;
            bool fresh;
            do {
                idx = rng.uniform_u64(m);
                fresh = true;
                for (int q = 0; q < k; ++q) fresh &= (sample[q] != idx);
            } while (!fresh);
            sample[k] = idx;
        }
        for (int k = 0; k < cfg.sample_size; ++k) {
            src[k] = a.keypoints[matches.pairs[sample[k]].a];
            dst[k] = b.keypoints[matches.pairs[sample[k]].b];
        }
        RigidTransform hyp;
        try {
            hyp = fit_rigid(src, dst);
        } catch (const std::runtime_error&) {
            continue;  // degenerate sample, no hypothesis this iteration
        }
        size_t inliers;
        double rmse;
        score(hyp, inliers, rmse);
        if (inliers > best_inliers || (inliers == best_inliers && rmse < best_rmse)) {
            best_t = hyp;
            best_inliers = inliers;
            best_rmse = rmse;
            have_best = true;
        }
    }

    RegistrationResult result;
    if (!have_best || best_inliers < 3) {
        result.converged = false;
        return result;
    }

    // Refit on the best hypothesis's inliers, then recount under the refit so
    // the reported set and rmse belong to the returned transform.
    std::vector<Point3> in_src, in_dst;
    for (const Match& match : matches.pairs) {
        const Point3 p = best_t.apply(a.keypoints[match.a]);
        if (squared_distance(p, b.keypoints[match.b]) <= thr_sq) {
            in_src.push_back(a.keypoints[match.a]);
            in_dst.push_back(b.keypoints[match.b]);
        }
    }
    RigidTransform refit = best_t;
    try {
        refit = fit_rigid(in_src, in_dst);
    } catch (const std::runtime_error&) {
        // Keep the hypothesis transform when the inliers are degenerate.
    }

    double sq_sum = 0.0;
    for (size_t i = 0; i < matches.pairs.size(); ++i) {
        const Match& match = matches.pairs[i];
        const Point3 p = refit.apply(a.keypoints[match.a]);
        const double sq = squared_distance(p, b.keypoints[match.b]);
        if (sq <= thr_sq) {
            result.inlier_indices.push_back(i);
            sq_sum += sq;
        }
    }
    result.transform = refit;
    result.inlier_rmse =
        result.inlier_indices.empty()
            ? std::numeric_limits<double>::infinity()
            : std::sqrt(sq_sum / static_cast<double>(result.inlier_indices.size()));
    result.converged = result.inlier_indices.size() >= static_cast<size_t>(cfg.min_inliers);
    return result;
}

std::vector<double> surface_correspondence_heat(const TdfPatch& query, const PointCloud& target,
                                                const TdfConfig& cfg, const NetworkSpec& spec,
                                                const Parameters& params, size_t stride) {
    if (target.empty()) throw std::runtime_error("empty cloud");
    if (stride == 0) stride = 1;
    const Descriptor qd = forward(spec, params, patch_to_tensor(query));
    std::vector<double> heat;
    heat.reserve(target.size() / stride + 1);
    for (size_t i = 0; i < target.size(); i += stride) {
        TdfPatch patch;
        try {
            patch = extract_patch(target, target.points[i], cfg, RigidTransform::identity());
        } catch (const std::runtime_error&) {
            heat.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        const Descriptor d = forward(spec, params, patch_to_tensor(patch));
        heat.push_back(std::sqrt(descriptor_sq_dist(qd, d)));
    }
    return heat;
}

}  // namespace tdfmatch
