#include "tdfmatch/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tdfmatch {

double fpr_at_recall(const std::vector<ScoredPair>& pairs, double recall_target) {
    if (!(recall_target > 0.0 && recall_target <= 1.0)) {
        throw std::runtime_error("recall target must be in (0, 1]");
    }
    std::vector<double> match_d, non_match_d;
    for (const ScoredPair& p : pairs) {
        if (!(p.distance >= 0.0)) throw std::runtime_error("negative distance");
        (p.is_match ? match_d : non_match_d).push_back(p.distance);
    }
    if (match_d.empty() || non_match_d.empty()) {
        throw std::runtime_error("need at least one match and one non-match");
    }
    std::sort(match_d.begin(), match_d.end());
    // Smallest threshold with recall >= target: the k-th smallest match
    // distance where k is the least count whose recall fraction reaches the
    // target. k is found by direct comparison, not ceil(target*n), so that
    // e.g. 0.95*20 does not round past 19.
    const size_t m = match_d.size();
    size_t k = static_cast<size_t>(recall_target * static_cast<double>(m));
    if (k > m) k = m;
    while (k > 0 && static_cast<double>(k) / static_cast<double>(m) >= recall_target) --k;
    while (k < m && static_cast<double>(k) / static_cast<double>(m) < recall_target) ++k;
    const double theta = match_d[std::max<size_t>(k, 1) - 1];
    size_t fp = 0;
    for (double d : non_match_d) {
        if (d <= theta) ++fp;
    }
    return static_cast<double>(fp) / static_cast<double>(non_match_d.size());
}

TransformEval eval_transform(const RigidTransform& t_pred,
                             const std::vector<std::pair<Point3, Point3>>& gt_corr, double tau) {
    if (gt_corr.empty()) throw std::runtime_error("empty correspondence set");
    double sq_sum = 0.0;
    for (const auto& [p, q] : gt_corr) {
        sq_sum += squared_distance(t_pred.apply(p), q);
    }
    TransformEval out;
    out.rmse = std::sqrt(sq_sum / static_cast<double>(gt_corr.size()));
    out.pass = out.rmse < tau;
    return out;
}

double overlap_fraction_of(const RigidTransform& t_pred, const PointCloud& cloud_a,
                           const PointCloud& cloud_b, double overlap_distance) {
    if (cloud_a.empty() || cloud_b.empty()) throw std::runtime_error("empty cloud");
    if (!(overlap_distance > 0.0)) throw std::runtime_error("overlap_distance must be positive");
    const KdTree tree(cloud_b);
    const double max_sq = overlap_distance * overlap_distance;
    size_t hits = 0;
    for (const Point3& p : cloud_a.points) {
        const Point3 q = t_pred.apply(p);
        // Cap strictly above max_sq so a neighbor at exactly the boundary
        // is still found; membership itself is <=.
        const auto [idx, sq] = tree.nearest_within(q, 4.0 * max_sq);
        if (idx != KdTree::npos && sq <= max_sq) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(cloud_a.size());
}

PrResult registration_pr(const std::vector<FragmentPair>& pairs,
                         const std::vector<std::optional<RigidTransform>>& predictions,
                         const EvalConfig& cfg) {
    if (pairs.size() != predictions.size()) {
        throw std::runtime_error("one prediction entry required per fragment pair");
    }
    PrResult out;
    for (size_t i = 0; i < pairs.size(); ++i) {
        const FragmentPair& fp = pairs[i];
        if (fp.overlap_gt) ++out.gt_positives;
        if (!predictions[i].has_value()) continue;
        ++out.predictions;
        const RigidTransform& t = *predictions[i];
        const double overlap = overlap_fraction_of(t, fp.cloud_a, fp.cloud_b, cfg.overlap_distance);
        if (overlap < cfg.overlap_fraction) continue;
        if (eval_transform(t, fp.gt_correspondences, cfg.tau).pass) ++out.true_positives;
    }
    out.recall = out.gt_positives > 0
                     ? static_cast<double>(out.true_positives) / static_cast<double>(out.gt_positives)
                     : 0.0;
    if (out.predictions == 0) {
        out.precision = 0.0;
        out.precision_degenerate = true;
    } else {
        out.precision =
            static_cast<double>(out.true_positives) / static_cast<double>(out.predictions);
    }
    return out;
}

}  // namespace tdfmatch
