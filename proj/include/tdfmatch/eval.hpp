#pragma once

#include "tdfmatch/geometry.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tdfmatch {

struct ScoredPair {
    double distance = 0.0;  // descriptor Euclidean distance
    bool is_match = false;
};

struct FragmentPair {
    PointCloud cloud_a, cloud_b;
    RigidTransform gt_transform;  // maps cloud_a's frame into cloud_b's frame
    std::vector<std::pair<Point3, Point3>> gt_correspondences;
    bool overlap_gt = false;
};

struct EvalConfig {
    double tau = 0.2;              // RMSE threshold, meters
    double overlap_fraction = 0.30;
    double overlap_distance = 0.03;  // meters
};

// False-positive rate at the smallest distance threshold whose recall reaches
// recall_target; ties at the threshold count as accepted. Throws when either
// class is missing.
double fpr_at_recall(const std::vector<ScoredPair>& pairs, double recall_target = 0.95);

// RMSE of ||T*p - q|| over the correspondences; passes iff rmse < tau
// (strict, per the tau^2 bound on the mean squared error).
struct TransformEval {
    double rmse = 0.0;
    bool pass = false;
};
TransformEval eval_transform(const RigidTransform& t_pred,
                             const std::vector<std::pair<Point3, Point3>>& gt_corr, double tau);

// Fraction of points of T*cloud_a whose nearest neighbor in cloud_b lies
// within overlap_distance.
double overlap_fraction_of(const RigidTransform& t_pred, const PointCloud& cloud_a,
                           const PointCloud& cloud_b, double overlap_distance);

struct PrResult {
    double recall = 0.0;
    double precision = 0.0;
    size_t true_positives = 0;
    size_t predictions = 0;
    size_t gt_positives = 0;
    bool precision_degenerate = false;  // no predictions were made
};

// A prediction is a true positive iff its overlap fraction reaches
// cfg.overlap_fraction and eval_transform passes at cfg.tau. Absent entries
// in `predictions` are explicit no-predictions.
PrResult registration_pr(const std::vector<FragmentPair>& pairs,
                         const std::vector<std::optional<RigidTransform>>& predictions,
                         const EvalConfig& cfg);

}  // namespace tdfmatch
