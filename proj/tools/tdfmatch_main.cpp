// Command-line frontend: voxelization, correspondence mining, benchmark
// generation, training, description, matching, registration and evaluation.

#include "CLI11.hpp"

#include "tdfmatch/benchmark.hpp"
#include "tdfmatch/config.hpp"
#include "tdfmatch/eval.hpp"
#include "tdfmatch/io.hpp"
#include "tdfmatch/net.hpp"
#include "tdfmatch/registration.hpp"
#include "tdfmatch/rng.hpp"
#include "tdfmatch/sampler.hpp"
#include "tdfmatch/tdf.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace tdfmatch;

namespace {

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

Config load_config(const std::string& path) {
    if (path.empty()) return Config{};
    Config cfg = Config::load(path);
    cfg.require_known({"grid_dim", "voxel_size", "trunc_margin", "occ_tol",
                       "min_camera_baseline", "min_separation", "attempt_budget_factor",
                       "learning_rate", "momentum", "weight_decay", "batch_size",
                       "contrastive_margin", "final_relu", "ransac_iterations",
                       "inlier_threshold", "min_inliers", "keypoints", "tau",
                       "overlap_fraction", "overlap_distance", "noise_sigma", "stride",
                       "recall_target", "max_iterations"});
    return cfg;
}

TdfConfig tdf_from_config(const Config& cfg) {
    TdfConfig t;
    t.grid_dim = cfg.get_int("grid_dim", t.grid_dim);
    t.voxel_size = cfg.get_double("voxel_size", t.voxel_size);
    t.trunc_margin = cfg.get_double("trunc_margin", t.trunc_margin);
    t.validate();
    return t;
}

SamplerConfig sampler_from_config(const Config& cfg) {
    SamplerConfig s;
    s.occ_tol = cfg.get_double("occ_tol", s.occ_tol);
    s.min_camera_baseline = cfg.get_double("min_camera_baseline", s.min_camera_baseline);
    s.min_separation = cfg.get_double("min_separation", s.min_separation);
    s.attempt_budget_factor = cfg.get_int("attempt_budget_factor", s.attempt_budget_factor);
    return s;
}

RansacConfig ransac_from_config(const Config& cfg, uint64_t seed) {
    RansacConfig r;
    r.iterations = cfg.get_int("ransac_iterations", r.iterations);
    r.inlier_threshold = cfg.get_double("inlier_threshold", r.inlier_threshold);
    r.min_inliers = cfg.get_int("min_inliers", r.min_inliers);
    r.seed = seed;
    return r;
}

NetworkSpec arch_from_name(const std::string& name, bool final_relu) {
    if (name == "reduced") return NetworkSpec::reduced(final_relu);
    if (name == "standard") return NetworkSpec::standard(final_relu);
    std::ifstream in(name);
    if (!in) throw std::runtime_error("unknown architecture " + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return NetworkSpec::parse(ss.str());
}

// Keypoints + descriptors for a cloud; keypoints whose patch is empty are
// dropped.
DescriptorSet describe_cloud(const PointCloud& cloud, size_t n_keypoints, uint64_t seed,
                             const TdfConfig& tdf, const NetworkSpec& spec,
                             const Parameters& params) {
    DescriptorSet set;
    const std::vector<Point3> drawn = sample_keypoints(cloud, n_keypoints, seed);
    std::vector<TdfPatch> patches;
    for (const Point3& kp : drawn) {
        try {
            patches.push_back(extract_patch(cloud, kp, tdf, RigidTransform::identity()));
            set.keypoints.push_back(kp);
        } catch (const std::runtime_error&) {
        }
    }
    set.descriptors = describe_batch(spec, params, patches);
    return set;
}

void write_matches_file(const std::string& path, const MatchSet& matches) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    for (const Match& m : matches.pairs) {
        out << m.a << " " << m.b << " " << fmt6(m.distance) << "\n";
    }
}

void write_result_file(const std::string& path, const RegistrationResult& r) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    char buf[512];
    for (int row = 0; row < 3; ++row) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g\n", r.transform.rotation(row, 0),
                      r.transform.rotation(row, 1), r.transform.rotation(row, 2),
                      r.transform.translation(row));
        out << buf;
    }
    out << "0 0 0 1\n";
    out << "inliers " << r.inlier_indices.size() << " rmse " << fmt6(r.inlier_rmse)
        << " converged " << (r.converged ? 1 : 0) << "\n";
}

// Result file: 4x4 pose rows then `inliers <k> rmse <r> converged <0|1>`.
// Missing file or converged=0 is an explicit no-prediction.
std::optional<RigidTransform> read_result_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::vector<double> m(16);
    for (double& v : m) {
        if (!(in >> v)) throw std::runtime_error(path + ": malformed result file");
    }
    std::string kw, rmse;
    size_t inliers = 0;
    int converged = 0;
    if (!(in >> kw >> inliers) || kw != "inliers") {
        throw std::runtime_error(path + ": malformed result file");
    }
    if (!(in >> kw >> rmse) || kw != "rmse") {
        throw std::runtime_error(path + ": malformed result file");
    }
    if (!(in >> kw >> converged) || kw != "converged") {
        throw std::runtime_error(path + ": malformed result file");
    }
    if (converged != 1) return std::nullopt;
    RigidTransform t;
    t.rotation << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
    t.translation << m[3], m[7], m[11];
    validate_transform(t);
    return t;
}

std::vector<TdfPatch> load_manifest_patches(const std::vector<ManifestEntry>& entries,
                                            std::vector<bool>& labels) {
    std::vector<TdfPatch> patches;
    patches.reserve(entries.size() * 2);
    labels.clear();
    for (const ManifestEntry& e : entries) {
        patches.push_back(read_tdf(e.patch_a));
        patches.push_back(read_tdf(e.patch_b));
        labels.push_back(e.is_match);
    }
    return patches;
}

int cmd_voxelize(const std::string& cloud_path, const std::string& depth_path,
                 const std::string& intr_path, const std::string& pose_path, bool invert_poses,
                 const std::vector<double>& point, const std::string& axes_path,
                 const std::string& out, const Config& cfg) {
    const TdfConfig tdf = tdf_from_config(cfg);
    const Point3 kp{point[0], point[1], point[2]};
    TdfPatch patch;
    if (!cloud_path.empty()) {
        const PointCloud cloud = read_ply(cloud_path);
        RigidTransform axes;
        if (!axes_path.empty()) axes = read_pose(axes_path, invert_poses);
        patch = extract_patch(cloud, kp, tdf, axes);
    } else {
        const DepthImage img = read_depth_pgm(depth_path);
        const IntrinsicsMatrix km = read_intrinsics(intr_path);
        const CameraIntrinsics k(km.fx, km.fy, km.cx, km.cy, img.width, img.height);
        const DepthFrame frame(img.depth_m, k, read_pose(pose_path, invert_poses));
        patch = extract_patch(frame, kp, tdf);
    }
    write_tdf(out, patch);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int cmd_sample_corr(const std::vector<std::string>& scene_dirs, size_t pairs,
                    const std::string& out_dir, uint64_t seed, bool invert_poses,
                    const Config& cfg) {
    std::vector<Reconstruction> recs;
    for (const std::string& dir : scene_dirs) {
        Reconstruction rec;
        rec.name = fs::path(dir).filename().string();
        rec.frames = load_scene_dir(dir, invert_poses);
        recs.push_back(std::move(rec));
    }
    const DatasetManifest m =
        build_dataset(recs, pairs, tdf_from_config(cfg), sampler_from_config(cfg), seed, out_dir);
    std::cout << "manifest " << m.path << " matches " << m.match_count << " non_matches "
              << m.non_match_count << "\n";
    return 0;
}

int cmd_gen_bench(const std::string& out_dir, uint64_t seed, size_t pairs, size_t scenes,
                  const Config& cfg) {
    BenchmarkOptions opts;
    opts.patch_pairs_per_split = pairs;
    opts.num_scenes = scenes;
    opts.noise_sigma = cfg.get_double("noise_sigma", opts.noise_sigma);
    opts.tdf = tdf_from_config(cfg);
    const BenchmarkPaths paths = generate_synthetic_benchmark(seed, out_dir, opts);
    std::cout << "train_manifest " << paths.train_manifest << "\n";
    std::cout << "test_manifest " << paths.test_manifest << "\n";
    std::cout << "fragments " << paths.fragments_meta << "\n";
    return 0;
}

int cmd_train(const std::string& manifest_path, const std::string& out_path,
              const std::string& arch, int steps, uint64_t seed, const std::string& log_path,
              const Config& cfg) {
    TrainConfig tc;
    tc.learning_rate = cfg.get_double("learning_rate", tc.learning_rate);
    tc.momentum = cfg.get_double("momentum", tc.momentum);
    tc.weight_decay = cfg.get_double("weight_decay", tc.weight_decay);
    tc.batch_size = cfg.get_int("batch_size", tc.batch_size);
    tc.contrastive_margin = cfg.get_double("contrastive_margin", tc.contrastive_margin);
    tc.seed = seed;
    tc.max_iterations = steps > 0 ? steps : cfg.get_int("max_iterations", 500);
    const bool final_relu = cfg.get_int("final_relu", 1) != 0;

    const NetworkSpec spec = arch_from_name(arch, final_relu);
    const auto entries = read_manifest(manifest_path);
    std::vector<bool> labels;
    const std::vector<TdfPatch> patches = load_manifest_patches(entries, labels);
    std::vector<size_t> match_pool, non_match_pool;
    for (size_t i = 0; i < labels.size(); ++i) {
        (labels[i] ? match_pool : non_match_pool).push_back(i);
    }
    if (match_pool.empty() || non_match_pool.empty()) {
        throw std::runtime_error("manifest must hold both matches and non-matches");
    }

    std::ofstream log;
    if (!log_path.empty()) {
        log.open(log_path);
        if (!log) throw std::runtime_error(log_path + ": cannot open for writing");
    }

    Parameters params = init_xavier(spec, seed);
    Rng rng(derive_seed(seed, 42));
    const int half = std::max(1, tc.batch_size / 2);
    std::vector<TrainingPair> batch;
    for (int it = 1; it <= tc.max_iterations; ++it) {
        batch.clear();
        for (int k = 0; k < half; ++k) {
            const size_t pi = match_pool[rng.uniform_u64(match_pool.size())];
            batch.push_back({&patches[2 * pi], &patches[2 * pi + 1], true});
        }
        for (int k = 0; k < half; ++k) {
            const size_t pi = non_match_pool[rng.uniform_u64(non_match_pool.size())];
            batch.push_back({&patches[2 * pi], &patches[2 * pi + 1], false});
        }
        const auto t0 = std::chrono::steady_clock::now();
        const double loss = train_step(spec, params, batch, tc);
        const auto t1 = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
        const std::string line =
            "iter " + std::to_string(it) + " loss " + fmt6(loss) + " time_ms " + fmt6(ms);
        std::cout << line << "\n";
        if (log.is_open()) log << line << "\n";
    }
    save_checkpoint(out_path, spec, params);
    std::cout << "checkpoint " << out_path << "\n";
    return 0;
}

int cmd_describe(const std::string& net_path, const std::vector<std::string>& patch_paths,
                 const std::string& out_path) {
    const auto [spec, params] = load_checkpoint(net_path);
    std::vector<TdfPatch> patches;
    for (const std::string& p : patch_paths) patches.push_back(read_tdf(p));
    const auto descs = describe_batch(spec, params, patches);
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error(out_path + ": cannot open for writing");
    char buf[64];
    for (const Descriptor& d : descs) {
        for (size_t i = 0; i < d.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", d[i]);
            out << (i ? " " : "") << buf;
        }
        out << "\n";
    }
    std::cout << "wrote " << descs.size() << " descriptors to " << out_path << "\n";
    return 0;
}

int cmd_match(const std::string& net_path, const std::string& cloud_a_path,
              const std::string& cloud_b_path, const std::string& out_path, size_t keypoints,
              uint64_t seed, const std::string& kp_a_out, const std::string& kp_b_out,
              const Config& cfg) {
    const auto [spec, params] = load_checkpoint(net_path);
    const TdfConfig tdf = tdf_from_config(cfg);
    const PointCloud a = read_ply(cloud_a_path);
    const PointCloud b = read_ply(cloud_b_path);
    const DescriptorSet da = describe_cloud(a, keypoints, derive_seed(seed, 0), tdf, spec, params);
    const DescriptorSet db = describe_cloud(b, keypoints, derive_seed(seed, 1), tdf, spec, params);
    const MatchSet matches = mutual_nearest(da, db);
    write_matches_file(out_path, matches);
    if (!kp_a_out.empty()) write_ply(kp_a_out, PointCloud{da.keypoints});
    if (!kp_b_out.empty()) write_ply(kp_b_out, PointCloud{db.keypoints});
    std::cout << "matches " << matches.pairs.size() << "\n";
    return 0;
}

int cmd_register(const std::string& net_path, const std::string& cloud_a_path,
                 const std::string& cloud_b_path, const std::string& out_path, size_t keypoints,
                 uint64_t seed, const std::string& matches_out, const Config& cfg) {
    const auto [spec, params] = load_checkpoint(net_path);
    const TdfConfig tdf = tdf_from_config(cfg);
    const PointCloud a = read_ply(cloud_a_path);
    const PointCloud b = read_ply(cloud_b_path);
    const DescriptorSet da = describe_cloud(a, keypoints, derive_seed(seed, 0), tdf, spec, params);
    const DescriptorSet db = describe_cloud(b, keypoints, derive_seed(seed, 1), tdf, spec, params);
    const MatchSet matches = mutual_nearest(da, db);
    if (!matches_out.empty()) write_matches_file(matches_out, matches);
    const RegistrationResult result =
        ransac_align(da, db, matches, ransac_from_config(cfg, derive_seed(seed, 2)));
    write_result_file(out_path, result);
    std::cout << "inliers " << result.inlier_indices.size() << " rmse "
              << fmt6(result.inlier_rmse) << " converged " << (result.converged ? 1 : 0) << "\n";
    return 0;
}

int cmd_eval_keypoints(const std::string& net_path, const std::string& manifest_path,
                       const std::string& scores_path, double recall) {
    std::vector<ScoredPair> scored;
    if (!scores_path.empty()) {
        std::ifstream in(scores_path);
        if (!in) throw std::runtime_error(scores_path + ": cannot open");
        double d;
        int label;
        while (in >> d >> label) scored.push_back({d, label == 1});
    } else {
        const auto [spec, params] = load_checkpoint(net_path);
        const auto entries = read_manifest(manifest_path);
        std::vector<bool> labels;
        const std::vector<TdfPatch> patches = load_manifest_patches(entries, labels);
        const auto descs = describe_batch(spec, params, patches);
        for (size_t i = 0; i < labels.size(); ++i) {
            double sq = 0.0;
            for (size_t k = 0; k < descs[2 * i].size(); ++k) {
                const double diff = descs[2 * i][k] - descs[2 * i + 1][k];
                sq += diff * diff;
            }
            scored.push_back({std::sqrt(sq), labels[i]});
        }
    }
    const double err = fpr_at_recall(scored, recall);
    std::cout << "error_at_" << static_cast<int>(std::lround(recall * 100)) << "_recall "
              << fmt6(err) << "\n";
    return 0;
}

int cmd_eval_registration(const std::string& bench_path, const std::string& results_dir,
                          const Config& cfg) {
    EvalConfig ec;
    ec.tau = cfg.get_double("tau", ec.tau);
    ec.overlap_fraction = cfg.get_double("overlap_fraction", ec.overlap_fraction);
    ec.overlap_distance = cfg.get_double("overlap_distance", ec.overlap_distance);

    const auto records = read_fragment_benchmark(bench_path);
    std::vector<FragmentPair> pairs;
    std::vector<std::optional<RigidTransform>> predictions;
    for (size_t i = 0; i < records.size(); ++i) {
        pairs.push_back(load_fragment_pair(records[i]));
        char name[64];
        std::snprintf(name, sizeof(name), "pair-%03zu.result.txt", i);
        predictions.push_back(read_result_file((fs::path(results_dir) / name).string()));
    }
    const PrResult r = registration_pr(pairs, predictions, ec);
    std::cout << "recall " << fmt6(r.recall) << " precision " << fmt6(r.precision) << " tp "
              << r.true_positives << " predictions " << r.predictions << " gt_positives "
              << r.gt_positives << "\n";
    if (r.precision_degenerate) std::cout << "precision_degenerate 1\n";
    return 0;
}

int cmd_surf_corr(const std::string& net_path, const std::string& target_path,
                  const std::string& query_tdf, const std::string& query_cloud_path,
                  const std::vector<double>& query_point, const std::string& out_path,
                  size_t stride, const Config& cfg) {
    const auto [spec, params] = load_checkpoint(net_path);
    const TdfConfig tdf = tdf_from_config(cfg);
    TdfPatch query;
    if (!query_tdf.empty()) {
        query = read_tdf(query_tdf);
    } else {
        const PointCloud qc = read_ply(query_cloud_path);
        query = extract_patch(qc, {query_point[0], query_point[1], query_point[2]}, tdf,
                              RigidTransform::identity());
    }
    const PointCloud target = read_ply(target_path);
    const auto heat = surface_correspondence_heat(query, target, tdf, spec, params, stride);
    PointCloud evaluated;
    for (size_t i = 0; i < target.size(); i += stride) {
        evaluated.points.push_back(target.points[i]);
    }
    write_heat_ply(out_path, evaluated, heat);
    std::cout << "wrote " << heat.size() << " heat values to " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tdfmatch: volumetric local descriptors and rigid registration"};
    app.require_subcommand(1);

    std::string config_path;
    uint64_t seed = 0;
    app.add_option("--config", config_path, "key=value configuration file")->expected(1);
    app.add_option("--seed", seed, "random seed");

    auto* vox = app.add_subcommand("voxelize", "convert a local region to a TDF patch");
    std::string vox_cloud, vox_depth, vox_intr, vox_pose, vox_axes, vox_out;
    std::vector<double> vox_point;
    bool invert_poses = false;
    vox->add_option("--cloud", vox_cloud, "input ASCII PLY cloud");
    vox->add_option("--depth", vox_depth, "input 16-bit PGM depth image");
    vox->add_option("--intrinsics", vox_intr, "3x3 intrinsics text file");
    vox->add_option("--pose", vox_pose, "4x4 camera-to-world pose text file");
    vox->add_option("--axes", vox_axes, "pose file supplying grid axes for cloud input");
    vox->add_flag("--invert-poses", invert_poses, "pose files are world-to-camera");
    vox->add_option("--point", vox_point, "keypoint x y z (meters)")->expected(3)->required();
    vox->add_option("--out", vox_out, "output .tdf file")->required();

    auto* corr = app.add_subcommand("sample-corr", "mine correspondence pairs from posed scenes");
    std::vector<std::string> corr_scenes;
    std::string corr_out;
    size_t corr_pairs = 0;
    corr->add_option("--scene", corr_scenes, "scene directory (repeatable)")->required();
    corr->add_option("--pairs", corr_pairs, "total pair count (even)")->required();
    corr->add_option("--out", corr_out, "output dataset directory")->required();
    corr->add_flag("--invert-poses", invert_poses, "pose files are world-to-camera");

    auto* bench = app.add_subcommand("gen-bench", "generate the synthetic benchmark");
    std::string bench_out;
    size_t bench_pairs = 600, bench_scenes = 10;
    bench->add_option("--out", bench_out, "output directory")->required();
    bench->add_option("--pairs", bench_pairs, "patch pairs per split");
    bench->add_option("--scenes", bench_scenes, "fragment scene count");

    auto* train = app.add_subcommand("train", "train a descriptor network");
    std::string train_manifest, train_out, train_arch = "reduced", train_log;
    int train_steps = 0;
    train->add_option("--manifest", train_manifest, "training pair manifest")->required();
    train->add_option("--out", train_out, "output checkpoint")->required();
    train->add_option("--arch", train_arch, "reduced | standard | spec file");
    train->add_option("--steps", train_steps, "training iterations");
    train->add_option("--log", train_log, "training log file");

    auto* desc = app.add_subcommand("describe", "compute descriptors for TDF patches");
    std::string desc_net, desc_out;
    std::vector<std::string> desc_patches;
    desc->add_option("--net", desc_net, "checkpoint file")->required();
    desc->add_option("--out", desc_out, "output text file")->required();
    desc->add_option("patches", desc_patches, "input .tdf files")->required();

    auto* match = app.add_subcommand("match", "mutual nearest-neighbor descriptor matching");
    std::string match_net, match_a, match_b, match_out, match_kp_a, match_kp_b;
    size_t match_keypoints = 5000;
    match->add_option("--net", match_net, "checkpoint file")->required();
    match->add_option("--cloud-a", match_a, "first cloud (PLY)")->required();
    match->add_option("--cloud-b", match_b, "second cloud (PLY)")->required();
    match->add_option("--out", match_out, "match file")->required();
    match->add_option("--keypoints", match_keypoints, "keypoints per cloud");
    match->add_option("--out-keypoints-a", match_kp_a, "write sampled keypoints (PLY)");
    match->add_option("--out-keypoints-b", match_kp_b, "write sampled keypoints (PLY)");

    auto* reg = app.add_subcommand("register", "rigid registration of two clouds");
    std::string reg_net, reg_a, reg_b, reg_out, reg_matches;
    size_t reg_keypoints = 5000;
    reg->add_option("--net", reg_net, "checkpoint file")->required();
    reg->add_option("--cloud-a", reg_a, "source cloud (PLY)")->required();
    reg->add_option("--cloud-b", reg_b, "target cloud (PLY)")->required();
    reg->add_option("--out", reg_out, "result file")->required();
    reg->add_option("--keypoints", reg_keypoints, "keypoints per cloud");
    reg->add_option("--out-matches", reg_matches, "also write the match file");

    auto* evk = app.add_subcommand("eval-keypoints", "keypoint matching error at fixed recall");
    std::string evk_net, evk_manifest, evk_scores;
    double evk_recall = 0.95;
    evk->add_option("--net", evk_net, "checkpoint file");
    evk->add_option("--manifest", evk_manifest, "benchmark manifest");
    evk->add_option("--scores", evk_scores, "precomputed `<distance> <label>` lines");
    evk->add_option("--recall", evk_recall, "recall target");

    auto* evr = app.add_subcommand("eval-registration", "fragment registration recall/precision");
    std::string evr_bench, evr_results;
    evr->add_option("--bench", evr_bench, "fragment benchmark metadata")->required();
    evr->add_option("--results", evr_results, "directory of pair-NNN.result.txt files")
        ->required();

    auto* surf = app.add_subcommand("surf-corr", "surface correspondence heat map");
    std::string surf_net, surf_target, surf_query_tdf, surf_query_cloud, surf_out;
    std::vector<double> surf_point;
    size_t surf_stride = 1;
    surf->add_option("--net", surf_net, "checkpoint file")->required();
    surf->add_option("--target", surf_target, "target cloud (PLY)")->required();
    surf->add_option("--query-tdf", surf_query_tdf, "query patch (.tdf)");
    surf->add_option("--query-cloud", surf_query_cloud, "cloud to extract the query from");
    surf->add_option("--query-point", surf_point, "query keypoint x y z")->expected(3);
    surf->add_option("--out", surf_out, "heat PLY output")->required();
    surf->add_option("--stride", surf_stride, "evaluate every k-th target point");

    CLI11_PARSE(app, argc, argv);

    try {
        const Config cfg = load_config(config_path);
        if (vox->parsed()) {
            if (vox_cloud.empty() && (vox_depth.empty() || vox_intr.empty() || vox_pose.empty())) {
                throw std::runtime_error(
                    "voxelize needs either --cloud or --depth/--intrinsics/--pose");
            }
            return cmd_voxelize(vox_cloud, vox_depth, vox_intr, vox_pose, invert_poses, vox_point,
                                vox_axes, vox_out, cfg);
        }
        if (corr->parsed()) {
            return cmd_sample_corr(corr_scenes, corr_pairs, corr_out, seed, invert_poses, cfg);
        }
        if (bench->parsed()) return cmd_gen_bench(bench_out, seed, bench_pairs, bench_scenes, cfg);
        if (train->parsed()) {
            return cmd_train(train_manifest, train_out, train_arch, train_steps, seed, train_log,
                             cfg);
        }
        if (desc->parsed()) return cmd_describe(desc_net, desc_patches, desc_out);
        if (match->parsed()) {
            const size_t n = match->count("--keypoints")
                                 ? match_keypoints
                                 : static_cast<size_t>(cfg.get_int("keypoints",
                                                                   static_cast<int>(match_keypoints)));
            return cmd_match(match_net, match_a, match_b, match_out, n, seed, match_kp_a,
                             match_kp_b, cfg);
        }
        if (reg->parsed()) {
            const size_t n = reg->count("--keypoints")
                                 ? reg_keypoints
                                 : static_cast<size_t>(
                                       cfg.get_int("keypoints", static_cast<int>(reg_keypoints)));
            return cmd_register(reg_net, reg_a, reg_b, reg_out, n, seed, reg_matches, cfg);
        }
        if (evk->parsed()) {
            if (evk_scores.empty() && (evk_net.empty() || evk_manifest.empty())) {
                throw std::runtime_error("eval-keypoints needs --scores or --net with --manifest");
            }
            const double recall =
                evk->count("--recall") ? evk_recall : cfg.get_double("recall_target", evk_recall);
            return cmd_eval_keypoints(evk_net, evk_manifest, evk_scores, recall);
        }
        if (evr->parsed()) return cmd_eval_registration(evr_bench, evr_results, cfg);
        if (surf->parsed()) {
            if (surf_query_tdf.empty() && (surf_query_cloud.empty() || surf_point.size() != 3)) {
                throw std::runtime_error(
                    "surf-corr needs --query-tdf or --query-cloud with --query-point");
            }
            const size_t stride = surf->count("--stride")
                                      ? surf_stride
                                      : static_cast<size_t>(cfg.get_int("stride", 1));
            return cmd_surf_corr(surf_net, surf_target, surf_query_tdf, surf_query_cloud,
                                 surf_point, surf_out, stride, cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
