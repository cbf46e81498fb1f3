// Command-line surface: dataset synthesis, extreme-point simulation,
// geodesic extraction, training, prediction and evaluation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "exseg/dataset.hpp"
#include "exseg/geodesics.hpp"
#include "exseg/io.hpp"
#include "exseg/metrics.hpp"
#include "exseg/phantoms.hpp"
#include "exseg/trainer.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace exseg;

/// Errors in how the tool was invoked (missing/contradictory flags); mapped
/// to exit code 2 like parser errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt_metric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

PhantomKind parse_kind(const std::string& name) {
  if (name == "blob") return PhantomKind::Blob;
  if (name == "bent-tube") return PhantomKind::BentTube;
  if (name == "blob-distractor") return PhantomKind::BlobWithDistractor;
  throw UsageError("unknown --kind '" + name + "', expected blob|bent-tube|blob-distractor");
}

struct SynthOpts {
  std::string out;
  int n_train = 2, n_val = 1, n_test = 1;
  std::string kind = "blob";
  std::vector<int> shape = {48, 48, 24};
  std::vector<double> spacing = {1.0, 1.0, 1.0};
  double fg = 0.75, bg = 0.25, noise_sd = 0.0, distractor_contrast = 0.8;
  std::uint64_t seed = 42;
};

int run_synth(const SynthOpts& o) {
  PhantomSpec spec;
  spec.shape = {o.shape[0], o.shape[1], o.shape[2]};
  spec.spacing = {o.spacing[0], o.spacing[1], o.spacing[2]};
  spec.kind = parse_kind(o.kind);
  spec.fg_intensity = static_cast<float>(o.fg);
  spec.bg_intensity = static_cast<float>(o.bg);
  spec.noise_sd = static_cast<float>(o.noise_sd);
  spec.distractor_contrast = static_cast<float>(o.distractor_contrast);

  const DatasetManifest m =
      generate_dataset(o.n_train, o.n_val, o.n_test, spec, o.seed, fs::path(o.out));
  std::cout << "wrote " << m.cases.size() << " cases to " << o.out << "\n";
  return 0;
}

struct PointsOpts {
  std::string gt, out;
  std::uint64_t seed = 0;
};

int run_points(const PointsOpts& o) {
  const Volume gt = read_volume(o.gt);
  const ExtremePointSet pts = simulate_extreme_points(gt, o.seed);
  write_points(o.out, pts);
  std::cout << "wrote " << o.out << "\n";
  return 0;
}

struct GeodesicOpts {
  std::string image, points, prob, out_paths, out_mask;
  std::string mode = "deep";
};

int run_geodesic(const GeodesicOpts& o) {
  GeodesicConfig cfg;
  cfg.mode = parse_geodesic_metric(o.mode);
  if (cfg.mode == GeodesicMetric::Deep && o.prob.empty())
    throw UsageError("--mode deep requires --prob (per-voxel probability volume)");

  const Volume X = normalize_intensity(read_volume(o.image));
  const Volume grad = gradient_magnitude(X);
  std::optional<Volume> prob;
  if (!o.prob.empty()) {
    prob = read_volume(o.prob);
    if (!prob->same_grid(X))
      throw std::runtime_error("--prob volume grid does not match --image");
  }
  const ExtremePointSet pts = read_points(o.points);
  pts.validate(X.shape());

  const GeodesicSet set =
      inter_extreme_geodesics(cfg, X, grad, prob ? &*prob : nullptr, pts);

  json jpaths;
  const char* axis_names[3] = {"x", "y", "z"};
  for (int a = 0; a < 3; ++a) {
    const VoxelPath& p = set.axis(a);
    json voxels = json::array();
    for (const VoxelIndex& v : p.voxels) voxels.push_back({v.i, v.j, v.k});
    jpaths[axis_names[a]] = {{"cost", p.total_length}, {"voxels", voxels}};
  }
  std::ofstream out(o.out_paths, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + o.out_paths);
  out << jpaths.dump(2) << "\n";

  Volume mask(X.shape(), X.spacing());
  for (int a = 0; a < 3; ++a)
    for (const VoxelIndex& v : set.axis(a).voxels) mask(v.i, v.j, v.k) = 1.0f;
  write_volume(o.out_mask, mask);
  std::cout << "wrote " << o.out_paths << " and " << o.out_mask << "\n";
  return 0;
}

struct TrainOpts {
  std::string data, out, config;
  std::string supervision, mode;
  int iterations = -1;
  std::int64_t seed = -1;
};

std::vector<TrainCase> load_cases(const DatasetManifest& m, const std::string& split) {
  std::vector<TrainCase> cases;
  for (const DatasetCase& c : m.split(split)) {
    TrainCase tc;
    tc.id = c.id;
    tc.image = read_volume(c.image);
    tc.points = read_points(c.points);
    cases.push_back(std::move(tc));
  }
  if (cases.empty()) throw std::runtime_error("manifest has no '" + split + "' cases");
  return cases;
}

int run_train(const TrainOpts& o) {
  TrainConfig cfg;
  if (!o.config.empty()) {
    std::ifstream in(o.config, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + o.config);
    const std::string text((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    cfg = train_config_from_json(text, cfg);
  }
  if (!o.supervision.empty()) cfg.supervision_mode = parse_supervision_mode(o.supervision);
  if (!o.mode.empty()) cfg.geodesic_mode = parse_geodesic_metric(o.mode);
  if (o.iterations >= 0) cfg.iterations = o.iterations;
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  cfg.reg.lambda = cfg.lambda;
  cfg.validate();

  const DatasetManifest m = read_manifest(o.data);
  const TrainResult result = train(load_cases(m, "train"), load_cases(m, "val"), cfg);
  save_checkpoint(o.out, result.model, cfg);
  std::cout << "best validation loss " << fmt_metric(result.best_val_loss) << " at iteration "
            << result.best_iteration << ", wrote " << o.out << "\n";
  return 0;
}

struct PredictOpts {
  std::string image, checkpoint, out_prob, out_mask;
};

int run_predict(const PredictOpts& o) {
  const auto [model, cfg] = load_checkpoint(o.checkpoint);
  (void)cfg;
  const Volume X = normalize_intensity(read_volume(o.image));
  const Volume prob = forward(model, X);
  write_volume(o.out_prob, prob);

  Volume mask(prob.shape(), prob.spacing());
  for (std::size_t n = 0; n < prob.size(); ++n)
    mask.data()[n] = prob.data()[n] > 0.5f ? 1.0f : 0.0f;
  write_volume(o.out_mask, mask);
  std::cout << "wrote " << o.out_prob << " and " << o.out_mask << "\n";
  return 0;
}

struct EvalOpts {
  std::string pred, gt, id = "case";
  std::string manifest, pred_dir, pred_dir_b;
  std::string split = "test";
  std::string csv, json_path;
};

CaseMetrics eval_pair(const std::string& id, const Volume& pred, const Volume& gt) {
  if (!pred.same_grid(gt))
    throw std::runtime_error("prediction grid does not match ground truth for case '" + id + "'");
  CaseMetrics cm;
  cm.case_id = id;
  cm.dice = dice(pred, gt);
  cm.precision = precision(pred, gt);
  try {
    cm.hd95 = hd95(pred, gt);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(e.what()) + " for case '" + id + "'");
  }
  return cm;
}

int run_eval(const EvalOpts& o) {
  const bool pair_mode = !o.pred.empty() || !o.gt.empty();
  const bool suite_mode = !o.manifest.empty() || !o.pred_dir.empty();
  if (pair_mode == suite_mode)
    throw UsageError("eval needs either --pred/--gt or --manifest/--pred-dir");
  if (pair_mode && (o.pred.empty() || o.gt.empty()))
    throw UsageError("eval pair mode needs both --pred and --gt");
  if (suite_mode && (o.manifest.empty() || o.pred_dir.empty()))
    throw UsageError("eval suite mode needs both --manifest and --pred-dir");
  if (!o.pred_dir_b.empty() && !suite_mode)
    throw UsageError("--pred-dir-b requires --manifest/--pred-dir mode");

  std::vector<CaseMetrics> rows;
  std::optional<double> wilcoxon_p;
  if (pair_mode) {
    rows.push_back(eval_pair(o.id, read_volume(o.pred), read_volume(o.gt)));
  } else {
    const DatasetManifest m = read_manifest(o.manifest);
    const auto cases = m.split(o.split);
    if (cases.empty()) throw std::runtime_error("manifest has no '" + o.split + "' cases");
    std::vector<double> dice_a, dice_b;
    for (const DatasetCase& c : cases) {
      const Volume gt = read_volume(c.mask);
      const fs::path pred_path = fs::path(o.pred_dir) / (c.id + "_pred.json");
      const CaseMetrics cm = eval_pair(c.id, read_volume(pred_path), gt);
      dice_a.push_back(cm.dice);
      rows.push_back(cm);
      if (!o.pred_dir_b.empty()) {
        const fs::path b_path = fs::path(o.pred_dir_b) / (c.id + "_pred.json");
        dice_b.push_back(eval_pair(c.id, read_volume(b_path), gt).dice);
      }
    }
    if (!o.pred_dir_b.empty()) wilcoxon_p = wilcoxon_signed_rank(dice_a, dice_b);
  }

  std::string csv = "case_id,dice,hd95,precision\n";
  for (const CaseMetrics& r : rows)
    csv += r.case_id + "," + fmt_metric(r.dice) + "," + fmt_metric(r.hd95) + "," +
           fmt_metric(r.precision) + "\n";

  const EvalReport report = EvalReport::aggregate(rows);
  json summary;
  summary["cases"] = json::array();
  for (const CaseMetrics& r : rows)
    summary["cases"].push_back({{"case_id", r.case_id},
                                {"dice", r.dice},
                                {"hd95", r.hd95},
                                {"precision", r.precision}});
  const std::pair<const char*, const MetricSummary*> aggregates[] = {
      {"dice", &report.dice}, {"hd95", &report.hd95}, {"precision", &report.precision}};
  for (const auto& [name, s] : aggregates)
    summary[name] = {{"mean", s->mean}, {"stddev", s->stddev}, {"variance", s->variance}};
  if (wilcoxon_p) summary["wilcoxon_dice_p"] = *wilcoxon_p;

  std::cout << csv;
  if (!o.csv.empty()) {
    std::ofstream out(o.csv, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + o.csv);
    out << csv;
  }
  if (!o.json_path.empty()) {
    std::ofstream out(o.json_path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + o.json_path);
    out << summary.dump(2) << "\n";
  } else if (!pair_mode || wilcoxon_p) {
    std::cout << summary.dump(2) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakly-supervised 3D segmentation from extreme points"};
  app.require_subcommand(1);

  SynthOpts synth_opts;
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic phantom dataset");
  synth->add_option("--out", synth_opts.out, "output directory")->required();
  synth->add_option("--train", synth_opts.n_train, "training cases");
  synth->add_option("--val", synth_opts.n_val, "validation cases");
  synth->add_option("--test", synth_opts.n_test, "test cases");
  synth->add_option("--kind", synth_opts.kind, "blob|bent-tube|blob-distractor");
  synth->add_option("--shape", synth_opts.shape, "volume shape nx ny nz")
      ->expected(3)
      ->delimiter(',');
  synth->add_option("--spacing", synth_opts.spacing, "voxel spacing in mm")
      ->expected(3)
      ->delimiter(',');
  synth->add_option("--fg", synth_opts.fg, "foreground intensity");
  synth->add_option("--bg", synth_opts.bg, "background intensity");
  synth->add_option("--noise-sd", synth_opts.noise_sd, "additive Gaussian noise sd");
  synth->add_option("--distractor-contrast", synth_opts.distractor_contrast,
                    "corridor contrast fraction");
  synth->add_option("--seed", synth_opts.seed, "base seed");

  PointsOpts points_opts;
  CLI::App* points = app.add_subcommand("points", "simulate extreme points from a mask");
  points->add_option("--gt", points_opts.gt, "ground-truth mask volume")->required();
  points->add_option("--out", points_opts.out, "output points JSON")->required();
  points->add_option("--seed", points_opts.seed, "tie-break seed");

  GeodesicOpts geo_opts;
  CLI::App* geodesic = app.add_subcommand("geodesic", "extract inter-extreme-point paths");
  geodesic->add_option("--image", geo_opts.image, "image volume")->required();
  geodesic->add_option("--points", geo_opts.points, "extreme points JSON")->required();
  geodesic->add_option("--mode", geo_opts.mode, "gradient|gradient-euclidean|deep");
  geodesic->add_option("--prob", geo_opts.prob, "probability volume (deep mode)");
  geodesic->add_option("--out-paths", geo_opts.out_paths, "output path JSON")->required();
  geodesic->add_option("--out-mask", geo_opts.out_mask, "output path mask volume")->required();

  TrainOpts train_opts;
  CLI::App* train_cmd = app.add_subcommand("train", "train on a dataset manifest");
  train_cmd->add_option("--data", train_opts.data, "dataset manifest JSON")->required();
  train_cmd->add_option("--out", train_opts.out, "output checkpoint JSON")->required();
  train_cmd->add_option("--config", train_opts.config, "training config JSON");
  train_cmd->add_option("--supervision", train_opts.supervision, "naive|geodesic|geodesic-reg");
  train_cmd->add_option("--mode", train_opts.mode, "geodesic metric override");
  train_cmd->add_option("--iterations", train_opts.iterations, "iteration count override");
  train_cmd->add_option("--seed", train_opts.seed, "seed override");

  PredictOpts predict_opts;
  CLI::App* predict = app.add_subcommand("predict", "run a checkpoint over a volume");
  predict->add_option("--image", predict_opts.image, "image volume")->required();
  predict->add_option("--checkpoint", predict_opts.checkpoint, "checkpoint JSON")->required();
  predict->add_option("--out-prob", predict_opts.out_prob, "output probability volume")
      ->required();
  predict->add_option("--out-mask", predict_opts.out_mask, "output binary mask volume")
      ->required();

  EvalOpts eval_opts;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate predictions");
  eval_cmd->add_option("--pred", eval_opts.pred, "prediction mask volume");
  eval_cmd->add_option("--gt", eval_opts.gt, "ground-truth mask volume");
  eval_cmd->add_option("--id", eval_opts.id, "case id for pair mode");
  eval_cmd->add_option("--manifest", eval_opts.manifest, "dataset manifest JSON");
  eval_cmd->add_option("--pred-dir", eval_opts.pred_dir, "directory of <id>_pred volumes");
  eval_cmd->add_option("--pred-dir-b", eval_opts.pred_dir_b,
                       "second prediction set for a paired Wilcoxon test");
  eval_cmd->add_option("--split", eval_opts.split, "manifest split to evaluate");
  eval_cmd->add_option("--csv", eval_opts.csv, "write per-case CSV here");
  eval_cmd->add_option("--json", eval_opts.json_path, "write JSON summary here");

  try {
    app.parse(argc, argv);
    if (*synth) return run_synth(synth_opts);
    if (*points) return run_points(points_opts);
    if (*geodesic) return run_geodesic(geo_opts);
    if (*train_cmd) return run_train(train_opts);
    if (*predict) return run_predict(predict_opts);
    if (*eval_cmd) return run_eval(eval_opts);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
