// oodgate: out-of-distribution screening for fundus imaging pipelines.
// Subcommands cover corpus generation, feature extraction, training,
// cross-validated evaluation, single-image prediction with attribution,
// and the stage-decomposed latency benchmark.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "oodgate/benchmark.hpp"
#include "oodgate/config.hpp"
#include "oodgate/error.hpp"
#include "oodgate/manifest.hpp"
#include "oodgate/model_io.hpp"
#include "oodgate/parallel.hpp"
#include "oodgate/shap.hpp"
#include "oodgate/synthetic.hpp"

namespace fs = std::filesystem;
using namespace oodgate;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitInternal = 4;

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(errc::io_failure, "cannot write " + path);
  out << text;
  if (!out) fail(errc::io_failure, "write failed for " + path);
}

struct CliArgs {
  std::string config_path;

  std::string out_dir;
  int n_per_class = 100;

  std::string manifest_path;
  std::string model_path;
  std::string model_dir;
  std::string image_path;
  std::string out_path;
  std::string explain_out;

  int factor = 1;
  bool factor_set = false;
  std::uint64_t seed = 42;
  bool seed_set = false;
  int n_benchmark = 1000;
  bool explain = false;
  bool check_files = false;
  bool class_weighted = false;
  bool class_weighted_set = false;
};

PipelineConfig effective_config(const CliArgs& args) {
  PipelineConfig cfg;
  if (!args.config_path.empty()) cfg = load_config(args.config_path);
  if (args.factor_set) cfg.factor = args.factor;
  if (args.seed_set) cfg.seed = args.seed;
  if (args.class_weighted_set) cfg.forest.class_weighted = args.class_weighted;
  validate_config(cfg);
  return cfg;
}

int run_gen_corpus(const CliArgs& args) {
  const PipelineConfig cfg = effective_config(args);
  const DatasetManifest manifest =
      generate_synthetic_corpus(args.out_dir, args.n_per_class, cfg.seed);
  std::cout << "corpus: " << manifest.entries.size() << " images under "
            << args.out_dir << '\n';
  std::cout << "manifest: " << (fs::path(args.out_dir) / "manifest.csv").string()
            << '\n';
  return 0;
}

int run_extract(const CliArgs& args) {
  const PipelineConfig cfg = effective_config(args);
  const DatasetManifest manifest = load_manifest(args.manifest_path, args.check_files);
  require(!manifest.entries.empty(), errc::empty_manifest, "manifest has no rows");

  std::vector<std::string> paths;
  std::vector<int> labels;
  for (const ManifestEntry& e : manifest.entries) {
    paths.push_back(e.path);
    labels.push_back(e.label);
  }
  const std::vector<FeatureVector> features =
      extract_features(paths, cfg.factor, cfg.features, worker_thread_cap());

  std::ofstream out(args.out_path, std::ios::trunc);
  if (!out) fail(errc::io_failure, "cannot write " + args.out_path);
  write_features_csv(out, paths, labels, features);
  std::cout << "wrote " << features.size() << " feature rows to "
            << args.out_path << '\n';
  return 0;
}

int run_train(const CliArgs& args) {
  const PipelineConfig cfg = effective_config(args);
  const DatasetManifest manifest = load_manifest(args.manifest_path, args.check_files);
  const std::vector<std::size_t> internal = manifest.indices(Split::internal);
  require(!internal.empty(), errc::empty_manifest, "no internal entries to train on");

  std::vector<std::string> paths;
  std::vector<int> labels;
  for (const std::size_t i : internal) {
    paths.push_back(manifest.entries[i].path);
    labels.push_back(manifest.entries[i].label);
  }
  const std::vector<FeatureVector> features =
      extract_features(paths, cfg.factor, cfg.features, worker_thread_cap());

  Dataset data;
  data.n_features = kFeatureCount;
  for (std::size_t i = 0; i < features.size(); ++i)
    data.push_row(features[i].span(), labels[i]);

  ExtraTreesModel model = train_extra_trees(data, cfg.seed, cfg.forest);
  model.training_factor = cfg.factor;
  save_model(model, args.out_path);
  std::cout << "trained on " << data.n_samples() << " samples at factor "
            << cfg.factor << ", wrote " << args.out_path << '\n';
  return 0;
}

int run_evaluate(const CliArgs& args) {
  const PipelineConfig cfg = effective_config(args);
  const DatasetManifest manifest = load_manifest(args.manifest_path, args.check_files);

  InternalValidation validation =
      run_internal_validation(manifest, cfg.factor, cfg.seed, cfg.features,
                              cfg.forest, worker_thread_cap());
  evaluate_external_consensus(validation, manifest, cfg.factor, cfg.features,
                              worker_thread_cap());

  std::error_code ec;
  fs::create_directories(args.model_dir, ec);
  if (ec) fail(errc::io_failure, "cannot create " + args.model_dir);
  for (std::size_t f = 0; f < validation.fold_models.size(); ++f) {
    const std::string path =
        (fs::path(args.model_dir) / ("model_fold" + std::to_string(f) + ".bin")).string();
    save_model(validation.fold_models[f], path);
  }

  std::ostringstream csv;
  write_eval_report_csv(csv, validation.report);
  write_text_file(args.out_path, csv.str());
  std::cout << eval_report_text(validation.report);
  std::cout << "fold models: " << args.model_dir << ", report: " << args.out_path
            << '\n';
  return 0;
}

int run_predict(const CliArgs& args) {
  const PipelineConfig cfg = effective_config(args);
  const ExtraTreesModel model = load_model_checked(args.model_path);
  const int factor = args.factor_set ? cfg.factor : model.training_factor;
  require(is_valid_factor(factor), errc::bad_config, "bad factor in model file");

  const RasterImage image = load_image(args.image_path);
  const FeatureVector features = extract_feature_vector(image, factor, cfg.features);
  const double p = model.predict_probability(features.span());

  char buf[64];
  std::snprintf(buf, sizeof(buf), "p_fundus=%.6f", p);
  std::cout << buf << '\n';
  std::cout << "decision=" << (p >= 0.5 ? "fundus" : "non-fundus")
            << " (tau=0.5, factor=" << factor << ")\n";

  if (args.explain || !args.explain_out.empty()) {
    const AttributionResult attribution = tree_shap(model, features.span());
    std::ostringstream csv;
    write_attribution_csv(csv, model, attribution);
    if (!args.explain_out.empty()) {
      write_text_file(args.explain_out, csv.str());
      std::cout << "attribution: " << args.explain_out << '\n';
    } else {
      std::cout << csv.str();
    }
  }
  return 0;
}

int run_benchmark(const CliArgs& args) {
  const PipelineConfig cfg = effective_config(args);
  const DatasetManifest manifest = load_manifest(args.manifest_path, args.check_files);

  // single measurement thread regardless of OODGATE_THREADS
  const LatencyReport report = run_latency_benchmark(
      manifest, args.model_path, cfg.factor, args.n_benchmark, cfg.seed,
      cfg.features);

  std::ostringstream csv;
  write_latency_csv(csv, {&report, 1});
  write_text_file(args.out_path, csv.str());
  std::cout << latency_table({&report, 1});
  std::cout << "latency CSV: " << args.out_path << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"out-of-distribution screening for fundus imaging"};
  app.require_subcommand(1);
  CliArgs args;

  app.add_option("--config", args.config_path, "pipeline config file (key=value)");

  auto* gen = app.add_subcommand("gen-corpus", "generate a synthetic corpus");
  gen->add_option("--out", args.out_dir, "output directory")->required();
  gen->add_option("--n", args.n_per_class, "images per class")->required();
  gen->add_option("--seed", args.seed, "rng seed")->each([&](const std::string&) { args.seed_set = true; });

  auto* extract = app.add_subcommand("extract", "extract feature vectors to CSV");
  extract->add_option("--manifest", args.manifest_path, "dataset manifest")->required();
  extract->add_option("--factor", args.factor, "downsample factor")->each([&](const std::string&) { args.factor_set = true; });
  extract->add_option("--out", args.out_path, "output CSV")->required();
  extract->add_flag("--check-files", args.check_files, "verify files exist up front");

  auto* train = app.add_subcommand("train", "train the classifier on the internal split");
  train->add_option("--manifest", args.manifest_path, "dataset manifest")->required();
  train->add_option("--factor", args.factor, "downsample factor")->each([&](const std::string&) { args.factor_set = true; });
  train->add_option("--seed", args.seed, "rng seed")->each([&](const std::string&) { args.seed_set = true; });
  train->add_option("--out", args.out_path, "output model file")->required();
  train->add_flag("--check-files", args.check_files, "verify files exist up front");
  train->add_flag("--class-weighted", args.class_weighted, "balance classes in training")
      ->each([&](const std::string&) { args.class_weighted_set = true; });

  auto* evaluate = app.add_subcommand(
      "evaluate", "internal 5-fold cross-validation plus external consensus");
  evaluate->add_option("--manifest", args.manifest_path, "dataset manifest")->required();
  evaluate->add_option("--model-dir", args.model_dir, "directory for fold models")->required();
  evaluate->add_option("--factor", args.factor, "downsample factor")->each([&](const std::string&) { args.factor_set = true; });
  evaluate->add_option("--seed", args.seed, "rng seed")->each([&](const std::string&) { args.seed_set = true; });
  evaluate->add_option("--out", args.out_path, "report CSV path")->required();
  evaluate->add_flag("--check-files", args.check_files, "verify files exist up front");

  auto* predict = app.add_subcommand("predict", "classify one image");
  predict->add_option("--model", args.model_path, "model file")->required();
  predict->add_option("--image", args.image_path, "image to classify")->required();
  predict->add_option("--factor", args.factor, "override the model's factor")->each([&](const std::string&) { args.factor_set = true; });
  predict->add_flag("--explain", args.explain, "print per-feature attribution CSV");
  predict->add_option("--explain-out", args.explain_out, "write attribution CSV here");

  auto* benchmark = app.add_subcommand(
      "benchmark", "single-thread cold-start latency, stages L/F/C");
  benchmark->add_option("--manifest", args.manifest_path, "dataset manifest")->required();
  benchmark->add_option("--model", args.model_path, "model file")->required();
  benchmark->add_option("--factor", args.factor, "downsample factor")->each([&](const std::string&) { args.factor_set = true; });
  benchmark->add_option("--n", args.n_benchmark, "number of sampled images");
  benchmark->add_option("--seed", args.seed, "sampling seed")->each([&](const std::string&) { args.seed_set = true; });
  benchmark->add_option("--out", args.out_path, "latency CSV path")->required();
  benchmark->add_flag("--check-files", args.check_files, "verify files exist up front");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (gen->parsed()) return run_gen_corpus(args);
    if (extract->parsed()) return run_extract(args);
    if (train->parsed()) return run_train(args);
    if (evaluate->parsed()) return run_evaluate(args);
    if (predict->parsed()) return run_predict(args);
    if (benchmark->parsed()) return run_benchmark(args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return errc_exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}
