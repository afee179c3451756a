#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "helpers.hpp"
#include "oodgate/benchmark.hpp"
#include "oodgate/error.hpp"
#include "oodgate/model_io.hpp"
#include "oodgate/synthetic.hpp"

using namespace oodgate;
namespace fs = std::filesystem;

namespace {

struct Fixture {
  fs::path dir;
  DatasetManifest manifest;
  std::string model_path;

  Fixture() {
    dir = fs::temp_directory_path() / "oodgate_bench_test";
    fs::remove_all(dir);
    CorpusSpec spec;
    spec.n_internal_per_class = 3;
    spec.n_external_per_class = 0;
    spec.seed = 3;
    spec.size = 128;
    manifest = generate_synthetic_corpus(dir.string(), spec);

    Dataset data;
    data.n_features = kFeatureCount;
    for (const ManifestEntry& e : manifest.entries) {
      const FeatureVector v = extract_feature_vector(load_image(e.path), 8);
      data.push_row(v.span(), e.label);
    }
    ForestHyperparams hp;
    hp.n_estimators = 10;
    hp.min_samples_split = 2;
    hp.min_samples_leaf = 1;
    ExtraTreesModel model = train_extra_trees(data, 2, hp);
    model.training_factor = 8;
    model_path = (dir / "model.bin").string();
    save_model(model, model_path);
  }
  ~Fixture() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("stage sums, stats, and sampling flags") {
  Fixture fx;

  const LatencyReport r = run_latency_benchmark(fx.manifest, fx.model_path, 8, 4, 1);
  CHECK(r.n_images == 4);
  CHECK(r.single_thread);
  CHECK_FALSE(r.sampled_with_replacement);
  REQUIRE(r.overall_ms.size() == 4);

  for (std::size_t i = 0; i < r.overall_ms.size(); ++i) {
    const double sum = r.load_ms[i] + r.feature_ms[i] + r.classify_ms[i];
    CHECK(std::fabs(sum - r.overall_ms[i]) <= 0.05 * r.overall_ms[i]);
  }
  const double max_stage =
      std::max({r.load.mean_ms, r.feature.mean_ms, r.classify.mean_ms});
  CHECK(r.overall.mean_ms >= max_stage);
  CHECK(r.load.p95_ms >= 0.0);
  CHECK(r.feature.median_ms >= 0.0);
  CHECK_FALSE(r.host.empty());

  // more samples than images: replacement kicks in and is flagged
  const LatencyReport rep = run_latency_benchmark(fx.manifest, fx.model_path, 8, 9, 1);
  CHECK(rep.sampled_with_replacement);
  CHECK(rep.overall_ms.size() == 9);
}

TEST_CASE("benchmark is seeded") {
  Fixture fx;
  const LatencyReport a = run_latency_benchmark(fx.manifest, fx.model_path, 8, 3, 5);
  const LatencyReport b = run_latency_benchmark(fx.manifest, fx.model_path, 8, 3, 5);
  CHECK(a.seed == b.seed);
  CHECK(a.n_images == b.n_images);
}

TEST_CASE("latency CSV round-trips the statistics") {
  Fixture fx;
  const LatencyReport r = run_latency_benchmark(fx.manifest, fx.model_path, 8, 3, 2);
  std::ostringstream out;
  write_latency_csv(out, {&r, 1});

  std::istringstream in(out.str());
  const auto back = read_latency_csv(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0].factor == 8);
  CHECK(back[0].n_images == 3);
  CHECK(back[0].load.mean_ms == doctest::Approx(r.load.mean_ms).epsilon(1e-3));
  CHECK(back[0].feature.p95_ms == doctest::Approx(r.feature.p95_ms).epsilon(1e-3));
  CHECK(back[0].overall.median_ms == doctest::Approx(r.overall.median_ms).epsilon(1e-3));
}

TEST_CASE("reports are ordered by factor in table and CSV") {
  std::vector<LatencyReport> reports(4);
  const int factors[4] = {8, 1, 4, 2};
  for (int i = 0; i < 4; ++i) {
    reports[static_cast<std::size_t>(i)].factor = factors[i];
    reports[static_cast<std::size_t>(i)].n_images = 1;
    reports[static_cast<std::size_t>(i)].overall.mean_ms = factors[i] * 10.0;
  }
  const std::string table = latency_table(reports);
  const auto p1 = table.find("     1 |");
  const auto p2 = table.find("   1/2 |");
  const auto p4 = table.find("   1/4 |");
  const auto p8 = table.find("   1/8 |");
  REQUIRE(p1 != std::string::npos);
  CHECK(p1 < p2);
  CHECK(p2 < p4);
  CHECK(p4 < p8);

  std::ostringstream csv;
  write_latency_csv(csv, reports);
  const std::string s = csv.str();
  CHECK(s.find("1,load") < s.find("2,load"));
  CHECK(s.find("2,load") < s.find("4,load"));
  CHECK(s.find("4,load") < s.find("8,load"));
}

TEST_CASE("single-factor report renders one table row") {
  LatencyReport r;
  r.factor = 4;
  r.n_images = 7;
  const std::string table = latency_table({&r, 1});
  int data_rows = 0;
  std::istringstream lines(table);
  std::string line;
  while (std::getline(lines, line))
    if (line.find(" | ") != std::string::npos && line.find("factor") == std::string::npos)
      ++data_rows;
  CHECK(data_rows == 1);
}

TEST_CASE("benchmark error paths") {
  Fixture fx;
  try {
    run_latency_benchmark(fx.manifest, "/no/such/model.bin", 8, 2, 1);
    FAIL("expected MissingModel");
  } catch (const Error& e) {
    CHECK(e.code() == errc::missing_model);
  }

  DatasetManifest empty;
  try {
    run_latency_benchmark(empty, fx.model_path, 8, 2, 1);
    FAIL("expected EmptyManifest");
  } catch (const Error& e) {
    CHECK(e.code() == errc::empty_manifest);
  }
}
