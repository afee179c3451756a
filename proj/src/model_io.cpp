#include "oodgate/model_io.hpp"

#include <array>
#include <cstring>

#include "oodgate/error.hpp"
#include "oodgate/image.hpp"

namespace oodgate {

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k)
        c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (const std::uint8_t b : bytes)
    crc = table[(crc ^ b) & 0xFFu] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

namespace {

constexpr char kMagic[4] = {'O', 'G', 'M', 'F'};

struct Writer {
  std::vector<std::uint8_t> bytes;

  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes.insert(bytes.end(), s.begin(), s.end());
  }
};

struct Reader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;

  void need(std::size_t n) {
    if (pos + n > bytes.size())
      fail(errc::corrupt_stream, "truncated model file");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * i);
    return v;
  }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * i);
    return v;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    if (n > (1u << 20)) fail(errc::corrupt_stream, "unreasonable string length");
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes.data() + pos), n);
    pos += n;
    return s;
  }
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const ExtraTreesModel& model) {
  Writer w;
  w.bytes.insert(w.bytes.end(), kMagic, kMagic + 4);
  w.u32(kModelFormatVersion);
  w.i32(model.n_features);
  w.i32(model.params.n_estimators);
  w.i32(model.params.max_depth);
  w.i32(model.params.min_samples_split);
  w.i32(model.params.min_samples_leaf);
  w.i32(model.params.k_features);
  w.u32(model.params.class_weighted ? 1 : 0);
  w.i32(model.training_factor);
  w.u64(model.training_seed);
  w.str(model.schema_version);
  for (const std::string& name : model.feature_names) w.str(name);
  w.u32(static_cast<std::uint32_t>(model.trees.size()));
  for (const Tree& tree : model.trees) {
    w.u32(static_cast<std::uint32_t>(tree.nodes.size()));
    for (const TreeNode& node : tree.nodes) {
      w.i32(node.feature);
      w.f64(node.threshold);
      w.i32(node.left);
      w.i32(node.right);
      w.i32(node.n_samples);
      w.f64(node.count0);
      w.f64(node.count1);
      w.f64(node.value);
    }
  }
  w.u32(crc32(w.bytes));
  return std::move(w.bytes);
}

ExtraTreesModel deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    fail(errc::corrupt_stream, "not a model file");

  const std::size_t body = bytes.size() - 4;
  Reader tail{bytes.subspan(body), 0};
  const std::uint32_t stored = tail.u32();
  if (crc32(bytes.first(body)) != stored)
    fail(errc::checksum_mismatch, "model file checksum does not validate");

  Reader r{bytes.first(body), 4};
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion)
    fail(errc::version_unsupported,
         "model format version " + std::to_string(version) + " not supported");

  ExtraTreesModel model;
  model.n_features = r.i32();
  model.params.n_estimators = r.i32();
  model.params.max_depth = r.i32();
  model.params.min_samples_split = r.i32();
  model.params.min_samples_leaf = r.i32();
  model.params.k_features = r.i32();
  model.params.class_weighted = r.u32() != 0;
  model.training_factor = r.i32();
  model.training_seed = r.u64();
  model.schema_version = r.str();
  if (model.n_features <= 0 || model.n_features > 100000)
    fail(errc::corrupt_stream, "implausible feature count");
  for (int f = 0; f < model.n_features; ++f) model.feature_names.push_back(r.str());

  const std::uint32_t n_trees = r.u32();
  model.trees.resize(n_trees);
  for (std::uint32_t t = 0; t < n_trees; ++t) {
    const std::uint32_t n_nodes = r.u32();
    auto& nodes = model.trees[t].nodes;
    nodes.resize(n_nodes);
    for (std::uint32_t i = 0; i < n_nodes; ++i) {
      TreeNode& node = nodes[i];
      node.feature = r.i32();
      node.threshold = r.f64();
      node.left = r.i32();
      node.right = r.i32();
      node.n_samples = r.i32();
      node.count0 = r.f64();
      node.count1 = r.f64();
      node.value = r.f64();
      if (!node.is_leaf() &&
          (node.left < 0 || node.right < 0 ||
           static_cast<std::uint32_t>(node.left) >= n_nodes ||
           static_cast<std::uint32_t>(node.right) >= n_nodes))
        fail(errc::corrupt_stream, "tree child offset out of range");
    }
    if (n_nodes == 0) fail(errc::corrupt_stream, "empty tree");
  }
  return model;
}

void save_model(const ExtraTreesModel& model, const std::string& path) {
  write_file(path, serialize_model(model));
}

ExtraTreesModel load_model(const std::string& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    if (e.code() == errc::missing_file)
      fail(errc::missing_model, "model file not found: " + path);
    throw;
  }
  return deserialize_model(bytes);
}

ExtraTreesModel load_model_checked(const std::string& path) {
  ExtraTreesModel model = load_model(path);
  require(model.schema_version == feature_schema_version(), errc::schema_mismatch,
          "model built against feature schema version '" + model.schema_version +
              "', extractor is '" + std::string(feature_schema_version()) + "'");
  require(model.n_features == kFeatureCount, errc::schema_mismatch,
          "model feature count does not match the extractor");
  const auto& names = feature_names();
  for (int f = 0; f < kFeatureCount; ++f) {
    if (model.feature_names[static_cast<std::size_t>(f)] != names[static_cast<std::size_t>(f)])
      fail(errc::schema_mismatch,
           "feature " + std::to_string(f) + " is '" +
               model.feature_names[static_cast<std::size_t>(f)] + "' in the model but '" +
               std::string(names[static_cast<std::size_t>(f)]) + "' in the extractor");
  }
  return model;
}

}  // namespace oodgate
