#include "oodgate/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "oodgate/error.hpp"

namespace fs = std::filesystem;

namespace oodgate {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

DatasetManifest load_manifest(const std::string& path, bool check_files) {
  std::ifstream in(path);
  if (!in) fail(errc::missing_file, "cannot open manifest " + path);
  const fs::path base = fs::path(path).parent_path();

  std::string line;
  if (!std::getline(in, line))
    fail(errc::corrupt_stream, "manifest is empty: " + path);
  if (trim(line) != "path,label,split")
    fail(errc::corrupt_stream, "manifest header must be 'path,label,split'");

  DatasetManifest manifest;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream row(line);
    std::string p, label_s, split_s;
    if (!std::getline(row, p, ',') || !std::getline(row, label_s, ',') ||
        !std::getline(row, split_s))
      fail(errc::corrupt_stream,
           "manifest line " + std::to_string(line_no) + " needs path,label,split");
    p = trim(p);
    label_s = trim(label_s);
    split_s = trim(split_s);

    if (!seen.insert(p).second)
      fail(errc::duplicate_path, "duplicate manifest path: " + p);

    ManifestEntry entry;
    if (label_s == "0") {
      entry.label = 0;
    } else if (label_s == "1") {
      entry.label = 1;
    } else {
      fail(errc::bad_label, "label must be 0 or 1, got '" + label_s + "'");
    }
    if (split_s == "internal") {
      entry.split = Split::internal;
    } else if (split_s == "external") {
      entry.split = Split::external;
    } else {
      fail(errc::bad_split, "split must be internal or external, got '" + split_s + "'");
    }

    const fs::path fp(p);
    entry.path = fp.is_absolute() ? fp.string() : (base / fp).string();
    if (check_files && !fs::exists(entry.path))
      fail(errc::missing_file, "manifest references missing file " + entry.path);
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(errc::io_failure, "cannot write manifest " + path);
  const fs::path base = fs::path(path).parent_path();
  out << "path,label,split\n";
  const fs::path abs_base = fs::absolute(base.empty() ? fs::path(".") : base);
  for (const ManifestEntry& e : manifest.entries) {
    // keep paths relative to the manifest when possible, for portability
    std::string p = e.path;
    std::error_code ec;
    const fs::path rel = fs::relative(fs::absolute(e.path), abs_base, ec);
    if (!ec && !rel.empty()) p = rel.string();
    out << p << ',' << e.label << ','
        << (e.split == Split::internal ? "internal" : "external") << '\n';
  }
  if (!out) fail(errc::io_failure, "write failed for manifest " + path);
}

}  // namespace oodgate
