#pragma once

#include <string>

#include "oodgate/evaluation.hpp"

namespace oodgate {

// CSV with the exact header "path,label,split"; labels must be 0 or 1 and
// split one of internal/external. Relative paths are resolved against the
// manifest's directory. Errors: DuplicatePath, BadLabel, BadSplit,
// MissingFile (with check_files), CorruptStream for a malformed header.
DatasetManifest load_manifest(const std::string& path, bool check_files = false);

void save_manifest(const DatasetManifest& manifest, const std::string& path);

}  // namespace oodgate
