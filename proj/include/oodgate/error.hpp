#pragma once

#include <stdexcept>
#include <string>

namespace oodgate {

// Every failure the pipeline can raise deliberately. The CLI maps these to
// exit codes: 2 for input/validation problems, 3 for OS-level I/O failures,
// 4 for anything unexpected (not represented here).
enum class errc {
  // imaging
  unsupported_format,
  corrupt_stream,
  zero_dimension,
  not_color,
  too_small,
  too_narrow,
  degenerate_points,
  // features / forest
  schema_mismatch,
  single_class,
  too_few_samples,
  // attribution
  too_many_features,
  empty_sample,
  // evaluation
  class_too_small,
  empty_input,
  no_models,
  // manifests / datasets
  duplicate_path,
  bad_label,
  bad_split,
  missing_file,
  empty_manifest,
  // model files
  checksum_mismatch,
  version_unsupported,
  missing_model,
  // config
  bad_config,
  // filesystem
  io_failure,
};

const char* errc_name(errc code);

// 2 = validation error, 3 = I/O error (per the CLI contract).
int errc_exit_code(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code) {}

  errc code() const { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool ok, errc code, const std::string& message) {
  if (!ok) fail(code, message);
}

}  // namespace oodgate
