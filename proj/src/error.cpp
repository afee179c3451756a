#include "oodgate/error.hpp"

namespace oodgate {

const char* errc_name(errc code) {
  switch (code) {
    case errc::unsupported_format: return "UnsupportedFormat";
    case errc::corrupt_stream: return "CorruptStream";
    case errc::zero_dimension: return "ZeroDimension";
    case errc::not_color: return "NotColor";
    case errc::too_small: return "TooSmall";
    case errc::too_narrow: return "TooNarrow";
    case errc::degenerate_points: return "Degenerate";
    case errc::schema_mismatch: return "SchemaMismatch";
    case errc::single_class: return "SingleClass";
    case errc::too_few_samples: return "TooFewSamples";
    case errc::too_many_features: return "TooManyFeatures";
    case errc::empty_sample: return "EmptySample";
    case errc::class_too_small: return "ClassTooSmall";
    case errc::empty_input: return "EmptyInput";
    case errc::no_models: return "NoModels";
    case errc::duplicate_path: return "DuplicatePath";
    case errc::bad_label: return "BadLabel";
    case errc::bad_split: return "BadSplit";
    case errc::missing_file: return "MissingFile";
    case errc::empty_manifest: return "EmptyManifest";
    case errc::checksum_mismatch: return "ChecksumMismatch";
    case errc::version_unsupported: return "VersionUnsupported";
    case errc::missing_model: return "MissingModel";
    case errc::bad_config: return "BadConfig";
    case errc::io_failure: return "IoFailure";
  }
  return "UnknownError";
}

int errc_exit_code(errc code) {
  switch (code) {
    case errc::missing_file:
    case errc::missing_model:
    case errc::io_failure:
      return 3;
    default:
      return 2;
  }
}

}  // namespace oodgate
