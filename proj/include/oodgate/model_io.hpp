#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "oodgate/forest.hpp"

namespace oodgate {

// Binary model container: magic "OGMF", format version, hyperparameters,
// feature schema (names in order), training metadata, node-major trees with
// explicit child offsets, trailing CRC-32. Little-endian, no text floats, so
// the same file predicts identically on every machine.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const ExtraTreesModel& model);

// Errors: CorruptStream (not a model file / truncated), VersionUnsupported,
// ChecksumMismatch.
ExtraTreesModel deserialize_model(std::span<const std::uint8_t> bytes);

void save_model(const ExtraTreesModel& model, const std::string& path);
ExtraTreesModel load_model(const std::string& path);

// load_model plus a guard that the stored feature schema matches this
// build's extractor schema. Errors: SchemaMismatch.
ExtraTreesModel load_model_checked(const std::string& path);

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

}  // namespace oodgate
