#pragma once

#include "aitd/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace aitd {

inline constexpr std::string_view kModelMagic = "AITD";
inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Container layout (all integers little-endian):
///
///   offset 0        4 bytes   magic "AITD"
///   offset 4        u32       format version
///   offset 8        u64       H, header length
///   offset 16       H bytes   header JSON (UTF-8, fixed key order)
///   offset 16+H     u64       B, binary block length
///   offset 24+H     B bytes   concatenated f64 arrays named in header "arrays"
///   offset 24+H+B   u64       FNV-1a 64 of every preceding byte
///
/// Serialization is canonical: the same model always yields the same bytes.
/// See docs/model_format.md.
std::string serialize_model(const TrainedModel& model);

/// Throws BadMagicError, UnsupportedVersionError, TruncatedModelError,
/// ChecksumMismatchError, or ModelFormatError for a malformed header.
TrainedModel deserialize_model(std::string_view bytes, const std::string& source = "<memory>");

/// Atomic (temp file + rename).
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

} // namespace aitd
