#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "psaug/feature_matrix.hpp"

namespace psaug {

// SPGM feature file, all integers little-endian:
//
//   offset  size  field
//   0       4     magic "SPGM"
//   4       2     version (u16) = 1
//   6       4     frames T (u32)
//   10      4     bins F (u32)
//   14      4*T*F payload, IEEE-754 binary32, row-major (frame-major)
//
// The file ends exactly after the payload.
inline constexpr std::size_t kSpgmHeaderSize = 14;
inline constexpr std::uint16_t kSpgmVersion = 1;

std::vector<unsigned char> encode_features(const FeatureMatrix& matrix);

/// Throws FormatError (with byte offset) on bad magic, version, dimensions,
/// truncation or trailing bytes; `source` names the input in messages.
FeatureMatrix decode_features(std::span<const unsigned char> bytes,
                              const std::string& source = "<memory>");

/// Throws IoError if the file cannot be opened, FormatError on bad content.
FeatureMatrix read_features(const std::filesystem::path& path);

/// Writes to a temporary sibling, then renames over `path`.
/// Throws IoError with path context on failure.
void write_features(const FeatureMatrix& matrix, const std::filesystem::path& path);

struct ManifestRecord {
  std::string sample_id;
  std::string feature_path;
  double loss = 0.0;

  friend bool operator==(const ManifestRecord&, const ManifestRecord&) = default;
};

using BatchManifest = std::vector<ManifestRecord>;

// Manifest grammar (UTF-8, one record per line):
//
//   line    := blank | comment | record
//   comment := optional whitespace, '#', anything
//   record  := sample_id WS feature_path WS loss
//
// Fields are separated by runs of spaces or tabs and may not contain
// whitespace. sample_id must be unique; loss must parse as a finite,
// non-negative decimal number. Relative feature paths are resolved against
// the manifest's directory by resolve_feature_path.

/// Throws ValidationError naming the 1-based line on any violation.
BatchManifest parse_manifest(const std::string& text, const std::string& source = "<manifest>");
std::string format_manifest(const BatchManifest& manifest);

BatchManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const BatchManifest& manifest, const std::filesystem::path& path);

std::filesystem::path resolve_feature_path(const std::filesystem::path& manifest_path,
                                           const std::string& feature_path);

}  // namespace psaug
