#ifndef ACTIVEVIEW_ENV_MANIFEST_HPP_
#define ACTIVEVIEW_ENV_MANIFEST_HPP_

#include <filesystem>
#include <string>

#include "activeview/env/dataset.hpp"

namespace activeview {

/**
 * JSON-lines manifest. Line 1 is the header
 *   {"version":1,"C":..,"V":..,"feature_dim":..,"class_names":[..],
 *    "view_names":[..],"split":"train","class_groups":[..]}
 * and every following line one sample
 *   {"id":"..","label":k,"views":{"0":[..],"1":{"file":"x.bin","offset":n},..}}
 * A view payload is either an inline array of decimals or a reference into a
 * sidecar file of little-endian f64 values (offset counted in values, length
 * feature_dim). Both round-trip bit-exactly.
 */
inline constexpr int kManifestVersion = 1;

enum class PayloadMode { kInline, kSidecar };

/// Writes `path`; in sidecar mode also writes `path` with extension ".bin".
void save_manifest(const Dataset& data, const std::filesystem::path& path, PayloadMode mode = PayloadMode::kInline);

/// Parses and validates a manifest. Missing views raise AlignmentError naming
/// the sample id; label or dimension problems raise SchemaError.
Dataset load_manifest(const std::filesystem::path& path);

}  // namespace activeview

#endif  // ACTIVEVIEW_ENV_MANIFEST_HPP_
