#ifndef ACTIVEVIEW_ENV_SYNTHETIC_HPP_
#define ACTIVEVIEW_ENV_SYNTHETIC_HPP_

#include <cstdint>
#include <string>
#include <utility>

#include "activeview/env/dataset.hpp"

namespace activeview {

/**
 * Planted-view testbed. Classes are split into contiguous groups of C/G.
 * Every view carries a group-specific mean, so the group is visible from any
 * view; the class is only visible on the group's discriminative view, where a
 * class-specific direction is added. The discriminative view index is
 * (group * V) / G.
 */
struct SynthConfig {
  Index classes = 20;
  Index groups = 4;
  Index views = 7;
  Index feature_dim = 16;
  Index train_per_class = 50;
  Index test_per_class = 40;
  double noise = 0.1;
  double group_signal = 1.0;
  double class_signal = 1.0;
  std::uint64_t seed = 0;

  /// Throws ParameterError naming the offending field.
  void validate() const;
};

Index group_of(const SynthConfig& cfg, Index label);
Index discriminative_view(const SynthConfig& cfg, Index group);

/// Flat JSON object keyed by the field names; unknown keys raise SchemaError.
SynthConfig parse_synth_config(const std::string& json_text);
std::string synth_config_json(const SynthConfig& cfg);

/// Pure function of cfg: the same config always yields bit-identical data.
std::pair<Dataset, Dataset> generate_synthetic(const SynthConfig& cfg);

}  // namespace activeview

#endif  // ACTIVEVIEW_ENV_SYNTHETIC_HPP_
