#ifndef ACTIVEVIEW_ENV_DATASET_HPP_
#define ACTIVEVIEW_ENV_DATASET_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "activeview/numcore/types.hpp"

namespace activeview {

/// One object seen from V aligned views.
struct MultiViewSample {
  std::string id;
  Index label = 0;
  std::vector<VectorXd> views;  // views[v] is the feature vector of aligned view v
};

enum class Split { kTrain, kTest };

/**
 * Aligned multi-view dataset held view-major: views[v].row(i) is the feature
 * vector of sample i seen from view v.
 */
struct Dataset {
  std::vector<std::string> ids;
  std::vector<Index> labels;
  std::vector<MatrixXd> views;
  Index classes = 0;
  std::vector<std::string> class_names;
  std::vector<std::string> view_names;
  std::vector<Index> class_groups;  // optional class -> group map; empty if unknown
  Split split = Split::kTrain;

  Index size() const { return static_cast<Index>(labels.size()); }
  Index view_count() const { return static_cast<Index>(views.size()); }
  Index feature_dim() const { return views.empty() ? 0 : views.front().cols(); }

  MultiViewSample sample(Index i) const;

  /// Rows `rows` of view v, stacked in the given order.
  MatrixXd gather(Index view, const std::vector<Index>& rows) const;

  /// Per-row views: out.row(k) = views[view_of[k]].row(rows[k]).
  MatrixXd gather(const std::vector<Index>& view_of, const std::vector<Index>& rows) const;

  /// Throws SchemaError / AlignmentError if invariants are broken.
  void validate() const;
};

Dataset make_dataset(const std::vector<MultiViewSample>& samples, Index classes, Index view_count,
                     Split split = Split::kTrain);

bool operator==(const Dataset& a, const Dataset& b);

}  // namespace activeview

#endif  // ACTIVEVIEW_ENV_DATASET_HPP_
