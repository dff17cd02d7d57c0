#include "activeview/env/dataset.hpp"

#include <cstring>

#include "activeview/errors.hpp"

namespace activeview {

MultiViewSample Dataset::sample(Index i) const {
  if (i < 0 || i >= size()) throw IndexError("Dataset::sample: index out of range");
  MultiViewSample s;
  s.id = ids[i];
  s.label = labels[i];
  for (const auto& v : views) s.views.push_back(v.row(i).transpose());
  return s;
}

MatrixXd Dataset::gather(Index view, const std::vector<Index>& rows) const {
  const MatrixXd& src = views.at(view);
  MatrixXd out(static_cast<Index>(rows.size()), src.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = src.row(rows[k]);
  return out;
}

MatrixXd Dataset::gather(const std::vector<Index>& view_of, const std::vector<Index>& rows) const {
  if (view_of.size() != rows.size()) throw ContractViolation("Dataset::gather: one view per row");
  MatrixXd out(static_cast<Index>(rows.size()), feature_dim());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = views.at(view_of[k]).row(rows[k]);
  return out;
}

void Dataset::validate() const {
  if (classes < 1) throw SchemaError("dataset: class count must be positive");
  if (views.empty()) throw SchemaError("dataset: no views");
  if (ids.size() != labels.size()) throw SchemaError("dataset: ids and labels differ in length");
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].rows() != size()) throw AlignmentError("dataset: view " + std::to_string(v) + " has wrong sample count");
    if (views[v].cols() != feature_dim()) throw SchemaError("dataset: view " + std::to_string(v) + " has wrong dimension");
  }
  for (Index i = 0; i < size(); ++i)
    if (labels[i] < 0 || labels[i] >= classes)
      throw SchemaError("dataset: sample " + ids[i] + " has label " + std::to_string(labels[i]) + " outside [0, " +
                        std::to_string(classes) + ")");
  if (!class_groups.empty() && static_cast<Index>(class_groups.size()) != classes)
    throw SchemaError("dataset: class group map has wrong length");
}

Dataset make_dataset(const std::vector<MultiViewSample>& samples, Index classes, Index view_count, Split split) {
  Dataset d;
  d.classes = classes;
  d.split = split;
  const Index n = static_cast<Index>(samples.size());
  const Index dim = samples.empty() || samples.front().views.empty() ? 0 : samples.front().views.front().size();
  d.views.assign(static_cast<std::size_t>(view_count), MatrixXd(n, dim));
  for (Index i = 0; i < n; ++i) {
    const auto& s = samples[i];
    if (static_cast<Index>(s.views.size()) != view_count)
      throw AlignmentError("sample " + s.id + " has " + std::to_string(s.views.size()) + " of " +
                           std::to_string(view_count) + " views");
    for (Index v = 0; v < view_count; ++v) {
      if (s.views[v].size() != dim) throw SchemaError("sample " + s.id + ": view " + std::to_string(v) + " dimension");
      d.views[v].row(i) = s.views[v].transpose();
    }
    d.ids.push_back(s.id);
    d.labels.push_back(s.label);
  }
  for (Index c = 0; c < classes; ++c) d.class_names.push_back("class_" + std::to_string(c));
  for (Index v = 0; v < view_count; ++v) d.view_names.push_back("view_" + std::to_string(v));
  d.validate();
  return d;
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.ids != b.ids || a.labels != b.labels || a.classes != b.classes || a.class_names != b.class_names ||
      a.view_names != b.view_names || a.class_groups != b.class_groups || a.split != b.split ||
      a.views.size() != b.views.size())
    return false;
  for (std::size_t v = 0; v < a.views.size(); ++v) {
    if (a.views[v].rows() != b.views[v].rows() || a.views[v].cols() != b.views[v].cols()) return false;
    if (std::memcmp(a.views[v].data(), b.views[v].data(), sizeof(double) * a.views[v].size()) != 0) return false;
  }
  return true;
}

}  // namespace activeview
