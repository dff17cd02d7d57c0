#include "activeview/env/synthetic.hpp"

#include <cstdio>
#include <random>

#include "activeview/errors.hpp"

namespace activeview {

void SynthConfig::validate() const {
  if (classes < 1) throw ParameterError("classes: must be >= 1");
  if (groups < 1) throw ParameterError("groups: must be >= 1");
  if (classes % groups != 0) throw ParameterError("classes: must be divisible by groups");
  if (views < 2) throw ParameterError("views: must be >= 2 so at least one view is non-discriminative");
  if (feature_dim < 1) throw ParameterError("feature_dim: must be >= 1");
  if (train_per_class < 1) throw ParameterError("train_per_class: must be >= 1");
  if (test_per_class < 1) throw ParameterError("test_per_class: must be >= 1");
  if (!(noise >= 0)) throw ParameterError("noise: must be >= 0");
  if (!(group_signal >= 0)) throw ParameterError("group_signal: must be >= 0");
  if (!(class_signal >= 0)) throw ParameterError("class_signal: must be >= 0");
}

Index group_of(const SynthConfig& cfg, Index label) { return label / (cfg.classes / cfg.groups); }

Index discriminative_view(const SynthConfig& cfg, Index group) { return (group * cfg.views) / cfg.groups; }

namespace {

// Gaussian vectors orthonormalised within a group while the group fits in
// the feature space; plain unit vectors otherwise.
std::vector<VectorXd> class_directions(const SynthConfig& cfg, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index per_group = cfg.classes / cfg.groups;
  std::vector<VectorXd> dirs;
  for (Index g = 0; g < cfg.groups; ++g) {
    const std::size_t start = dirs.size();
    for (Index k = 0; k < per_group; ++k) {
      VectorXd d(cfg.feature_dim);
      for (Index j = 0; j < cfg.feature_dim; ++j) d(j) = normal(rng);
      if (per_group <= cfg.feature_dim)
        for (std::size_t prev = start; prev < dirs.size(); ++prev) d -= dirs[prev].dot(d) * dirs[prev];
      d.normalize();
      dirs.push_back(d);
    }
  }
  return dirs;
}

Dataset draw_split(const SynthConfig& cfg, const std::vector<MatrixXd>& group_means,
                   const std::vector<VectorXd>& directions, Index per_class, Split split, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset d;
  d.classes = cfg.classes;
  d.split = split;
  const Index n = cfg.classes * per_class;
  d.views.assign(static_cast<std::size_t>(cfg.views), MatrixXd(n, cfg.feature_dim));
  const char* prefix = split == Split::kTrain ? "train" : "test";
  Index row = 0;
  for (Index c = 0; c < cfg.classes; ++c) {
    const Index g = group_of(cfg, c);
    const Index planted = discriminative_view(cfg, g);
    for (Index k = 0; k < per_class; ++k, ++row) {
      char id[32];
      std::snprintf(id, sizeof(id), "%s-%06ld", prefix, static_cast<long>(row));
      d.ids.emplace_back(id);
      d.labels.push_back(c);
      for (Index v = 0; v < cfg.views; ++v) {
        for (Index j = 0; j < cfg.feature_dim; ++j) {
          double x = group_means[g](v, j) + cfg.noise * normal(rng);
          if (v == planted) x += cfg.class_signal * directions[c](j);
          d.views[v](row, j) = x;
        }
      }
    }
  }
  for (Index c = 0; c < cfg.classes; ++c) {
    d.class_names.push_back("class_" + std::to_string(c));
    d.class_groups.push_back(group_of(cfg, c));
  }
  for (Index v = 0; v < cfg.views; ++v) d.view_names.push_back("view_" + std::to_string(v));
  return d;
}

}  // namespace

std::pair<Dataset, Dataset> generate_synthetic(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<MatrixXd> group_means;
  for (Index g = 0; g < cfg.groups; ++g) {
    MatrixXd m(cfg.views, cfg.feature_dim);
    for (Index v = 0; v < cfg.views; ++v)
      for (Index j = 0; j < cfg.feature_dim; ++j) m(v, j) = cfg.group_signal * normal(rng);
    group_means.push_back(m);
  }
  const auto directions = class_directions(cfg, rng);
  Dataset train = draw_split(cfg, group_means, directions, cfg.train_per_class, Split::kTrain, rng);
  Dataset test = draw_split(cfg, group_means, directions, cfg.test_per_class, Split::kTest, rng);
  return {std::move(train), std::move(test)};
}

}  // namespace activeview
