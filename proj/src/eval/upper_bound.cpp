#include "activeview/errors.hpp"
#include "activeview/eval/eval.hpp"

namespace activeview {

namespace {

struct Enumerator {
  const ModelParams<double>& model;
  const std::vector<MatrixXd>& features;
  const std::vector<Index>& labels;
  std::vector<std::vector<bool>> any_correct;  // [depth][sample]
  std::vector<bool> seen;

  void descend(const MatrixXd& h_prev, Index depth) {
    const Index steps = static_cast<Index>(features.size());
    for (Index v = 0; v < steps; ++v) {
      if (seen[v]) continue;
      const MatrixXd h = gru_step(model.gru_e, h_prev, features[v]);
      const MatrixXd probs = classify(model, h).probs;
      auto& hits = any_correct[depth];
      for (Index i = 0; i < probs.rows(); ++i) {
        if (hits[i]) continue;
        Index label_hat = 0;
        probs.row(i).maxCoeff(&label_hat);
        if (label_hat == labels[i]) hits[i] = true;
      }
      if (depth + 1 < steps) {
        seen[v] = true;
        descend(h, depth + 1);
        seen[v] = false;
      }
    }
  }
};

}  // namespace

VectorXd upper_bound_curve(const ModelParams<double>& model, const Dataset& data) {
  const Index n = data.size();
  const Index steps = data.view_count();
  if (n == 0) throw ContractViolation("upper_bound: empty dataset");
  std::vector<MatrixXd> features;
  for (const auto& v : data.views) features.push_back(extract(model, v));
  Enumerator e{model, features, data.labels,
               std::vector<std::vector<bool>>(static_cast<std::size_t>(steps), std::vector<bool>(n, false)),
               std::vector<bool>(static_cast<std::size_t>(steps), false)};
  e.descend(MatrixXd::Zero(n, hidden_dim(model)), 0);
  VectorXd curve(steps);
  for (Index t = 0; t < steps; ++t) {
    Index hits = 0;
    for (bool b : e.any_correct[t]) hits += b ? 1 : 0;
    curve(t) = double(hits) / double(n);
  }
  return curve;
}

double upper_bound(const ModelParams<double>& model, const Dataset& data, Index length) {
  if (length < 1 || length > data.view_count())
    throw ParameterError("upper_bound: trajectory length must lie in [1, V]");
  return upper_bound_curve(model, data)(length - 1);
}

}  // namespace activeview
