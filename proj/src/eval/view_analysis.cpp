#include <random>

#include "activeview/errors.hpp"
#include "activeview/eval/eval.hpp"
#include "activeview/numcore/optim.hpp"

namespace activeview {

namespace {

struct Probe {
  Affine<MatrixXd> hidden;
  Affine<MatrixXd> out;
};

// Single-view MLP probe, full-batch Adam on cross-entropy.
Probe train_probe(const MatrixXd& x, const std::vector<Index>& labels, Index classes, const ProbeConfig& cfg,
                  std::mt19937_64& rng) {
  Probe p{detail::init_affine<double>(x.cols(), cfg.hidden, rng), detail::init_affine<double>(cfg.hidden, classes, rng)};
  std::vector<MatrixXd*> params{&p.hidden.weight, &p.hidden.bias, &p.out.weight, &p.out.bias};
  auto state = make_adam<double>(params);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Tape<double> tape;
    const Affine<Var<double>> h{tape.leaf(p.hidden.weight), tape.leaf(p.hidden.bias)};
    const Affine<Var<double>> o{tape.leaf(p.out.weight), tape.leaf(p.out.bias)};
    const auto logits = affine(o, tanh(affine(h, tape.constant(x))));
    const auto loss = scale(sum(log_floor(pick(softmax_rows(logits), labels))), -1.0 / double(x.rows()));
    tape.backward(loss);
    const std::vector<MatrixXd> grads{h.weight.grad(), h.bias.grad(), o.weight.grad(), o.bias.grad()};
    optim_step<double>(state, params, grads, cfg.lr);
  }
  return p;
}

}  // namespace

ViewAnalysis summarize_view_accuracy(MatrixXd accuracy) {
  ViewAnalysis a;
  const Index views = accuracy.rows();
  const Index classes = accuracy.cols();
  if (views == 0 || classes == 0) throw ContractViolation("view analysis: empty accuracy matrix");
  a.gap.resize(classes);
  for (Index c = 0; c < classes; ++c) {
    a.gap(c) = accuracy.col(c).maxCoeff() - accuracy.col(c).minCoeff();
    Index best = 0;
    for (Index v = 1; v < views; ++v)
      if (accuracy(v, c) > accuracy(best, c)) best = v;
    a.best_view.push_back(best);
  }
  a.mean_gap = a.gap.mean();
  // Rankings disagree when the most discriminative view is not the same for every class.
  for (Index c = 1; c < classes; ++c)
    if (a.best_view[c] != a.best_view[0]) a.ranking_inconsistent = true;
  a.accuracy = std::move(accuracy);
  return a;
}

ViewAnalysis per_view_analysis(const Dataset& train, const Dataset& test, const ProbeConfig& cfg) {
  if (train.view_count() != test.view_count() || train.classes != test.classes ||
      train.feature_dim() != test.feature_dim())
    throw ContractViolation("per_view_analysis: train and test are not aligned");
  const Index views = train.view_count();
  const Index classes = train.classes;
  std::mt19937_64 rng(cfg.seed);
  MatrixXd accuracy = MatrixXd::Zero(views, classes);
  VectorXd per_class_count = VectorXd::Zero(classes);
  for (Index i = 0; i < test.size(); ++i) per_class_count(test.labels[i]) += 1;
  for (Index v = 0; v < views; ++v) {
    const Probe p = train_probe(train.views[v], train.labels, classes, cfg, rng);
    const MatrixXd logits = affine(p.out, tanh(affine(p.hidden, test.views[v])));
    for (Index i = 0; i < test.size(); ++i) {
      Index label_hat = 0;
      logits.row(i).maxCoeff(&label_hat);
      if (label_hat == test.labels[i]) accuracy(v, test.labels[i]) += 1;
    }
  }
  for (Index c = 0; c < classes; ++c)
    if (per_class_count(c) > 0) accuracy.col(c) /= per_class_count(c);
  return summarize_view_accuracy(std::move(accuracy));
}

}  // namespace activeview
