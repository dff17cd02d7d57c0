#ifndef ACTIVEVIEW_TESTS_FIXTURES_HPP_
#define ACTIVEVIEW_TESTS_FIXTURES_HPP_

#include <algorithm>
#include <numeric>
#include <random>

#include "activeview/env/synthetic.hpp"
#include "activeview/nets/model.hpp"
#include "activeview/numcore/grad_check.hpp"
#include "activeview/objectives/objectives.hpp"
#include "activeview/pipeline/pipeline.hpp"

namespace activeview::testing {

inline MatrixXd random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  MatrixXd m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

inline ModelDims tiny_dims(ExtractorKind kind = ExtractorKind::kMlp) {
  ModelDims d;
  d.feature_dim = 3;
  d.classes = 4;
  d.views = 3;
  d.hidden_dim = 4;
  d.extractor = kind;
  d.extractor_width = 4;
  d.extractor_out_dim = 3;
  return d;
}

/// Small planted dataset: C=6, G=2, V=4.
inline SynthConfig smoke_synth(std::uint64_t seed = 0) {
  SynthConfig c;
  c.classes = 6;
  c.groups = 2;
  c.views = 4;
  c.feature_dim = 8;
  c.train_per_class = 20;
  c.test_per_class = 10;
  c.seed = seed;
  return c;
}

inline TrainConfig smoke_train(std::uint64_t seed = 0) {
  TrainConfig c;
  c.stage1_epochs = 3;
  c.stage2_epochs = 3;
  c.stage3_epochs = 3;
  c.end_to_end_epochs = 3;
  c.hidden_dim = 16;
  c.extractor_width = 16;
  c.extractor_out_dim = 8;
  c.seed = seed;
  return c;
}

/// Stage I loss gradient through extractor, R_e and classifier of an MLP
/// model. The tempered target is detached, so the finite differences hold it
/// at its value for the unperturbed parameters.
inline double stage1_grad_error(const ModelParams<double>& m, const std::vector<MatrixXd>& xs,
                                const std::vector<Index>& labels, double h) {
  const auto& g = m.gru_e;
  const std::vector<MatrixXd> params{m.extractor_hidden.weight, m.extractor_hidden.bias, m.extractor_out.weight,
                                     m.extractor_out.bias, g.w_z, g.u_z, g.b_z, g.w_r, g.u_r, g.b_r, g.w_n, g.u_n,
                                     g.b_n, m.classifier.weight, m.classifier.bias};
  const auto step_logits = [&xs](Tape<double>& t, const std::vector<Var<double>>& p) {
    ModelWeights<Var<double>> b;
    b.extractor_kind = ExtractorKind::kMlp;
    b.extractor_hidden = {p[0], p[1]};
    b.extractor_out = {p[2], p[3]};
    b.gru_e = {p[4], p[5], p[6], p[7], p[8], p[9], p[10], p[11], p[12]};
    b.classifier = {p[13], p[14]};
    std::vector<Var<double>> logits;
    Var<double> hid = t.constant(MatrixXd::Zero(xs.front().rows(), p[5].value().rows()));
    for (const auto& x : xs) {
      hid = gru_step(b.gru_e, hid, extract(b, t.constant(x)));
      logits.push_back(affine(b.classifier, hid));
    }
    return logits;
  };
  std::vector<MatrixXd> targets;
  {
    Tape<double> t;
    std::vector<Var<double>> vars;
    for (const auto& p : params) vars.push_back(t.leaf(p, false));
    for (const auto& l : step_logits(t, vars)) targets.push_back(tempered_softmax_rows<double>(l.value(), h));
  }
  const LossBuilder<double> analytic = [&](Tape<double>& t, const std::vector<Var<double>>& p) {
    return stage1_loss(step_logits(t, p), labels, h, true).total;
  };
  const LossBuilder<double> frozen = [&](Tape<double>& t, const std::vector<Var<double>>& p) {
    const auto logits = step_logits(t, p);
    Var<double> em = t.constant(MatrixXd::Zero(1, 1));
    for (std::size_t k = 0; k < logits.size(); ++k)
      em = add(em, sum(squared_distance_rows(softmax_rows(logits[k]), targets[k])));
    const double norm = 1.0 / double(labels.size() * logits.size());
    return add(stage1_loss(logits, labels, h, false).total, scale(em, norm));
  };
  return grad_check<double>(analytic, frozen, params, 1e-5);
}

// Per-sample enumeration with std::next_permutation: sample i counts at
// length t iff some ordered t-prefix of some permutation classifies it.
inline VectorXd enumerate_upper_bound(const ModelParams<double>& m, const Dataset& d) {
  const Index steps = d.view_count();
  VectorXd hits = VectorXd::Zero(steps);
  for (Index i = 0; i < d.size(); ++i) {
    std::vector<bool> found(static_cast<std::size_t>(steps), false);
    std::vector<Index> perm(static_cast<std::size_t>(steps));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      MatrixXd h = MatrixXd::Zero(1, hidden_dim(m));
      for (Index t = 0; t < steps; ++t) {
        h = gru_step(m.gru_e, h, extract(m, MatrixXd(d.views[perm[t]].row(i))));
        Index best = 0;
        classify(m, h).probs.row(0).maxCoeff(&best);
        if (best == d.labels[i]) found[t] = true;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (Index t = 0; t < steps; ++t) hits(t) += found[t] ? 1 : 0;
  }
  return hits / double(d.size());
}

}  // namespace activeview::testing

#endif  // ACTIVEVIEW_TESTS_FIXTURES_HPP_
