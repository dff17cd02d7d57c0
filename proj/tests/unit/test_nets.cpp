#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "activeview/nets/model.hpp"
#include "activeview/nets/serialize.hpp"
#include "activeview/numcore/grad_check.hpp"
#include "fixtures.hpp"

using namespace activeview;
using activeview::testing::random_matrix;
using activeview::testing::tiny_dims;

namespace {

// Loop-by-loop GRU written independently of the Eigen expression code.
std::vector<double> gru_oracle(const GruParams<double>& g, const std::vector<double>& h, const std::vector<double>& x) {
  const std::size_t dh = h.size(), dx = x.size();
  auto gate = [&](const MatrixXd& w, const MatrixXd& u, const MatrixXd& b, const std::vector<double>& hh, Index j) {
    double s = b(0, j);
    for (std::size_t k = 0; k < dx; ++k) s += x[k] * w(Index(k), j);
    for (std::size_t k = 0; k < dh; ++k) s += hh[k] * u(Index(k), j);
    return s;
  };
  std::vector<double> z(dh), r(dh), rh(dh), out(dh);
  for (std::size_t j = 0; j < dh; ++j) {
    z[j] = 1.0 / (1.0 + std::exp(-gate(g.w_z, g.u_z, g.b_z, h, Index(j))));
    r[j] = 1.0 / (1.0 + std::exp(-gate(g.w_r, g.u_r, g.b_r, h, Index(j))));
  }
  for (std::size_t j = 0; j < dh; ++j) rh[j] = r[j] * h[j];
  for (std::size_t j = 0; j < dh; ++j) {
    const double n = std::tanh(gate(g.w_n, g.u_n, g.b_n, rh, Index(j)));
    out[j] = (1 - z[j]) * h[j] + z[j] * n;
  }
  return out;
}

std::vector<double> row(const MatrixXd& m, Index i) {
  std::vector<double> v(static_cast<std::size_t>(m.cols()));
  for (Index j = 0; j < m.cols(); ++j) v[j] = m(i, j);
  return v;
}

ModelParams<double> random_model(std::uint64_t seed, ExtractorKind kind = ExtractorKind::kMlp) {
  std::mt19937_64 rng(seed);
  auto m = init_model<double>(tiny_dims(kind), rng);
  // Non-zero biases so every term of the forward pass is exercised.
  for_each_param(m, [&](Component, std::string_view, MatrixXd& t, std::string_view) {
    if (t.rows() == 1) t = random_matrix(1, t.cols(), rng, 0.3);
  });
  return m;
}

}  // namespace

TEST(Gru, ZeroParamsHalveThePreviousState) {
  std::mt19937_64 rng(1);
  auto m = zeros_like(init_model<double>(tiny_dims(), rng));
  const MatrixXd h = random_matrix(2, 4, rng);
  const MatrixXd x = random_matrix(2, 3, rng);
  EXPECT_LE((gru_step(m.gru_e, h, x) - 0.5 * h).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(gru_step(m.gru_e, MatrixXd(MatrixXd::Zero(2, 4)), x), MatrixXd::Zero(2, 4));
}

TEST(Gru, MatchesLoopOracle) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = random_model(seed);
    std::mt19937_64 rng(seed + 100);
    const MatrixXd h = random_matrix(3, 4, rng);
    const MatrixXd x = random_matrix(3, 3, rng);
    const MatrixXd out = gru_step(m.gru_e, h, x);
    for (Index i = 0; i < 3; ++i) {
      const auto expect = gru_oracle(m.gru_e, row(h, i), row(x, i));
      for (Index j = 0; j < 4; ++j) EXPECT_NEAR(out(i, j), expect[j], 1e-13);
    }
  }
}

TEST(Gru, ShapeMismatchThrows) {
  const auto m = random_model(0);
  EXPECT_THROW(gru_step(m.gru_e, MatrixXd(MatrixXd::Zero(1, 4)), MatrixXd(MatrixXd::Zero(1, 5))), ContractViolation);
  EXPECT_THROW(gru_step(m.gru_e, MatrixXd(MatrixXd::Zero(2, 4)), MatrixXd(MatrixXd::Zero(1, 3))), ContractViolation);
}

TEST(Gru, GradientMatchesFiniteDifferences) {
  const auto m = random_model(3);
  std::mt19937_64 rng(3);
  const MatrixXd h0 = random_matrix(2, 4, rng), x = random_matrix(2, 3, rng);
  const LossBuilder<double> f = [&](Tape<double>& t, const std::vector<Var<double>>& p) {
    const GruWeights<Var<double>> g{p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8]};
    return sum(square(gru_step(g, p[9], t.constant(x))));
  };
  const auto& g = m.gru_e;
  EXPECT_LE(grad_check<double>(f, {g.w_z, g.u_z, g.b_z, g.w_r, g.u_r, g.b_r, g.w_n, g.u_n, g.b_n, h0}, 1e-5), 1e-6);
}

TEST(Extractor, IdentityPassesThrough) {
  const auto m = random_model(0, ExtractorKind::kIdentity);
  std::mt19937_64 rng(0);
  const MatrixXd x = random_matrix(4, 3, rng);
  EXPECT_EQ(extract(m, x), x);
}

TEST(Extractor, ZeroWeightsGiveZeroFeatures) {
  std::mt19937_64 rng(0);
  const auto m = zeros_like(init_model<double>(tiny_dims(), rng));
  EXPECT_EQ(extract(m, random_matrix(2, 3, rng)), MatrixXd::Zero(2, 3));
}

TEST(Extractor, MatchesLoopOracle) {
  const auto m = random_model(7);
  std::mt19937_64 rng(7);
  const MatrixXd x = random_matrix(2, 3, rng);
  const MatrixXd out = extract(m, x);
  for (Index i = 0; i < 2; ++i) {
    std::vector<double> hidden(4);
    for (Index j = 0; j < 4; ++j) {
      double s = m.extractor_hidden.bias(0, j);
      for (Index k = 0; k < 3; ++k) s += x(i, k) * m.extractor_hidden.weight(k, j);
      hidden[j] = std::tanh(s);
    }
    for (Index j = 0; j < 3; ++j) {
      double s = m.extractor_out.bias(0, j);
      for (Index k = 0; k < 4; ++k) s += hidden[k] * m.extractor_out.weight(k, j);
      EXPECT_NEAR(out(i, j), s, 1e-14);
    }
  }
}

TEST(Aggregate, PrefixFoldAndLengthOne) {
  const auto m = random_model(2);
  std::mt19937_64 rng(2);
  std::vector<MatrixXd> seq{random_matrix(1, 3, rng), random_matrix(1, 3, rng), random_matrix(1, 3, rng)};
  EXPECT_EQ(aggregate(m.gru_e, std::vector<MatrixXd>{seq[0]}),
            gru_step(m.gru_e, MatrixXd(MatrixXd::Zero(1, 4)), seq[0]));
  MatrixXd h = MatrixXd::Zero(1, 4);
  for (const auto& f : seq) h = gru_step(m.gru_e, h, f);
  EXPECT_EQ(aggregate(m.gru_e, seq), h);
  const std::vector<MatrixXd> permuted{seq[2], seq[0], seq[1]};
  EXPECT_GT((aggregate(m.gru_e, permuted) - aggregate(m.gru_e, seq)).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_THROW(aggregate(m.gru_e, std::vector<MatrixXd>{}), ContractViolation);
}

TEST(Classifier, ZeroWeightsGiveUniformAndProbsAreSoftmax) {
  std::mt19937_64 rng(0);
  auto z = zeros_like(init_model<double>(tiny_dims(), rng));
  const MatrixXd e = random_matrix(2, 4, rng);
  EXPECT_LE((classify(z, e).probs.array() - 0.25).abs().maxCoeff(), 1e-15);
  const auto m = random_model(4);
  const auto c = classify(m, e);
  for (Index i = 0; i < 2; ++i)
    EXPECT_LE((c.probs.row(i).transpose() - softmax(VectorXd(c.logits.row(i).transpose()))).cwiseAbs().maxCoeff(),
              1e-15);
}

TEST(Actor, MaskedSupportAndNormalization) {
  ModelDims d = tiny_dims();
  d.views = 7;
  std::mt19937_64 rng(9);
  const auto m = init_model<double>(d, rng);
  const MatrixXd s = random_matrix(1, 4, rng);
  MatrixXd mask = MatrixXd::Ones(1, 7);
  mask(0, 2) = mask(0, 5) = 0;
  const MatrixXd pi = act(m, s, mask);
  EXPECT_EQ((pi.array() > 0).count(), 5);
  EXPECT_NEAR(pi.sum(), 1.0, 1e-15);
  const auto z = zeros_like(m);
  EXPECT_LE((act(z, s, MatrixXd()).array() - 1.0 / 7).abs().maxCoeff(), 1e-15);
}

TEST(Value, ZeroAndLinear) {
  std::mt19937_64 rng(10);
  auto m = init_model<double>(tiny_dims(), rng);
  const MatrixXd s = random_matrix(3, 4, rng);
  EXPECT_EQ(value(zeros_like(m), s), MatrixXd::Zero(3, 1));
  m.value_head.bias.setZero();
  EXPECT_LE((value(m, MatrixXd(2.5 * s)) - 2.5 * value(m, s)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Init, UniformFanInBoundsAndZeroBias) {
  std::mt19937_64 rng(11);
  auto m = init_model<double>(ModelDims{}, rng);
  for_each_param(m, [](Component, std::string_view, MatrixXd& t, std::string_view) {
    if (t.rows() == 1) {
      EXPECT_EQ(t.cwiseAbs().maxCoeff(), 0.0);
    } else {
      EXPECT_LE(t.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(double(t.rows())));
    }
  });
}

TEST(Bind, OnlyTrainableComponentsReceiveGradients) {
  const auto m = random_model(12);
  std::mt19937_64 rng(12);
  Tape<double> tape;
  auto b = bind(tape, m, kRecognition);
  const auto x = tape.constant(random_matrix(2, 3, rng));
  const auto h = gru_step(b.gru_s, gru_step(b.gru_e, initial_hidden(b.gru_e, x), extract(b, x)), extract(b, x));
  tape.backward(add(sum(affine(b.classifier, h)), sum(value(b, h))));
  EXPECT_GT(b.gru_e.w_z.grad().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b.gru_s.w_z.grad().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(b.value_head.weight.grad().cwiseAbs().maxCoeff(), 0.0);
  auto mm = m;
  EXPECT_EQ(gradients(b, kRecognition).size(), parameters(mm, kRecognition).size());
}

TEST(ComponentsEqual, DetectsSingleBitChange) {
  const auto a = random_model(13);
  auto b = a;
  EXPECT_TRUE(components_equal(a, b, ComponentSet::all()));
  b.actor.bias(0, 0) = std::nextafter(b.actor.bias(0, 0), 1.0);
  EXPECT_FALSE(components_equal(a, b, ComponentSet::all()));
  EXPECT_TRUE(components_equal(a, b, kRecognition));
}

TEST(Serialize, RoundTripIsBitExact) {
  for (auto kind : {ExtractorKind::kMlp, ExtractorKind::kIdentity}) {
    const auto m = random_model(14, kind);
    std::stringstream buf;
    write_params(buf, m);
    const auto back = read_params(buf);
    EXPECT_EQ(back.extractor_kind, kind);
    EXPECT_TRUE(components_equal(m, back, ComponentSet::all()));
  }
}

TEST(Serialize, CorruptInputIsRejected) {
  std::stringstream bad("XXXXgarbage");
  EXPECT_THROW(read_params(bad), SchemaError);
  const auto m = random_model(15);
  std::stringstream buf;
  write_params(buf, m);
  const std::string bytes = buf.str();
  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(read_params(truncated), SchemaError);
}
