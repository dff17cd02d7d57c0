#ifndef ACTIVEVIEW_NUMCORE_FUNCTIONAL_HPP_
#define ACTIVEVIEW_NUMCORE_FUNCTIONAL_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "activeview/errors.hpp"
#include "activeview/numcore/types.hpp"

namespace activeview {

/// Floor applied to probabilities before taking a logarithm.
inline constexpr double kProbabilityFloor = 1e-12;

template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  if (logits.size() == 0) throw DimensionError("softmax: empty logits");
  const Scalar shift = logits.maxCoeff();
  Vector<Scalar> out = (logits.derived().reshaped().array() - shift).exp().matrix();
  out /= out.sum();
  return out;
}

template <typename Derived>
Vector<typename Derived::Scalar> tempered_softmax(const Eigen::MatrixBase<Derived>& logits,
                                                  typename Derived::Scalar temperature) {
  if (!(temperature > 0)) throw ParameterError("tempered_softmax: temperature must be positive");
  return softmax((logits.derived().reshaped() / temperature).eval());
}

/// -log(probs[label]) with the probability floored at kProbabilityFloor.
template <typename Derived>
typename Derived::Scalar cross_entropy_onehot(const Eigen::MatrixBase<Derived>& probs, Index label) {
  using Scalar = typename Derived::Scalar;
  if (label < 0 || label >= probs.size())
    throw IndexError("cross_entropy_onehot: label " + std::to_string(label) + " outside [0, " +
                     std::to_string(probs.size()) + ")");
  return -std::log(std::max<Scalar>(probs.derived().reshaped()(label), Scalar(kProbabilityFloor)));
}

/// Shannon entropy in nats; zero entries contribute nothing.
template <typename Derived>
typename Derived::Scalar entropy(const Eigen::MatrixBase<Derived>& probs) {
  using Scalar = typename Derived::Scalar;
  Scalar h = 0;
  for (Index i = 0; i < probs.size(); ++i) {
    const Scalar p = probs.derived().reshaped()(i);
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

template <typename Derived>
Index argmax(const Eigen::MatrixBase<Derived>& values) {
  Index best = 0;
  values.derived().reshaped().maxCoeff(&best);
  return best;
}

// ---------------------------------------------------------------------------
// Batched primitives over plain matrices. Each has a tape-recording twin in
// tape.hpp with the same name, so model and loss code can be written once and
// evaluated either eagerly or under differentiation.
// ---------------------------------------------------------------------------

template <typename Scalar>
Matrix<Scalar> matmul(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  if (a.cols() != b.rows()) throw ContractViolation("matmul: inner dimensions differ");
  return a * b;
}

/// a + bias broadcast over rows; bias is 1 x a.cols().
template <typename Scalar>
Matrix<Scalar> add_row(const Matrix<Scalar>& a, const Matrix<Scalar>& bias) {
  if (bias.rows() != 1 || bias.cols() != a.cols()) throw ContractViolation("add_row: bias shape");
  return a.rowwise() + bias.row(0);
}

template <typename Scalar>
Matrix<Scalar> add(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  return a + b;
}

template <typename Scalar>
Matrix<Scalar> sub(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  return a - b;
}

template <typename Scalar>
Matrix<Scalar> hadamard(const Matrix<Scalar>& a, const Matrix<Scalar>& b) {
  return a.cwiseProduct(b);
}

template <typename Scalar>
Matrix<Scalar> scale(const Matrix<Scalar>& a, Scalar s) {
  return a * s;
}

template <typename Scalar>
Matrix<Scalar> one_minus(const Matrix<Scalar>& a) {
  return (Scalar(1) - a.array()).matrix();
}

template <typename Scalar>
Matrix<Scalar> sigmoid(const Matrix<Scalar>& a) {
  return (Scalar(1) / (Scalar(1) + (-a.array()).exp())).matrix();
}

template <typename Scalar>
Matrix<Scalar> tanh(const Matrix<Scalar>& a) {
  return a.array().tanh().matrix();
}

template <typename Scalar>
Matrix<Scalar> exp(const Matrix<Scalar>& a) {
  return a.array().exp().matrix();
}

template <typename Scalar>
Matrix<Scalar> square(const Matrix<Scalar>& a) {
  return a.array().square().matrix();
}

template <typename Scalar>
Matrix<Scalar> log_floor(const Matrix<Scalar>& a, Scalar floor = Scalar(kProbabilityFloor)) {
  return a.array().max(floor).log().matrix();
}

/// Row-wise softmax; entries where mask(i, j) == 0 get probability exactly 0.
/// An empty mask means no masking.
template <typename Scalar>
Matrix<Scalar> masked_softmax_rows(const Matrix<Scalar>& logits, const Matrix<Scalar>& mask) {
  if (logits.cols() == 0) throw DimensionError("softmax: empty logits");
  const bool masked = mask.size() != 0;
  if (masked && (mask.rows() != logits.rows() || mask.cols() != logits.cols()))
    throw ContractViolation("masked_softmax_rows: mask shape");
  Matrix<Scalar> out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    Scalar shift = -std::numeric_limits<Scalar>::infinity();
    bool open = false, nan = false;
    for (Index j = 0; j < logits.cols(); ++j)
      if (!masked || mask(i, j) != 0) {
        open = true;
        nan = nan || std::isnan(logits(i, j));
        shift = std::max(shift, logits(i, j));
      }
    if (!open) throw ContractViolation("masked_softmax_rows: every entry of a row is masked");
    // Non-finite logits propagate as NaN so callers can detect divergence.
    if (nan || !std::isfinite(shift)) {
      out.row(i).setConstant(std::numeric_limits<Scalar>::quiet_NaN());
      continue;
    }
    Scalar total = 0;
    for (Index j = 0; j < logits.cols(); ++j) {
      const Scalar e = (!masked || mask(i, j) != 0) ? std::exp(logits(i, j) - shift) : Scalar(0);
      out(i, j) = e;
      total += e;
    }
    out.row(i) /= total;
  }
  return out;
}

template <typename Scalar>
Matrix<Scalar> softmax_rows(const Matrix<Scalar>& logits) {
  return masked_softmax_rows(logits, Matrix<Scalar>());
}

/// Column vector holding a(i, columns[i]).
template <typename Scalar>
Matrix<Scalar> pick(const Matrix<Scalar>& a, const std::vector<Index>& columns) {
  if (static_cast<Index>(columns.size()) != a.rows()) throw ContractViolation("pick: one column per row");
  Matrix<Scalar> out(a.rows(), 1);
  for (Index i = 0; i < a.rows(); ++i) {
    if (columns[i] < 0 || columns[i] >= a.cols()) throw IndexError("pick: column out of range");
    out(i, 0) = a(i, columns[i]);
  }
  return out;
}

/// Column vector of per-row entropies (0 log 0 := 0).
template <typename Scalar>
Matrix<Scalar> entropy_rows(const Matrix<Scalar>& probs) {
  Matrix<Scalar> out(probs.rows(), 1);
  for (Index i = 0; i < probs.rows(); ++i) out(i, 0) = entropy(probs.row(i));
  return out;
}

/// Per-row squared Euclidean distance to a constant target.
template <typename Scalar>
Matrix<Scalar> squared_distance_rows(const Matrix<Scalar>& a, const Matrix<Scalar>& target) {
  return (a - target).rowwise().squaredNorm();
}

/// Elementwise min(ratio * adv, clip(ratio, 1 - eps, 1 + eps) * adv).
template <typename Scalar>
Matrix<Scalar> clipped_surrogate(const Matrix<Scalar>& ratio, const Matrix<Scalar>& advantage,
                                 Scalar eps) {
  const auto clipped = ratio.array().max(Scalar(1) - eps).min(Scalar(1) + eps);
  return (ratio.array() * advantage.array()).min(clipped * advantage.array()).matrix();
}

template <typename Scalar>
Matrix<Scalar> sum(const Matrix<Scalar>& a) {
  return Matrix<Scalar>::Constant(1, 1, a.sum());
}

template <typename Scalar>
Matrix<Scalar> mean(const Matrix<Scalar>& a) {
  if (a.size() == 0) throw DimensionError("mean: empty operand");
  return Matrix<Scalar>::Constant(1, 1, a.mean());
}

template <typename Scalar>
const Matrix<Scalar>& value_of(const Matrix<Scalar>& a) {
  return a;
}

template <typename Scalar>
Scalar scalar_of(const Matrix<Scalar>& a) {
  if (a.size() != 1) throw ContractViolation("scalar_of: operand is not 1 x 1");
  return a(0, 0);
}

}  // namespace activeview

#endif  // ACTIVEVIEW_NUMCORE_FUNCTIONAL_HPP_
