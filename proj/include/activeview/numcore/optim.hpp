#ifndef ACTIVEVIEW_NUMCORE_OPTIM_HPP_
#define ACTIVEVIEW_NUMCORE_OPTIM_HPP_

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "activeview/errors.hpp"
#include "activeview/numcore/types.hpp"

namespace activeview {

/// base_lr * (1 + cos(pi * epoch / total_epochs)) / 2
template <typename Scalar>
Scalar cosine_lr(int epoch, int total_epochs, Scalar base_lr) {
  if (total_epochs < 1) throw ParameterError("cosine_lr: total_epochs must be >= 1");
  if (epoch < 0 || epoch > total_epochs) throw ParameterError("cosine_lr: epoch outside [0, total_epochs]");
  if (epoch == total_epochs) return Scalar(0);
  return base_lr * (Scalar(1) + std::cos(std::numbers::pi_v<Scalar> * Scalar(epoch) / Scalar(total_epochs))) /
         Scalar(2);
}

enum class OptimKind { kSgdMomentum, kAdam };

template <typename Scalar>
struct OptimState {
  OptimKind kind = OptimKind::kSgdMomentum;
  Scalar momentum = Scalar(0.9);
  Scalar beta1 = Scalar(0.9);
  Scalar beta2 = Scalar(0.999);
  Scalar epsilon = Scalar(1e-8);
  long step = 0;
  std::vector<Matrix<Scalar>> first;   // velocity (SGD) or first moment (Adam)
  std::vector<Matrix<Scalar>> second;  // Adam only
};

template <typename Scalar>
OptimState<Scalar> make_sgd_momentum(std::span<Matrix<Scalar>* const> params, Scalar momentum = Scalar(0.9)) {
  OptimState<Scalar> state;
  state.kind = OptimKind::kSgdMomentum;
  state.momentum = momentum;
  for (const auto* p : params) state.first.push_back(Matrix<Scalar>::Zero(p->rows(), p->cols()));
  return state;
}

template <typename Scalar>
OptimState<Scalar> make_adam(std::span<Matrix<Scalar>* const> params, Scalar beta1 = Scalar(0.9),
                             Scalar beta2 = Scalar(0.999), Scalar epsilon = Scalar(1e-8)) {
  OptimState<Scalar> state;
  state.kind = OptimKind::kAdam;
  state.beta1 = beta1;
  state.beta2 = beta2;
  state.epsilon = epsilon;
  for (const auto* p : params) {
    state.first.push_back(Matrix<Scalar>::Zero(p->rows(), p->cols()));
    state.second.push_back(Matrix<Scalar>::Zero(p->rows(), p->cols()));
  }
  return state;
}

/// One in-place update. SGD-momentum: v = mu v + g, p -= lr v.
/// Adam: bias-corrected moments, p -= lr m_hat / (sqrt(v_hat) + eps).
template <typename Scalar>
void optim_step(OptimState<Scalar>& state, std::span<Matrix<Scalar>* const> params,
                std::span<const Matrix<Scalar>> grads, Scalar lr) {
  if (params.size() != grads.size() || params.size() != state.first.size())
    throw ContractViolation("optim_step: parameter, gradient and state counts differ");
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto& p = *params[k];
    if (p.rows() != grads[k].rows() || p.cols() != grads[k].cols() || p.rows() != state.first[k].rows() ||
        p.cols() != state.first[k].cols())
      throw ContractViolation("optim_step: shape mismatch at parameter " + std::to_string(k));
  }
  ++state.step;
  if (state.kind == OptimKind::kSgdMomentum) {
    for (std::size_t k = 0; k < params.size(); ++k) {
      state.first[k] = state.momentum * state.first[k] + grads[k];
      *params[k] -= lr * state.first[k];
    }
    return;
  }
  const Scalar c1 = Scalar(1) - std::pow(state.beta1, Scalar(state.step));
  const Scalar c2 = Scalar(1) - std::pow(state.beta2, Scalar(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    state.first[k] = state.beta1 * state.first[k] + (Scalar(1) - state.beta1) * grads[k];
    state.second[k] = state.beta2 * state.second[k] + (Scalar(1) - state.beta2) * grads[k].cwiseAbs2();
    const auto m_hat = state.first[k].array() / c1;
    const auto v_hat = state.second[k].array() / c2;
    params[k]->array() -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
  }
}

}  // namespace activeview

#endif  // ACTIVEVIEW_NUMCORE_OPTIM_HPP_
