#ifndef ACTIVEVIEW_NUMCORE_GRAD_CHECK_HPP_
#define ACTIVEVIEW_NUMCORE_GRAD_CHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "activeview/numcore/tape.hpp"

namespace activeview {

inline constexpr double kGradFloor = 1e-6;

/// Builds a scalar loss on the given tape from one Var per parameter matrix.
template <typename Scalar>
using LossBuilder = std::function<Var<Scalar>(Tape<Scalar>&, const std::vector<Var<Scalar>>&)>;

template <typename Scalar>
Scalar evaluate_loss(const LossBuilder<Scalar>& loss_fn, const std::vector<Matrix<Scalar>>& params) {
  Tape<Scalar> tape;
  std::vector<Var<Scalar>> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.leaf(p, false));
  return scalar_of(loss_fn(tape, vars));
}

template <typename Scalar>
std::vector<Matrix<Scalar>> analytic_gradients(const LossBuilder<Scalar>& loss_fn,
                                               const std::vector<Matrix<Scalar>>& params) {
  Tape<Scalar> tape;
  std::vector<Var<Scalar>> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.leaf(p, true));
  tape.backward(loss_fn(tape, vars));
  std::vector<Matrix<Scalar>> grads;
  grads.reserve(vars.size());
  for (const auto& v : vars) grads.push_back(v.grad());
  return grads;
}

/**
 * Compares the tape gradient of analytic_fn against central differences of
 * numeric_fn with step fd_step at every coordinate of every parameter. The
 * two differ only when analytic_fn detaches a subexpression; numeric_fn then
 * holds that subexpression at its value for the unperturbed parameters.
 *
 * Returns max |analytic - numeric| / max(kGradFloor, |analytic| + |numeric|);
 * a NaN on either side yields +infinity. Central differences at step 1e-5
 * carry roughly 1e-11 of round-off for O(1) losses, so the floor keeps
 * near-zero gradients from reading as large relative errors.
 */
template <typename Scalar>
Scalar grad_check(const LossBuilder<Scalar>& analytic_fn, const LossBuilder<Scalar>& numeric_fn,
                  std::vector<Matrix<Scalar>> params, Scalar fd_step) {
  const auto analytic = analytic_gradients(analytic_fn, params);
  Scalar worst = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (Index i = 0; i < params[k].size(); ++i) {
      const Scalar saved = params[k].data()[i];
      params[k].data()[i] = saved + fd_step;
      const Scalar up = evaluate_loss(numeric_fn, params);
      params[k].data()[i] = saved - fd_step;
      const Scalar down = evaluate_loss(numeric_fn, params);
      params[k].data()[i] = saved;
      const Scalar numeric = (up - down) / (Scalar(2) * fd_step);
      const Scalar a = analytic[k].data()[i];
      if (std::isnan(a) || std::isnan(numeric)) return std::numeric_limits<Scalar>::infinity();
      const Scalar rel = std::abs(a - numeric) / std::max<Scalar>(Scalar(kGradFloor), std::abs(a) + std::abs(numeric));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

template <typename Scalar>
Scalar grad_check(const LossBuilder<Scalar>& loss_fn, std::vector<Matrix<Scalar>> params, Scalar fd_step) {
  return grad_check(loss_fn, loss_fn, std::move(params), fd_step);
}

}  // namespace activeview

#endif  // ACTIVEVIEW_NUMCORE_GRAD_CHECK_HPP_
