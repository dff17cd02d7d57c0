#ifndef ACTIVEVIEW_OBJECTIVES_OBJECTIVES_HPP_
#define ACTIVEVIEW_OBJECTIVES_OBJECTIVES_HPP_

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "activeview/errors.hpp"
#include "activeview/numcore/functional.hpp"
#include "activeview/numcore/tape.hpp"

namespace activeview {

/// Row-wise softmax(logits / h).
template <typename Scalar>
Matrix<Scalar> tempered_softmax_rows(const Matrix<Scalar>& logits, Scalar h) {
  if (!(h > 0)) throw ParameterError("tempered_softmax: temperature must be positive");
  return softmax_rows<Scalar>(logits / h);
}

template <typename T>
struct Stage1Terms {
  T total;
  T cross_entropy;
  T entropy_max;  // squared distance to the tempered target; zero when disabled
};

/**
 * Recognition loss over T steps of a batch of B samples:
 *   CE = -(1/BT) sum log yhat[y],  EM = (1/BT) sum ||yhat - yhat'||^2
 * with yhat' = softmax(logits / h) held fixed. Returns CE + EM, or CE alone
 * when em_enabled is false. Each tempered target evaluated bumps
 * *tempered_evaluations when given.
 */
template <typename T, typename Scalar>
Stage1Terms<T> stage1_loss(const std::vector<T>& step_logits, const std::vector<Index>& labels, Scalar h,
                           bool em_enabled, std::size_t* tempered_evaluations = nullptr) {
  if (step_logits.empty()) throw ContractViolation("stage1_loss: no steps");
  const Index batch = value_of(step_logits.front()).rows();
  if (batch == 0 || static_cast<Index>(labels.size()) != batch)
    throw ContractViolation("stage1_loss: one label per batch row required");
  const Scalar norm = Scalar(1) / Scalar(batch * static_cast<Index>(step_logits.size()));

  T ce_sum = constant_like(step_logits.front(), Matrix<Scalar>(Matrix<Scalar>::Zero(1, 1)));
  T em_sum = constant_like(step_logits.front(), Matrix<Scalar>(Matrix<Scalar>::Zero(1, 1)));
  for (const T& logits : step_logits) {
    if (value_of(logits).rows() != batch) throw ContractViolation("stage1_loss: ragged batch");
    const T probs = softmax_rows(logits);
    ce_sum = add(ce_sum, sum(log_floor(pick(probs, labels), Scalar(kProbabilityFloor))));
    if (em_enabled) {
      const Matrix<Scalar> target = tempered_softmax_rows<Scalar>(value_of(logits), h);
      if (tempered_evaluations) ++*tempered_evaluations;
      em_sum = add(em_sum, sum(squared_distance_rows(probs, target)));
    }
  }
  T ce = scale(ce_sum, -norm);
  T em = scale(em_sum, norm);
  T total = em_enabled ? add(ce, em) : ce;
  return {std::move(total), std::move(ce), std::move(em)};
}

/// One step's predictions for one sample.
template <typename Scalar>
struct StepPrediction {
  Index step = 1;
  Vector<Scalar> logits;
  Vector<Scalar> probs;
  Vector<Scalar> tempered;
  Index label = 0;
};

template <typename Scalar>
StepPrediction<Scalar> make_step_prediction(Index step, const Vector<Scalar>& logits, Index label, Scalar h) {
  return {step, logits, softmax(logits), tempered_softmax(logits, h), label};
}

/// stage1_loss over explicit per-(sample, step) predictions; every
/// distribution is checked for validity.
template <typename Scalar>
Stage1Terms<Scalar> stage1_loss(const std::vector<StepPrediction<Scalar>>& preds, bool em_enabled) {
  if (preds.empty()) throw ContractViolation("stage1_loss: empty batch");
  auto valid = [](const Vector<Scalar>& p) {
    return p.size() > 0 && (p.array() >= 0).all() && std::abs(p.sum() - Scalar(1)) <= Scalar(1e-9);
  };
  Scalar ce = 0, em = 0;
  for (const auto& p : preds) {
    if (!valid(p.probs) || !valid(p.tempered) || p.probs.size() != p.tempered.size())
      throw ContractViolation("stage1_loss: prediction is not a valid distribution");
    ce += cross_entropy_onehot(p.probs, p.label);
    em += (p.probs - p.tempered).squaredNorm();
  }
  ce /= Scalar(preds.size());
  em = em_enabled ? em / Scalar(preds.size()) : Scalar(0);
  return {ce + em, ce, em};
}

/// r = yhat_t[y] - yhat_{t-1}[y]
template <typename Scalar>
Scalar reward(const Vector<Scalar>& probs, const Vector<Scalar>& prev_probs, Index label) {
  if (label < 0 || label >= probs.size() || probs.size() != prev_probs.size())
    throw IndexError("reward: label outside the distribution");
  return probs(label) - prev_probs(label);
}

/// sum_k gamma^k r_{t+k}
template <typename Scalar>
Scalar discounted_return(std::span<const Scalar> rewards_from_t, Scalar gamma) {
  if (!(gamma >= 0 && gamma < 1)) throw ParameterError("gamma must lie in [0, 1)");
  if (rewards_from_t.empty()) throw ContractViolation("discounted_return: empty reward sequence");
  if (gamma == 0) return rewards_from_t.front();
  Scalar total = 0, weight = 1;
  for (Scalar r : rewards_from_t) {
    total += weight * r;
    weight *= gamma;
  }
  return total;
}

/// A = -V(s) + sum_k gamma^k r_{t+k}; exactly r_t - V(s) at gamma = 0.
template <typename Scalar>
Scalar advantage(Scalar value_estimate, std::span<const Scalar> rewards_from_t, Scalar gamma) {
  return discounted_return(rewards_from_t, gamma) - value_estimate;
}

struct PpoConfig {
  double clip = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  double gamma = 0.0;
  int epochs = 4;
  int minibatch = 32;

  void validate() const {
    if (!(clip > 0 && clip < 1)) throw ParameterError("ppo_clip: must lie in (0, 1)");
    if (!(gamma >= 0 && gamma < 1)) throw ParameterError("gamma: must lie in [0, 1)");
    if (!(value_coef >= 0)) throw ParameterError("ppo_value_coef: must be >= 0");
    if (!(entropy_coef >= 0)) throw ParameterError("ppo_entropy_coef: must be >= 0");
    if (epochs < 1) throw ParameterError("ppo_epochs: must be >= 1");
    if (minibatch < 1) throw ParameterError("ppo_minibatch: must be >= 1");
  }
};

/// One next-view decision recorded under the acting policy.
template <typename Scalar>
struct TransitionRecord {
  Index sample = 0;
  Index step = 2;  // step whose view this action chose
  Vector<Scalar> state;
  Index action = 0;
  Scalar log_prob = 0;
  Scalar reward = 0;
  Scalar value = 0;
  Scalar advantage = 0;
  Scalar value_target = 0;
};

template <typename T>
struct PpoTerms {
  T objective;  // to be maximised
  T clip;
  T value_loss;
  T entropy;
};

/**
 * L = L_CLIP - c1 L_VF + c2 L_E, each a mean over transitions:
 *   L_CLIP = mean min(rho A, clip(rho, 1-eps, 1+eps) A), rho = exp(new_lp - old_lp)
 *   L_VF   = mean (V(s) - V_target)^2
 *   L_E    = mean entropy of the action distribution
 * Inputs are column vectors with one row per transition.
 */
template <typename T, typename Scalar>
PpoTerms<T> ppo_objective(const Matrix<Scalar>& old_log_probs, const Matrix<Scalar>& advantages,
                          const Matrix<Scalar>& value_targets, const T& new_log_probs, const T& new_values,
                          const T& new_entropies, const PpoConfig& cfg) {
  const Index n = old_log_probs.rows();
  if (n == 0) throw ContractViolation("ppo_objective: empty batch");
  if (advantages.rows() != n || value_targets.rows() != n || value_of(new_log_probs).rows() != n ||
      value_of(new_values).rows() != n || value_of(new_entropies).rows() != n)
    throw ContractViolation("ppo_objective: inputs disagree on batch size");
  const T ratio = exp(sub(new_log_probs, constant_like(new_log_probs, old_log_probs)));
  T clip = mean(clipped_surrogate(ratio, advantages, Scalar(cfg.clip)));
  T value_loss = mean(squared_distance_rows(new_values, value_targets));
  T ent = mean(new_entropies);
  T objective =
      add(sub(clip, scale(value_loss, Scalar(cfg.value_coef))), scale(ent, Scalar(cfg.entropy_coef)));
  return {std::move(objective), std::move(clip), std::move(value_loss), std::move(ent)};
}

/// ppo_objective over recorded transitions with the new policy's outputs.
template <typename Scalar>
PpoTerms<Scalar> ppo_objective(const std::vector<TransitionRecord<Scalar>>& transitions,
                               const Vector<Scalar>& new_log_probs, const Vector<Scalar>& new_values,
                               const Vector<Scalar>& new_entropies, const PpoConfig& cfg) {
  const Index n = static_cast<Index>(transitions.size());
  if (n == 0) throw ContractViolation("ppo_objective: empty batch");
  Matrix<Scalar> old_lp(n, 1), adv(n, 1), target(n, 1);
  for (Index i = 0; i < n; ++i) {
    old_lp(i, 0) = transitions[i].log_prob;
    adv(i, 0) = transitions[i].advantage;
    target(i, 0) = transitions[i].value_target;
  }
  auto terms = ppo_objective<Matrix<Scalar>, Scalar>(old_lp, adv, target, Matrix<Scalar>(new_log_probs),
                                                     Matrix<Scalar>(new_values), Matrix<Scalar>(new_entropies), cfg);
  return {scalar_of(terms.objective), scalar_of(terms.clip), scalar_of(terms.value_loss), scalar_of(terms.entropy)};
}

}  // namespace activeview

#endif  // ACTIVEVIEW_OBJECTIVES_OBJECTIVES_HPP_
