#include <algorithm>
#include <cmath>

#include "activeview/errors.hpp"
#include "activeview/eval/eval.hpp"

namespace activeview {

VectorXd default_weights(Index steps) {
  if (steps < 2) throw ParameterError("default_weights: need at least 2 steps");
  VectorXd w(steps);
  w(0) = 0.0;
  const double norm = 1.0 - std::ldexp(1.0, -static_cast<int>(steps - 1));
  for (Index t = 2; t <= steps; ++t) w(t - 1) = std::ldexp(1.0, -static_cast<int>(t - 1)) / norm;
  return w;
}

Metrics metrics(const VectorXd& curve, const VectorXd& weights) {
  if (curve.size() != weights.size()) throw ContractViolation("metrics: curve and weights differ in length");
  if (curve.size() < 2) throw ContractViolation("metrics: need at least 2 steps");
  return {curve.mean(), curve.dot(weights), curve(1)};
}

ExitResult apply_exit(const EpisodeTrace& trace, const ExitPolicy& policy) {
  const Index n = trace.confidence.rows();
  const Index steps = trace.confidence.cols();
  if (static_cast<Index>(policy.thresholds.size()) != steps)
    throw ContractViolation("exit: one threshold per step required");
  if (n == 0) throw ContractViolation("exit: empty trace");
  ExitResult result;
  result.histogram.assign(static_cast<std::size_t>(steps), 0.0);
  double correct = 0, step_total = 0;
  for (Index i = 0; i < n; ++i) {
    Index stop = steps - 1;
    for (Index t = 0; t < steps - 1; ++t)
      if (trace.confidence(i, t) >= policy.thresholds[t]) {
        stop = t;
        break;
      }
    correct += trace.correct(i, stop) ? 1.0 : 0.0;
    step_total += double(stop + 1);
    result.histogram[stop] += 1.0;
  }
  result.accuracy = correct / double(n);
  result.mean_step = step_total / double(n);
  for (auto& h : result.histogram) h /= double(n);
  return result;
}

ExitPolicy exit_policy_for_fraction(const EpisodeTrace& calibration, double fraction) {
  const Index n = calibration.confidence.rows();
  const Index steps = calibration.confidence.cols();
  ExitPolicy policy;
  policy.thresholds.assign(static_cast<std::size_t>(steps), 0.0);
  std::vector<bool> running(static_cast<std::size_t>(n), true);
  for (Index t = 0; t + 1 < steps; ++t) {
    std::vector<double> conf;
    for (Index i = 0; i < n; ++i)
      if (running[i]) conf.push_back(calibration.confidence(i, t));
    double threshold = 0.0;
    if (conf.empty()) {
      threshold = 0.0;
    } else {
      std::sort(conf.begin(), conf.end(), std::greater<>());
      const auto exiting = static_cast<std::size_t>(std::llround(fraction * double(conf.size())));
      // Above every observed confidence when nobody should exit.
      threshold = exiting == 0 ? std::nextafter(conf.front(), 2.0) : conf[exiting - 1];
    }
    policy.thresholds[t] = threshold;
    for (Index i = 0; i < n; ++i)
      if (running[i] && calibration.confidence(i, t) >= threshold) running[i] = false;
  }
  return policy;
}

ExitCalibration calibrate_exit(const EpisodeTrace& calibration, double target) {
  const Index steps = calibration.confidence.cols();
  if (!(target >= 1.0) || target > double(steps))
    throw ParameterError("calibrate_exit: target mean step must lie in [1, T]");
  ExitCalibration best;
  auto consider = [&](double q) {
    ExitPolicy policy = exit_policy_for_fraction(calibration, q);
    const double achieved = apply_exit(calibration, policy).mean_step;
    if (best.policy.thresholds.empty() || std::abs(achieved - target) < std::abs(best.achieved_mean - target)) {
      best.policy = std::move(policy);
      best.fraction = q;
      best.achieved_mean = achieved;
    }
    return achieved;
  };

  if (target == 1.0) {
    best.policy.thresholds.assign(static_cast<std::size_t>(steps), 0.0);
    best.fraction = 1.0;
    best.achieved_mean = 1.0;
    best.converged = true;
    return best;
  }
  // Mean exit step decreases as the per-step exit fraction grows.
  double lo = 0.0, hi = 1.0;
  consider(lo);
  consider(hi);
  for (int iter = 0; iter < 60 && std::abs(best.achieved_mean - target) > 1e-3; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double achieved = consider(mid);
    if (achieved > target)
      lo = mid;
    else
      hi = mid;
  }
  best.converged = std::abs(best.achieved_mean - target) <= 0.1;
  return best;
}

ExitCalibration calibrate_exit(const ModelParams<double>& model, const Dataset& calibration, double target,
                               std::uint64_t seed) {
  return calibrate_exit(run_episodes(model, calibration, PolicyMode::kActive, seed), target);
}

ExitResult exit_eval(const ModelParams<double>& model, const Dataset& data, const ExitPolicy& policy,
                     const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ParameterError("exit_eval: no seeds");
  ExitResult total;
  total.histogram.assign(static_cast<std::size_t>(data.view_count()), 0.0);
  for (auto seed : seeds) {
    const ExitResult r = apply_exit(run_episodes(model, data, PolicyMode::kActive, seed), policy);
    total.accuracy += r.accuracy;
    total.mean_step += r.mean_step;
    for (std::size_t t = 0; t < r.histogram.size(); ++t) total.histogram[t] += r.histogram[t];
  }
  const double k = double(seeds.size());
  total.accuracy /= k;
  total.mean_step /= k;
  for (auto& h : total.histogram) h /= k;
  return total;
}

}  // namespace activeview
