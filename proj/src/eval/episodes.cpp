#include <cmath>

#include "activeview/env/episode.hpp"
#include "activeview/errors.hpp"
#include "activeview/eval/eval.hpp"

namespace activeview {

namespace {

// Separate stream for random view choices so first views stay paired across modes.
constexpr std::uint64_t kRandomStreamSalt = 0x9e3779b97f4a7c15ULL;

std::vector<MatrixXd> extracted_views(const ModelParams<double>& model, const Dataset& data) {
  std::vector<MatrixXd> out;
  out.reserve(data.views.size());
  for (const auto& v : data.views) out.push_back(extract(model, v));
  return out;
}

MatrixXd gather_rows(const std::vector<MatrixXd>& features, const IndexMatrix& views, Index step) {
  const Index n = views.rows();
  MatrixXd out(n, features.front().cols());
  for (Index i = 0; i < n; ++i) out.row(i) = features[views(i, step)].row(i);
  return out;
}

Index masked_argmax(const MatrixXd& logits, Index row, const std::vector<bool>* seen) {
  Index best = -1;
  for (Index v = 0; v < logits.cols(); ++v) {
    if (seen && (*seen)[v]) continue;
    if (best < 0 || logits(row, v) > logits(row, best)) best = v;
  }
  if (best < 0) throw ContractViolation("act: every view is masked");
  return best;
}

}  // namespace

std::string to_string(PolicyMode mode) {
  switch (mode) {
    case PolicyMode::kActive: return "active";
    case PolicyMode::kRandom: return "random";
    case PolicyMode::kDuplicates: return "duplicates";
  }
  return "";
}

PolicyMode parse_policy_mode(const std::string& name) {
  if (name == "active") return PolicyMode::kActive;
  if (name == "random") return PolicyMode::kRandom;
  if (name == "duplicates") return PolicyMode::kDuplicates;
  throw ParameterError("unknown policy mode '" + name + "' (expected active, random or duplicates)");
}

EpisodeTrace run_episodes(const ModelParams<double>& model, const Dataset& data, PolicyMode mode,
                          std::uint64_t seed) {
  const Index n = data.size();
  const Index steps = data.view_count();
  if (num_views(model) != steps) throw ContractViolation("run_episodes: model and dataset disagree on V");
  const auto features = extracted_views(model, data);

  std::mt19937_64 first_rng(seed);
  std::mt19937_64 random_rng(seed ^ kRandomStreamSalt);
  std::vector<EpisodeState> episodes;
  episodes.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) episodes.push_back(episode_reset(i, steps, first_rng));

  EpisodeTrace trace;
  trace.views.resize(n, steps);
  trace.confidence.resize(n, steps);
  trace.correct.resize(n, steps);
  for (Index i = 0; i < n; ++i) trace.views(i, 0) = episodes[i].visited.front();

  const Index hidden = hidden_dim(model);
  MatrixXd h_e = MatrixXd::Zero(n, hidden);
  MatrixXd h_s = MatrixXd::Zero(n, hidden);
  for (Index t = 0; t < steps; ++t) {
    const MatrixXd x = gather_rows(features, trace.views, t);
    h_e = gru_step(model.gru_e, h_e, x);
    const MatrixXd probs = classify(model, h_e).probs;
    for (Index i = 0; i < n; ++i) {
      Index label_hat = 0;
      trace.confidence(i, t) = probs.row(i).maxCoeff(&label_hat);
      trace.correct(i, t) = label_hat == data.labels[i];
    }
    if (t + 1 == steps) break;
    if (mode == PolicyMode::kRandom) {
      for (Index i = 0; i < n; ++i) {
        const Index next = random_next_view(episodes[i], false, random_rng);
        episode_step(episodes[i], next, false);
        trace.views(i, t + 1) = next;
      }
      continue;
    }
    h_s = gru_step(model.gru_s, h_s, x);
    const MatrixXd logits = affine(model.actor, h_s);
    const bool dup = mode == PolicyMode::kDuplicates;
    for (Index i = 0; i < n; ++i) {
      const Index next = masked_argmax(logits, i, dup ? nullptr : &episodes[i].seen);
      episode_step(episodes[i], next, dup);
      trace.views(i, t + 1) = next;
    }
  }
  return trace;
}

std::vector<VectorXd> run_single_episode(const ModelParams<double>& model, const Dataset& data, Index sample,
                                         Index first_view, PolicyMode mode, std::uint64_t random_seed,
                                         std::vector<Index>* visited) {
  const Index steps = data.view_count();
  std::mt19937_64 random_rng(random_seed ^ kRandomStreamSalt);
  EpisodeState state;
  state.sample = sample;
  state.seen.assign(static_cast<std::size_t>(steps), false);
  state.visited.push_back(first_view);
  state.seen[first_view] = true;
  state.hidden_e = VectorXd::Zero(hidden_dim(model));
  state.hidden_s = VectorXd::Zero(hidden_dim(model));

  std::vector<VectorXd> out;
  while (true) {
    const Index view = state.visited.back();
    const MatrixXd x = extract(model, MatrixXd(data.views[view].row(sample)));
    const MatrixXd h_e = gru_step(model.gru_e, MatrixXd(state.hidden_e.transpose()), x);
    state.hidden_e = h_e.row(0).transpose();
    out.push_back(classify(model, h_e).probs.row(0).transpose());
    if (state.done()) break;
    Index next = 0;
    if (mode == PolicyMode::kRandom) {
      next = random_next_view(state, false, random_rng);
    } else {
      const MatrixXd h_s = gru_step(model.gru_s, MatrixXd(state.hidden_s.transpose()), x);
      state.hidden_s = h_s.row(0).transpose();
      const MatrixXd logits = affine(model.actor, h_s);
      next = masked_argmax(logits, 0, mode == PolicyMode::kDuplicates ? nullptr : &state.seen);
    }
    episode_step(state, next, mode == PolicyMode::kDuplicates);
  }
  if (visited) *visited = state.visited;
  return out;
}

VectorXd step_accuracy(const EpisodeTrace& trace) {
  return trace.correct.cast<double>().colwise().mean().transpose();
}

AccuracyCurve curve_from_runs(const std::vector<VectorXd>& per_seed) {
  if (per_seed.empty()) throw ParameterError("accuracy curve: no seeds");
  AccuracyCurve curve;
  const Index steps = per_seed.front().size();
  curve.seeds = static_cast<int>(per_seed.size());
  curve.mean = VectorXd::Zero(steps);
  for (const auto& run : per_seed) curve.mean += run;
  curve.mean /= double(per_seed.size());
  curve.std = VectorXd::Zero(steps);
  for (const auto& run : per_seed) curve.std += (run - curve.mean).array().square().matrix();
  curve.std = (curve.std / double(per_seed.size())).array().sqrt().matrix();
  return curve;
}

AccuracyCurve step_accuracies(const ModelParams<double>& model, const Dataset& data, PolicyMode mode,
                              const std::vector<std::uint64_t>& seeds) {
  std::vector<VectorXd> runs;
  for (auto seed : seeds) runs.push_back(step_accuracy(run_episodes(model, data, mode, seed)));
  return curve_from_runs(runs);
}

AccuracyCurve ensemble_baseline(const ModelParams<double>& model, const Dataset& data,
                                const std::vector<std::uint64_t>& seeds) {
  const Index n = data.size();
  const Index steps = data.view_count();
  // Single-view class distributions, one N x C block per view.
  std::vector<MatrixXd> single;
  for (const auto& view : data.views) {
    const MatrixXd f = extract(model, view);
    single.push_back(classify(model, gru_step(model.gru_e, MatrixXd(MatrixXd::Zero(n, hidden_dim(model))), f)).probs);
  }
  std::vector<VectorXd> runs;
  for (auto seed : seeds) {
    std::mt19937_64 first_rng(seed);
    std::mt19937_64 random_rng(seed ^ kRandomStreamSalt);
    std::vector<EpisodeState> episodes;
    for (Index i = 0; i < n; ++i) episodes.push_back(episode_reset(i, steps, first_rng));
    VectorXd acc = VectorXd::Zero(steps);
    MatrixXd running = MatrixXd::Zero(n, num_classes(model));
    for (Index t = 0; t < steps; ++t) {
      if (t > 0)
        for (Index i = 0; i < n; ++i) episode_step(episodes[i], random_next_view(episodes[i], false, random_rng), false);
      for (Index i = 0; i < n; ++i) {
        running.row(i) += single[episodes[i].visited.back()].row(i);
        Index label_hat = 0;
        running.row(i).maxCoeff(&label_hat);
        if (label_hat == data.labels[i]) acc(t) += 1;
      }
    }
    runs.push_back(acc / double(n));
  }
  return curve_from_runs(runs);
}

}  // namespace activeview
