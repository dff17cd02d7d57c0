#include <cmath>
#include <sstream>

#include "activeview/env/episode.hpp"
#include "activeview/errors.hpp"
#include "activeview/numcore/optim.hpp"
#include "activeview/pipeline/pipeline.hpp"

namespace activeview {

namespace {

using TapeD = Tape<double>;
using VarD = Var<double>;

std::mt19937_64 stage_rng(const TrainConfig& cfg, int stage) {
  std::seed_seq seq{std::uint32_t(cfg.seed), std::uint32_t(cfg.seed >> 32), std::uint32_t(stage)};
  return std::mt19937_64(seq);
}

std::string rng_state(const std::mt19937_64& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

const char* stage_name(int stage) {
  switch (stage) {
    case 1: return "stage1";
    case 2: return "stage2";
    case 3: return "stage3";
    default: return "end_to_end";
  }
}

void guard_finite(double v, int stage, int epoch) {
  if (!std::isfinite(v)) throw DivergenceError(stage_name(stage), epoch);
}

// A finite loss can still hide overflowed weights.
void guard_params(const ModelParams<double>& params, int stage, int epoch) {
  bool finite = true;
  auto copy = params;
  for_each_param(copy, [&](Component, std::string_view, MatrixXd& t, std::string_view) {
    finite = finite && t.allFinite();
  });
  if (!finite) throw DivergenceError(stage_name(stage), epoch);
}

// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double unit_draw(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

Index sample_categorical(const MatrixXd& probs, Index row, std::mt19937_64& rng) {
  const double u = unit_draw(rng);
  double acc = 0;
  Index last = -1;
  for (Index v = 0; v < probs.cols(); ++v) {
    if (probs(row, v) <= 0) continue;
    acc += probs(row, v);
    last = v;
    if (u < acc) return v;
  }
  if (last < 0) throw ContractViolation("sample_categorical: empty distribution");
  return last;  // rounding left u above the cumulative total
}

std::vector<Index> column(const IndexMatrix& m, Index col) {
  std::vector<Index> out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) out[i] = m(i, col);
  return out;
}

std::vector<Index> labels_of(const Dataset& data, const std::vector<Index>& rows) {
  std::vector<Index> out;
  out.reserve(rows.size());
  for (Index r : rows) out.push_back(data.labels[r]);
  return out;
}

// Mask of views still selectable before step t (columns 0..t-1 visited).
MatrixXd unseen_mask(const IndexMatrix& views, Index upto) {
  MatrixXd mask = MatrixXd::Ones(views.rows(), views.cols());
  for (Index i = 0; i < views.rows(); ++i)
    for (Index t = 0; t < upto; ++t) mask(i, views(i, t)) = 0;
  return mask;
}

std::vector<std::vector<Index>> minibatches(Index n, Index size, std::mt19937_64& rng) {
  const auto order = random_permutation(n, rng);
  std::vector<std::vector<Index>> out;
  for (Index start = 0; start < n; start += size)
    out.emplace_back(order.begin() + start, order.begin() + std::min(n, start + size));
  return out;
}

/// Eager episodes for `rows` under the model's own actor (or uniformly
/// random choices), with everything PPO needs recorded.
Rollout rollout_batch(const ModelParams<double>& model, const Dataset& data, const std::vector<Index>& rows,
                      const TrainConfig& cfg, std::mt19937_64& rng, TrainStats* stats, bool record_transitions) {
  const Index n = static_cast<Index>(rows.size());
  const Index steps = data.view_count();
  if (steps < 2) throw ContractViolation("rollouts need at least two views");
  Rollout r;
  r.views.resize(n, steps);
  r.target_prob.resize(n, steps);
  r.rewards.resize(n, steps - 1);
  r.log_probs.resize(n, steps - 1);
  r.values.resize(n, steps - 1);
  std::vector<EpisodeState> episodes;
  episodes.reserve(rows.size());
  for (Index i = 0; i < n; ++i) {
    episodes.push_back(episode_reset(rows[i], steps, rng));
    r.views(i, 0) = episodes.back().visited.front();
  }
  std::vector<MatrixXd> states;
  MatrixXd h_e = MatrixXd::Zero(n, hidden_dim(model));
  MatrixXd h_s = h_e;
  for (Index t = 0; t < steps; ++t) {
    const MatrixXd x = extract(model, data.gather(column(r.views, t), rows));
    h_e = gru_step(model.gru_e, h_e, x);
    const MatrixXd probs = classify(model, h_e).probs;
    for (Index i = 0; i < n; ++i) r.target_prob(i, t) = probs(i, data.labels[rows[i]]);
    if (t > 0) r.rewards.col(t - 1) = r.target_prob.col(t) - r.target_prob.col(t - 1);
    if (t + 1 == steps) break;

    h_s = gru_step(model.gru_s, h_s, x);
    if (record_transitions) states.push_back(h_s);
    if (cfg.random_selection) {
      for (Index i = 0; i < n; ++i) {
        const Index next = random_next_view(episodes[i], false, rng);
        episode_step(episodes[i], next, false);
        r.views(i, t + 1) = next;
        r.log_probs(i, t) = -std::log(double(steps - t - 1));
        r.values(i, t) = 0;
      }
      continue;
    }
    const MatrixXd mask = cfg.allow_duplicates ? MatrixXd() : unseen_mask(r.views, t + 1);
    const MatrixXd pi = act(model, h_s, mask);
    const MatrixXd v = value(model, h_s);
    if (stats) stats->actor_queries += static_cast<std::size_t>(n);
    for (Index i = 0; i < n; ++i) {
      const Index next = sample_categorical(pi, i, rng);
      episode_step(episodes[i], next, cfg.allow_duplicates);
      r.views(i, t + 1) = next;
      r.log_probs(i, t) = std::log(std::max(pi(i, next), kProbabilityFloor));
      r.values(i, t) = v(i, 0);
    }
  }

  r.value_targets.resize(n, steps - 1);
  std::vector<double> tail(static_cast<std::size_t>(steps - 1));
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k + 1 < steps; ++k) tail[k] = r.rewards(i, k);
    for (Index k = 0; k + 1 < steps; ++k)
      r.value_targets(i, k) = discounted_return<double>(std::span<const double>(tail).subspan(k), cfg.ppo.gamma);
  }
  r.advantages = r.value_targets - r.values;

  if (record_transitions) {
    r.transitions.reserve(static_cast<std::size_t>(n * (steps - 1)));
    for (Index i = 0; i < n; ++i)
      for (Index k = 0; k + 1 < steps; ++k) {
        TransitionRecord<double> rec;
        rec.sample = rows[i];
        rec.step = k + 2;
        rec.state = states[k].row(i).transpose();
        rec.action = r.views(i, k + 1);
        rec.log_prob = r.log_probs(i, k);
        rec.reward = r.rewards(i, k);
        rec.value = r.values(i, k);
        rec.advantage = r.advantages(i, k);
        rec.value_target = r.value_targets(i, k);
        r.transitions.push_back(std::move(rec));
      }
  }
  return r;
}

/// Recorded unroll of R_s and the PPO objective averaged over the T-1
/// decisions of each trajectory in `batch` (indices into the rollout).
PpoTerms<VarD> ppo_terms(TapeD& tape, const ModelWeights<VarD>& bound, const std::vector<MatrixXd>& step_inputs,
                         const Rollout& r, const std::vector<Index>& batch, const TrainConfig& cfg,
                         TrainStats& stats) {
  const Index n = static_cast<Index>(batch.size());
  const Index decisions = r.views.cols() - 1;
  IndexMatrix views(n, r.views.cols());
  MatrixXd old_lp(n, 1), adv(n, 1), target(n, 1);
  for (Index i = 0; i < n; ++i) views.row(i) = r.views.row(batch[i]);
  const VarD zero = tape.constant(MatrixXd::Zero(1, 1));
  PpoTerms<VarD> total{zero, zero, zero, zero};
  VarD h = tape.constant(MatrixXd::Zero(n, value_of(bound.gru_s.u_z).rows()));
  for (Index t = 0; t < decisions; ++t) {
    for (Index i = 0; i < n; ++i) {
      old_lp(i, 0) = r.log_probs(batch[i], t);
      adv(i, 0) = r.advantages(batch[i], t);
      target(i, 0) = r.value_targets(batch[i], t);
    }
    h = gru_step(bound.gru_s, h, tape.constant(step_inputs[t]));
    const MatrixXd mask = cfg.allow_duplicates ? MatrixXd() : unseen_mask(views, t + 1);
    const VarD pi = act(bound, h, mask);
    stats.actor_queries += static_cast<std::size_t>(n);
    const VarD lp = log_floor(pick(pi, column(views, t + 1)));
    const auto terms = ppo_objective(old_lp, adv, target, lp, value(bound, h), entropy_rows(pi), cfg.ppo);
    total.objective = add(total.objective, terms.objective);
    total.clip = add(total.clip, terms.clip);
    total.value_loss = add(total.value_loss, terms.value_loss);
    total.entropy = add(total.entropy, terms.entropy);
  }
  const double norm = 1.0 / double(decisions);
  return {scale(total.objective, norm), scale(total.clip, norm), scale(total.value_loss, norm),
          scale(total.entropy, norm)};
}

// Optimizer over a subset of components, tracking parameter pointers of one model.
struct ParamGroup {
  std::vector<MatrixXd*> params;
  OptimState<double> state;
  ComponentSet components;

  void step(ModelWeights<VarD>& bound, double lr) {
    if (params.empty()) return;
    const auto grads = gradients(bound, components);
    optim_step<double>(state, params, grads, lr);
  }
};

ParamGroup sgd_group(ModelParams<double>& m, ComponentSet components, double momentum) {
  ParamGroup g;
  g.params = parameters(m, components);
  g.state = make_sgd_momentum<double>(g.params, momentum);
  g.components = components;
  return g;
}

ParamGroup adam_group(ModelParams<double>& m, ComponentSet components, const TrainConfig& cfg) {
  ParamGroup g;
  g.params = parameters(m, components);
  g.state = make_adam<double>(g.params, cfg.adam_beta1, cfg.adam_beta2);
  g.components = components;
  return g;
}

const ComponentSet kExtractorOnly{Component::kExtractor};
const ComponentSet kRecognitionHeads{Component::kAggregatorE, Component::kClassifier};

using TrajectorySource = std::function<IndexMatrix(const ModelParams<double>&, const std::vector<Index>&)>;

struct RecognitionSchedule {
  int stage = 1;
  int epochs = 1;
  double head_lr = 0;
  double extractor_lr = 0;
  bool em = true;
  Index length = 0;
};

/// Shared Stage I / Stage III loop: cross-entropy (+ EM) at every prefix of
/// the supplied trajectories, SGD-momentum with a cosine schedule.
ModelParams<double> train_recognition(ModelParams<double> params, const TrainConfig& cfg, const Dataset& train,
                                      const RecognitionSchedule& s, const TrajectorySource& trajectories,
                                      std::mt19937_64& rng, TrainContext& ctx) {
  ParamGroup heads = sgd_group(params, kRecognitionHeads, cfg.momentum);
  ParamGroup ext = sgd_group(params, kExtractorOnly, cfg.momentum);
  for (int epoch = 0; epoch < s.epochs; ++epoch) {
    const double head_lr = cosine_lr(epoch, s.epochs, s.head_lr);
    const double ext_lr = cosine_lr(epoch, s.epochs, s.extractor_lr);
    LogRow row{epoch, s.stage};
    row.lr = head_lr;
    const auto batches = minibatches(train.size(), cfg.batch_size, rng);
    for (const auto& rows : batches) {
      const IndexMatrix views = trajectories(params, rows);
      TapeD tape;
      auto bound = bind(tape, params, kRecognition);
      VarD h = tape.constant(MatrixXd::Zero(Index(rows.size()), hidden_dim(params)));
      std::vector<VarD> logits;
      for (Index t = 0; t < s.length; ++t) {
        h = gru_step(bound.gru_e, h, extract(bound, tape.constant(train.gather(column(views, t), rows))));
        logits.push_back(affine(bound.classifier, h));
      }
      const auto terms = stage1_loss(logits, labels_of(train, rows), cfg.temperature, s.em,
                                     &ctx.stats.tempered_evaluations);
      guard_finite(scalar_of(terms.total), s.stage, epoch);
      tape.backward(terms.total);
      heads.step(bound, head_lr);
      ext.step(bound, ext_lr);
      row.loss += scalar_of(terms.total);
      row.cross_entropy += scalar_of(terms.cross_entropy);
      row.entropy_max += scalar_of(terms.entropy_max);
    }
    const double k = double(batches.size());
    row.loss /= k, row.cross_entropy /= k, row.entropy_max /= k;
    ctx.log.push_back(row);
    guard_params(params, s.stage, epoch);
  }
  return params;
}

IndexMatrix random_trajectories(Index rows, Index views, Index length, std::mt19937_64& rng) {
  IndexMatrix out(rows, length);
  for (Index i = 0; i < rows; ++i) {
    const auto perm = random_permutation(views, rng);
    for (Index t = 0; t < length; ++t) out(i, t) = perm[t];
  }
  return out;
}

Checkpoint finish(ModelParams<double> params, int stage, int epoch, const TrainConfig& cfg,
                  const std::mt19937_64& rng) {
  return {std::move(params), stage, epoch, config_hash(cfg), rng_state(rng)};
}

}  // namespace

Checkpoint initial_checkpoint(const TrainConfig& cfg, const Dataset& data) {
  cfg.validate();
  data.validate();
  std::mt19937_64 rng(cfg.seed);
  return finish(init_model<double>(model_dims(cfg, data), rng), 0, 0, cfg, rng);
}

Checkpoint train_stage1(const Checkpoint& init, const TrainConfig& cfg, const Dataset& train, TrainContext& ctx,
                        Index max_length) {
  cfg.validate();
  const Index steps = train.view_count();
  const Index length = max_length > 0 ? std::min(max_length, steps) : steps;
  auto rng = stage_rng(cfg, 1);
  const RecognitionSchedule s{1, cfg.stage1_epochs, cfg.stage1_lr, cfg.stage1_extractor_lr, !cfg.disable_em, length};
  auto source = [&](const ModelParams<double>&, const std::vector<Index>& rows) {
    return random_trajectories(Index(rows.size()), steps, length, rng);
  };
  auto params = train_recognition(init.params, cfg, train, s, source, rng, ctx);
  return finish(std::move(params), 1, cfg.stage1_epochs, cfg, rng);
}

Rollout collect_rollouts(const ModelParams<double>& model, const Dataset& data, const TrainConfig& cfg,
                         std::mt19937_64& rng, TrainStats* stats) {
  std::vector<Index> rows(static_cast<std::size_t>(data.size()));
  for (Index i = 0; i < data.size(); ++i) rows[i] = i;
  return rollout_batch(model, data, rows, cfg, rng, stats, true);
}

Checkpoint train_stage2(const Checkpoint& stage1, const TrainConfig& cfg, const Dataset& train, TrainContext& ctx) {
  cfg.validate();
  auto rng = stage_rng(cfg, 2);
  if (cfg.random_selection) return finish(stage1.params, 2, 0, cfg, rng);
  ModelParams<double> params = stage1.params;
  // The extractor is frozen, so its per-view outputs are fixed for the whole stage.
  std::vector<MatrixXd> features;
  for (const auto& v : train.views) features.push_back(extract(params, v));
  ParamGroup selection = adam_group(params, kSelection, cfg);
  const int epochs = cfg.stage2_epochs;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double lr = cosine_lr(epoch, epochs, cfg.stage2_lr);
    const Rollout r = collect_rollouts(params, train, cfg, rng, &ctx.stats);
    LogRow row{epoch, 2};
    row.lr = lr;
    int updates = 0;
    for (int k = 0; k < cfg.ppo.epochs; ++k) {
      for (const auto& batch : minibatches(train.size(), cfg.ppo.minibatch, rng)) {
        std::vector<MatrixXd> inputs;
        for (Index t = 0; t + 1 < r.views.cols(); ++t) {
          MatrixXd x(Index(batch.size()), features.front().cols());
          for (Index i = 0; i < x.rows(); ++i) x.row(i) = features[r.views(batch[i], t)].row(batch[i]);
          inputs.push_back(std::move(x));
        }
        TapeD tape;
        auto bound = bind(tape, params, kSelection);
        const auto terms = ppo_terms(tape, bound, inputs, r, batch, cfg, ctx.stats);
        guard_finite(scalar_of(terms.objective), 2, epoch);
        tape.backward(scale(terms.objective, -1.0));
        selection.step(bound, lr);
        row.loss += -scalar_of(terms.objective);
        row.clip += scalar_of(terms.clip);
        row.value_loss += scalar_of(terms.value_loss);
        row.entropy += scalar_of(terms.entropy);
        ++updates;
      }
    }
    row.loss /= updates, row.clip /= updates, row.value_loss /= updates, row.entropy /= updates;
    ctx.log.push_back(row);
    guard_params(params, 2, epoch);
  }
  return finish(std::move(params), 2, epochs, cfg, rng);
}

Checkpoint train_stage3(const Checkpoint& stage2, const TrainConfig& cfg, const Dataset& train, TrainContext& ctx) {
  cfg.validate();
  const Index steps = train.view_count();
  auto rng = stage_rng(cfg, 3);
  const RecognitionSchedule s{3, cfg.stage3_epochs, cfg.stage3_lr, cfg.stage3_lr, false, steps};
  auto source = [&](const ModelParams<double>& current, const std::vector<Index>& rows) {
    if (cfg.random_selection) return random_trajectories(Index(rows.size()), steps, steps, rng);
    return rollout_batch(current, train, rows, cfg, rng, &ctx.stats, false).views;
  };
  auto params = train_recognition(stage2.params, cfg, train, s, source, rng, ctx);
  return finish(std::move(params), 3, cfg.stage3_epochs, cfg, rng);
}

Checkpoint train_end_to_end(const Checkpoint& init, const TrainConfig& cfg, const Dataset& train, TrainContext& ctx) {
  cfg.validate();
  const Index steps = train.view_count();
  auto rng = stage_rng(cfg, 4);
  ModelParams<double> params = init.params;
  ParamGroup heads = sgd_group(params, kRecognitionHeads, cfg.momentum);
  ParamGroup ext = sgd_group(params, kExtractorOnly, cfg.momentum);
  ParamGroup selection = adam_group(params, kSelection, cfg);
  const int epochs = cfg.end_to_end_epochs;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    const double head_lr = cosine_lr(epoch, epochs, cfg.stage1_lr);
    const double ext_lr = cosine_lr(epoch, epochs, cfg.stage1_extractor_lr);
    const double sel_lr = cosine_lr(epoch, epochs, cfg.stage2_lr);
    LogRow row{epoch, 4};
    row.lr = head_lr;
    const auto batches = minibatches(train.size(), cfg.batch_size, rng);
    for (const auto& rows : batches) {
      const Rollout r = rollout_batch(params, train, rows, cfg, rng, &ctx.stats, false);
      TapeD tape;
      auto bound = bind(tape, params, ComponentSet::all());
      VarD h = tape.constant(MatrixXd::Zero(Index(rows.size()), hidden_dim(params)));
      std::vector<VarD> logits;
      std::vector<MatrixXd> inputs;
      for (Index t = 0; t < steps; ++t) {
        const MatrixXd x = train.gather(column(r.views, t), rows);
        h = gru_step(bound.gru_e, h, extract(bound, tape.constant(x)));
        logits.push_back(affine(bound.classifier, h));
        inputs.push_back(x);
      }
      const auto rec = stage1_loss(logits, labels_of(train, rows), cfg.temperature, !cfg.disable_em,
                                   &ctx.stats.tempered_evaluations);
      VarD objective = rec.total;
      if (!cfg.random_selection) {
        // The selection branch sees the extractor output, so its gradient reaches F as well.
        VarD hs = tape.constant(MatrixXd::Zero(Index(rows.size()), hidden_dim(params)));
        const VarD zero = tape.constant(MatrixXd::Zero(1, 1));
        PpoTerms<VarD> sum{zero, zero, zero, zero};
        for (Index k = 0; k + 1 < steps; ++k) {
          hs = gru_step(bound.gru_s, hs, extract(bound, tape.constant(inputs[k])));
          const MatrixXd mask = cfg.allow_duplicates ? MatrixXd() : unseen_mask(r.views, k + 1);
          const VarD pi = act(bound, hs, mask);
          ctx.stats.actor_queries += rows.size();
          const VarD lp = log_floor(pick(pi, column(r.views, k + 1)));
          const auto terms = ppo_objective(MatrixXd(r.log_probs.col(k)), MatrixXd(r.advantages.col(k)),
                                           MatrixXd(r.value_targets.col(k)), lp, value(bound, hs),
                                           entropy_rows(pi), cfg.ppo);
          sum.objective = add(sum.objective, terms.objective);
          sum.clip = add(sum.clip, terms.clip);
          sum.value_loss = add(sum.value_loss, terms.value_loss);
          sum.entropy = add(sum.entropy, terms.entropy);
        }
        const double norm = 1.0 / double(steps - 1);
        objective = sub(rec.total, scale(sum.objective, norm));
        row.clip += norm * scalar_of(sum.clip);
        row.value_loss += norm * scalar_of(sum.value_loss);
        row.entropy += norm * scalar_of(sum.entropy);
      }
      guard_finite(scalar_of(objective), 4, epoch);
      tape.backward(objective);
      heads.step(bound, head_lr);
      ext.step(bound, ext_lr);
      if (!cfg.random_selection) selection.step(bound, sel_lr);
      row.loss += scalar_of(objective);
      row.cross_entropy += scalar_of(rec.cross_entropy);
      row.entropy_max += scalar_of(rec.entropy_max);
    }
    const double k = double(batches.size());
    row.loss /= k, row.cross_entropy /= k, row.entropy_max /= k;
    row.clip /= k, row.value_loss /= k, row.entropy /= k;
    ctx.log.push_back(row);
    guard_params(params, 4, epoch);
  }
  return finish(std::move(params), 4, epochs, cfg, rng);
}

Checkpoint train_single_view(const TrainConfig& cfg, const Dataset& train, TrainContext& ctx) {
  return train_stage1(initial_checkpoint(cfg, train), cfg, train, ctx, 1);
}

}  // namespace activeview
