#include "activeview/pipeline/pipeline.hpp"

namespace activeview {

std::vector<std::uint64_t> default_eval_seeds() { return {0, 1, 2, 3, 4}; }

PolicyMode evaluation_mode(const TrainConfig& cfg) {
  if (cfg.random_selection) return PolicyMode::kRandom;
  if (cfg.allow_duplicates) return PolicyMode::kDuplicates;
  return PolicyMode::kActive;
}

EvalReport evaluate(const ModelParams<double>& model, const Dataset& test, PolicyMode mode,
                    const std::vector<std::uint64_t>& seeds) {
  EvalReport report;
  report.mode = to_string(mode);
  report.curve = step_accuracies(model, test, mode, seeds);
  report.scores = metrics(report.curve.mean, default_weights(test.view_count()));
  return report;
}

PipelineResult run_pipeline(const TrainConfig& cfg, const Dataset& train, const Dataset& test,
                            const std::vector<std::uint64_t>& eval_seeds, const StageCallback& on_stage) {
  PipelineResult result;
  auto done = [&](Checkpoint ckpt) {
    if (on_stage) on_stage(ckpt);
    result.stages.push_back(std::move(ckpt));
  };
  const Checkpoint init = initial_checkpoint(cfg, train);
  if (cfg.end_to_end) {
    done(train_end_to_end(init, cfg, train, result.context));
  } else {
    done(train_stage1(init, cfg, train, result.context));
    done(train_stage2(result.stages.back(), cfg, train, result.context));
    if (!cfg.skip_stage3) done(train_stage3(result.stages.back(), cfg, train, result.context));
  }
  result.report = evaluate(result.final_checkpoint().params, test, evaluation_mode(cfg), eval_seeds);
  return result;
}

}  // namespace activeview
