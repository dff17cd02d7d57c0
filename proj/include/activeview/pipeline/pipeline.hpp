#ifndef ACTIVEVIEW_PIPELINE_PIPELINE_HPP_
#define ACTIVEVIEW_PIPELINE_PIPELINE_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "activeview/env/dataset.hpp"
#include "activeview/eval/eval.hpp"
#include "activeview/nets/model.hpp"
#include "activeview/objectives/objectives.hpp"

namespace activeview {

/// Every knob of a training run. Serialized as one flat JSON object whose
/// keys are the field names below; unknown keys are rejected.
struct TrainConfig {
  int stage1_epochs = 60;
  int stage2_epochs = 15;
  int stage3_epochs = 60;
  int end_to_end_epochs = 60;

  double stage1_lr = 0.05;
  double stage1_extractor_lr = 0.005;
  double stage2_lr = 0.0005;
  double stage2_extractor_lr = 0.00005;  // kept for completeness; the extractor is frozen in Stage II
  double stage3_lr = 0.005;
  double momentum = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;

  int batch_size = 32;
  double temperature = 2.0;
  PpoConfig ppo;

  bool random_selection = false;
  bool allow_duplicates = false;
  bool skip_stage3 = false;
  bool disable_em = false;
  bool end_to_end = false;

  std::uint64_t seed = 0;

  std::string extractor = "mlp";  // "mlp" or "identity"
  Index hidden_dim = 64;
  Index extractor_width = 64;
  Index extractor_out_dim = 16;

  /// Throws ParameterError whose message starts with the offending key.
  void validate() const;
};

TrainConfig parse_train_config(const std::string& json_text);
TrainConfig load_train_config(const std::filesystem::path& path);

/// Sorted-key compact JSON of every field; the hashed form of the config.
std::string canonical_config_bytes(const TrainConfig& cfg);

/// FNV-1a 64 of canonical_config_bytes.
std::uint64_t config_hash(const TrainConfig& cfg);
std::uint64_t fnv1a64(const std::string& bytes);

ModelDims model_dims(const TrainConfig& cfg, const Dataset& data);

struct Checkpoint {
  ModelParams<double> params;
  int stage = 0;  // 1, 2, 3; 4 marks an end-to-end run, 0 a fresh initialization
  int epoch = 0;
  std::uint64_t config_hash = 0;
  std::string rng_state;  // textual std::mt19937_64 state
};

/// "AVCK" | u32 version | u32 stage | u32 epoch | u64 config hash |
/// str rng state | parameter block.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Instrumentation counters.
struct TrainStats {
  std::size_t tempered_evaluations = 0;
  std::size_t actor_queries = 0;
};

struct LogRow {
  int epoch = 0;
  int stage = 0;
  double loss = 0;
  double cross_entropy = 0;
  double entropy_max = 0;
  double clip = 0;
  double value_loss = 0;
  double entropy = 0;
  double lr = 0;
};

void write_training_log(const std::vector<LogRow>& log, const std::filesystem::path& path);

struct TrainContext {
  TrainStats stats;
  std::vector<LogRow> log;
};

/// Fresh parameters drawn from a generator seeded with cfg.seed.
Checkpoint initial_checkpoint(const TrainConfig& cfg, const Dataset& data);

/// Recognition training on random no-duplicate permutations; every prefix
/// length 1..max_length is supervised. Only the extractor, R_e and the
/// classifier move.
Checkpoint train_stage1(const Checkpoint& init, const TrainConfig& cfg, const Dataset& train, TrainContext& ctx,
                        Index max_length = 0);

/// Batch of trajectories collected with a frozen checkpoint. Row i belongs
/// to sample i; column t-2 of the N x (T-1) blocks is the decision that chose
/// the view of step t.
struct Rollout {
  IndexMatrix views;         // N x T
  MatrixXd target_prob;      // N x T, true-class probability after each step
  MatrixXd rewards;          // N x (T-1)
  MatrixXd log_probs;        // N x (T-1), under the acting policy
  MatrixXd values;           // N x (T-1)
  MatrixXd advantages;       // N x (T-1)
  MatrixXd value_targets;    // N x (T-1)
  std::vector<TransitionRecord<double>> transitions;  // sample-major, step-minor
};

/// One full-dataset pass: random first view, actor-sampled continuations.
Rollout collect_rollouts(const ModelParams<double>& model, const Dataset& data, const TrainConfig& cfg,
                         std::mt19937_64& rng, TrainStats* stats = nullptr);

/// PPO on R_s, actor and value head; everything else stays bit-identical.
/// Returns the input unchanged (stage tag 2) when random_selection is set.
Checkpoint train_stage2(const Checkpoint& stage1, const TrainConfig& cfg, const Dataset& train, TrainContext& ctx);

/// Recognition refinement on trajectories sampled from the frozen actor,
/// without the entropy term.
Checkpoint train_stage3(const Checkpoint& stage2, const TrainConfig& cfg, const Dataset& train, TrainContext& ctx);

/// All objectives optimized together every iteration.
Checkpoint train_end_to_end(const Checkpoint& init, const TrainConfig& cfg, const Dataset& train, TrainContext& ctx);

/// Extractor and classifier trained on single views, for the ensemble baseline.
Checkpoint train_single_view(const TrainConfig& cfg, const Dataset& train, TrainContext& ctx);

PolicyMode evaluation_mode(const TrainConfig& cfg);

EvalReport evaluate(const ModelParams<double>& model, const Dataset& test, PolicyMode mode,
                    const std::vector<std::uint64_t>& seeds);

struct PipelineResult {
  std::vector<Checkpoint> stages;  // in execution order; back() is the final model
  TrainContext context;
  EvalReport report;

  const Checkpoint& final_checkpoint() const { return stages.back(); }
};

/// Called after each stage finishes, e.g. to persist its checkpoint.
using StageCallback = std::function<void(const Checkpoint&)>;

PipelineResult run_pipeline(const TrainConfig& cfg, const Dataset& train, const Dataset& test,
                            const std::vector<std::uint64_t>& eval_seeds, const StageCallback& on_stage = {});

std::vector<std::uint64_t> default_eval_seeds();

}  // namespace activeview

#endif  // ACTIVEVIEW_PIPELINE_PIPELINE_HPP_
