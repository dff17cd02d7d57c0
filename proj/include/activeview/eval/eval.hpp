#ifndef ACTIVEVIEW_EVAL_EVAL_HPP_
#define ACTIVEVIEW_EVAL_EVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "activeview/env/dataset.hpp"
#include "activeview/nets/model.hpp"

namespace activeview {

/// How views after the first are chosen during evaluation.
enum class PolicyMode {
  kActive,      // greedy actor over unseen views
  kRandom,      // uniform over unseen views
  kDuplicates,  // greedy actor over all views
};

std::string to_string(PolicyMode mode);
PolicyMode parse_policy_mode(const std::string& name);

using IndexMatrix = Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic>;

/// Per-sample, per-step record of one evaluation pass (N x T each).
struct EpisodeTrace {
  IndexMatrix views;
  MatrixXd confidence;  // max class probability
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> correct;
};

/// Runs every sample's episode in one batch. The first view of sample i is
/// the i-th draw of a generator seeded with `seed`, so different modes under
/// the same seed share first views.
EpisodeTrace run_episodes(const ModelParams<double>& model, const Dataset& data, PolicyMode mode,
                          std::uint64_t seed);

/// Same episode for one sample, carried step by step through EpisodeState.
/// Returns the class distribution after each step.
std::vector<VectorXd> run_single_episode(const ModelParams<double>& model, const Dataset& data, Index sample,
                                         Index first_view, PolicyMode mode, std::uint64_t random_seed,
                                         std::vector<Index>* visited = nullptr);

struct AccuracyCurve {
  VectorXd mean;  // a_t, t = 1..T
  VectorXd std;   // across seeds (population std)
  int seeds = 0;
};

AccuracyCurve curve_from_runs(const std::vector<VectorXd>& per_seed);
VectorXd step_accuracy(const EpisodeTrace& trace);

AccuracyCurve step_accuracies(const ModelParams<double>& model, const Dataset& data, PolicyMode mode,
                              const std::vector<std::uint64_t>& seeds);

/// w_1 = 0, w_t = 2^-(t-1) / (1 - 2^-(T-1)) for t >= 2.
VectorXd default_weights(Index steps);

struct Metrics {
  double macc = 0;
  double wmacc = 0;
  double step2 = 0;
};

Metrics metrics(const VectorXd& curve, const VectorXd& weights);

/// Stop at the first step whose confidence reaches thresholds[t]; the last
/// threshold is 0 so every episode ends by step T.
struct ExitPolicy {
  std::vector<double> thresholds;
};

struct ExitCalibration {
  ExitPolicy policy;
  double fraction = 0;       // per-step exit fraction q
  double achieved_mean = 0;  // mean exit step on the calibration data
  bool converged = false;    // |achieved_mean - target| <= 0.1
};

/// Thresholds from per-step quantiles of calibration confidences, with the
/// exit fraction found by bisection so the mean exit step meets the target.
ExitCalibration calibrate_exit(const EpisodeTrace& calibration, double target_mean_step);
ExitCalibration calibrate_exit(const ModelParams<double>& model, const Dataset& calibration, double target_mean_step,
                               std::uint64_t seed);

/// Per-step thresholds letting about `fraction` of the still-running
/// calibration episodes exit at each step before the last.
ExitPolicy exit_policy_for_fraction(const EpisodeTrace& calibration, double fraction);

struct ExitResult {
  double accuracy = 0;
  double mean_step = 0;
  std::vector<double> histogram;  // fraction of episodes exiting at each step
};

ExitResult apply_exit(const EpisodeTrace& trace, const ExitPolicy& policy);
ExitResult exit_eval(const ModelParams<double>& model, const Dataset& data, const ExitPolicy& policy,
                     const std::vector<std::uint64_t>& seeds);

/// Fraction of samples for which some ordered, duplicate-free trajectory of
/// length t (over every first view) ends in a correct prediction. Entry t-1
/// of the curve is the bound at length t.
VectorXd upper_bound_curve(const ModelParams<double>& model, const Dataset& data);
double upper_bound(const ModelParams<double>& model, const Dataset& data, Index length);

struct ProbeConfig {
  Index hidden = 32;
  int epochs = 300;
  double lr = 0.01;
  std::uint64_t seed = 0;
};

struct ViewAnalysis {
  MatrixXd accuracy;  // V x C per-(view, class) test accuracy
  VectorXd gap;       // per class: max over views - min over views
  double mean_gap = 0;
  std::vector<Index> best_view;  // per class, lowest index among ties
  bool ranking_inconsistent = false;
};

/// Trains one single-view probe per view and tabulates per-class accuracy.
ViewAnalysis per_view_analysis(const Dataset& train, const Dataset& test, const ProbeConfig& cfg = {});
ViewAnalysis summarize_view_accuracy(MatrixXd accuracy);

/// Averages the model's single-view predictions along random duplicate-free
/// trajectories (same first views as run_episodes for a seed).
AccuracyCurve ensemble_baseline(const ModelParams<double>& single_view_model, const Dataset& data,
                                const std::vector<std::uint64_t>& seeds);

struct ExitPoint {
  double target = 0;
  double mean_step = 0;
  double accuracy = 0;
};

struct EvalReport {
  std::string mode;
  AccuracyCurve curve;
  Metrics scores;
  std::vector<double> exit_histogram;
  std::vector<ExitPoint> exit_curve;
  std::optional<VectorXd> upper;
  std::optional<MatrixXd> view_matrix;
};

/// Writes curve.csv, metrics.csv and, when present, exit.csv,
/// upper_bound.csv and view_matrix.csv.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

std::string format_double(double v);

}  // namespace activeview

#endif  // ACTIVEVIEW_EVAL_EVAL_HPP_
