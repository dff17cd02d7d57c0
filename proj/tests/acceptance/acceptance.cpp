// Acceptance run: one [PASS]/[FAIL] line per criterion; exit status 1 if any fail.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "activeview/env/synthetic.hpp"
#include "activeview/eval/eval.hpp"
#include "activeview/numcore/grad_check.hpp"
#include "activeview/pipeline/pipeline.hpp"
#include "fixtures.hpp"

using namespace activeview;
using activeview::testing::random_matrix;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

void progress(const std::string& msg) { std::cerr << "  .. " << msg << std::endl; }

// ---------------------------------------------------------------- gradients

double gru_grad_error(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto m = init_model<double>(activeview::testing::tiny_dims(), rng);
  m.gru_e.b_z = random_matrix(1, 4, rng, 0.3);
  m.gru_e.b_r = random_matrix(1, 4, rng, 0.3);
  m.gru_e.b_n = random_matrix(1, 4, rng, 0.3);
  const MatrixXd h0 = random_matrix(2, 4, rng), x = random_matrix(2, 3, rng);
  const LossBuilder<double> f = [&](Tape<double>& t, const std::vector<Var<double>>& p) {
    const GruWeights<Var<double>> g{p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8]};
    return sum(square(gru_step(g, p[9], t.constant(x))));
  };
  const auto& g = m.gru_e;
  return grad_check<double>(f, {g.w_z, g.u_z, g.b_z, g.w_r, g.u_r, g.b_r, g.w_n, g.u_n, g.b_n, h0}, 1e-5);
}

double stage1_grad_error(std::uint64_t seed, double h) {
  std::mt19937_64 rng(seed);
  const auto m = init_model<double>(activeview::testing::tiny_dims(), rng);
  const std::vector<MatrixXd> xs{random_matrix(3, 3, rng), random_matrix(3, 3, rng), random_matrix(3, 3, rng)};
  std::uniform_int_distribution<Index> label(0, 3);
  const std::vector<Index> labels{label(rng), label(rng), label(rng)};
  return activeview::testing::stage1_grad_error(m, xs, labels, h);
}

// Ratios are kept at least 0.02 inside the clip band so min/clip stay smooth.
double ppo_grad_error(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const PpoConfig cfg;
  const MatrixXd logits0 = random_matrix(6, 4, rng);
  const MatrixXd adv = random_matrix(6, 1, rng), tgt = random_matrix(6, 1, rng);
  std::uniform_int_distribution<Index> action(0, 3);
  std::vector<Index> actions;
  for (int i = 0; i < 6; ++i) actions.push_back(action(rng));
  const MatrixXd old_lp = log_floor(pick(softmax_rows(logits0), actions));
  MatrixXd logits;
  do {
    logits = logits0 + 0.05 * random_matrix(6, 4, rng);
  } while (((log_floor(pick(softmax_rows(logits), actions)) - old_lp).array().exp() - 1.0).abs().maxCoeff() >
           cfg.clip - 0.02);
  const LossBuilder<double> f = [&](Tape<double>&, const std::vector<Var<double>>& p) {
    const auto pi = softmax_rows(p[0]);
    return ppo_objective(old_lp, adv, tgt, log_floor(pick(pi, actions)), p[1], entropy_rows(pi), cfg).objective;
  };
  return grad_check<double>(f, {logits, random_matrix(6, 1, rng)}, 1e-5);
}

Verdict criterion_gradients() {
  const auto start = Clock::now();
  double gru = 0, ppo = 0;
  std::map<double, double> stage1;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    gru = std::max(gru, gru_grad_error(seed));
    for (double h : {1.0, 2.0, 5.0}) stage1[h] = std::max(stage1[h], stage1_grad_error(seed, h));
    ppo = std::max(ppo, ppo_grad_error(seed));
  }
  const double elapsed = seconds_since(start);
  double worst = std::max(gru, ppo);
  for (const auto& [h, e] : stage1) worst = std::max(worst, e);
  std::ostringstream d;
  d << "max rel err over 100 seeds: gru " << gru << ", stage1 h=1 " << stage1[1.0] << " h=2 " << stage1[2.0]
    << " h=5 " << stage1[5.0] << ", ppo " << ppo << "; " << fmt(elapsed, 1) << " s";
  return {worst <= 1e-4 && elapsed < 60, d.str()};
}

// ------------------------------------------------------------------ metrics

Verdict criterion_metrics() {
  const VectorXd w = default_weights(7);
  const double footnote[] = {0.0000, 0.5079, 0.2540, 0.1270, 0.0635, 0.0317, 0.0159};
  bool ok = std::abs(w.sum() - 1.0) <= 1e-12;
  for (Index t = 0; t < 7; ++t) ok = ok && std::round(w(t) * 1e4) / 1e4 == footnote[t];
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> u(0, 1);
  VectorXd one_hot = VectorXd::Zero(7);
  one_hot(1) = 1;
  for (int trial = 0; trial < 100; ++trial) {
    VectorXd curve(7);
    for (Index t = 0; t < 7; ++t) curve(t) = u(rng);
    const Metrics m = metrics(curve, one_hot);
    ok = ok && m.step2 == m.wmacc;
  }
  std::ostringstream d;
  d << "w(7) =";
  for (Index t = 0; t < 7; ++t) d << ' ' << fmt(w(t));
  d << ", |sum-1| = " << std::abs(w.sum() - 1.0) << ", Step2 == w-mAcc under one-hot on 100 curves";
  return {ok, d.str()};
}

// ------------------------------------------------------------ PPO identities

Verdict criterion_ppo(const std::vector<Rollout>& rollouts) {
  bool ok = true;
  std::mt19937_64 rng(7);
  const PpoConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXd lp = random_matrix(8, 1, rng), adv = random_matrix(8, 1, rng), tgt = random_matrix(8, 1, rng);
    const auto terms = ppo_objective<MatrixXd, double>(lp, adv, tgt, lp, tgt, MatrixXd(MatrixXd::Zero(8, 1)), cfg);
    ok = ok && scalar_of(terms.clip) == adv.mean();
  }
  MatrixXd ratio(2, 1), adv(2, 1);
  ratio << 2.0, 0.5;
  adv << 1.0, -1.0;
  const MatrixXd s = clipped_surrogate<double>(ratio, adv, 0.2);
  ok = ok && s(0, 0) == 1.2 && s(1, 0) == -0.8;
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const double r = u(rng), v = u(rng);
    ok = ok && advantage<double>(v, std::vector<double>{r}, 0.0) == r - v;
  }
  std::size_t checked = 0;
  for (const auto& ro : rollouts) {
    ok = ok && ro.advantages == MatrixXd(ro.rewards - ro.values);
    checked += std::size_t(ro.advantages.size());
  }
  return {ok, "ratio=1 gives mean advantage (100 draws), clip examples 1.2 / -0.8 exact, gamma=0 advantage == r - V on " +
                  std::to_string(checked) + " rollout transitions"};
}

// ---------------------------------------------------------------- telescoping

Verdict criterion_telescoping(const std::vector<Rollout>& rollouts) {
  double worst = 0;
  std::size_t n = 0;
  for (const auto& r : rollouts) {
    const Index last = r.target_prob.cols() - 1;
    for (Index i = 0; i < r.rewards.rows(); ++i, ++n)
      worst = std::max(worst, std::abs(r.rewards.row(i).sum() - (r.target_prob(i, last) - r.target_prob(i, 0))));
  }
  return {worst <= 1e-10 && n > 0, std::to_string(n) + " rollouts, max |sum r - (p_T - p_1)| = " + fmt(worst, 17)};
}

// ------------------------------------------------------------- the runs

struct SeedRun {
  Checkpoint stage1, stage2, stage3;
  Checkpoint dup2, dup3;
  Checkpoint gamma3;
  Checkpoint e2e;
  EvalReport stage2_active, stage2_random;
  Metrics final_active, dup_final, gamma_final, e2e_final;
  double pipeline_seconds = 0;
};

TrainConfig base_config(std::uint64_t seed) {
  TrainConfig c;
  c.seed = seed;
  return c;
}

SeedRun run_seed(std::uint64_t seed, const Dataset& train, const Dataset& test) {
  SeedRun r;
  const auto evals = default_eval_seeds();
  const TrainConfig cfg = base_config(seed);
  TrainContext ctx;
  const auto start = Clock::now();
  r.stage1 = train_stage1(initial_checkpoint(cfg, train), cfg, train, ctx);
  r.stage2 = train_stage2(r.stage1, cfg, train, ctx);
  r.stage3 = train_stage3(r.stage2, cfg, train, ctx);
  r.pipeline_seconds = seconds_since(start);
  r.stage2_active = evaluate(r.stage2.params, test, PolicyMode::kActive, evals);
  r.stage2_random = evaluate(r.stage2.params, test, PolicyMode::kRandom, evals);
  r.final_active = evaluate(r.stage3.params, test, PolicyMode::kActive, evals).scores;
  progress("seed " + std::to_string(seed) + " baseline in " + fmt(r.pipeline_seconds, 1) + " s");

  // Stage I does not depend on the flags below, so its checkpoint is shared.
  TrainConfig dup = cfg;
  dup.allow_duplicates = true;
  r.dup2 = train_stage2(r.stage1, dup, train, ctx);
  r.dup3 = train_stage3(r.dup2, dup, train, ctx);
  r.dup_final = evaluate(r.dup3.params, test, PolicyMode::kDuplicates, evals).scores;

  TrainConfig gamma = cfg;
  gamma.ppo.gamma = 0.5;
  r.gamma3 = train_stage3(train_stage2(r.stage1, gamma, train, ctx), gamma, train, ctx);
  r.gamma_final = evaluate(r.gamma3.params, test, PolicyMode::kActive, evals).scores;

  TrainConfig e2e = cfg;
  e2e.end_to_end = true;
  r.e2e = train_end_to_end(initial_checkpoint(e2e, train), e2e, train, ctx);
  r.e2e_final = evaluate(r.e2e.params, test, PolicyMode::kActive, evals).scores;
  progress("seed " + std::to_string(seed) + " ablations done");
  return r;
}

// ------------------------------------------------------------------ freezing

Verdict criterion_freezing(const std::vector<SeedRun>& runs, const Checkpoint& smoke1, const Checkpoint& smoke2,
                           const Checkpoint& smoke3) {
  bool ok = components_equal(smoke2.params, smoke1.params, kRecognition) &&
            components_equal(smoke3.params, smoke2.params, kSelection);
  int pairs = 1;
  for (const auto& r : runs) {
    ok = ok && components_equal(r.stage2.params, r.stage1.params, kRecognition);
    ok = ok && components_equal(r.stage3.params, r.stage2.params, kSelection);
    ok = ok && components_equal(r.dup2.params, r.stage1.params, kRecognition);
    ok = ok && components_equal(r.dup3.params, r.dup2.params, kSelection);
    pairs += 2;
  }
  return {ok, "Stage II recognition and Stage III selection parameters bit-identical across " +
                  std::to_string(pairs) + " stage pairs"};
}

// --------------------------------------------------------------- upper bound

Verdict criterion_upper_bound(const Dataset& test, const std::vector<const Checkpoint*>& checkpoints,
                              const Checkpoint& single_view) {
  const auto start = Clock::now();
  bool exact = true, dominated = true, ensemble = true;
  const std::vector<std::uint64_t> seeds = default_eval_seeds();
  const AccuracyCurve ens = ensemble_baseline(single_view.params, test, seeds);
  double min_margin = 1;
  for (const Checkpoint* c : checkpoints) {
    const VectorXd ub = upper_bound_curve(c->params, test);
    exact = exact && ub == activeview::testing::enumerate_upper_bound(c->params, test);
    for (auto mode : {PolicyMode::kActive, PolicyMode::kRandom})
      for (auto seed : seeds) {
        const VectorXd acc = step_accuracy(run_episodes(c->params, test, mode, seed));
        dominated = dominated && (ub.array() >= acc.array()).all();
        min_margin = std::min(min_margin, (ub - acc).minCoeff());
      }
    if (c->stage > 0) ensemble = ensemble && (ub.array() >= ens.mean.array()).all();
  }
  const double elapsed = seconds_since(start);
  std::ostringstream d;
  d << checkpoints.size() << " checkpoints, V=" << test.view_count() << ": batched bound "
    << (exact ? "==" : "!=") << " per-sample enumeration, min margin over active/random " << fmt(min_margin)
    << ", trained checkpoints vs ensemble " << (ensemble ? "dominant" : "NOT dominant") << "; " << fmt(elapsed, 1)
    << " s";
  return {exact && dominated && ensemble && elapsed < 120, d.str()};
}

// ------------------------------------------------------------------ efficacy

Verdict criterion_efficacy(const std::vector<SeedRun>& runs) {
  double step2 = 0, wmacc = 0, worst_step2 = 1, worst_wmacc = 1, slowest = 0;
  for (const auto& r : runs) {
    const double s = r.stage2_active.scores.step2 - r.stage2_random.scores.step2;
    const double w = r.stage2_active.scores.wmacc - r.stage2_random.scores.wmacc;
    step2 += s / double(runs.size());
    wmacc += w / double(runs.size());
    worst_step2 = std::min(worst_step2, s);
    worst_wmacc = std::min(worst_wmacc, w);
    slowest = std::max(slowest, r.pipeline_seconds);
  }
  std::ostringstream d;
  d << runs.size() << " seeds, Stage II active - random: Step2-Acc +" << fmt(100 * step2, 2) << " pts (min +"
    << fmt(100 * worst_step2, 2) << "), w-mAcc +" << fmt(100 * wmacc, 2) << " pts (min +" << fmt(100 * worst_wmacc, 2)
    << "); slowest 3-stage run " << fmt(slowest, 1) << " s";
  return {step2 >= 0.10 && wmacc >= 0.05 && slowest < 900, d.str()};
}

// ------------------------------------------------------------- view analysis

// Nearest class mean per view over all classes, scored per (view, class).
MatrixXd nearest_mean_table(const Dataset& train, const Dataset& test) {
  MatrixXd table = MatrixXd::Zero(train.view_count(), train.classes);
  VectorXd per_class = VectorXd::Zero(train.classes);
  for (Index i = 0; i < test.size(); ++i) per_class(test.labels[i]) += 1;
  for (Index v = 0; v < train.view_count(); ++v) {
    MatrixXd means = MatrixXd::Zero(train.classes, train.feature_dim());
    VectorXd counts = VectorXd::Zero(train.classes);
    for (Index i = 0; i < train.size(); ++i) {
      means.row(train.labels[i]) += train.views[v].row(i);
      counts(train.labels[i]) += 1;
    }
    for (Index c = 0; c < train.classes; ++c) means.row(c) /= counts(c);
    for (Index i = 0; i < test.size(); ++i) {
      Index best = 0;
      (means.rowwise() - test.views[v].row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (best == test.labels[i]) table(v, test.labels[i]) += 1.0 / per_class(test.labels[i]);
    }
  }
  return table;
}

Verdict criterion_views(const Dataset& train, const Dataset& test) {
  const ViewAnalysis a = per_view_analysis(train, test);
  const ViewAnalysis oracle = summarize_view_accuracy(nearest_mean_table(train, test));
  std::ostringstream d;
  d << "mean max-min gap " << fmt(a.mean_gap) << " (nearest-mean oracle " << fmt(oracle.mean_gap)
    << "), ranking inconsistent = " << (a.ranking_inconsistent ? "true" : "false");
  return {a.mean_gap >= 0.5 && a.ranking_inconsistent && std::abs(a.mean_gap - oracle.mean_gap) <= 0.15, d.str()};
}

// ---------------------------------------------------------------------- exit

Verdict criterion_exit(const ModelParams<double>& model, const Dataset& train, const Dataset& test) {
  bool ok = true;
  std::ostringstream d;
  d << "held-out mean step:";
  for (double target : {2.0, 3.0, 4.0}) {
    const ExitCalibration cal = calibrate_exit(model, train, target, 0);
    const ExitResult res = exit_eval(model, test, cal.policy, {0});
    ok = ok && std::abs(res.mean_step - target) <= 0.25;
    d << " S*=" << target << " -> " << fmt(res.mean_step, 3) << " (acc " << fmt(res.accuracy, 3) << ")";
  }
  const Index T = test.view_count();
  bool endpoints = true;
  for (auto seed : default_eval_seeds()) {
    const EpisodeTrace trace = run_episodes(model, test, PolicyMode::kActive, seed);
    const VectorXd acc = step_accuracy(trace);
    const ExitResult first = apply_exit(trace, ExitPolicy{std::vector<double>(T, 0.0)});
    std::vector<double> last_only(T, std::nextafter(1.0, 2.0));
    last_only.back() = 0.0;
    const ExitResult last = apply_exit(trace, ExitPolicy{last_only});
    endpoints = endpoints && first.accuracy == acc(0) && first.mean_step == 1.0 && last.accuracy == acc(T - 1) &&
                last.mean_step == double(T);
  }
  d << "; degenerate policies " << (endpoints ? "==" : "!=") << " step-1 / step-T endpoints";
  return {ok && endpoints, d.str()};
}

// ------------------------------------------------------------------ ablations

Verdict criterion_ablations(const std::vector<SeedRun>& runs) {
  double masked = 0, gamma = 0, staged = 0;
  std::ostringstream per;
  for (const auto& r : runs) {
    const double g1 = r.final_active.wmacc - r.dup_final.wmacc;
    const double g2 = r.final_active.step2 - r.gamma_final.step2;
    const double g3 = r.final_active.wmacc - r.e2e_final.wmacc;
    masked += g1 / double(runs.size());
    gamma += g2 / double(runs.size());
    staged += g3 / double(runs.size());
  }
  std::ostringstream d;
  d << "mean paired gaps over " << runs.size() << " seeds: masked - duplicates w-mAcc " << fmt(100 * masked, 2)
    << " pts, gamma 0 - gamma 0.5 Step2-Acc " << fmt(100 * gamma, 2) << " pts, staged - end-to-end w-mAcc "
    << fmt(100 * staged, 2) << " pts";
  return {masked >= -0.005 && gamma >= -0.005 && staged >= -0.005, d.str()};
}

// --------------------------------------------------------------- determinism

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    files[fs::relative(e.path(), root).string()] = s.str();
  }
  return files;
}

void library_run(const Dataset& train, const Dataset& test, const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto cfg = activeview::testing::smoke_train(5);
  const auto result = run_pipeline(cfg, train, test, default_eval_seeds(), [&](const Checkpoint& c) {
    save_checkpoint(c, dir / ("stage" + std::to_string(c.stage) + ".ckpt"));
  });
  write_training_log(result.context.log, dir / "training_log.csv");
  write_report(result.report, dir / "report");
}

bool cli_run(const fs::path& dir) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto synth = activeview::testing::smoke_synth(2);
  std::ofstream(dir / "synth.json") << synth_config_json(synth);
  std::ofstream(dir / "train.json") << canonical_config_bytes(activeview::testing::smoke_train(2));
  const std::string cli = ACTIVEVIEW_CLI_PATH;
  const std::string quiet = " > " + (dir / "stdout.txt").string() + " 2>&1";
  const std::string d = dir.string();
  return std::system((cli + " gen-data --config " + d + "/synth.json --out " + d + "/data" + quiet).c_str()) == 0 &&
         std::system((cli + " train --config " + d + "/train.json --data " + d + "/data --out " + d + "/run" + quiet)
                         .c_str()) == 0;
}

Verdict criterion_determinism(const Dataset& train, const Dataset& test) {
  const fs::path root = fs::temp_directory_path() / "activeview_acceptance_determinism";
  library_run(train, test, root / "lib_a");
  library_run(train, test, root / "lib_b");
  const auto a = read_tree(root / "lib_a"), b = read_tree(root / "lib_b");
  const bool cli_ok = cli_run(root / "cli_a") && cli_run(root / "cli_b");
  const auto ca = read_tree(root / "cli_a"), cb = read_tree(root / "cli_b");
  const bool ok = a.size() >= 5 && a == b && cli_ok && ca.size() >= 5 && ca == cb;
  std::ostringstream d;
  d << a.size() << " library files and " << ca.size() << " CLI files (checkpoints, logs, reports, data) "
    << (a == b && ca == cb ? "byte-identical" : "DIFFER") << " across two runs" << (cli_ok ? "" : "; CLI run failed");
  return {ok, d.str()};
}

}  // namespace

int main() {
  const auto start = Clock::now();
  std::map<int, Verdict> results;
  const auto record = [&](int n, Verdict v) {
    std::cerr << "  .. criterion " << n << (v.pass ? " ok" : " failed") << " at " << fmt(seconds_since(start), 0)
              << " s" << std::endl;
    results[n] = std::move(v);
  };

  record(1, criterion_gradients());
  record(2, criterion_metrics());

  // Smoke dataset and checkpoints for the exhaustive and structural checks.
  const auto [smoke_tr, smoke_te] = generate_synthetic(activeview::testing::smoke_synth());
  const TrainConfig smoke_cfg = activeview::testing::smoke_train();
  TrainContext smoke_ctx;
  const Checkpoint smoke0 = initial_checkpoint(smoke_cfg, smoke_tr);
  const Checkpoint smoke1 = train_stage1(smoke0, smoke_cfg, smoke_tr, smoke_ctx);
  const Checkpoint smoke2 = train_stage2(smoke1, smoke_cfg, smoke_tr, smoke_ctx);
  const Checkpoint smoke3 = train_stage3(smoke2, smoke_cfg, smoke_tr, smoke_ctx);
  const Checkpoint smoke_single = train_single_view(smoke_cfg, smoke_tr, smoke_ctx);

  std::vector<Rollout> rollouts;
  for (const Checkpoint* c : {&smoke0, &smoke1, &smoke2, &smoke3})
    for (bool dup : {false, true}) {
      TrainConfig cfg = smoke_cfg;
      cfg.allow_duplicates = dup;
      std::mt19937_64 rng(c->stage * 2 + dup);
      rollouts.push_back(collect_rollouts(c->params, smoke_tr, cfg, rng));
    }
  record(3, criterion_ppo(rollouts));
  record(4, criterion_telescoping(rollouts));
  record(6, criterion_upper_bound(smoke_te, {&smoke0, &smoke1, &smoke2, &smoke3}, smoke_single));

  // Planted testbed at default size; dataset and training seeds are paired.
  std::vector<SeedRun> runs;
  Dataset train0, test0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SynthConfig synth;
    synth.seed = seed;
    auto [train, test] = generate_synthetic(synth);
    runs.push_back(run_seed(seed, train, test));
    if (seed == 0) train0 = std::move(train), test0 = std::move(test);
  }
  record(5, criterion_freezing(runs, smoke1, smoke2, smoke3));
  record(7, criterion_efficacy(runs));
  record(8, criterion_views(train0, test0));
  record(9, criterion_exit(runs.front().stage3.params, train0, test0));
  record(10, criterion_ablations(runs));
  record(11, criterion_determinism(smoke_tr, smoke_te));

  int failed = 0;
  for (const auto& [n, v] : results) {
    std::cout << (v.pass ? "[PASS]" : "[FAIL]") << " criterion " << n << ": " << v.detail << '\n';
    failed += !v.pass;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << " in "
            << fmt(seconds_since(start), 1) << " s" << std::endl;
  return failed == 0 ? 0 : 1;
}
