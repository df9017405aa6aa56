// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "acmvl/adadelta.hpp"
#include "acmvl/cli.hpp"
#include "acmvl/cotrain.hpp"
#include "acmvl/eval.hpp"
#include "acmvl/protocol.hpp"
#include "support/reference_net.hpp"

using namespace acmvl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// --- 1 ---------------------------------------------------------------------

Outcome gradient_correctness() {
  constexpr std::size_t kInstances = 25;
  double worst = 0.0;
  std::size_t ae = 0, sup = 0;
  for (std::uint64_t seed = 1000; (ae < kInstances || sup < kInstances) && seed < 5000; ++seed) {
    testing::Instance inst = testing::random_instance(seed);
    if (ae < kInstances && testing::ae_kink_free(inst, seed % 2)) {
      worst = std::max(worst, testing::ae_gradient_error(inst, seed % 2));
      ++ae;
    }
    if (sup < kInstances && testing::sup_kink_free(inst)) {
      worst = std::max(worst, testing::sup_gradient_error(inst));
      ++sup;
    }
  }
  const bool pass = ae >= 20 && sup >= 20 && worst <= 1e-4;
  return {pass, std::to_string(ae) + " autoencoder + " + std::to_string(sup) +
                    " supervised instances, worst rel err " + fmt("%.2e", worst) + " (limit 1e-4)"};
}

// --- 2 ---------------------------------------------------------------------

Outcome optimizer_oracle() {
  // f(w) = w^2 from w = 1, rho 0.95, eps 1e-6, lr 0.5. The frozen values come
  // from a 40-digit decimal evaluation of the recurrence.
  constexpr double kFrozen[10] = {0.9977639376126491, 0.9959756072521055, 0.9944134735116359,
                                  0.9929954247829318, 0.9916801245230887, 0.9904431971676337,
                                  0.9892687876655569, 0.9881458667694907, 0.9870663767850666,
                                  0.9860242065269048};
  const double rho = 0.95, eps = 1e-6, lr = 0.5;
  double ref_w = 1.0, eg = 0.0, ex = 0.0;
  AdaDelta opt(1, 1, {rho, eps, lr});
  Matrix w{{1.0}};
  double worst = 0.0;
  for (double frozen : kFrozen) {
    const double g = 2.0 * ref_w;
    eg = rho * eg + (1.0 - rho) * g * g;
    const double dx = -lr * std::sqrt(ex + eps) / std::sqrt(eg + eps) * g;
    ex = rho * ex + (1.0 - rho) * dx * dx;
    ref_w += dx;

    opt.step(w, Matrix{{2.0 * w(0, 0)}});
    worst = std::max({worst, std::abs(w(0, 0) - ref_w), std::abs(w(0, 0) - frozen)});
  }
  return {worst <= 1e-12, "10 steps, worst deviation " + fmt("%.2e", worst) + " (limit 1e-12)"};
}

// --- 3 ---------------------------------------------------------------------

Outcome schedule_wiring() {
  SynthSpec spec;
  spec.classes = 3;
  spec.samples_per_class = 12;
  spec.latent_dim = 3;
  spec.view_dims = {8, 6};
  MultiViewDataset ds = synth_multiview(spec, RngSeed{31});
  ds = apply_scaling(ds, fit_min_max(ds));
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.r1 = 25;
  cfg.r2 = 25;
  cfg.seed = RngSeed{2};
  cfg.arch.view_input_dims = ds.view_dims();
  cfg.arch.encoder_dims = {6, 4, 3};
  cfg.arch.joint_dim = 3;
  cfg.arch.supervised_dims = {4, 3};
  const ModelParams init = init_model(cfg.arch, cfg.seed);
  const TrainResult res = run_cotraining(ds, cfg);

  std::size_t checks = 0, failures = 0;
  auto expect = [&](bool ok) {
    ++checks;
    if (!ok) ++failures;
  };
  const std::size_t views = ds.view_count();
  const std::size_t per_epoch = views + 1;
  if (res.stages.size() != cfg.epochs * per_epoch) return {false, "unexpected stage count"};
  for (std::size_t e = 1; e <= cfg.epochs; ++e) {
    const StageReport& s2 = res.stages[(e - 1) * per_epoch + views];
    for (std::size_t v = 0; v < views; ++v) {
      const StageReport& s1 = res.stages[(e - 1) * per_epoch + v];
      if (e == 1) {
        expect(s1.start_enc[0] == fingerprint(init.encoders[v]));
        expect(s1.start_dec == fingerprint(init.decoders[v]));
      } else {
        const StageReport& prev1 = res.stages[(e - 2) * per_epoch + v];
        const StageReport& prev2 = res.stages[(e - 2) * per_epoch + views];
        expect(s1.start_enc[0] == prev2.end_enc[v]);
        expect(s1.start_dec == prev1.end_dec);
      }
      expect(s2.start_enc[v] == s1.end_enc[0]);
    }
    if (e == 1) {
      expect(s2.start_sup == fingerprint(init.sup));
    } else {
      expect(s2.start_sup == res.stages[(e - 2) * per_epoch + views].end_sup);
    }
  }
  return {failures == 0, std::to_string(checks - failures) + "/" + std::to_string(checks) +
                             " hand-offs verified by fingerprint over 3 epochs"};
}

// --- 4 ---------------------------------------------------------------------

Outcome early_stopping() {
  auto first_stop = [](const std::function<double(std::size_t)>& loss) -> std::size_t {
    LossTrace t;
    for (std::size_t round = 1; round <= 1000; ++round) {
      t.push(loss(round));
      if (early_stop_check(t, 200) == StopDecision::kStop) return round;
    }
    return 0;
  };
  const std::size_t decreasing = first_stop([](std::size_t r) { return 1.0 / static_cast<double>(r); });
  const std::size_t constant = first_stop([](std::size_t) { return 1.0; });
  const std::size_t plateau =
      first_stop([](std::size_t r) { return r <= 150 ? 1.0 / static_cast<double>(r) : 1.0 / 150.0; });
  const bool pass = decreasing == 0 && constant == 201 && plateau == 350;
  auto show = [](std::size_t r) { return r == 0 ? std::string("never") : "after round " + std::to_string(r); };
  return {pass, "decreasing: " + show(decreasing) + ", constant: " + show(constant) +
                    ", best at 150: " + show(plateau)};
}

// --- 5 and 6 ---------------------------------------------------------------

struct EndToEnd {
  Outcome learning;
  Outcome reconstruction;
};

EndToEnd end_to_end() {
  SynthSpec spec;
  spec.views = 2;
  spec.classes = 4;
  spec.samples_per_class = 100;
  spec.latent_dim = 4;
  spec.noise_std = 0.3;
  spec.view_dims = {20, 20};
  const MultiViewDataset full = synth_multiview(spec, RngSeed{2024});
  Split parts = split(full, 0.5, RngSeed{17});
  const FeatureScaling scaling = fit_min_max(parts.train);
  parts.train = apply_scaling(parts.train, scaling);
  parts.test = apply_scaling(parts.test, scaling);

  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.r1 = 300;
  cfg.r2 = 300;
  cfg.patience = 200;
  cfg.seed = RngSeed{1};
  cfg.arch.view_input_dims = full.view_dims();
  cfg.arch.encoder_dims = {16, 8, 4};
  cfg.arch.joint_dim = 4;
  cfg.arch.supervised_dims = {16, 8, 4};

  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult res = run_cotraining(parts.train, cfg);
  const ModelParams model = res.bank.model();
  const MetricsReport report = evaluate_protocol(parts.train, parts.test, &model, cfg, {}, "synthetic");
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::printf("      metrics (test half):\n");
  for (const auto& r : report.records)
    std::printf("        %-7s %-13s %-4s %.4f\n", r.view.c_str(), r.method.c_str(), r.metric.c_str(), r.value);

  const double joint = report.find("joint", "LR-ACMVL", "ACC").value_or(0.0);
  double best_raw = 0.0;
  for (std::size_t v = 0; v < full.view_count(); ++v)
    best_raw = std::max(best_raw, report.find("view_" + std::to_string(v), "LR", "ACC").value_or(1.0));
  EndToEnd out;
  out.learning.pass = joint >= 0.90 && joint >= best_raw - 0.05 && seconds < 180.0;
  out.learning.detail = "joint LR ACC " + fmt("%.4f", joint) + " (need >= 0.90 and >= " +
                        fmt("%.4f", best_raw - 0.05) + "), best raw view ACC " + fmt("%.4f", best_raw) +
                        ", " + fmt("%.1f", seconds) + " s";

  const std::size_t views = full.view_count();
  const std::size_t per_epoch = views + 1;
  bool ok = true;
  std::string detail;
  for (std::size_t v = 0; v < views; ++v) {
    const double first = res.stages[v].trace.values().front();
    const double last_best = res.stages[(cfg.epochs - 1) * per_epoch + v].trace.best_loss();
    ok = ok && last_best <= 0.5 * first;
    detail += (v ? "; " : "") + std::string("view ") + std::to_string(v) + ": " + fmt("%.5f", last_best) +
              " vs 0.5 x " + fmt("%.5f", first);
  }
  out.reconstruction = {ok, detail};
  return out;
}

// --- 7 ---------------------------------------------------------------------

Outcome metric_oracles() {
  const std::vector<int> truth{0, 0, 1, 1}, pred{0, 1, 0, 1}, ones{1, 1, 1, 1};
  bool ok = accuracy(pred, truth) == 0.5 && macro_f1(pred, truth) == 0.5;
  ok = ok && accuracy(ones, truth) == 0.5 && std::abs(macro_f1(ones, truth) - 1.0 / 3.0) < 1e-15;
  ok = ok && accuracy(truth, truth) == 1.0 && macro_f1(truth, truth) == 1.0;
  ok = ok && std::abs(nmi(truth, pred)) < 1e-15 && jaccard(truth, pred) == 0.0;
  ok = ok && std::abs(nmi(truth, truth) - 1.0) < 1e-15 && jaccard(truth, truth) == 1.0;
  ok = ok && nmi(ones, truth) == 0.0;
  const bool hand_counts = ok;

  // Two spherical blobs 10 units apart.
  Rng rng(RngSeed{5});
  Matrix x(200, 2);
  std::vector<int> labels;
  for (std::size_t i = 0; i < 200; ++i) {
    const int k = i < 100 ? 0 : 1;
    x(i, 0) = rng.normal(k * 10.0, 1.0);
    x(i, 1) = rng.normal(0.0, 1.0);
    labels.push_back(k);
  }
  const GmmFit fit = fit_gmm(x, 2, RngSeed{9});
  bool monotone = true;
  for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i)
    monotone = monotone && fit.log_likelihood[i] >= fit.log_likelihood[i - 1] - 1e-9;
  const double score = nmi(predict_gmm(fit.model, x), labels);
  return {hand_counts && monotone && score >= 0.95,
          std::string("hand counts ") + (hand_counts ? "exact" : "WRONG") + ", EM " +
              std::to_string(fit.log_likelihood.size() - 1) + " iterations " +
              (monotone ? "non-decreasing" : "DECREASED") + ", blob NMI " + fmt("%.4f", score)};
}

// --- 8 ---------------------------------------------------------------------

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome determinism() {
  const fs::path dir = fs::path(ACMVL_TEST_TMP) / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::ofstream(dir / "config.json") << R"({
  "name": "determinism",
  "seed": 99,
  "synth": {"views": 2, "classes": 3, "samples_per_class": 20, "latent_dim": 3,
            "noise_std": 0.2, "view_dims": [10, 8], "seed": 4},
  "arch": {"encoder_dims": [8, 6, 4], "head_dims": [6]},
  "train": {"epochs": 2, "r1": 40, "r2": 40, "batch_size": 16},
  "scale": true,
  "output_dir": "out"
})";
  std::ostringstream out, err;
  const cli::Streams io{out, err, cli::LogLevel::kQuiet};
  if (cli::cmd_train(dir / "config.json", io) != cli::kExitOk) return {false, "first run failed: " + err.str()};
  const std::string first = slurp(dir / "out" / "loss_trace.csv");
  const std::string first_ckpt = slurp(dir / "out" / "checkpoint.json");
  if (cli::cmd_train(dir / "config.json", io) != cli::kExitOk) return {false, "second run failed: " + err.str()};
  const std::string second = slurp(dir / "out" / "loss_trace.csv");
  const std::string second_ckpt = slurp(dir / "out" / "checkpoint.json");
  const bool same = !first.empty() && first == second;
  return {same, std::to_string(first.size()) + "-byte loss traces " + (same ? "identical" : "DIFFER") +
                    ", checkpoints " + (first_ckpt == second_ckpt ? "identical" : "differ")};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int id, const char* title, const Outcome& o) {
    std::printf("[%s] %d. %s: %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };
  auto timed = [](const std::function<Outcome()>& f, double limit) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o = f();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit > 0.0 && s >= limit) o.pass = false;
    o.detail += ", " + fmt("%.2f", s) + " s";
    return o;
  };

  report(1, "gradient correctness", timed(gradient_correctness, 30.0));
  report(2, "optimizer oracle", timed(optimizer_oracle, 0.0));
  report(3, "schedule wiring", timed(schedule_wiring, 0.0));
  report(4, "early stopping", timed(early_stopping, 0.0));
  const EndToEnd e2e = end_to_end();
  report(5, "end-to-end learning", e2e.learning);
  report(6, "reconstruction improvement", e2e.reconstruction);
  report(7, "metric oracles", timed(metric_oracles, 0.0));
  report(8, "determinism", timed(determinism, 0.0));
  std::printf("[INFO] 9. published benchmark tables: not an acceptance target; they need external "
              "datasets and preprocessing that are not available. Criterion 5's joint-vs-view "
              "ordering stands in for them.\n");
  std::printf("%s: %d of 8 criteria failed\n", failed ? "FAILED" : "OK", failed);
  return failed ? 1 : 0;
}
