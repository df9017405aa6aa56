#include "acmvl/cotrain.hpp"

#include <cmath>
#include <string>

#include "acmvl/adadelta.hpp"
#include "acmvl/error.hpp"
#include "acmvl/ops.hpp"

namespace acmvl {

namespace {

constexpr std::uint64_t kBatchTag = 0xba7c4;

std::vector<AdaDelta> fresh_optimizers(std::span<const Matrix> weights, double lr,
                                       const TrainConfig& cfg) {
  std::vector<AdaDelta> out;
  out.reserve(weights.size());
  for (const auto& w : weights) out.emplace_back(w.rows(), w.cols(), AdaDeltaParams{cfg.rho, cfg.eps, lr});
  return out;
}

void apply(std::vector<AdaDelta>& opt, std::vector<Matrix>& weights,
           const std::vector<Matrix>& grads) {
  for (std::size_t l = 0; l < weights.size(); ++l) opt[l].step(weights[l], grads[l]);
}

std::string where(Stage stage, std::size_t epoch, int view, std::size_t round) {
  std::string s = "stage " + std::to_string(static_cast<int>(stage)) + ", epoch " +
                  std::to_string(epoch);
  if (view >= 0) s += ", view " + std::to_string(view);
  return s + ", round " + std::to_string(round);
}

void check_loss(double loss, Stage stage, std::size_t epoch, int view, std::size_t round) {
  if (!std::isfinite(loss))
    throw StateError("training diverged (non-finite loss) at " + where(stage, epoch, view, round));
}

RngSeed batch_seed(const TrainConfig& cfg, Stage stage, std::size_t epoch, int view,
                   std::size_t round) {
  const RngSeed base = derive_seed(cfg.seed, kBatchTag, static_cast<std::uint64_t>(stage));
  return derive_seed(derive_seed(base, epoch, static_cast<std::uint64_t>(view + 1)), round);
}

bool should_stop(const TrainConfig& cfg, const LossTrace& trace) {
  return cfg.early_stopping && early_stop_check(trace, cfg.patience) == StopDecision::kStop;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) throw ArgumentError("train.epochs: must be >= 1");
  if (r1 == 0) throw ArgumentError("train.r1: must be >= 1");
  if (r2 == 0) throw ArgumentError("train.r2: must be >= 1");
  if (!(lr_ae > 0.0)) throw ArgumentError("train.lr_ae: must be positive");
  if (!(lr_sup > 0.0)) throw ArgumentError("train.lr_sup: must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw ArgumentError("train.rho: must lie in (0, 1)");
  if (!(eps > 0.0)) throw ArgumentError("train.eps: must be positive");
  if (patience == 0) throw ArgumentError("train.patience: must be >= 1");
  arch.validate();
}

void LossTrace::push(double loss) {
  if (values_.empty() || loss < best_loss_) {
    best_loss_ = loss;
    best_index_ = values_.size();
  }
  values_.push_back(loss);
}

StopDecision early_stop_check(const LossTrace& trace, std::size_t patience) {
  const std::size_t rounds = trace.size();
  if (rounds >= patience && rounds - trace.best_round() >= patience) return StopDecision::kStop;
  return StopDecision::kContinue;
}

SnapshotBank SnapshotBank::from_init(ModelParams init) {
  SnapshotBank bank;
  const std::size_t views = init.encoders.size();
  bank.best_enc = std::move(init.encoders);
  bank.best_dec = std::move(init.decoders);
  bank.best_sup = std::move(init.sup);
  bank.enc_from.assign(views, Provenance{});
  bank.dec_from.assign(views, Provenance{});
  bank.stage1_epoch.assign(views, 0);
  return bank;
}

ModelParams SnapshotBank::model() const { return ModelParams{best_enc, best_dec, best_sup}; }

StageReport run_stage1(std::size_t view, const Matrix& train_x, SnapshotBank& bank,
                       const TrainConfig& cfg, std::size_t epoch) {
  if (!bank.initialized()) throw StateError("stage 1: snapshot bank is not initialized");
  if (view >= bank.view_count()) {
    throw ArgumentError("stage 1: view " + std::to_string(view) + " but the bank holds " +
                        std::to_string(bank.view_count()) + " views");
  }
  if (epoch == 0 || epoch <= bank.stage1_epoch[view]) {
    throw StateError("stage 1: epoch " + std::to_string(epoch) + " for view " +
                     std::to_string(view) + " already ran or is out of order");
  }
  const int view_id = static_cast<int>(view);

  StageReport report;
  report.epoch = epoch;
  report.stage = Stage::kAutoencoder;
  report.view = view_id;

  EncoderParams enc = bank.best_enc[view];
  DecoderParams dec = bank.best_dec[view];
  report.start_enc = {fingerprint(enc)};
  report.start_dec = fingerprint(dec);
  report.start_enc_from = {bank.enc_from[view]};
  report.start_dec_from = bank.dec_from[view];

  auto enc_opt = fresh_optimizers(enc.weights, cfg.lr_ae, cfg);
  auto dec_opt = fresh_optimizers(dec.weights, cfg.lr_ae, cfg);
  EncoderParams best_enc = enc;
  DecoderParams best_dec = dec;
  std::size_t best_round = 0;

  const bool full_batch = cfg.batch_size == 0 || cfg.batch_size >= train_x.rows();
  AeForward fwd;
  if (full_batch) fwd = ae_forward(train_x, enc, dec);

  for (std::size_t round = 1; round <= cfg.r1; ++round) {
    double loss = 0.0;
    if (full_batch) {
      const AeGradients g = ae_backward(fwd, train_x, enc, dec);
      apply(enc_opt, enc.weights, g.encoder);
      apply(dec_opt, dec.weights, g.decoder);
      fwd = ae_forward(train_x, enc, dec);
      loss = recon_loss(train_x, fwd.xhat);
    } else {
      const auto parts = batches(train_x.rows(), cfg.batch_size,
                                 batch_seed(cfg, Stage::kAutoencoder, epoch, view_id, round));
      for (const auto& rows : parts) {
        const Matrix xb = train_x.gather_rows(rows);
        const AeGradients g = ae_backward(ae_forward(xb, enc, dec), xb, enc, dec);
        apply(enc_opt, enc.weights, g.encoder);
        apply(dec_opt, dec.weights, g.decoder);
        loss += g.loss;
      }
      loss /= static_cast<double>(parts.size());
    }
    check_loss(loss, Stage::kAutoencoder, epoch, view_id, round);
    report.trace.push(loss);
    if (report.trace.best_round() == round) {
      best_enc = enc;
      best_dec = dec;
      best_round = round;
    }
    if (should_stop(cfg, report.trace)) {
      report.stopped_early = round < cfg.r1;
      break;
    }
  }

  bank.best_enc[view] = std::move(best_enc);
  bank.best_dec[view] = std::move(best_dec);
  bank.enc_from[view] = bank.dec_from[view] = Provenance{epoch, Stage::kAutoencoder, best_round};
  bank.stage1_epoch[view] = epoch;
  report.end_enc = {fingerprint(bank.best_enc[view])};
  report.end_dec = fingerprint(bank.best_dec[view]);
  return report;
}

StageReport run_stage2(std::span<const Matrix> train_views, std::span<const int> labels,
                       SnapshotBank& bank, const TrainConfig& cfg, std::size_t epoch) {
  if (!bank.initialized()) throw StateError("stage 2: snapshot bank is not initialized");
  if (train_views.size() != bank.view_count()) {
    throw ArgumentError("stage 2: " + std::to_string(train_views.size()) + " views but the bank holds " +
                        std::to_string(bank.view_count()));
  }
  for (std::size_t v = 0; v < bank.view_count(); ++v) {
    if (bank.stage1_epoch[v] != epoch) {
      throw StateError("stage 2 of epoch " + std::to_string(epoch) + " requires stage 1 of view " +
                       std::to_string(v) + " in the same epoch (last ran in epoch " +
                       std::to_string(bank.stage1_epoch[v]) + ")");
    }
  }
  if (bank.stage2_epoch >= epoch)
    throw StateError("stage 2 of epoch " + std::to_string(epoch) + " already ran");

  const std::size_t views = bank.view_count();
  const Matrix y = one_hot(labels, bank.best_sup.head.back().cols());

  StageReport report;
  report.epoch = epoch;
  report.stage = Stage::kSupervised;
  report.view = -1;

  std::vector<EncoderParams> encs = bank.best_enc;
  SupervisedParams sup = bank.best_sup;
  for (const auto& e : encs) report.start_enc.push_back(fingerprint(e));
  report.start_enc_from = bank.enc_from;
  report.start_sup = fingerprint(sup);
  report.start_sup_from = bank.sup_from;

  std::vector<std::vector<AdaDelta>> enc_opt;
  for (const auto& e : encs) enc_opt.push_back(fresh_optimizers(e.weights, cfg.lr_sup, cfg));
  auto share_opt = fresh_optimizers(std::span<const Matrix>(&sup.w_share, 1), cfg.lr_sup, cfg);
  auto head_opt = fresh_optimizers(sup.head, cfg.lr_sup, cfg);

  auto step_all = [&](const SupGradients& g) {
    share_opt[0].step(sup.w_share, g.w_share);
    apply(head_opt, sup.head, g.head);
    for (std::size_t v = 0; v < views; ++v) apply(enc_opt[v], encs[v].weights, g.encoders[v]);
  };

  std::vector<EncoderParams> best_encs = encs;
  SupervisedParams best_sup = sup;
  std::size_t best_round = 0;
  const std::size_t n = labels.size();
  const bool full_batch = cfg.batch_size == 0 || cfg.batch_size >= n;
  SupForward fwd;
  if (full_batch) fwd = sup_forward(train_views, encs, sup);

  for (std::size_t round = 1; round <= cfg.r2; ++round) {
    double loss = 0.0;
    if (full_batch) {
      step_all(sup_backward(fwd, train_views, y, encs, sup));
      fwd = sup_forward(train_views, encs, sup);
      loss = ce_loss(fwd.yhat, y);
    } else {
      const auto parts = batches(n, cfg.batch_size, batch_seed(cfg, Stage::kSupervised, epoch, -1, round));
      for (const auto& rows : parts) {
        std::vector<Matrix> xb;
        for (const auto& x : train_views) xb.push_back(x.gather_rows(rows));
        const Matrix yb = y.gather_rows(rows);
        const SupGradients g = sup_backward(sup_forward(xb, encs, sup), xb, yb, encs, sup);
        step_all(g);
        loss += g.loss;
      }
      loss /= static_cast<double>(parts.size());
    }
    check_loss(loss, Stage::kSupervised, epoch, -1, round);
    report.trace.push(loss);
    if (report.trace.best_round() == round) {
      best_encs = encs;
      best_sup = sup;
      best_round = round;
    }
    if (should_stop(cfg, report.trace)) {
      report.stopped_early = round < cfg.r2;
      break;
    }
  }

  const Provenance from{epoch, Stage::kSupervised, best_round};
  bank.best_enc = std::move(best_encs);
  bank.best_sup = std::move(best_sup);
  bank.enc_from.assign(views, from);
  bank.sup_from = from;
  bank.stage2_epoch = epoch;
  for (const auto& e : bank.best_enc) report.end_enc.push_back(fingerprint(e));
  report.end_sup = fingerprint(bank.best_sup);
  return report;
}

void check_arch_matches(const ArchSpec& arch, const MultiViewDataset& ds) {
  if (arch.view_count() != ds.view_count()) {
    throw ShapeError("architecture declares " + std::to_string(arch.view_count()) +
                     " views, dataset has " + std::to_string(ds.view_count()));
  }
  for (std::size_t v = 0; v < ds.view_count(); ++v) {
    if (arch.view_input_dims[v] != ds.views[v].cols()) {
      throw ShapeError("view " + std::to_string(v) + ": architecture expects " +
                       std::to_string(arch.view_input_dims[v]) + " features, dataset has " +
                       std::to_string(ds.views[v].cols()));
    }
  }
  if (arch.class_count() < ds.class_count) {
    throw ShapeError("architecture predicts " + std::to_string(arch.class_count()) +
                     " classes, dataset has " + std::to_string(ds.class_count));
  }
}

TrainResult run_cotraining(const MultiViewDataset& train, const TrainConfig& cfg,
                           const TrainHooks& hooks) {
  cfg.validate();
  if (train.rows() == 0 || train.view_count() == 0) throw ArgumentError("cotraining: empty dataset");
  train.validate();
  if (train.distinct_classes() < 2)
    throw ArgumentError("cotraining: labels contain a single class");
  check_arch_matches(cfg.arch, train);

  TrainResult result;
  result.bank = SnapshotBank::from_init(init_model(cfg.arch, cfg.seed));
  auto record = [&](StageReport report) {
    if (hooks.on_stage_end) hooks.on_stage_end(report);
    result.stages.push_back(std::move(report));
  };
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t v = 0; v < train.view_count(); ++v)
      record(run_stage1(v, train.views[v], result.bank, cfg, epoch));
    if (cfg.cotraining) record(run_stage2(train.views, train.labels, result.bank, cfg, epoch));
    if (hooks.on_epoch_end) hooks.on_epoch_end(epoch, result.bank);
  }
  return result;
}

}  // namespace acmvl
