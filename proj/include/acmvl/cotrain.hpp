#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "acmvl/dataset.hpp"
#include "acmvl/networks.hpp"
#include "acmvl/rng.hpp"

namespace acmvl {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t r1 = 1000;  // rounds of autoencoder training per view per epoch
  std::size_t r2 = 1000;  // rounds of supervised training per epoch
  double lr_ae = 0.5;
  double lr_sup = 0.9;
  double rho = 0.95;
  double eps = 1e-6;
  bool early_stopping = true;
  std::size_t patience = 200;
  /// 0 means full batch.
  std::size_t batch_size = 0;
  /// When false stage 2 never runs, which yields plain per-view autoencoders.
  bool cotraining = true;
  RngSeed seed{0};
  ArchSpec arch;

  void validate() const;
};

/// Per-round losses of one stage run.
class LossTrace {
 public:
  void push(double loss);

  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  /// 1-based round of the first occurrence of the minimum.
  std::size_t best_round() const noexcept { return best_index_ + 1; }
  double best_loss() const noexcept { return best_loss_; }

 private:
  std::vector<double> values_;
  std::size_t best_index_ = 0;
  double best_loss_ = std::numeric_limits<double>::infinity();
};

enum class StopDecision { kContinue, kStop };

/// Stop once `patience` rounds have passed without a strict improvement of the
/// best loss: rounds >= patience and rounds - best_round >= patience.
StopDecision early_stop_check(const LossTrace& trace, std::size_t patience);

enum class Stage : int { kInit = 0, kAutoencoder = 1, kSupervised = 2 };

/// Where a snapshot was captured. {0, kInit, 0} is the Xavier initialization.
struct Provenance {
  std::size_t epoch = 0;
  Stage stage = Stage::kInit;
  std::size_t round = 0;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Best-so-far parameters handed between stages. One slot per bundle is
/// enough to realize the hand-offs: stage 1 reads the encoder written by the
/// previous stage 2 and the decoder written by the previous stage 1; stage 2
/// reads the encoders written by this epoch's stage 1 and the supervised
/// weights written by the previous stage 2.
struct SnapshotBank {
  std::vector<EncoderParams> best_enc;
  std::vector<DecoderParams> best_dec;
  SupervisedParams best_sup;
  std::vector<Provenance> enc_from;
  std::vector<Provenance> dec_from;
  Provenance sup_from;
  /// Last epoch in which each view finished stage 1, and in which stage 2 ran.
  std::vector<std::size_t> stage1_epoch;
  std::size_t stage2_epoch = 0;

  static SnapshotBank from_init(ModelParams init);
  bool initialized() const noexcept { return !best_enc.empty(); }
  std::size_t view_count() const noexcept { return best_enc.size(); }
  ModelParams model() const;

  friend bool operator==(const SnapshotBank&, const SnapshotBank&) = default;
};

/// Everything one stage run did, including fingerprints of the parameters it
/// started from so that hand-offs can be audited afterwards.
struct StageReport {
  std::size_t epoch = 0;
  Stage stage = Stage::kAutoencoder;
  int view = -1;  // -1 for stage 2
  LossTrace trace;
  bool stopped_early = false;

  std::vector<std::uint64_t> start_enc;  // one per view trained
  std::uint64_t start_dec = 0;           // stage 1 only
  std::uint64_t start_sup = 0;           // stage 2 only
  std::vector<Provenance> start_enc_from;
  Provenance start_dec_from;
  Provenance start_sup_from;

  std::vector<std::uint64_t> end_enc;
  std::uint64_t end_dec = 0;
  std::uint64_t end_sup = 0;
};

/// Trains view `view`'s autoencoder for up to r1 rounds starting from the
/// bank's entries and writes the best round back.
StageReport run_stage1(std::size_t view, const Matrix& train_x, SnapshotBank& bank,
                       const TrainConfig& cfg, std::size_t epoch);

/// Trains the supervised network and all encoders jointly for up to r2
/// rounds; requires stage 1 of `epoch` to have finished for every view.
StageReport run_stage2(std::span<const Matrix> train_views, std::span<const int> labels,
                       SnapshotBank& bank, const TrainConfig& cfg, std::size_t epoch);

struct TrainHooks {
  std::function<void(std::size_t epoch, const SnapshotBank&)> on_epoch_end;
  std::function<void(const StageReport&)> on_stage_end;
};

struct TrainResult {
  SnapshotBank bank;
  std::vector<StageReport> stages;
};

/// The full alternating schedule: for each epoch, stage 1 on every view and
/// then stage 2.
TrainResult run_cotraining(const MultiViewDataset& train, const TrainConfig& cfg,
                           const TrainHooks& hooks = {});

/// Checks that the dataset fits the architecture.
void check_arch_matches(const ArchSpec& arch, const MultiViewDataset& ds);

}  // namespace acmvl
