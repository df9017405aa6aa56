#pragma once

#include <optional>
#include <string>
#include <vector>

#include "acmvl/cotrain.hpp"
#include "acmvl/dataset.hpp"
#include "acmvl/eval.hpp"
#include "acmvl/networks.hpp"

namespace acmvl {

struct EvalConfig {
  LogRegOptions logreg;
  GmmOptions gmm;
  RngSeed gmm_seed{7};
};

struct MetricRecord {
  std::string dataset;
  std::string view;    // "view_<v>" or "joint"
  std::string method;  // LR, LR-AE, LR-AE-ACMVL, LR-ACMVL, GMM, GMM-AE, ...
  std::string metric;  // ACC, F1, NMI, JC
  double value = 0.0;
};

struct MetricsReport {
  std::vector<MetricRecord> records;

  /// CSV with header `dataset,view,method,metric,value`.
  std::string to_csv() const;
  std::optional<double> find(const std::string& view, const std::string& method,
                             const std::string& metric) const;
};

/// Runs the four-column protocol. Classification: an LR model is fit on the
/// train features and scored (ACC, macro-F1) on the test features. Clustering:
/// a GMM with one component per class is fit on the test features and scored
/// (NMI, JC) against the test labels. Features are z-scored with train
/// statistics first. Column LR-AE/GMM-AE uses `ae_only`, autoencoders trained
/// with stage 2 disabled; when absent it is trained here from `cfg` with
/// cotraining switched off.
MetricsReport evaluate_protocol(const MultiViewDataset& train, const MultiViewDataset& test,
                                const ModelParams* cotrained, const TrainConfig& cfg,
                                const EvalConfig& eval_cfg, const std::string& dataset_name,
                                const ModelParams* ae_only = nullptr);

/// Trains the per-view autoencoders alone (stage 2 disabled).
ModelParams train_autoencoders_only(const MultiViewDataset& train, TrainConfig cfg);

}  // namespace acmvl
