#include "acmvl/protocol.hpp"

#include "acmvl/error.hpp"

namespace acmvl {

namespace {

struct ColumnNames {
  const char* classification;
  const char* clustering;
};

constexpr ColumnNames kRawColumn{"LR", "GMM"};
constexpr ColumnNames kAeColumn{"LR-AE", "GMM-AE"};
constexpr ColumnNames kCotrainedColumn{"LR-AE-ACMVL", "GMM-AE-ACMVL"};
constexpr ColumnNames kJointColumn{"LR-ACMVL", "GMM-ACMVL"};

void score(MetricsReport& report, const std::string& dataset, const std::string& view,
           const ColumnNames& column, const Matrix& train_x, const MultiViewDataset& train,
           const Matrix& test_x, const MultiViewDataset& test, const EvalConfig& eval_cfg) {
  const Standardizer standardizer = Standardizer::fit(train_x);
  const Matrix train_z = standardizer.apply(train_x);
  const Matrix test_z = standardizer.apply(test_x);

  const LogRegModel lr = train_logreg(train_z, train.labels, train.class_count, eval_cfg.logreg);
  const std::vector<int> pred = predict_logreg(lr, test_z);
  report.records.push_back({dataset, view, column.classification, "ACC", accuracy(pred, test.labels)});
  report.records.push_back({dataset, view, column.classification, "F1", macro_f1(pred, test.labels)});

  const GmmFit gmm = fit_gmm(test_z, test.class_count, eval_cfg.gmm_seed, eval_cfg.gmm);
  const std::vector<int> clusters = predict_gmm(gmm.model, test_z);
  report.records.push_back({dataset, view, column.clustering, "NMI", nmi(clusters, test.labels)});
  report.records.push_back({dataset, view, column.clustering, "JC", jaccard(clusters, test.labels)});
}

}  // namespace

std::string MetricsReport::to_csv() const {
  std::string out = "dataset,view,method,metric,value\n";
  for (const auto& r : records)
    out += r.dataset + "," + r.view + "," + r.method + "," + r.metric + "," + format_double(r.value) + "\n";
  return out;
}

std::optional<double> MetricsReport::find(const std::string& view, const std::string& method,
                                          const std::string& metric) const {
  for (const auto& r : records)
    if (r.view == view && r.method == method && r.metric == metric) return r.value;
  return std::nullopt;
}

ModelParams train_autoencoders_only(const MultiViewDataset& train, TrainConfig cfg) {
  cfg.cotraining = false;
  return run_cotraining(train, cfg).bank.model();
}

MetricsReport evaluate_protocol(const MultiViewDataset& train, const MultiViewDataset& test,
                                const ModelParams* cotrained, const TrainConfig& cfg,
                                const EvalConfig& eval_cfg, const std::string& dataset_name,
                                const ModelParams* ae_only) {
  if (cotrained == nullptr) throw StateError("evaluate: no trained model supplied");
  if (train.view_count() != test.view_count() || cotrained->encoders.size() != train.view_count()) {
    throw ShapeError("evaluate: model has " + std::to_string(cotrained->encoders.size()) +
                     " encoders, train has " + std::to_string(train.view_count()) +
                     " views, test has " + std::to_string(test.view_count()));
  }
  ModelParams baseline;
  if (ae_only == nullptr) {
    baseline = train_autoencoders_only(train, cfg);
    ae_only = &baseline;
  }

  MetricsReport report;
  for (std::size_t v = 0; v < train.view_count(); ++v) {
    const std::string view = "view_" + std::to_string(v);
    score(report, dataset_name, view, kRawColumn, train.views[v], train, test.views[v], test, eval_cfg);
    score(report, dataset_name, view, kAeColumn, encode(train.views[v], ae_only->encoders[v]), train,
          encode(test.views[v], ae_only->encoders[v]), test, eval_cfg);
    score(report, dataset_name, view, kCotrainedColumn, encode(train.views[v], cotrained->encoders[v]),
          train, encode(test.views[v], cotrained->encoders[v]), test, eval_cfg);
  }
  score(report, dataset_name, "joint", kJointColumn,
        joint_latent(train.views, cotrained->encoders, cotrained->sup), train,
        joint_latent(test.views, cotrained->encoders, cotrained->sup), test, eval_cfg);
  return report;
}

}  // namespace acmvl
