#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acmvl/error.hpp"
#include "acmvl/matrix.hpp"
#include "acmvl/rng.hpp"

namespace acmvl {

class DataError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "data"; }
};

class FileError : public DataError {
 public:
  using DataError::DataError;
  const char* kind() const noexcept override { return "io"; }
};

/// Views disagree on the number of rows (or with the label file).
class AlignmentError : public DataError {
 public:
  using DataError::DataError;
  const char* kind() const noexcept override { return "alignment"; }
};

/// Malformed CSV content; the message carries file:line:column.
class ParseError : public DataError {
 public:
  using DataError::DataError;
  const char* kind() const noexcept override { return "parse"; }
};

class LabelError : public DataError {
 public:
  using DataError::DataError;
  const char* kind() const noexcept override { return "label"; }
};

/// Per-view min-max transform fitted on training rows.
struct FeatureScaling {
  std::vector<std::vector<double>> min;
  std::vector<std::vector<double>> range;
  friend bool operator==(const FeatureScaling&, const FeatureScaling&) = default;
};

/// V row-aligned views sharing one label vector.
struct MultiViewDataset {
  std::vector<Matrix> views;
  std::vector<int> labels;
  std::size_t class_count = 0;
  std::optional<FeatureScaling> scaling;

  std::size_t rows() const noexcept { return labels.size(); }
  std::size_t view_count() const noexcept { return views.size(); }
  std::vector<std::size_t> view_dims() const;
  /// Number of distinct labels actually present.
  std::size_t distinct_classes() const;

  /// Checks alignment and label range.
  void validate() const;
  MultiViewDataset subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const MultiViewDataset&, const MultiViewDataset&) = default;
};

struct LoadOptions {
  /// Skip the first line of every file.
  bool header = false;
  /// Reject label files whose ids leave gaps in 0..K-1 instead of warning.
  bool strict_labels = false;
};

/// Reads view_0.csv ... view_{V-1}.csv and labels.csv from `dir`. V is the
/// number of consecutive view files found. Non-fatal findings (such as class
/// ids that never occur) are appended to `warnings` when given.
MultiViewDataset load_dataset(const std::filesystem::path& dir, const LoadOptions& options = {},
                              std::vector<std::string>* warnings = nullptr);
void save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir);

Matrix read_matrix_csv(const std::filesystem::path& file, bool header = false);
void write_matrix_csv(const Matrix& m, const std::filesystem::path& file);
std::vector<int> read_labels_csv(const std::filesystem::path& file, bool header = false);
void write_labels_csv(std::span<const int> labels, const std::filesystem::path& file);

/// 17 significant digits, which always reads back to the same double.
std::string format_double(double value);

struct Split {
  MultiViewDataset train;
  MultiViewDataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

/// Class-stratified split. One seeded permutation of the rows decides the
/// order; each class contributes about ratio * n_k rows to train (at least
/// one to each side) and the total train size is ceil(ratio * N) whenever
/// those per-class bounds allow it.
Split split(const MultiViewDataset& ds, double ratio, RngSeed seed);

/// Seeded permutation of 0..n-1 chunked into batches of `batch_size`; the
/// last batch may be short.
std::vector<std::vector<std::size_t>> batches(std::size_t n_rows, std::size_t batch_size,
                                              RngSeed seed);

struct SynthSpec {
  std::size_t views = 2;
  std::size_t classes = 2;
  std::size_t samples_per_class = 50;
  std::size_t latent_dim = 4;
  double noise_std = 0.1;
  std::vector<std::size_t> view_dims{20, 20};

  void validate() const;
};

/// Class centres c_k ~ U[-1, 1]^latent_dim, latents z = c_k + N(0, 0.1^2),
/// view v observes x = A_v z + N(0, noise_std^2) with A_v a fixed
/// M^v x latent_dim matrix of N(0, 1) entries. Rows are grouped by class.
MultiViewDataset synth_multiview(const SynthSpec& spec, RngSeed seed);

/// Fits per-feature min-max scaling on `train`. Constant features map to 0.
FeatureScaling fit_min_max(const MultiViewDataset& train);
MultiViewDataset apply_scaling(const MultiViewDataset& ds, const FeatureScaling& scaling);
Matrix apply_scaling(const Matrix& view, const FeatureScaling& scaling, std::size_t view_index);

}  // namespace acmvl
