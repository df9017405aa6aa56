#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "acmvl/cotrain.hpp"
#include "acmvl/dataset.hpp"
#include "acmvl/error.hpp"
#include "acmvl/protocol.hpp"

namespace acmvl {

/// Malformed or invalid run configuration; the message starts with the
/// file and the JSON path (or line/column for syntax errors).
class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

/// Everything a `train` or `eval` run needs. Read from a JSON document whose
/// keys are listed in the README; unknown keys are rejected.
struct RunConfig {
  std::string name = "dataset";

  // Exactly one data source.
  std::optional<std::filesystem::path> data_path;
  LoadOptions load;
  std::optional<SynthSpec> synth;
  RngSeed synth_seed{0};

  std::vector<std::size_t> encoder_dims{256, 64, 32};
  std::vector<std::size_t> head_dims{32, 16};
  /// Defaults to the latent width when unset.
  std::optional<std::size_t> joint_dim;

  /// Architecture is filled in by make_arch once the data is known.
  TrainConfig train;
  double split_ratio = 0.5;
  bool scale = false;
  std::filesystem::path output_dir = "acmvl_out";
  EvalConfig eval;
};

struct SynthRequest {
  SynthSpec spec;
  RngSeed seed{0};
};

/// Parses a synthetic-data spec: the SynthSpec fields plus "seed".
SynthRequest parse_synth_spec(const std::string& text, const std::string& origin = "<spec>");

/// Parses `text`; relative paths are resolved against `base_dir` and
/// `origin` names the document in error messages.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::string& origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& file);

/// Canonical JSON of the resolved configuration (stable key order).
std::string run_config_to_json(const RunConfig& cfg);

ArchSpec make_arch(const RunConfig& cfg, const MultiViewDataset& ds);

/// Data exactly as a run sees it: the full set, its split, and the optional
/// min-max scaling fitted on the train rows and applied to both halves.
struct PreparedData {
  MultiViewDataset full;
  Split split;
  std::optional<FeatureScaling> scaling;
  std::vector<std::string> warnings;
};

PreparedData prepare_data(const RunConfig& cfg);

/// Seed used for the train/test split of a run.
RngSeed split_seed(const RunConfig& cfg);

}  // namespace acmvl
