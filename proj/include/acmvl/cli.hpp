#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "acmvl/cotrain.hpp"
#include "acmvl/dataset.hpp"

namespace acmvl::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

enum class LogLevel { kQuiet = 0, kError, kWarn, kInfo, kDebug };

/// Level from the ACMVL_LOG environment variable (quiet, error, warn, info,
/// debug); info when unset or unrecognized.
LogLevel log_level_from_env();

struct Streams {
  std::ostream& out;
  std::ostream& err;
  LogLevel level = LogLevel::kInfo;
};

/// `epoch,stage,view,round,loss` rows for every stage run, view = -1 for stage 2.
std::string loss_trace_csv(const std::vector<StageReport>& stages);

/// Trains per the config and writes loss_trace.csv, checkpoint.json,
/// checkpoint_epoch_<e>.json and manifest.json into the output directory.
int cmd_train(const std::filesystem::path& config, const Streams& io);

/// Writes h_<v>.csv per view and z.csv for every row of the dataset.
int cmd_export_latent(const std::filesystem::path& checkpoint, const std::filesystem::path& data_dir,
                      const std::filesystem::path& out_dir, const LoadOptions& load,
                      const Streams& io);

/// Runs the evaluation protocol on the config's data (or `data_override`)
/// and writes metrics.csv to `out_file` or the config's output directory.
int cmd_eval(const std::filesystem::path& checkpoint, const std::filesystem::path& config,
             const std::optional<std::filesystem::path>& data_override,
             const std::optional<std::filesystem::path>& out_file, const Streams& io);

/// Generates a synthetic dataset directory from a JSON spec.
int cmd_synth(const std::filesystem::path& spec, const std::filesystem::path& out_dir,
              const Streams& io);

}  // namespace acmvl::cli
