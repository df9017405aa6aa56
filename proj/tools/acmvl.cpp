// acmvl: train, export latents, evaluate and generate synthetic data.

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "acmvl/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Auto-encoder based co-training multi-view representation learning"};
  app.require_subcommand(1);

  std::string config;
  auto* train = app.add_subcommand("train", "Run the co-training schedule described by a config");
  train->add_option("-c,--config", config, "Run config (JSON)")->required()->check(CLI::ExistingFile);

  std::string checkpoint, data_dir, out_dir;
  bool header = false;
  bool strict = false;
  auto* export_cmd = app.add_subcommand("export-latent", "Write per-view and joint latent features");
  export_cmd->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  export_cmd->add_option("--data", data_dir, "Dataset directory")->required();
  export_cmd->add_option("--out", out_dir, "Output directory")->required();
  export_cmd->add_flag("--header", header, "Skip the first line of every CSV file");
  export_cmd->add_flag("--strict-labels", strict, "Reject label files with unused class ids");

  std::string eval_config, eval_data, eval_out;
  auto* eval = app.add_subcommand("eval", "Classification and clustering evaluation");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("-c,--config", eval_config, "Run config used for training")->required();
  eval->add_option("--data", eval_data, "Dataset directory overriding the config's data");
  eval->add_option("--out", eval_out, "Metrics CSV path (default: <output_dir>/metrics.csv)");

  std::string spec;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-view dataset");
  synth->add_option("--spec", spec, "Synthetic data spec (JSON)")->required();
  synth->add_option("--out", out_dir, "Output dataset directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: usage: " << e.what() << "\n";
    return acmvl::cli::kExitUsage;
  }

  const acmvl::cli::Streams io{std::cout, std::cerr, acmvl::cli::log_level_from_env()};
  if (*train) return acmvl::cli::cmd_train(config, io);
  if (*export_cmd) {
    return acmvl::cli::cmd_export_latent(checkpoint, data_dir, out_dir,
                                         acmvl::LoadOptions{header, strict}, io);
  }
  if (*eval) {
    std::optional<std::filesystem::path> data, out;
    if (!eval_data.empty()) data = eval_data;
    if (!eval_out.empty()) out = eval_out;
    return acmvl::cli::cmd_eval(checkpoint, eval_config, data, out, io);
  }
  if (*synth) return acmvl::cli::cmd_synth(spec, out_dir, io);
  return acmvl::cli::kExitUsage;
}
