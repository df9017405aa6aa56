#include "acmvl/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "acmvl/checkpoint.hpp"
#include "acmvl/config.hpp"
#include "acmvl/error.hpp"
#include "acmvl/protocol.hpp"
#include "json.hpp"

namespace acmvl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void log(const Streams& io, LogLevel level, const std::string& msg) {
  if (level > io.level) return;
  static constexpr const char* kNames[] = {"", "error", "warn", "info", "debug"};
  io.err << "[" << kNames[static_cast<int>(level)] << "] " << msg << "\n";
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

// Single machine-parsable line: "error: <kind>: <message>".
int report(const Streams& io, const char* kind, const std::string& msg, int code) {
  io.err << "error: " << kind << ": " << one_line(msg) << "\n";
  return code;
}

// Runs a command body, mapping exceptions to the error-line convention.
template <typename Body>
int guarded(const Streams& io, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    return report(io, e.kind(), e.what(), kExitUsage);
  } catch (const Error& e) {
    return report(io, e.kind(), e.what(), kExitFailure);
  } catch (const std::exception& e) {
    return report(io, "internal", e.what(), kExitFailure);
  }
}

void write_file(const fs::path& file, const std::string& body) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError(file.string() + ": cannot open for writing");
  out << body;
  if (!out) throw FileError(file.string() + ": write failed");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw FileError(dir.string() + ": cannot create directory");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::kInit: return "init";
    case Stage::kAutoencoder: return "autoencoder";
    case Stage::kSupervised: return "supervised";
  }
  return "?";
}

}  // namespace

LogLevel log_level_from_env() {
  const char* raw = std::getenv("ACMVL_LOG");
  if (raw == nullptr) return LogLevel::kInfo;
  const std::string v = raw;
  if (v == "quiet") return LogLevel::kQuiet;
  if (v == "error") return LogLevel::kError;
  if (v == "warn") return LogLevel::kWarn;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

std::string loss_trace_csv(const std::vector<StageReport>& stages) {
  std::string out = "epoch,stage,view,round,loss\n";
  for (const auto& s : stages) {
    const std::string prefix = std::to_string(s.epoch) + "," +
                               std::to_string(static_cast<int>(s.stage)) + "," +
                               std::to_string(s.view) + ",";
    for (std::size_t r = 0; r < s.trace.size(); ++r)
      out += prefix + std::to_string(r + 1) + "," + format_double(s.trace.values()[r]) + "\n";
  }
  return out;
}

int cmd_train(const fs::path& config, const Streams& io) {
  return guarded(io, [&] {
    RunConfig cfg = load_run_config(config);
    PreparedData data = prepare_data(cfg);
    for (const auto& w : data.warnings) log(io, LogLevel::kWarn, w);
    cfg.train.arch = make_arch(cfg, data.split.train);
    try {
      cfg.train.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(config.string() + ": " + e.what());
    }
    ensure_dir(cfg.output_dir);
    log(io, LogLevel::kInfo,
        "training on " + std::to_string(data.split.train.rows()) + " rows (" +
            std::to_string(data.split.test.rows()) + " held out), " +
            std::to_string(data.full.view_count()) + " views, " +
            std::to_string(data.full.class_count) + " classes");

    std::vector<std::string> epoch_files;
    TrainHooks hooks;
    hooks.on_stage_end = [&](const StageReport& r) {
      log(io, LogLevel::kDebug,
          "epoch " + std::to_string(r.epoch) + " " + stage_name(r.stage) +
              (r.view >= 0 ? " view " + std::to_string(r.view) : std::string()) + ": " +
              std::to_string(r.trace.size()) + " rounds, best " + format_double(r.trace.best_loss()) +
              " at round " + std::to_string(r.trace.best_round()));
    };
    hooks.on_epoch_end = [&](std::size_t epoch, const SnapshotBank& bank) {
      const std::string name = "checkpoint_epoch_" + std::to_string(epoch) + ".json";
      save_checkpoint(Checkpoint{cfg.train.arch, cfg.train.seed, epoch, bank, data.scaling},
                      cfg.output_dir / name);
      epoch_files.push_back(name);
      log(io, LogLevel::kInfo, "epoch " + std::to_string(epoch) + " done");
    };

    TrainResult result;
    try {
      result = run_cotraining(data.split.train, cfg.train, hooks);
    } catch (const Error& e) {
      throw StateError(std::string("training failed: ") + e.what());
    }

    write_file(cfg.output_dir / "loss_trace.csv", loss_trace_csv(result.stages));
    save_checkpoint(Checkpoint{cfg.train.arch, cfg.train.seed, cfg.train.epochs, result.bank, data.scaling},
                    cfg.output_dir / "checkpoint.json");

    const std::string resolved = run_config_to_json(cfg);
    json manifest;
    manifest["seed"] = cfg.train.seed.value;
    manifest["config_hash"] = "fnv1a64:" + hex64(fnv1a(resolved));
    manifest["config"] = json::parse(resolved);
    manifest["data"] = {{"rows", data.full.rows()},
                        {"train_rows", data.split.train.rows()},
                        {"test_rows", data.split.test.rows()},
                        {"views", data.full.view_count()},
                        {"classes", data.full.class_count},
                        {"warnings", data.warnings}};
    manifest["arch"] = {{"view_input_dims", cfg.train.arch.view_input_dims},
                        {"encoder_dims", cfg.train.arch.encoder_dims},
                        {"supervised_dims", cfg.train.arch.supervised_dims},
                        {"joint_dim", cfg.train.arch.joint_dim}};
    json stages = json::array();
    for (const auto& s : result.stages) {
      stages.push_back({{"epoch", s.epoch},
                        {"stage", static_cast<int>(s.stage)},
                        {"view", s.view},
                        {"rounds", s.trace.size()},
                        {"best_round", s.trace.best_round()},
                        {"best_loss", s.trace.best_loss()},
                        {"stopped_early", s.stopped_early}});
    }
    manifest["stages"] = stages;
    manifest["artifacts"] = {{"loss_trace", "loss_trace.csv"},
                             {"checkpoint", "checkpoint.json"},
                             {"epoch_checkpoints", epoch_files}};
    write_file(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");

    io.out << "trained " << cfg.train.epochs << " epochs; outputs in " << cfg.output_dir.string() << "\n";
    return kExitOk;
  });
}

int cmd_export_latent(const fs::path& checkpoint, const fs::path& data_dir, const fs::path& out_dir,
                      const LoadOptions& load, const Streams& io) {
  return guarded(io, [&] {
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    std::vector<std::string> warnings;
    MultiViewDataset ds = load_dataset(data_dir, load, &warnings);
    for (const auto& w : warnings) log(io, LogLevel::kWarn, w);
    if (ds.view_count() != ckpt.arch.view_count()) {
      throw ShapeError("checkpoint has " + std::to_string(ckpt.arch.view_count()) +
                       " views, dataset has " + std::to_string(ds.view_count()));
    }
    for (std::size_t v = 0; v < ds.view_count(); ++v) {
      if (ds.views[v].cols() != ckpt.arch.view_input_dims[v]) {
        throw ShapeError("view " + std::to_string(v) + ": checkpoint expects " +
                         std::to_string(ckpt.arch.view_input_dims[v]) + " features, dataset has " +
                         std::to_string(ds.views[v].cols()));
      }
    }
    if (ckpt.scaling) ds = apply_scaling(ds, *ckpt.scaling);
    ensure_dir(out_dir);
    const ModelParams model = ckpt.bank.model();
    for (std::size_t v = 0; v < ds.view_count(); ++v)
      write_matrix_csv(encode(ds.views[v], model.encoders[v]), out_dir / ("h_" + std::to_string(v) + ".csv"));
    write_matrix_csv(joint_latent(ds.views, model.encoders, model.sup), out_dir / "z.csv");
    io.out << "wrote latents for " << ds.rows() << " rows to " << out_dir.string() << "\n";
    return kExitOk;
  });
}

int cmd_eval(const fs::path& checkpoint, const fs::path& config,
             const std::optional<fs::path>& data_override, const std::optional<fs::path>& out_file,
             const Streams& io) {
  return guarded(io, [&] {
    RunConfig cfg = load_run_config(config);
    if (data_override) {
      cfg.data_path = *data_override;
      cfg.synth.reset();
    }
    const PreparedData data = prepare_data(cfg);
    for (const auto& w : data.warnings) log(io, LogLevel::kWarn, w);
    const Checkpoint ckpt = load_checkpoint(checkpoint);
    check_arch_matches(ckpt.arch, data.split.train);
    cfg.train.arch = ckpt.arch;

    log(io, LogLevel::kInfo, "training autoencoder-only baseline");
    const ModelParams model = ckpt.bank.model();
    const MetricsReport report =
        evaluate_protocol(data.split.train, data.split.test, &model, cfg.train, cfg.eval, cfg.name);
    const std::string csv = report.to_csv();
    const fs::path target = out_file.value_or(cfg.output_dir / "metrics.csv");
    if (target.has_parent_path()) ensure_dir(target.parent_path());
    write_file(target, csv);
    io.out << csv;
    return kExitOk;
  });
}

int cmd_synth(const fs::path& spec, const fs::path& out_dir, const Streams& io) {
  return guarded(io, [&] {
    std::ifstream in(spec, std::ios::binary);
    if (!in) throw FileError(spec.string() + ": cannot open spec");
    std::ostringstream buf;
    buf << in.rdbuf();
    const SynthRequest request = parse_synth_spec(buf.str(), spec.string());
    const MultiViewDataset ds = synth_multiview(request.spec, request.seed);
    save_dataset(ds, out_dir);
    io.out << "wrote " << ds.rows() << " rows, " << ds.view_count() << " views to " << out_dir.string()
           << "\n";
    return kExitOk;
  });
}

}  // namespace acmvl::cli
