#include "acmvl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace acmvl {

namespace {

using nlohmann::json;

constexpr std::uint64_t kSplitTag = 0x5b117;

// Walks a JSON object, remembering which keys were read so leftovers can be
// reported as unknown.
class Reader {
 public:
  Reader(const json& node, std::string path, const std::string& origin)
      : node_(node), path_(std::move(path)), origin_(origin) {
    if (!node_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(origin_ + ": " + (path_.empty() ? "/" : path_) + ": " + msg);
  }
  [[noreturn]] void fail_at(const std::string& key, const std::string& msg) const {
    throw ConfigError(origin_ + ": " + path_ + "/" + key + ": " + msg);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key) && !node_.at(key).is_null();
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  Reader child(const std::string& key) { return Reader(raw(key), path_ + "/" + key, origin_); }

  std::size_t count(const std::string& key, std::size_t fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail_at(key, "expected a non-negative integer");
    return v.get<std::size_t>();
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) return v.get<std::uint64_t>();
    fail_at(key, "expected a non-negative integer");
  }

  double number(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_number()) fail_at(key, "expected a number");
    return v.get<double>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_boolean()) fail_at(key, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_string()) fail_at(key, "expected a string");
    return v.get<std::string>();
  }

  std::vector<std::size_t> counts(const std::string& key, std::vector<std::size_t> fallback) {
    if (!has(key)) return fallback;
    const json& v = node_.at(key);
    if (!v.is_array()) fail_at(key, "expected an array of integers");
    std::vector<std::size_t> out;
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 0)
        fail_at(key, "expected an array of non-negative integers");
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }

  void finish() const {
    for (const auto& [key, value] : node_.items())
      if (!seen_.count(key)) fail_at(key, "unknown key");
  }

 private:
  const json& node_;
  std::string path_;
  const std::string& origin_;
  std::set<std::string> seen_;
};

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + " column " + std::to_string(col);
}

SynthRequest read_synth(Reader& synth) {
  SynthRequest r;
  SynthSpec& s = r.spec;
  s.views = synth.count("views", s.views);
  s.classes = synth.count("classes", s.classes);
  s.samples_per_class = synth.count("samples_per_class", s.samples_per_class);
  s.latent_dim = synth.count("latent_dim", s.latent_dim);
  s.noise_std = synth.number("noise_std", s.noise_std);
  s.view_dims = synth.counts("view_dims", std::vector<std::size_t>(s.views, 20));
  r.seed = RngSeed{synth.u64("seed", 0)};
  synth.finish();
  try {
    s.validate();
  } catch (const ArgumentError& e) {
    synth.fail(e.what());
  }
  return r;
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw ConfigError(origin + ": " + line_column(text, at) + ": invalid JSON");
  }
}

}  // namespace

SynthRequest parse_synth_spec(const std::string& text, const std::string& origin) {
  const json doc = parse_json(text, origin);
  Reader reader(doc, "", origin);
  return read_synth(reader);
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::string& origin) {
  const json doc = parse_json(text, origin);

  RunConfig cfg;
  Reader root(doc, "", origin);
  cfg.name = root.string("name", cfg.name);

  const bool has_data = root.has("data");
  const bool has_synth = root.has("synth");
  if (has_data == has_synth) root.fail("exactly one of \"data\" and \"synth\" must be given");
  if (has_data) {
    Reader data = root.child("data");
    if (!data.has("path")) data.fail("missing required key \"path\"");
    std::filesystem::path p = data.string("path", "");
    cfg.data_path = p.is_absolute() ? p : base_dir / p;
    cfg.load.header = data.boolean("header", false);
    cfg.load.strict_labels = data.boolean("strict_labels", false);
    data.finish();
  } else {
    Reader synth = root.child("synth");
    SynthRequest request = read_synth(synth);
    cfg.synth = request.spec;
    cfg.synth_seed = request.seed;
  }

  if (root.has("arch")) {
    Reader arch = root.child("arch");
    cfg.encoder_dims = arch.counts("encoder_dims", cfg.encoder_dims);
    cfg.head_dims = arch.counts("head_dims", cfg.head_dims);
    if (arch.has("joint_dim")) cfg.joint_dim = arch.count("joint_dim", 0);
    arch.finish();
  }

  TrainConfig& t = cfg.train;
  if (root.has("train")) {
    Reader train = root.child("train");
    t.epochs = train.count("epochs", t.epochs);
    t.r1 = train.count("r1", t.r1);
    t.r2 = train.count("r2", t.r2);
    t.lr_ae = train.number("lr_ae", t.lr_ae);
    t.lr_sup = train.number("lr_sup", t.lr_sup);
    t.rho = train.number("rho", t.rho);
    t.eps = train.number("eps", t.eps);
    t.early_stopping = train.boolean("early_stopping", t.early_stopping);
    t.patience = train.count("patience", t.patience);
    if (train.has("batch_size") && train.raw("batch_size").is_string()) {
      if (train.raw("batch_size") != "full") train.fail_at("batch_size", "expected an integer or \"full\"");
      t.batch_size = 0;
    } else {
      t.batch_size = train.count("batch_size", t.batch_size);
    }
    t.cotraining = train.boolean("cotraining", t.cotraining);
    train.finish();
  }
  t.seed = RngSeed{root.u64("seed", 0)};
  cfg.split_ratio = root.number("split_ratio", cfg.split_ratio);
  cfg.scale = root.boolean("scale", cfg.scale);
  if (root.has("output_dir")) {
    std::filesystem::path p = root.string("output_dir", "");
    cfg.output_dir = p.is_absolute() ? p : base_dir / p;
  } else {
    cfg.output_dir = base_dir / cfg.output_dir;
  }

  if (root.has("eval")) {
    Reader ev = root.child("eval");
    cfg.eval.logreg.iters = ev.count("logreg_iters", cfg.eval.logreg.iters);
    cfg.eval.logreg.lr = ev.number("logreg_lr", cfg.eval.logreg.lr);
    cfg.eval.gmm.max_iters = ev.count("gmm_max_iters", cfg.eval.gmm.max_iters);
    cfg.eval.gmm.tol = ev.number("gmm_tol", cfg.eval.gmm.tol);
    cfg.eval.gmm_seed = RngSeed{ev.u64("gmm_seed", cfg.eval.gmm_seed.value)};
    ev.finish();
  }
  root.finish();

  // Range checks that do not need the data.
  auto check = [&](bool ok, const std::string& where, const std::string& msg) {
    if (!ok) throw ConfigError(origin + ": " + where + ": " + msg);
  };
  check(t.epochs >= 1, "/train/epochs", "must be >= 1");
  check(t.r1 >= 1, "/train/r1", "must be >= 1");
  check(t.r2 >= 1, "/train/r2", "must be >= 1");
  check(t.patience >= 1, "/train/patience", "must be >= 1");
  check(t.lr_ae > 0.0, "/train/lr_ae", "must be positive");
  check(t.lr_sup > 0.0, "/train/lr_sup", "must be positive");
  check(t.rho > 0.0 && t.rho < 1.0, "/train/rho", "must lie in (0, 1)");
  check(t.eps > 0.0, "/train/eps", "must be positive");
  check(cfg.split_ratio > 0.0 && cfg.split_ratio < 1.0, "/split_ratio", "must lie in (0, 1)");
  check(!cfg.encoder_dims.empty(), "/arch/encoder_dims", "must not be empty");
  for (std::size_t i = 0; i < cfg.encoder_dims.size(); ++i) {
    check(cfg.encoder_dims[i] >= 1, "/arch/encoder_dims", "widths must be >= 1");
    check(i == 0 || cfg.encoder_dims[i] < cfg.encoder_dims[i - 1], "/arch/encoder_dims",
          "widths must strictly decrease");
  }
  for (std::size_t w : cfg.head_dims) check(w >= 1, "/arch/head_dims", "widths must be >= 1");
  check(!cfg.joint_dim || *cfg.joint_dim >= 1, "/arch/joint_dim", "must be >= 1");
  check(cfg.eval.logreg.lr > 0.0, "/eval/logreg_lr", "must be positive");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FileError(file.string() + ": cannot open config");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), file.parent_path(), file.string());
}

std::string run_config_to_json(const RunConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  if (cfg.data_path) {
    j["data"] = {{"path", cfg.data_path->string()},
                 {"header", cfg.load.header},
                 {"strict_labels", cfg.load.strict_labels}};
  }
  if (cfg.synth) {
    j["synth"] = {{"views", cfg.synth->views},
                  {"classes", cfg.synth->classes},
                  {"samples_per_class", cfg.synth->samples_per_class},
                  {"latent_dim", cfg.synth->latent_dim},
                  {"noise_std", cfg.synth->noise_std},
                  {"view_dims", cfg.synth->view_dims},
                  {"seed", cfg.synth_seed.value}};
  }
  j["arch"] = {{"encoder_dims", cfg.encoder_dims}, {"head_dims", cfg.head_dims}};
  if (cfg.joint_dim) j["arch"]["joint_dim"] = *cfg.joint_dim;
  const TrainConfig& t = cfg.train;
  j["train"] = {{"epochs", t.epochs},
                {"r1", t.r1},
                {"r2", t.r2},
                {"lr_ae", t.lr_ae},
                {"lr_sup", t.lr_sup},
                {"rho", t.rho},
                {"eps", t.eps},
                {"early_stopping", t.early_stopping},
                {"patience", t.patience},
                {"batch_size", t.batch_size},
                {"cotraining", t.cotraining}};
  j["seed"] = t.seed.value;
  j["split_ratio"] = cfg.split_ratio;
  j["scale"] = cfg.scale;
  j["output_dir"] = cfg.output_dir.string();
  j["eval"] = {{"logreg_iters", cfg.eval.logreg.iters},
               {"logreg_lr", cfg.eval.logreg.lr},
               {"gmm_max_iters", cfg.eval.gmm.max_iters},
               {"gmm_tol", cfg.eval.gmm.tol},
               {"gmm_seed", cfg.eval.gmm_seed.value}};
  return j.dump(2);
}

ArchSpec make_arch(const RunConfig& cfg, const MultiViewDataset& ds) {
  ArchSpec arch;
  arch.view_input_dims = ds.view_dims();
  arch.encoder_dims = cfg.encoder_dims;
  arch.supervised_dims = cfg.head_dims;
  arch.supervised_dims.push_back(ds.class_count);
  arch.joint_dim = cfg.joint_dim.value_or(cfg.encoder_dims.back());
  arch.validate();
  return arch;
}

RngSeed split_seed(const RunConfig& cfg) { return derive_seed(cfg.train.seed, kSplitTag); }

PreparedData prepare_data(const RunConfig& cfg) {
  PreparedData out;
  if (cfg.data_path) {
    out.full = load_dataset(*cfg.data_path, cfg.load, &out.warnings);
  } else if (cfg.synth) {
    out.full = synth_multiview(*cfg.synth, cfg.synth_seed);
  } else {
    throw ConfigError("run config has no data source");
  }
  out.split = split(out.full, cfg.split_ratio, split_seed(cfg));
  if (cfg.scale) {
    out.scaling = fit_min_max(out.split.train);
    out.split.train = apply_scaling(out.split.train, *out.scaling);
    out.split.test = apply_scaling(out.split.test, *out.scaling);
  }
  return out;
}

}  // namespace acmvl
