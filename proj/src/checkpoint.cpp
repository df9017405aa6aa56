#include "acmvl/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace acmvl {

namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"values", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix matrix_from(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                j.at("values").get<std::vector<double>>());
}

json matrices_json(const std::vector<Matrix>& ms) {
  json out = json::array();
  for (const auto& m : ms) out.push_back(matrix_json(m));
  return out;
}

std::vector<Matrix> matrices_from(const json& j) {
  std::vector<Matrix> out;
  for (const auto& m : j) out.push_back(matrix_from(m));
  return out;
}

json provenance_json(const Provenance& p) {
  return {{"epoch", p.epoch}, {"stage", static_cast<int>(p.stage)}, {"round", p.round}};
}

Provenance provenance_from(const json& j) {
  const int stage = j.at("stage").get<int>();
  if (stage < 0 || stage > 2) throw CheckpointError("checkpoint: invalid stage " + std::to_string(stage));
  return {j.at("epoch").get<std::size_t>(), static_cast<Stage>(stage), j.at("round").get<std::size_t>()};
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  json j;
  j["format"] = "acmvl-checkpoint";
  j["version"] = 1;
  j["seed"] = ckpt.seed.value;
  j["epoch"] = ckpt.epoch;
  j["arch"] = {{"view_input_dims", ckpt.arch.view_input_dims},
               {"encoder_dims", ckpt.arch.encoder_dims},
               {"supervised_dims", ckpt.arch.supervised_dims},
               {"joint_dim", ckpt.arch.joint_dim}};
  json encs = json::array();
  json decs = json::array();
  for (const auto& e : ckpt.bank.best_enc) encs.push_back(matrices_json(e.weights));
  for (const auto& d : ckpt.bank.best_dec) decs.push_back(matrices_json(d.weights));
  j["encoders"] = encs;
  j["decoders"] = decs;
  j["supervised"] = {{"w_share", matrix_json(ckpt.bank.best_sup.w_share)},
                     {"head", matrices_json(ckpt.bank.best_sup.head)}};
  json enc_prov = json::array();
  json dec_prov = json::array();
  for (const auto& p : ckpt.bank.enc_from) enc_prov.push_back(provenance_json(p));
  for (const auto& p : ckpt.bank.dec_from) dec_prov.push_back(provenance_json(p));
  j["provenance"] = {{"encoders", enc_prov},
                     {"decoders", dec_prov},
                     {"supervised", provenance_json(ckpt.bank.sup_from)},
                     {"stage1_epoch", ckpt.bank.stage1_epoch},
                     {"stage2_epoch", ckpt.bank.stage2_epoch}};
  if (ckpt.scaling) {
    j["scaling"] = {{"min", ckpt.scaling->min}, {"range", ckpt.scaling->range}};
  } else {
    j["scaling"] = nullptr;
  }
  return j.dump(1) + "\n";
}

Checkpoint checkpoint_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "acmvl-checkpoint") throw CheckpointError("checkpoint: unknown format tag");
    if (j.at("version") != 1) throw CheckpointError("checkpoint: unsupported version");
    Checkpoint c;
    c.seed = RngSeed{j.at("seed").get<std::uint64_t>()};
    c.epoch = j.at("epoch").get<std::size_t>();
    const json& a = j.at("arch");
    c.arch.view_input_dims = a.at("view_input_dims").get<std::vector<std::size_t>>();
    c.arch.encoder_dims = a.at("encoder_dims").get<std::vector<std::size_t>>();
    c.arch.supervised_dims = a.at("supervised_dims").get<std::vector<std::size_t>>();
    c.arch.joint_dim = a.at("joint_dim").get<std::size_t>();
    c.arch.validate();

    for (const auto& e : j.at("encoders")) c.bank.best_enc.push_back({matrices_from(e)});
    for (const auto& d : j.at("decoders")) c.bank.best_dec.push_back({matrices_from(d)});
    c.bank.best_sup.w_share = matrix_from(j.at("supervised").at("w_share"));
    c.bank.best_sup.head = matrices_from(j.at("supervised").at("head"));
    const json& p = j.at("provenance");
    for (const auto& e : p.at("encoders")) c.bank.enc_from.push_back(provenance_from(e));
    for (const auto& d : p.at("decoders")) c.bank.dec_from.push_back(provenance_from(d));
    c.bank.sup_from = provenance_from(p.at("supervised"));
    c.bank.stage1_epoch = p.at("stage1_epoch").get<std::vector<std::size_t>>();
    c.bank.stage2_epoch = p.at("stage2_epoch").get<std::size_t>();

    const std::size_t views = c.arch.view_count();
    if (c.bank.best_enc.size() != views || c.bank.best_dec.size() != views ||
        c.bank.enc_from.size() != views || c.bank.dec_from.size() != views ||
        c.bank.stage1_epoch.size() != views) {
      throw CheckpointError("checkpoint: per-view sections disagree with arch view count");
    }
    // Shapes must match a fresh model of the declared architecture.
    const ModelParams expected = init_model(c.arch, RngSeed{0});
    auto same_shapes = [](const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
      if (a.size() != b.size()) return false;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (!a[i].same_shape(b[i])) return false;
      return true;
    };
    for (std::size_t v = 0; v < views; ++v) {
      if (!same_shapes(c.bank.best_enc[v].weights, expected.encoders[v].weights) ||
          !same_shapes(c.bank.best_dec[v].weights, expected.decoders[v].weights)) {
        throw CheckpointError("checkpoint: view " + std::to_string(v) +
                              " weights do not match the declared architecture");
      }
    }
    if (!c.bank.best_sup.w_share.same_shape(expected.sup.w_share) ||
        !same_shapes(c.bank.best_sup.head, expected.sup.head)) {
      throw CheckpointError("checkpoint: supervised weights do not match the declared architecture");
    }

    if (!j.at("scaling").is_null()) {
      FeatureScaling s;
      s.min = j.at("scaling").at("min").get<std::vector<std::vector<double>>>();
      s.range = j.at("scaling").at("range").get<std::vector<std::vector<double>>>();
      c.scaling = std::move(s);
    }
    return c;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("checkpoint: malformed document: ") + e.what());
  } catch (const CheckpointError&) {
    throw;
  } catch (const Error& e) {
    throw CheckpointError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError(file.string() + ": cannot open for writing");
  out << checkpoint_to_json(ckpt);
  if (!out) throw FileError(file.string() + ": write failed");
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FileError(file.string() + ": cannot open checkpoint");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return checkpoint_from_json(buf.str());
  } catch (const CheckpointError& e) {
    throw CheckpointError(file.string() + ": " + e.what());
  }
}

}  // namespace acmvl
