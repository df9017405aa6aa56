#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "acmvl/cotrain.hpp"
#include "acmvl/dataset.hpp"
#include "acmvl/networks.hpp"

namespace acmvl {

/// A snapshot bank plus what is needed to reuse it on new data.
///
/// On disk this is a JSON document:
///
///   {
///     "format": "acmvl-checkpoint", "version": 1,
///     "seed": <uint64>, "epoch": <int>,
///     "arch": {"view_input_dims": [...], "encoder_dims": [...],
///              "supervised_dims": [...], "joint_dim": <int>},
///     "encoders": [[<matrix>, ...] per view],
///     "decoders": [[<matrix>, ...] per view],
///     "supervised": {"w_share": <matrix>, "head": [<matrix>, ...]},
///     "provenance": {"encoders": [<prov>...], "decoders": [<prov>...], "supervised": <prov>},
///     "scaling": null | {"min": [[...]...], "range": [[...]...]}
///   }
///
/// where <matrix> is {"rows": r, "cols": c, "values": [row-major doubles]}
/// and <prov> is {"epoch": e, "stage": 0|1|2, "round": r}. Doubles are
/// written in shortest round-trip form, so a load reproduces every bit.
struct Checkpoint {
  ArchSpec arch;
  RngSeed seed;
  std::size_t epoch = 0;
  SnapshotBank bank;
  std::optional<FeatureScaling> scaling;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "checkpoint"; }
};

std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& file);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace acmvl
