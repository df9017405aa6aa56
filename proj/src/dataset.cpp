#include "acmvl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <string_view>

namespace acmvl {

namespace fs = std::filesystem;

namespace {

std::string located(const fs::path& file, std::size_t line, std::size_t column) {
  return file.string() + ":" + std::to_string(line) + ":" + std::to_string(column);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Reads non-empty lines; blank lines are only tolerated at the end of the file.
struct Line {
  std::size_t number;
  std::string text;
};

std::vector<Line> read_lines(const fs::path& file, bool header) {
  std::ifstream in(file);
  if (!in) throw FileError(file.string() + ": cannot open file");
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  std::size_t blank_at = 0;
  while (std::getline(in, text)) {
    ++number;
    if (header && number == 1) continue;
    if (trim(text).empty()) {
      if (blank_at == 0) blank_at = number;
      continue;
    }
    if (blank_at != 0) throw ParseError(located(file, blank_at, 1) + ": blank line inside data");
    lines.push_back({number, std::move(text)});
  }
  return lines;
}

void write_text(const fs::path& file, const std::string& body) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError(file.string() + ": cannot open file for writing");
  out << body;
  if (!out) throw FileError(file.string() + ": write failed");
}

fs::path view_file(const fs::path& dir, std::size_t v) {
  return dir / ("view_" + std::to_string(v) + ".csv");
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, end);
}

Matrix read_matrix_csv(const fs::path& file, bool header) {
  const auto lines = read_lines(file, header);
  std::vector<double> values;
  std::size_t cols = 0;
  for (const auto& line : lines) {
    std::string_view rest = line.text;
    std::size_t count = 0;
    std::size_t column = 1;
    while (true) {
      const auto comma = rest.find(',');
      const std::string_view cell = trim(rest.substr(0, comma));
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() ||
          !std::isfinite(value)) {
        throw ParseError(located(file, line.number, column) + ": not a finite number: '" +
                         std::string(cell) + "'");
      }
      values.push_back(value);
      ++count;
      if (comma == std::string_view::npos) break;
      column += comma + 1;
      rest.remove_prefix(comma + 1);
    }
    if (cols == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError(located(file, line.number, 1) + ": row has " + std::to_string(count) +
                       " values, expected " + std::to_string(cols));
    }
  }
  return Matrix(lines.size(), cols, std::move(values));
}

void write_matrix_csv(const Matrix& m, const fs::path& file) {
  std::string body;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) body += ',';
      body += format_double(m(r, c));
    }
    body += '\n';
  }
  write_text(file, body);
}

std::vector<int> read_labels_csv(const fs::path& file, bool header) {
  std::vector<int> labels;
  for (const auto& line : read_lines(file, header)) {
    const std::string_view cell = trim(line.text);
    int value = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
      throw ParseError(located(file, line.number, 1) + ": not an integer label: '" +
                       std::string(cell) + "'");
    }
    if (value < 0) {
      throw LabelError(located(file, line.number, 1) + ": negative label " + std::to_string(value));
    }
    labels.push_back(value);
  }
  return labels;
}

void write_labels_csv(std::span<const int> labels, const fs::path& file) {
  std::string body;
  for (int label : labels) body += std::to_string(label) + '\n';
  write_text(file, body);
}

std::vector<std::size_t> MultiViewDataset::view_dims() const {
  std::vector<std::size_t> dims;
  for (const auto& v : views) dims.push_back(v.cols());
  return dims;
}

std::size_t MultiViewDataset::distinct_classes() const {
  return std::set<int>(labels.begin(), labels.end()).size();
}

void MultiViewDataset::validate() const {
  if (views.empty()) throw DataError("dataset: no views");
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (views[v].rows() != labels.size()) {
      throw AlignmentError("dataset: view " + std::to_string(v) + " has " +
                           std::to_string(views[v].rows()) + " rows but there are " +
                           std::to_string(labels.size()) + " labels");
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_count) {
      throw LabelError("dataset: label " + std::to_string(labels[i]) + " at row " +
                       std::to_string(i) + " outside [0, " + std::to_string(class_count) + ")");
    }
  }
}

MultiViewDataset MultiViewDataset::subset(std::span<const std::size_t> indices) const {
  MultiViewDataset out;
  out.class_count = class_count;
  out.scaling = scaling;
  for (const auto& v : views) out.views.push_back(v.gather_rows(indices));
  for (std::size_t i : indices) out.labels.push_back(labels.at(i));
  return out;
}

MultiViewDataset load_dataset(const fs::path& dir, const LoadOptions& options,
                              std::vector<std::string>* warnings) {
  if (!fs::is_directory(dir)) throw FileError(dir.string() + ": not a directory");
  if (!fs::exists(view_file(dir, 0))) throw FileError(view_file(dir, 0).string() + ": missing");
  const fs::path label_file = dir / "labels.csv";
  if (!fs::exists(label_file)) throw FileError(label_file.string() + ": missing");

  MultiViewDataset ds;
  for (std::size_t v = 0; fs::exists(view_file(dir, v)); ++v) {
    ds.views.push_back(read_matrix_csv(view_file(dir, v), options.header));
    if (ds.views.back().rows() != ds.views.front().rows()) {
      throw AlignmentError("view_" + std::to_string(v) + ".csv has " +
                           std::to_string(ds.views.back().rows()) + " rows but view_0.csv has " +
                           std::to_string(ds.views.front().rows()));
    }
  }
  ds.labels = read_labels_csv(label_file, options.header);
  if (ds.labels.size() != ds.views.front().rows()) {
    throw AlignmentError("labels.csv has " + std::to_string(ds.labels.size()) +
                         " rows but view_0.csv has " + std::to_string(ds.views.front().rows()));
  }
  if (ds.labels.empty()) throw DataError(dir.string() + ": dataset has no rows");

  ds.class_count = static_cast<std::size_t>(*std::max_element(ds.labels.begin(), ds.labels.end())) + 1;
  const std::size_t present = ds.distinct_classes();
  if (present != ds.class_count) {
    std::string msg = label_file.string() + ": largest label " +
                      std::to_string(ds.class_count - 1) + " implies " +
                      std::to_string(ds.class_count) + " classes but only " +
                      std::to_string(present) + " occur";
    if (options.strict_labels) throw LabelError(msg);
    if (warnings) warnings->push_back(msg);
  }
  ds.validate();
  return ds;
}

void save_dataset(const MultiViewDataset& ds, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw FileError(dir.string() + ": cannot create directory");
  for (std::size_t v = 0; v < ds.views.size(); ++v) write_matrix_csv(ds.views[v], view_file(dir, v));
  write_labels_csv(ds.labels, dir / "labels.csv");
}

Split split(const MultiViewDataset& ds, double ratio, RngSeed seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ArgumentError("split: ratio must lie in (0, 1), got " + format_double(ratio));
  ds.validate();
  const std::size_t n = ds.rows();
  std::vector<std::size_t> count(ds.class_count, 0);
  for (int label : ds.labels) ++count[static_cast<std::size_t>(label)];
  for (std::size_t k = 0; k < count.size(); ++k) {
    if (count[k] == 1) {
      throw ArgumentError("split: class " + std::to_string(k) +
                          " has a single sample; stratification needs at least 2");
    }
  }

  // Per-class quota: floor(ratio * n_k) clamped to [1, n_k - 1], then the
  // remaining train slots go to classes with the largest fractional part.
  const auto target = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));
  std::vector<std::size_t> quota(count.size(), 0);
  std::vector<double> frac(count.size(), -1.0);
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < count.size(); ++k) {
    if (count[k] == 0) continue;
    const double exact = ratio * static_cast<double>(count[k]);
    quota[k] = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(exact)), 1, count[k] - 1);
    frac[k] = exact - std::floor(exact);
    assigned += quota[k];
  }
  std::vector<std::size_t> order(count.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k : order) {
    if (assigned >= target) break;
    if (count[k] != 0 && quota[k] + 1 < count[k]) {
      ++quota[k];
      ++assigned;
    }
  }

  Split out;
  Rng rng(seed);
  std::vector<std::size_t> taken(count.size(), 0);
  for (std::size_t i : rng.permutation(n)) {
    const auto k = static_cast<std::size_t>(ds.labels[i]);
    if (taken[k] < quota[k]) {
      ++taken[k];
      out.train_indices.push_back(i);
    } else {
      out.test_indices.push_back(i);
    }
  }
  out.train = ds.subset(out.train_indices);
  out.test = ds.subset(out.test_indices);
  return out;
}

std::vector<std::vector<std::size_t>> batches(std::size_t n_rows, std::size_t batch_size,
                                              RngSeed seed) {
  if (batch_size == 0) throw ArgumentError("batches: batch_size must be >= 1");
  Rng rng(seed);
  const auto perm = rng.permutation(n_rows);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < n_rows; start += batch_size) {
    const std::size_t end = std::min(n_rows, start + batch_size);
    out.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(start),
                     perm.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

void SynthSpec::validate() const {
  if (views == 0 || classes == 0 || samples_per_class == 0 || latent_dim == 0)
    throw ArgumentError("synth: views, classes, samples_per_class and latent_dim must be >= 1");
  if (!(noise_std >= 0.0)) throw ArgumentError("synth: noise_std must be >= 0");
  if (view_dims.size() != views) {
    throw ArgumentError("synth: view_dims lists " + std::to_string(view_dims.size()) +
                        " widths for " + std::to_string(views) + " views");
  }
  for (std::size_t d : view_dims)
    if (d == 0) throw ArgumentError("synth: every view dimension must be >= 1");
}

MultiViewDataset synth_multiview(const SynthSpec& spec, RngSeed seed) {
  spec.validate();
  constexpr double kLatentSpread = 0.1;
  Rng centre_rng(derive_seed(seed, 1));
  Matrix centres(spec.classes, spec.latent_dim);
  for (auto& v : centres.values()) v = centre_rng.uniform(-1.0, 1.0);

  std::vector<Matrix> maps;
  for (std::size_t v = 0; v < spec.views; ++v) {
    Rng map_rng(derive_seed(seed, 2, v));
    Matrix a(spec.view_dims[v], spec.latent_dim);
    for (auto& x : a.values()) x = map_rng.normal();
    maps.push_back(std::move(a));
  }

  const std::size_t n = spec.classes * spec.samples_per_class;
  MultiViewDataset ds;
  ds.class_count = spec.classes;
  Matrix latent(n, spec.latent_dim);
  Rng latent_rng(derive_seed(seed, 3));
  for (std::size_t k = 0; k < spec.classes; ++k) {
    for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
      const std::size_t i = k * spec.samples_per_class + s;
      for (std::size_t j = 0; j < spec.latent_dim; ++j)
        latent(i, j) = centres(k, j) + latent_rng.normal(0.0, kLatentSpread);
      ds.labels.push_back(static_cast<int>(k));
    }
  }
  for (std::size_t v = 0; v < spec.views; ++v) {
    Matrix x = matmul_nt(latent, maps[v]);
    Rng noise_rng(derive_seed(seed, 4, v));
    if (spec.noise_std > 0.0)
      for (auto& value : x.values()) value += noise_rng.normal(0.0, spec.noise_std);
    ds.views.push_back(std::move(x));
  }
  return ds;
}

FeatureScaling fit_min_max(const MultiViewDataset& train) {
  FeatureScaling s;
  for (const auto& view : train.views) {
    std::vector<double> lo(view.cols(), 0.0);
    std::vector<double> range(view.cols(), 0.0);
    for (std::size_t c = 0; c < view.cols(); ++c) {
      double mn = INFINITY;
      double mx = -INFINITY;
      for (std::size_t r = 0; r < view.rows(); ++r) {
        mn = std::min(mn, view(r, c));
        mx = std::max(mx, view(r, c));
      }
      if (view.rows() == 0) mn = mx = 0.0;
      lo[c] = mn;
      range[c] = mx - mn;
    }
    s.min.push_back(std::move(lo));
    s.range.push_back(std::move(range));
  }
  return s;
}

Matrix apply_scaling(const Matrix& view, const FeatureScaling& scaling, std::size_t view_index) {
  if (view_index >= scaling.min.size() || scaling.min[view_index].size() != view.cols()) {
    throw ShapeError("apply_scaling: view " + std::to_string(view_index) + " with " +
                     std::to_string(view.cols()) + " features does not match the fitted scaling");
  }
  const auto& lo = scaling.min[view_index];
  const auto& range = scaling.range[view_index];
  Matrix out = view;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c)
      out(r, c) = range[c] > 0.0 ? (out(r, c) - lo[c]) / range[c] : 0.0;
  return out;
}

MultiViewDataset apply_scaling(const MultiViewDataset& ds, const FeatureScaling& scaling) {
  if (scaling.min.size() != ds.views.size()) {
    throw ShapeError("apply_scaling: scaling fitted on " + std::to_string(scaling.min.size()) +
                     " views, dataset has " + std::to_string(ds.views.size()));
  }
  MultiViewDataset out = ds;
  for (std::size_t v = 0; v < ds.views.size(); ++v) out.views[v] = apply_scaling(ds.views[v], scaling, v);
  out.scaling = scaling;
  return out;
}

}  // namespace acmvl
