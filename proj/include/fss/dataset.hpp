#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fss/errors.hpp"
#include "fss/mlp.hpp"
#include "fss/num_io.hpp"
#include "fss/pit.hpp"
#include "fss/rng.hpp"

namespace fss {

/// Design vector of one FSS realisation: slot length per screen plus the
/// geometric separation between adjacent screens.
struct Geometry {
  std::vector<double> slot_lengths;  // m, size N
  std::vector<double> distances;     // m, size N-1

  std::size_t n_screens() const { return slot_lengths.size(); }
  std::size_t dim() const { return slot_lengths.size() + distances.size(); }

  std::vector<double> flat() const {
    std::vector<double> out(slot_lengths);
    out.insert(out.end(), distances.begin(), distances.end());
    return out;
  }

  void validate() const {
    if (slot_lengths.empty() || distances.size() + 1 != slot_lengths.size()) {
      throw invalid_input("Geometry: need N slot lengths and N-1 distances");
    }
    for (double v : slot_lengths) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw invalid_input("Geometry: slot lengths must be finite and > 0");
      }
    }
    for (double v : distances) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw invalid_input("Geometry: distances must be finite and > 0");
      }
    }
  }
};

struct LabeledSample {
  long long id = 0;
  Geometry geometry;
  std::vector<cdbl> s21_goal;  // one entry per grid frequency
};

struct AxisSpec {
  double min = 0.0;
  double max = 0.0;
  int count = 1;
};

/// Cartesian sweep over slot lengths and screen separations.
struct SweepSpec {
  std::vector<AxisSpec> slots;      // one axis per screen
  std::vector<AxisSpec> distances;  // one axis per gap

  std::size_t total() const {
    std::size_t n = 1;
    for (const auto& a : slots) n *= static_cast<std::size_t>(a.count);
    for (const auto& a : distances) n *= static_cast<std::size_t>(a.count);
    return n;
  }

  void validate() const {
    if (slots.empty() || distances.size() + 1 != slots.size()) {
      throw invalid_input("SweepSpec: need N slot axes and N-1 distance axes");
    }
    for (const auto& a : slots) {
      if (a.count < 1 || !(a.min <= a.max) || !(a.min > 0.0)) {
        throw invalid_input("SweepSpec: slot axis needs count >= 1 and 0 < min <= max");
      }
    }
    for (const auto& a : distances) {
      if (a.count < 1 || !(a.min <= a.max) || !(a.min > 0.0)) {
        throw invalid_input("SweepSpec: distance axis needs count >= 1 and 0 < min <= max");
      }
    }
  }
};

namespace detail {

inline double axis_value(const AxisSpec& a, int i) {
  if (a.count == 1) return a.min;
  return a.min + (a.max - a.min) * static_cast<double>(i) / static_cast<double>(a.count - 1);
}

}  // namespace detail

/// Full Cartesian product in lexicographic order (last axis fastest).
inline std::vector<Geometry> generate_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<AxisSpec> axes(spec.slots);
  axes.insert(axes.end(), spec.distances.begin(), spec.distances.end());
  std::vector<int> idx(axes.size(), 0);
  std::vector<Geometry> out;
  out.reserve(spec.total());
  while (true) {
    Geometry g;
    for (std::size_t i = 0; i < spec.slots.size(); ++i) {
      g.slot_lengths.push_back(detail::axis_value(axes[i], idx[i]));
    }
    for (std::size_t i = spec.slots.size(); i < axes.size(); ++i) {
      g.distances.push_back(detail::axis_value(axes[i], idx[i]));
    }
    out.push_back(std::move(g));
    std::size_t k = axes.size();
    while (k-- > 0) {
      if (++idx[k] < axes[k].count) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
  }
}

/// Smooth monotone slot-length -> circuit-parameter rule used by the
/// synthetic oracle; constants calibrated so an ~18 mm cell with ~14.9 mm
/// slots lands at physically plausible values.
struct TruthMapConstants {
  double l0_slope = 1.08e-7;       // H/m
  double c0_scale = 3.05e-16;      // F*m
  double c0_pole = 16e-3;          // m; C0 = c0_scale / (c0_pole - l)
  double alpha_l_slope = 1.48e-5;  // 1/m
  double alpha_c_slope = 2.78e-9;  // 1/m
  double harmonic_decay = 3.0;     // k-th harmonic weight falls as k^-decay
};

/// Deterministic stand-in for the full-wave solver. Evaluates the circuit
/// model at a higher harmonic fidelity than the surrogate and applies a
/// seeded multiplicative perturbation to every truth circuit parameter, so
/// surrogate fits face a reproducible model gap. Perturbations are keyed by
/// the generating geometry value (slot length or separation), which keeps an
/// isolated screen electrically identical to the same screen inside a stack.
class SynthOracle {
 public:
  SynthOracle(UnitCellSpec cell, FrequencyGrid grid, int fidelity = 3, double perturb = 0.03,
              std::uint64_t seed = 1, TruthMapConstants truth = {})
      : cell_(cell),
        grid_(std::move(grid)),
        fidelity_(fidelity),
        perturb_(perturb),
        seed_(seed),
        truth_(truth) {
    cell_.validate();
    ensure_grid_valid(grid_, cell_);
    if (fidelity_ < 1) {
      throw invalid_input("SynthOracle: fidelity must be >= 1");
    }
    if (!(perturb_ >= 0.0) || !(perturb_ < 1.0)) {
      throw invalid_input("SynthOracle: perturbation must lie in [0, 1)");
    }
  }

  /// Test hook: overrides the parametric truth map per screen.
  std::function<ScreenParams(double slot_length)> screen_rule;

  const UnitCellSpec& cell() const { return cell_; }
  const FrequencyGrid& grid() const { return grid_; }
  int fidelity() const { return fidelity_; }
  double perturb() const { return perturb_; }
  std::uint64_t seed() const { return seed_; }
  const TruthMapConstants& truth() const { return truth_; }

  ScreenParams truth_screen(double slot_length) const {
    if (screen_rule) return screen_rule(slot_length);
    if (!(slot_length > 0.0) || !(slot_length < cell_.period) ||
        !(slot_length < truth_.c0_pole)) {
      throw invalid_input("SynthOracle: slot length outside the truth-map domain");
    }
    ScreenParams s;
    s.l0 = perturbed(truth_.l0_slope * slot_length, slot_length, 1);
    s.c0 = perturbed(truth_.c0_scale / (truth_.c0_pole - slot_length), slot_length, 2);
    for (int k = 1; k <= fidelity_; ++k) {
      const double decay = std::pow(static_cast<double>(k), truth_.harmonic_decay);
      s.alpha_l.push_back(
          perturbed(truth_.alpha_l_slope * slot_length / decay, slot_length, 100 + k));
      s.alpha_c.push_back(
          perturbed(truth_.alpha_c_slope * slot_length / decay, slot_length, 200 + k));
    }
    return s;
  }

  double effective_distance(double d, std::size_t gap_index) const {
    return perturbed(d, d, 300 + static_cast<std::uint64_t>(gap_index));
  }

  StackCircuit truth_stack(const Geometry& geometry) const {
    geometry.validate();
    StackCircuit stack;
    stack.cell = cell_;
    for (double l : geometry.slot_lengths) stack.screens.push_back(truth_screen(l));
    for (std::size_t i = 0; i < geometry.distances.size(); ++i) {
      stack.distances.push_back(effective_distance(geometry.distances[i], i));
    }
    return stack;
  }

  LabeledSample sample(const Geometry& geometry, long long id) const {
    LabeledSample s;
    s.id = id;
    s.geometry = geometry;
    s.s21_goal = stack_s21(truth_stack(geometry), grid_);
    return s;
  }

  /// S21 of one screen in isolation; the per-screen target used to seed the
  /// circuit fits.
  std::vector<cdbl> screen_s21(double slot_length) const {
    StackCircuit stack;
    stack.cell = cell_;
    stack.screens.push_back(truth_screen(slot_length));
    return stack_s21(stack, grid_);
  }

 private:
  double perturbed(double value, double key, std::uint64_t tag) const {
    if (perturb_ == 0.0) return value;
    std::uint64_t h = fnv1a64(&seed_, sizeof seed_);
    h = hash_double(key, h);
    h = fnv1a64(&tag, sizeof tag, h);
    SplitMix64 rng(h);
    return value * (1.0 + perturb_ * rng.uniform_sym());
  }

  UnitCellSpec cell_;
  FrequencyGrid grid_;
  int fidelity_;
  double perturb_;
  std::uint64_t seed_;
  TruthMapConstants truth_;
};

/// Seeded shuffle, then split with train size = floor(fraction * n).
inline std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> split(
    const std::vector<LabeledSample>& dataset, double train_fraction, std::uint64_t seed) {
  if (dataset.empty()) {
    throw invalid_input("split: empty dataset");
  }
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw invalid_input("split: train fraction must lie in (0, 1)");
  }
  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  SplitMix64 rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.uniform_index(i + 1);
    std::swap(order[i], order[j]);
  }
  const std::size_t n_train = static_cast<std::size_t>(train_fraction * static_cast<double>(n));
  std::pair<std::vector<LabeledSample>, std::vector<LabeledSample>> out;
  out.first.reserve(n_train);
  out.second.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? out.first : out.second).push_back(dataset[order[i]]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence. All floats use shortest round-trip decimals; lines beginning
// with '#' are comments. Errors carry 1-based physical line numbers.

namespace detail {

class LineReader {
 public:
  LineReader(const std::filesystem::path& path) : path_(path.string()), in_(path) {
    if (!in_) {
      throw invalid_input("cannot open file: " + path_);
    }
  }

  /// Next non-comment line; false at EOF.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      const std::string_view t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const { throw format_error(path_, line_no_, what); }

  long line_no() const { return line_no_; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ifstream in_;
  long line_no_ = 0;
};

inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw invalid_input("cannot open file for writing: " + path.string());
  }
  return out;
}

}  // namespace detail

/// Geometry CSV: id,n_screens,l_1_mm..l_N_mm,d_1_mm..d_{N-1}_mm.
inline void write_geometry_csv(std::span<const LabeledSample> samples, std::size_t n_screens,
                               const std::filesystem::path& path, const std::string& comment = {}) {
  auto out = detail::open_out(path);
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "id,n_screens";
  for (std::size_t i = 1; i <= n_screens; ++i) out << ",l_" << i << "_mm";
  for (std::size_t i = 1; i < n_screens; ++i) out << ",d_" << i << "_mm";
  out << "\n";
  for (const auto& s : samples) {
    if (s.geometry.n_screens() != n_screens) {
      throw invalid_input("write_geometry_csv: inconsistent screen count in sample " +
                          std::to_string(s.id));
    }
    out << s.id << "," << n_screens;
    for (double l : s.geometry.slot_lengths) out << "," << format_double(l * 1e3);
    for (double d : s.geometry.distances) out << "," << format_double(d * 1e3);
    out << "\n";
  }
}

/// Response CSV: id,freq_hz,s21_re,s21_im; rows grouped by id, identical
/// strictly increasing grid per group.
inline void write_response_csv(std::span<const LabeledSample> samples, const FrequencyGrid& grid,
                               const std::filesystem::path& path, const std::string& comment = {}) {
  auto out = detail::open_out(path);
  if (!comment.empty()) out << "# " << comment << "\n";
  out << "id,freq_hz,s21_re,s21_im\n";
  for (const auto& s : samples) {
    if (s.s21_goal.size() != grid.size()) {
      throw invalid_input("write_response_csv: curve length mismatch in sample " +
                          std::to_string(s.id));
    }
    for (std::size_t j = 0; j < grid.size(); ++j) {
      out << s.id << "," << format_double(grid.points[j]) << ","
          << format_double(s.s21_goal[j].real()) << "," << format_double(s.s21_goal[j].imag())
          << "\n";
    }
  }
}

inline void write_dataset(std::span<const LabeledSample> samples, std::size_t n_screens,
                          const FrequencyGrid& grid, const std::filesystem::path& geometry_path,
                          const std::filesystem::path& response_path,
                          const std::string& comment = {}) {
  write_geometry_csv(samples, n_screens, geometry_path, comment);
  write_response_csv(samples, grid, response_path, comment);
}

/// Reads the geometry/response pair back into labeled samples (geometry file
/// order). The recovered grid is returned through `grid_out` when non-null.
inline std::vector<LabeledSample> read_dataset(const std::filesystem::path& geometry_path,
                                               const std::filesystem::path& response_path,
                                               FrequencyGrid* grid_out = nullptr) {
  // Geometry file.
  detail::LineReader geo(geometry_path);
  std::string line;
  if (!geo.next(line)) geo.fail("missing header");
  auto cols = split(trim(line), ',');
  if (cols.size() < 3 || cols[0] != "id" || cols[1] != "n_screens") {
    geo.fail("malformed header: expected id,n_screens,l_*_mm,...");
  }
  std::size_t n_screens = 0;
  std::size_t at = 2;
  while (at < cols.size() && cols[at] == "l_" + std::to_string(at - 1) + "_mm") {
    ++n_screens;
    ++at;
  }
  for (std::size_t i = 1; i < n_screens; ++i, ++at) {
    if (at >= cols.size() || cols[at] != "d_" + std::to_string(i) + "_mm") {
      geo.fail("malformed header: expected d_" + std::to_string(i) + "_mm");
    }
  }
  if (n_screens == 0 || at != cols.size()) geo.fail("malformed header columns");

  std::vector<LabeledSample> samples;
  std::map<long long, std::size_t> index_of;
  while (geo.next(line)) {
    auto f = split(trim(line), ',');
    if (f.size() != 2 * n_screens + 1) geo.fail("wrong field count");
    LabeledSample s;
    try {
      s.id = parse_int(f[0]);
      if (parse_int(f[1]) != static_cast<long long>(n_screens)) {
        geo.fail("inconsistent n_screens");
      }
      for (std::size_t i = 0; i < n_screens; ++i) {
        s.geometry.slot_lengths.push_back(parse_double(f[2 + i]) * 1e-3);
      }
      for (std::size_t i = 0; i + 1 < n_screens; ++i) {
        s.geometry.distances.push_back(parse_double(f[2 + n_screens + i]) * 1e-3);
      }
    } catch (const invalid_input& e) {
      geo.fail(e.what());
    }
    if (index_of.count(s.id)) geo.fail("duplicate id " + std::to_string(s.id));
    index_of[s.id] = samples.size();
    samples.push_back(std::move(s));
  }

  // Response file.
  detail::LineReader resp(response_path);
  if (!resp.next(line)) resp.fail("missing header");
  if (trim(line) != "id,freq_hz,s21_re,s21_im") {
    resp.fail("malformed header: expected id,freq_hz,s21_re,s21_im");
  }
  std::vector<double> grid_points;       // grid of the first group
  std::vector<double> current_points;    // grid of the group being read
  bool have_current = false;
  long long current_id = 0;
  std::size_t groups_seen = 0;

  auto finish_group = [&]() {
    if (!have_current) return;
    auto it = index_of.find(current_id);
    // presence already checked per row; length/grid check here
    if (grid_points.empty()) {
      grid_points = current_points;
    } else if (current_points != grid_points) {
      resp.fail("frequency grid of id " + std::to_string(current_id) +
                " differs from the first group");
    }
    (void)it;
    ++groups_seen;
  };

  while (resp.next(line)) {
    auto f = split(trim(line), ',');
    if (f.size() != 4) resp.fail("wrong field count");
    long long id = 0;
    double freq = 0.0, re = 0.0, im = 0.0;
    try {
      id = parse_int(f[0]);
      freq = parse_double(f[1]);
      re = parse_double(f[2]);
      im = parse_double(f[3]);
    } catch (const invalid_input& e) {
      resp.fail(e.what());
    }
    auto it = index_of.find(id);
    if (it == index_of.end()) {
      resp.fail("id " + std::to_string(id) + " not present in the geometry file");
    }
    if (!have_current || id != current_id) {
      if (have_current) {
        if (!samples[index_of[current_id]].s21_goal.empty() && id == current_id) {
          // unreachable; kept for clarity
        }
        finish_group();
      }
      if (!samples[it->second].s21_goal.empty()) {
        resp.fail("rows of id " + std::to_string(id) + " are not contiguous");
      }
      current_id = id;
      current_points.clear();
      have_current = true;
    }
    if (!current_points.empty() && !(freq > current_points.back())) {
      resp.fail("frequencies must be strictly increasing within a group");
    }
    if (!(freq > 0.0)) resp.fail("frequencies must be positive");
    if (std::sqrt(re * re + im * im) > 1.0 + 1e-6) {
      resp.fail("|s21| exceeds the passivity bound");
    }
    current_points.push_back(freq);
    samples[it->second].s21_goal.emplace_back(re, im);
  }
  finish_group();

  if (groups_seen != samples.size()) {
    resp.fail("response file is missing " + std::to_string(samples.size() - groups_seen) +
              " id group(s) present in the geometry file");
  }
  if (grid_out) {
    grid_out->points = grid_points;
  }
  return samples;
}

// Key-value metadata file: one "key = value" per line.

inline void write_metadata(const std::vector<std::pair<std::string, std::string>>& entries,
                           const std::filesystem::path& path, const std::string& comment = {}) {
  auto out = detail::open_out(path);
  if (!comment.empty()) out << "# " << comment << "\n";
  for (const auto& [k, v] : entries) out << k << " = " << v << "\n";
}

inline std::map<std::string, std::string> read_metadata(const std::filesystem::path& path) {
  detail::LineReader in(path);
  std::map<std::string, std::string> out;
  std::string line;
  while (in.next(line)) {
    const auto pos = line.find('=');
    if (pos == std::string::npos) in.fail("expected 'key = value'");
    const std::string key(trim(std::string_view(line).substr(0, pos)));
    const std::string value(trim(std::string_view(line).substr(pos + 1)));
    if (key.empty()) in.fail("empty key");
    if (!out.emplace(key, value).second) in.fail("duplicate key '" + key + "'");
  }
  return out;
}

// Model file: line-oriented, human-diffable.

inline void write_model(const MlpModel& model, const std::filesystem::path& path) {
  model.validate();
  auto out = detail::open_out(path);
  out << "format_version 1\n";
  out << "layer_sizes";
  for (std::size_t s : model.layer_sizes) out << " " << s;
  out << "\ninput_min";
  for (const auto& [lo, hi] : model.input_norm) out << " " << format_double(lo);
  out << "\ninput_max";
  for (const auto& [lo, hi] : model.input_norm) out << " " << format_double(hi);
  out << "\noutput_offset";
  for (double v : model.output_offset) out << " " << format_double(v);
  out << "\n";
  for (std::size_t l = 0; l < model.weights.size(); ++l) {
    const std::size_t in = model.layer_sizes[l];
    const std::size_t rows = model.layer_sizes[l + 1];
    out << "weights " << l << "\n";
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < in; ++c) {
        out << (c ? " " : "") << format_double(model.weights[l][r * in + c]);
      }
      out << "\n";
    }
    out << "bias " << l << "\n";
    for (std::size_t r = 0; r < rows; ++r) {
      out << (r ? " " : "") << format_double(model.biases[l][r]);
    }
    out << "\n";
  }
}

namespace detail {

inline std::vector<double> parse_doubles(LineReader& in, std::string_view payload,
                                         std::size_t expected) {
  std::vector<double> out;
  for (std::string_view tok : split(payload, ' ')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    try {
      out.push_back(parse_double(tok));
    } catch (const invalid_input& e) {
      in.fail(e.what());
    }
  }
  if (out.size() != expected) {
    in.fail("expected " + std::to_string(expected) + " values, got " + std::to_string(out.size()));
  }
  return out;
}

}  // namespace detail

inline MlpModel read_model(const std::filesystem::path& path) {
  detail::LineReader in(path);
  std::string line;
  auto expect_next = [&](const char* what) {
    if (!in.next(line)) in.fail(std::string("unexpected end of file, expected ") + what);
  };

  expect_next("format_version");
  if (trim(line) != "format_version 1") in.fail("unsupported format_version");

  expect_next("layer_sizes");
  MlpModel model;
  {
    const std::string_view v = trim(line);
    if (!v.starts_with("layer_sizes ")) in.fail("expected layer_sizes");
    for (std::string_view tok : split(v.substr(12), ' ')) {
      tok = trim(tok);
      if (tok.empty()) continue;
      long long s = 0;
      try {
        s = parse_int(tok);
      } catch (const invalid_input& e) {
        in.fail(e.what());
      }
      if (s <= 0) in.fail("layer sizes must be positive");
      model.layer_sizes.push_back(static_cast<std::size_t>(s));
    }
    if (model.layer_sizes.size() < 2) in.fail("need at least two layer sizes");
  }

  expect_next("input_min");
  std::string_view v = trim(line);
  if (!v.starts_with("input_min")) in.fail("expected input_min");
  const auto mins = detail::parse_doubles(in, v.substr(9), model.layer_sizes.front());
  expect_next("input_max");
  v = trim(line);
  if (!v.starts_with("input_max")) in.fail("expected input_max");
  const auto maxes = detail::parse_doubles(in, v.substr(9), model.layer_sizes.front());
  for (std::size_t i = 0; i < mins.size(); ++i) {
    if (!(mins[i] < maxes[i])) in.fail("input_min must be strictly below input_max");
    model.input_norm.emplace_back(mins[i], maxes[i]);
  }
  expect_next("output_offset");
  v = trim(line);
  if (!v.starts_with("output_offset")) in.fail("expected output_offset");
  model.output_offset = detail::parse_doubles(in, v.substr(13), model.layer_sizes.back());

  for (std::size_t l = 0; l + 1 < model.layer_sizes.size(); ++l) {
    const std::size_t in_dim = model.layer_sizes[l];
    const std::size_t rows = model.layer_sizes[l + 1];
    expect_next("weights");
    if (trim(line) != "weights " + std::to_string(l)) {
      in.fail("expected 'weights " + std::to_string(l) + "'");
    }
    std::vector<double> w;
    w.reserve(in_dim * rows);
    for (std::size_t r = 0; r < rows; ++r) {
      expect_next("weight row");
      const auto row = detail::parse_doubles(in, trim(line), in_dim);
      w.insert(w.end(), row.begin(), row.end());
    }
    model.weights.push_back(std::move(w));
    expect_next("bias");
    if (trim(line) != "bias " + std::to_string(l)) {
      in.fail("expected 'bias " + std::to_string(l) + "'");
    }
    expect_next("bias row");
    model.biases.push_back(detail::parse_doubles(in, trim(line), rows));
  }
  if (in.next(line)) in.fail("trailing content after model data");
  try {
    model.validate();
  } catch (const invalid_input& e) {
    in.fail(e.what());
  }
  return model;
}

}  // namespace fss
