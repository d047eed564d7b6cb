#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vicon/analysis.hpp"
#include "vicon/common.hpp"
#include "vicon/data.hpp"
#include "vicon/network.hpp"
#include "vicon/topology.hpp"
#include "vicon/trainer.hpp"

namespace vicon {

enum class DataSource { synthetic, texture, procedural };

inline std::string to_string(DataSource s) {
  switch (s) {
    case DataSource::texture: return "texture";
    case DataSource::procedural: return "procedural";
    default: return "synthetic";
  }
}

struct DataSpec {
  DataSource source = DataSource::synthetic;
  std::string path;                // texture image (P2/P5)
  std::uint64_t texture_seed = 1;  // procedural texture
  std::size_t texture_size = 256;
  double texture_blur = 3.0;
  Pairing pairing = Pairing::independent;

  friend bool operator==(const DataSpec&, const DataSpec&) = default;
};

struct AnalysisSpec {
  /// Ocularity measures reference deviations from this level.
  double ocularity_origin = 0.0;
  MontageSource montage = MontageSource::weights;
  /// Held-out samples used for the reconstruction summary.
  std::size_t eval_samples = 200;

  friend bool operator==(const AnalysisSpec&, const AnalysisSpec&) = default;
};

struct ExperimentConfig {
  TopologySpec topology;
  Schedule schedule{{Phase{2000, 0.01, {1.0, 1.0}}}};
  InitSpec init;
  DataSpec data;
  AnalysisSpec analysis;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  std::size_t log_interval = 100;
  double reference_step_factor = 3.0;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  return out;
}

template <typename T>
T parse_number(std::string_view text, const std::string& key) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ConfigError(key + ": expected a number, got '" + std::string(text) + "'");
  return v;
}

/// "30" (1-D) or "40x40" (rows x cols).
inline Extent parse_extent(std::string_view text, const std::string& key) {
  const auto parts = split(text, 'x');
  if (parts.size() == 1) return {1, parse_number<std::size_t>(parts[0], key)};
  if (parts.size() == 2) return {parse_number<std::size_t>(parts[0], key), parse_number<std::size_t>(parts[1], key)};
  throw ConfigError(key + ": expected N or RxC, got '" + std::string(text) + "'");
}

/// "1" (both axes) or "0.5x0.5" (rows x cols).
inline std::array<double, 2> parse_sigma(std::string_view text, const std::string& key) {
  const auto parts = split(text, 'x');
  if (parts.size() == 1) {
    const double s = parse_number<double>(parts[0], key);
    return {s, s};
  }
  if (parts.size() == 2) return {parse_number<double>(parts[0], key), parse_number<double>(parts[1], key)};
  throw ConfigError(key + ": expected S or SxS, got '" + std::string(text) + "'");
}

inline std::string sigma_str(const std::array<double, 2>& s) {
  return s[0] == s[1] ? format_double(s[0]) : format_double(s[0]) + "x" + format_double(s[1]);
}

/// "updates:step:sigma, ..." e.g. "2000:0.01:1, 2000:0.01:0.5".
inline Schedule parse_schedule(std::string_view text, const std::string& key) {
  Schedule s;
  for (auto item : split(text, ',')) {
    const auto f = split(item, ':');
    if (f.size() != 3) throw ConfigError(key + ": phase '" + std::string(item) + "' is not updates:step:sigma");
    s.phases.push_back({parse_number<std::size_t>(f[0], key), parse_number<double>(f[1], key), parse_sigma(f[2], key)});
  }
  return s;
}

template <typename E>
E parse_enum(std::string_view text, const std::string& key, std::initializer_list<E> values) {
  for (E v : values)
    if (to_string(v) == text) return v;
  std::string options;
  for (E v : values) options += (options.empty() ? "" : "|") + to_string(v);
  throw ConfigError(key + ": expected " + options + ", got '" + std::string(text) + "'");
}

}  // namespace detail

/// Checks that the configuration describes a runnable experiment. Files are
/// not touched here.
inline void validate(const ExperimentConfig& c) {
  build_topology(c.topology);
  if (c.schedule.phases.empty()) throw ConfigError("schedule.phases: at least one phase is required");
  for (const auto& p : c.schedule.phases) {
    if (p.num_updates == 0) throw ConfigError("schedule.phases: every phase needs at least one update");
    if (!(p.step_size > 0.0)) throw ConfigError("schedule.phases: step size must be positive");
    for (double s : p.leakage_sigma)
      if (!(s > 0.0)) throw ConfigError("schedule.phases: leakage sigma must be positive");
  }
  if (c.data.source == DataSource::synthetic && c.topology.num_retinae != 2)
    throw ConfigError("data.source = synthetic needs topology.retinae = 2");
  if (c.data.source == DataSource::texture && c.data.path.empty())
    throw ConfigError("data.source = texture needs data.path");
  if (c.data.source == DataSource::procedural &&
      (c.data.texture_size < c.topology.retina.rows || c.data.texture_size < c.topology.retina.cols))
    throw ConfigError("data.texture_size " + std::to_string(c.data.texture_size) + " is smaller than the retina " +
                      c.topology.retina.str());
  if (!(c.reference_step_factor > 0.0)) throw ConfigError("run.reference_step_factor must be positive");
  if (c.analysis.eval_samples == 0) throw ConfigError("analysis.eval_samples must be positive");
  if (c.output_dir.empty()) throw ConfigError("output.dir must not be empty");
}

/// Parses `section.key = value` lines; '#' starts a comment. Unset keys keep
/// their defaults; unknown or repeated keys are errors.
inline ExperimentConfig parse_config(const std::string& text) {
  using namespace detail;
  ExperimentConfig c;
  std::map<std::string, bool> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'section.key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view v = trim(line.substr(eq + 1));
    if (seen[key]) throw ConfigError("line " + std::to_string(line_no) + ": " + key + " is set twice");
    seen[key] = true;

    if (key == "topology.grid") c.topology.grid = parse_extent(v, key);
    else if (key == "topology.retina") c.topology.retina = parse_extent(v, key);
    else if (key == "topology.retinae") c.topology.num_retinae = parse_number<std::size_t>(v, key);
    else if (key == "topology.rf") c.topology.rf = parse_extent(v, key);
    else if (key == "topology.inhibition") c.topology.inhibition = parse_extent(v, key);
    else if (key == "topology.leakage") c.topology.leakage = parse_extent(v, key);
    else if (key == "topology.leakage_sigma") c.topology.leakage_sigma = parse_sigma(v, key);
    else if (key == "topology.boundary") c.topology.boundary = parse_enum(v, key, {Boundary::truncate, Boundary::wrap});
    else if (key == "schedule.phases") c.schedule = parse_schedule(v, key);
    else if (key == "init.weight_range") c.init.weight_range = parse_number<double>(v, key);
    else if (key == "init.bias") c.init.bias_value = parse_number<double>(v, key);
    else if (key == "init.reference_range") c.init.reference_range = parse_number<double>(v, key);
    else if (key == "data.source")
      c.data.source = parse_enum(v, key, {DataSource::synthetic, DataSource::texture, DataSource::procedural});
    else if (key == "data.path") c.data.path = std::string(v);
    else if (key == "data.texture_seed") c.data.texture_seed = parse_number<std::uint64_t>(v, key);
    else if (key == "data.texture_size") c.data.texture_size = parse_number<std::size_t>(v, key);
    else if (key == "data.texture_blur") c.data.texture_blur = parse_number<double>(v, key);
    else if (key == "data.pairing") c.data.pairing = parse_enum(v, key, {Pairing::independent, Pairing::correlated});
    else if (key == "analysis.ocularity_origin") c.analysis.ocularity_origin = parse_number<double>(v, key);
    else if (key == "analysis.montage")
      c.analysis.montage = parse_enum(v, key, {MontageSource::weights, MontageSource::references});
    else if (key == "analysis.eval_samples") c.analysis.eval_samples = parse_number<std::size_t>(v, key);
    else if (key == "output.dir") c.output_dir = std::string(v);
    else if (key == "run.seed") c.seed = parse_number<std::uint64_t>(v, key);
    else if (key == "run.log_interval") c.log_interval = parse_number<std::size_t>(v, key);
    else if (key == "run.reference_step_factor") c.reference_step_factor = parse_number<double>(v, key);
    else throw ConfigError("line " + std::to_string(line_no) + ": unknown key " + key);
  }
  validate(c);
  return c;
}

inline std::string serialize(const ExperimentConfig& c) {
  using detail::sigma_str;
  std::ostringstream o;
  const auto& t = c.topology;
  o << "topology.grid = " << t.grid.str() << '\n'
    << "topology.retina = " << t.retina.str() << '\n'
    << "topology.retinae = " << t.num_retinae << '\n'
    << "topology.rf = " << t.rf.str() << '\n'
    << "topology.inhibition = " << t.inhibition.str() << '\n'
    << "topology.leakage = " << t.leakage.str() << '\n'
    << "topology.leakage_sigma = " << sigma_str(t.leakage_sigma) << '\n'
    << "topology.boundary = " << to_string(t.boundary) << '\n';
  o << "schedule.phases = ";
  for (std::size_t i = 0; i < c.schedule.phases.size(); ++i) {
    const auto& p = c.schedule.phases[i];
    o << (i ? ", " : "") << p.num_updates << ':' << format_double(p.step_size) << ':' << sigma_str(p.leakage_sigma);
  }
  o << '\n'
    << "init.weight_range = " << format_double(c.init.weight_range) << '\n'
    << "init.bias = " << format_double(c.init.bias_value) << '\n'
    << "init.reference_range = " << format_double(c.init.reference_range) << '\n'
    << "data.source = " << to_string(c.data.source) << '\n';
  if (!c.data.path.empty()) o << "data.path = " << c.data.path << '\n';
  o << "data.texture_seed = " << c.data.texture_seed << '\n'
    << "data.texture_size = " << c.data.texture_size << '\n'
    << "data.texture_blur = " << format_double(c.data.texture_blur) << '\n'
    << "data.pairing = " << to_string(c.data.pairing) << '\n'
    << "analysis.ocularity_origin = " << format_double(c.analysis.ocularity_origin) << '\n'
    << "analysis.montage = " << to_string(c.analysis.montage) << '\n'
    << "analysis.eval_samples = " << c.analysis.eval_samples << '\n'
    << "output.dir = " << c.output_dir << '\n'
    << "run.seed = " << c.seed << '\n'
    << "run.log_interval = " << c.log_interval << '\n'
    << "run.reference_step_factor = " << format_double(c.reference_step_factor) << '\n';
  return o.str();
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace vicon
