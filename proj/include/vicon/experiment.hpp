#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "vicon/analysis.hpp"
#include "vicon/checkpoint.hpp"
#include "vicon/config.hpp"
#include "vicon/data.hpp"
#include "vicon/image.hpp"
#include "vicon/network.hpp"
#include "vicon/trainer.hpp"

namespace vicon {

/// Independent, reproducible seed for one consumer of randomness.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace seed_stream {
inline constexpr std::uint64_t init = 0, training = 1, evaluation = 2, held_out_texture = 3;
}

/// Type-erased sample source.
class AnySource {
 public:
  template <SampleSource S>
  explicit AnySource(S source) : next_([s = std::move(source)]() mutable { return s.next(); }) {}
  std::optional<Sample> next() { return next_(); }

 private:
  std::function<std::optional<Sample>()> next_;
};

/// The configured data stream. `held_out` switches to the evaluation seed
/// and, for procedural data, to a separately generated texture.
inline AnySource make_source(const ExperimentConfig& c, bool held_out) {
  const TopologySpec& t = c.topology;
  const std::uint64_t seed = derive_seed(c.seed, held_out ? seed_stream::evaluation : seed_stream::training);
  switch (c.data.source) {
    case DataSource::synthetic:
      return AnySource(SyntheticRetinaSource(t.retina.size(), t.num_retinae, seed));
    case DataSource::texture:
      return AnySource(TexturePatchSource(load_pgm(c.data.path), t.retina, t.num_retinae, c.data.pairing, seed));
    case DataSource::procedural: {
      const std::uint64_t tex_seed =
          held_out ? derive_seed(c.data.texture_seed, seed_stream::held_out_texture) : c.data.texture_seed;
      return AnySource(TexturePatchSource(procedural_texture(tex_seed, c.data.texture_size, c.data.texture_blur),
                                          t.retina, t.num_retinae, c.data.pairing, seed));
    }
  }
  throw ConfigError("unknown data source");
}

/// Scalar results of an analysis pass; also written to summary.txt.
struct AnalysisSummary {
  double reconstruction_mse = 0.0;   // mean ||x - x_hat||^2 / d over held-out samples
  double baseline_mse = 0.0;         // same for the all-zero prediction
  double mean_max_posterior = 0.0;   // mean over samples of max_y Pr(y|x)
  std::optional<StripeStats> stripes;       // 1-D grid, two retinae
  std::optional<double> left_fraction;      // 2-D grid, two retinae
  std::optional<double> correlation_length; // 2-D grid, two retinae
};

inline void ensure_directory(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw DataError("cannot create output directory " + dir);
}

inline std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("failed writing " + path);
}

/// Writes every analysis artifact for a trained network into `dir`:
/// ocularity.csv and, on 2-D grids, dominance.pgm (two retinae);
/// montage.ppm or montage.pgm; reconstruction.pgm; summary.txt.
inline AnalysisSummary analyze_network(const ExperimentConfig& c, const Topology& topo, const NetworkParams& params,
                                       const std::string& dir) {
  ensure_directory(dir);
  AnalysisSummary s;
  const bool binocular = topo.spec().num_retinae == 2;
  const double origin = c.analysis.ocularity_origin;
  if (binocular) {
    const OcularityProfile prof = ocularity_profile(params, topo, origin);
    write_ocularity_csv(prof, join(dir, "ocularity.csv"));
    if (topo.spec().grid.is_1d()) {
      if (topo.size() >= 8) s.stripes = stripe_stats(prof);
    } else {
      const DominanceMap map = dominance_map_2d(params, topo, origin);
      write_pgm(map.image(), join(dir, "dominance.pgm"));
      s.left_fraction = map.left_fraction();
      s.correlation_length = label_correlation_length(map);
    }
  }
  const Image tiles = montage(params, topo, c.analysis.montage);
  write_pnm(tiles, join(dir, tiles.channels == 3 ? "montage.ppm" : "montage.pgm"));

  AnySource held_out = make_source(c, true);
  const double d = static_cast<double>(topo.input_dim());
  for (std::size_t n = 0; n < c.analysis.eval_samples; ++n) {
    const auto x = held_out.next();
    if (!x) throw DataError("evaluation source exhausted");
    const Reconstruction rec = reconstruct(params, topo, *x);
    if (n == 0) write_pgm(triptych(topo, *x, rec), join(dir, "reconstruction.pgm"));
    double err = 0.0, base = 0.0;
    for (std::size_t i = 0; i < x->size(); ++i) {
      err += ((*x)[i] - rec.reconstruction[i]) * ((*x)[i] - rec.reconstruction[i]);
      base += (*x)[i] * (*x)[i];
    }
    s.reconstruction_mse += err / d;
    s.baseline_mse += base / d;
    s.mean_max_posterior += *std::max_element(rec.posterior.begin(), rec.posterior.end());
  }
  const double n = static_cast<double>(c.analysis.eval_samples);
  s.reconstruction_mse /= n;
  s.baseline_mse /= n;
  s.mean_max_posterior /= n;

  std::string text = "reconstruction_mse = " + format_double(s.reconstruction_mse) + "\n" +
                     "baseline_mse = " + format_double(s.baseline_mse) + "\n" +
                     "mean_max_posterior = " + format_double(s.mean_max_posterior) + "\n";
  if (s.stripes) {
    const auto& st = *s.stripes;
    text += "stripe_period = " + (st.dominant_period ? format_double(*st.dominant_period) : "none") + "\n";
    text += "antiphase_correlation = " + (st.antiphase_corr ? format_double(*st.antiphase_corr) : "none") + "\n";
    text += "stripe_amplitude = " + format_double(st.amplitude) + "\n";
  }
  if (s.left_fraction) text += "left_fraction = " + format_double(*s.left_fraction) + "\n";
  if (s.correlation_length) text += "correlation_length = " + format_double(*s.correlation_length) + "\n";
  write_text(join(dir, "summary.txt"), text);
  return s;
}

struct TrainRun {
  TrainResult result;
  AnalysisSummary summary;
};

/// Trains per the configuration and writes checkpoint.vicn, trace.csv and
/// the analysis artifacts into `dir` (the configured output directory when
/// empty).
inline TrainRun run_train(const ExperimentConfig& c, std::string dir = {}, std::ostream* log = nullptr) {
  validate(c);
  if (dir.empty()) dir = c.output_dir;
  ensure_directory(dir);
  const Topology topo = build_topology(c.topology);
  NetworkParams params = init_params(topo, c.init, derive_seed(c.seed, seed_stream::init));
  AnySource source = make_source(c, false);
  TrainOptions opt;
  opt.reference_step_factor = c.reference_step_factor;
  opt.log_interval = c.log_interval;
  opt.log = log;
  TrainRun run{train(std::move(params), topo, c.schedule, source, opt, c.seed), {}};

  save_checkpoint(join(dir, "checkpoint.vicn"), run.result.topology.spec(), run.result.params);
  std::string trace = "phase,update,objective\n";
  for (const auto& e : run.result.trace)
    trace += std::to_string(e.phase) + "," + std::to_string(e.update) + "," + format_double(e.mean_objective) + "\n";
  write_text(join(dir, "trace.csv"), trace);
  run.summary = analyze_network(c, run.result.topology, run.result.params, dir);
  return run;
}

/// Re-emits the analysis artifacts of a saved network.
inline AnalysisSummary run_analyze(const std::string& checkpoint_path, const ExperimentConfig& c, std::string dir = {}) {
  validate(c);
  if (dir.empty()) dir = c.output_dir;
  const Checkpoint ck = load_checkpoint(checkpoint_path, c.topology);
  return analyze_network(c, build_topology(ck.topology), ck.params, dir);
}

}  // namespace vicon
