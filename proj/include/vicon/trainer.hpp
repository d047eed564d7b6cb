#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vicon/common.hpp"
#include "vicon/network.hpp"
#include "vicon/objective.hpp"
#include "vicon/topology.hpp"

namespace vicon {

/// Rates of the three parameter classes. They are recomputed on every update
/// so the largest per-neuron change equals the requested step size.
struct TrainerState {
  double rate_w = 1.0;
  double rate_b = 1.0;
  double rate_x = 1.0;
  double step_size = 0.01;
  std::uint64_t updates_done = 0;
  std::uint64_t rng_seed = 0;
};

struct Phase {
  std::size_t num_updates = 0;
  double step_size = 0.01;
  std::array<double, 2> leakage_sigma{1.0, 1.0};

  friend bool operator==(const Phase&, const Phase&) = default;
};

struct Schedule {
  std::vector<Phase> phases;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

struct TrainOptions {
  double reference_step_factor = 3.0;  // references move 3x the step size
  std::size_t log_interval = 100;
  std::ostream* log = nullptr;
};

/// What one update did: objective before the step, and realized max changes.
struct StepReport {
  double objective = 0.0;
  double max_weight_change = 0.0;
  double max_bias_change = 0.0;
  double max_reference_change = 0.0;
};

namespace detail {

inline double max_block_norm(const std::vector<double>& v, const std::vector<std::size_t>& offsets) {
  double best = 0.0;
  for (std::size_t y = 0; y + 1 < offsets.size(); ++y) {
    double s = 0.0;
    for (std::size_t i = offsets[y]; i < offsets[y + 1]; ++i) s += v[i] * v[i];
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

inline double max_abs(const std::vector<double>& v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

}  // namespace detail

/// Rate that turns the largest gradient norm into a change of exactly `step`.
inline double rescaled_rate(double step, double largest_norm) { return step / largest_norm; }

/// One on-line update on sample x. A parameter class whose gradient is
/// identically zero is left untouched and keeps its previous rate.
inline StepReport train_step(NetworkParams& params, const Topology& topo, TrainerState& state, const Sample& x,
                             double reference_step_factor = 3.0) {
  const Evaluation ev = evaluate(params, topo, x);
  const GradientSet& g = ev.gradients;
  StepReport report;
  report.objective = ev.objective;

  const double eps = state.step_size;
  const double gw = detail::max_block_norm(g.d_weights, params.offsets);
  const double gb = detail::max_abs(g.d_biases);
  const double gx = detail::max_block_norm(g.d_references, params.offsets);

  if (gw > 0.0) {
    state.rate_w = rescaled_rate(eps, gw);
    for (std::size_t i = 0; i < params.weights.size(); ++i) params.weights[i] -= state.rate_w * g.d_weights[i];
    report.max_weight_change = state.rate_w * gw;
  }
  if (gb > 0.0) {
    state.rate_b = rescaled_rate(eps, gb);
    for (std::size_t i = 0; i < params.biases.size(); ++i) params.biases[i] -= state.rate_b * g.d_biases[i];
    report.max_bias_change = state.rate_b * gb;
  }
  if (gx > 0.0) {
    state.rate_x = rescaled_rate(reference_step_factor * eps, gx);
    for (std::size_t i = 0; i < params.references.size(); ++i)
      params.references[i] -= state.rate_x * g.d_references[i];
    report.max_reference_change = state.rate_x * gx;
  }
  ++state.updates_done;
  if (!params.all_finite())
    throw NumericalError("non-finite parameter after update " + std::to_string(state.updates_done));
  return report;
}

/// Anything that can hand out training samples; nullopt means exhausted.
template <typename S>
concept SampleSource = requires(S& s) {
  { s.next() } -> std::convertible_to<std::optional<Sample>>;
};

struct TraceEntry {
  std::size_t phase = 0;
  std::uint64_t update = 0;      // global update count at the end of the window
  double mean_objective = 0.0;   // mean single-sample objective over the window
};

struct TrainResult {
  NetworkParams params;
  Topology topology;  // carries the last phase's leakage kernel
  TrainerState state;
  std::vector<TraceEntry> trace;
};

/// Runs the schedule with one freshly drawn sample per update. The leakage
/// kernel is rebuilt at the start of every phase.
template <SampleSource Source>
TrainResult train(NetworkParams params, const Topology& topo, const Schedule& schedule, Source& source,
                  const TrainOptions& options = {}, std::uint64_t seed = 0) {
  for (const auto& ph : schedule.phases)
    if (ph.num_updates == 0) throw ConfigError("every phase needs at least one update");
  if (!params.matches(topo)) throw ConfigError("parameters do not match the topology");

  TrainResult result{std::move(params), topo, TrainerState{}, {}};
  result.state.rng_seed = seed;
  const std::size_t window = std::max<std::size_t>(1, options.log_interval);

  for (std::size_t pi = 0; pi < schedule.phases.size(); ++pi) {
    const Phase& ph = schedule.phases[pi];
    if (result.topology.spec().leakage_sigma != ph.leakage_sigma)
      result.topology = result.topology.with_leakage_sigma(ph.leakage_sigma);
    result.state.step_size = ph.step_size;

    double acc = 0.0;
    std::size_t in_window = 0;
    for (std::size_t u = 0; u < ph.num_updates; ++u) {
      std::optional<Sample> x = source.next();
      if (!x) throw DataError("data source exhausted after " + std::to_string(result.state.updates_done) + " updates");
      acc += train_step(result.params, result.topology, result.state, *x, options.reference_step_factor).objective;
      ++in_window;
      if (in_window == window || u + 1 == ph.num_updates) {
        result.trace.push_back({pi, result.state.updates_done, acc / static_cast<double>(in_window)});
        if (options.log)
          *options.log << "phase " << pi << " update " << result.state.updates_done << " objective "
                       << result.trace.back().mean_objective << '\n';
        acc = 0.0;
        in_window = 0;
      }
    }
  }
  return result;
}

}  // namespace vicon
