#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "vicon/common.hpp"
#include "vicon/network.hpp"
#include "vicon/parallel.hpp"
#include "vicon/posterior.hpp"
#include "vicon/topology.hpp"

namespace vicon {

/// Derivatives of the objective, laid out exactly like NetworkParams.
struct GradientSet {
  std::vector<double> d_weights;
  std::vector<double> d_biases;
  std::vector<double> d_references;

  static GradientSet zeros_like(const NetworkParams& p) {
    return {std::vector<double>(p.weights.size(), 0.0), std::vector<double>(p.biases.size(), 0.0),
            std::vector<double>(p.references.size(), 0.0)};
  }
};

/// Per-neuron error terms and their leakage / local-posterior transforms.
struct ErrorIntermediates {
  std::vector<double> errors;               // e_y
  std::vector<double> leaked_errors;        // (Le)_y
  std::vector<double> local_leaked_errors;  // (PLe)_k, one per local posterior row
  std::vector<double> back_projected;       // (P^T P L e)_y
  std::vector<double> leaked_accumulated;   // (L^T p)_y
};

/// Projected error x'(y).(x'(y) - 2 x~(y)). Differs from ||x - x'(y)||^2 by
/// ||x||^2, which is the same for every neuron.
inline std::vector<double> projected_errors(const NetworkParams& params, const Topology& topo, const Sample& x) {
  std::vector<double> e(topo.size());
  parallel_for(topo.size(), [&](std::size_t y) {
    const auto idx = topo.receptive_field().row(y);
    const auto ref = params.reference(y);
    double v = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) v += ref[i] * (ref[i] - 2.0 * x[idx[i]]);
    e[y] = v;
  });
  return e;
}

/// Builds (Le), (PLe), (P^T P L e) and (L^T p) for any per-neuron error vector.
inline ErrorIntermediates error_intermediates(const Topology& topo, const PosteriorState& post,
                                              std::vector<double> errors) {
  const std::size_t m = topo.size();
  ErrorIntermediates it;
  it.errors = std::move(errors);

  const auto& leak = topo.leakage();
  it.leaked_errors.assign(m, 0.0);
  for (std::size_t y = 0; y < m; ++y) {
    double v = 0.0;
    for (const auto& e : leak.row(y)) v += e.weight * it.errors[e.target];
    it.leaked_errors[y] = v;
  }

  const auto& nb = topo.neighborhood();
  it.local_leaked_errors.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    double v = 0.0;
    for (std::size_t slot = nb.begin_of(k); slot < nb.offsets[k + 1]; ++slot)
      v += post.local[slot] * it.leaked_errors[nb.entries[slot]];
    it.local_leaked_errors[k] = v;
  }

  it.back_projected.assign(m, 0.0);
  for (std::size_t y = 0; y < m; ++y) {
    double v = 0.0;
    for (const auto& e : topo.inverse_neighborhood().row(y)) v += post.local[e.slot] * it.local_leaked_errors[e.source];
    it.back_projected[y] = v;
  }

  it.leaked_accumulated.assign(m, 0.0);
  for (std::size_t y = 0; y < m; ++y) {
    double v = 0.0;
    for (const auto& e : topo.inverse_leakage().row(y)) v += leak.entries[e.slot].weight * post.accumulated[e.source];
    it.leaked_accumulated[y] = v;
  }
  return it;
}

/// Analytic derivatives of the single-sample objective.
inline GradientSet gradients_from(const NetworkParams& params, const Topology& topo, const Sample& x,
                                  const PosteriorState& post, const ErrorIntermediates& it) {
  const double inv_m = 1.0 / static_cast<double>(topo.size());
  GradientSet g = GradientSet::zeros_like(params);
  parallel_for(topo.size(), [&](std::size_t y) {
    const double db =
        2.0 * inv_m * (post.accumulated[y] * it.leaked_errors[y] - it.back_projected[y]) * post.raw_complement[y];
    g.d_biases[y] = db;
    const double dref = -4.0 * inv_m * it.leaked_accumulated[y];
    const auto idx = topo.receptive_field().row(y);
    const auto ref = params.reference(y);
    const std::size_t base = params.offsets[y];
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double xi = x[idx[i]];
      g.d_weights[base + i] = db * xi;
      g.d_references[base + i] = dref * (xi - ref[i]);
    }
  });
  return g;
}

/// One forward/backward pass: posterior, intermediates, gradients, objective.
struct Evaluation {
  PosteriorState posterior;
  ErrorIntermediates intermediates;
  GradientSet gradients;
  double objective = 0.0;
};

inline double squared_norm(const Sample& x) {
  double s = 0.0;
  for (double v : x.values) s += v * v;
  return s;
}

/// (2/M) sum_y (L^T p)_y ||x - x'(y)||^2, written with the projected error.
inline double objective_from(const Topology& topo, const Sample& x, const ErrorIntermediates& it) {
  const double xx = squared_norm(x);
  double d = 0.0;
  // ||x||^2 + projected error is a squared norm; clamp rounding below zero.
  for (std::size_t y = 0; y < topo.size(); ++y) d += it.leaked_accumulated[y] * std::max(0.0, xx + it.errors[y]);
  return 2.0 * d / static_cast<double>(topo.size());
}

inline Evaluation evaluate(const NetworkParams& params, const Topology& topo, const Sample& x) {
  Evaluation ev;
  ev.posterior = pmd_posterior(params, topo, x);
  ev.intermediates = error_intermediates(topo, ev.posterior, projected_errors(params, topo, x));
  ev.gradients = gradients_from(params, topo, x, ev.posterior, ev.intermediates);
  ev.objective = objective_from(topo, x, ev.intermediates);
  return ev;
}

/// Reconstruction objective D for a single input.
inline double sample_objective(const NetworkParams& params, const Topology& topo, const Sample& x) {
  const PosteriorState post = pmd_posterior(params, topo, x);
  return objective_from(topo, x, error_intermediates(topo, post, projected_errors(params, topo, x)));
}

inline GradientSet sample_gradients(const NetworkParams& params, const Topology& topo, const Sample& x) {
  return evaluate(params, topo, x).gradients;
}

/// Batch mean of the objective, accumulated in sample order.
inline double batch_objective(const NetworkParams& params, const Topology& topo, std::span<const Sample> batch) {
  if (batch.empty()) throw DataError("empty batch");
  double d = 0.0;
  for (const auto& x : batch) d += sample_objective(params, topo, x);
  return d / static_cast<double>(batch.size());
}

/// Batch mean of the gradients, accumulated in sample order.
inline GradientSet batch_gradients(const NetworkParams& params, const Topology& topo, std::span<const Sample> batch) {
  if (batch.empty()) throw DataError("empty batch");
  GradientSet acc = GradientSet::zeros_like(params);
  for (const auto& x : batch) {
    const GradientSet g = sample_gradients(params, topo, x);
    for (std::size_t i = 0; i < g.d_weights.size(); ++i) acc.d_weights[i] += g.d_weights[i];
    for (std::size_t i = 0; i < g.d_biases.size(); ++i) acc.d_biases[i] += g.d_biases[i];
    for (std::size_t i = 0; i < g.d_references.size(); ++i) acc.d_references[i] += g.d_references[i];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& v : acc.d_weights) v *= inv;
  for (double& v : acc.d_biases) v *= inv;
  for (double& v : acc.d_references) v *= inv;
  return acc;
}

}  // namespace vicon
