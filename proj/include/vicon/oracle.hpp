#pragma once

// Slow, loop-literal reference implementations. Nothing here reuses the
// sparse index lists or the algebraic shortcuts of the production path
// beyond reading neighbourhood membership and leakage weights.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "vicon/common.hpp"
#include "vicon/network.hpp"
#include "vicon/objective.hpp"
#include "vicon/topology.hpp"

namespace vicon::oracle {

using Matrix = std::vector<std::vector<double>>;

/// in[k][j] == 1 iff j is in N(k).
inline Matrix dense_neighborhood(const Topology& topo) {
  const std::size_t m = topo.size();
  Matrix in(m, std::vector<double>(m, 0.0));
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t j : topo.neighborhood().row(k)) in[k][j] = 1.0;
  return in;
}

/// leak[y][t] = Pr(t | y).
inline Matrix dense_leakage(const Topology& topo) {
  const std::size_t m = topo.size();
  Matrix leak(m, std::vector<double>(m, 0.0));
  for (std::size_t y = 0; y < m; ++y)
    for (const auto& e : topo.leakage().row(y)) leak[y][e.target] = e.weight;
  return leak;
}

/// Per-neuron vector expanded to the full input dimension, zero outside the
/// raw receptive field.
inline Matrix expand(const Topology& topo, const NetworkParams& params, bool references) {
  Matrix out(topo.size(), std::vector<double>(topo.input_dim(), 0.0));
  for (std::size_t y = 0; y < topo.size(); ++y) {
    const auto idx = topo.receptive_field().row(y);
    const auto v = references ? params.reference(y) : params.weight(y);
    for (std::size_t i = 0; i < idx.size(); ++i) out[y][idx[i]] = v[i];
  }
  return out;
}

inline std::vector<double> naive_raw(const NetworkParams& params, const Topology& topo, const Sample& x) {
  const Matrix w = expand(topo, params, false);
  std::vector<double> q(topo.size());
  for (std::size_t y = 0; y < topo.size(); ++y) {
    double z = params.biases[y];
    for (std::size_t i = 0; i < x.size(); ++i) z += w[y][i] * x[i];
    q[y] = 1.0 / (1.0 + std::exp(-z));
  }
  return q;
}

/// Pr(y|x) as the average of localized posteriors, from raw responses.
inline std::vector<double> naive_posterior(const Matrix& in, const std::vector<double>& q) {
  const std::size_t m = q.size();
  std::vector<double> post(m, 0.0);
  for (std::size_t y = 0; y < m; ++y) {
    double inhibition = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (in[k][y] == 0.0) continue;  // k must be in N^-1(y)
      double denom = 0.0;
      for (std::size_t j = 0; j < m; ++j) denom += in[k][j] * q[j];
      inhibition += 1.0 / denom;
    }
    post[y] = q[y] * inhibition / static_cast<double>(m);
  }
  return post;
}

/// ||x - x'(y)||^2 with out-of-field reference components held at zero.
inline std::vector<double> full_errors(const NetworkParams& params, const Topology& topo, const Sample& x) {
  const Matrix ref = expand(topo, params, true);
  std::vector<double> e(topo.size(), 0.0);
  for (std::size_t y = 0; y < topo.size(); ++y)
    for (std::size_t i = 0; i < x.size(); ++i) e[y] += (x[i] - ref[y][i]) * (x[i] - ref[y][i]);
  return e;
}

/// D = (2/M) sum_y sum_y' Pr(y|y') Q(y') sum_{y'' in N^-1(y')} 1 / sum_{y''' in N(y'')} Q(y''') ||x - x'(y)||^2
inline double naive_objective(const NetworkParams& params, const Topology& topo, const Sample& x) {
  const std::size_t m = topo.size();
  const Matrix in = dense_neighborhood(topo);
  const Matrix leak = dense_leakage(topo);
  const std::vector<double> q = naive_raw(params, topo, x);
  const std::vector<double> e = full_errors(params, topo, x);
  double d = 0.0;
  for (std::size_t y = 0; y < m; ++y)
    for (std::size_t y1 = 0; y1 < m; ++y1) {
      if (leak[y1][y] == 0.0) continue;
      double inhibition = 0.0;
      for (std::size_t y2 = 0; y2 < m; ++y2) {
        if (in[y2][y1] == 0.0) continue;
        double denom = 0.0;
        for (std::size_t y3 = 0; y3 < m; ++y3)
          if (in[y2][y3] != 0.0) denom += q[y3];
        inhibition += 1.0 / denom;
      }
      d += leak[y1][y] * q[y1] * inhibition * e[y];
    }
  return 2.0 * d / static_cast<double>(m);
}

/// Central differences of naive_objective for every parameter component.
inline GradientSet fd_gradients(const NetworkParams& params, const Topology& topo, const Sample& x, double step) {
  if (!(step > 0.0)) throw ConfigError("finite-difference step must be positive");
  NetworkParams p = params;
  GradientSet g = GradientSet::zeros_like(params);
  auto diff = [&](std::vector<double>& field, std::vector<double>& out) {
    for (std::size_t i = 0; i < field.size(); ++i) {
      const double saved = field[i];
      field[i] = saved + step;
      const double up = naive_objective(p, topo, x);
      field[i] = saved - step;
      const double down = naive_objective(p, topo, x);
      field[i] = saved;
      out[i] = (up - down) / (2.0 * step);
    }
  };
  diff(p.weights, g.d_weights);
  diff(p.biases, g.d_biases);
  diff(p.references, g.d_references);
  return g;
}

/// Full-network objective versus its featureless-input reduction: for inputs
/// that are constant within each retina, and references constant within
/// each retina's part of every receptive field, D splits into
///   outside = 2 sum_k (d_k - w_k) x_k^2
///   inside  = 2 sum_k w_k sum_y Pr~(y|x) (x_k - x'_k(y))^2
/// where d_k is the retina size, w_k the per-neuron field size on retina k,
/// and Pr~ the leaked PMD posterior of a low-dimensional quantiser whose
/// raw response is sigmoid(sum_k a_k(y) x_k + b(y)), a_k(y) being the total
/// weight on retina k. `quantizer` is the soft-quantiser objective with
/// inside = quantizer_scale * quantizer: one retina gives the scalar
/// quantiser 2 sum_y Pr~ (x - x'(y))^2 scaled by w; two retinae give
/// sum_y Pr~ ((x_1 - x'_1)^2 + (x_2 - x'_2)^2) scaled by w = w_1 + w_2.
/// All terms are means over the brightness samples.
struct SubspaceReport {
  double full = 0.0;
  double reduced = 0.0;
  double outside = 0.0;
  double inside = 0.0;
  double quantizer = 0.0;
  double quantizer_scale = 0.0;
  double moment = 0.0;  // mean of sum_k x_k^2
  std::size_t input_dim = 0;
  std::size_t field_size = 0;  // w
  double difference() const { return std::abs(full - reduced); }
};

inline SubspaceReport subspace_reduction_check(const Topology& topo, const NetworkParams& params,
                                               std::span<const std::array<double, 2>> brightness) {
  const std::size_t nret = topo.spec().num_retinae;
  const std::size_t m = topo.size();
  const std::size_t pixels = topo.retina_pixels();
  if (brightness.empty()) throw DataError("no brightness samples");
  if (!params.matches(topo)) throw ConfigError("parameters do not match the topology");

  // Per-neuron, per-retina field size, summed weight and (constant) reference.
  std::vector<std::array<std::size_t, 2>> count(m, {0, 0});
  std::vector<std::array<double, 2>> gain(m, {0.0, 0.0});
  std::vector<std::array<double, 2>> level(m, {0.0, 0.0});
  for (std::size_t y = 0; y < m; ++y) {
    const auto idx = topo.receptive_field().row(y);
    const auto w = params.weight(y);
    const auto r = params.reference(y);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const std::size_t k = topo.retina_of_input(idx[i]);
      if (count[y][k] == 0) {
        level[y][k] = r[i];
      } else if (r[i] != level[y][k]) {
        throw ConfigError("reference of neuron " + std::to_string(y) + " is not constant on retina " +
                          std::to_string(k));
      }
      ++count[y][k];
      gain[y][k] += w[i];
    }
  }
  for (std::size_t y = 1; y < m; ++y)
    if (count[y] != count[0]) throw ConfigError("receptive fields differ in size; use a wrapped topology");

  const Matrix in = dense_neighborhood(topo);
  const Matrix leak = dense_leakage(topo);
  SubspaceReport rep;
  rep.input_dim = topo.input_dim();
  rep.field_size = count[0][0] + count[0][1];
  rep.quantizer_scale = static_cast<double>(rep.field_size);

  for (const auto& b : brightness) {
    Sample x(topo.input_dim());
    for (std::size_t k = 0; k < nret; ++k)
      for (std::size_t i = 0; i < pixels; ++i) x[k * pixels + i] = b[k];
    rep.full += sample_objective(params, topo, x);

    std::vector<double> q(m);
    for (std::size_t y = 0; y < m; ++y) {
      double z = params.biases[y];
      for (std::size_t k = 0; k < nret; ++k) z += gain[y][k] * b[k];
      q[y] = 1.0 / (1.0 + std::exp(-z));
    }
    const std::vector<double> post = naive_posterior(in, q);
    std::vector<double> leaked(m, 0.0);
    for (std::size_t y = 0; y < m; ++y)
      for (std::size_t y1 = 0; y1 < m; ++y1) leaked[y] += leak[y1][y] * post[y1];

    double moment = 0.0, outside = 0.0, inside = 0.0, quant = 0.0;
    for (std::size_t k = 0; k < nret; ++k) {
      moment += b[k] * b[k];
      outside += 2.0 * static_cast<double>(pixels - count[0][k]) * b[k] * b[k];
    }
    for (std::size_t y = 0; y < m; ++y)
      for (std::size_t k = 0; k < nret; ++k) {
        const double err = (b[k] - level[y][k]) * (b[k] - level[y][k]);
        inside += 2.0 * static_cast<double>(count[0][k]) * leaked[y] * err;
        quant += (nret == 1 ? 2.0 : 1.0) * leaked[y] * err;
      }
    rep.moment += moment;
    rep.outside += outside;
    rep.inside += inside;
    rep.quantizer += quant;
  }
  const double n = static_cast<double>(brightness.size());
  rep.full /= n;
  rep.outside /= n;
  rep.inside /= n;
  rep.quantizer /= n;
  rep.moment /= n;
  rep.reduced = rep.outside + rep.inside;
  return rep;
}

/// Same check on full samples, which must be constant within each retina.
inline SubspaceReport subspace_reduction_check(const Topology& topo, const NetworkParams& params,
                                               std::span<const Sample> samples) {
  const std::size_t pixels = topo.retina_pixels();
  std::vector<std::array<double, 2>> brightness;
  for (const auto& x : samples) {
    if (x.size() != topo.input_dim()) throw DataError("sample dimension does not match the topology");
    std::array<double, 2> b{0.0, 0.0};
    for (std::size_t k = 0; k < topo.spec().num_retinae; ++k) {
      b[k] = x[k * pixels];
      for (std::size_t i = 1; i < pixels; ++i)
        if (x[k * pixels + i] != b[k]) throw DataError("input is not featureless on retina " + std::to_string(k));
    }
    brightness.push_back(b);
  }
  return subspace_reduction_check(topo, params, std::span<const std::array<double, 2>>(brightness));
}

struct CancellationReport {
  bool passed = false;
  double max_deviation = 0.0;
  double tolerance = 0.0;
};

/// p_y (Le)_y - (P^T P L e)_y must not change when every e_y is shifted by c.
inline CancellationReport constant_cancellation_check(const NetworkParams& params, const Topology& topo,
                                                      const Sample& x, double c) {
  const PosteriorState post = pmd_posterior(params, topo, x);
  std::vector<double> e = projected_errors(params, topo, x);
  std::vector<double> shifted = e;
  for (double& v : shifted) v += c;
  const ErrorIntermediates a = error_intermediates(topo, post, std::move(e));
  const ErrorIntermediates b = error_intermediates(topo, post, std::move(shifted));
  CancellationReport rep;
  rep.tolerance = 1e-10 * std::max(1.0, std::abs(c));
  for (std::size_t y = 0; y < topo.size(); ++y) {
    const double u = post.accumulated[y] * a.leaked_errors[y] - a.back_projected[y];
    const double v = post.accumulated[y] * b.leaked_errors[y] - b.back_projected[y];
    rep.max_deviation = std::max(rep.max_deviation, std::abs(u - v));
  }
  rep.passed = rep.max_deviation <= rep.tolerance;
  return rep;
}

/// A small random network and input for property-style checks.
struct Instance {
  Topology topology;
  NetworkParams params;
  Sample input;
};

struct InstanceOptions {
  std::size_t min_neurons = 8;
  std::size_t max_neurons = 16;
  bool allow_2d = true;
  double weight_scale = 1.0;
  double bias_scale = 1.0;
  double reference_scale = 0.5;
  double input_scale = 0.5;
};

inline Instance random_instance(std::mt19937_64& rng, const InstanceOptions& opt = {}) {
  auto pick = [&rng](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  TopologySpec s;
  s.num_retinae = pick(1, 2);
  s.boundary = pick(0, 1) ? Boundary::wrap : Boundary::truncate;
  const bool two_d = opt.allow_2d && pick(0, 1) == 1;
  auto odd_window = [&](std::size_t dim) {
    std::size_t w = pick(0, 1) ? 5 : 3;
    while (w > dim) w -= 2;
    return w;
  };
  if (two_d) {
    std::size_t rows = 0, cols = 0;
    do {
      rows = pick(3, 4);
      cols = pick(3, 5);
    } while (rows * cols < opt.min_neurons || rows * cols > opt.max_neurons);
    s.grid = {rows, cols};
    s.retina = {rows + 2 * pick(0, 1), cols};
    s.rf = {3, 3};
    s.inhibition = {odd_window(rows), odd_window(cols)};
    s.leakage = {odd_window(rows), odd_window(cols)};
  } else {
    const std::size_t m = pick(opt.min_neurons, opt.max_neurons);
    s.grid = {1, m};
    s.retina = {1, m + 2 * pick(0, 2)};
    s.rf = {1, 3};
    s.inhibition = {1, odd_window(m)};
    s.leakage = {1, odd_window(m)};
  }
  std::uniform_real_distribution<double> sig(0.5, 1.5);
  s.leakage_sigma = {sig(rng), sig(rng)};

  Instance inst{build_topology(s), {}, {}};
  inst.params = NetworkParams::zeros(inst.topology);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : inst.params.weights) v = opt.weight_scale * u(rng);
  for (double& v : inst.params.biases) v = opt.bias_scale * u(rng);
  for (double& v : inst.params.references) v = opt.reference_scale * u(rng);
  inst.input = Sample(inst.topology.input_dim());
  for (double& v : inst.input.values) v = opt.input_scale * u(rng);
  return inst;
}

}  // namespace vicon::oracle
