#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "vicon/common.hpp"
#include "vicon/network.hpp"
#include "vicon/parallel.hpp"
#include "vicon/topology.hpp"

namespace vicon {

/// Logistic function evaluated on the branch that cannot overflow.
inline double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// w(y) . x~(y) + b(y)
inline double activation(const NetworkParams& params, const Topology& topo, const Sample& x, std::size_t y) {
  const auto idx = topo.receptive_field().row(y);
  const auto w = params.weight(y);
  double z = params.biases[y];
  for (std::size_t i = 0; i < idx.size(); ++i) z += w[i] * x[idx[i]];
  return z;
}

/// Raw sigmoid response Q(x|y) of one neuron.
inline double raw_response(const NetworkParams& params, const Topology& topo, const Sample& x, std::size_t y) {
  if (y >= topo.size()) throw ConfigError("neuron index " + std::to_string(y) + " out of range");
  if (x.size() != topo.input_dim())
    throw ConfigError("sample has dimension " + std::to_string(x.size()) + ", topology expects " +
                      std::to_string(topo.input_dim()));
  return sigmoid(activation(params, topo, x, y));
}

/// Everything the PMD posterior computation produces for one input.
struct PosteriorState {
  std::vector<double> raw;                // Q(x|y)
  std::vector<double> raw_complement;     // 1 - Q(x|y), without cancellation
  std::vector<double> neighborhood_sums;  // sum over N(k) of Q
  std::vector<double> local;              // P_{k,j}, aligned with topology.neighborhood() entries
  std::vector<double> accumulated;        // p_y, sums to M
  std::vector<double> posterior;          // Pr(y|x) = p_y / M
  std::vector<double> leaked_posterior;   // sum_{y'} Pr(y|y') Pr(y'|x)
};

/// Localized posteriors averaged into one posterior field, then leaked.
inline PosteriorState pmd_posterior(const NetworkParams& params, const Topology& topo, const Sample& x) {
  const std::size_t m = topo.size();
  if (x.size() != topo.input_dim())
    throw ConfigError("sample has dimension " + std::to_string(x.size()) + ", topology expects " +
                      std::to_string(topo.input_dim()));
  if (!params.matches(topo)) throw ConfigError("parameters do not match the topology");

  PosteriorState s;
  s.raw.resize(m);
  s.raw_complement.resize(m);
  parallel_for(m, [&](std::size_t y) {
    const double z = activation(params, topo, x, y);
    s.raw[y] = sigmoid(z);
    s.raw_complement[y] = sigmoid(-z);
  });

  const auto& nb = topo.neighborhood();
  s.neighborhood_sums.assign(m, 0.0);
  s.local.resize(nb.entries.size());
  for (std::size_t k = 0; k < m; ++k) {
    double sum = 0.0;
    for (std::size_t j : nb.row(k)) sum += s.raw[j];
    if (!(sum > 0.0))
      throw NumericalError("degenerate response: raw responses around neuron " + std::to_string(k) +
                           " underflowed to zero");
    s.neighborhood_sums[k] = sum;
    for (std::size_t slot = nb.begin_of(k); slot < nb.offsets[k + 1]; ++slot)
      s.local[slot] = s.raw[nb.entries[slot]] / sum;
  }

  const auto& inv = topo.inverse_neighborhood();
  s.accumulated.assign(m, 0.0);
  s.posterior.resize(m);
  for (std::size_t y = 0; y < m; ++y) {
    double p = 0.0;
    for (const auto& e : inv.row(y)) p += s.local[e.slot];
    s.accumulated[y] = p;
    s.posterior[y] = p / static_cast<double>(m);
  }

  const auto& leak = topo.leakage();
  s.leaked_posterior.assign(m, 0.0);
  for (std::size_t y = 0; y < m; ++y) {
    double v = 0.0;
    for (const auto& e : topo.inverse_leakage().row(y)) v += leak.entries[e.slot].weight * s.posterior[e.source];
    s.leaked_posterior[y] = v;
  }
  return s;
}

}  // namespace vicon
