#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "vicon/common.hpp"
#include "vicon/topology.hpp"

namespace vicon {

/// Adaptive parameters of every neuron. `weights` and `references` share the
/// receptive-field layout of the topology: neuron y owns entries
/// [offsets[y], offsets[y+1]). Reference components outside the raw
/// receptive field are implicitly zero.
struct NetworkParams {
  std::vector<std::size_t> offsets{0};
  std::vector<double> weights;
  std::vector<double> biases;
  std::vector<double> references;

  static NetworkParams zeros(const Topology& topo) {
    NetworkParams p;
    p.offsets = topo.receptive_field().offsets;
    p.weights.assign(topo.receptive_field().entries.size(), 0.0);
    p.references.assign(p.weights.size(), 0.0);
    p.biases.assign(topo.size(), 0.0);
    return p;
  }

  std::size_t neurons() const noexcept { return biases.size(); }

  std::span<double> weight(std::size_t y) { return {weights.data() + offsets[y], offsets[y + 1] - offsets[y]}; }
  std::span<const double> weight(std::size_t y) const {
    return {weights.data() + offsets[y], offsets[y + 1] - offsets[y]};
  }
  std::span<double> reference(std::size_t y) {
    return {references.data() + offsets[y], offsets[y + 1] - offsets[y]};
  }
  std::span<const double> reference(std::size_t y) const {
    return {references.data() + offsets[y], offsets[y + 1] - offsets[y]};
  }

  bool matches(const Topology& topo) const {
    return offsets == topo.receptive_field().offsets && biases.size() == topo.size() &&
           weights.size() == topo.receptive_field().entries.size() && references.size() == weights.size();
  }

  bool all_finite() const {
    auto finite = [](const std::vector<double>& v) {
      for (double x : v)
        if (!std::isfinite(x)) return false;
      return true;
    };
    return finite(weights) && finite(biases) && finite(references);
  }

  friend bool operator==(const NetworkParams&, const NetworkParams&) = default;
};

/// Uniform symmetric noise used to break translation symmetry at start-up.
struct InitSpec {
  double weight_range = 0.1;
  double bias_value = 0.0;
  double reference_range = 0.01;

  friend bool operator==(const InitSpec&, const InitSpec&) = default;
};

inline NetworkParams init_params(const Topology& topo, const InitSpec& init, std::uint64_t seed) {
  NetworkParams p = NetworkParams::zeros(topo);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> w(-init.weight_range, init.weight_range);
  std::uniform_real_distribution<double> r(-init.reference_range, init.reference_range);
  for (double& v : p.weights) v = w(rng);
  for (double& v : p.biases) v = init.bias_value;
  for (double& v : p.references) v = r(rng);
  return p;
}

/// Gathers the components of x inside neuron y's raw receptive field.
inline void restrict_to_rf(const Topology& topo, const Sample& x, std::size_t y, std::span<double> out) {
  const auto idx = topo.receptive_field().row(y);
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = x[idx[i]];
}

inline std::vector<double> restrict_to_rf(const Topology& topo, const Sample& x, std::size_t y) {
  std::vector<double> out(topo.receptive_field().row(y).size());
  restrict_to_rf(topo, x, y, out);
  return out;
}

}  // namespace vicon
