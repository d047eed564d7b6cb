#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vicon/objective.hpp"
#include "vicon/oracle.hpp"
#include "vicon/posterior.hpp"

namespace vicon {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst = 0.0;      // largest observed deviation
  double tolerance = 0.0;  // bound it was held to
  std::string detail;      // where the worst deviation occurred
};

struct VerifyOptions {
  std::uint64_t seed = 20240917;
  /// Added to the analytic d_bias[0] before comparison; a negative control.
  double gradient_perturbation = 0.0;
  std::size_t gradient_instances = 20;
  std::size_t normalization_instances = 100;
  std::size_t equivalence_instances = 50;
  std::size_t cancellation_trials = 100;
  double fd_step = 1e-5;
};

namespace detail {

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3});
}

/// Largest relative deviation between two gradient sets, with its location.
inline double compare_gradients(const GradientSet& a, const GradientSet& b, bool relative, std::string& where) {
  double worst = -1.0;
  auto scan = [&](const std::vector<double>& u, const std::vector<double>& v, const char* name) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double d = relative ? relative_error(u[i], v[i]) : std::abs(u[i] - v[i]);
      if (d > worst) {
        worst = d;
        where = std::string(name) + "[" + std::to_string(i) + "]";
      }
    }
  };
  scan(a.d_weights, b.d_weights, "d_weight");
  scan(a.d_biases, b.d_biases, "d_bias");
  scan(a.d_references, b.d_references, "d_reference");
  return std::max(worst, 0.0);
}

inline CheckResult finish(CheckResult r) {
  r.passed = r.worst <= r.tolerance;
  return r;
}

}  // namespace detail

/// Analytic gradients against central differences of the loop-literal objective.
inline CheckResult check_gradients(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  CheckResult r{"gradient vs finite differences", false, 0.0, 1e-5, ""};
  for (std::size_t n = 0; n < opt.gradient_instances; ++n) {
    const auto inst = oracle::random_instance(rng);
    GradientSet analytic = sample_gradients(inst.params, inst.topology, inst.input);
    analytic.d_biases[0] += opt.gradient_perturbation;
    const GradientSet fd = oracle::fd_gradients(inst.params, inst.topology, inst.input, opt.fd_step);
    std::string where;
    const double err = detail::compare_gradients(analytic, fd, true, where);
    if (err > r.worst || n == 0) {
      r.worst = err;
      r.detail = where + " of instance " + std::to_string(n);
    }
  }
  return detail::finish(r);
}

/// Both posteriors sum to one.
inline CheckResult check_normalization(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed + 1);
  CheckResult r{"posterior normalization", false, 0.0, 1e-12, ""};
  for (std::size_t n = 0; n < opt.normalization_instances; ++n) {
    const auto inst = oracle::random_instance(rng);
    const PosteriorState s = pmd_posterior(inst.params, inst.topology, inst.input);
    double a = 0.0, b = 0.0;
    for (double v : s.posterior) a += v;
    for (double v : s.leaked_posterior) b += v;
    const double dev = std::max(std::abs(a - 1.0), std::abs(b - 1.0));
    if (dev > r.worst) {
      r.worst = dev;
      r.detail = "instance " + std::to_string(n);
    }
  }
  return detail::finish(r);
}

/// Sparse objective against the loop-literal one.
inline CheckResult check_equivalence(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed + 2);
  oracle::InstanceOptions io;
  io.max_neurons = 12;
  CheckResult r{"objective vs loop-literal", false, 0.0, 1e-12, ""};
  for (std::size_t n = 0; n < opt.equivalence_instances; ++n) {
    const auto inst = oracle::random_instance(rng, io);
    const double dev = std::abs(sample_objective(inst.params, inst.topology, inst.input) -
                                oracle::naive_objective(inst.params, inst.topology, inst.input));
    if (dev > r.worst) {
      r.worst = dev;
      r.detail = "instance " + std::to_string(n);
    }
  }
  return detail::finish(r);
}

/// Gradients from projected errors x'.(x' - 2x) against gradients from full
/// squared errors.
inline CheckResult check_projection(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed + 3);
  CheckResult r{"projected vs full errors", false, 0.0, 1e-10, ""};
  for (std::size_t n = 0; n < opt.equivalence_instances; ++n) {
    const auto inst = oracle::random_instance(rng);
    const auto& [topo, params, x] = inst;
    const PosteriorState post = pmd_posterior(params, topo, x);
    const GradientSet a = gradients_from(params, topo, x, post, error_intermediates(topo, post, projected_errors(params, topo, x)));
    const GradientSet b = gradients_from(params, topo, x, post, error_intermediates(topo, post, oracle::full_errors(params, topo, x)));
    std::string where;
    const double dev = detail::compare_gradients(a, b, false, where);
    if (dev > r.worst) {
      r.worst = dev;
      r.detail = where + " of instance " + std::to_string(n);
    }
  }
  return detail::finish(r);
}

/// Random parameters whose references are constant on each retina's part of
/// every receptive field.
inline NetworkParams featureless_params(const Topology& topo, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NetworkParams p = NetworkParams::zeros(topo);
  for (double& v : p.weights) v = u(rng);
  for (double& v : p.biases) v = u(rng);
  for (std::size_t y = 0; y < topo.size(); ++y) {
    const std::array<double, 2> level{0.5 * u(rng), 0.5 * u(rng)};
    const auto idx = topo.receptive_field().row(y);
    auto ref = p.reference(y);
    for (std::size_t i = 0; i < idx.size(); ++i) ref[i] = level[topo.retina_of_input(idx[i])];
  }
  return p;
}

inline std::vector<std::array<double, 2>> brightness_samples(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<std::array<double, 2>> out(n);
  for (auto& b : out) b = {u(rng), u(rng)};
  return out;
}

/// Featureless-input reduction in one-subspace (single retina, field = whole
/// retina, inhibition over the whole grid) and two-subspace (two retinae,
/// narrower field) settings, in 1-D and 2-D.
inline CheckResult check_subspace_reduction(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed + 4);
  CheckResult r{"featureless subspace reduction", false, 0.0, 1e-10, ""};
  struct Case {
    const char* name;
    TopologySpec spec;
  };
  std::vector<Case> cases;
  {
    TopologySpec s;
    s.grid = {1, 9};
    s.retina = {1, 9};
    s.num_retinae = 1;
    s.rf = {1, 9};
    s.inhibition = {1, 9};
    s.leakage = {1, 3};
    s.boundary = Boundary::wrap;
    cases.push_back({"one subspace 1-D", s});
    s.grid = {3, 3};
    s.retina = {3, 3};
    s.rf = {3, 3};
    s.inhibition = {3, 3};
    s.leakage = {3, 3};
    cases.push_back({"one subspace 2-D", s});
  }
  {
    TopologySpec s;
    s.grid = {1, 12};
    s.retina = {1, 12};
    s.num_retinae = 2;
    s.rf = {1, 5};
    s.inhibition = {1, 5};
    s.leakage = {1, 3};
    s.boundary = Boundary::wrap;
    cases.push_back({"two subspaces 1-D", s});
    s.grid = {5, 5};
    s.retina = {5, 5};
    s.rf = {3, 3};
    s.inhibition = {3, 3};
    s.leakage = {3, 3};
    cases.push_back({"two subspaces 2-D", s});
  }
  for (const auto& c : cases) {
    const Topology topo = build_topology(c.spec);
    const NetworkParams params = featureless_params(topo, rng);
    const auto samples = brightness_samples(16, rng);
    const auto rep = oracle::subspace_reduction_check(topo, params, std::span<const std::array<double, 2>>(samples));
    double dev = rep.difference();
    // With the field covering the whole input there must be no outside term,
    // and the total is the field size times the soft-quantiser objective.
    if (rep.field_size == rep.input_dim) {
      if (rep.outside != 0.0) dev = std::max(dev, std::abs(rep.outside));
      dev = std::max(dev, std::abs(rep.full - rep.quantizer_scale * rep.quantizer));
    }
    if (dev > r.worst || r.detail.empty()) {
      r.worst = std::max(r.worst, dev);
      r.detail = c.name;
    }
  }
  return detail::finish(r);
}

/// Shifting every squared error by a constant leaves the bias gradient
/// factor unchanged.
inline CheckResult check_cancellation(const VerifyOptions& opt) {
  std::mt19937_64 rng(opt.seed + 5);
  std::uniform_real_distribution<double> expo(-3.0, 6.0);
  std::bernoulli_distribution sign(0.5);
  CheckResult r{"constant error cancellation", false, 0.0, 1.0, ""};
  double worst_ratio = 0.0;
  for (std::size_t n = 0; n < opt.cancellation_trials; ++n) {
    const auto inst = oracle::random_instance(rng);
    const double c = (sign(rng) ? -1.0 : 1.0) * std::pow(10.0, expo(rng));
    const auto rep = oracle::constant_cancellation_check(inst.params, inst.topology, inst.input, c);
    const double ratio = rep.max_deviation / rep.tolerance;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      std::ostringstream d;
      d << "trial " << n << " (c = " << c << ")";
      r.detail = d.str();
    }
  }
  // Reported as deviation over its c-scaled bound.
  r.worst = worst_ratio;
  return detail::finish(r);
}

inline std::vector<CheckResult> run_verify(const VerifyOptions& opt = {}) {
  return {check_gradients(opt), check_normalization(opt), check_equivalence(opt),
          check_projection(opt), check_subspace_reduction(opt), check_cancellation(opt)};
}

inline void print_report(const std::vector<CheckResult>& results, std::ostream& out) {
  out << std::left << std::setw(34) << "check" << std::setw(6) << "ok" << std::setw(13) << "worst"
      << std::setw(13) << "bound" << "at\n";
  for (const auto& r : results) {
    std::ostringstream worst, bound;
    worst << std::scientific << std::setprecision(3) << r.worst;
    bound << std::scientific << std::setprecision(3) << r.tolerance;
    out << std::setw(34) << r.name << std::setw(6) << (r.passed ? "PASS" : "FAIL") << std::setw(13) << worst.str()
        << std::setw(13) << bound.str() << r.detail << '\n';
  }
}

inline bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

}  // namespace vicon
