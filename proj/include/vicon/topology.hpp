#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vicon/common.hpp"

namespace vicon {

/// How centered windows behave at grid and retina borders.
enum class Boundary { truncate, wrap };

inline std::string to_string(Boundary b) { return b == Boundary::wrap ? "wrap" : "truncate"; }

/// Geometry of a network before the index lists are materialized.
struct TopologySpec {
  Extent grid{1, 30};
  Extent retina{1, 30};
  std::size_t num_retinae = 2;
  Extent rf{1, 9};
  Extent inhibition{1, 5};
  Extent leakage{1, 5};
  std::array<double, 2> leakage_sigma{1.0, 1.0};  // rows, cols
  Boundary boundary = Boundary::truncate;

  friend bool operator==(const TopologySpec&, const TopologySpec&) = default;

  /// Same geometry apart from the leakage profile width.
  bool same_shape(const TopologySpec& o) const {
    return grid == o.grid && retina == o.retina && num_retinae == o.num_retinae && rf == o.rf &&
           inhibition == o.inhibition && leakage == o.leakage && boundary == o.boundary;
  }
};

/// Compressed row storage: row i is entries[offsets[i], offsets[i+1]).
template <typename T>
struct Csr {
  std::vector<std::size_t> offsets{0};
  std::vector<T> entries;

  std::size_t rows() const noexcept { return offsets.size() - 1; }
  std::span<const T> row(std::size_t i) const {
    return {entries.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
  std::size_t begin_of(std::size_t i) const noexcept { return offsets[i]; }
  void close_row() { offsets.push_back(entries.size()); }
};

struct LeakageEntry {
  std::size_t target;
  double weight;  // L_{y,target} = Pr(target | y)
};

/// Back-reference from a column of a forward Csr to the row that holds it.
/// `slot` indexes the forward Csr's entries, so values stored alongside it
/// (local posteriors, leakage weights) can be read directly.
struct InverseEntry {
  std::size_t source;
  std::size_t slot;
};

class Topology;
Topology build_topology(const TopologySpec& spec);

/// Materialized network geometry: neighbourhoods N(y) and their inverses,
/// the row-stochastic leakage kernel, and per-neuron receptive-field index
/// lists. Neurons are numbered row-major over the grid.
class Topology {
 public:
  const TopologySpec& spec() const noexcept { return spec_; }
  std::size_t size() const noexcept { return spec_.grid.size(); }
  std::size_t retina_pixels() const noexcept { return spec_.retina.size(); }
  std::size_t input_dim() const noexcept { return spec_.num_retinae * spec_.retina.size(); }

  const Csr<std::size_t>& neighborhood() const noexcept { return neighborhood_; }
  const Csr<InverseEntry>& inverse_neighborhood() const noexcept { return inverse_neighborhood_; }
  const Csr<LeakageEntry>& leakage() const noexcept { return leakage_; }
  const Csr<InverseEntry>& inverse_leakage() const noexcept { return inverse_leakage_; }
  /// Input indices (into Sample::values) seen by each neuron: retina 0
  /// window pixels row-major, then retina 1.
  const Csr<std::size_t>& receptive_field() const noexcept { return receptive_field_; }

  std::size_t retina_of_input(std::size_t input_index) const noexcept {
    return input_index / retina_pixels();
  }

  /// Retina pixel (row, col) on which neuron y's receptive field is centered.
  std::array<long, 2> retina_center(std::size_t y) const noexcept {
    const Extent& g = spec_.grid;
    const Extent& r = spec_.retina;
    return {static_cast<long>(((2 * (y / g.cols) + 1) * r.rows) / (2 * g.rows)),
            static_cast<long>(((2 * (y % g.cols) + 1) * r.cols) / (2 * g.cols))};
  }

  /// Position of a receptive-field input inside neuron y's window, with the
  /// window's top-left corner at (0, 0).
  std::array<std::size_t, 2> window_position(std::size_t y, std::size_t input_index) const noexcept {
    const std::size_t pixel = input_index % retina_pixels();
    const auto center = retina_center(y);
    long dr = static_cast<long>(pixel / spec_.retina.cols) - center[0];
    long dc = static_cast<long>(pixel % spec_.retina.cols) - center[1];
    const long hr = static_cast<long>(spec_.rf.rows / 2), hc = static_cast<long>(spec_.rf.cols / 2);
    const long rr = static_cast<long>(spec_.retina.rows), rc = static_cast<long>(spec_.retina.cols);
    if (dr > hr) dr -= rr;
    if (dr < -hr) dr += rr;
    if (dc > hc) dc -= rc;
    if (dc < -hc) dc += rc;
    return {static_cast<std::size_t>(dr + hr), static_cast<std::size_t>(dc + hc)};
  }

  /// Same geometry with the leakage kernel rebuilt for a new profile width.
  Topology with_leakage_sigma(std::array<double, 2> sigma) const {
    TopologySpec s = spec_;
    s.leakage_sigma = sigma;
    return build_topology(s);
  }

 private:
  friend Topology build_topology(const TopologySpec& spec);

  TopologySpec spec_;
  Csr<std::size_t> neighborhood_;
  Csr<InverseEntry> inverse_neighborhood_;
  Csr<LeakageEntry> leakage_;
  Csr<InverseEntry> inverse_leakage_;
  Csr<std::size_t> receptive_field_;
};

namespace detail {

inline void check_window(const Extent& window, const Extent& domain, const char* what,
                         const char* domain_name) {
  if (window.rows == 0 || window.cols == 0)
    throw ConfigError(std::string(what) + " window must be positive");
  if (window.rows % 2 == 0 || window.cols % 2 == 0)
    throw ConfigError(std::string(what) + " window " + window.str() + " has no center (even size)");
  if (window.rows > domain.rows || window.cols > domain.cols)
    throw ConfigError(std::string(what) + " window " + window.str() + " is larger than the " +
                      domain_name + " " + domain.str());
}

/// Offsets of a centered window, row-major.
inline std::vector<std::array<long, 2>> window_offsets(const Extent& window) {
  std::vector<std::array<long, 2>> out;
  const long hr = static_cast<long>(window.rows / 2);
  const long hc = static_cast<long>(window.cols / 2);
  for (long dr = -hr; dr <= hr; ++dr)
    for (long dc = -hc; dc <= hc; ++dc) out.push_back({dr, dc});
  return out;
}

/// Resolves (center + offset) in a domain; returns false when truncated away.
inline bool resolve(long r, long c, const Extent& domain, Boundary boundary, std::size_t& flat) {
  const long rows = static_cast<long>(domain.rows);
  const long cols = static_cast<long>(domain.cols);
  if (boundary == Boundary::wrap) {
    r = ((r % rows) + rows) % rows;
    c = ((c % cols) + cols) % cols;
  } else if (r < 0 || r >= rows || c < 0 || c >= cols) {
    return false;
  }
  flat = static_cast<std::size_t>(r * cols + c);
  return true;
}

template <typename T, typename Key>
Csr<InverseEntry> invert(const Csr<T>& forward, std::size_t n, Key key) {
  std::vector<std::size_t> counts(n, 0);
  for (const auto& e : forward.entries) ++counts[key(e)];
  Csr<InverseEntry> inv;
  inv.offsets.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) inv.offsets[i + 1] = inv.offsets[i] + counts[i];
  inv.entries.resize(forward.entries.size());
  std::vector<std::size_t> fill(inv.offsets.begin(), inv.offsets.end() - 1);
  for (std::size_t src = 0; src < forward.rows(); ++src)
    for (std::size_t s = forward.offsets[src]; s < forward.offsets[src + 1]; ++s)
      inv.entries[fill[key(forward.entries[s])]++] = {src, s};
  return inv;
}

}  // namespace detail

/// Validates the geometry and materializes every index list. Windows must be
/// odd (centered) and no larger than the grid or retina they live on.
inline Topology build_topology(const TopologySpec& spec) {
  using detail::check_window;
  if (spec.grid.size() == 0) throw ConfigError("grid shape must be positive");
  if (spec.retina.size() == 0) throw ConfigError("retina shape must be positive");
  if (spec.num_retinae != 1 && spec.num_retinae != 2)
    throw ConfigError("num_retinae must be 1 or 2, got " + std::to_string(spec.num_retinae));
  if (spec.grid.is_1d() != spec.retina.is_1d())
    throw ConfigError("grid " + spec.grid.str() + " and retina " + spec.retina.str() +
                      " differ in dimensionality");
  check_window(spec.rf, spec.retina, "receptive field", "retina");
  check_window(spec.inhibition, spec.grid, "inhibition", "grid");
  check_window(spec.leakage, spec.grid, "leakage", "grid");
  for (double s : spec.leakage_sigma)
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("leakage sigma must be positive");

  Topology t;
  t.spec_ = spec;
  const Extent& g = spec.grid;
  const std::size_t m = g.size();

  const auto inhibition_offsets = detail::window_offsets(spec.inhibition);
  const auto leakage_offsets = detail::window_offsets(spec.leakage);
  const auto rf_offsets = detail::window_offsets(spec.rf);
  const double two_var_r = 2.0 * spec.leakage_sigma[0] * spec.leakage_sigma[0];
  const double two_var_c = 2.0 * spec.leakage_sigma[1] * spec.leakage_sigma[1];

  for (std::size_t y = 0; y < m; ++y) {
    const long r = static_cast<long>(y / g.cols);
    const long c = static_cast<long>(y % g.cols);
    std::size_t flat = 0;

    for (const auto& [dr, dc] : inhibition_offsets)
      if (detail::resolve(r + dr, c + dc, g, spec.boundary, flat)) t.neighborhood_.entries.push_back(flat);
    t.neighborhood_.close_row();

    const std::size_t first = t.leakage_.entries.size();
    double total = 0.0;
    for (const auto& [dr, dc] : leakage_offsets) {
      if (!detail::resolve(r + dr, c + dc, g, spec.boundary, flat)) continue;
      const double w = std::exp(-static_cast<double>(dr * dr) / two_var_r -
                                static_cast<double>(dc * dc) / two_var_c);
      t.leakage_.entries.push_back({flat, w});
      total += w;
    }
    for (std::size_t s = first; s < t.leakage_.entries.size(); ++s) t.leakage_.entries[s].weight /= total;
    t.leakage_.close_row();

    const auto [cr, cc] = t.retina_center(y);
    for (std::size_t k = 0; k < spec.num_retinae; ++k)
      for (const auto& [dr, dc] : rf_offsets)
        if (detail::resolve(cr + dr, cc + dc, spec.retina, spec.boundary, flat))
          t.receptive_field_.entries.push_back(k * spec.retina.size() + flat);
    t.receptive_field_.close_row();
  }

  t.inverse_neighborhood_ = detail::invert(t.neighborhood_, m, [](std::size_t j) { return j; });
  t.inverse_leakage_ = detail::invert(t.leakage_, m, [](const LeakageEntry& e) { return e.target; });
  return t;
}

}  // namespace vicon
