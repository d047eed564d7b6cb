#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vicon/common.hpp"
#include "vicon/image.hpp"
#include "vicon/network.hpp"
#include "vicon/posterior.hpp"
#include "vicon/topology.hpp"

namespace vicon {

/// Per-neuron mean absolute deviation of the reference vector inside the
/// left (retina 0) and right (retina 1) parts of the receptive field.
struct OcularityProfile {
  std::vector<double> left;
  std::vector<double> right;
};

/// Deviations are measured from `origin`. The default 0 is the component
/// mean of zero-mean training data. Synthetic featureless data pairs each
/// left value with its exact negation, which makes |x'| identical on both
/// sides; measuring from the zero-brightness level (origin -0.5) recovers
/// the per-retina brightness and with it the stripe pattern.
inline OcularityProfile ocularity_profile(const NetworkParams& params, const Topology& topo, double origin = 0.0) {
  if (topo.spec().num_retinae != 2) throw ConfigError("ocularity needs a two-retina topology");
  if (!params.matches(topo)) throw ConfigError("parameters do not match the topology");
  OcularityProfile prof;
  prof.left.assign(topo.size(), 0.0);
  prof.right.assign(topo.size(), 0.0);
  for (std::size_t y = 0; y < topo.size(); ++y) {
    const auto idx = topo.receptive_field().row(y);
    const auto ref = params.reference(y);
    double sum[2] = {0.0, 0.0};
    std::size_t count[2] = {0, 0};
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const std::size_t k = topo.retina_of_input(idx[i]);
      sum[k] += std::abs(ref[i] - origin);
      ++count[k];
    }
    prof.left[y] = count[0] ? sum[0] / static_cast<double>(count[0]) : 0.0;
    prof.right[y] = count[1] ? sum[1] / static_cast<double>(count[1]) : 0.0;
  }
  return prof;
}

struct StripeStats {
  std::optional<double> dominant_period;  // empty when left - right is flat
  std::optional<double> antiphase_corr;   // empty when either profile is constant
  double amplitude = 0.0;                 // mean |left - right|
};

inline std::optional<double> pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  const double scale = std::max({1.0, ma * ma, mb * mb}) * n * 1e-24;
  if (saa <= scale || sbb <= scale) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

/// Period (neurons per cycle) from the strongest non-zero DFT bin of
/// left - right, plus the left/right correlation and mean separation.
inline StripeStats stripe_stats(const OcularityProfile& prof) {
  const std::size_t m = prof.left.size();
  if (prof.right.size() != m) throw ConfigError("ocularity profiles differ in length");
  if (m < 8) throw ConfigError("stripe statistics need at least 8 neurons");

  StripeStats st;
  std::vector<double> diff(m);
  double mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    diff[i] = prof.left[i] - prof.right[i];
    st.amplitude += std::abs(diff[i]);
    mean += diff[i];
  }
  st.amplitude /= static_cast<double>(m);
  mean /= static_cast<double>(m);

  double spread = 0.0;
  for (double d : diff) spread = std::max(spread, std::abs(d - mean));
  if (spread > 1e-12 * std::max(1.0, std::abs(mean))) {
    std::size_t best_k = 1;
    double best = -1.0;
    for (std::size_t k = 1; k <= m / 2; ++k) {
      std::complex<double> acc{0.0, 0.0};
      for (std::size_t n = 0; n < m; ++n)
        acc += diff[n] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * n) / static_cast<double>(m));
      // Strictly greater keeps the lowest frequency on ties.
      if (std::abs(acc) > best * (1.0 + 1e-12)) {
        best = std::abs(acc);
        best_k = k;
      }
    }
    st.dominant_period = static_cast<double>(m) / static_cast<double>(best_k);
  }
  st.antiphase_corr = pearson(prof.left, prof.right);
  return st;
}

/// Binary ocular dominance per neuron: 1 = left, 0 = right.
struct DominanceMap {
  Extent shape;
  std::vector<std::uint8_t> left;

  double left_fraction() const {
    double n = 0.0;
    for (auto v : left) n += v;
    return left.empty() ? 0.0 : n / static_cast<double>(left.size());
  }

  Image image() const {
    Image img(shape.rows, shape.cols);
    for (std::size_t i = 0; i < left.size(); ++i) img.data[i] = left[i] ? 1.0 : 0.0;
    return img;
  }
};

/// Sign of left - right ocularity. Exact ties go to the left eye.
inline DominanceMap dominance_map_2d(const NetworkParams& params, const Topology& topo, double origin = 0.0) {
  if (topo.spec().grid.is_1d()) throw ConfigError("dominance map needs a 2-D grid");
  const OcularityProfile prof = ocularity_profile(params, topo, origin);
  DominanceMap map{topo.spec().grid, std::vector<std::uint8_t>(topo.size())};
  for (std::size_t y = 0; y < topo.size(); ++y) map.left[y] = prof.left[y] >= prof.right[y] ? 1 : 0;
  return map;
}

/// Lag at which the label autocorrelation (averaged over horizontal and
/// vertical shifts) first drops below 1/e, linearly interpolated. Zero for a
/// uniform map; salt-and-pepper maps give values below one.
inline double label_correlation_length(const DominanceMap& map) {
  const std::size_t rows = map.shape.rows, cols = map.shape.cols;
  const double n = static_cast<double>(map.left.size());
  double mean = 0.0;
  for (auto v : map.left) mean += v;
  mean /= n;
  std::vector<double> s(map.left.size());
  double var = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = map.left[i] - mean;
    var += s[i] * s[i];
  }
  var /= n;
  if (var <= 0.0) return 0.0;

  auto corr = [&](std::size_t lag) {
    double acc = 0.0;
    std::size_t pairs = 0;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c + lag < cols; ++c, ++pairs) acc += s[r * cols + c] * s[r * cols + c + lag];
    for (std::size_t r = 0; r + lag < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c, ++pairs) acc += s[r * cols + c] * s[(r + lag) * cols + c];
    return pairs ? acc / static_cast<double>(pairs) / var : 0.0;
  };

  const double threshold = std::exp(-1.0);
  const std::size_t max_lag = std::max<std::size_t>(1, std::max(rows, cols) / 2);
  double prev = 1.0;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    const double c = corr(lag);
    if (c < threshold) return static_cast<double>(lag - 1) + (prev - threshold) / (prev - c);
    prev = c;
  }
  return static_cast<double>(max_lag);
}

enum class MontageSource { weights, references };

inline std::string to_string(MontageSource s) { return s == MontageSource::references ? "references" : "weights"; }

/// Tiles every neuron's receptive-field vector into one image, laid out like
/// the grid with 1-pixel separators. Each tile is affine-scaled to [0,1] on
/// its own; a constant tile becomes 0.5. With two retinae the result is RGB:
/// retina 0 drives blue, retina 1 drives yellow (red + green).
inline Image montage(const NetworkParams& params, const Topology& topo, MontageSource which = MontageSource::weights) {
  if (!params.matches(topo)) throw ConfigError("parameters do not match the topology");
  const Extent& g = topo.spec().grid;
  const Extent& w = topo.spec().rf;
  const bool color = topo.spec().num_retinae == 2;
  Image img(g.rows * w.rows + (g.rows - 1), g.cols * w.cols + (g.cols - 1), color ? 3 : 1, 0.0);

  for (std::size_t y = 0; y < topo.size(); ++y) {
    const auto idx = topo.receptive_field().row(y);
    const auto vals = which == MontageSource::weights ? params.weight(y) : params.reference(y);
    if (vals.empty()) continue;
    const auto [lo, hi] = std::minmax_element(vals.begin(), vals.end());
    const double low = *lo, range = *hi - *lo;
    const std::size_t top = (y / g.cols) * (w.rows + 1);
    const std::size_t left = (y % g.cols) * (w.cols + 1);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const double v = range > 0.0 ? (vals[i] - low) / range : 0.5;
      const auto [wr, wc] = topo.window_position(y, idx[i]);
      if (!color) {
        img.at(top + wr, left + wc) = v;
      } else if (topo.retina_of_input(idx[i]) == 0) {
        img.at(top + wr, left + wc, 2) = v;
      } else {
        img.at(top + wr, left + wc, 0) = v;
        img.at(top + wr, left + wc, 1) = v;
      }
    }
  }
  return img;
}

struct Reconstruction {
  Sample reconstruction;           // sum_y Pr(y|x) x'(y)
  std::vector<double> posterior;   // Pr(y|x)
};

/// Encodes x to its posterior field and decodes it through the reference
/// vectors. Overlapping receptive fields accumulate; inputs outside every
/// receptive field stay zero.
inline Reconstruction reconstruct(const NetworkParams& params, const Topology& topo, const Sample& x) {
  const PosteriorState post = pmd_posterior(params, topo, x);
  Reconstruction out{Sample(topo.input_dim()), post.posterior};
  for (std::size_t y = 0; y < topo.size(); ++y) {
    const auto idx = topo.receptive_field().row(y);
    const auto ref = params.reference(y);
    for (std::size_t i = 0; i < idx.size(); ++i) out.reconstruction[idx[i]] += post.posterior[y] * ref[i];
  }
  return out;
}

/// Posterior field as a grid image scaled by its maximum.
inline Image posterior_image(const Topology& topo, const std::vector<double>& posterior) {
  const Extent& g = topo.spec().grid;
  Image img(g.rows, g.cols);
  const double peak = *std::max_element(posterior.begin(), posterior.end());
  for (std::size_t i = 0; i < posterior.size(); ++i) img.data[i] = peak > 0.0 ? posterior[i] / peak : 0.0;
  return img;
}

/// Input | posterior | reconstruction side by side. Input and reconstruction
/// share one affine scale (that of the input); two retinae are stacked.
inline Image triptych(const Topology& topo, const Sample& x, const Reconstruction& rec) {
  const Extent& r = topo.spec().retina;
  const Extent& g = topo.spec().grid;
  const std::size_t nret = topo.spec().num_retinae;
  const std::size_t panel_h = nret * r.rows + (nret - 1);
  const std::size_t height = std::max(panel_h, g.rows);
  Image img(height, 2 * r.cols + g.cols + 2, 1, 0.0);

  const auto [lo, hi] = std::minmax_element(x.values.begin(), x.values.end());
  const double low = *lo, range = *hi - *lo;
  auto scaled = [&](double v) { return range > 0.0 ? std::clamp((v - low) / range, 0.0, 1.0) : 0.5; };
  for (std::size_t k = 0; k < nret; ++k)
    for (std::size_t i = 0; i < r.rows; ++i)
      for (std::size_t j = 0; j < r.cols; ++j) {
        const std::size_t src = k * r.size() + i * r.cols + j;
        img.at(k * (r.rows + 1) + i, j) = scaled(x[src]);
        img.at(k * (r.rows + 1) + i, r.cols + g.cols + 2 + j) = scaled(rec.reconstruction[src]);
      }
  const Image post = posterior_image(topo, rec.posterior);
  for (std::size_t i = 0; i < g.rows; ++i)
    for (std::size_t j = 0; j < g.cols; ++j) img.at(i, r.cols + 1 + j) = post.at(i, j);
  return img;
}

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

/// CSV with header `index,left,right`, one row per neuron.
inline void write_ocularity_csv(const OcularityProfile& prof, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "index,left,right\n";
  for (std::size_t i = 0; i < prof.left.size(); ++i)
    out << i << ',' << format_double(prof.left[i]) << ',' << format_double(prof.right[i]) << '\n';
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace vicon
