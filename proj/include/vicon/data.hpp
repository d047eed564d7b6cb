#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vicon/common.hpp"
#include "vicon/image.hpp"
#include "vicon/topology.hpp"

namespace vicon {

/// Featureless two-retina scenes. Each retina sees one uniform brightness,
/// drawn independently; the pair is normalized to sum to one and shifted to
/// zero mean, so the left value is l/(l+r) - 1/2 and the right value is its
/// negation.
class SyntheticRetinaSource {
 public:
  SyntheticRetinaSource(std::size_t retina_pixels, std::size_t num_retinae, std::uint64_t seed)
      : pixels_(retina_pixels), rng_(seed) {
    if (num_retinae != 2) throw ConfigError("synthetic featureless data needs two retinae");
    if (retina_pixels == 0) throw ConfigError("retina must have pixels");
  }

  /// Sample for given raw brightnesses (l + r > 0).
  static Sample from_brightness(double left, double right, std::size_t retina_pixels) {
    const double total = left + right;
    Sample x(2 * retina_pixels);
    const double l = left / total - 0.5;
    const double r = -l;  // right / total - 0.5, exactly antisymmetric
    for (std::size_t i = 0; i < retina_pixels; ++i) {
      x[i] = l;
      x[retina_pixels + i] = r;
    }
    return x;
  }

  std::optional<Sample> next() {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double l = 0.0, r = 0.0;
    do {
      l = u(rng_);
      r = u(rng_);
    } while (l + r == 0.0);
    return from_brightness(l, r, pixels_);
  }

 private:
  std::size_t pixels_;
  std::mt19937_64 rng_;
};

/// Whether the two retinae of a texture sample look at the same place.
enum class Pairing { independent, correlated };

inline std::string to_string(Pairing p) { return p == Pairing::correlated ? "correlated" : "independent"; }

/// Random runs (1-D retinae) or patches (2-D retinae) cut from a gray image,
/// shifted by the image mean to be zero-mean.
class TexturePatchSource {
 public:
  TexturePatchSource(Image image, Extent retina, std::size_t num_retinae, Pairing pairing, std::uint64_t seed)
      : image_(std::move(image)), retina_(retina), num_retinae_(num_retinae), pairing_(pairing), rng_(seed) {
    if (image_.channels != 1) throw ConfigError("texture image must be gray");
    if (num_retinae_ != 1 && num_retinae_ != 2) throw ConfigError("num_retinae must be 1 or 2");
    if (retina_.rows > image_.rows || retina_.cols > image_.cols)
      throw ConfigError("retina " + retina_.str() + " does not fit in a " + std::to_string(image_.rows) + "x" +
                        std::to_string(image_.cols) + " image");
    mean_ = vicon::mean(image_);
  }

  double mean() const noexcept { return mean_; }
  const Image& image() const noexcept { return image_; }

  /// The patch whose top-left corner is (row, col), minus the image mean.
  void extract(std::size_t row, std::size_t col, std::size_t retina_index, Sample& out) const {
    const std::size_t base = retina_index * retina_.size();
    for (std::size_t r = 0; r < retina_.rows; ++r)
      for (std::size_t c = 0; c < retina_.cols; ++c)
        out[base + r * retina_.cols + c] = image_.at(row + r, col + c) - mean_;
  }

  std::optional<Sample> next() {
    std::uniform_int_distribution<std::size_t> rows(0, image_.rows - retina_.rows);
    std::uniform_int_distribution<std::size_t> cols(0, image_.cols - retina_.cols);
    Sample x(num_retinae_ * retina_.size());
    std::size_t r0 = rows(rng_), c0 = cols(rng_);
    extract(r0, c0, 0, x);
    if (num_retinae_ == 2) {
      if (pairing_ == Pairing::independent) {
        r0 = rows(rng_);
        c0 = cols(rng_);
      }
      extract(r0, c0, 1, x);
    }
    return x;
  }

 private:
  Image image_;
  Extent retina_;
  std::size_t num_retinae_;
  Pairing pairing_;
  std::mt19937_64 rng_;
  double mean_ = 0.0;
};

/// Seeded stand-in for a natural texture: white noise smoothed by a
/// periodic Gaussian of width `blur_sigma` pixels and stretched to [0,1].
/// The 1/e correlation length is twice the width, 6 pixels by default.
inline Image procedural_texture(std::uint64_t seed, std::size_t size = 256, double blur_sigma = 3.0) {
  if (size < 8) throw ConfigError("procedural texture must be at least 8 pixels");
  if (!(blur_sigma > 0.0)) throw ConfigError("blur sigma must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> a(size * size);
  for (double& v : a) v = noise(rng);

  const long radius = static_cast<long>(std::ceil(3.0 * blur_sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double ksum = 0.0;
  for (long k = -radius; k <= radius; ++k) {
    kernel[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * static_cast<double>(k * k) / (blur_sigma * blur_sigma));
    ksum += kernel[static_cast<std::size_t>(k + radius)];
  }
  for (double& k : kernel) k /= ksum;

  const long n = static_cast<long>(size);
  auto wrap = [n](long i) { return static_cast<std::size_t>(((i % n) + n) % n); };
  std::vector<double> b(a.size());
  for (long r = 0; r < n; ++r)
    for (long c = 0; c < n; ++c) {
      double s = 0.0;
      for (long k = -radius; k <= radius; ++k) s += kernel[static_cast<std::size_t>(k + radius)] * a[static_cast<std::size_t>(r) * size + wrap(c + k)];
      b[static_cast<std::size_t>(r) * size + static_cast<std::size_t>(c)] = s;
    }
  for (long r = 0; r < n; ++r)
    for (long c = 0; c < n; ++c) {
      double s = 0.0;
      for (long k = -radius; k <= radius; ++k) s += kernel[static_cast<std::size_t>(k + radius)] * b[wrap(r + k) * size + static_cast<std::size_t>(c)];
      a[static_cast<std::size_t>(r) * size + static_cast<std::size_t>(c)] = s;
    }

  const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
  const double low = *lo, span = *hi - *lo;
  Image img(size, size);
  for (std::size_t i = 0; i < a.size(); ++i) img.data[i] = (a[i] - low) / span;
  return img;
}

/// Replays a fixed list of samples once.
class VectorSource {
 public:
  explicit VectorSource(std::vector<Sample> samples) : samples_(std::move(samples)) {}
  std::optional<Sample> next() {
    if (pos_ >= samples_.size()) return std::nullopt;
    return samples_[pos_++];
  }

 private:
  std::vector<Sample> samples_;
  std::size_t pos_ = 0;
};

}  // namespace vicon
