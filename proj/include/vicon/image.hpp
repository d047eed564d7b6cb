#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "vicon/common.hpp"

namespace vicon {

/// Row-major image with values in [0,1]; one (gray) or three (RGB) channels.
struct Image {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t channels = 1;
  unsigned maxval = 255;  // quantization used when written
  std::vector<double> data;

  Image() = default;
  Image(std::size_t r, std::size_t c, std::size_t ch = 1, double fill = 0.0)
      : rows(r), cols(c), channels(ch), data(r * c * ch, fill) {}

  double& at(std::size_t r, std::size_t c, std::size_t ch = 0) { return data[(r * cols + c) * channels + ch]; }
  double at(std::size_t r, std::size_t c, std::size_t ch = 0) const { return data[(r * cols + c) * channels + ch]; }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Failure while decoding a portable graymap.
class PgmError : public DataError {
 public:
  enum class Kind { unsupported_magic, malformed_header, truncated_payload, io };

  PgmError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

class PnmReader {
 public:
  explicit PnmReader(const std::string& bytes) : s_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < s_.size()) {
      if (s_[pos_] == '#') {
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(s_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  bool read_uint(unsigned long& out) {
    skip_space_and_comments();
    if (pos_ >= s_.size() || !std::isdigit(static_cast<unsigned char>(s_[pos_]))) return false;
    unsigned long v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + static_cast<unsigned long>(s_[pos_] - '0');
      if (v > 0xFFFFFFFFul) return false;
      ++pos_;
    }
    out = v;
    return true;
  }

  std::size_t& pos() { return pos_; }
  const std::string& bytes() const { return s_; }

 private:
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Decodes a P2 (ASCII) or P5 (binary) graymap held in memory.
inline Image decode_pgm(const std::string& bytes) {
  using K = PgmError::Kind;
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw PgmError(K::unsupported_magic, "not a P2/P5 graymap");
  const bool ascii = bytes[1] == '2';
  detail::PnmReader rd(bytes);
  rd.pos() = 2;
  if (rd.pos() < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[2])) && bytes[2] != '#')
    throw PgmError(K::unsupported_magic, "not a P2/P5 graymap");
  unsigned long w = 0, h = 0, maxval = 0;
  if (!rd.read_uint(w) || !rd.read_uint(h) || !rd.read_uint(maxval))
    throw PgmError(K::malformed_header, "graymap header is incomplete or not numeric");
  if (w == 0 || h == 0) throw PgmError(K::malformed_header, "graymap has zero size");
  if (maxval == 0 || maxval > 65535) throw PgmError(K::malformed_header, "graymap maxval must be in 1..65535");

  Image img(h, w);
  img.maxval = static_cast<unsigned>(maxval);
  const double scale = static_cast<double>(maxval);
  const std::size_t n = h * w;
  if (ascii) {
    for (std::size_t i = 0; i < n; ++i) {
      unsigned long v = 0;
      if (!rd.read_uint(v)) {
        rd.skip_space_and_comments();
        if (rd.pos() >= bytes.size())
          throw PgmError(K::truncated_payload, "graymap payload ends after " + std::to_string(i) + " pixels");
        throw PgmError(K::malformed_header, "non-numeric pixel value");
      }
      if (v > maxval) throw PgmError(K::malformed_header, "pixel value exceeds maxval");
      img.data[i] = static_cast<double>(v) / scale;
    }
    return img;
  }
  // Exactly one whitespace byte separates the header from binary data.
  std::size_t p = rd.pos();
  if (p >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[p])))
    throw PgmError(K::truncated_payload, "graymap payload missing");
  ++p;
  const std::size_t bps = maxval < 256 ? 1 : 2;
  if (bytes.size() - p < n * bps)
    throw PgmError(K::truncated_payload, "graymap payload has " + std::to_string(bytes.size() - p) +
                                             " bytes, expected " + std::to_string(n * bps));
  for (std::size_t i = 0; i < n; ++i) {
    unsigned v = static_cast<unsigned char>(bytes[p + i * bps]);
    if (bps == 2) v = (v << 8) | static_cast<unsigned char>(bytes[p + i * bps + 1]);
    if (v > maxval) throw PgmError(K::malformed_header, "pixel value exceeds maxval");
    img.data[i] = static_cast<double>(v) / scale;
  }
  return img;
}

inline Image load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PgmError(PgmError::Kind::io, "cannot open " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pgm(bytes);
}

/// Binary P5 (one channel) or P6 (three channels) encoding.
inline std::string encode_pnm(const Image& img) {
  if (img.channels != 1 && img.channels != 3) throw ConfigError("images must have 1 or 3 channels");
  const unsigned maxval = std::clamp(img.maxval, 1u, 65535u);
  std::ostringstream out;
  out << (img.channels == 1 ? "P5" : "P6") << '\n' << img.cols << ' ' << img.rows << '\n' << maxval << '\n';
  std::string payload;
  payload.reserve(img.data.size() * (maxval < 256 ? 1 : 2));
  for (double v : img.data) {
    const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
    if (maxval >= 256) payload.push_back(static_cast<char>(q >> 8));
    payload.push_back(static_cast<char>(q & 0xFF));
  }
  return out.str() + payload;
}

inline void write_pnm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  const std::string bytes = encode_pnm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path);
}

inline void write_pgm(const Image& img, const std::string& path) {
  if (img.channels != 1) throw ConfigError("write_pgm needs a single-channel image");
  write_pnm(img, path);
}

inline double mean(const Image& img) {
  double s = 0.0;
  for (double v : img.data) s += v;
  return img.data.empty() ? 0.0 : s / static_cast<double>(img.data.size());
}

}  // namespace vicon
