#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "vicon/common.hpp"
#include "vicon/network.hpp"
#include "vicon/topology.hpp"

namespace vicon {

/// Binary layout, all little-endian:
///   "VICN" | u32 version | topology (11 x u64, 2 x f64 sigma, u64 boundary) |
///   u64 neurons | u64 field entries | weights f64[] | biases f64[] | references f64[]
/// Weights and references are neuron-major in receptive-field order.
inline constexpr std::uint32_t checkpoint_version = 1;

struct Checkpoint {
  TopologySpec topology;
  NetworkParams params;
};

inline std::string describe_shape(const TopologySpec& s) {
  return "grid " + s.grid.str() + ", retina " + s.retina.str() + " x" + std::to_string(s.num_retinae) + ", rf " +
         s.rf.str() + ", inhibition " + s.inhibition.str() + ", leakage " + s.leakage.str() + ", " +
         to_string(s.boundary);
}

namespace detail {

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }
  void raw(const char* s, std::size_t n) { out_.append(s, n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::string& s) : s_(s) {}
  std::uint64_t uint(int bytes) {
    need(static_cast<std::size_t>(bytes));
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s_[pos_++])) << (8 * i);
    return v;
  }
  double f64() {
    const std::uint64_t bits = uint(8);
    double v = 0.0;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string out = s_.substr(pos_, n);
    pos_ += n;
    return out;
  }
  bool at_end() const { return pos_ == s_.size(); }

 private:
  void need(std::size_t n) const {
    if (s_.size() - pos_ < n) throw DataError("checkpoint is truncated");
  }
  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_checkpoint(const TopologySpec& spec, const NetworkParams& params) {
  detail::ByteWriter w;
  w.raw("VICN", 4);
  w.u32(checkpoint_version);
  for (const Extent* e : {&spec.grid, &spec.retina}) {
    w.u64(e->rows);
    w.u64(e->cols);
  }
  w.u64(spec.num_retinae);
  for (const Extent* e : {&spec.rf, &spec.inhibition, &spec.leakage}) {
    w.u64(e->rows);
    w.u64(e->cols);
  }
  w.f64(spec.leakage_sigma[0]);
  w.f64(spec.leakage_sigma[1]);
  w.u64(spec.boundary == Boundary::wrap ? 1 : 0);
  w.u64(params.neurons());
  w.u64(params.weights.size());
  for (double v : params.weights) w.f64(v);
  for (double v : params.biases) w.f64(v);
  for (double v : params.references) w.f64(v);
  return w.take();
}

/// Decodes a checkpoint; the parameter layout is rebuilt from the stored
/// topology.
inline Checkpoint decode_checkpoint(const std::string& bytes) {
  detail::ByteReader r(bytes);
  if (bytes.size() < 4 || r.raw(4) != "VICN") throw DataError("not a checkpoint (bad magic)");
  const auto version = r.uint(4);
  if (version != checkpoint_version)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint c;
  auto& s = c.topology;
  for (Extent* e : {&s.grid, &s.retina}) {
    e->rows = r.uint(8);
    e->cols = r.uint(8);
  }
  s.num_retinae = r.uint(8);
  for (Extent* e : {&s.rf, &s.inhibition, &s.leakage}) {
    e->rows = r.uint(8);
    e->cols = r.uint(8);
  }
  s.leakage_sigma = {r.f64(), r.f64()};
  const auto boundary = r.uint(8);
  if (boundary > 1) throw DataError("checkpoint has an unknown boundary mode");
  s.boundary = boundary == 1 ? Boundary::wrap : Boundary::truncate;

  Topology topo = [&] {
    try {
      return build_topology(s);
    } catch (const ConfigError& e) {
      throw DataError(std::string("checkpoint topology is invalid: ") + e.what());
    }
  }();
  c.params = NetworkParams::zeros(topo);
  const auto neurons = r.uint(8);
  const auto entries = r.uint(8);
  if (neurons != c.params.neurons() || entries != c.params.weights.size())
    throw DataError("checkpoint parameter counts do not match its topology");
  for (double& v : c.params.weights) v = r.f64();
  for (double& v : c.params.biases) v = r.f64();
  for (double& v : c.params.references) v = r.f64();
  if (!r.at_end()) throw DataError("checkpoint has trailing bytes");
  return c;
}

inline void save_checkpoint(const std::string& path, const TopologySpec& spec, const NetworkParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  const std::string bytes = encode_checkpoint(spec, params);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

/// Loads a checkpoint that must have the given geometry; the leakage width
/// may differ.
inline Checkpoint load_checkpoint(const std::string& path, const TopologySpec& expected) {
  Checkpoint c = load_checkpoint(path);
  if (!c.topology.same_shape(expected))
    throw DataError("checkpoint shape (" + describe_shape(c.topology) + ") does not match the configured topology (" +
                    describe_shape(expected) + ")");
  return c;
}

}  // namespace vicon
