#include <gtest/gtest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "vicon/analysis.hpp"
#include "vicon/data.hpp"
#include "vicon/trainer.hpp"

using namespace vicon;

namespace {

// Checksum of the montage written by the seeded run below; update only when
// the training or rendering behaviour is meant to change.
constexpr std::uint64_t golden_montage_hash = 13477050666720990242ull;

TopologySpec binocular_line(std::size_t m) {
  TopologySpec s;
  s.grid = {1, m};
  s.retina = {1, m};
  s.rf = {1, 3};
  s.inhibition = {1, 3};
  s.leakage = {1, 3};
  return s;
}

TopologySpec binocular_square(std::size_t n) {
  TopologySpec s;
  s.grid = {n, n};
  s.retina = {n, n};
  s.rf = {3, 3};
  s.inhibition = {3, 3};
  s.leakage = {3, 3};
  return s;
}

/// References constant on each retina: left level l(y), right level r(y).
template <typename L, typename R>
NetworkParams levels(const Topology& t, L left, R right) {
  NetworkParams p = NetworkParams::zeros(t);
  for (std::size_t y = 0; y < t.size(); ++y) {
    const auto idx = t.receptive_field().row(y);
    for (std::size_t i = 0; i < idx.size(); ++i)
      p.reference(y)[i] = t.retina_of_input(idx[i]) == 0 ? left(y) : right(y);
  }
  return p;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

TEST(Ocularity, ZeroReferencesGiveZeroProfiles) {
  const Topology t = build_topology(binocular_line(10));
  const OcularityProfile prof = ocularity_profile(NetworkParams::zeros(t), t);
  EXPECT_EQ(prof.left, std::vector<double>(10, 0.0));
  EXPECT_EQ(prof.right, std::vector<double>(10, 0.0));
}

TEST(Ocularity, AbsoluteDeviationIgnoresSign) {
  const Topology t = build_topology(binocular_line(10));
  const auto p = levels(t, [](std::size_t) { return 0.5; }, [](std::size_t) { return -0.5; });
  const OcularityProfile prof = ocularity_profile(p, t);
  for (std::size_t y = 0; y < 10; ++y) {
    EXPECT_EQ(prof.left[y], 0.5);
    EXPECT_EQ(prof.right[y], 0.5);
  }
}

TEST(Ocularity, OriginShiftsTheReferenceLevel) {
  const Topology t = build_topology(binocular_line(10));
  const auto p = levels(t, [](std::size_t) { return 0.25; }, [](std::size_t) { return -0.25; });
  const OcularityProfile prof = ocularity_profile(p, t, -0.5);
  for (std::size_t y = 0; y < 10; ++y) {
    EXPECT_EQ(prof.left[y], 0.75);
    EXPECT_EQ(prof.right[y], 0.25);
  }
}

TEST(Ocularity, AlternatingReferencesAreInAntiphase) {
  const Topology t = build_topology(binocular_line(30));
  auto wave = [](std::size_t y) { return std::cos(2.0 * std::numbers::pi * static_cast<double>(y) / 6.0); };
  const auto p = levels(t, [&](std::size_t y) { return 1.0 + 0.5 * wave(y); },
                        [&](std::size_t y) { return 1.0 - 0.5 * wave(y); });
  const StripeStats st = stripe_stats(ocularity_profile(p, t));
  ASSERT_TRUE(st.antiphase_corr.has_value());
  EXPECT_NEAR(*st.antiphase_corr, -1.0, 1e-12);
  ASSERT_TRUE(st.dominant_period.has_value());
  EXPECT_NEAR(*st.dominant_period, 6.0, 1e-12);
}

TEST(Ocularity, InvariantUnderPixelPermutationWithinARetina) {
  TopologySpec s = binocular_line(12);
  s.rf = {1, 5};
  s.boundary = Boundary::wrap;
  const Topology t = build_topology(s);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NetworkParams p = NetworkParams::zeros(t);
  for (double& v : p.references) v = u(rng);
  NetworkParams q = p;
  for (std::size_t y = 0; y < t.size(); ++y) {
    auto ref = q.reference(y);
    std::reverse(ref.begin(), ref.begin() + 5);
    std::rotate(ref.begin() + 5, ref.begin() + 7, ref.end());
  }
  const OcularityProfile a = ocularity_profile(p, t), b = ocularity_profile(q, t);
  for (std::size_t y = 0; y < t.size(); ++y) {
    EXPECT_NEAR(a.left[y], b.left[y], 1e-15);
    EXPECT_NEAR(a.right[y], b.right[y], 1e-15);
  }
}

TEST(Ocularity, NeedsTwoRetinae) {
  TopologySpec s = binocular_line(10);
  s.num_retinae = 1;
  const Topology t = build_topology(s);
  EXPECT_THROW(ocularity_profile(NetworkParams::zeros(t), t), ConfigError);
}

TEST(StripeStats, SineInAntiphaseAtPeriodSevenAndAHalf) {
  OcularityProfile prof;
  for (int y = 0; y < 30; ++y) {
    const double s = std::sin(2.0 * std::numbers::pi * y / 7.5);
    prof.left.push_back(s);
    prof.right.push_back(-s);
  }
  const StripeStats st = stripe_stats(prof);
  ASSERT_TRUE(st.dominant_period.has_value());
  EXPECT_NEAR(*st.dominant_period, 7.5, 1e-12);
  EXPECT_NEAR(*st.antiphase_corr, -1.0, 1e-12);
}

TEST(StripeStats, IdenticalProfilesHavePositiveCorrelationAndNoPeriod) {
  OcularityProfile prof;
  for (int y = 0; y < 12; ++y) prof.left.push_back(std::sin(0.7 * y));
  prof.right = prof.left;
  const StripeStats st = stripe_stats(prof);
  EXPECT_NEAR(*st.antiphase_corr, 1.0, 1e-12);
  EXPECT_EQ(st.amplitude, 0.0);
  EXPECT_FALSE(st.dominant_period.has_value());
}

TEST(StripeStats, FlatProfilesAreSignalled) {
  OcularityProfile prof{std::vector<double>(10, 0.3), std::vector<double>(10, 0.1)};
  const StripeStats st = stripe_stats(prof);
  EXPECT_FALSE(st.dominant_period.has_value());
  EXPECT_FALSE(st.antiphase_corr.has_value());
  EXPECT_NEAR(st.amplitude, 0.2, 1e-15);
}

TEST(StripeStats, NeedsEightNeurons) {
  OcularityProfile prof{std::vector<double>(7, 0.0), std::vector<double>(7, 1.0)};
  EXPECT_THROW(stripe_stats(prof), ConfigError);
}

TEST(Dominance, AllLeftReferencesGiveAUniformMap) {
  const Topology t = build_topology(binocular_square(6));
  const auto p = levels(t, [](std::size_t) { return 0.4; }, [](std::size_t) { return 0.1; });
  const DominanceMap map = dominance_map_2d(p, t);
  EXPECT_EQ(map.left, std::vector<std::uint8_t>(36, 1));
  EXPECT_EQ(map.left_fraction(), 1.0);
  EXPECT_EQ(label_correlation_length(map), 0.0);
}

TEST(Dominance, VerticalStripesAreReproduced) {
  const Topology t = build_topology(binocular_square(12));
  auto is_left = [](std::size_t y) { return ((y % 12) / 3) % 2 == 0; };
  const auto p = levels(t, [&](std::size_t y) { return is_left(y) ? 0.5 : 0.1; },
                        [&](std::size_t y) { return is_left(y) ? 0.1 : 0.5; });
  const DominanceMap map = dominance_map_2d(p, t);
  for (std::size_t y = 0; y < 144; ++y) EXPECT_EQ(map.left[y], is_left(y) ? 1 : 0) << y;
  EXPECT_EQ(map.left_fraction(), 0.5);
  EXPECT_GT(label_correlation_length(map), 1.0);

  const Image img = map.image();
  EXPECT_EQ(img.at(0, 0), 1.0);
  EXPECT_EQ(img.at(5, 3), 0.0);
}

TEST(Dominance, ScalingReferencesKeepsTheMap) {
  const Topology t = build_topology(binocular_square(8));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NetworkParams p = NetworkParams::zeros(t);
  for (double& v : p.references) v = u(rng);
  NetworkParams q = p;
  for (double& v : q.references) v *= 3.7;
  EXPECT_EQ(dominance_map_2d(p, t).left, dominance_map_2d(q, t).left);
}

TEST(Dominance, TiesGoLeftAndOneDimensionalGridsAreRejected) {
  const Topology t = build_topology(binocular_square(4));
  const DominanceMap map = dominance_map_2d(NetworkParams::zeros(t), t);
  EXPECT_EQ(map.left, std::vector<std::uint8_t>(16, 1));
  const Topology line = build_topology(binocular_line(10));
  EXPECT_THROW(dominance_map_2d(NetworkParams::zeros(line), line), ConfigError);
}

TEST(Dominance, CheckerboardIsShorterThanOneNeuron) {
  DominanceMap map{{10, 10}, std::vector<std::uint8_t>(100)};
  for (std::size_t r = 0; r < 10; ++r)
    for (std::size_t c = 0; c < 10; ++c) map.left[r * 10 + c] = (r + c) % 2;
  EXPECT_LT(label_correlation_length(map), 1.0);
}

TEST(Montage, ConstantTilesAreMidGreyWithSeparators) {
  TopologySpec s = binocular_square(2);
  s.retina = {6, 6};
  s.num_retinae = 1;
  s.inhibition = {1, 1};
  s.leakage = {1, 1};
  const Topology t = build_topology(s);
  NetworkParams p = NetworkParams::zeros(t);
  for (std::size_t y = 0; y < 4; ++y)
    for (double& v : p.weight(y)) v = static_cast<double>(y);
  const Image img = montage(p, t);
  ASSERT_EQ(img.rows, 7u);
  ASSERT_EQ(img.cols, 7u);
  ASSERT_EQ(img.channels, 1u);
  for (std::size_t r = 0; r < 7; ++r)
    for (std::size_t c = 0; c < 7; ++c) {
      const bool separator = r == 3 || c == 3;
      EXPECT_EQ(img.at(r, c), separator ? 0.0 : 0.5) << r << "," << c;
    }
}

TEST(Montage, EachTileIsStretchedToTheUnitInterval) {
  TopologySpec s = binocular_square(3);
  s.num_retinae = 1;
  s.boundary = Boundary::wrap;
  const Topology t = build_topology(s);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 5.0);
  NetworkParams p = NetworkParams::zeros(t);
  for (double& v : p.references) v = u(rng);
  const Image img = montage(p, t, MontageSource::references);
  for (std::size_t y = 0; y < 9; ++y) {
    const std::size_t top = (y / 3) * 4, left = (y % 3) * 4;
    double lo = 1.0, hi = 0.0;
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t c = 0; c < 3; ++c) {
        lo = std::min(lo, img.at(top + r, left + c));
        hi = std::max(hi, img.at(top + r, left + c));
      }
    EXPECT_EQ(lo, 0.0);
    EXPECT_EQ(hi, 1.0);
  }
}

TEST(Montage, TwoRetinaeMapToBlueAndYellow) {
  const Topology t = build_topology(binocular_square(3));
  NetworkParams p = NetworkParams::zeros(t);
  for (std::size_t y = 0; y < t.size(); ++y) {
    const auto idx = t.receptive_field().row(y);
    for (std::size_t i = 0; i < idx.size(); ++i) p.weight(y)[i] = t.retina_of_input(idx[i]) == 0 ? 1.0 : 0.0;
  }
  const Image img = montage(p, t);
  ASSERT_EQ(img.channels, 3u);
  // Centre neuron: retina 0 at the top of the range, retina 1 at the bottom.
  EXPECT_EQ(img.at(5, 5, 2), 1.0);
  EXPECT_EQ(img.at(5, 5, 0), 0.0);
  EXPECT_EQ(img.at(5, 5, 1), 0.0);
}

TEST(Montage, SeededTrainingRunMatchesGoldenChecksum) {
  TopologySpec s;
  s.grid = {6, 6};
  s.retina = {10, 10};
  s.num_retinae = 1;
  s.rf = {5, 5};
  s.inhibition = {3, 3};
  s.leakage = {3, 3};
  const Topology t = build_topology(s);
  TexturePatchSource src(procedural_texture(1, 64), s.retina, 1, Pairing::independent, 2);
  const TrainResult r = train(init_params(t, InitSpec{}, 3), t, Schedule{{{300, 0.01, {1.0, 1.0}}}}, src);
  const std::string bytes = encode_pnm(montage(r.params, t));
  EXPECT_EQ(bytes.substr(0, 12), "P5\n35 35\n255");
  EXPECT_EQ(fnv1a(bytes), golden_montage_hash);
}

TEST(Reconstruct, SingleNeuronReturnsItsReference) {
  TopologySpec s;
  s.grid = {1, 1};
  s.retina = {1, 5};
  s.num_retinae = 1;
  s.rf = {1, 3};
  s.inhibition = {1, 1};
  s.leakage = {1, 1};
  const Topology t = build_topology(s);
  NetworkParams p = NetworkParams::zeros(t);
  p.references = {0.1, -0.2, 0.3};
  Sample x(5, 0.7);
  const Reconstruction rec = reconstruct(p, t, x);
  EXPECT_EQ(rec.posterior, std::vector<double>{1.0});
  EXPECT_EQ(rec.reconstruction.values, (std::vector<double>{0.0, 0.1, -0.2, 0.3, 0.0}));
}

TEST(Reconstruct, ZeroReferencesReconstructNothing) {
  const Topology t = build_topology(binocular_line(10));
  std::mt19937_64 rng(4);
  NetworkParams p = init_params(t, InitSpec{}, 5);
  std::fill(p.references.begin(), p.references.end(), 0.0);
  Sample x(20);
  for (double& v : x.values) v = std::uniform_real_distribution<double>(-1, 1)(rng);
  for (double v : reconstruct(p, t, x).reconstruction.values) EXPECT_EQ(v, 0.0);
}

TEST(Reconstruct, IsLinearInTheReferences) {
  const Topology t = build_topology(binocular_line(10));
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  NetworkParams a = init_params(t, InitSpec{}, 7), b = a, sum = a;
  for (std::size_t i = 0; i < a.references.size(); ++i) {
    a.references[i] = u(rng);
    b.references[i] = u(rng);
    sum.references[i] = 2.0 * a.references[i] - 0.5 * b.references[i];
  }
  Sample x(20);
  for (double& v : x.values) v = u(rng);
  const auto ra = reconstruct(a, t, x), rb = reconstruct(b, t, x), rs = reconstruct(sum, t, x);
  for (std::size_t i = 0; i < 20; ++i)
    EXPECT_NEAR(rs.reconstruction[i], 2.0 * ra.reconstruction[i] - 0.5 * rb.reconstruction[i], 1e-14);
}

TEST(Reconstruct, TriptychPlacesInputPosteriorAndReconstruction) {
  const Topology t = build_topology(binocular_square(4));
  const NetworkParams p = init_params(t, InitSpec{}, 8);
  Sample x(32);
  for (std::size_t i = 0; i < 32; ++i) x[i] = static_cast<double>(i % 5) - 2.0;
  const Reconstruction rec = reconstruct(p, t, x);
  const Image img = triptych(t, x, rec);
  EXPECT_EQ(img.channels, 1u);
  EXPECT_EQ(img.rows, 9u);   // two 4-row retinae and a separator
  EXPECT_EQ(img.cols, 14u);  // 4 + 1 + 4 + 1 + 4
  for (double v : img.data) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  const Image post = posterior_image(t, rec.posterior);
  EXPECT_EQ(post.rows, 4u);
  EXPECT_EQ(post.cols, 4u);
}

TEST(Csv, HasHeaderAndOneRowPerNeuron) {
  OcularityProfile prof{{0.1, 0.25}, {0.5, 1.0 / 3.0}};
  const auto path = (std::filesystem::temp_directory_path() / "vicon_test_ocularity.csv").string();
  write_ocularity_csv(prof, path);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  EXPECT_EQ(buf.str(), "index,left,right\n0,0.1,0.5\n1,0.25,0.3333333333333333\n");
  std::filesystem::remove(path);
}
