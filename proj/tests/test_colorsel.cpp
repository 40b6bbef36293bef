#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "neuroscope/colorsel.hpp"
#include "neuroscope/errors.hpp"
#include "oracles.hpp"

using namespace neuroscope;

namespace {

double abs_cos(const Vec3& a, const Eigen::Vector3d& b) {
  return std::abs(a[0] * b(0) + a[1] * b(1) + a[2] * b(2)) / b.norm();
}

Vec3 axis_at(double alpha, double hue_deg) {
  const double tilt = alpha * std::numbers::pi / 2.0;
  const double h = hue_deg * std::numbers::pi / 180.0;
  return {std::cos(tilt), std::sin(tilt) * std::cos(h), std::sin(tilt) * std::sin(h)};
}

NeuronFeature nf_from(const RgbImageD& img) {
  NeuronFeature nf;
  nf.pixels = img;
  nf.n_used = 1;
  nf.weight_sum = 1.0;
  nf.coverage.assign(static_cast<std::size_t>(img.rows()) * img.cols(), 1);
  return nf;
}

PixelStdMap zero_std(int rows, int cols) {
  PixelStdMap s;
  s.rows = rows;
  s.cols = cols;
  s.std.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  s.coverage.assign(static_cast<std::size_t>(rows) * cols, 1);
  s.mean = RgbImageD(rows, cols);
  return s;
}

}  // namespace

TEST(Opponent, KnownColors) {
  const Vec3 white = rgb_to_opp(Vec3{1, 1, 1});
  EXPECT_NEAR(white[0], std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(white[1], 0.0, 1e-15);
  EXPECT_NEAR(white[2], 0.0, 1e-15);
  const Vec3 red = rgb_to_opp(Vec3{1, 0, 0});
  EXPECT_NEAR(red[0], 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(red[1], 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(red[2], 1.0 / std::sqrt(6.0), 1e-15);
  const Vec3 black = rgb_to_opp(Vec3{0, 0, 0});
  for (double v : black) EXPECT_EQ(v, 0.0);
  const Vec3 blue = rgb_to_opp(Vec3{0, 0, 1});
  EXPECT_NEAR(blue[2], -2.0 / std::sqrt(6.0), 1e-15);
}

TEST(Opponent, RoundTripAndOrthonormality) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 a{u(rng), u(rng), u(rng)}, b{u(rng), u(rng), u(rng)};
    const Vec3 back = opp_to_rgb(rgb_to_opp(a));
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(back[k], a[k], 1e-12);
    const Vec3 oa = rgb_to_opp(a), ob = rgb_to_opp(b);
    double d_rgb = 0, d_opp = 0;
    for (int k = 0; k < 3; ++k) {
      d_rgb += (a[k] - b[k]) * (a[k] - b[k]);
      d_opp += (oa[k] - ob[k]) * (oa[k] - ob[k]);
    }
    EXPECT_NEAR(d_rgb, d_opp, 1e-12);
  }
}

TEST(Opponent, ImageConversionRejectsOutOfRange) {
  RgbImageD img(2, 2, 0.5);
  EXPECT_EQ(rgb_to_opp(img).points.size(), 4u);
  img.at(1, 1, 2) = 1.5;
  EXPECT_THROW(rgb_to_opp(img), ArgumentError);
}

TEST(Pca, MatchesDenseEigenSolver) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> uw(0.1, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 10 + static_cast<int>(rng() % 491);
    OppPixelCloud cloud;
    cloud.points = oracle::random_cloud(rng, n);
    for (int i = 0; i < n; ++i) cloud.weights.push_back(uw(rng));
    const PcaAxis pca = weighted_pca_axis(cloud);
    const Eigen::Vector3d ref = oracle::dense_weighted_axis(cloud.points, cloud.weights);
    EXPECT_GE(abs_cos(pca.axis, ref), 1.0 - 1e-6);
    EXPECT_NEAR(std::hypot(pca.axis[0], pca.axis[1], pca.axis[2]), 1.0, 1e-12);
    EXPECT_FALSE(pca.degenerate);
  }
}

TEST(Pca, UniformWeightsMatchSvd) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 10 + static_cast<int>(rng() % 491);
    OppPixelCloud cloud;
    cloud.points = oracle::random_cloud(rng, n);
    cloud.weights.assign(n, 1.0);
    const PcaAxis pca = weighted_pca_axis(cloud);
    const Eigen::Vector3d ref = oracle::svd_axis(cloud.points);
    EXPECT_NEAR(abs_cos(pca.axis, ref), 1.0, 1e-9);
  }
}

TEST(Pca, CanonicalSignAndScaleInvariance) {
  std::mt19937_64 rng(4);
  OppPixelCloud cloud;
  cloud.points = oracle::random_cloud(rng, 100);
  cloud.weights.assign(100, 0.5);
  const PcaAxis a = weighted_pca_axis(cloud);
  for (auto& w : cloud.weights) w *= 37.0;
  const PcaAxis b = weighted_pca_axis(cloud);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.axis[k], b.axis[k], 1e-12);
  const double first = std::abs(a.axis[0]) > 0 ? a.axis[0] : (std::abs(a.axis[1]) > 0 ? a.axis[1] : a.axis[2]);
  EXPECT_GT(first, 0.0);
}

TEST(Pca, IntensityOnlyPairGivesIntensityAxis) {
  OppPixelCloud cloud;
  cloud.points = {{0.2, 0.1, -0.3}, {0.9, 0.1, -0.3}};
  cloud.weights = {1.0, 1.0};
  const PcaAxis pca = weighted_pca_axis(cloud);
  EXPECT_NEAR(pca.axis[0], 1.0, 1e-12);
  EXPECT_NEAR(pca.axis[1], 0.0, 1e-12);
  EXPECT_NEAR(pca.axis[2], 0.0, 1e-12);
  EXPECT_NEAR(color_selectivity_index(pca.axis), 0.0, 1e-9);
}

TEST(Pca, DegenerateCloud) {
  OppPixelCloud cloud;
  cloud.points.assign(5, {0.5, 0.1, 0.1});
  cloud.weights.assign(5, 1.0);
  EXPECT_TRUE(weighted_pca_axis(cloud).degenerate);
}

TEST(Pca, JacobiEigenMatchesEigen) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::Matrix3d a;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) a(i, j) = g(rng);
    }
    const Eigen::Matrix3d s = a * a.transpose();
    Mat3 m;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) m[i][j] = s(i, j);
    }
    const SymmetricEigen ours = eigen_symmetric3(m);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> ref(s);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(ours.values[k], ref.eigenvalues()(2 - k), 1e-9);
  }
}

TEST(Alpha, AnalyticPoints) {
  EXPECT_NEAR(color_selectivity_index({1, 0, 0}), 0.0, 1e-12);
  EXPECT_NEAR(color_selectivity_index({-1, 0, 0}), 0.0, 1e-12);
  EXPECT_NEAR(color_selectivity_index({0, 1, 0}), 1.0, 1e-12);
  EXPECT_NEAR(color_selectivity_index({0, 0.6, -0.8}), 1.0, 1e-12);
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(color_selectivity_index({h, h, 0}), 0.5, 1e-12);
  EXPECT_NEAR(color_selectivity_index({-h, 0, h}), 0.5, 1e-12);
  for (double alpha : {0.0, 0.1, 0.4, 0.73, 1.0}) {
    for (double hue : {0.0, 45.0, 200.0}) {
      EXPECT_NEAR(color_selectivity_index(axis_at(alpha, hue)), alpha, 1e-9);
    }
  }
}

TEST(Hue, AnalyticPoints) {
  EXPECT_NEAR(hue_angle({0.5, 1, 0}).degrees, 0.0, 1e-12);
  EXPECT_NEAR(hue_angle({0.5, 0, 1}).degrees, 90.0, 1e-12);
  EXPECT_NEAR(hue_angle({0.5, -1, 0}).degrees, 180.0, 1e-12);
  EXPECT_NEAR(hue_angle({0.5, 0, -1}).degrees, 270.0, 1e-12);
  EXPECT_TRUE(hue_angle({1, 0, 0}).achromatic);
  EXPECT_FALSE(hue_angle({1, 1e-3, 0}).achromatic);
  for (double hue = 0.0; hue < 360.0; hue += 7.5) {
    EXPECT_NEAR(hue_angle(axis_at(0.8, hue)).degrees, hue, 1e-9);
  }
}

TEST(Hue, OrientationFollowsMeanChroma) {
  const Vec3 axis{0.3, -0.7, -0.2};
  const Vec3 flipped = orient_towards_chroma(axis, {0.5, 0.4, 0.1});
  EXPECT_EQ(flipped, (Vec3{-0.3, 0.7, 0.2}));
  EXPECT_EQ(orient_towards_chroma(axis, {0.5, -0.4, 0.0}), axis);
  EXPECT_EQ(orient_towards_chroma(axis, {0.5, 0.0, 0.0}), axis);
}

TEST(ColorSelectivity, RedPatchOnGray) {
  RgbImageD img(9, 9, 0.5);
  for (int r = 3; r < 6; ++r) {
    for (int c = 3; c < 6; ++c) {
      img.at(r, c, 0) = 0.9;
      img.at(r, c, 1) = 0.2;
      img.at(r, c, 2) = 0.2;
    }
  }
  const ColorSelectivity cs = color_selectivity(nf_from(img), zero_std(9, 9));
  EXPECT_FALSE(cs.degenerate);
  EXPECT_GT(cs.alpha, 0.4);
  // Direction from gray to the patch color, in opponent space.
  const Vec3 d = rgb_to_opp(Vec3{0.4, -0.3, -0.3});
  const double expected = std::atan2(d[2], d[1]) * 180.0 / std::numbers::pi;
  EXPECT_NEAR(cs.hue.degrees, expected < 0 ? expected + 360 : expected, 1e-6);
}

TEST(ColorSelectivity, GrayPatchIsAchromatic) {
  RgbImageD img(9, 9, 0.5);
  for (int r = 2; r < 7; ++r) {
    for (int c = 2; c < 7; ++c) {
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = 0.1;
    }
  }
  const ColorSelectivity cs = color_selectivity(nf_from(img), zero_std(9, 9));
  EXPECT_NEAR(cs.alpha, 0.0, 1e-9);
  EXPECT_TRUE(cs.hue.achromatic);
}

TEST(ColorSelectivity, FlatNfIsDegenerate) {
  const ColorSelectivity cs = color_selectivity(nf_from(RgbImageD(4, 4, 0.3)), zero_std(4, 4));
  EXPECT_TRUE(cs.degenerate);
  EXPECT_EQ(cs.alpha, 0.0);
  EXPECT_THROW(color_selectivity(nf_from(RgbImageD(4, 4, 0.3)), zero_std(5, 4)), ArgumentError);
}

TEST(ColorSelectivity, InvariantToUniformStdAndUncoveredPixels) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RgbImageD img(6, 6);
  for (auto& v : img.data()) v = u(rng);
  const NeuronFeature nf = nf_from(img);
  PixelStdMap s = zero_std(6, 6);
  const ColorSelectivity a = color_selectivity(nf, s);
  s.std.assign(36, 0.25);
  const ColorSelectivity b = color_selectivity(nf, s);
  EXPECT_NEAR(a.alpha, b.alpha, 1e-12);
  EXPECT_NEAR(a.hue.degrees, b.hue.degrees, 1e-9);

  NeuronFeature partly = nf;
  partly.coverage[0] = 0;
  for (int ch = 0; ch < 3; ++ch) partly.pixels.at(0, 0, ch) = ch == 0 ? 1.0 : 0.0;
  EXPECT_EQ(nf_color_cloud(partly, s).points.size(), 35u);
}

TEST(ColorSelectivity, NoisyPixelsCountLess) {
  // Half the pixels vary along red-green, half along intensity. The noisy
  // half should lose the vote.
  RgbImageD img(2, 8);
  PixelStdMap s = zero_std(2, 8);
  for (int c = 0; c < 8; ++c) {
    const double t = c / 7.0;
    img.at(0, c, 0) = 0.5 + 0.4 * (t - 0.5);
    img.at(0, c, 1) = 0.5 - 0.4 * (t - 0.5);
    img.at(0, c, 2) = 0.5;
    for (int ch = 0; ch < 3; ++ch) img.at(1, c, ch) = 0.5 + 0.8 * (t - 0.5);
  }
  for (int c = 0; c < 8; ++c) s.std[c] = 0.5;
  EXPECT_LT(color_selectivity(nf_from(img), s).alpha, 0.4);
  for (int c = 0; c < 8; ++c) {
    s.std[c] = 0.0;
    s.std[8 + c] = 0.5;
  }
  EXPECT_GT(color_selectivity(nf_from(img), s).alpha, 0.6);
}
