#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "neuroscope/errors.hpp"
#include "neuroscope/geometry.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace neuroscope;

TEST(Geometry, VggMReceptiveFieldSizes) {
  const ArchitectureSpec arch = vgg_m_architecture();
  const std::vector<int> expected{7, 27, 75, 107, 139};
  const auto layers = arch.boundaries();
  ASSERT_EQ(layers.size(), expected.size());
  for (std::size_t i = 0; i < layers.size(); ++i) {
    EXPECT_EQ(receptive_field(arch, layers[i]).size, expected[i]) << layers[i];
  }
}

TEST(Geometry, ShippedArchitectureFileMatchesEmbeddedCopy) {
  const ArchitectureSpec file = read_architecture(std::string(NEUROSCOPE_DATA_DIR) + "/vgg_m.arch");
  const ArchitectureSpec embedded = vgg_m_architecture();
  EXPECT_EQ(format_architecture(file), format_architecture(embedded));
}

TEST(Geometry, IdentityLayer) {
  const auto arch = parse_architecture("input 10 10\nconv id k=1 s=1 p=0\n");
  const RFGeometry rf = receptive_field(arch, "id");
  EXPECT_EQ(rf.size, 1);
  EXPECT_EQ(rf.jump, 1);
  EXPECT_EQ(rf.start, 0);
  EXPECT_EQ(rf.offset, 0.0);
  EXPECT_EQ(output_dims(arch, "id"), (SpatialDims{10, 10}));
}

TEST(Geometry, MatchesDependencyIntervalOracle) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const ArchitectureSpec arch = oracle::random_architecture(rng);
    for (const auto& layer : arch.boundaries()) {
      const RFGeometry rf = receptive_field(arch, layer);
      const auto brute = oracle::brute_receptive_field(arch, layer);
      ASSERT_EQ(rf.size, brute.size) << format_architecture(arch) << layer;
      ASSERT_EQ(rf.jump, brute.jump);
      ASSERT_EQ(rf.start, brute.start);
      ASSERT_EQ(rf.offset, brute.offset);
    }
  }
}

TEST(Geometry, ProjectionIsTranslationEquivariant) {
  const ArchitectureSpec arch = vgg_m_architecture();
  for (const auto& layer : arch.boundaries()) {
    const RFGeometry rf = receptive_field(arch, layer);
    const CropRect a = project_to_image(rf, {3, 4}, {224, 224});
    const CropRect b = project_to_image(rf, {5, 7}, {224, 224});
    EXPECT_EQ(b.top - a.top, 2 * rf.jump);
    EXPECT_EQ(b.left - a.left, 3 * rf.jump);
    EXPECT_EQ(a.rows(), rf.size);
    EXPECT_EQ(a.cols(), rf.size);
  }
}

TEST(Geometry, Conv1OriginProjection) {
  const ArchitectureSpec arch = vgg_m_architecture();
  const RFGeometry rf = receptive_field(arch, "conv1");
  EXPECT_EQ(rf.offset, 3.0);
  const CropRect r = project_to_image(rf, {0, 0}, {224, 224});
  EXPECT_EQ(r.top, 0);
  EXPECT_EQ(r.bottom, 6);
  EXPECT_EQ(r.left, 0);
  EXPECT_EQ(r.right, 6);
  EXPECT_TRUE(r.clipped.empty());
}

TEST(Geometry, Conv5OriginIsClipped) {
  const ArchitectureSpec arch = vgg_m_architecture();
  const RFGeometry rf = receptive_field(arch, "conv5");
  const CropRect r = project_to_image(rf, {0, 0}, {224, 224});
  // Padding of 1 at conv2 (jump 4) and at conv3..conv5 (jump 16).
  EXPECT_EQ(rf.start, -(4 + 3 * 16));
  EXPECT_EQ(r.top, rf.start);
  EXPECT_FALSE(r.clipped.empty());
  EXPECT_EQ(r.clipped.top, -rf.start);
  EXPECT_EQ(r.clipped.left, -rf.start);
  EXPECT_EQ(r.clipped.bottom, 0);
}

TEST(Geometry, CenterUnitCenteredForSymmetricNet) {
  const auto arch = parse_architecture("input 21 21\nconv a k=3 s=2 p=1\nconv b k=3 s=1 p=1\n");
  const SpatialDims d = output_dims(arch, "b");
  ASSERT_EQ(d.rows % 2, 1);
  const RFGeometry rf = receptive_field(arch, "b");
  const CropRect r = project_to_image(rf, {static_cast<std::uint16_t>(d.rows / 2),
                                           static_cast<std::uint16_t>(d.cols / 2)},
                                      {21, 21});
  EXPECT_EQ(r.top + r.bottom, 20);
  EXPECT_EQ(r.left + r.right, 20);
}

TEST(Geometry, CropInteriorAndOutside) {
  RgbImage img(6, 6);
  for (int r = 0; r < 6; ++r) {
    for (int c = 0; c < 6; ++c) {
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = static_cast<float>(r * 6 + c + ch) / 64.0f;
    }
  }
  CropRect inside{1, 2, 3, 4, {}};
  const CroppedImage a = crop_image(img, inside);
  EXPECT_EQ(a.rows(), 3);
  EXPECT_EQ(a.cols(), 3);
  EXPECT_TRUE(std::all_of(a.outside.begin(), a.outside.end(), [](auto v) { return v == 0; }));
  EXPECT_EQ(a.pixels.at(0, 0, 1), img.at(1, 2, 1));
  EXPECT_EQ(a.pixels.at(2, 2, 2), img.at(3, 4, 2));

  const CropRect far = project_to_image({3, 1, 0.0, 10}, {0, 0}, {6, 6});
  EXPECT_TRUE(far.fully_outside());
  const CroppedImage b = crop_image(img, far);
  EXPECT_TRUE(std::all_of(b.outside.begin(), b.outside.end(), [](auto v) { return v == 1; }));
  for (float v : b.pixels.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Geometry, ClampPaddingMatchesIndexClampOracle) {
  RgbImage img(5, 4);
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 4; ++c) {
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = static_cast<float>(100 * ch + 10 * r + c);
    }
  }
  const RFGeometry rf{6, 2, 0.0, -3};
  for (std::uint16_t pr = 0; pr < 5; ++pr) {
    for (std::uint16_t pc = 0; pc < 4; ++pc) {
      const CropRect rect = project_to_image(rf, {pr, pc}, {5, 4});
      const CroppedImage crop = crop_image(img, rect, PadPolicy::kClamp);
      const CroppedImage zero = crop_image(img, rect, PadPolicy::kZero);
      for (int r = 0; r < rect.rows(); ++r) {
        for (int c = 0; c < rect.cols(); ++c) {
          const int ir = rect.top + r, ic = rect.left + c;
          const bool out = ir < 0 || ic < 0 || ir >= 5 || ic >= 4;
          EXPECT_EQ(crop.masked(r, c), out);
          const int cr = std::clamp(ir, 0, 4), cc = std::clamp(ic, 0, 3);
          for (int ch = 0; ch < 3; ++ch) {
            EXPECT_EQ(crop.pixels.at(r, c, ch), img.at(cr, cc, ch));
            EXPECT_EQ(zero.pixels.at(r, c, ch), out ? 0.0f : img.at(ir, ic, ch));
          }
        }
      }
    }
  }
}

TEST(Geometry, ParseAndFormatRoundTrip) {
  const std::string text =
      "name demo\ninput 32 48\nconv c1 k=5 s=1 p=2\nrelu\nlrn\npool k=2 s=2 p=0\n"
      "# comment\nconv c2 k=3 s=1 p=1\n";
  const ArchitectureSpec a = parse_architecture(text);
  EXPECT_EQ(a.ops.size(), 3u);
  EXPECT_EQ(a.boundaries(), (std::vector<std::string>{"c1", "c2"}));
  EXPECT_EQ(format_architecture(parse_architecture(format_architecture(a))), format_architecture(a));
  EXPECT_EQ(output_dims(a, "c2"), (SpatialDims{16, 24}));
}

TEST(Geometry, Errors) {
  EXPECT_THROW(parse_architecture("input 8 8\nconv a k=0 s=1 p=0\n"), ValidationError);
  EXPECT_THROW(parse_architecture("input 8 8\nconv a k=3 s=1 p=0\nconv a k=3 s=1 p=0\n"),
               ValidationError);
  EXPECT_THROW(parse_architecture("input 8 8\nfrobnicate\n"), ValidationError);
  const auto a = parse_architecture("input 4 4\nconv a k=7 s=1 p=0\n");
  EXPECT_THROW(output_dims(a, "a"), ValidationError);
  EXPECT_THROW(receptive_field(a, "zzz"), ArgumentError);
  EXPECT_THROW(read_architecture("/nonexistent/arch"), IoError);
}
