#pragma once

#include <array>
#include <optional>
#include <vector>

#include "neuroscope/image.hpp"
#include "neuroscope/nf.hpp"

namespace neuroscope {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

inline constexpr double kDefaultAlphaThreshold = 0.40;
inline constexpr double kPcaWeightEpsilon = 1e-4;
inline constexpr double kAchromaticTolerance = 1e-9;

/// Points in opponent space (o1 intensity, o2 red-green, o3 blue-yellow).
struct OppPixelCloud {
  std::vector<Vec3> points;
  std::vector<double> weights;
};

/// o1 = (R+G+B)/sqrt3, o2 = (R-G)/sqrt2, o3 = (R+G-2B)/sqrt6.
Vec3 rgb_to_opp(const Vec3& rgb);
Vec3 opp_to_rgb(const Vec3& opp);

/// Converts every pixel; throws ArgumentError on values outside [0, 1].
/// Weights are left at 1.
OppPixelCloud rgb_to_opp(const RgbImageD& image);

/// Symmetric 3x3 eigen-decomposition by cyclic Jacobi rotations. Eigenvalues
/// are sorted descending; column i of `vectors` pairs with values[i].
struct SymmetricEigen {
  Vec3 values{};
  Mat3 vectors{};
};
SymmetricEigen eigen_symmetric3(const Mat3& matrix);

struct PcaAxis {
  Vec3 axis{1.0, 0.0, 0.0};  // unit, first nonzero component positive
  Vec3 mean{};               // weighted mean of the cloud
  Vec3 eigenvalues{};
  bool degenerate = false;   // weighted covariance is zero
};

/// Dominant eigenvector of sum_p w_p (x_p - mu)(x_p - mu)^T / sum_p w_p.
PcaAxis weighted_pca_axis(const OppPixelCloud& cloud);

/// Weighted covariance as used by weighted_pca_axis.
Mat3 weighted_covariance(const OppPixelCloud& cloud, Vec3* mean_out = nullptr);

/// (1/90) * angle in degrees between the axis and the intensity axis, with
/// the absolute cosine so that v and -v agree.
double color_selectivity_index(const Vec3& axis);

struct HueAngle {
  double degrees = 0.0;  // in [0, 360); meaningless when achromatic
  double chroma_magnitude = 0.0;
  bool achromatic = true;
};

/// Angle of the axis projection on the (o2, o3) plane, measured from +o2
/// towards +o3.
HueAngle hue_angle(const Vec3& axis, double tolerance = kAchromaticTolerance);

struct ColorSelectivity {
  Vec3 axis{1.0, 0.0, 0.0};
  double alpha = 0.0;
  HueAngle hue;
  bool degenerate = false;
};

/// Full index for one Neuron Feature: OPP cloud of the covered NF pixels,
/// weights 1/(std + kPcaWeightEpsilon), weighted PCA, alpha and hue. For the
/// hue the axis is oriented towards the cloud's mean chromaticity, which
/// removes the eigenvector sign ambiguity.
ColorSelectivity color_selectivity(const NeuronFeature& nf, const PixelStdMap& stds);

/// Builds the weighted cloud used by color_selectivity.
OppPixelCloud nf_color_cloud(const NeuronFeature& nf, const PixelStdMap& stds);

/// Orients the axis so its chroma projection has a nonnegative dot product
/// with `reference` chroma (o2, o3); returns it unchanged if the reference
/// is negligible.
Vec3 orient_towards_chroma(const Vec3& axis, const Vec3& reference);

}  // namespace neuroscope
