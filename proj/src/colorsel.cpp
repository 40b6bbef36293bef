#include "neuroscope/colorsel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "neuroscope/errors.hpp"

namespace neuroscope {

namespace {

const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;
const double kInvSqrt3 = std::numbers::inv_sqrt3;
const double kInvSqrt6 = 1.0 / std::sqrt(6.0);

// Relative off-diagonal Frobenius norm at which Jacobi sweeps stop. Jacobi
// converges quadratically, so the last sweep usually lands far below this.
constexpr double kJacobiTolerance = 1e-15;
constexpr int kJacobiMaxSweeps = 100;

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 canonical_sign(Vec3 v) {
  for (double c : v) {
    if (std::abs(c) > 1e-12) {
      if (c < 0) {
        for (auto& x : v) x = -x;
      }
      break;
    }
  }
  return v;
}

}  // namespace

Vec3 rgb_to_opp(const Vec3& rgb) {
  const auto [r, g, b] = rgb;
  return {(r + g + b) * kInvSqrt3, (r - g) * kInvSqrt2, (r + g - 2.0 * b) * kInvSqrt6};
}

Vec3 opp_to_rgb(const Vec3& opp) {
  const auto [o1, o2, o3] = opp;
  return {o1 * kInvSqrt3 + o2 * kInvSqrt2 + o3 * kInvSqrt6,
          o1 * kInvSqrt3 - o2 * kInvSqrt2 + o3 * kInvSqrt6,
          o1 * kInvSqrt3 - 2.0 * o3 * kInvSqrt6};
}

OppPixelCloud rgb_to_opp(const RgbImageD& image) {
  OppPixelCloud cloud;
  const auto data = image.data();
  const std::size_t n = data.size() / 3;
  cloud.points.reserve(n);
  for (std::size_t p = 0; p < n; ++p) {
    const Vec3 rgb{data[3 * p], data[3 * p + 1], data[3 * p + 2]};
    for (double v : rgb) {
      if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("RGB value outside [0, 1]");
    }
    cloud.points.push_back(rgb_to_opp(rgb));
  }
  cloud.weights.assign(n, 1.0);
  return cloud;
}

SymmetricEigen eigen_symmetric3(const Mat3& matrix) {
  Mat3 a = matrix;
  Mat3 v{};
  for (int i = 0; i < 3; ++i) v[i][i] = 1.0;

  constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    const double off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    const double diag = a[0][0] * a[0][0] + a[1][1] * a[1][1] + a[2][2] * a[2][2];
    if (off == 0.0 || std::sqrt(off) <= kJacobiTolerance * std::sqrt(diag + 2.0 * off)) break;

    for (const auto& pq : pairs) {
      const int p = pq[0], q = pq[1];
      const double apq = a[p][q];
      if (apq == 0.0) continue;
      const double theta = (a[q][q] - a[p][p]) / (2.0 * apq);
      const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
      const double c = 1.0 / std::sqrt(t * t + 1.0);
      const double s = t * c;

      a[p][p] -= t * apq;
      a[q][q] += t * apq;
      a[p][q] = a[q][p] = 0.0;
      const int r = 3 - p - q;
      const double arp = a[r][p], arq = a[r][q];
      a[r][p] = a[p][r] = c * arp - s * arq;
      a[r][q] = a[q][r] = s * arp + c * arq;
      for (int k = 0; k < 3; ++k) {
        const double vkp = v[k][p], vkq = v[k][q];
        v[k][p] = c * vkp - s * vkq;
        v[k][q] = s * vkp + c * vkq;
      }
    }
  }

  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] > a[j][j]; });
  SymmetricEigen out;
  for (int i = 0; i < 3; ++i) {
    out.values[i] = a[order[i]][order[i]];
    for (int k = 0; k < 3; ++k) out.vectors[k][i] = v[k][order[i]];
  }
  return out;
}

Mat3 weighted_covariance(const OppPixelCloud& cloud, Vec3* mean_out) {
  if (cloud.points.size() != cloud.weights.size()) {
    throw ArgumentError("cloud needs one weight per point");
  }
  double total = 0.0;
  Vec3 mean{};
  for (std::size_t p = 0; p < cloud.points.size(); ++p) {
    const double w = cloud.weights[p];
    if (!(w > 0.0) || !std::isfinite(w)) throw ArgumentError("PCA weights must be positive and finite");
    total += w;
    for (int i = 0; i < 3; ++i) mean[i] += w * cloud.points[p][i];
  }
  if (!(total > 0.0)) throw ArgumentError("PCA needs positive total weight");
  for (auto& m : mean) m /= total;

  Mat3 cov{};
  for (std::size_t p = 0; p < cloud.points.size(); ++p) {
    const double w = cloud.weights[p];
    Vec3 d;
    for (int i = 0; i < 3; ++i) d[i] = cloud.points[p][i] - mean[i];
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) cov[i][j] += w * d[i] * d[j];
    }
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = i; j < 3; ++j) {
      cov[i][j] /= total;
      cov[j][i] = cov[i][j];
    }
  }
  if (mean_out) *mean_out = mean;
  return cov;
}

PcaAxis weighted_pca_axis(const OppPixelCloud& cloud) {
  if (cloud.points.size() < 2) throw ArgumentError("PCA needs at least two points");
  PcaAxis out;
  const Mat3 cov = weighted_covariance(cloud, &out.mean);
  const SymmetricEigen eig = eigen_symmetric3(cov);
  out.eigenvalues = eig.values;

  const double mean2 = out.mean[0] * out.mean[0] + out.mean[1] * out.mean[1] +
                       out.mean[2] * out.mean[2];
  if (eig.values[0] <= 1e-24 * mean2 || eig.values[0] <= 0.0) {
    out.degenerate = true;
    out.axis = {1.0, 0.0, 0.0};
    return out;
  }
  Vec3 axis{eig.vectors[0][0], eig.vectors[1][0], eig.vectors[2][0]};
  const double n = norm(axis);
  for (auto& x : axis) x /= n;
  out.axis = canonical_sign(axis);
  return out;
}

double color_selectivity_index(const Vec3& axis) {
  const double n = norm(axis);
  if (!(n > 0.0)) throw ArgumentError("axis must be nonzero");
  const double cosine = std::clamp(std::abs(axis[0]) / n, 0.0, 1.0);
  const double degrees = std::acos(cosine) * 180.0 / std::numbers::pi;
  return degrees / 90.0;
}

HueAngle hue_angle(const Vec3& axis, double tolerance) {
  HueAngle h;
  h.chroma_magnitude = std::hypot(axis[1], axis[2]);
  if (h.chroma_magnitude <= tolerance) {
    h.achromatic = true;
    h.degrees = 0.0;
    return h;
  }
  h.achromatic = false;
  double deg = std::atan2(axis[2], axis[1]) * 180.0 / std::numbers::pi;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  h.degrees = deg;
  return h;
}

Vec3 orient_towards_chroma(const Vec3& axis, const Vec3& reference) {
  if (std::hypot(reference[1], reference[2]) <= kAchromaticTolerance) return axis;
  const double dot = axis[1] * reference[1] + axis[2] * reference[2];
  if (dot >= 0.0) return axis;
  return {-axis[0], -axis[1], -axis[2]};
}

OppPixelCloud nf_color_cloud(const NeuronFeature& nf, const PixelStdMap& stds) {
  if (stds.rows != nf.rows() || stds.cols != nf.cols()) {
    throw ArgumentError("std map does not match the NF dimensions");
  }
  OppPixelCloud cloud;
  for (int r = 0; r < nf.rows(); ++r) {
    for (int c = 0; c < nf.cols(); ++c) {
      if (nf.coverage_at(r, c) == 0) continue;
      Vec3 rgb{nf.pixels.at(r, c, 0), nf.pixels.at(r, c, 1), nf.pixels.at(r, c, 2)};
      for (auto& x : rgb) x = std::clamp(x, 0.0, 1.0);
      cloud.points.push_back(rgb_to_opp(rgb));
      cloud.weights.push_back(1.0 / (stds.at(r, c) + kPcaWeightEpsilon));
    }
  }
  return cloud;
}

ColorSelectivity color_selectivity(const NeuronFeature& nf, const PixelStdMap& stds) {
  const OppPixelCloud cloud = nf_color_cloud(nf, stds);
  ColorSelectivity out;
  if (cloud.points.size() < 2) {
    out.degenerate = true;
    return out;
  }
  const PcaAxis pca = weighted_pca_axis(cloud);
  out.axis = pca.axis;
  out.degenerate = pca.degenerate;
  if (pca.degenerate) return out;
  out.alpha = color_selectivity_index(pca.axis);
  out.hue = hue_angle(orient_towards_chroma(pca.axis, pca.mean));
  return out;
}

}  // namespace neuroscope
