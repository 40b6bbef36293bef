#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance suite. Each one takes a different route to the answer than the
// library code it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "neuroscope/colorsel.hpp"
#include "neuroscope/geometry.hpp"
#include "neuroscope/manifest.hpp"
#include "neuroscope/ranking.hpp"

namespace oracle {

using neuroscope::ActivationTable;
using neuroscope::ArchitectureSpec;
using neuroscope::GeometryOp;
using neuroscope::OpKind;

/// Input pixel interval [lo, hi] that unit `unit` of `layer` depends on,
/// found by walking the ops backwards one at a time.
inline std::pair<long, long> dependency_interval(const ArchitectureSpec& arch,
                                                 const std::string& layer, long unit) {
  std::size_t end = 0;
  for (std::size_t i = 0; i < arch.ops.size(); ++i) {
    if (arch.ops[i].kind == OpKind::kConvolution && arch.ops[i].name == layer) end = i + 1;
  }
  long lo = unit, hi = unit;
  for (std::size_t i = end; i-- > 0;) {
    const auto& op = arch.ops[i];
    lo = lo * op.stride - op.pad;
    hi = hi * op.stride - op.pad + op.kernel - 1;
  }
  return {lo, hi};
}

struct BruteRF {
  long size, jump, start;
  double offset;
};

inline BruteRF brute_receptive_field(const ArchitectureSpec& arch, const std::string& layer) {
  const auto [lo0, hi0] = dependency_interval(arch, layer, 0);
  const auto [lo1, hi1] = dependency_interval(arch, layer, 1);
  (void)hi1;
  return {hi0 - lo0 + 1, lo1 - lo0, lo0, (lo0 + hi0) / 2.0};
}

inline ArchitectureSpec random_architecture(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_ops(1, 6), k(1, 7), s(1, 3), p(0, 3), coin(0, 1);
  ArchitectureSpec arch;
  arch.name = "random";
  arch.input_size = {512, 512};
  const int n = n_ops(rng);
  int conv = 0;
  for (int i = 0; i < n; ++i) {
    GeometryOp op;
    const bool last = i == n - 1;
    op.kind = (last || coin(rng)) ? OpKind::kConvolution : OpKind::kPooling;
    op.kernel = k(rng);
    op.stride = s(rng);
    op.pad = p(rng);
    if (op.kind == OpKind::kConvolution) op.name = "c" + std::to_string(++conv);
    arch.ops.push_back(op);
  }
  return arch;
}

/// Dominant eigenvector of the explicitly assembled weighted covariance,
/// via Eigen's self-adjoint solver.
inline Eigen::Vector3d dense_weighted_axis(const std::vector<neuroscope::Vec3>& pts,
                                           const std::vector<double>& w) {
  const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd wv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = pts[i][j];
    wv(i) = w[i];
  }
  const double total = wv.sum();
  const Eigen::RowVector3d mean = (wv.transpose() * x) / total;
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  const Eigen::Matrix3d cov = centered.transpose() * wv.asDiagonal() * centered / total;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  return solver.eigenvectors().col(2);
}

/// First right singular vector of the centered, unweighted data matrix.
inline Eigen::Vector3d svd_axis(const std::vector<neuroscope::Vec3>& pts) {
  const Eigen::Index n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd x(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = pts[i][j];
  }
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  return svd.matrixV().col(0);
}

/// Anisotropic Gaussian cloud with a random orientation and a clear gap
/// between its leading variances.
inline std::vector<neuroscope::Vec3> random_cloud(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Eigen::Matrix3d rot =
      Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng)).normalized().toRotationMatrix();
  const Eigen::Vector3d scale(1.0 + 2.0 * u(rng), 0.3 + 0.3 * u(rng), 0.05 + 0.2 * u(rng));
  const Eigen::Vector3d shift(g(rng), g(rng), g(rng));
  std::vector<neuroscope::Vec3> pts(n);
  for (auto& p : pts) {
    const Eigen::Vector3d v = rot * Eigen::Vector3d(g(rng), g(rng), g(rng)).cwiseProduct(scale) + shift;
    p = {v(0), v(1), v(2)};
  }
  return pts;
}

/// Ranking by definition: keep every image with a / a_max >= min_ratio and
/// a > 0, order by activation descending then id ascending, truncate.
inline std::vector<int> filter_sort_ranking(const ActivationTable& table, int neuron, int n_max,
                                            double min_ratio) {
  const auto row = table.row(neuron);
  float a_max = row[0];
  for (float v : row) a_max = std::max(a_max, v);
  std::vector<int> kept;
  for (int i = 0; i < static_cast<int>(row.size()); ++i) {
    const double w = static_cast<double>(row[i]) / a_max;
    if (row[i] > 0.0f && w >= min_ratio) kept.push_back(i);
  }
  std::stable_sort(kept.begin(), kept.end(), [&](int a, int b) { return row[a] > row[b]; });
  if (static_cast<int>(kept.size()) > n_max) kept.resize(n_max);
  return kept;
}

/// Table with coarse random values so that ties occur.
inline ActivationTable random_table(std::mt19937_64& rng, int neurons, int images,
                                    int levels = 50) {
  ActivationTable t("layer", neurons, images);
  std::uniform_int_distribution<int> level(0, levels), pos(0, 12);
  for (int n = 0; n < neurons; ++n) {
    for (int i = 0; i < images; ++i) {
      t.value(n, i) = static_cast<float>(level(rng)) / levels;
      t.argmax(n, i) = {static_cast<std::uint16_t>(pos(rng)), static_cast<std::uint16_t>(pos(rng))};
    }
    t.value(n, static_cast<int>(rng() % images)) = 1.0f;
  }
  return t;
}

/// Smallest number of classes, over all subsets, whose total frequency
/// reaches th. Exponential; meant for at most ~14 classes.
inline int min_covering_subset(const std::vector<double>& freqs, double th) {
  const int k = static_cast<int>(freqs.size());
  int best = k;
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    const int size = __builtin_popcount(mask);
    if (size >= best) continue;
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
      if (mask & (1u << c)) sum += freqs[c];
    }
    if (sum >= th - 1e-12) best = size;
  }
  return best;
}

}  // namespace oracle
