#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neuroscope/manifest.hpp"

namespace neuroscope {

inline constexpr int kDefaultNMax = 100;
inline constexpr double kDefaultMinRatio = 0.70;
inline constexpr int kDefaultCurveLength = 400;
inline constexpr double kDefaultDeadEpsilon = 0.0;

struct RankingOptions {
  int n_max = kDefaultNMax;
  double min_ratio = kDefaultMinRatio;
  double dead_epsilon = kDefaultDeadEpsilon;
};

struct RankedImage {
  int image_id = 0;
  float activation = 0.0f;
  double weight = 0.0;  // activation / a_max
  ArgmaxPos pos;
};

struct NeuronRanking {
  std::string layer;
  int neuron = 0;
  float a_max = 0.0f;
  std::vector<RankedImage> entries;  // weight nonincreasing, ties by image_id
};

/// Top images of one neuron: those with weight >= min_ratio (and > 0), the
/// n_max largest kept. Returns nullopt for a dead neuron (a_max <=
/// dead_epsilon).
std::optional<NeuronRanking> rank_neuron(const ActivationTable& table, int neuron,
                                         const RankingOptions& options = {});

struct ActivationCurve {
  std::string layer;
  int neuron = 0;
  std::vector<double> weights;  // first K normalized activations, clipped at 0
  double auc = 0.0;             // plain sum of `weights`
  double auc_fraction = 0.0;    // auc / network-wide maximum auc
};

/// Curve of one neuron with auc_fraction left at 0; the fraction needs the
/// network maximum (see normalize_curves). Throws ArgumentError for a dead
/// neuron or K outside [1, image_count].
ActivationCurve activation_curve(const ActivationTable& table, int neuron, int k,
                                 double dead_epsilon = kDefaultDeadEpsilon);

/// Sets auc_fraction on every curve relative to the largest auc among them.
void normalize_curves(std::span<ActivationCurve> curves);

/// Curves for every live neuron of every table, normalized network-wide.
std::vector<ActivationCurve> activation_curves(std::span<const ActivationTable> tables,
                                               int k,
                                               double dead_epsilon = kDefaultDeadEpsilon);

std::vector<bool> detect_dead(const ActivationTable& table,
                              double dead_epsilon = kDefaultDeadEpsilon);

/// CSV columns: layer, neuron, rank, image_id, activation, weight, row, col.
void write_rankings_csv(std::span<const NeuronRanking> rankings,
                        const std::filesystem::path& path);
std::vector<NeuronRanking> read_rankings_csv(const std::filesystem::path& path);

}  // namespace neuroscope
