#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "neuroscope/classsel.hpp"
#include "neuroscope/colorsel.hpp"
#include "neuroscope/geometry.hpp"
#include "neuroscope/manifest.hpp"
#include "neuroscope/nf.hpp"
#include "neuroscope/ranking.hpp"

namespace neuroscope {

/// Thread-safe decoded-image cache keyed by image id. When `capacity`
/// images are held the cache is flushed before the next insert.
class ImageCache {
 public:
  explicit ImageCache(const DatasetManifest& manifest, std::size_t capacity = 4096);

  /// Seeds the cache from memory (fixtures) instead of decoding files.
  void preload(int image_id, RgbImage image);

  std::shared_ptr<const RgbImage> get(int image_id);

 private:
  const DatasetManifest& manifest_;
  std::size_t capacity_;
  std::mutex mutex_;
  std::map<int, std::shared_ptr<const RgbImage>> images_;
};

struct AnalysisOptions {
  RankingOptions ranking;
  NfNormalization nf_normalization = NfNormalization::kNMax;
  PadPolicy pad_policy = PadPolicy::kZero;
  double th = kDefaultCoverageThreshold;
  bool compute_nf = true;     // needed for the color index
  bool compute_color = true;
  bool compute_class = true;
};

/// Everything derived for one neuron. Optional members are empty when the
/// neuron is dead or the index was not requested.
struct NeuronAnalysis {
  std::string layer;
  int neuron = 0;
  bool dead = false;
  std::optional<NeuronRanking> ranking;
  std::optional<NeuronFeature> nf;
  std::optional<PixelStdMap> stds;
  std::optional<ColorSelectivity> color;
  std::optional<ClassDistribution> classes;
  std::optional<ClassSelectivity> class_selectivity;  // empty when N == 1
};

struct LayerAnalysis {
  std::string layer;
  RFGeometry rf;
  std::vector<NeuronAnalysis> neurons;
};

/// Crops the ranked images of a neuron at their argmax positions.
std::vector<CroppedImage> ranked_crops(const NeuronRanking& ranking, const RFGeometry& rf,
                                       ImageCache& images, PadPolicy pad_policy);

LayerAnalysis analyze_layer(const DatasetManifest& manifest, const ActivationTable& table,
                            const ArchitectureSpec& arch, ImageCache& images,
                            const AnalysisOptions& options = {});

/// Per-neuron summary row shared by all report tables.
struct NeuronRecord {
  std::string layer;
  int layer_index = 0;
  int neuron = 0;
  bool dead = false;
  std::optional<double> alpha;
  std::optional<HueAngle> hue;
  std::optional<double> gamma;
  std::optional<ClassSelectivity> class_selectivity;
  std::optional<double> auc_fraction;
};

/// Which indexes a record set carries; rank_table refuses keys that were
/// never computed.
struct RecordSet {
  std::vector<NeuronRecord> records;
  bool has_alpha = false;
  bool has_gamma = false;
  bool has_auc = false;
};

RecordSet summarize(const std::vector<LayerAnalysis>& layers,
                    const std::vector<ActivationCurve>* curves = nullptr);

}  // namespace neuroscope
