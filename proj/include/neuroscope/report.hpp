#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neuroscope/analysis.hpp"
#include "neuroscope/csv.hpp"
#include "neuroscope/image.hpp"

namespace neuroscope {

// ---------------------------------------------------------------------------
// Ranked tables

enum class SortKey { kAlpha, kGamma, kAuc, kJoint };

SortKey parse_sort_key(std::string_view text);
std::string_view to_string(SortKey key);

/// Descending by key, ties by (layer position, neuron). Neurons without a
/// value for the key (dead, singular) are left out. The joint key is
/// min(alpha, gamma). Throws ArgumentError if the record set never computed
/// the key.
csv::Table rank_table(const RecordSet& records, SortKey key);

/// layer, neuron, alpha, hue_angle, chroma_magnitude, dead
csv::Table color_table(const RecordSet& records);
/// layer, neuron, gamma, M, then class_k / f_k for the first five covering
/// classes.
csv::Table class_table(const RecordSet& records, std::span<const std::string> class_names);

// ---------------------------------------------------------------------------
// Histograms

enum class Palette { kReddish, kBluish };

struct HistogramSpec {
  std::string index_name;  // "alpha" or "gamma"
  std::vector<double> bin_edges{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::vector<std::string> layers;
  std::vector<std::vector<int>> counts;  // [layer][bin]
  std::vector<int> dead;                 // [layer]
  Palette palette = Palette::kReddish;
};

/// Bins are [e_i, e_{i+1}) except the last, which includes 1. Throws
/// ArgumentError for edges that do not partition [0, 1].
int bin_of(std::span<const double> edges, double value);

/// Counts alpha (or gamma) per layer so that bins + dead = neuron count.
/// A live neuron with a single ranked image has no defined gamma; it is
/// counted in the top bin since its only label is trivially one class.
HistogramSpec build_histogram(const RecordSet& records, std::span<const std::string> layers,
                              SortKey index, std::vector<double> bin_edges = {});

/// Writes the stacked-bar SVG and the exact-count CSV (layer, bin, lower,
/// upper, count; one "dead" row per layer). Throws ArgumentError if a layer
/// has no neurons at all.
void emit_histogram(const HistogramSpec& spec, const std::filesystem::path& svg_path,
                    const std::filesystem::path& csv_path);
csv::Table histogram_table(const HistogramSpec& spec);
std::string histogram_svg(const HistogramSpec& spec);

// ---------------------------------------------------------------------------
// Hue wheel

struct HueMark {
  std::string layer;
  int ring = 0;  // 0 = innermost
  int neuron = 0;
  double hue_degrees = 0.0;
  double alpha = 0.0;
  std::string thumbnail;  // href written into the SVG
};

struct HueWheelSpec {
  std::vector<std::string> rings;  // innermost first
  double alpha_threshold = 0.40;
  std::vector<HueMark> marks;
};

struct MarkPlacement {
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
  double angle_degrees = 0.0;
};

/// Marks for every chromatic neuron with alpha >= threshold, thumbnails
/// named <layer>_<neuron>.png relative to `thumbnail_dir`.
HueWheelSpec build_hue_wheel(const RecordSet& records, std::span<const std::string> layers,
                             double alpha_threshold, const std::string& thumbnail_dir);

/// Center-relative polar placement; angle measured counterclockwise from +x.
MarkPlacement place_mark(const HueWheelSpec& spec, const HueMark& mark);

/// Thumbnail hrefs are resolved against `base_dir` and must exist.
std::string hue_wheel_svg(const HueWheelSpec& spec, const std::filesystem::path& base_dir);
void emit_hue_wheel(const HueWheelSpec& spec, const std::filesystem::path& svg_path);

// ---------------------------------------------------------------------------
// NF mosaics

struct Mosaic {
  RgbImage image;
  int grid_rows = 0;
  int grid_cols = 0;
  int cell = 0;     // side of each NF cell in pixels
  int label_h = 0;  // label strip under each cell
  int gap = 0;

  /// Top-left pixel of grid cell i (row-major).
  std::pair<int, int> cell_origin(int index) const;
};

/// Grid shape for n cells: cols = ceil(sqrt(n)), rows = ceil(n / cols).
std::pair<int, int> mosaic_grid(int n);

/// Nearest-neighbor resample of a square or rectangular image to size x size.
RgbImage resample_nearest(const RgbImageD& image, int size);

/// Each NF is resampled to `cell` (0 = largest NF side) and labeled with its
/// neuron index. Throws ArgumentError on an empty selection.
Mosaic emit_nf_mosaic(std::span<const NeuronFeature* const> nfs, std::span<const int> neurons,
                      int cell = 0);

// ---------------------------------------------------------------------------
// Tag clouds

/// JSON document with leaf and rolled-up class masses per neuron.
std::string tag_cloud_json(const std::vector<LayerAnalysis>& layers,
                           std::span<const std::string> class_names,
                           const OntologyMap* ontology);

}  // namespace neuroscope
