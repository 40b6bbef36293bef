#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace neuroscope {

inline constexpr int kManifestVersion = 1;
inline constexpr std::string_view kManifestFileName = "manifest.nsx";
inline constexpr std::string_view kActivationExtension = ".actb";
inline constexpr std::array<char, 8> kActivationMagic = {'N', 'S', 'X', 'A',
                                                         'C', 'T', 'B', '1'};

struct SpatialDims {
  int rows = 0;
  int cols = 0;
  bool operator==(const SpatialDims&) const = default;
};

struct LayerEntry {
  std::string name;
  int neuron_count = 0;
  SpatialDims spatial_dims;
  std::string activation_file;  // relative to the manifest directory

  bool operator==(const LayerEntry&) const = default;
};

struct ImageRecord {
  int image_id = 0;
  std::string path;  // relative to the manifest directory
  int class_index = 0;

  bool operator==(const ImageRecord&) const = default;
};

struct DatasetManifest {
  int version = kManifestVersion;
  // Which activations the extractor exported ("pre_relu", "post_relu", ...).
  // Stored verbatim; the engine does not interpret it.
  std::string activation_convention = "pre_relu";
  // Free-form description of the image preprocessing applied upstream.
  std::string preprocessing = "none";
  std::vector<LayerEntry> layers;
  std::vector<ImageRecord> images;
  std::vector<std::string> class_names;
  std::optional<std::string> ontology_path;

  // Directory the manifest was read from; relative paths resolve against it.
  // Not serialized and not part of equality.
  std::filesystem::path root;

  int image_count() const { return static_cast<int>(images.size()); }
  const LayerEntry& layer(std::string_view name) const;
  std::optional<std::size_t> layer_index(std::string_view name) const;
  std::filesystem::path resolve(std::string_view relative) const;

  bool operator==(const DatasetManifest& other) const;
};

struct ArgmaxPos {
  std::uint16_t row = 0;
  std::uint16_t col = 0;
  bool operator==(const ArgmaxPos&) const = default;
};

/// Per-(neuron, image) spatial maximum of one layer, neuron-major.
class ActivationTable {
 public:
  ActivationTable() = default;
  ActivationTable(std::string layer, int neuron_count, int image_count);

  const std::string& layer() const { return layer_; }
  int neuron_count() const { return neuron_count_; }
  int image_count() const { return image_count_; }

  float value(int neuron, int image) const { return values_[offset(neuron, image)]; }
  float& value(int neuron, int image) { return values_[offset(neuron, image)]; }
  ArgmaxPos argmax(int neuron, int image) const { return argmax_[offset(neuron, image)]; }
  ArgmaxPos& argmax(int neuron, int image) { return argmax_[offset(neuron, image)]; }

  /// All image activations of one neuron, indexed by image id.
  std::span<const float> row(int neuron) const {
    return std::span<const float>(values_).subspan(offset(neuron, 0), image_count_);
  }
  std::span<float> row(int neuron) {
    return std::span<float>(values_).subspan(offset(neuron, 0), image_count_);
  }

  std::span<const float> values() const { return values_; }
  std::span<const ArgmaxPos> argmax_positions() const { return argmax_; }

  bool operator==(const ActivationTable&) const = default;

 private:
  std::size_t offset(int neuron, int image) const {
    return static_cast<std::size_t>(neuron) * image_count_ + image;
  }

  std::string layer_;
  int neuron_count_ = 0;
  int image_count_ = 0;
  std::vector<float> values_;
  std::vector<ArgmaxPos> argmax_;
};

/// Expected byte size of an activation payload.
std::uintmax_t activation_file_size(int neuron_count, int image_count);

/// Structural checks that need no file access: unique layer names, positive
/// dims, image ids equal to positions, class indices in range.
void validate_structure(const DatasetManifest& manifest);

/// Checks a table against its layer entry: shape, finiteness, and argmax
/// coordinates within the layer's spatial dims.
void validate_table(const LayerEntry& layer, int image_count,
                    const ActivationTable& table);

/// Reads and validates a manifest. `path` may be the manifest file itself or
/// the directory holding manifest.nsx. Activation payloads are checked for
/// presence and exact size; image files for presence.
DatasetManifest read_manifest(const std::filesystem::path& path);

/// Writes manifest.nsx and one payload per layer into `directory`. Tables
/// must be given in manifest layer order. Everything is validated before any
/// file is touched.
void write_manifest(const DatasetManifest& manifest,
                    std::span<const ActivationTable> tables,
                    const std::filesystem::path& directory);

ActivationTable load_activations(const DatasetManifest& manifest,
                                 std::string_view layer);

void write_activations(const ActivationTable& table,
                       const std::filesystem::path& path);

/// Header text exactly as write_manifest emits it.
std::string format_manifest(const DatasetManifest& manifest);
DatasetManifest parse_manifest(std::string_view text);

}  // namespace neuroscope
