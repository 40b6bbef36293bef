#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "neuroscope/image.hpp"
#include "neuroscope/manifest.hpp"

namespace neuroscope {

enum class OpKind { kConvolution, kPooling };

/// One spatial operation. Convolutions carry the name of the layer boundary
/// right after them (the activation map the manifest stores); pooling ops
/// have no name.
struct GeometryOp {
  OpKind kind = OpKind::kConvolution;
  int kernel = 1;
  int stride = 1;
  int pad = 0;
  std::string name;
};

struct ArchitectureSpec {
  std::string name;
  SpatialDims input_size;
  std::vector<GeometryOp> ops;

  std::vector<std::string> boundaries() const;
  bool has_boundary(std::string_view layer) const;
};

/// Receptive field of one unit of a layer, in input pixels.
struct RFGeometry {
  int size = 1;
  int jump = 1;
  // Input coordinate of the center of unit (0,0). Half-integral for even
  // receptive fields.
  double offset = 0.0;
  // Input coordinate of the first pixel of unit (0,0); offset - (size-1)/2.
  int start = 0;

  bool operator==(const RFGeometry&) const = default;
};

/// Rows/cols of the unclipped rectangle that fall outside the image on each
/// side.
struct ClipMask {
  int top = 0;
  int left = 0;
  int bottom = 0;
  int right = 0;

  bool empty() const { return top == 0 && left == 0 && bottom == 0 && right == 0; }
  bool operator==(const ClipMask&) const = default;
};

/// Inclusive pixel bounds; may extend past the image.
struct CropRect {
  int top = 0;
  int left = 0;
  int bottom = 0;
  int right = 0;
  ClipMask clipped;

  int rows() const { return bottom - top + 1; }
  int cols() const { return right - left + 1; }
  /// True when no pixel of the rectangle lies inside the image.
  bool fully_outside() const {
    return clipped.top + clipped.bottom >= rows() || clipped.left + clipped.right >= cols();
  }
  bool operator==(const CropRect&) const = default;
};

enum class PadPolicy { kZero, kClamp };

/// Fixed-size patch cut from an image; `outside` marks pixels that lay beyond
/// the image border (their values follow the pad policy).
struct CroppedImage {
  RgbImage pixels;
  std::vector<unsigned char> outside;  // rows*cols, 1 = out of image
  ClipMask clipped;

  int rows() const { return pixels.rows(); }
  int cols() const { return pixels.cols(); }
  bool masked(int r, int c) const {
    return outside[static_cast<std::size_t>(r) * pixels.cols() + c] != 0;
  }
};

/// Parses the architecture text format:
///   name vgg-m
///   input 224 224
///   conv conv1 k=7 s=2 p=0
///   lrn
///   pool k=3 s=2 p=0
/// `lrn` and `relu` lines are accepted and ignored (per-position ops).
ArchitectureSpec parse_architecture(std::string_view text);
ArchitectureSpec read_architecture(const std::filesystem::path& path);
std::string format_architecture(const ArchitectureSpec& arch);

/// Checks k >= 1, s >= 1, p >= 0 and unique, non-empty boundary names.
void validate_architecture(const ArchitectureSpec& arch);

RFGeometry receptive_field(const ArchitectureSpec& arch, std::string_view layer);

/// Output map size of `layer` for the architecture's input size, using
/// floor((n + 2p - k) / s) + 1 at every op.
SpatialDims output_dims(const ArchitectureSpec& arch, std::string_view layer);

CropRect project_to_image(const RFGeometry& rf, ArgmaxPos pos, SpatialDims image_size);

CroppedImage crop_image(const RgbImage& image, const CropRect& rect,
                        PadPolicy pad_policy = PadPolicy::kZero);

/// Architecture shipped in data/vgg_m.arch.
ArchitectureSpec vgg_m_architecture();

}  // namespace neuroscope
