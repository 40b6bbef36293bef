#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace neuroscope {

/// Interleaved RGB raster with channel values nominally in [0, 1].
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int rows, int cols, float fill = 0.0f);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  float& at(int r, int c, int ch) { return data_[index(r, c, ch)]; }
  float at(int r, int c, int ch) const { return data_[index(r, c, ch)]; }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool operator==(const RgbImage&) const = default;

 private:
  std::size_t index(int r, int c, int ch) const {
    return (static_cast<std::size_t>(r) * cols_ + c) * 3 + ch;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<float> data_;
};

/// Same layout as RgbImage but in double precision; used for averaged
/// results (Neuron Features) where float accumulation would lose digits.
class RgbImageD {
 public:
  RgbImageD() = default;
  RgbImageD(int rows, int cols, double fill = 0.0);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& at(int r, int c, int ch) { return data_[index(r, c, ch)]; }
  double at(int r, int c, int ch) const { return data_[index(r, c, ch)]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

 private:
  std::size_t index(int r, int c, int ch) const {
    return (static_cast<std::size_t>(r) * cols_ + c) * 3 + ch;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

RgbImage to_float(const RgbImageD& image);

// PNG (8- or 16-bit, gray/RGB, alpha dropped) and binary PPM (P6) decoding,
// selected by file extension.
RgbImage read_image(const std::filesystem::path& path);

/// Writes a PNG; values are clamped to [0, 1] and quantized to bit_depth.
void write_png(const RgbImage& image, const std::filesystem::path& path,
               int bit_depth = 8);
void write_png(const RgbImageD& image, const std::filesystem::path& path,
               int bit_depth = 16);

/// Maps v in [0,1] to the nearest 8-bit level and back; the fixture uses it
/// so that in-memory images equal their decoded PNG files exactly.
float quantize8(float v);

}  // namespace neuroscope
