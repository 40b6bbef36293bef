#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "neuroscope/geometry.hpp"
#include "neuroscope/image.hpp"

namespace neuroscope {

/// Denominator applied to the weighted crop sum.
enum class NfNormalization {
  kNMax,       // (1/n_max) * sum w_j I_j, zero-filled pixels add nothing
  kWeightSum,  // divide by sum of all weights
  kCoverage,   // per pixel, divide by the weight of crops covering it
};

struct NfOptions {
  int n_max = 100;
  NfNormalization normalization = NfNormalization::kNMax;
};

struct NeuronFeature {
  RgbImageD pixels;
  int n_used = 0;
  double weight_sum = 0.0;
  std::vector<int> coverage;  // per pixel, crops that were inside the image

  int rows() const { return pixels.rows(); }
  int cols() const { return pixels.cols(); }
  int coverage_at(int r, int c) const {
    return coverage[static_cast<std::size_t>(r) * pixels.cols() + c];
  }
};

struct PixelStdMap {
  int rows = 0;
  int cols = 0;
  std::vector<double> std;  // channel-pooled population std per pixel
  RgbImageD mean;           // weighted per-pixel mean of the crops
  std::vector<int> coverage;

  double at(int r, int c) const { return std[static_cast<std::size_t>(r) * cols + c]; }
};

NeuronFeature compute_nf(std::span<const CroppedImage> crops,
                         std::span<const double> weights, const NfOptions& options = {});

/// Weighted population standard deviation of the unmasked crop values at
/// each pixel, pooled over channels as sqrt(mean of channel variances).
PixelStdMap pixel_std_map(std::span<const CroppedImage> crops,
                          std::span<const double> weights);

/// Mean squared forward-difference gradient over all channels. Zero for a
/// flat image; 2 for a unit-contrast one-pixel checkerboard.
double nf_sharpness(const NeuronFeature& nf);
double image_sharpness(const RgbImageD& image);

struct NfRecord {
  int n_used = 0;
  double weight_sum = 0.0;
  double sharpness = 0.0;
};

/// Sidecar text next to an exported NF image.
void write_nf_record(const NfRecord& record, const std::filesystem::path& path);
NfRecord read_nf_record(const std::filesystem::path& path);

}  // namespace neuroscope
