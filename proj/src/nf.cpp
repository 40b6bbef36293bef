#include "neuroscope/nf.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "neuroscope/csv.hpp"
#include "neuroscope/errors.hpp"

namespace neuroscope {

namespace {

void check_inputs(std::span<const CroppedImage> crops, std::span<const double> weights) {
  if (crops.empty()) throw ArgumentError("no crops to average");
  if (weights.size() != crops.size()) {
    throw ArgumentError("one weight per crop is required");
  }
  const int rows = crops.front().rows();
  const int cols = crops.front().cols();
  if (rows <= 0 || cols <= 0) throw ArgumentError("crops must be non-empty");
  for (std::size_t j = 0; j < crops.size(); ++j) {
    if (crops[j].rows() != rows || crops[j].cols() != cols) {
      throw ArgumentError("crop dimensions differ");
    }
    if (crops[j].outside.size() != static_cast<std::size_t>(rows) * cols) {
      throw ArgumentError("crop mask size does not match its pixels");
    }
    if (!(weights[j] > 0.0 && weights[j] <= 1.0)) {
      throw ArgumentError("crop weights must lie in (0, 1]");
    }
  }
}

}  // namespace

NeuronFeature compute_nf(std::span<const CroppedImage> crops, std::span<const double> weights,
                         const NfOptions& options) {
  check_inputs(crops, weights);
  if (options.n_max < 1) throw ArgumentError("n_max must be at least 1");
  if (crops.size() > static_cast<std::size_t>(options.n_max)) {
    throw ArgumentError("more crops than n_max");
  }

  const int rows = crops.front().rows();
  const int cols = crops.front().cols();
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;

  NeuronFeature nf;
  nf.pixels = RgbImageD(rows, cols, 0.0);
  nf.n_used = static_cast<int>(crops.size());
  nf.coverage.assign(pixels, 0);
  std::vector<double> covered_weight(pixels, 0.0);

  auto sum = nf.pixels.data();
  for (std::size_t j = 0; j < crops.size(); ++j) {
    const double w = weights[j];
    nf.weight_sum += w;
    const auto src = crops[j].pixels.data();
    for (std::size_t p = 0; p < pixels; ++p) {
      if (crops[j].outside[p]) continue;
      ++nf.coverage[p];
      covered_weight[p] += w;
      for (int ch = 0; ch < 3; ++ch) sum[3 * p + ch] += w * src[3 * p + ch];
    }
  }

  for (std::size_t p = 0; p < pixels; ++p) {
    double denom = 0.0;
    switch (options.normalization) {
      case NfNormalization::kNMax:
        denom = options.n_max;
        break;
      case NfNormalization::kWeightSum:
        denom = nf.weight_sum;
        break;
      case NfNormalization::kCoverage:
        denom = covered_weight[p];
        break;
    }
    for (int ch = 0; ch < 3; ++ch) sum[3 * p + ch] = denom > 0.0 ? sum[3 * p + ch] / denom : 0.0;
  }
  return nf;
}

PixelStdMap pixel_std_map(std::span<const CroppedImage> crops, std::span<const double> weights) {
  check_inputs(crops, weights);
  const int rows = crops.front().rows();
  const int cols = crops.front().cols();
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;

  PixelStdMap out;
  out.rows = rows;
  out.cols = cols;
  out.mean = RgbImageD(rows, cols, 0.0);
  out.std.assign(pixels, 0.0);
  out.coverage.assign(pixels, 0);

  std::vector<double> wsum(pixels, 0.0);
  auto mean = out.mean.data();
  for (std::size_t j = 0; j < crops.size(); ++j) {
    const auto src = crops[j].pixels.data();
    for (std::size_t p = 0; p < pixels; ++p) {
      if (crops[j].outside[p]) continue;
      ++out.coverage[p];
      wsum[p] += weights[j];
      for (int ch = 0; ch < 3; ++ch) mean[3 * p + ch] += weights[j] * src[3 * p + ch];
    }
  }
  for (std::size_t p = 0; p < pixels; ++p) {
    for (int ch = 0; ch < 3; ++ch) mean[3 * p + ch] = wsum[p] > 0.0 ? mean[3 * p + ch] / wsum[p] : 0.0;
  }

  std::vector<double> var(pixels * 3, 0.0);
  for (std::size_t j = 0; j < crops.size(); ++j) {
    const auto src = crops[j].pixels.data();
    for (std::size_t p = 0; p < pixels; ++p) {
      if (crops[j].outside[p]) continue;
      for (int ch = 0; ch < 3; ++ch) {
        const double d = src[3 * p + ch] - mean[3 * p + ch];
        var[3 * p + ch] += weights[j] * d * d;
      }
    }
  }
  for (std::size_t p = 0; p < pixels; ++p) {
    if (wsum[p] <= 0.0) continue;
    const double pooled = (var[3 * p] + var[3 * p + 1] + var[3 * p + 2]) / (3.0 * wsum[p]);
    out.std[p] = std::sqrt(pooled);
  }
  return out;
}

double image_sharpness(const RgbImageD& image) {
  const int rows = image.rows();
  const int cols = image.cols();
  double energy = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    double dx2 = 0.0, dy2 = 0.0;
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        if (c + 1 < cols) {
          const double d = image.at(r, c + 1, ch) - image.at(r, c, ch);
          dx2 += d * d;
        }
        if (r + 1 < rows) {
          const double d = image.at(r + 1, c, ch) - image.at(r, c, ch);
          dy2 += d * d;
        }
      }
    }
    if (cols > 1) energy += dx2 / (static_cast<double>(rows) * (cols - 1));
    if (rows > 1) energy += dy2 / (static_cast<double>(rows - 1) * cols);
  }
  return energy / 3.0;
}

double nf_sharpness(const NeuronFeature& nf) { return image_sharpness(nf.pixels); }

void write_nf_record(const NfRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "n_used = " << record.n_used << "\n"
      << "weight_sum = " << csv::format_double(record.weight_sum) << "\n"
      << "sharpness = " << csv::format_double(record.sharpness) << "\n";
  if (!out) throw IoError("write failed: " + path.string());
}

NfRecord read_nf_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  NfRecord record;
  std::string key, eq, value;
  while (in >> key >> eq >> value) {
    if (eq != "=") throw ValidationError("bad NF record line in " + path.string());
    if (key == "n_used") {
      record.n_used = static_cast<int>(csv::parse_int(value));
    } else if (key == "weight_sum") {
      record.weight_sum = csv::parse_double(value);
    } else if (key == "sharpness") {
      record.sharpness = csv::parse_double(value);
    } else {
      throw ValidationError("unknown NF record key '" + key + "'");
    }
  }
  return record;
}

}  // namespace neuroscope
