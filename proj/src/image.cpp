#include "neuroscope/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "neuroscope/errors.hpp"

namespace neuroscope {

RgbImage::RgbImage(int rows, int cols, float fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols * 3, fill) {
  if (rows < 0 || cols < 0) throw ArgumentError("image dimensions must be nonnegative");
}

RgbImageD::RgbImageD(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols * 3, fill) {
  if (rows < 0 || cols < 0) throw ArgumentError("image dimensions must be nonnegative");
}

RgbImage to_float(const RgbImageD& image) {
  RgbImage out(image.rows(), image.cols());
  auto src = image.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<float>(src[i]);
  return out;
}

float quantize8(float v) {
  const float clamped = std::clamp(v, 0.0f, 1.0f);
  return static_cast<float>(std::lround(clamped * 255.0f)) / 255.0f;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw IoError(std::string("cannot open ") + path.string());
  }
  return f;
}

RgbImage read_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  unsigned char sig[8];
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw ValidationError("not a PNG file: " + path.string());
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("libpng: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw Error("libpng: cannot create info struct");
  }

  std::vector<png_byte> buffer;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ValidationError("corrupt PNG: " + path.string());
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color_type = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int rows = static_cast<int>(png_get_image_height(png, info));
  const int cols = static_cast<int>(png_get_image_width(png, info));
  const int out_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer.resize(rowbytes * rows);
  row_ptrs.resize(rows);
  for (int r = 0; r < rows; ++r) row_ptrs[r] = buffer.data() + rowbytes * r;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  RgbImage image(rows, cols);
  auto dst = image.data();
  for (int r = 0; r < rows; ++r) {
    const png_byte* src = row_ptrs[r];
    for (int i = 0; i < cols * 3; ++i) {
      float v;
      if (out_depth == 16) {
        v = static_cast<float>((src[2 * i] << 8) | src[2 * i + 1]) / 65535.0f;
      } else {
        v = static_cast<float>(src[i]) / 255.0f;
      }
      dst[static_cast<std::size_t>(r) * cols * 3 + i] = v;
    }
  }
  return image;
}

void skip_ppm_space(std::istream& in) {
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      return;
    }
  }
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  if (magic != "P6") throw ValidationError("not a binary PPM: " + path.string());
  int cols = 0, rows = 0, maxval = 0;
  skip_ppm_space(in);
  in >> cols;
  skip_ppm_space(in);
  in >> rows;
  skip_ppm_space(in);
  in >> maxval;
  in.get();
  if (!in || cols <= 0 || rows <= 0 || maxval <= 0 || maxval > 65535) {
    throw ValidationError("bad PPM header: " + path.string());
  }
  const int bytes = maxval > 255 ? 2 : 1;
  std::vector<unsigned char> raw(static_cast<std::size_t>(rows) * cols * 3 * bytes);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw ValidationError("truncated PPM: " + path.string());
  }
  RgbImage image(rows, cols);
  auto dst = image.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const unsigned v = bytes == 2 ? (raw[2 * i] << 8) | raw[2 * i + 1] : raw[i];
    dst[i] = static_cast<float>(v) / static_cast<float>(maxval);
  }
  return image;
}

template <typename Sample>
void write_png_impl(int rows, int cols, std::span<const Sample> data,
                    const std::filesystem::path& path, int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw ArgumentError("PNG bit depth must be 8 or 16");
  if (rows <= 0 || cols <= 0) throw ArgumentError("cannot write an empty image");

  const int bytes = bit_depth / 8;
  const double maxval = bit_depth == 16 ? 65535.0 : 255.0;
  const std::size_t rowbytes = static_cast<std::size_t>(cols) * 3 * bytes;
  std::vector<png_byte> buffer(rowbytes * rows);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = std::clamp(static_cast<double>(data[i]), 0.0, 1.0);
    const auto q = static_cast<unsigned>(std::lround(v * maxval));
    if (bytes == 2) {
      buffer[2 * i] = static_cast<png_byte>(q >> 8);
      buffer[2 * i + 1] = static_cast<png_byte>(q & 0xff);
    } else {
      buffer[i] = static_cast<png_byte>(q);
    }
  }
  std::vector<png_bytep> row_ptrs(rows);
  for (int r = 0; r < rows; ++r) row_ptrs[r] = buffer.data() + rowbytes * r;

  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw Error("libpng: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw Error("libpng: cannot create info struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(cols), static_cast<png_uint_32>(rows),
               bit_depth, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

RgbImage read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("image not found: " + path.string());
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return read_png(path);
  if (ext == ".ppm") return read_ppm(path);
  throw ValidationError("unsupported image format: " + path.string());
}

void write_png(const RgbImage& image, const std::filesystem::path& path, int bit_depth) {
  write_png_impl<float>(image.rows(), image.cols(), image.data(), path, bit_depth);
}

void write_png(const RgbImageD& image, const std::filesystem::path& path, int bit_depth) {
  write_png_impl<double>(image.rows(), image.cols(), image.data(), path, bit_depth);
}

}  // namespace neuroscope
