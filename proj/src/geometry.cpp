#include "neuroscope/geometry.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "neuroscope/errors.hpp"

namespace neuroscope {

std::vector<std::string> ArchitectureSpec::boundaries() const {
  std::vector<std::string> out;
  for (const auto& op : ops) {
    if (op.kind == OpKind::kConvolution) out.push_back(op.name);
  }
  return out;
}

bool ArchitectureSpec::has_boundary(std::string_view layer) const {
  return std::any_of(ops.begin(), ops.end(), [&](const GeometryOp& op) {
    return op.kind == OpKind::kConvolution && op.name == layer;
  });
}

namespace {

int parse_param(const std::string& token, char key, int line_no) {
  if (token.size() < 3 || token[0] != key || token[1] != '=') {
    throw ValidationError("architecture line " + std::to_string(line_no) + ": expected " +
                          std::string(1, key) + "=<int>, got '" + token + "'");
  }
  try {
    std::size_t used = 0;
    const int v = std::stoi(token.substr(2), &used);
    if (used != token.size() - 2) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("architecture line " + std::to_string(line_no) + ": bad integer in '" +
                          token + "'");
  }
}

}  // namespace

ArchitectureSpec parse_architecture(std::string_view text) {
  ArchitectureSpec arch;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool saw_input = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream tokens(line);
    std::string word;
    if (!(tokens >> word)) continue;

    if (word == "name") {
      tokens >> arch.name;
    } else if (word == "input") {
      if (!(tokens >> arch.input_size.rows >> arch.input_size.cols)) {
        throw ValidationError("architecture line " + std::to_string(line_no) +
                              ": input needs rows and cols");
      }
      saw_input = true;
    } else if (word == "conv" || word == "pool") {
      GeometryOp op;
      op.kind = word == "conv" ? OpKind::kConvolution : OpKind::kPooling;
      if (op.kind == OpKind::kConvolution && !(tokens >> op.name)) {
        throw ValidationError("architecture line " + std::to_string(line_no) +
                              ": conv needs a layer name");
      }
      std::string k, s, p;
      if (!(tokens >> k >> s >> p)) {
        throw ValidationError("architecture line " + std::to_string(line_no) +
                              ": expected k=.. s=.. p=..");
      }
      op.kernel = parse_param(k, 'k', line_no);
      op.stride = parse_param(s, 's', line_no);
      op.pad = parse_param(p, 'p', line_no);
      arch.ops.push_back(std::move(op));
    } else if (word == "lrn" || word == "relu") {
      continue;
    } else {
      throw ValidationError("architecture line " + std::to_string(line_no) + ": unknown op '" +
                            word + "'");
    }
  }
  if (!saw_input) throw ValidationError("architecture: missing input size");
  validate_architecture(arch);
  return arch;
}

ArchitectureSpec read_architecture(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open architecture " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_architecture(ss.str());
}

std::string format_architecture(const ArchitectureSpec& arch) {
  std::ostringstream out;
  if (!arch.name.empty()) out << "name " << arch.name << "\n";
  out << "input " << arch.input_size.rows << " " << arch.input_size.cols << "\n";
  for (const auto& op : arch.ops) {
    if (op.kind == OpKind::kConvolution) {
      out << "conv " << op.name << " ";
    } else {
      out << "pool ";
    }
    out << "k=" << op.kernel << " s=" << op.stride << " p=" << op.pad << "\n";
  }
  return out.str();
}

void validate_architecture(const ArchitectureSpec& arch) {
  if (arch.input_size.rows <= 0 || arch.input_size.cols <= 0) {
    throw ValidationError("architecture input size must be positive");
  }
  std::set<std::string> names;
  for (const auto& op : arch.ops) {
    if (op.kernel < 1 || op.stride < 1 || op.pad < 0) {
      throw ValidationError("architecture op needs k >= 1, s >= 1, p >= 0");
    }
    if (op.kind == OpKind::kConvolution) {
      if (op.name.empty()) throw ValidationError("convolution without a layer name");
      if (!names.insert(op.name).second) {
        throw ValidationError("duplicate layer boundary '" + op.name + "'");
      }
    }
  }
}

RFGeometry receptive_field(const ArchitectureSpec& arch, std::string_view layer) {
  RFGeometry rf;
  for (const auto& op : arch.ops) {
    const int k = op.kernel;
    rf.size += (k - 1) * rf.jump;
    rf.offset += ((k - 1) / 2.0 - op.pad) * rf.jump;
    rf.start -= op.pad * rf.jump;
    rf.jump *= op.stride;
    if (op.kind == OpKind::kConvolution && op.name == layer) return rf;
  }
  throw ArgumentError("unknown layer '" + std::string(layer) + "' in architecture " + arch.name);
}

SpatialDims output_dims(const ArchitectureSpec& arch, std::string_view layer) {
  SpatialDims dims = arch.input_size;
  for (const auto& op : arch.ops) {
    const int span_rows = dims.rows + 2 * op.pad - op.kernel;
    const int span_cols = dims.cols + 2 * op.pad - op.kernel;
    dims.rows = span_rows / op.stride + 1;
    dims.cols = span_cols / op.stride + 1;
    if (span_rows < 0 || span_cols < 0) {
      throw ValidationError("architecture collapses the activation map before '" +
                            std::string(layer) + "'");
    }
    if (op.kind == OpKind::kConvolution && op.name == layer) return dims;
  }
  throw ArgumentError("unknown layer '" + std::string(layer) + "' in architecture " + arch.name);
}

CropRect project_to_image(const RFGeometry& rf, ArgmaxPos pos, SpatialDims image_size) {
  CropRect rect;
  rect.top = rf.start + pos.row * rf.jump;
  rect.left = rf.start + pos.col * rf.jump;
  rect.bottom = rect.top + rf.size - 1;
  rect.right = rect.left + rf.size - 1;

  const int n = rf.size;
  rect.clipped.top = std::clamp(-rect.top, 0, n);
  rect.clipped.left = std::clamp(-rect.left, 0, n);
  rect.clipped.bottom = std::clamp(rect.bottom - (image_size.rows - 1), 0, n);
  rect.clipped.right = std::clamp(rect.right - (image_size.cols - 1), 0, n);
  return rect;
}

CroppedImage crop_image(const RgbImage& image, const CropRect& rect, PadPolicy pad_policy) {
  CroppedImage crop;
  const int rows = rect.rows();
  const int cols = rect.cols();
  crop.pixels = RgbImage(rows, cols, 0.0f);
  crop.outside.assign(static_cast<std::size_t>(rows) * cols, 0);
  crop.clipped = rect.clipped;
  if (image.empty()) {
    std::fill(crop.outside.begin(), crop.outside.end(), 1);
    return crop;
  }

  for (int r = 0; r < rows; ++r) {
    const int ir = rect.top + r;
    const bool row_out = ir < 0 || ir >= image.rows();
    for (int c = 0; c < cols; ++c) {
      const int ic = rect.left + c;
      const bool out = row_out || ic < 0 || ic >= image.cols();
      crop.outside[static_cast<std::size_t>(r) * cols + c] = out ? 1 : 0;
      if (out && pad_policy == PadPolicy::kZero) continue;
      const int sr = std::clamp(ir, 0, image.rows() - 1);
      const int sc = std::clamp(ic, 0, image.cols() - 1);
      for (int ch = 0; ch < 3; ++ch) crop.pixels.at(r, c, ch) = image.at(sr, sc, ch);
    }
  }
  return crop;
}

namespace {

constexpr std::string_view kVggM = R"(name vgg-m
input 224 224
conv conv1 k=7 s=2 p=0
pool k=3 s=2 p=0
conv conv2 k=5 s=2 p=1
pool k=3 s=2 p=0
conv conv3 k=3 s=1 p=1
conv conv4 k=3 s=1 p=1
conv conv5 k=3 s=1 p=1
pool k=3 s=2 p=0
)";

}  // namespace

ArchitectureSpec vgg_m_architecture() { return parse_architecture(kVggM); }

}  // namespace neuroscope
