#include "neuroscope/manifest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "neuroscope/errors.hpp"

namespace fs = std::filesystem;

namespace neuroscope {

const LayerEntry& DatasetManifest::layer(std::string_view name) const {
  for (const auto& l : layers) {
    if (l.name == name) return l;
  }
  throw ArgumentError("unknown layer '" + std::string(name) + "'");
}

std::optional<std::size_t> DatasetManifest::layer_index(std::string_view name) const {
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].name == name) return i;
  }
  return std::nullopt;
}

fs::path DatasetManifest::resolve(std::string_view relative) const {
  return root / fs::path(relative);
}

bool DatasetManifest::operator==(const DatasetManifest& other) const {
  return version == other.version && activation_convention == other.activation_convention &&
         preprocessing == other.preprocessing && layers == other.layers &&
         images == other.images && class_names == other.class_names &&
         ontology_path == other.ontology_path;
}

ActivationTable::ActivationTable(std::string layer, int neuron_count, int image_count)
    : layer_(std::move(layer)), neuron_count_(neuron_count), image_count_(image_count) {
  if (neuron_count <= 0 || image_count <= 0) {
    throw ArgumentError("activation table needs positive neuron and image counts");
  }
  const std::size_t n = static_cast<std::size_t>(neuron_count) * image_count;
  values_.assign(n, 0.0f);
  argmax_.assign(n, ArgmaxPos{});
}

std::uintmax_t activation_file_size(int neuron_count, int image_count) {
  const std::uintmax_t records =
      static_cast<std::uintmax_t>(neuron_count) * static_cast<std::uintmax_t>(image_count);
  return kActivationMagic.size() + records * 4 + records * 4;
}

// ---------------------------------------------------------------------------
// Validation

void validate_structure(const DatasetManifest& m) {
  if (m.version != kManifestVersion) {
    throw ValidationError("manifest version " + std::to_string(m.version) +
                          " does not match supported version " +
                          std::to_string(kManifestVersion));
  }
  if (m.layers.empty()) throw ValidationError("manifest declares no layers");
  if (m.images.empty()) throw ValidationError("manifest declares no images");
  if (m.class_names.empty()) throw ValidationError("manifest declares no class names");

  std::set<std::string> names;
  for (const auto& l : m.layers) {
    if (l.name.empty() || l.name.find_first_of(" \t") != std::string::npos) {
      throw ValidationError("layer names must be non-empty and contain no whitespace");
    }
    if (!names.insert(l.name).second) {
      throw ValidationError("duplicate layer name '" + l.name + "'");
    }
    if (l.neuron_count <= 0) {
      throw ValidationError("layer '" + l.name + "' has no neurons");
    }
    if (l.spatial_dims.rows <= 0 || l.spatial_dims.cols <= 0) {
      throw ValidationError("layer '" + l.name + "' has non-positive spatial dims");
    }
    if (l.spatial_dims.rows > 65536 || l.spatial_dims.cols > 65536) {
      throw ValidationError("layer '" + l.name + "' spatial dims exceed 16-bit coordinates");
    }
    if (l.activation_file.empty()) {
      throw ValidationError("layer '" + l.name + "' has no activation file");
    }
  }

  const int classes = static_cast<int>(m.class_names.size());
  for (std::size_t i = 0; i < m.images.size(); ++i) {
    const auto& img = m.images[i];
    if (img.image_id != static_cast<int>(i)) {
      throw ValidationError("image id " + std::to_string(img.image_id) +
                            " does not match its position " + std::to_string(i));
    }
    if (img.class_index < 0 || img.class_index >= classes) {
      throw ValidationError("image " + std::to_string(i) + " class index " +
                            std::to_string(img.class_index) + " out of range [0, " +
                            std::to_string(classes) + ")");
    }
    if (img.path.empty()) throw ValidationError("image " + std::to_string(i) + " has no path");
  }
  for (const auto& name : m.class_names) {
    if (name.empty() || name.find('\n') != std::string::npos) {
      throw ValidationError("class names must be non-empty single lines");
    }
  }
}

void validate_table(const LayerEntry& layer, int image_count, const ActivationTable& table) {
  if (table.layer() != layer.name) {
    throw ValidationError("table for '" + table.layer() + "' given for layer '" + layer.name +
                          "'");
  }
  if (table.neuron_count() != layer.neuron_count || table.image_count() != image_count) {
    throw ValidationError("table shape for '" + layer.name + "' does not match manifest");
  }
  const auto values = table.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw ValidationError("non-finite activation in layer '" + layer.name + "' (neuron " +
                            std::to_string(i / image_count) + ", image " +
                            std::to_string(i % image_count) + ")");
    }
  }
  for (const auto& pos : table.argmax_positions()) {
    if (pos.row >= layer.spatial_dims.rows || pos.col >= layer.spatial_dims.cols) {
      throw ValidationError("argmax position outside the spatial dims of '" + layer.name + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// Header text

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

int to_int(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw ValidationError("manifest: bad integer for " + what + ": '" + s + "'");
  }
  if (used != s.size()) throw ValidationError("manifest: bad integer for " + what + ": '" + s + "'");
  return v;
}

}  // namespace

std::string format_manifest(const DatasetManifest& m) {
  std::ostringstream out;
  out << "# neuroscope dataset manifest\n";
  out << "version = " << m.version << "\n";
  out << "activation_convention = " << m.activation_convention << "\n";
  out << "preprocessing = " << m.preprocessing << "\n";
  if (m.ontology_path) out << "ontology = " << *m.ontology_path << "\n";
  out << "\n[classes] " << m.class_names.size() << "\n";
  for (const auto& c : m.class_names) out << c << "\n";
  out << "\n[layers] " << m.layers.size() << "\n";
  out << "# name neurons rows cols file\n";
  for (const auto& l : m.layers) {
    out << l.name << " " << l.neuron_count << " " << l.spatial_dims.rows << " "
        << l.spatial_dims.cols << " " << l.activation_file << "\n";
  }
  out << "\n[images] " << m.images.size() << "\n";
  out << "# id class path\n";
  for (const auto& img : m.images) {
    out << img.image_id << " " << img.class_index << " " << img.path << "\n";
  }
  return out.str();
}

DatasetManifest parse_manifest(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::string line;
    std::istringstream in{std::string(text)};
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines.push_back(std::move(line));
    }
  }

  DatasetManifest m;
  m.version = -1;
  bool saw_classes = false, saw_layers = false, saw_images = false;
  std::size_t i = 0;

  // Array sections hold exactly `count` data lines; comment lines that start
  // with '#' are skipped except inside [classes], where names are verbatim.
  auto next_data_line = [&](bool allow_comments) -> const std::string& {
    while (i < lines.size()) {
      const std::string& l = lines[i++];
      if (!allow_comments && (l.empty() || l[0] == '#')) continue;
      return l;
    }
    throw ValidationError("manifest: section ended early");
  };

  while (i < lines.size()) {
    const std::string line = trim(lines[i++]);
    if (line.empty() || line[0] == '#') continue;

    if (line[0] == '[') {
      const auto close = line.find(']');
      if (close == std::string::npos) throw ValidationError("manifest: bad section '" + line + "'");
      const std::string section = line.substr(1, close - 1);
      const int count = to_int(trim(line.substr(close + 1)), section + " count");
      if (count < 0) throw ValidationError("manifest: negative count for " + section);

      if (section == "classes") {
        saw_classes = true;
        for (int k = 0; k < count; ++k) m.class_names.push_back(next_data_line(true));
      } else if (section == "layers") {
        saw_layers = true;
        for (int k = 0; k < count; ++k) {
          std::istringstream row(next_data_line(false));
          LayerEntry l;
          std::string neurons, rows, cols;
          row >> l.name >> neurons >> rows >> cols;
          std::getline(row, l.activation_file);
          l.activation_file = trim(l.activation_file);
          l.neuron_count = to_int(neurons, "neuron count");
          l.spatial_dims = {to_int(rows, "rows"), to_int(cols, "cols")};
          m.layers.push_back(std::move(l));
        }
      } else if (section == "images") {
        saw_images = true;
        m.images.reserve(static_cast<std::size_t>(count));
        for (int k = 0; k < count; ++k) {
          std::istringstream row(next_data_line(false));
          ImageRecord img;
          std::string id, cls;
          row >> id >> cls;
          std::getline(row, img.path);
          img.path = trim(img.path);
          img.image_id = to_int(id, "image id");
          img.class_index = to_int(cls, "class index");
          m.images.push_back(std::move(img));
        }
      } else {
        throw ValidationError("manifest: unknown section [" + section + "]");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("manifest: expected key = value: '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "version") {
      m.version = to_int(value, "version");
    } else if (key == "activation_convention") {
      m.activation_convention = value;
    } else if (key == "preprocessing") {
      m.preprocessing = value;
    } else if (key == "ontology") {
      m.ontology_path = value;
    } else {
      throw ValidationError("manifest: unknown key '" + key + "'");
    }
  }

  if (m.version < 0) throw ValidationError("manifest: missing version");
  if (!saw_classes || !saw_layers || !saw_images) {
    throw ValidationError("manifest: [classes], [layers] and [images] sections are required");
  }
  return m;
}

// ---------------------------------------------------------------------------
// Payload I/O

namespace {

template <typename T>
T to_little_endian(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

fs::path manifest_file(const fs::path& path) {
  if (fs::is_directory(path)) return path / kManifestFileName;
  return path;
}

}  // namespace

void write_activations(const ActivationTable& table, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kActivationMagic.data(), kActivationMagic.size());

  std::vector<std::uint32_t> words;
  words.reserve(table.values().size());
  for (float v : table.values()) {
    words.push_back(to_little_endian(std::bit_cast<std::uint32_t>(v)));
  }
  out.write(reinterpret_cast<const char*>(words.data()),
            static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));

  std::vector<std::uint16_t> coords;
  coords.reserve(table.argmax_positions().size() * 2);
  for (const auto& p : table.argmax_positions()) {
    coords.push_back(to_little_endian(p.row));
    coords.push_back(to_little_endian(p.col));
  }
  out.write(reinterpret_cast<const char*>(coords.data()),
            static_cast<std::streamsize>(coords.size() * sizeof(std::uint16_t)));
  if (!out) throw IoError("write failed: " + path.string());
}

ActivationTable load_activations(const DatasetManifest& manifest, std::string_view layer_name) {
  const LayerEntry& layer = manifest.layer(layer_name);
  const fs::path path = manifest.resolve(layer.activation_file);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open activation file " + path.string());

  const int images = manifest.image_count();
  const std::uintmax_t expected = activation_file_size(layer.neuron_count, images);
  std::error_code ec;
  const std::uintmax_t actual = fs::file_size(path, ec);
  if (ec) throw IoError("cannot stat " + path.string());
  if (actual < expected) {
    throw ValidationError("activation file " + path.string() + " is truncated (" +
                          std::to_string(actual) + " of " + std::to_string(expected) + " bytes)");
  }
  if (actual > expected) {
    throw ValidationError("activation file " + path.string() + " has trailing data");
  }

  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (magic != kActivationMagic) throw ValidationError("bad magic in " + path.string());

  ActivationTable table(layer.name, layer.neuron_count, images);
  const std::size_t n = static_cast<std::size_t>(layer.neuron_count) * images;

  std::vector<std::uint32_t> words(n);
  in.read(reinterpret_cast<char*>(words.data()),
          static_cast<std::streamsize>(n * sizeof(std::uint32_t)));
  std::vector<std::uint16_t> coords(2 * n);
  in.read(reinterpret_cast<char*>(coords.data()),
          static_cast<std::streamsize>(2 * n * sizeof(std::uint16_t)));
  if (!in) throw ValidationError("activation file " + path.string() + " is truncated");

  for (int neuron = 0; neuron < layer.neuron_count; ++neuron) {
    for (int image = 0; image < images; ++image) {
      const std::size_t k = static_cast<std::size_t>(neuron) * images + image;
      table.value(neuron, image) = std::bit_cast<float>(to_little_endian(words[k]));
      table.argmax(neuron, image) = {to_little_endian(coords[2 * k]),
                                     to_little_endian(coords[2 * k + 1])};
    }
  }
  validate_table(layer, images, table);
  return table;
}

DatasetManifest read_manifest(const fs::path& path) {
  const fs::path file = manifest_file(path);
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();

  DatasetManifest m = parse_manifest(ss.str());
  m.root = file.parent_path();
  validate_structure(m);

  for (const auto& l : m.layers) {
    const fs::path payload = m.resolve(l.activation_file);
    if (!fs::is_regular_file(payload)) {
      throw ValidationError("activation file for layer '" + l.name + "' not found: " +
                            payload.string());
    }
    const auto expected = activation_file_size(l.neuron_count, m.image_count());
    const auto actual = fs::file_size(payload);
    if (actual != expected) {
      throw ValidationError("layer '" + l.name + "' declares " + std::to_string(l.neuron_count) +
                            " neurons x " + std::to_string(m.image_count()) + " images (" +
                            std::to_string(expected) + " bytes) but " + payload.string() +
                            " holds " + std::to_string(actual) + " bytes");
    }
  }
  for (const auto& img : m.images) {
    if (!fs::exists(m.resolve(img.path))) {
      throw ValidationError("image " + std::to_string(img.image_id) + " not found: " +
                            m.resolve(img.path).string());
    }
  }
  if (m.ontology_path && !fs::exists(m.resolve(*m.ontology_path))) {
    throw ValidationError("ontology file not found: " + m.resolve(*m.ontology_path).string());
  }
  return m;
}

void write_manifest(const DatasetManifest& manifest, std::span<const ActivationTable> tables,
                    const fs::path& directory) {
  validate_structure(manifest);
  if (tables.size() != manifest.layers.size()) {
    throw ValidationError("write_manifest: need one table per layer");
  }
  for (std::size_t i = 0; i < tables.size(); ++i) {
    validate_table(manifest.layers[i], manifest.image_count(), tables[i]);
  }

  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());

  for (std::size_t i = 0; i < tables.size(); ++i) {
    const fs::path payload = directory / manifest.layers[i].activation_file;
    if (payload.has_parent_path()) fs::create_directories(payload.parent_path(), ec);
    write_activations(tables[i], payload);
  }

  const fs::path file = directory / kManifestFileName;
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + file.string());
  out << format_manifest(manifest);
  if (!out) throw IoError("write failed: " + file.string());
}

}  // namespace neuroscope
