#include "neuroscope/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "neuroscope/colorsel.hpp"
#include "neuroscope/errors.hpp"

namespace neuroscope {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr std::string_view kFixtureArchitecture = R"(name fixture
input 40 40
conv conv1 k=5 s=1 p=2
pool k=2 s=2 p=0
conv conv2 k=3 s=1 p=1
pool k=2 s=2 p=0
conv conv3 k=3 s=1 p=1
)";

// Standard-library distributions are implementation-defined; these helpers
// keep fixtures identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(static_cast<int>(i))]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

bool is_painted(PlantKind kind) {
  return kind == PlantKind::kColor || kind == PlantKind::kGray || kind == PlantKind::kColorClass;
}

bool has_class(PlantKind kind) {
  return kind == PlantKind::kClass || kind == PlantKind::kColorClass;
}

int dedicated_images(const FixtureSpec& spec, const PlantedNeuron& plant) {
  if (plant.kind == PlantKind::kDead) return 0;
  if (plant.images > 0) return plant.images;
  return plant.kind == PlantKind::kClass ? spec.class_images : spec.color_images;
}

std::string class_name(int index) {
  std::string digits = std::to_string(index);
  return "class_" + std::string(digits.size() < 4 ? 4 - digits.size() : 0, '0') + digits;
}

// Unit positions whose receptive field lies entirely inside the image.
std::pair<int, int> interior_range(const RFGeometry& rf, int map_size, int image_size) {
  const int lo = std::max(0, (-rf.start + rf.jump - 1) / rf.jump);
  const int hi_num = image_size - rf.size - rf.start;
  const int hi = hi_num < 0 ? -1 : std::min(map_size - 1, hi_num / rf.jump);
  return {lo, hi};
}

void validate_spec(const FixtureSpec& spec) {
  validate_architecture(spec.arch);
  if (spec.layers.empty()) throw ArgumentError("fixture needs at least one layer");
  if (spec.image_count < 2) throw ArgumentError("fixture needs at least two images");
  if (spec.class_count < 1) throw ArgumentError("fixture needs at least one class");
  if (spec.color_images < 1 || spec.class_images < 1) {
    throw ArgumentError("dedicated image counts must be positive");
  }
  if (!(spec.chroma > 0.0 && spec.chroma <= 0.6)) {
    throw ArgumentError("chroma must lie in (0, 0.6] to stay inside the RGB cube");
  }
  if (!(spec.surround_noise >= 0.0 && spec.surround_noise <= 0.2)) {
    throw ArgumentError("surround_noise must lie in [0, 0.2]");
  }
  std::set<std::string> layer_names;
  for (const auto& layer : spec.layers) {
    if (!spec.arch.has_boundary(layer.name)) {
      throw ArgumentError("fixture layer '" + layer.name + "' is not in the architecture");
    }
    if (layer.neurons < 1) throw ArgumentError("fixture layer needs neurons");
    if (!layer_names.insert(layer.name).second) {
      throw ArgumentError("duplicate fixture layer '" + layer.name + "'");
    }
  }
  std::set<std::pair<std::string, int>> planted;
  int total = 0;
  for (const auto& p : spec.plants) {
    const auto it = std::find_if(spec.layers.begin(), spec.layers.end(),
                                 [&](const FixtureLayer& l) { return l.name == p.layer; });
    if (it == spec.layers.end()) throw ArgumentError("plant on unknown layer '" + p.layer + "'");
    if (p.neuron < 0 || p.neuron >= it->neurons) {
      throw ArgumentError("plant neuron " + std::to_string(p.neuron) + " out of range");
    }
    if (!planted.insert({p.layer, p.neuron}).second) {
      throw ArgumentError("neuron planted twice in '" + p.layer + "'");
    }
    if (has_class(p.kind) && (p.class_index < 0 || p.class_index >= spec.class_count)) {
      throw ArgumentError("plant class index " + std::to_string(p.class_index) +
                          " beyond class_count");
    }
    if (!(p.purity > 0.0 && p.purity <= 1.0)) throw ArgumentError("purity must lie in (0, 1]");
    if (!std::isfinite(p.hue_degrees)) throw ArgumentError("hue must be finite");
    if (p.images < 0) throw ArgumentError("plant image count must be nonnegative");
    total += dedicated_images(spec, p);
  }
  if (total > spec.image_count) {
    throw ArgumentError("plants need " + std::to_string(total) + " dedicated images but only " +
                        std::to_string(spec.image_count) + " exist");
  }
}

void set_pixel(RgbImage& image, int r, int c, const Vec3& rgb) {
  for (int ch = 0; ch < 3; ++ch) {
    image.at(r, c, ch) = quantize8(static_cast<float>(std::clamp(rgb[ch], 0.0, 1.0)));
  }
}

// Gray 0.5 surround with achromatic jitter and a centered patch of side
// ceil(size / 2).
void paint_rf(RgbImage& image, const CropRect& rect, const Vec3& patch, double noise, Rng& rng) {
  const int size = rect.rows();
  const int side = (size + 1) / 2;
  const int off = (size - side) / 2;
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const bool in_patch = r >= off && r < off + side && c >= off && c < off + side;
      const double g = 0.5 + noise * (2.0 * rng.uniform() - 1.0);
      set_pixel(image, rect.top + r, rect.left + c, in_patch ? patch : Vec3{g, g, g});
    }
  }
}

}  // namespace

std::string_view to_string(PlantKind kind) {
  switch (kind) {
    case PlantKind::kColor:
      return "color";
    case PlantKind::kGray:
      return "gray";
    case PlantKind::kClass:
      return "class";
    case PlantKind::kColorClass:
      return "color_class";
    case PlantKind::kDead:
      return "dead";
  }
  return "?";
}

PlantKind parse_plant_kind(std::string_view text) {
  for (auto k : {PlantKind::kColor, PlantKind::kGray, PlantKind::kClass, PlantKind::kColorClass,
                 PlantKind::kDead}) {
    if (to_string(k) == text) return k;
  }
  throw ArgumentError("unknown plant kind '" + std::string(text) + "'");
}

FixtureSpec default_fixture_spec() {
  FixtureSpec spec;
  spec.arch = parse_architecture(kFixtureArchitecture);
  spec.layers = {{"conv1", 32}, {"conv2", 32}, {"conv3", 32}};

  auto add_colors = [&spec](const std::string& layer, int count, double hue_offset) {
    for (int k = 0; k < count; ++k) {
      PlantedNeuron p;
      p.layer = layer;
      p.neuron = 2 * k;
      p.kind = PlantKind::kColor;
      p.hue_degrees = std::fmod(hue_offset + 360.0 * k / count, 360.0);
      spec.plants.push_back(p);
    }
  };
  auto add = [&spec](const std::string& layer, int neuron, PlantKind kind, int cls = 0,
                     double hue = 0.0) {
    PlantedNeuron p;
    p.layer = layer;
    p.neuron = neuron;
    p.kind = kind;
    p.class_index = cls;
    p.hue_degrees = hue;
    spec.plants.push_back(p);
  };

  add_colors("conv1", 16, 5.0);
  add("conv1", 1, PlantKind::kDead);
  add("conv1", 3, PlantKind::kDead);

  add_colors("conv2", 12, 20.0);
  add("conv2", 1, PlantKind::kClass, 0);
  add("conv2", 3, PlantKind::kClass, 1);
  add("conv2", 5, PlantKind::kDead);

  add_colors("conv3", 8, 35.0);
  for (int k = 0; k < 6; ++k) add("conv3", 2 * k + 1, PlantKind::kClass, 2 + k);
  add("conv3", 16, PlantKind::kColorClass, 8, 200.0);
  add("conv3", 17, PlantKind::kGray);
  return spec;
}

Fixture generate_synthetic_fixture(const FixtureSpec& spec, std::uint64_t seed) {
  validate_spec(spec);
  Rng rng(seed);
  const SpatialDims input = spec.arch.input_size;
  const int n_images = spec.image_count;

  Fixture fx;
  fx.spec = spec;

  // Achromatic i.i.d. texture everywhere.
  fx.images.reserve(n_images);
  for (int i = 0; i < n_images; ++i) {
    RgbImage image(input.rows, input.cols);
    for (int r = 0; r < input.rows; ++r) {
      for (int c = 0; c < input.cols; ++c) {
        const double g = rng.uniform(0.15, 0.85);
        set_pixel(image, r, c, {g, g, g});
      }
    }
    fx.images.push_back(std::move(image));
  }

  std::vector<int> order(n_images);
  for (int i = 0; i < n_images; ++i) order[i] = i;
  rng.shuffle(order);

  struct Dims {
    RFGeometry rf;
    SpatialDims map;
  };
  std::map<std::string, Dims> dims;
  for (const auto& layer : spec.layers) {
    dims[layer.name] = {receptive_field(spec.arch, layer.name), output_dims(spec.arch, layer.name)};
  }

  // Dedicated blocks: owner plant, argmax position and label per image.
  std::vector<int> owner(n_images, -1);
  std::vector<ArgmaxPos> owner_pos(n_images);
  std::vector<int> labels(n_images, -1);
  std::set<int> used_classes;
  std::size_t next = 0;
  for (std::size_t pi = 0; pi < spec.plants.size(); ++pi) {
    const auto& p = spec.plants[pi];
    const int count = dedicated_images(spec, p);
    if (count == 0) continue;
    const Dims& d = dims.at(p.layer);
    const auto [rlo, rhi] = interior_range(d.rf, d.map.rows, input.rows);
    const auto [clo, chi] = interior_range(d.rf, d.map.cols, input.cols);
    if (is_painted(p.kind) && (rhi < rlo || chi < clo)) {
      throw ArgumentError("receptive field of '" + p.layer + "' does not fit inside the image");
    }
    const int labeled = has_class(p.kind)
                            ? std::max(1, static_cast<int>(std::lround(p.purity * count)))
                            : 0;
    if (has_class(p.kind)) used_classes.insert(p.class_index);

    Vec3 patch{};
    if (p.kind != PlantKind::kGray) {
      const double theta = p.hue_degrees * std::numbers::pi / 180.0;
      patch = opp_to_rgb({0.5 * std::numbers::sqrt3, spec.chroma * std::cos(theta),
                          spec.chroma * std::sin(theta)});
    }
    for (int j = 0; j < count; ++j) {
      const int image = order[next++];
      owner[image] = static_cast<int>(pi);
      ArgmaxPos pos;
      if (rhi >= rlo && chi >= clo) {
        pos = {static_cast<std::uint16_t>(rlo + rng.below(rhi - rlo + 1)),
               static_cast<std::uint16_t>(clo + rng.below(chi - clo + 1))};
      } else {
        pos = {static_cast<std::uint16_t>(rng.below(d.map.rows)),
               static_cast<std::uint16_t>(rng.below(d.map.cols))};
      }
      owner_pos[image] = pos;
      if (j < labeled) labels[image] = p.class_index;
      if (is_painted(p.kind)) {
        if (p.kind == PlantKind::kGray) {
          const double g = rng.uniform(0.2, 0.8);
          patch = {g, g, g};
        }
        paint_rf(fx.images[image], project_to_image(d.rf, pos, input), patch,
                 spec.surround_noise, rng);
      }
    }
  }

  // Remaining images get distinct labels from classes no plant uses, so that
  // unplanted neurons see (nearly) one class per image.
  std::vector<int> free_classes;
  for (int c = 0; c < spec.class_count; ++c) {
    if (!used_classes.contains(c)) free_classes.push_back(c);
  }
  if (free_classes.empty()) free_classes.push_back(0);
  rng.shuffle(free_classes);
  std::size_t next_class = 0;
  for (int i = 0; i < n_images; ++i) {
    if (labels[i] >= 0) continue;
    labels[i] = free_classes[next_class++ % free_classes.size()];
  }

  std::map<std::pair<std::string, int>, int> plant_of;
  for (std::size_t pi = 0; pi < spec.plants.size(); ++pi) {
    plant_of[{spec.plants[pi].layer, spec.plants[pi].neuron}] = static_cast<int>(pi);
  }

  for (const auto& layer : spec.layers) {
    const SpatialDims map = dims.at(layer.name).map;
    ActivationTable table(layer.name, layer.neurons, n_images);
    for (int n = 0; n < layer.neurons; ++n) {
      const auto found = plant_of.find({layer.name, n});
      const int pi = found == plant_of.end() ? -1 : found->second;
      const bool dead = pi >= 0 && spec.plants[pi].kind == PlantKind::kDead;
      const double scale = rng.uniform(0.5, 2.0);
      bool top_assigned = false;
      for (int i = 0; i < n_images; ++i) {
        double v;
        ArgmaxPos pos{static_cast<std::uint16_t>(rng.below(map.rows)),
                      static_cast<std::uint16_t>(rng.below(map.cols))};
        if (dead) {
          v = rng.uniform(-1.0, 0.0);
        } else if (pi >= 0 && owner[i] == pi) {
          v = top_assigned ? rng.uniform(0.75, 1.0) : 1.0;
          top_assigned = true;
          pos = owner_pos[i];
        } else if (pi >= 0 || owner[i] >= 0) {
          v = rng.uniform(0.0, 0.6);
        } else {
          v = rng.uniform();
        }
        table.value(n, i) = static_cast<float>(v * scale);
        table.argmax(n, i) = pos;
      }
    }
    fx.tables.push_back(std::move(table));
  }

  DatasetManifest& m = fx.manifest;
  m.preprocessing = "synthetic " + std::to_string(input.rows) + "x" + std::to_string(input.cols);
  for (int c = 0; c < spec.class_count; ++c) m.class_names.push_back(class_name(c));
  for (const auto& layer : spec.layers) {
    m.layers.push_back({layer.name, layer.neurons, dims.at(layer.name).map,
                        layer.name + std::string(kActivationExtension)});
  }
  for (int i = 0; i < n_images; ++i) {
    std::string digits = std::to_string(i);
    digits.insert(0, digits.size() < 4 ? 4 - digits.size() : 0, '0');
    m.images.push_back({i, "images/img_" + digits + ".png", labels[i]});
  }
  m.ontology_path = "ontology.tsv";

  std::map<std::string, std::string, std::less<>> parent;
  for (int c = 0; c < spec.class_count; ++c) {
    const std::string group = "group_" + std::to_string(c / 10);
    const std::string super = "super_" + std::to_string(c / 100);
    parent[class_name(c)] = group;
    parent[group] = super;
    parent[super] = "entity";
  }
  fx.ontology = OntologyMap(std::move(parent));
  return fx;
}

void write_fixture(const Fixture& fixture, const fs::path& directory) {
  std::error_code ec;
  fs::create_directories(directory / "images", ec);
  if (ec) throw IoError("cannot create " + directory.string() + ": " + ec.message());
  for (std::size_t i = 0; i < fixture.images.size(); ++i) {
    write_png(fixture.images[i], directory / fixture.manifest.images[i].path);
  }
  write_ontology(fixture.ontology, directory / *fixture.manifest.ontology_path);

  std::ofstream arch(directory / "architecture.arch", std::ios::binary | std::ios::trunc);
  arch << format_architecture(fixture.spec.arch);
  if (!arch) throw IoError("cannot write architecture.arch");
  std::ofstream spec(directory / "fixture.json", std::ios::binary | std::ios::trunc);
  spec << format_fixture_spec(fixture.spec);
  if (!spec) throw IoError("cannot write fixture.json");

  write_manifest(fixture.manifest, fixture.tables, directory);
}

std::string format_fixture_spec(const FixtureSpec& spec) {
  json j;
  j["architecture"] = format_architecture(spec.arch);
  j["layers"] = json::array();
  for (const auto& l : spec.layers) j["layers"].push_back({{"name", l.name}, {"neurons", l.neurons}});
  j["image_count"] = spec.image_count;
  j["class_count"] = spec.class_count;
  j["color_images"] = spec.color_images;
  j["class_images"] = spec.class_images;
  j["chroma"] = spec.chroma;
  j["surround_noise"] = spec.surround_noise;
  j["plants"] = json::array();
  for (const auto& p : spec.plants) {
    j["plants"].push_back({{"layer", p.layer},
                           {"neuron", p.neuron},
                           {"kind", std::string(to_string(p.kind))},
                           {"hue_degrees", p.hue_degrees},
                           {"class_index", p.class_index},
                           {"purity", p.purity},
                           {"images", p.images}});
  }
  return j.dump(2) + "\n";
}

FixtureSpec parse_fixture_spec(std::string_view json_text) {
  FixtureSpec spec;
  try {
    const json j = json::parse(json_text);
    spec.arch = parse_architecture(j.at("architecture").get<std::string>());
    for (const auto& l : j.at("layers")) {
      spec.layers.push_back({l.at("name").get<std::string>(), l.at("neurons").get<int>()});
    }
    spec.image_count = j.value("image_count", spec.image_count);
    spec.class_count = j.value("class_count", spec.class_count);
    spec.color_images = j.value("color_images", spec.color_images);
    spec.class_images = j.value("class_images", spec.class_images);
    spec.chroma = j.value("chroma", spec.chroma);
    spec.surround_noise = j.value("surround_noise", spec.surround_noise);
    if (j.contains("plants")) {
      for (const auto& p : j.at("plants")) {
        PlantedNeuron plant;
        plant.layer = p.at("layer").get<std::string>();
        plant.neuron = p.at("neuron").get<int>();
        plant.kind = parse_plant_kind(p.at("kind").get<std::string>());
        plant.hue_degrees = p.value("hue_degrees", 0.0);
        plant.class_index = p.value("class_index", 0);
        plant.purity = p.value("purity", 1.0);
        plant.images = p.value("images", 0);
        spec.plants.push_back(plant);
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("fixture spec: ") + e.what());
  }
  return spec;
}

FixtureSpec read_fixture_spec(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open fixture spec " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_fixture_spec(ss.str());
}

}  // namespace neuroscope
