#include "neuroscope/report.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "neuroscope/colorsel.hpp"
#include "neuroscope/errors.hpp"
#include "neuroscope/svg.hpp"

namespace neuroscope {

namespace {

namespace fs = std::filesystem;
using csv::format_double;

std::optional<double> key_value(const NeuronRecord& r, SortKey key) {
  switch (key) {
    case SortKey::kAlpha:
      return r.alpha;
    case SortKey::kGamma:
      return r.gamma;
    case SortKey::kAuc:
      return r.auc_fraction;
    case SortKey::kJoint:
      if (r.alpha && r.gamma) return std::min(*r.alpha, *r.gamma);
      return std::nullopt;
  }
  return std::nullopt;
}

void require_key(const RecordSet& records, SortKey key) {
  const bool ok = key == SortKey::kAlpha   ? records.has_alpha
                  : key == SortKey::kGamma ? records.has_gamma
                  : key == SortKey::kAuc   ? records.has_auc
                                           : records.has_alpha && records.has_gamma;
  if (!ok) {
    throw ArgumentError("index '" + std::string(to_string(key)) + "' was not computed");
  }
}

std::string hex_color(double r, double g, double b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out = "#";
  for (double v : {r, g, b}) {
    const int q = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    out += kDigits[q >> 4];
    out += kDigits[q & 15];
  }
  return out;
}

// Low bins are gray, high bins saturate towards the palette hue.
std::string palette_color(Palette palette, int bin, int bins) {
  const double t = bins > 1 ? static_cast<double>(bin) / (bins - 1) : 1.0;
  const double gray = 0.82;
  const std::array<double, 3> end = palette == Palette::kReddish
                                        ? std::array<double, 3>{0.80, 0.12, 0.10}
                                        : std::array<double, 3>{0.10, 0.30, 0.75};
  return hex_color(gray + (end[0] - gray) * t, gray + (end[1] - gray) * t,
                   gray + (end[2] - gray) * t);
}

constexpr std::string_view kDeadColor = "#404040";

constexpr double kWheelSize = 640.0;
constexpr double kWheelInner = 70.0;
constexpr double kWheelOuter = 290.0;
constexpr double kThumbSize = 28.0;

// 3x5 bitmap digits, rows top to bottom, bit 2 = left column.
constexpr std::array<std::array<unsigned char, 5>, 10> kDigitFont = {{
    {7, 5, 5, 5, 7},  // 0
    {2, 6, 2, 2, 7},  // 1
    {7, 1, 7, 4, 7},  // 2
    {7, 1, 7, 1, 7},  // 3
    {5, 5, 7, 1, 1},  // 4
    {7, 4, 7, 1, 7},  // 5
    {7, 4, 7, 5, 7},  // 6
    {7, 1, 1, 1, 1},  // 7
    {7, 5, 7, 5, 7},  // 8
    {7, 5, 7, 1, 7},  // 9
}};

void draw_number(RgbImage& image, int top, int left, int value, int scale) {
  const std::string digits = std::to_string(value);
  for (std::size_t d = 0; d < digits.size(); ++d) {
    const auto& glyph = kDigitFont[digits[d] - '0'];
    const int x0 = left + static_cast<int>(d) * 4 * scale;
    for (int gr = 0; gr < 5; ++gr) {
      for (int gc = 0; gc < 3; ++gc) {
        if (!((glyph[gr] >> (2 - gc)) & 1)) continue;
        for (int sr = 0; sr < scale; ++sr) {
          for (int sc = 0; sc < scale; ++sc) {
            const int r = top + gr * scale + sr;
            const int c = x0 + gc * scale + sc;
            if (r < 0 || c < 0 || r >= image.rows() || c >= image.cols()) continue;
            for (int ch = 0; ch < 3; ++ch) image.at(r, c, ch) = 0.0f;
          }
        }
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Ranked tables

SortKey parse_sort_key(std::string_view text) {
  for (auto k : {SortKey::kAlpha, SortKey::kGamma, SortKey::kAuc, SortKey::kJoint}) {
    if (to_string(k) == text) return k;
  }
  throw ArgumentError("unknown sort key '" + std::string(text) + "'");
}

std::string_view to_string(SortKey key) {
  switch (key) {
    case SortKey::kAlpha:
      return "alpha";
    case SortKey::kGamma:
      return "gamma";
    case SortKey::kAuc:
      return "auc";
    case SortKey::kJoint:
      return "joint";
  }
  return "?";
}

csv::Table rank_table(const RecordSet& records, SortKey key) {
  require_key(records, key);
  struct Item {
    const NeuronRecord* record;
    double value;
  };
  std::vector<Item> items;
  for (const auto& r : records.records) {
    if (r.dead) continue;
    if (auto v = key_value(r, key)) items.push_back({&r, *v});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.record->layer_index != b.record->layer_index) {
      return a.record->layer_index < b.record->layer_index;
    }
    return a.record->neuron < b.record->neuron;
  });
  csv::Table t;
  t.header = {"rank", "layer", "neuron", std::string(to_string(key))};
  for (std::size_t i = 0; i < items.size(); ++i) {
    t.rows.push_back({std::to_string(i + 1), items[i].record->layer,
                      std::to_string(items[i].record->neuron), format_double(items[i].value)});
  }
  return t;
}

csv::Table color_table(const RecordSet& records) {
  csv::Table t;
  t.header = {"layer", "neuron", "alpha", "hue_angle", "chroma_magnitude", "dead"};
  for (const auto& r : records.records) {
    csv::Row row{r.layer, std::to_string(r.neuron), "", "", "", r.dead ? "1" : "0"};
    if (r.alpha) row[2] = format_double(*r.alpha);
    if (r.hue) {
      if (!r.hue->achromatic) row[3] = format_double(r.hue->degrees);
      row[4] = format_double(r.hue->chroma_magnitude);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

csv::Table class_table(const RecordSet& records, std::span<const std::string> class_names) {
  constexpr int kShown = 5;
  csv::Table t;
  t.header = {"layer", "neuron", "gamma", "M"};
  for (int k = 1; k <= kShown; ++k) {
    t.header.push_back("class_" + std::to_string(k));
    t.header.push_back("f_" + std::to_string(k));
  }
  for (const auto& r : records.records) {
    csv::Row row(t.header.size());
    row[0] = r.layer;
    row[1] = std::to_string(r.neuron);
    if (r.class_selectivity) {
      const auto& cs = *r.class_selectivity;
      row[2] = format_double(cs.gamma);
      row[3] = std::to_string(cs.covering_count);
      for (int k = 0; k < kShown && k < static_cast<int>(cs.covering_set.size()); ++k) {
        const int idx = cs.covering_set[k].class_index;
        if (idx < 0 || static_cast<std::size_t>(idx) >= class_names.size()) {
          throw ArgumentError("class index " + std::to_string(idx) + " has no name");
        }
        row[4 + 2 * k] = class_names[idx];
        row[5 + 2 * k] = format_double(cs.covering_set[k].frequency);
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Histograms

int bin_of(std::span<const double> edges, double value) {
  if (edges.size() < 2 || edges.front() != 0.0 || edges.back() != 1.0) {
    throw ArgumentError("bin edges must run from 0 to 1");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw ArgumentError("bin edges must increase strictly");
  }
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ArgumentError("index value " + format_double(value) + " outside [0, 1]");
  }
  const auto it = std::upper_bound(edges.begin(), edges.end(), value);
  const int bins = static_cast<int>(edges.size()) - 1;
  return std::min(static_cast<int>(it - edges.begin()) - 1, bins - 1);
}

HistogramSpec build_histogram(const RecordSet& records, std::span<const std::string> layers,
                              SortKey index, std::vector<double> bin_edges) {
  if (index != SortKey::kAlpha && index != SortKey::kGamma) {
    throw ArgumentError("histograms are drawn for alpha or gamma");
  }
  require_key(records, index);
  HistogramSpec spec;
  spec.index_name = std::string(to_string(index));
  spec.palette = index == SortKey::kAlpha ? Palette::kReddish : Palette::kBluish;
  if (!bin_edges.empty()) spec.bin_edges = std::move(bin_edges);
  const int bins = static_cast<int>(spec.bin_edges.size()) - 1;
  bin_of(spec.bin_edges, 0.0);  // validates the edges

  spec.layers.assign(layers.begin(), layers.end());
  spec.counts.assign(layers.size(), std::vector<int>(std::max(bins, 0), 0));
  spec.dead.assign(layers.size(), 0);
  for (const auto& r : records.records) {
    const auto it = std::find(spec.layers.begin(), spec.layers.end(), r.layer);
    if (it == spec.layers.end()) continue;
    const auto li = static_cast<std::size_t>(it - spec.layers.begin());
    if (r.dead) {
      ++spec.dead[li];
      continue;
    }
    std::optional<double> v = key_value(r, index);
    if (!v && index == SortKey::kGamma) v = 1.0;
    if (!v) {
      throw ArgumentError("neuron " + std::to_string(r.neuron) + " of '" + r.layer +
                          "' has no " + spec.index_name);
    }
    ++spec.counts[li][bin_of(spec.bin_edges, *v)];
  }
  return spec;
}

csv::Table histogram_table(const HistogramSpec& spec) {
  csv::Table t;
  t.header = {"layer", "bin", "lower", "upper", "count"};
  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    for (std::size_t b = 0; b < spec.counts[li].size(); ++b) {
      t.rows.push_back({spec.layers[li], std::to_string(b), format_double(spec.bin_edges[b]),
                        format_double(spec.bin_edges[b + 1]), std::to_string(spec.counts[li][b])});
    }
    t.rows.push_back({spec.layers[li], "dead", "", "", std::to_string(spec.dead[li])});
  }
  return t;
}

std::string histogram_svg(const HistogramSpec& spec) {
  const double bar_w = 56.0, bar_gap = 28.0, left = 64.0, top = 40.0, plot_h = 300.0;
  const int bins = static_cast<int>(spec.bin_edges.size()) - 1;
  const double width = left + spec.layers.size() * (bar_w + bar_gap) + 170.0;
  const double height = top + plot_h + 60.0;
  svg::Document doc(width, height);
  doc.rect(0, 0, width, height, "#ffffff");
  doc.text(left, 24, "Neuron distribution by " + spec.index_name, 14.0);

  // Axis with percent ticks.
  doc.line(left - 6, top, left - 6, top + plot_h, "#000000");
  for (int p = 0; p <= 100; p += 25) {
    const double y = top + plot_h * (1.0 - p / 100.0);
    doc.line(left - 10, y, left - 6, y, "#000000");
    doc.text(left - 12, y + 4, std::to_string(p) + "%", 10.0, "end");
  }

  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    int total = spec.dead[li];
    for (int c : spec.counts[li]) total += c;
    const double x = left + li * (bar_w + bar_gap);
    double y = top + plot_h;
    doc.open_group({{"class", "bar"}, {"data-layer", spec.layers[li]}});
    auto segment = [&](int count, const std::string& fill, const std::string& label) {
      if (count == 0 || total == 0) return;
      const double h = plot_h * count / total;
      y -= h;
      doc.rect(x, y, bar_w, h, fill,
               {{"stroke", "#ffffff"}, {"data-bin", label}, {"data-count", std::to_string(count)}});
    };
    segment(spec.dead[li], std::string(kDeadColor), "dead");
    for (int b = 0; b < bins; ++b) {
      segment(spec.counts[li][b], palette_color(spec.palette, b, bins), std::to_string(b));
    }
    doc.close_group();
    doc.text(x + bar_w / 2, top + plot_h + 18, spec.layers[li], 11.0, "middle");
  }

  // Legend, top bin first.
  const double lx = left + spec.layers.size() * (bar_w + bar_gap) + 10.0;
  for (int b = bins - 1, row = 0; b >= 0; --b, ++row) {
    const double ly = top + row * 20.0;
    doc.rect(lx, ly, 14, 14, palette_color(spec.palette, b, bins));
    const std::string close = b == bins - 1 ? "]" : ")";
    doc.text(lx + 20, ly + 11,
             "[" + svg::num(spec.bin_edges[b]).substr(0, 4) + ", " +
                 svg::num(spec.bin_edges[b + 1]).substr(0, 4) + close,
             11.0);
  }
  const double ly = top + bins * 20.0;
  doc.rect(lx, ly, 14, 14, kDeadColor);
  doc.text(lx + 20, ly + 11, "dead", 11.0);
  return doc.str();
}

void emit_histogram(const HistogramSpec& spec, const fs::path& svg_path,
                    const fs::path& csv_path) {
  if (spec.counts.size() != spec.layers.size() || spec.dead.size() != spec.layers.size()) {
    throw ArgumentError("histogram spec is inconsistent");
  }
  for (std::size_t li = 0; li < spec.layers.size(); ++li) {
    int total = spec.dead[li];
    for (int c : spec.counts[li]) total += c;
    if (total == 0) throw ArgumentError("layer '" + spec.layers[li] + "' has no neurons");
  }
  const std::string text = histogram_svg(spec);
  std::ofstream out(svg_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + svg_path.string());
  out << text;
  if (!out) throw IoError("write failed: " + svg_path.string());
  csv::write(csv_path, histogram_table(spec));
}

// ---------------------------------------------------------------------------
// Hue wheel

HueWheelSpec build_hue_wheel(const RecordSet& records, std::span<const std::string> layers,
                             double alpha_threshold, const std::string& thumbnail_dir) {
  require_key(records, SortKey::kAlpha);
  HueWheelSpec spec;
  spec.rings.assign(layers.begin(), layers.end());
  spec.alpha_threshold = alpha_threshold;
  for (const auto& r : records.records) {
    const auto it = std::find(spec.rings.begin(), spec.rings.end(), r.layer);
    if (it == spec.rings.end() || r.dead || !r.alpha || !r.hue || r.hue->achromatic) continue;
    if (*r.alpha < alpha_threshold) continue;
    HueMark m;
    m.layer = r.layer;
    m.ring = static_cast<int>(it - spec.rings.begin());
    m.neuron = r.neuron;
    m.hue_degrees = r.hue->degrees;
    m.alpha = *r.alpha;
    const std::string name = r.layer + "_" + std::to_string(r.neuron) + ".png";
    m.thumbnail = thumbnail_dir.empty() ? name : thumbnail_dir + "/" + name;
    spec.marks.push_back(std::move(m));
  }
  std::sort(spec.marks.begin(), spec.marks.end(), [](const HueMark& a, const HueMark& b) {
    return a.ring != b.ring ? a.ring < b.ring : a.neuron < b.neuron;
  });
  return spec;
}

MarkPlacement place_mark(const HueWheelSpec& spec, const HueMark& mark) {
  if (mark.ring < 0 || mark.ring >= static_cast<int>(spec.rings.size())) {
    throw ArgumentError("mark ring out of range");
  }
  const double band = (kWheelOuter - kWheelInner) / static_cast<double>(spec.rings.size());
  MarkPlacement p;
  p.radius = kWheelInner + (mark.ring + 0.5) * band;
  p.angle_degrees = mark.hue_degrees;
  const double t = mark.hue_degrees * std::numbers::pi / 180.0;
  const double c = kWheelSize / 2.0;
  p.x = c + p.radius * std::cos(t);
  p.y = c - p.radius * std::sin(t);
  return p;
}

std::string hue_wheel_svg(const HueWheelSpec& spec, const fs::path& base_dir) {
  if (spec.rings.empty()) throw ArgumentError("hue wheel needs at least one ring");
  const double c = kWheelSize / 2.0;
  svg::Document doc(kWheelSize, kWheelSize);
  doc.rect(0, 0, kWheelSize, kWheelSize, "#ffffff");

  // Hue reference band outside the rings.
  for (int deg = 0; deg < 360; deg += 10) {
    const double t = deg * std::numbers::pi / 180.0;
    const Vec3 rgb = opp_to_rgb({0.5 * std::numbers::sqrt3, 0.5 * std::cos(t), 0.5 * std::sin(t)});
    doc.line(c + (kWheelOuter + 6) * std::cos(t), c - (kWheelOuter + 6) * std::sin(t),
             c + (kWheelOuter + 18) * std::cos(t), c - (kWheelOuter + 18) * std::sin(t),
             hex_color(rgb[0], rgb[1], rgb[2]), 6.0);
  }

  const double band = (kWheelOuter - kWheelInner) / static_cast<double>(spec.rings.size());
  for (std::size_t i = 0; i <= spec.rings.size(); ++i) {
    doc.circle(c, c, kWheelInner + i * band, "none", "#bdbdbd");
  }
  for (std::size_t i = 0; i < spec.rings.size(); ++i) {
    doc.text(c, c - (kWheelInner + (i + 0.5) * band) + 4, spec.rings[i], 10.0, "middle",
             {{"fill", "#757575"}});
  }

  for (const auto& m : spec.marks) {
    const fs::path thumb = base_dir / m.thumbnail;
    if (!fs::exists(thumb)) throw IoError("missing thumbnail " + thumb.string());
    const MarkPlacement p = place_mark(spec, m);
    doc.open_group({{"class", "mark"},
                    {"data-layer", m.layer},
                    {"data-neuron", std::to_string(m.neuron)},
                    {"data-hue", svg::num(m.hue_degrees)},
                    {"data-alpha", svg::num(m.alpha)}});
    doc.image(p.x - kThumbSize / 2, p.y - kThumbSize / 2, kThumbSize, kThumbSize, m.thumbnail);
    doc.close_group();
  }
  return doc.str();
}

void emit_hue_wheel(const HueWheelSpec& spec, const fs::path& svg_path) {
  const std::string text = hue_wheel_svg(spec, svg_path.parent_path());
  std::ofstream out(svg_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + svg_path.string());
  out << text;
  if (!out) throw IoError("write failed: " + svg_path.string());
}

// ---------------------------------------------------------------------------
// NF mosaics

std::pair<int, int> Mosaic::cell_origin(int index) const {
  const int r = index / grid_cols;
  const int c = index % grid_cols;
  return {gap + r * (cell + label_h + gap), gap + c * (cell + gap)};
}

std::pair<int, int> mosaic_grid(int n) {
  if (n < 1) throw ArgumentError("mosaic needs at least one cell");
  int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  while (cols * cols < n) ++cols;
  while (cols > 1 && (cols - 1) * (cols - 1) >= n) --cols;
  return {(n + cols - 1) / cols, cols};
}

RgbImage resample_nearest(const RgbImageD& image, int size) {
  if (size < 1) throw ArgumentError("resample size must be positive");
  if (image.rows() < 1 || image.cols() < 1) throw ArgumentError("cannot resample an empty image");
  RgbImage out(size, size);
  for (int r = 0; r < size; ++r) {
    const int sr = std::min(image.rows() - 1, (2 * r + 1) * image.rows() / (2 * size));
    for (int c = 0; c < size; ++c) {
      const int sc = std::min(image.cols() - 1, (2 * c + 1) * image.cols() / (2 * size));
      for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = static_cast<float>(image.at(sr, sc, ch));
    }
  }
  return out;
}

Mosaic emit_nf_mosaic(std::span<const NeuronFeature* const> nfs, std::span<const int> neurons,
                      int cell) {
  if (nfs.empty()) throw ArgumentError("mosaic needs at least one NF");
  if (nfs.size() != neurons.size()) throw ArgumentError("one neuron index per NF is required");
  if (cell < 0) throw ArgumentError("cell size must be nonnegative");
  if (cell == 0) {
    for (const auto* nf : nfs) cell = std::max({cell, nf->rows(), nf->cols()});
  }
  Mosaic m;
  std::tie(m.grid_rows, m.grid_cols) = mosaic_grid(static_cast<int>(nfs.size()));
  m.cell = cell;
  m.gap = 2;
  const int scale = std::max(1, cell / 24);
  m.label_h = 5 * scale + 4;
  const int width = m.gap + m.grid_cols * (cell + m.gap);
  const int height = m.gap + m.grid_rows * (cell + m.label_h + m.gap);
  m.image = RgbImage(height, width, 1.0f);

  for (std::size_t i = 0; i < nfs.size(); ++i) {
    const RgbImage tile = resample_nearest(nfs[i]->pixels, cell);
    const auto [top, left] = m.cell_origin(static_cast<int>(i));
    for (int r = 0; r < cell; ++r) {
      for (int c = 0; c < cell; ++c) {
        for (int ch = 0; ch < 3; ++ch) {
          m.image.at(top + r, left + c, ch) = std::clamp(tile.at(r, c, ch), 0.0f, 1.0f);
        }
      }
    }
    draw_number(m.image, top + cell + 2, left, neurons[i], scale);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Tag clouds

std::string tag_cloud_json(const std::vector<LayerAnalysis>& layers,
                           std::span<const std::string> class_names,
                           const OntologyMap* ontology) {
  using json = nlohmann::json;
  json doc;
  doc["layers"] = json::array();
  for (const auto& layer : layers) {
    json jl;
    jl["layer"] = layer.layer;
    jl["neurons"] = json::array();
    for (const auto& a : layer.neurons) {
      json jn;
      jn["neuron"] = a.neuron;
      jn["dead"] = a.dead;
      jn["gamma"] = a.class_selectivity ? json(a.class_selectivity->gamma) : json(nullptr);
      jn["classes"] = json::array();
      if (a.classes) {
        auto freqs = a.classes->freqs;
        std::sort(freqs.begin(), freqs.end(), [](const ClassFrequency& x, const ClassFrequency& y) {
          return x.frequency != y.frequency ? x.frequency > y.frequency
                                            : x.class_index < y.class_index;
        });
        for (const auto& f : freqs) {
          if (f.class_index < 0 || static_cast<std::size_t>(f.class_index) >= class_names.size()) {
            throw ArgumentError("class index " + std::to_string(f.class_index) + " has no name");
          }
          jn["classes"].push_back({{"label", class_names[f.class_index]}, {"mass", f.frequency}});
        }
        if (ontology) {
          jn["ancestors"] = json::array();
          for (const auto& am : rollup_ontology(*a.classes, class_names, *ontology)) {
            jn["ancestors"].push_back({{"label", am.label}, {"depth", am.depth}, {"mass", am.mass}});
          }
        }
      }
      jl["neurons"].push_back(std::move(jn));
    }
    doc["layers"].push_back(std::move(jl));
  }
  return doc.dump(2) + "\n";
}

}  // namespace neuroscope
