#include "neuroscope/classsel.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "neuroscope/errors.hpp"

namespace neuroscope {

// Cumulative frequencies are sums of rounded ratios; with th = 1 the full sum
// can land one ulp short of 1.
constexpr double kCoverageSlack = 1e-12;

ClassDistribution class_frequencies(const NeuronRanking& ranking, std::span<const int> labels) {
  if (ranking.entries.empty()) {
    throw ArgumentError("empty ranking for neuron " + std::to_string(ranking.neuron) + " of '" +
                        ranking.layer + "'");
  }
  std::map<int, double> mass;
  double total = 0.0;
  for (const auto& e : ranking.entries) {
    if (e.image_id < 0 || static_cast<std::size_t>(e.image_id) >= labels.size()) {
      throw ArgumentError("no label for image " + std::to_string(e.image_id));
    }
    const int label = labels[e.image_id];
    if (label < 0) throw ArgumentError("negative class label for image " + std::to_string(e.image_id));
    mass[label] += e.weight;
    total += e.weight;
  }
  if (!(total > 0.0)) throw ArgumentError("ranking weights sum to zero");

  ClassDistribution dist;
  dist.layer = ranking.layer;
  dist.neuron = ranking.neuron;
  dist.n_images = static_cast<int>(ranking.entries.size());
  for (const auto& [cls, m] : mass) dist.freqs.push_back({cls, m / total});
  return dist;
}

std::optional<ClassSelectivity> class_selectivity_index(const ClassDistribution& dist, double th) {
  if (!(th > 0.0 && th <= 1.0)) throw ArgumentError("th must lie in (0, 1]");
  if (dist.freqs.empty()) throw ArgumentError("empty class distribution");
  if (dist.n_images < static_cast<int>(dist.freqs.size())) {
    throw ArgumentError("distribution has more classes than images");
  }
  if (dist.n_images == 1) return std::nullopt;

  std::vector<ClassFrequency> sorted = dist.freqs;
  std::sort(sorted.begin(), sorted.end(), [](const ClassFrequency& a, const ClassFrequency& b) {
    return a.frequency > b.frequency || (a.frequency == b.frequency && a.class_index < b.class_index);
  });

  ClassSelectivity out;
  out.th = th;
  out.n_images = dist.n_images;
  double cumulative = 0.0;
  for (const auto& f : sorted) {
    out.covering_set.push_back(f);
    cumulative += f.frequency;
    if (cumulative >= th - kCoverageSlack) break;
  }
  out.covering_count = static_cast<int>(out.covering_set.size());
  out.gamma = static_cast<double>(out.n_images - out.covering_count) / (out.n_images - 1);
  return out;
}

// ---------------------------------------------------------------------------
// Ontology

OntologyMap::OntologyMap(std::map<std::string, std::string, std::less<>> parent)
    : parent_(std::move(parent)) {
  for (const auto& [child, par] : parent_) {
    if (child == par) throw ValidationError("ontology: '" + child + "' is its own parent");
    std::set<std::string_view> seen{child};
    auto it = parent_.find(par);
    std::string_view cur = par;
    while (true) {
      if (!seen.insert(cur).second) {
        throw ValidationError("ontology: cycle through '" + std::string(cur) + "'");
      }
      it = parent_.find(cur);
      if (it == parent_.end()) break;
      cur = it->second;
    }
  }
}

std::vector<std::string> OntologyMap::roots() const {
  std::set<std::string> out;
  for (const auto& [child, par] : parent_) {
    if (!parent_.contains(par)) out.insert(par);
  }
  return {out.begin(), out.end()};
}

bool OntologyMap::contains(std::string_view label) const {
  if (parent_.find(label) != parent_.end()) return true;
  return std::any_of(parent_.begin(), parent_.end(),
                     [&](const auto& kv) { return kv.second == label; });
}

std::vector<std::string> OntologyMap::ancestors(std::string_view label) const {
  std::vector<std::string> out;
  auto it = parent_.find(label);
  while (it != parent_.end()) {
    out.push_back(it->second);
    it = parent_.find(it->second);
  }
  return out;
}

int OntologyMap::depth(std::string_view label) const {
  return static_cast<int>(ancestors(label).size());
}

OntologyMap parse_ontology(std::string_view text) {
  std::map<std::string, std::string, std::less<>> parent;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw ValidationError("ontology line " + std::to_string(line_no) +
                            ": expected child<TAB>parent");
    }
    std::string child = line.substr(0, tab);
    std::string par = line.substr(tab + 1);
    auto [it, inserted] = parent.emplace(child, par);
    if (!inserted && it->second != par) {
      throw ValidationError("ontology: '" + child + "' has two parents");
    }
  }
  return OntologyMap(std::move(parent));
}

OntologyMap read_ontology(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open ontology " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ontology(ss.str());
}

void write_ontology(const OntologyMap& ontology, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [child, par] : ontology.parents()) out << child << '\t' << par << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<AncestorMass> rollup_ontology(const ClassDistribution& dist,
                                          std::span<const std::string> class_names,
                                          const OntologyMap& ontology) {
  std::map<std::string, double> mass;
  for (const auto& f : dist.freqs) {
    if (f.class_index < 0 || static_cast<std::size_t>(f.class_index) >= class_names.size()) {
      throw ArgumentError("class index " + std::to_string(f.class_index) + " has no name");
    }
    const std::string& label = class_names[f.class_index];
    if (!ontology.contains(label)) {
      throw ValidationError("class '" + label + "' is missing from the ontology");
    }
    for (const auto& a : ontology.ancestors(label)) mass[a] += f.frequency;
  }

  std::vector<AncestorMass> out;
  out.reserve(mass.size());
  for (const auto& [label, m] : mass) out.push_back({label, ontology.depth(label), m});
  std::sort(out.begin(), out.end(), [](const AncestorMass& a, const AncestorMass& b) {
    if (a.depth != b.depth) return a.depth < b.depth;
    if (a.mass != b.mass) return a.mass > b.mass;
    return a.label < b.label;
  });
  return out;
}

}  // namespace neuroscope
