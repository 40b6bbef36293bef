#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "neuroscope/ranking.hpp"

namespace neuroscope {

inline constexpr double kDefaultCoverageThreshold = 1.0;

struct ClassFrequency {
  int class_index = 0;
  double frequency = 0.0;
};

struct ClassDistribution {
  std::string layer;
  int neuron = 0;
  int n_images = 0;                  // N: images contributing labels
  std::vector<ClassFrequency> freqs;  // ascending class_index, all > 0
};

struct ClassSelectivity {
  double gamma = 0.0;
  int covering_count = 0;  // M
  int n_images = 0;        // N
  double th = kDefaultCoverageThreshold;
  std::vector<ClassFrequency> covering_set;  // frequency descending
};

/// f_c = (sum of weights of ranked images in class c) / (sum of all weights).
/// Throws ArgumentError for an empty ranking or a label out of range.
ClassDistribution class_frequencies(const NeuronRanking& ranking,
                                    std::span<const int> labels);

/// M is the shortest prefix of the frequency-descending order (ties by class
/// index) whose cumulative sum reaches th; gamma = (N - M) / (N - 1).
/// Returns nullopt when N == 1, where the index is undefined.
std::optional<ClassSelectivity> class_selectivity_index(const ClassDistribution& dist,
                                                        double th = kDefaultCoverageThreshold);

/// Child -> parent label map loaded from `child<TAB>parent` lines.
class OntologyMap {
 public:
  OntologyMap() = default;
  /// Throws ValidationError on a cycle, a self-loop, or a child listed with
  /// two different parents.
  explicit OntologyMap(std::map<std::string, std::string, std::less<>> parent);

  const std::map<std::string, std::string, std::less<>>& parents() const { return parent_; }
  std::vector<std::string> roots() const;
  bool contains(std::string_view label) const;
  /// Ancestors from immediate parent up to the root.
  std::vector<std::string> ancestors(std::string_view label) const;
  /// Distance to the root (roots have depth 0).
  int depth(std::string_view label) const;

 private:
  std::map<std::string, std::string, std::less<>> parent_;
};

OntologyMap read_ontology(const std::filesystem::path& path);
OntologyMap parse_ontology(std::string_view text);
void write_ontology(const OntologyMap& ontology, const std::filesystem::path& path);

struct AncestorMass {
  std::string label;
  int depth = 0;
  double mass = 0.0;
};

/// Accumulates each class's frequency onto all of its ancestors. Masses at
/// different depths overlap; output is sorted by depth, then mass
/// descending, then label.
std::vector<AncestorMass> rollup_ontology(const ClassDistribution& dist,
                                          std::span<const std::string> class_names,
                                          const OntologyMap& ontology);

}  // namespace neuroscope
