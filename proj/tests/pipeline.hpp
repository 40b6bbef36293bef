#pragma once

#include <vector>

#include "neuroscope/analysis.hpp"
#include "neuroscope/fixture.hpp"

namespace testing_support {

/// Runs the per-layer analysis on an in-memory fixture.
inline std::vector<neuroscope::LayerAnalysis> analyze_fixture(
    const neuroscope::Fixture& fx, const neuroscope::AnalysisOptions& options = {}) {
  neuroscope::ImageCache cache(fx.manifest);
  for (std::size_t i = 0; i < fx.images.size(); ++i) cache.preload(static_cast<int>(i), fx.images[i]);
  std::vector<neuroscope::LayerAnalysis> out;
  for (const auto& table : fx.tables) {
    out.push_back(neuroscope::analyze_layer(fx.manifest, table, fx.spec.arch, cache, options));
  }
  return out;
}

inline const neuroscope::NeuronAnalysis& find_neuron(
    const std::vector<neuroscope::LayerAnalysis>& layers, const std::string& layer, int neuron) {
  for (const auto& l : layers) {
    if (l.layer == layer) return l.neurons.at(static_cast<std::size_t>(neuron));
  }
  throw std::out_of_range("no layer " + layer);
}

}  // namespace testing_support
