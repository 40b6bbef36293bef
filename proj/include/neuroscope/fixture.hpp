#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "neuroscope/classsel.hpp"
#include "neuroscope/geometry.hpp"
#include "neuroscope/image.hpp"
#include "neuroscope/manifest.hpp"

namespace neuroscope {

enum class PlantKind {
  kColor,       // top crops: gray surround with a solid patch of one hue
  kGray,        // top crops: gray surround with a gray patch of varying intensity
  kClass,       // top images share one class label (purity fraction)
  kColorClass,  // kColor whose images all carry one class label
  kDead,        // every activation negative
};

struct PlantedNeuron {
  std::string layer;
  int neuron = 0;
  PlantKind kind = PlantKind::kColor;
  double hue_degrees = 0.0;
  int class_index = 0;
  double purity = 1.0;
  int images = 0;  // dedicated top images; 0 = fixture default for the kind
};

struct FixtureLayer {
  std::string name;
  int neurons = 0;
};

struct FixtureSpec {
  ArchitectureSpec arch;
  std::vector<FixtureLayer> layers;
  int image_count = 500;
  int class_count = 1000;
  int color_images = 8;
  int class_images = 10;
  double chroma = 0.5;           // opponent-space chroma of planted patches
  double surround_noise = 0.03;  // achromatic jitter around planted patches
  std::vector<PlantedNeuron> plants;
};

struct Fixture {
  FixtureSpec spec;
  DatasetManifest manifest;
  std::vector<ActivationTable> tables;
  std::vector<RgbImage> images;
  OntologyMap ontology;
};

/// Three layers of 32 neurons over 500 images of 40x40 pixels, with color,
/// gray, class, joint, and dead neurons planted.
FixtureSpec default_fixture_spec();

/// Deterministic for fixed spec and seed. Throws ArgumentError when the spec
/// plants a class index beyond class_count, references an unknown layer or
/// neuron, or needs more dedicated images than image_count provides.
Fixture generate_synthetic_fixture(const FixtureSpec& spec, std::uint64_t seed);

/// Writes manifest.nsx, payloads, images/, architecture.arch, ontology.tsv
/// and fixture.json (the spec, i.e. the planted ground truth).
void write_fixture(const Fixture& fixture, const std::filesystem::path& directory);

std::string format_fixture_spec(const FixtureSpec& spec);
FixtureSpec parse_fixture_spec(std::string_view json_text);
FixtureSpec read_fixture_spec(const std::filesystem::path& path);

std::string_view to_string(PlantKind kind);
PlantKind parse_plant_kind(std::string_view text);

}  // namespace neuroscope
