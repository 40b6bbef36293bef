// neuroscope command line: validation, fixtures, rankings, selectivity
// indexes and report artifacts.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "neuroscope/analysis.hpp"
#include "neuroscope/errors.hpp"
#include "neuroscope/fixture.hpp"
#include "neuroscope/manifest.hpp"
#include "neuroscope/ranking.hpp"
#include "neuroscope/report.hpp"

namespace fs = std::filesystem;
using namespace neuroscope;

namespace {

struct Options {
  std::string manifest = ".";
  std::string arch;
  std::vector<std::string> layers;
  int n_max = kDefaultNMax;
  double min_ratio = kDefaultMinRatio;
  double dead_epsilon = kDefaultDeadEpsilon;
  double th = kDefaultCoverageThreshold;
  double alpha_threshold = kDefaultAlphaThreshold;
  int k = kDefaultCurveLength;
  std::string out_dir = "neuroscope_out";
  std::uint64_t seed = 1;
  std::string spec;
  std::string nf_normalization = "n-max";
  std::string pad = "zero";
};

struct Loaded {
  DatasetManifest manifest;
  ArchitectureSpec arch;
  std::vector<ActivationTable> tables;
};

NfNormalization parse_normalization(const std::string& s) {
  if (s == "n-max") return NfNormalization::kNMax;
  if (s == "weight-sum") return NfNormalization::kWeightSum;
  if (s == "coverage") return NfNormalization::kCoverage;
  throw ArgumentError("unknown NF normalization '" + s + "'");
}

ArchitectureSpec load_arch(const Options& o, const fs::path& manifest_root) {
  if (o.arch == "vgg-m") return vgg_m_architecture();
  if (!o.arch.empty()) return read_architecture(o.arch);
  const fs::path beside = manifest_root / "architecture.arch";
  if (fs::exists(beside)) return read_architecture(beside);
  return vgg_m_architecture();
}

std::vector<std::string> selected_layers(const Options& o, const DatasetManifest& m) {
  if (o.layers.empty()) {
    std::vector<std::string> all;
    for (const auto& l : m.layers) all.push_back(l.name);
    return all;
  }
  for (const auto& name : o.layers) m.layer(name);
  return o.layers;
}

Loaded load(const Options& o) {
  Loaded l;
  l.manifest = read_manifest(o.manifest);
  l.arch = load_arch(o, l.manifest.root);
  for (const auto& name : selected_layers(o, l.manifest)) {
    l.tables.push_back(load_activations(l.manifest, name));
  }
  return l;
}

RankingOptions ranking_options(const Options& o) {
  return {o.n_max, o.min_ratio, o.dead_epsilon};
}

fs::path out_dir(const Options& o) {
  const fs::path dir = o.out_dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<LayerAnalysis> analyze(const Loaded& l, const Options& o, bool color, bool cls) {
  AnalysisOptions a;
  a.ranking = ranking_options(o);
  a.nf_normalization = parse_normalization(o.nf_normalization);
  if (o.pad == "zero") {
    a.pad_policy = PadPolicy::kZero;
  } else if (o.pad == "clamp") {
    a.pad_policy = PadPolicy::kClamp;
  } else {
    throw ArgumentError("unknown pad policy '" + o.pad + "'");
  }
  a.th = o.th;
  a.compute_nf = color;
  a.compute_color = color;
  a.compute_class = cls;
  ImageCache cache(l.manifest);
  std::vector<LayerAnalysis> out;
  for (const auto& table : l.tables) {
    out.push_back(analyze_layer(l.manifest, table, l.arch, cache, a));
  }
  return out;
}

std::vector<std::string> layer_names(const std::vector<LayerAnalysis>& layers) {
  std::vector<std::string> names;
  for (const auto& l : layers) names.push_back(l.layer);
  return names;
}

void write_nfs(const std::vector<LayerAnalysis>& layers, const fs::path& dir) {
  const fs::path nf_dir = dir / "nf";
  fs::create_directories(nf_dir);
  for (const auto& layer : layers) {
    std::vector<const NeuronFeature*> nfs;
    std::vector<int> ids;
    for (const auto& a : layer.neurons) {
      if (!a.nf) continue;
      const std::string stem = layer.layer + "_" + std::to_string(a.neuron);
      write_png(a.nf->pixels, nf_dir / (stem + ".png"));
      write_nf_record({a.nf->n_used, a.nf->weight_sum, nf_sharpness(*a.nf)},
                      nf_dir / (stem + ".txt"));
      nfs.push_back(&*a.nf);
      ids.push_back(a.neuron);
    }
    if (!nfs.empty()) {
      const Mosaic m = emit_nf_mosaic(nfs, ids);
      write_png(m.image, dir / ("nf_mosaic_" + layer.layer + ".png"));
    }
  }
}

void write_color(const RecordSet& records, const std::vector<LayerAnalysis>& layers,
                 const Options& o, const fs::path& dir) {
  const auto names = layer_names(layers);
  csv::write(dir / "color_index.csv", color_table(records));
  csv::write(dir / "rank_alpha.csv", rank_table(records, SortKey::kAlpha));
  emit_histogram(build_histogram(records, names, SortKey::kAlpha), dir / "alpha_histogram.svg",
                 dir / "alpha_histogram.csv");
  emit_hue_wheel(build_hue_wheel(records, names, o.alpha_threshold, "nf"), dir / "hue_wheel.svg");
}

void write_class(const RecordSet& records, const std::vector<LayerAnalysis>& layers,
                 const Loaded& l, const fs::path& dir) {
  const auto names = layer_names(layers);
  csv::write(dir / "class_index.csv", class_table(records, l.manifest.class_names));
  csv::write(dir / "rank_gamma.csv", rank_table(records, SortKey::kGamma));
  emit_histogram(build_histogram(records, names, SortKey::kGamma), dir / "gamma_histogram.svg",
                 dir / "gamma_histogram.csv");
  std::unique_ptr<OntologyMap> ontology;
  if (l.manifest.ontology_path) {
    ontology = std::make_unique<OntologyMap>(
        read_ontology(l.manifest.resolve(*l.manifest.ontology_path)));
  }
  write_text(dir / "tag_cloud.json",
             tag_cloud_json(layers, l.manifest.class_names, ontology.get()));
}

std::vector<ActivationCurve> write_auc(const Loaded& l, const Options& o, const fs::path& dir) {
  auto curves = activation_curves(l.tables, o.k, o.dead_epsilon);
  csv::Table t;
  t.header = {"layer", "neuron", "auc", "auc_fraction"};
  for (const auto& c : curves) {
    t.rows.push_back({c.layer, std::to_string(c.neuron), csv::format_double(c.auc),
                      csv::format_double(c.auc_fraction)});
  }
  csv::write(dir / "auc.csv", t);
  return curves;
}

// ---------------------------------------------------------------------------
// Verbs

int cmd_validate(const Options& o) {
  const Loaded l = load(o);
  for (std::size_t i = 0; i < l.tables.size(); ++i) {
    const auto& name = l.tables[i].layer();
    if (l.arch.has_boundary(name)) {
      const SpatialDims expected = output_dims(l.arch, name);
      if (l.manifest.layer(name).spatial_dims != expected) {
        throw ValidationError("layer '" + name + "' dims disagree with the architecture");
      }
    }
  }
  for (const auto& img : l.manifest.images) {
    const RgbImage decoded = read_image(l.manifest.resolve(img.path));
    if (decoded.rows() != l.arch.input_size.rows || decoded.cols() != l.arch.input_size.cols) {
      throw ValidationError("image " + img.path + " is " + std::to_string(decoded.rows()) + "x" +
                            std::to_string(decoded.cols()) + ", architecture input is " +
                            std::to_string(l.arch.input_size.rows) + "x" +
                            std::to_string(l.arch.input_size.cols));
    }
  }
  std::cout << "OK: " << l.tables.size() << " layers, " << l.manifest.image_count()
            << " images, " << l.manifest.class_names.size() << " classes\n";
  return 0;
}

int cmd_fixture(const Options& o) {
  const FixtureSpec spec = o.spec.empty() ? default_fixture_spec() : read_fixture_spec(o.spec);
  const Fixture fx = generate_synthetic_fixture(spec, o.seed);
  write_fixture(fx, o.out_dir);
  std::cout << "fixture written to " << o.out_dir << "\n";
  return 0;
}

int cmd_rank(const Options& o) {
  const Loaded l = load(o);
  const fs::path dir = out_dir(o);
  std::vector<NeuronRanking> rankings;
  int dead = 0;
  for (const auto& table : l.tables) {
    for (int n = 0; n < table.neuron_count(); ++n) {
      if (auto r = rank_neuron(table, n, ranking_options(o))) {
        rankings.push_back(std::move(*r));
      } else {
        ++dead;
      }
    }
  }
  write_rankings_csv(rankings, dir / "rankings.csv");
  std::cout << rankings.size() << " neurons ranked, " << dead << " dead\n";
  return 0;
}

int cmd_auc(const Options& o) {
  const Loaded l = load(o);
  const fs::path dir = out_dir(o);
  const auto curves = write_auc(l, o, dir);
  std::cout << curves.size() << " activation curves\n";
  return 0;
}

int cmd_nf(const Options& o) {
  const Loaded l = load(o);
  const fs::path dir = out_dir(o);
  const auto layers = analyze(l, o, true, false);
  write_nfs(layers, dir);
  std::cout << "neuron features written to " << (dir / "nf").string() << "\n";
  return 0;
}

int cmd_color(const Options& o) {
  const Loaded l = load(o);
  const fs::path dir = out_dir(o);
  const auto layers = analyze(l, o, true, false);
  write_nfs(layers, dir);
  write_color(summarize(layers), layers, o, dir);
  std::cout << "color index written to " << dir.string() << "\n";
  return 0;
}

int cmd_class(const Options& o) {
  const Loaded l = load(o);
  const fs::path dir = out_dir(o);
  const auto layers = analyze(l, o, false, true);
  write_class(summarize(layers), layers, l, dir);
  std::cout << "class index written to " << dir.string() << "\n";
  return 0;
}

int cmd_report(const Options& o) {
  const Loaded l = load(o);
  const fs::path dir = out_dir(o);
  const auto layers = analyze(l, o, true, true);
  std::vector<NeuronRanking> rankings;
  for (const auto& layer : layers) {
    for (const auto& a : layer.neurons) {
      if (a.ranking) rankings.push_back(*a.ranking);
    }
  }
  write_rankings_csv(rankings, dir / "rankings.csv");
  write_nfs(layers, dir);
  const auto curves = write_auc(l, o, dir);
  const RecordSet records = summarize(layers, &curves);
  write_color(records, layers, o, dir);
  write_class(records, layers, l, dir);
  csv::write(dir / "rank_auc.csv", rank_table(records, SortKey::kAuc));
  csv::write(dir / "rank_joint.csv", rank_table(records, SortKey::kJoint));
  std::cout << "report written to " << dir.string() << "\n";
  return 0;
}

int cmd_rf(const Options& o) {
  ArchitectureSpec arch;
  if (o.arch.empty() || o.arch == "vgg-m") {
    arch = vgg_m_architecture();
  } else {
    arch = read_architecture(o.arch);
  }
  const auto layers = o.layers.empty() ? arch.boundaries() : o.layers;
  csv::Table t;
  t.header = {"layer", "rf_size", "jump", "offset", "start", "rows", "cols"};
  for (const auto& name : layers) {
    const RFGeometry rf = receptive_field(arch, name);
    const SpatialDims d = output_dims(arch, name);
    t.rows.push_back({name, std::to_string(rf.size), std::to_string(rf.jump),
                      csv::format_double(rf.offset), std::to_string(rf.start),
                      std::to_string(d.rows), std::to_string(d.cols)});
  }
  std::cout << csv::to_string(t);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neuroscope: neuron selectivity analysis for convolutional networks"};
  app.require_subcommand(1);
  Options o;

  // Shared flags live on the top-level app; subcommands fall through to it,
  // so they may appear before or after the verb.
  app.fallthrough();
  app.add_option("--manifest", o.manifest, "Manifest file or its directory");
  app.add_option("--arch", o.arch,
                 "Architecture file, or vgg-m (default: architecture.arch beside the "
                 "manifest, else vgg-m)");
  app.add_option("--layers", o.layers, "Layers to analyze (default: all)")->delimiter(',');
  app.add_option("--n-max", o.n_max, "Maximum ranked images per neuron");
  app.add_option("--min-ratio", o.min_ratio, "Minimum activation / a_max");
  app.add_option("--th", o.th, "Class coverage threshold in (0, 1]");
  app.add_option("--alpha-threshold", o.alpha_threshold, "Hue wheel alpha threshold");
  app.add_option("--out-dir", o.out_dir, "Output directory");
  app.add_option("--seed", o.seed, "Fixture random seed");
  app.add_option("--dead-epsilon", o.dead_epsilon, "Neurons with a_max <= this are dead");

  auto add_nf = [&o](CLI::App* cmd) {
    cmd->add_option("--nf-normalization", o.nf_normalization, "n-max, weight-sum or coverage");
    cmd->add_option("--pad", o.pad, "Out-of-image crop pixels: zero or clamp");
  };

  auto* validate = app.add_subcommand("validate", "Check a manifest, payloads and images");
  auto* fixture = app.add_subcommand("fixture", "Write a synthetic dataset with planted neurons");
  fixture->add_option("--spec", o.spec, "Fixture spec JSON (default: built-in)");
  auto* rank = app.add_subcommand("rank", "Rank top images per neuron");
  auto* auc = app.add_subcommand("auc", "Activation curves and their areas");
  auc->add_option("--k", o.k, "Curve length");
  auto* nf = app.add_subcommand("nf", "Neuron Feature images");
  add_nf(nf);
  auto* color = app.add_subcommand("color-index", "Color selectivity index, histogram, hue wheel");
  add_nf(color);
  auto* cls = app.add_subcommand("class-index", "Class selectivity index, histogram, tag clouds");
  auto* report = app.add_subcommand("report", "All indexes, tables and figures");
  add_nf(report);
  report->add_option("--k", o.k, "Activation curve length");
  auto* rf = app.add_subcommand("rf", "Receptive field geometry per layer");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*fixture) return cmd_fixture(o);
    if (*rank) return cmd_rank(o);
    if (*auc) return cmd_auc(o);
    if (*nf) return cmd_nf(o);
    if (*color) return cmd_color(o);
    if (*cls) return cmd_class(o);
    if (*report) return cmd_report(o);
    if (*rf) return cmd_rf(o);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 3;
}
