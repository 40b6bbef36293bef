#include "neuroscope/analysis.hpp"

#include <algorithm>
#include <map>

#include "neuroscope/errors.hpp"
#include "neuroscope/parallel.hpp"

namespace neuroscope {

ImageCache::ImageCache(const DatasetManifest& manifest, std::size_t capacity)
    : manifest_(manifest), capacity_(std::max<std::size_t>(capacity, 1)) {}

void ImageCache::preload(int image_id, RgbImage image) {
  std::lock_guard lock(mutex_);
  images_[image_id] = std::make_shared<const RgbImage>(std::move(image));
}

std::shared_ptr<const RgbImage> ImageCache::get(int image_id) {
  {
    std::lock_guard lock(mutex_);
    if (auto it = images_.find(image_id); it != images_.end()) return it->second;
  }
  if (image_id < 0 || image_id >= manifest_.image_count()) {
    throw ArgumentError("image id " + std::to_string(image_id) + " out of range");
  }
  auto image = std::make_shared<const RgbImage>(
      read_image(manifest_.resolve(manifest_.images[image_id].path)));
  std::lock_guard lock(mutex_);
  if (images_.size() >= capacity_) images_.clear();
  return images_.emplace(image_id, std::move(image)).first->second;
}

std::vector<CroppedImage> ranked_crops(const NeuronRanking& ranking, const RFGeometry& rf,
                                       ImageCache& images, PadPolicy pad_policy) {
  std::vector<CroppedImage> crops;
  crops.reserve(ranking.entries.size());
  for (const auto& e : ranking.entries) {
    const auto image = images.get(e.image_id);
    const CropRect rect = project_to_image(rf, e.pos, {image->rows(), image->cols()});
    crops.push_back(crop_image(*image, rect, pad_policy));
  }
  return crops;
}

LayerAnalysis analyze_layer(const DatasetManifest& manifest, const ActivationTable& table,
                            const ArchitectureSpec& arch, ImageCache& images,
                            const AnalysisOptions& options) {
  const LayerEntry& entry = manifest.layer(table.layer());
  const SpatialDims expected = output_dims(arch, table.layer());
  if (entry.spatial_dims != expected) {
    throw ValidationError("layer '" + table.layer() + "' has " +
                          std::to_string(entry.spatial_dims.rows) + "x" +
                          std::to_string(entry.spatial_dims.cols) + " units but the architecture gives " +
                          std::to_string(expected.rows) + "x" + std::to_string(expected.cols));
  }

  LayerAnalysis out;
  out.layer = table.layer();
  out.rf = receptive_field(arch, table.layer());
  out.neurons.resize(table.neuron_count());

  std::vector<int> labels;
  labels.reserve(manifest.images.size());
  for (const auto& img : manifest.images) labels.push_back(img.class_index);

  const bool want_nf = options.compute_nf || options.compute_color;
  parallel_for(out.neurons.size(), [&](std::size_t i) {
    const int neuron = static_cast<int>(i);
    NeuronAnalysis& a = out.neurons[i];
    a.layer = table.layer();
    a.neuron = neuron;
    a.ranking = rank_neuron(table, neuron, options.ranking);
    if (!a.ranking) {
      a.dead = true;
      return;
    }
    if (want_nf) {
      const auto crops = ranked_crops(*a.ranking, out.rf, images, options.pad_policy);
      std::vector<double> weights;
      weights.reserve(a.ranking->entries.size());
      for (const auto& e : a.ranking->entries) weights.push_back(e.weight);
      a.nf = compute_nf(crops, weights, {options.ranking.n_max, options.nf_normalization});
      a.stds = pixel_std_map(crops, weights);
      if (options.compute_color) a.color = color_selectivity(*a.nf, *a.stds);
    }
    if (options.compute_class) {
      a.classes = class_frequencies(*a.ranking, labels);
      a.class_selectivity = class_selectivity_index(*a.classes, options.th);
    }
  });
  return out;
}

RecordSet summarize(const std::vector<LayerAnalysis>& layers,
                    const std::vector<ActivationCurve>* curves) {
  std::map<std::pair<std::string, int>, double> auc;
  if (curves) {
    for (const auto& c : *curves) auc[{c.layer, c.neuron}] = c.auc_fraction;
  }

  RecordSet set;
  set.has_auc = curves != nullptr;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    for (const auto& a : layers[li].neurons) {
      NeuronRecord r;
      r.layer = a.layer;
      r.layer_index = static_cast<int>(li);
      r.neuron = a.neuron;
      r.dead = a.dead;
      if (a.color) {
        set.has_alpha = true;
        // A flat NF has no color direction; it counts as achromatic.
        r.alpha = a.color->degenerate ? 0.0 : a.color->alpha;
        r.hue = a.color->hue;
      }
      if (a.classes) set.has_gamma = true;
      if (a.class_selectivity) {
        r.gamma = a.class_selectivity->gamma;
        r.class_selectivity = a.class_selectivity;
      }
      if (!a.dead && curves) {
        if (auto it = auc.find({a.layer, a.neuron}); it != auc.end()) r.auc_fraction = it->second;
      }
      set.records.push_back(std::move(r));
    }
  }
  return set;
}

}  // namespace neuroscope
