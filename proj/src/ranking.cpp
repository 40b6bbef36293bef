#include "neuroscope/ranking.hpp"

#include <algorithm>
#include <numeric>

#include "neuroscope/csv.hpp"
#include "neuroscope/errors.hpp"

namespace neuroscope {

namespace {

float row_max(std::span<const float> row) { return *std::max_element(row.begin(), row.end()); }

void check_neuron(const ActivationTable& table, int neuron) {
  if (neuron < 0 || neuron >= table.neuron_count()) {
    throw ArgumentError("neuron " + std::to_string(neuron) + " out of range for layer '" +
                        table.layer() + "'");
  }
}

// Activation descending, image id ascending.
auto rank_order(std::span<const float> row) {
  return [row](int a, int b) { return row[a] > row[b] || (row[a] == row[b] && a < b); };
}

}  // namespace

std::optional<NeuronRanking> rank_neuron(const ActivationTable& table, int neuron,
                                         const RankingOptions& options) {
  check_neuron(table, neuron);
  if (options.n_max < 1) throw ArgumentError("n_max must be at least 1");
  if (!(options.min_ratio >= 0.0 && options.min_ratio <= 1.0)) {
    throw ArgumentError("min_ratio must lie in [0, 1]");
  }
  if (options.dead_epsilon < 0.0) throw ArgumentError("dead_epsilon must be nonnegative");

  const auto row = table.row(neuron);
  const float a_max = row_max(row);
  if (!(static_cast<double>(a_max) > options.dead_epsilon)) return std::nullopt;

  std::vector<int> candidates;
  for (int i = 0; i < static_cast<int>(row.size()); ++i) {
    const double w = static_cast<double>(row[i]) / a_max;
    if (w > 0.0 && w >= options.min_ratio) candidates.push_back(i);
  }
  const auto keep = std::min<std::size_t>(candidates.size(), options.n_max);
  std::partial_sort(candidates.begin(), candidates.begin() + keep, candidates.end(),
                    rank_order(row));
  candidates.resize(keep);

  NeuronRanking ranking;
  ranking.layer = table.layer();
  ranking.neuron = neuron;
  ranking.a_max = a_max;
  ranking.entries.reserve(keep);
  for (int image : candidates) {
    ranking.entries.push_back(
        {image, row[image], static_cast<double>(row[image]) / a_max, table.argmax(neuron, image)});
  }
  return ranking;
}

ActivationCurve activation_curve(const ActivationTable& table, int neuron, int k,
                                 double dead_epsilon) {
  check_neuron(table, neuron);
  if (k < 1 || k > table.image_count()) {
    throw ArgumentError("curve length must lie in [1, image_count]");
  }
  if (dead_epsilon < 0.0) throw ArgumentError("dead_epsilon must be nonnegative");
  const auto row = table.row(neuron);
  const float a_max = row_max(row);
  if (!(static_cast<double>(a_max) > dead_epsilon)) {
    throw ArgumentError("neuron " + std::to_string(neuron) + " of '" + table.layer() +
                        "' is dead");
  }

  std::vector<int> order(row.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + k, order.end(), rank_order(row));

  ActivationCurve curve;
  curve.layer = table.layer();
  curve.neuron = neuron;
  curve.weights.reserve(k);
  for (int r = 0; r < k; ++r) {
    const double w = std::max(0.0, static_cast<double>(row[order[r]]) / a_max);
    curve.weights.push_back(w);
    curve.auc += w;
  }
  return curve;
}

void normalize_curves(std::span<ActivationCurve> curves) {
  double best = 0.0;
  for (const auto& c : curves) best = std::max(best, c.auc);
  for (auto& c : curves) c.auc_fraction = best > 0.0 ? c.auc / best : 0.0;
}

std::vector<ActivationCurve> activation_curves(std::span<const ActivationTable> tables, int k,
                                               double dead_epsilon) {
  std::vector<ActivationCurve> curves;
  for (const auto& table : tables) {
    const auto dead = detect_dead(table, dead_epsilon);
    for (int n = 0; n < table.neuron_count(); ++n) {
      if (!dead[n]) curves.push_back(activation_curve(table, n, k, dead_epsilon));
    }
  }
  normalize_curves(curves);
  return curves;
}

std::vector<bool> detect_dead(const ActivationTable& table, double dead_epsilon) {
  std::vector<bool> dead(table.neuron_count());
  for (int n = 0; n < table.neuron_count(); ++n) {
    dead[n] = !(static_cast<double>(row_max(table.row(n))) > dead_epsilon);
  }
  return dead;
}

void write_rankings_csv(std::span<const NeuronRanking> rankings,
                        const std::filesystem::path& path) {
  csv::Table t;
  t.header = {"layer", "neuron", "rank", "image_id", "activation", "weight", "row", "col"};
  for (const auto& ranking : rankings) {
    for (std::size_t r = 0; r < ranking.entries.size(); ++r) {
      const auto& e = ranking.entries[r];
      t.rows.push_back({ranking.layer, std::to_string(ranking.neuron), std::to_string(r + 1),
                        std::to_string(e.image_id), csv::format_float(e.activation),
                        csv::format_double(e.weight), std::to_string(e.pos.row),
                        std::to_string(e.pos.col)});
    }
  }
  csv::write(path, t);
}

std::vector<NeuronRanking> read_rankings_csv(const std::filesystem::path& path) {
  const csv::Table t = csv::read(path);
  const auto c_layer = t.column("layer"), c_neuron = t.column("neuron"),
             c_image = t.column("image_id"), c_act = t.column("activation"),
             c_weight = t.column("weight"), c_row = t.column("row"), c_col = t.column("col");

  std::vector<NeuronRanking> out;
  for (const auto& row : t.rows) {
    const int neuron = static_cast<int>(csv::parse_int(row[c_neuron]));
    if (out.empty() || out.back().layer != row[c_layer] || out.back().neuron != neuron) {
      out.push_back({row[c_layer], neuron, 0.0f, {}});
    }
    RankedImage e;
    e.image_id = static_cast<int>(csv::parse_int(row[c_image]));
    e.activation = csv::parse_float(row[c_act]);
    e.weight = csv::parse_double(row[c_weight]);
    e.pos = {static_cast<std::uint16_t>(csv::parse_int(row[c_row])),
             static_cast<std::uint16_t>(csv::parse_int(row[c_col]))};
    if (out.back().entries.empty()) out.back().a_max = e.activation;
    out.back().entries.push_back(e);
  }
  return out;
}

}  // namespace neuroscope
