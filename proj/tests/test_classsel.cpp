#include <gtest/gtest.h>

#include <random>

#include "neuroscope/classsel.hpp"
#include "neuroscope/errors.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace neuroscope;

namespace {

NeuronRanking ranking_from(const std::vector<double>& weights) {
  NeuronRanking r;
  r.layer = "l";
  r.a_max = 1.0f;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    r.entries.push_back({static_cast<int>(i), static_cast<float>(weights[i]), weights[i], {}});
  }
  return r;
}

/// N images spread evenly over M classes.
ClassDistribution even_distribution(int n, int m) {
  ClassDistribution d;
  d.n_images = n;
  for (int c = 0; c < m; ++c) d.freqs.push_back({c, 1.0 / m});
  return d;
}

ClassDistribution from_freqs(int n, const std::vector<double>& f) {
  ClassDistribution d;
  d.n_images = n;
  for (std::size_t c = 0; c < f.size(); ++c) d.freqs.push_back({static_cast<int>(c), f[c]});
  return d;
}

}  // namespace

TEST(ClassFrequencies, HandExample) {
  const auto r = ranking_from({1.0, 0.8, 0.2});
  const std::vector<int> labels{4, 4, 7};
  const ClassDistribution d = class_frequencies(r, labels);
  EXPECT_EQ(d.n_images, 3);
  ASSERT_EQ(d.freqs.size(), 2u);
  EXPECT_EQ(d.freqs[0].class_index, 4);
  EXPECT_NEAR(d.freqs[0].frequency, 0.9, 1e-15);
  EXPECT_EQ(d.freqs[1].class_index, 7);
  EXPECT_NEAR(d.freqs[1].frequency, 0.1, 1e-15);
}

TEST(ClassFrequencies, SumToOneAndErrors) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.7, 1.0);
  std::vector<double> w(100);
  for (auto& x : w) x = u(rng);
  std::vector<int> labels(100);
  for (auto& l : labels) l = static_cast<int>(rng() % 20);
  const auto d = class_frequencies(ranking_from(w), labels);
  double total = 0.0;
  for (const auto& f : d.freqs) total += f.frequency;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_THROW(class_frequencies(ranking_from({}), labels), ArgumentError);
  EXPECT_THROW(class_frequencies(ranking_from({1.0}), std::vector<int>{}), ArgumentError);
  EXPECT_THROW(class_frequencies(ranking_from({1.0}), std::vector<int>{-1}), ArgumentError);
}

TEST(ClassSelectivityIndex, AnalyticPoints) {
  EXPECT_DOUBLE_EQ(class_selectivity_index(even_distribution(100, 1))->gamma, 1.0);
  EXPECT_DOUBLE_EQ(class_selectivity_index(even_distribution(100, 100))->gamma, 0.0);
  const auto g40 = class_selectivity_index(even_distribution(100, 40));
  EXPECT_EQ(g40->covering_count, 40);
  EXPECT_DOUBLE_EQ(g40->gamma, 60.0 / 99.0);
  EXPECT_GT(g40->gamma, 0.6);
  EXPECT_LT(class_selectivity_index(even_distribution(100, 41))->gamma, 0.6);
  EXPECT_FALSE(class_selectivity_index(even_distribution(1, 1)));
}

TEST(ClassSelectivityIndex, ThresholdPicksPrefix) {
  const auto d = from_freqs(10, {0.1, 0.5, 0.3, 0.1});
  const auto half = class_selectivity_index(d, 0.5);
  EXPECT_EQ(half->covering_count, 1);
  EXPECT_EQ(half->covering_set[0].class_index, 1);
  const auto most = class_selectivity_index(d, 0.85);
  EXPECT_EQ(most->covering_count, 3);
  EXPECT_EQ(most->covering_set[2].class_index, 0);  // tie with class 3 goes to the lower index
  EXPECT_EQ(class_selectivity_index(d, 1.0)->covering_count, 4);
  EXPECT_THROW(class_selectivity_index(d, 0.0), ArgumentError);
  EXPECT_THROW(class_selectivity_index(d, 1.5), ArgumentError);
}

TEST(ClassSelectivityIndex, AccumulatedRoundingStillCoversAll) {
  // Ten classes of 0.1 sum to slightly less than 1 in floating point.
  const auto g = class_selectivity_index(even_distribution(50, 10));
  EXPECT_EQ(g->covering_count, 10);
}

TEST(ClassSelectivityIndex, MatchesExhaustiveSubsetOracle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = 1 + static_cast<int>(rng() % 12);
    std::vector<double> f(k);
    double total = 0.0;
    for (auto& x : f) total += (x = 0.01 + u(rng));
    for (auto& x : f) x /= total;
    const double th = 0.05 + 0.95 * u(rng);
    const int n = k + static_cast<int>(rng() % 50) + 1;
    const auto g = class_selectivity_index(from_freqs(n, f), th);
    const int m = oracle::min_covering_subset(f, th);
    EXPECT_EQ(g->covering_count, m);
    EXPECT_DOUBLE_EQ(g->gamma, static_cast<double>(n - m) / (n - 1));
  }
}

TEST(ClassSelectivityIndex, MonotoneInThresholdAndScaleInvariant) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.7, 1.0);
  std::vector<double> w(100);
  for (auto& x : w) x = u(rng);
  std::vector<int> labels(100);
  for (auto& l : labels) l = static_cast<int>(rng() % 30);
  const auto d = class_frequencies(ranking_from(w), labels);
  double prev = 1.0;
  for (double th = 0.1; th <= 1.0; th += 0.1) {
    const double g = class_selectivity_index(d, th)->gamma;
    EXPECT_LE(g, prev);
    prev = g;
  }
  auto scaled_w = w;
  for (auto& x : scaled_w) x *= 0.5;
  const auto ds = class_frequencies(ranking_from(scaled_w), labels);
  EXPECT_DOUBLE_EQ(class_selectivity_index(ds)->gamma, class_selectivity_index(d)->gamma);
}

// ---------------------------------------------------------------------------
// Ontology

TEST(Ontology, StructureQueries) {
  const OntologyMap o = parse_ontology("# demo\ncat\tfeline\nlion\tfeline\nfeline\tanimal\ndog\tanimal\n");
  EXPECT_EQ(o.roots(), (std::vector<std::string>{"animal"}));
  EXPECT_EQ(o.ancestors("cat"), (std::vector<std::string>{"feline", "animal"}));
  EXPECT_EQ(o.depth("cat"), 2);
  EXPECT_EQ(o.depth("animal"), 0);
  EXPECT_TRUE(o.contains("animal"));
  EXPECT_FALSE(o.contains("fish"));
}

TEST(Ontology, RollupAccumulatesMass) {
  const OntologyMap o = parse_ontology("cat\tfeline\nlion\tfeline\nfeline\tanimal\ndog\tanimal\n");
  const std::vector<std::string> names{"cat", "lion", "dog"};
  const auto d = from_freqs(10, {0.5, 0.2, 0.3});
  const auto r = rollup_ontology(d, names, o);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].label, "animal");
  EXPECT_EQ(r[0].depth, 0);
  EXPECT_NEAR(r[0].mass, 1.0, 1e-15);
  EXPECT_EQ(r[1].label, "feline");
  EXPECT_NEAR(r[1].mass, 0.7, 1e-15);

  const std::vector<std::string> missing{"cat", "lion", "fish"};
  EXPECT_THROW(rollup_ontology(d, missing, o), ValidationError);
}

TEST(Ontology, RejectsBadStructure) {
  EXPECT_THROW(parse_ontology("a\tb\nb\ta\n"), ValidationError);
  EXPECT_THROW(parse_ontology("a\ta\n"), ValidationError);
  EXPECT_THROW(parse_ontology("a\tb\na\tc\n"), ValidationError);
  EXPECT_THROW(parse_ontology("just-one-field\n"), ValidationError);
  EXPECT_NO_THROW(parse_ontology("a\tb\na\tb\n"));
}

TEST(Ontology, FileRoundTrip) {
  testing_support::TempDir dir;
  const OntologyMap o = parse_ontology("x\ty\ny\tz\nw\tz\n");
  write_ontology(o, dir / "o.tsv");
  EXPECT_EQ(read_ontology(dir / "o.tsv").parents(), o.parents());
  EXPECT_THROW(read_ontology(dir / "none.tsv"), IoError);
}
