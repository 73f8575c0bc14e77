#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "hmax/errors.hpp"
#include "hmax/gentleboost.hpp"
#include "hmax/rng.hpp"

using namespace hmax;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

FeatureMatrix matrix(size_t samples, size_t features, std::vector<double> values) {
  FeatureMatrix m;
  m.samples = samples;
  m.features = features;
  m.values = std::move(values);
  return m;
}

FeatureMatrix random_matrix(size_t samples, size_t features, uint64_t seed) {
  std::mt19937_64 g(seed);
  FeatureMatrix m;
  m.samples = samples;
  m.features = features;
  m.values.resize(samples * features);
  for (double& v : m.values) v = 4.0 * unit_real(g) - 2.0;
  return m;
}

std::vector<int> alternating_labels(size_t n) {
  std::vector<int> y(n);
  for (size_t i = 0; i < n; ++i) y[i] = (i % 2 == 0) ? 1 : -1;
  return y;
}

std::string model_bytes(const BoostModel& m) {
  std::ostringstream out;
  save_boost(out, m);
  return out.str();
}

}  // namespace

TEST_SUITE_BEGIN("boost");

TEST_CASE("one round separates a threshold rule exactly") {
  const FeatureMatrix x = matrix(6, 1, {-3, -2, -1, 1, 2, 3});
  const std::vector<int> y = {-1, -1, -1, 1, 1, 1};
  const BoostModel m = train_gentleboost(x, y, 1);
  REQUIRE(m.trees.size() == 1);
  CHECK(m.trees[0].nodes[0].feature == 0);
  CHECK(m.trees[0].nodes[0].threshold == 0.0);  // midpoint of -1 and 1
  for (size_t i = 0; i < 6; ++i) {
    const double s = boost_predict(m, {x.at(i, 0)});
    CHECK(s == static_cast<double>(y[i]));  // pure leaves clip to exactly +-1
  }
  // pure children cannot be improved by splitting, so lower levels pass
  for (int n = 1; n < 7; ++n) CHECK(m.trees[0].nodes[n].threshold == kInf);
}

TEST_CASE("exclusive-or is carved out within four rounds") {
  // the four corners plus one duplicate; a perfectly balanced multiset has
  // zero split gain everywhere, so the duplicate is what lets the greedy
  // fit get off the ground
  const FeatureMatrix x = matrix(5, 2, {0, 0, 0, 1, 1, 0, 1, 1, 0, 1});
  const std::vector<int> y = {-1, 1, 1, -1, 1};

  const BoostModel one = train_gentleboost(x, y, 1);
  for (size_t i = 0; i < x.samples; ++i) {
    CHECK(boost_predict(one, {x.at(i, 0), x.at(i, 1)}) * y[i] > 0.0);
  }

  const BoostModel four = train_gentleboost(x, y, 4);
  for (size_t i = 0; i < x.samples; ++i) {
    CHECK(boost_predict(four, {x.at(i, 0), x.at(i, 1)}) * y[i] > 0.0);
  }
}

TEST_CASE("degenerate training requests fail loudly") {
  const FeatureMatrix x = matrix(4, 1, {1, 2, 3, 4});
  CHECK_THROWS_AS(train_gentleboost(x, {1, -1, 1, -1}, 0), TrainingError);
  CHECK_THROWS_AS(train_gentleboost(x, {1, 1, 1, 1}, 1), TrainingError);
  CHECK_THROWS_AS(train_gentleboost(x, {1, 1, 1, -1}, 1), TrainingError);
  CHECK_THROWS_AS(train_gentleboost(x, {1, 0, -1, -1}, 1), InvalidArgument);
  CHECK_THROWS_AS(train_gentleboost(x, {1, -1, 1}, 1), InvalidArgument);
}

TEST_CASE("an empty model scores zero") {
  BoostModel m;
  m.feature_count = 3;
  CHECK(boost_predict(m, {5.0, 6.0, 7.0}) == 0.0);
  CHECK_THROWS_AS(boost_predict(m, {1.0}), InvalidArgument);
}

TEST_CASE("a hand-built tree routes through the breadth-first layout") {
  BoostTree t;
  t.nodes[0] = {0, 0.5};
  t.nodes[1] = {1, 0.25};
  t.nodes[2] = {1, 0.75};
  for (int n = 3; n < 7; ++n) t.nodes[n] = {0, kInf};
  for (int l = 0; l < 8; ++l) t.leaves[l] = 10.0 * (l + 1);

  const double a[2] = {0.4, 0.2};  // left, left -> leaf 0
  CHECK(boost_tree_output(t, a, 2) == 10.0);
  const double b[2] = {0.4, 0.3};  // left, right -> leaf 2
  CHECK(boost_tree_output(t, b, 2) == 30.0);
  const double c[2] = {0.6, 0.5};  // right, left -> leaf 4
  CHECK(boost_tree_output(t, c, 2) == 50.0);
  const double d[2] = {0.6, 0.8};  // right, right -> leaf 6
  CHECK(boost_tree_output(t, d, 2) == 70.0);

  t.nodes[0].feature = 9;
  CHECK_THROWS_AS(boost_tree_output(t, a, 2), InvalidArgument);
}

TEST_CASE("a ten-tree score equals the hand-traced leaf sum") {
  std::mt19937_64 g(83);
  BoostModel m;
  m.feature_count = 4;
  for (int t = 0; t < 10; ++t) {
    BoostTree tree;
    for (int n = 0; n < 7; ++n) {
      tree.nodes[n].feature = static_cast<uint32_t>(bounded_draw(g, 4));
      tree.nodes[n].threshold = unit_real(g);
    }
    for (int l = 0; l < 8; ++l) tree.leaves[l] = 2.0 * unit_real(g) - 1.0;
    m.trees.push_back(tree);
  }
  const std::vector<double> x = {0.81, 0.13, 0.55, 0.42};

  double expected = 0.0;
  for (const BoostTree& tree : m.trees) {
    int node = 0;
    while (node < 7) {
      node = x[tree.nodes[node].feature] <= tree.nodes[node].threshold ? 2 * node + 1
                                                                       : 2 * node + 2;
    }
    expected += tree.leaves[node - 7];
  }
  CHECK(boost_predict(m, x) == expected);
}

TEST_CASE("training drives the exponential loss monotonically down") {
  const FeatureMatrix x = random_matrix(40, 6, 55);
  const std::vector<int> y = alternating_labels(40);
  const int rounds = 12;
  const BoostModel m = train_gentleboost(x, y, rounds);
  REQUIRE(m.trees.size() == static_cast<size_t>(rounds));

  std::vector<double> score(x.samples, 0.0);
  double prev_loss = static_cast<double>(x.samples);  // all scores zero
  for (const BoostTree& tree : m.trees) {
    double loss = 0.0;
    for (size_t i = 0; i < x.samples; ++i) {
      score[i] += boost_tree_output(tree, x.row(i), x.features);
      loss += std::exp(-y[i] * score[i]);
    }
    CHECK(loss <= prev_loss * (1.0 + 1e-12));
    prev_loss = loss;
  }
  CHECK(prev_loss < static_cast<double>(x.samples));  // strictly better than silence
}

TEST_CASE("leaf values are clipped to the unit interval") {
  const FeatureMatrix x = random_matrix(30, 4, 77);
  const BoostModel m = train_gentleboost(x, alternating_labels(30), 8);
  for (const BoostTree& t : m.trees) {
    for (double v : t.leaves) {
      CHECK(v <= 1.0);
      CHECK(v >= -1.0);
    }
  }
}

TEST_CASE("splits depend only on feature order, not on feature scale") {
  const FeatureMatrix x = random_matrix(36, 5, 91);
  const std::vector<int> y = alternating_labels(36);

  FeatureMatrix cubed = x;
  for (double& v : cubed.values) v = v * v * v;  // strictly monotone per feature

  const BoostModel a = train_gentleboost(x, y, 6);
  const BoostModel b = train_gentleboost(cubed, y, 6);
  REQUIRE(a.trees.size() == b.trees.size());
  for (size_t t = 0; t < a.trees.size(); ++t) {
    for (int n = 0; n < 7; ++n) {
      CHECK(a.trees[t].nodes[n].feature == b.trees[t].nodes[n].feature);
    }
    CHECK(a.trees[t].leaves == b.trees[t].leaves);
  }
  for (size_t i = 0; i < x.samples; ++i) {
    std::vector<double> xi(x.row(i), x.row(i) + x.features);
    std::vector<double> ci(cubed.row(i), cubed.row(i) + cubed.features);
    CHECK(boost_predict(a, xi) == boost_predict(b, ci));
  }
}

TEST_CASE("training is bit-for-bit deterministic") {
  const FeatureMatrix x = random_matrix(24, 3, 13);
  const std::vector<int> y = alternating_labels(24);
  CHECK(model_bytes(train_gentleboost(x, y, 5)) == model_bytes(train_gentleboost(x, y, 5)));
}

TEST_CASE("model files round-trip and validate on load") {
  const FeatureMatrix x = random_matrix(20, 4, 29);
  const BoostModel m = train_gentleboost(x, alternating_labels(20), 3);

  const std::string bytes = model_bytes(m);
  std::istringstream in(bytes);
  const BoostModel back = load_boost(in);
  CHECK(back.feature_count == m.feature_count);
  REQUIRE(back.trees.size() == m.trees.size());
  CHECK(model_bytes(back) == bytes);

  std::string wrong = bytes;
  wrong[2] = 'Z';
  std::istringstream bad_magic(wrong);
  CHECK_THROWS_AS(load_boost(bad_magic), FormatError);

  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(load_boost(truncated), IoError);

  BoostModel rogue = m;
  rogue.trees[0].nodes[2].feature = 400;  // beyond feature_count
  std::istringstream bad_feature(model_bytes(rogue));
  CHECK_THROWS_AS(load_boost(bad_feature), FormatError);
}

TEST_CASE("the text description lists every tree") {
  const FeatureMatrix x = random_matrix(20, 3, 31);
  const BoostModel m = train_gentleboost(x, alternating_labels(20), 2);
  std::ostringstream out;
  describe_boost(out, m);
  const std::string text = out.str();
  CHECK(text.find("boost model: 2 trees over 3 features") != std::string::npos);
  CHECK(text.find("tree 0") != std::string::npos);
  CHECK(text.find("tree 1") != std::string::npos);
  CHECK(text.find("leaves:") != std::string::npos);
}

TEST_SUITE_END();
