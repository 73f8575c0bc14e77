#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "hmax/errors.hpp"
#include "hmax/eval.hpp"
#include "hmax/rng.hpp"
#include "support/oracles.hpp"

using namespace hmax;

TEST_SUITE_BEGIN("eval");

TEST_CASE("perfectly separated scores give accuracy 1") {
  const std::vector<double> scores = {0.9, 0.8, 0.7, 0.2, 0.1};
  const std::vector<int> labels = {1, 1, 1, -1, -1};
  CHECK(eer_accuracy(scores, labels) == 1.0);
}

TEST_CASE("indistinguishable scores give accuracy one half") {
  const std::vector<double> scores = {0.4, 0.4, 0.4, 0.4};
  const std::vector<int> labels = {1, -1, 1, -1};
  CHECK(eer_accuracy(scores, labels) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("a crossing between sweep points interpolates linearly") {
  const std::vector<double> scores = {5, 4, 2, 2, 1, 0};
  const std::vector<int> labels = {1, 1, 1, -1, -1, -1};
  const double acc = eer_accuracy(scores, labels);
  CHECK(acc == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(acc == doctest::Approx(hmaxtest::eer_exhaustive(scores, labels)).epsilon(1e-12));
}

TEST_CASE("the sweep agrees with exhaustive threshold search") {
  std::mt19937_64 g(71);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + static_cast<int>(bounded_draw(g, 40));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    const bool quantized = trial % 2 == 0;
    for (int i = 0; i < n; ++i) {
      // half the trials use a coarse grid of scores so ties are common
      scores[i] = quantized ? 0.25 * static_cast<double>(bounded_draw(g, 5)) : unit_real(g);
      labels[i] = bounded_draw(g, 2) == 0 ? -1 : 1;
    }
    labels[0] = 1;  // both classes always present
    labels[1] = -1;
    const double fast = eer_accuracy(scores, labels);
    const double slow = hmaxtest::eer_exhaustive(scores, labels);
    CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
    CHECK(fast >= 0.0);
    CHECK(fast <= 1.0);
  }
}

TEST_CASE("accuracy depends only on the score ordering") {
  std::mt19937_64 g(73);
  std::vector<double> scores(30);
  std::vector<int> labels(30);
  for (int i = 0; i < 30; ++i) {
    scores[i] = unit_real(g);
    labels[i] = i % 2 == 0 ? 1 : -1;
  }
  const double base = eer_accuracy(scores, labels);

  std::vector<double> affine = scores;
  for (double& s : affine) s = 2.0 * s + 3.0;
  CHECK(eer_accuracy(affine, labels) == base);

  std::vector<double> warped = scores;
  for (double& s : warped) s = std::tanh(4.0 * s);
  CHECK(eer_accuracy(warped, labels) == base);
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(eer_accuracy({1.0, 2.0}, {1, 1}), MetricError);
  CHECK_THROWS_AS(eer_accuracy({1.0, 2.0}, {-1, -1}), MetricError);
  CHECK_THROWS_AS(eer_accuracy({1.0, 2.0, 3.0}, {1, -1}), InvalidArgument);
  CHECK_THROWS_AS(eer_accuracy({1.0, 2.0}, {1, 0}), InvalidArgument);
  CHECK_THROWS_AS(eer_accuracy({}, {}), MetricError);
}

TEST_CASE("the sweep walks from all-positive to all-negative") {
  std::mt19937_64 g(79);
  std::vector<double> scores(20);
  std::vector<int> labels(20);
  for (int i = 0; i < 20; ++i) {
    scores[i] = 0.5 * static_cast<double>(bounded_draw(g, 7));
    labels[i] = i % 2 == 0 ? 1 : -1;
  }
  const std::vector<RocPoint> sweep = roc_sweep(scores, labels);
  REQUIRE(sweep.size() >= 2);
  CHECK(sweep.front().threshold == -std::numeric_limits<double>::infinity());
  CHECK(sweep.front().fpr == 1.0);
  CHECK(sweep.front().fnr == 0.0);
  CHECK(sweep.back().threshold == std::numeric_limits<double>::infinity());
  CHECK(sweep.back().fpr == 0.0);
  CHECK(sweep.back().fnr == 1.0);
  for (size_t i = 1; i < sweep.size(); ++i) {
    CHECK(sweep[i].threshold > sweep[i - 1].threshold);
    CHECK(sweep[i].fpr <= sweep[i - 1].fpr);
    CHECK(sweep[i].fnr >= sweep[i - 1].fnr);
  }
}

TEST_SUITE_END();
