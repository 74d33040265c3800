#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "powerlens/tree.hpp"

using namespace powerlens;

namespace {

std::vector<TreeSample> util_samples(const std::vector<std::pair<double, double>>& points) {
  std::vector<TreeSample> samples;
  for (const auto& [u, y] : points) samples.push_back(TreeSample{{0.5, u}, y});
  return samples;
}

}  // namespace

TEST_CASE("perfectly separable step yields a depth-1 tree with the boundary threshold") {
  // 1 W below u=0.5, 3 W at or above; threshold must land in (0.4, 0.5].
  const auto samples = util_samples({{0.1, 1.0}, {0.2, 1.0}, {0.3, 1.0}, {0.4, 1.0},
                                     {0.5, 3.0}, {0.6, 3.0}, {0.8, 3.0}, {0.9, 3.0}});
  const RegressionTree tree = grow_regression_tree(samples, TreeGrowParams{1, 1}, {1});
  REQUIRE(tree.nodes().size() == 3);
  const auto& root = tree.nodes()[0];
  CHECK_FALSE(root.is_leaf());
  CHECK(root.threshold > 0.4);
  CHECK(root.threshold <= 0.5);
  CHECK(tree.predict(0.5, 0.2) == 1.0);
  CHECK(tree.predict(0.5, 0.7) == 3.0);
}

TEST_CASE("constant-power data grows a single leaf") {
  const auto samples = util_samples({{0.1, 2.0}, {0.4, 2.0}, {0.6, 2.0}, {0.9, 2.0}});
  const RegressionTree tree = grow_regression_tree(samples, TreeGrowParams{4, 1}, {1});
  CHECK(tree.nodes().size() == 1);
  CHECK(tree.predict(0.5, 0.3) == 2.0);
}

TEST_CASE("monotone data produces a nondecreasing step function") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> jitter(0.0, 0.01);
  std::vector<TreeSample> samples;
  for (int i = 0; i < 40; ++i) {
    const double u = i / 39.0;
    samples.push_back(TreeSample{{0.5, u}, 1.0 + 2.0 * u + jitter(rng)});
  }
  const RegressionTree tree = grow_regression_tree(samples, TreeGrowParams{4, 3}, {1});
  double prev = -1.0;
  for (double u = 0.0; u <= 1.0; u += 0.01) {
    const double p = tree.predict(0.5, u);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("leaves predict the mean of their training targets") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> util(0.0, 1.0);
  std::uniform_real_distribution<double> power(0.5, 5.0);
  std::vector<TreeSample> samples;
  for (int i = 0; i < 64; ++i) samples.push_back(TreeSample{{0.5, util(rng)}, power(rng)});
  const RegressionTree tree = grow_regression_tree(samples, TreeGrowParams{4, 3}, {1});

  // Replay training data through the tree and group by reached leaf.
  std::vector<double> sums(tree.nodes().size(), 0.0);
  std::vector<int> counts(tree.nodes().size(), 0);
  for (const TreeSample& s : samples) {
    std::size_t index = 0;
    while (!tree.nodes()[index].is_leaf()) {
      const auto& node = tree.nodes()[index];
      index = static_cast<std::size_t>(s.x[node.feature] < node.threshold ? node.left : node.right);
    }
    sums[index] += s.y;
    counts[index] += 1;
  }
  for (std::size_t i = 0; i < tree.nodes().size(); ++i) {
    if (!tree.nodes()[i].is_leaf()) continue;
    REQUIRE(counts[i] > 0);  // every leaf partition is populated
    CHECK(tree.nodes()[i].value == doctest::Approx(sums[i] / counts[i]).epsilon(1e-12));
  }
}

TEST_CASE("depth-1 fits match exhaustive best-split search exactly") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> util(0.0, 1.0);
  std::uniform_real_distribution<double> power(0.5, 6.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 4 + rng() % 61;  // up to 64 points
    std::vector<std::pair<double, double>> points;
    std::vector<TreeSample> samples;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = util(rng);
      const double y = power(rng);
      points.emplace_back(u, y);
      samples.push_back(TreeSample{{0.5, u}, y});
    }
    const oracle::Depth1Split expected = oracle::brute_best_split(points, 1);
    const RegressionTree tree = grow_regression_tree(samples, TreeGrowParams{1, 1}, {1});
    REQUIRE(expected.found);
    REQUIRE(tree.nodes().size() == 3);
    const auto& root = tree.nodes()[0];
    CHECK(root.threshold == expected.threshold);
    CHECK(tree.nodes()[static_cast<std::size_t>(root.left)].value == expected.left_mean);
    CHECK(tree.nodes()[static_cast<std::size_t>(root.right)].value == expected.right_mean);
  }
}

TEST_CASE("min_leaf forbids splits that would starve a side") {
  const auto samples = util_samples({{0.1, 1.0}, {0.9, 3.0}, {0.95, 3.1}});
  const RegressionTree tree = grow_regression_tree(samples, TreeGrowParams{3, 2}, {1});
  CHECK(tree.nodes().size() == 1);  // 3 points cannot make two leaves of 2
}

TEST_CASE("global trees may split on frequency") {
  std::vector<TreeSample> samples;
  for (double f : {0.2, 0.4, 1.0, 1.2})
    for (double u : {0.1, 0.5, 0.9}) samples.push_back(TreeSample{{f, u}, f < 0.7 ? 1.0 : 4.0});
  const RegressionTree tree = grow_regression_tree(samples, TreeGrowParams{1, 1}, {0, 1});
  REQUIRE(tree.nodes().size() == 3);
  CHECK(tree.nodes()[0].feature == 0);
  CHECK(tree.predict(0.3, 0.5) == 1.0);
  CHECK(tree.predict(1.1, 0.5) == 4.0);
}
