#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace powerlens {

/// Binary regression tree over up to two features: 0 = frequency in GHz, 1 = utilization.
/// Split predicate: feature value < threshold goes left, >= threshold goes right.
class RegressionTree {
 public:
  struct Node {
    int feature = 1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;  // leaf mean
    bool is_leaf() const noexcept { return left < 0; }
  };

  RegressionTree() = default;
  explicit RegressionTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

  bool empty() const noexcept { return nodes_.empty(); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

  double predict(double freq_ghz, double util) const;

 private:
  std::vector<Node> nodes_;
};

struct TreeGrowParams {
  int max_depth = 4;
  int min_leaf = 3;
};

struct TreeSample {
  std::array<double, 2> x;  // {freq_ghz, util}
  double y = 0.0;
};

/// Grows a CART tree minimizing the sum of squared deviations from leaf means.
/// `features` selects which feature indices may be split on. Candidate thresholds
/// are the distinct sorted feature values (excluding the smallest); equal-cost
/// splits resolve to the smaller feature index, then the smaller threshold.
RegressionTree grow_regression_tree(std::vector<TreeSample> samples, const TreeGrowParams& params,
                                    const std::vector<int>& features);

}  // namespace powerlens
