#include "powerlens/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "powerlens/error.hpp"

namespace powerlens {

double RegressionTree::predict(double freq_ghz, double util) const {
  if (nodes_.empty()) throw Error(Errc::ModelNotFitted, "empty regression tree");
  const double x[2] = {freq_ghz, util};
  std::size_t index = 0;
  while (!nodes_[index].is_leaf()) {
    const Node& node = nodes_[index];
    index = static_cast<std::size_t>(x[node.feature] < node.threshold ? node.left : node.right);
  }
  return nodes_[index].value;
}

namespace {

struct BestSplit {
  bool found = false;
  int feature = 0;
  double threshold = 0.0;
  double cost = std::numeric_limits<double>::infinity();  // SSE_left + SSE_right
};

// Scans all candidate thresholds for one feature. Candidates sit at each
// distinct value except the smallest; the split sends x < threshold left.
void scan_feature(std::vector<std::size_t>& order, const std::vector<TreeSample>& samples, int feature,
                  int min_leaf, BestSplit& best) {
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return samples[a].x[feature] < samples[b].x[feature];
  });
  const std::size_t n = order.size();
  std::vector<double> prefix_sum(n + 1, 0.0);
  std::vector<double> prefix_sq(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double y = samples[order[i]].y;
    prefix_sum[i + 1] = prefix_sum[i] + y;
    prefix_sq[i + 1] = prefix_sq[i] + y * y;
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double left_x = samples[order[i - 1]].x[feature];
    const double right_x = samples[order[i]].x[feature];
    if (left_x == right_x) continue;  // not a boundary between distinct values
    const std::size_t n_left = i;
    const std::size_t n_right = n - i;
    if (n_left < static_cast<std::size_t>(min_leaf) || n_right < static_cast<std::size_t>(min_leaf)) continue;
    const double sum_l = prefix_sum[i];
    const double sq_l = prefix_sq[i];
    const double sum_r = prefix_sum[n] - sum_l;
    const double sq_r = prefix_sq[n] - sq_l;
    const double cost = (sq_l - sum_l * sum_l / static_cast<double>(n_left)) +
                        (sq_r - sum_r * sum_r / static_cast<double>(n_right));
    const double threshold = right_x;
    const bool better = cost < best.cost ||
                        (cost == best.cost && (feature < best.feature ||
                                               (feature == best.feature && threshold < best.threshold)));
    if (!best.found || better) {
      best.found = true;
      best.feature = feature;
      best.threshold = threshold;
      best.cost = cost;
    }
  }
}

double node_sse(const std::vector<TreeSample>& samples, const std::vector<std::size_t>& indices, double mean) {
  double sse = 0.0;
  for (std::size_t i : indices) {
    const double d = samples[i].y - mean;
    sse += d * d;
  }
  return sse;
}

struct Grower {
  const std::vector<TreeSample>& samples;
  const TreeGrowParams& params;
  const std::vector<int>& features;
  std::vector<RegressionTree::Node> nodes;

  // Leaf means sum in ascending order of the first split feature so replaying
  // the training data reproduces them bit-for-bit.
  double mean_of(const std::vector<std::size_t>& indices) const {
    double sum = 0.0;
    for (std::size_t i : indices) sum += samples[i].y;
    return sum / static_cast<double>(indices.size());
  }

  std::int32_t grow(std::vector<std::size_t> indices, int depth) {
    const double mean = mean_of(indices);
    const std::int32_t index = static_cast<std::int32_t>(nodes.size());
    nodes.push_back(RegressionTree::Node{});
    nodes[index].value = mean;

    if (depth >= params.max_depth || indices.size() < 2 * static_cast<std::size_t>(params.min_leaf))
      return index;
    const bool pure = std::all_of(indices.begin(), indices.end(),
                                  [&](std::size_t i) { return samples[i].y == samples[indices.front()].y; });
    if (pure) return index;

    BestSplit best;
    std::vector<std::size_t> order = indices;
    for (int feature : features) scan_feature(order, samples, feature, params.min_leaf, best);
    if (!best.found) return index;
    if (best.cost >= node_sse(samples, indices, mean)) return index;  // no impurity decrease

    std::vector<std::size_t> left, right;
    for (std::size_t i : indices)
      (samples[i].x[best.feature] < best.threshold ? left : right).push_back(i);

    nodes[index].feature = best.feature;
    nodes[index].threshold = best.threshold;
    const std::int32_t left_child = grow(std::move(left), depth + 1);
    nodes[index].left = left_child;
    const std::int32_t right_child = grow(std::move(right), depth + 1);
    nodes[index].right = right_child;
    return index;
  }
};

}  // namespace

RegressionTree grow_regression_tree(std::vector<TreeSample> samples, const TreeGrowParams& params,
                                    const std::vector<int>& features) {
  if (samples.empty()) throw Error(Errc::InsufficientData, "cannot grow a tree on no samples");
  if (params.max_depth < 1 || params.min_leaf < 1)
    throw Error(Errc::InvalidArgument, "tree parameters must be at least 1");
  for (int f : features)
    if (f < 0 || f > 1) throw Error(Errc::InvalidArgument, "tree feature index out of range");

  // Stable base order: sort samples by the first usable feature so leaf means
  // do not depend on caller ordering.
  const int primary = features.empty() ? 1 : features.front();
  std::stable_sort(samples.begin(), samples.end(), [&](const TreeSample& a, const TreeSample& b) {
    if (a.x[primary] != b.x[primary]) return a.x[primary] < b.x[primary];
    return a.y < b.y;
  });

  Grower grower{samples, params, features, {}};
  std::vector<std::size_t> all(samples.size());
  std::iota(all.begin(), all.end(), 0);
  grower.grow(std::move(all), 0);
  return RegressionTree(std::move(grower.nodes));
}

}  // namespace powerlens
