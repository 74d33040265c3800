#include "powerlens/fit.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "powerlens/error.hpp"

namespace powerlens {

namespace {

constexpr double kMaxConditionEstimate = 1e12;

std::vector<Frequency> distinct_frequencies(std::span<const MeasurementRecord> dataset) {
  std::set<Frequency> seen;
  for (const MeasurementRecord& r : dataset) seen.insert(r.frequency);
  return {seen.begin(), seen.end()};
}

// Deterministic fit order regardless of how the caller assembled the dataset.
std::vector<const MeasurementRecord*> sorted_view(std::span<const MeasurementRecord> dataset) {
  std::vector<const MeasurementRecord*> view;
  view.reserve(dataset.size());
  for (const MeasurementRecord& r : dataset) view.push_back(&r);
  std::stable_sort(view.begin(), view.end(), [](const MeasurementRecord* a, const MeasurementRecord* b) {
    if (a->frequency != b->frequency) return a->frequency < b->frequency;
    if (a->utilization.value() != b->utilization.value()) return a->utilization.value() < b->utilization.value();
    return a->power_w < b->power_w;
  });
  return view;
}

Vec16 fit_monomials(const std::vector<const MeasurementRecord*>& records, double lambda) {
  Eigen::MatrixXd design(static_cast<Eigen::Index>(records.size()), 16);
  Eigen::VectorXd targets(static_cast<Eigen::Index>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    design.row(static_cast<Eigen::Index>(i)) =
        monomial_features(records[i]->frequency.ghz(), records[i]->utilization.value()).transpose();
    targets[static_cast<Eigen::Index>(i)] = records[i]->power_w;
  }
  return ridge_solve(design, targets, lambda);
}

}  // namespace

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets, double lambda) {
  if (design.rows() != targets.size())
    throw Error(Errc::LengthMismatch, "design rows do not match target count");
  if (lambda < 0.0) throw Error(Errc::InvalidArgument, "ridge lambda must be nonnegative");

  const Eigen::Index p = design.cols();
  const Eigen::MatrixXd gram = design.transpose() * design;
  Eigen::MatrixXd normal = gram;
  normal.diagonal().array() += lambda;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(normal);
  if (eigen.info() != Eigen::Success)
    throw Error(Errc::SingularSystem, "eigendecomposition of the normal matrix failed");
  const Eigen::VectorXd& values = eigen.eigenvalues();
  const double smallest = values[0];
  const double largest = values[p - 1];
  if (!(smallest > 0.0) || largest / smallest > kMaxConditionEstimate)
    throw Error(Errc::SingularSystem,
                "normal equations condition estimate " + std::to_string(largest / std::abs(smallest)) +
                    " exceeds 1e12");

  auto solve = [&](const Eigen::VectorXd& b) {
    return (eigen.eigenvectors() * (eigen.eigenvectors().transpose() * b).cwiseQuotient(values)).eval();
  };

  // Iterated Tikhonov: each defect-correction pass against the unregularized
  // system shrinks the ridge bias of well-determined coefficients by another
  // factor of lambda/mu while singular directions stay damped.
  const Eigen::VectorXd rhs = design.transpose() * targets;
  Eigen::VectorXd solution = solve(rhs);
  for (int pass = 0; pass < 2; ++pass) solution += solve(rhs - gram * solution);
  return solution;
}

PowerModel fit_simple(std::span<const MeasurementRecord> dataset, const FitConfig& config) {
  std::vector<Frequency> table = distinct_frequencies(dataset);
  if (dataset.size() < 5 || table.size() < 2)
    throw Error(Errc::InsufficientData, "simple model needs at least 5 records over 2 distinct frequencies");

  const auto view = sorted_view(dataset);
  Eigen::MatrixXd design(static_cast<Eigen::Index>(view.size()), 4);
  Eigen::VectorXd targets(static_cast<Eigen::Index>(view.size()));
  for (std::size_t i = 0; i < view.size(); ++i) {
    design.row(static_cast<Eigen::Index>(i)) =
        simple_features(view[i]->frequency.ghz(), view[i]->utilization.value()).transpose();
    targets[static_cast<Eigen::Index>(i)] = view[i]->power_w;
  }
  SimplePayload payload;
  payload.coeffs = ridge_solve(design, targets, config.ridge_lambda);
  return PowerModel::simple(std::move(table), std::move(payload));
}

PowerModel fit_multi_term(std::span<const MeasurementRecord> dataset, const FitConfig& config) {
  std::vector<Frequency> table = distinct_frequencies(dataset);
  if (dataset.size() < 12 || table.size() < 2)
    throw Error(Errc::InsufficientData, "multi-term model needs at least 12 records over 2 distinct frequencies");
  MultiTermPayload payload;
  payload.coeffs = fit_monomials(sorted_view(dataset), config.ridge_lambda);
  return PowerModel::multi_term(std::move(table), std::move(payload));
}

PowerModel fit_multi_frequency(std::span<const MeasurementRecord> dataset, int split_index,
                               const FitConfig& config) {
  std::vector<Frequency> table = distinct_frequencies(dataset);
  if (split_index <= 0 || static_cast<std::size_t>(split_index) >= table.size())
    throw Error(Errc::EmptyGroup, "split index " + std::to_string(split_index) +
                                      " leaves an empty frequency group (table has " +
                                      std::to_string(table.size()) + " levels)");
  const Frequency split = table[static_cast<std::size_t>(split_index)];

  std::vector<const MeasurementRecord*> low, high;
  for (const MeasurementRecord* r : sorted_view(dataset))
    (r->frequency < split ? low : high).push_back(r);
  if (low.empty() || high.empty()) throw Error(Errc::EmptyGroup, "a frequency group has no records");

  MultiFrequencyPayload payload;
  payload.split_index = split_index;
  payload.low = fit_monomials(low, config.ridge_lambda);
  payload.high = fit_monomials(high, config.ridge_lambda);
  return PowerModel::multi_frequency(std::move(table), std::move(payload));
}

PowerModel fit_per_frequency(std::span<const MeasurementRecord> dataset, const FitConfig& config) {
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "no records to fit");
  std::map<Frequency, std::vector<const MeasurementRecord*>> groups;
  for (const MeasurementRecord* r : sorted_view(dataset)) groups[r->frequency].push_back(r);

  std::vector<Frequency> table;
  PerFrequencyPayload payload;
  for (const auto& [freq, records] : groups) {
    std::set<double> utils;
    for (const MeasurementRecord* r : records) utils.insert(r->utilization.value());
    if (records.size() < 4 || utils.size() < 3)
      throw Error(Errc::InsufficientDataAtFrequency,
                  "frequency " + std::to_string(freq.khz()) +
                      " kHz needs at least 4 records at 3 distinct utilizations");

    Eigen::MatrixXd design(static_cast<Eigen::Index>(records.size()), 3);
    Eigen::VectorXd targets(static_cast<Eigen::Index>(records.size()));
    for (std::size_t i = 0; i < records.size(); ++i) {
      const double u = records[i]->utilization.value();
      design.row(static_cast<Eigen::Index>(i)) << u * u, u, 1.0;
      targets[static_cast<Eigen::Index>(i)] = records[i]->power_w;
    }
    const Eigen::VectorXd coeffs = ridge_solve(design, targets, config.ridge_lambda);
    table.push_back(freq);
    payload.entries.push_back(QuadCoeffs{coeffs[0], coeffs[1], coeffs[2]});
  }
  return PowerModel::per_frequency(std::move(table), std::move(payload));
}

PowerModel fit_tree(std::span<const MeasurementRecord> dataset, const FitConfig& config) {
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "no records to fit");
  const TreeGrowParams params{config.tree_max_depth, config.tree_min_leaf};

  if (config.tree_global) {
    std::vector<TreeSample> samples;
    samples.reserve(dataset.size());
    for (const MeasurementRecord& r : dataset)
      samples.push_back(TreeSample{{r.frequency.ghz(), r.utilization.value()}, r.power_w});
    TreePayload payload;
    payload.global = true;
    payload.trees.push_back(grow_regression_tree(std::move(samples), params, {0, 1}));
    return PowerModel::per_frequency_tree(distinct_frequencies(dataset), std::move(payload));
  }

  std::map<Frequency, std::vector<TreeSample>> groups;
  for (const MeasurementRecord& r : dataset)
    groups[r.frequency].push_back(TreeSample{{r.frequency.ghz(), r.utilization.value()}, r.power_w});

  std::vector<Frequency> table;
  TreePayload payload;
  for (auto& [freq, samples] : groups) {
    std::set<double> utils;
    for (const TreeSample& s : samples) utils.insert(s.x[1]);
    if (samples.size() < 4 || utils.size() < 3)
      throw Error(Errc::InsufficientDataAtFrequency,
                  "frequency " + std::to_string(freq.khz()) +
                      " kHz needs at least 4 records at 3 distinct utilizations");
    table.push_back(freq);
    payload.trees.push_back(grow_regression_tree(std::move(samples), params, {1}));
  }
  return PowerModel::per_frequency_tree(std::move(table), std::move(payload));
}

PowerModel fit_mlp(std::span<const MeasurementRecord> dataset, const FitConfig& config) {
  if (dataset.size() < 50)
    throw Error(Errc::InsufficientData, "mlp training needs at least 50 records");
  for (const MeasurementRecord& r : dataset) {
    if (!r.utilization.per_core() || r.utilization.per_core()->size() != 4)
      throw Error(Errc::MissingPerCoreData, "mlp training needs per-core utilizations for exactly 4 cores");
  }
  if (config.mlp_epochs < 1 || !(config.mlp_learning_rate > 0.0))
    throw Error(Errc::InvalidArgument, "mlp epochs must be >= 1 and learning rate positive");

  const auto view = sorted_view(dataset);
  const Eigen::Index n = static_cast<Eigen::Index>(view.size());
  Eigen::MatrixXd inputs(MlpNetwork::kInputs, n);
  Eigen::RowVectorXd targets(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& cores = *view[static_cast<std::size_t>(i)]->utilization.per_core();
    inputs.col(i) << view[static_cast<std::size_t>(i)]->frequency.ghz(), cores[0], cores[1], cores[2], cores[3];
    targets[i] = view[static_cast<std::size_t>(i)]->power_w;
  }

  MlpNetwork net = make_initialized_mlp(config.mlp_seed);
  // Regression nets converge much faster when the output unit starts at the
  // target mean instead of zero.
  net.biases[MlpNetwork::kLayers - 1].setConstant(targets.mean());
  net.input_mean = inputs.rowwise().mean();
  for (int f = 0; f < MlpNetwork::kInputs; ++f) {
    const double var = (inputs.row(f).array() - net.input_mean[f]).square().mean();
    net.input_std[f] = var > 0.0 ? std::sqrt(var) : 1.0;  // constant feature stays inert
  }
  const Eigen::MatrixXd standardized = (inputs.colwise() - net.input_mean).array().colwise() / net.input_std.array();

  for (int epoch = 0; epoch < config.mlp_epochs; ++epoch) {
    const MlpGradients grads = mlp_loss_gradients(net, standardized, targets);
    for (int layer = 0; layer < MlpNetwork::kLayers; ++layer) {
      net.weights[layer] -= config.mlp_learning_rate * grads.weights[layer];
      net.biases[layer] -= config.mlp_learning_rate * grads.biases[layer];
    }
  }
  const double final_loss = mlp_loss(net, standardized, targets);
  if (!std::isfinite(final_loss))
    throw Error(Errc::NonFiniteLoss, "training diverged; lower the learning rate");

  return PowerModel::mlp(distinct_frequencies(dataset), MlpPayload{std::move(net)});
}

}  // namespace powerlens
