#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "powerlens/model.hpp"
#include "powerlens/types.hpp"

namespace powerlens {

struct FitConfig {
  double ridge_lambda = 1e-8;
  int tree_max_depth = 4;
  int tree_min_leaf = 3;
  bool tree_global = false;  // one tree over (freq, util) instead of one per frequency
  int mlp_epochs = 4000;
  double mlp_learning_rate = 1e-3;
  std::uint64_t mlp_seed = 0;
};

/// Ridge-regularized least squares on the normal equations. Raises
/// SingularSystem when the regularized system's condition estimate exceeds 1e12.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& targets, double lambda);

PowerModel fit_simple(std::span<const MeasurementRecord> dataset, const FitConfig& config = {});
PowerModel fit_multi_term(std::span<const MeasurementRecord> dataset, const FitConfig& config = {});
PowerModel fit_multi_frequency(std::span<const MeasurementRecord> dataset, int split_index = 3,
                               const FitConfig& config = {});
PowerModel fit_per_frequency(std::span<const MeasurementRecord> dataset, const FitConfig& config = {});
PowerModel fit_tree(std::span<const MeasurementRecord> dataset, const FitConfig& config = {});
PowerModel fit_mlp(std::span<const MeasurementRecord> dataset, const FitConfig& config = {});

}  // namespace powerlens
