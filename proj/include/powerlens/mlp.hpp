#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>

namespace powerlens {

/// Fixed-architecture feedforward network: 5 inputs (frequency in GHz plus the
/// load of four cores), hidden layers of 128/64/32/16 rectified units, one
/// linear output. Inputs are standardized with the stored per-feature mean and
/// standard deviation before entering the first layer.
struct MlpNetwork {
  static constexpr int kInputs = 5;
  static constexpr int kLayers = 5;
  static constexpr std::array<int, kLayers + 1> kLayerSizes{5, 128, 64, 32, 16, 1};

  std::array<Eigen::MatrixXd, kLayers> weights;  // weights[l] is kLayerSizes[l+1] x kLayerSizes[l]
  std::array<Eigen::VectorXd, kLayers> biases;
  Eigen::Matrix<double, kInputs, 1> input_mean = Eigen::Matrix<double, kInputs, 1>::Zero();
  Eigen::Matrix<double, kInputs, 1> input_std = Eigen::Matrix<double, kInputs, 1>::Ones();

  double predict(const Eigen::Matrix<double, kInputs, 1>& raw_input) const;

  /// Row-wise forward pass on a batch of standardized inputs (kInputs x n).
  Eigen::RowVectorXd forward(const Eigen::MatrixXd& standardized) const;
};

MlpNetwork make_initialized_mlp(std::uint64_t seed);

struct MlpGradients {
  std::array<Eigen::MatrixXd, MlpNetwork::kLayers> weights;
  std::array<Eigen::VectorXd, MlpNetwork::kLayers> biases;
};

/// Mean-squared-error loss of the network on a standardized batch.
double mlp_loss(const MlpNetwork& net, const Eigen::MatrixXd& standardized, const Eigen::RowVectorXd& targets);

/// Analytic gradient of mlp_loss with respect to every weight and bias.
MlpGradients mlp_loss_gradients(const MlpNetwork& net, const Eigen::MatrixXd& standardized,
                                const Eigen::RowVectorXd& targets);

}  // namespace powerlens
