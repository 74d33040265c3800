#include "powerlens/mlp.hpp"

#include <cmath>
#include <random>

#include "powerlens/error.hpp"

namespace powerlens {

namespace {

inline Eigen::MatrixXd relu(const Eigen::MatrixXd& z) { return z.cwiseMax(0.0); }

}  // namespace

double MlpNetwork::predict(const Eigen::Matrix<double, kInputs, 1>& raw_input) const {
  Eigen::MatrixXd a = (raw_input - input_mean).cwiseQuotient(input_std);
  for (int layer = 0; layer < kLayers; ++layer) {
    Eigen::MatrixXd z = weights[layer] * a + biases[layer];
    a = layer + 1 < kLayers ? relu(z) : z;
  }
  return a(0, 0);
}

Eigen::RowVectorXd MlpNetwork::forward(const Eigen::MatrixXd& standardized) const {
  Eigen::MatrixXd a = standardized;
  for (int layer = 0; layer < kLayers; ++layer) {
    Eigen::MatrixXd z = (weights[layer] * a).colwise() + biases[layer];
    a = layer + 1 < kLayers ? relu(z) : z;
  }
  return a.row(0);
}

MlpNetwork make_initialized_mlp(std::uint64_t seed) {
  MlpNetwork net;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int layer = 0; layer < MlpNetwork::kLayers; ++layer) {
    const int fan_in = MlpNetwork::kLayerSizes[layer];
    const int fan_out = MlpNetwork::kLayerSizes[layer + 1];
    const double scale = std::sqrt(2.0 / fan_in);
    net.weights[layer].resize(fan_out, fan_in);
    for (int r = 0; r < fan_out; ++r)
      for (int c = 0; c < fan_in; ++c) net.weights[layer](r, c) = scale * gauss(rng);
    net.biases[layer] = Eigen::VectorXd::Zero(fan_out);
  }
  return net;
}

double mlp_loss(const MlpNetwork& net, const Eigen::MatrixXd& standardized, const Eigen::RowVectorXd& targets) {
  const Eigen::RowVectorXd out = net.forward(standardized);
  return (out - targets).squaredNorm() / static_cast<double>(targets.size());
}

MlpGradients mlp_loss_gradients(const MlpNetwork& net, const Eigen::MatrixXd& standardized,
                                const Eigen::RowVectorXd& targets) {
  const auto n = targets.size();

  // Forward, keeping activations per layer.
  std::array<Eigen::MatrixXd, MlpNetwork::kLayers + 1> activations;
  activations[0] = standardized;
  for (int layer = 0; layer < MlpNetwork::kLayers; ++layer) {
    Eigen::MatrixXd z = (net.weights[layer] * activations[layer]).colwise() + net.biases[layer];
    activations[layer + 1] = layer + 1 < MlpNetwork::kLayers ? relu(z) : z;
  }

  MlpGradients grads;
  // dL/dout for L = mean squared error.
  Eigen::MatrixXd delta = 2.0 / static_cast<double>(n) * (activations[MlpNetwork::kLayers].row(0) - targets);
  for (int layer = MlpNetwork::kLayers - 1; layer >= 0; --layer) {
    grads.weights[layer] = delta * activations[layer].transpose();
    grads.biases[layer] = delta.rowwise().sum();
    if (layer > 0) {
      delta = net.weights[layer].transpose() * delta;
      // ReLU gate: zero where the pre-activation was clipped.
      delta = delta.cwiseProduct((activations[layer].array() > 0.0).cast<double>().matrix());
    }
  }
  return grads;
}

}  // namespace powerlens
