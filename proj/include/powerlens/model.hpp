#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "powerlens/mlp.hpp"
#include "powerlens/tree.hpp"
#include "powerlens/types.hpp"

namespace powerlens {

enum class ModelKind { Simple, MultiTerm, MultiFrequency, PerFrequency, PerFrequencyTree, Mlp };

const char* model_kind_token(ModelKind kind) noexcept;
ModelKind model_kind_from_token(const std::string& token);

/// Coefficients of the power equation k0*u^2 + k1*f*u + k2*u + b, f in GHz.
struct PowerEquationCoeffs {
  double k0 = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double b = 0.0;
};

double eval_polynomial(const PowerEquationCoeffs& coeffs, Frequency freq, const Utilization& util);

/// Per-frequency quadratic a*u^2 + c*u + b (the fixed-frequency reduction of
/// the power equation: a = k0, c = k1*f + k2).
struct QuadCoeffs {
  double a = 0.0;
  double c = 0.0;
  double b = 0.0;
};

inline double eval_quadratic(const QuadCoeffs& q, double u) noexcept { return q.a * u * u + q.c * u + q.b; }

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Vec16 = Eigen::Matrix<double, 16, 1>;

/// Basis of the simple model: {1, u, f^3, f^3*u}, f in GHz.
Vec4 simple_features(double freq_ghz, double util) noexcept;

/// Full bivariate cubic basis: term index i*4 + j carries f^i * u^j, f in GHz.
Vec16 monomial_features(double freq_ghz, double util) noexcept;

struct SimplePayload {
  Vec4 coeffs = Vec4::Zero();
};

struct MultiTermPayload {
  Vec16 coeffs = Vec16::Zero();
};

struct MultiFrequencyPayload {
  int split_index = 3;  // frequency_table[split_index] is the first high-group frequency
  Vec16 low = Vec16::Zero();
  Vec16 high = Vec16::Zero();
};

struct PerFrequencyPayload {
  std::vector<QuadCoeffs> entries;  // parallel to frequency_table, ascending
};

struct TreePayload {
  bool global = false;                // true: one tree over (freq, util); false: one tree per frequency
  std::vector<RegressionTree> trees;  // global: exactly one; else parallel to frequency_table
};

struct MlpPayload {
  MlpNetwork net;
};

/// A fitted power predictor. Default-constructed models are unfitted and refuse to predict.
class PowerModel {
 public:
  PowerModel() = default;

  static PowerModel simple(std::vector<Frequency> table, SimplePayload payload);
  static PowerModel multi_term(std::vector<Frequency> table, MultiTermPayload payload);
  static PowerModel multi_frequency(std::vector<Frequency> table, MultiFrequencyPayload payload);
  static PowerModel per_frequency(std::vector<Frequency> table, PerFrequencyPayload payload);
  static PowerModel per_frequency_tree(std::vector<Frequency> table, TreePayload payload);
  static PowerModel mlp(std::vector<Frequency> table, MlpPayload payload);

  bool fitted() const noexcept { return !std::holds_alternative<std::monostate>(payload_); }
  ModelKind kind() const;
  const std::vector<Frequency>& frequency_table() const noexcept { return frequency_table_; }

  const SimplePayload& as_simple() const;
  const MultiTermPayload& as_multi_term() const;
  const MultiFrequencyPayload& as_multi_frequency() const;
  const PerFrequencyPayload& as_per_frequency() const;
  const TreePayload& as_tree() const;
  const MlpPayload& as_mlp() const;

 private:
  using Payload = std::variant<std::monostate, SimplePayload, MultiTermPayload, MultiFrequencyPayload,
                               PerFrequencyPayload, TreePayload, MlpPayload>;

  PowerModel(std::vector<Frequency> table, Payload payload);

  std::vector<Frequency> frequency_table_;
  Payload payload_;
};

/// Predicted power in watts at the given operating point. Frequencies between
/// two fitted levels interpolate linearly; frequencies outside the fitted range
/// use the nearest endpoint. Negative raw predictions clamp to zero and bump
/// diagnostics().negative_prediction_clamps.
double predict(const PowerModel& model, Frequency freq, const Utilization& util);

}  // namespace powerlens
