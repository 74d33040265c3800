#pragma once

#include <span>
#include <vector>

#include "powerlens/model.hpp"
#include "powerlens/types.hpp"

namespace powerlens {

double mse(std::span<const double> predicted, std::span<const double> actual);
double mae(std::span<const double> predicted, std::span<const double> actual);

/// Coefficient of determination 1 - SSR/SST. Throws DegenerateVariance when the
/// actual values are constant (SST = 0).
double r2_score(std::span<const double> predicted, std::span<const double> actual);

/// Runs the model over every record and reduces to MSE/MAE/R^2. Records are
/// accumulated in a fixed order (sorted by frequency, tag, utilization, power)
/// so the result is reproducible under permutation of the input.
EvalMetrics evaluate_model(const PowerModel& model, std::span<const MeasurementRecord> dataset);

}  // namespace powerlens
