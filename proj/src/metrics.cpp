#include "powerlens/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "powerlens/error.hpp"

namespace powerlens {

namespace {

void require_comparable(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size())
    throw Error(Errc::LengthMismatch, "predicted has " + std::to_string(predicted.size()) + " entries, actual has " +
                                          std::to_string(actual.size()));
  if (predicted.empty()) throw Error(Errc::LengthMismatch, "cannot score empty lists");
}

}  // namespace

double mse(std::span<const double> predicted, std::span<const double> actual) {
  require_comparable(predicted, actual);
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double e = actual[i] - predicted[i];
    sum += e * e;
  }
  return sum / static_cast<double>(predicted.size());
}

double mae(std::span<const double> predicted, std::span<const double> actual) {
  require_comparable(predicted, actual);
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) sum += std::abs(actual[i] - predicted[i]);
  return sum / static_cast<double>(predicted.size());
}

double r2_score(std::span<const double> predicted, std::span<const double> actual) {
  require_comparable(predicted, actual);
  const double mean = std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(actual.size());
  double ssr = 0.0;
  double sst = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double r = actual[i] - predicted[i];
    const double d = actual[i] - mean;
    ssr += r * r;
    sst += d * d;
  }
  if (sst == 0.0) throw Error(Errc::DegenerateVariance, "actual values are constant, R^2 is undefined");
  return 1.0 - ssr / sst;
}

EvalMetrics evaluate_model(const PowerModel& model, std::span<const MeasurementRecord> dataset) {
  if (dataset.empty()) throw Error(Errc::EmptyDataset, "nothing to evaluate");
  if (!model.fitted()) throw Error(Errc::ModelNotFitted, "evaluate called on an unfitted model");

  // Fixed summation order: a full sort key makes the reduction bit-identical
  // under any permutation of the input.
  std::vector<const MeasurementRecord*> ordered;
  ordered.reserve(dataset.size());
  for (const MeasurementRecord& r : dataset) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(), [](const MeasurementRecord* a, const MeasurementRecord* b) {
    if (a->frequency != b->frequency) return a->frequency < b->frequency;
    if (a->source_tag != b->source_tag) return a->source_tag < b->source_tag;
    if (a->utilization.value() != b->utilization.value()) return a->utilization.value() < b->utilization.value();
    return a->power_w < b->power_w;
  });

  std::vector<double> predicted;
  std::vector<double> actual;
  predicted.reserve(ordered.size());
  actual.reserve(ordered.size());
  for (const MeasurementRecord* r : ordered) {
    predicted.push_back(predict(model, r->frequency, r->utilization));
    actual.push_back(r->power_w);
  }

  EvalMetrics metrics;
  metrics.n = ordered.size();
  metrics.mse = mse(predicted, actual);
  metrics.mae = mae(predicted, actual);
  metrics.r2 = r2_score(predicted, actual);
  return metrics;
}

}  // namespace powerlens
