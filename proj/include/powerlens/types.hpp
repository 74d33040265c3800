#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "powerlens/error.hpp"

namespace powerlens {

/// CPU frequency, canonically stored in kilohertz.
class Frequency {
 public:
  explicit Frequency(std::int64_t khz) : khz_(khz) {
    if (khz <= 0) throw Error(Errc::InvalidArgument, "frequency must be positive, got " + std::to_string(khz) + " kHz");
  }

  std::int64_t khz() const noexcept { return khz_; }
  double ghz() const noexcept { return static_cast<double>(khz_) / 1e6; }

  friend auto operator<=>(Frequency a, Frequency b) noexcept = default;

 private:
  std::int64_t khz_;
};

/// Fraction of non-idle CPU time in [0, 1], optionally broken down per core.
class Utilization {
 public:
  explicit Utilization(double value) : value_(checked(value)) {}

  explicit Utilization(std::vector<double> per_core) {
    if (per_core.empty()) throw Error(Errc::InvalidArgument, "per-core utilization list is empty");
    double sum = 0.0;
    for (double u : per_core) sum += checked(u);
    value_ = sum / static_cast<double>(per_core.size());
    per_core_ = std::move(per_core);
  }

  Utilization(double value, std::vector<double> per_core) : Utilization(std::move(per_core)) {
    if (std::abs(value - value_) > 1e-9)
      throw Error(Errc::InvalidArgument, "mean utilization does not match per-core mean");
    value_ = checked(value);
  }

  double value() const noexcept { return value_; }
  const std::optional<std::vector<double>>& per_core() const noexcept { return per_core_; }

 private:
  static double checked(double u) {
    if (!(u >= 0.0 && u <= 1.0))
      throw Error(Errc::InvalidArgument, "utilization outside [0, 1]: " + std::to_string(u));
    return u;
  }

  double value_ = 0.0;
  std::optional<std::vector<double>> per_core_;
};

/// One calibration observation: what the device did and what the meter saw.
struct MeasurementRecord {
  Frequency frequency;
  Utilization utilization;
  double power_w = 0.0;
  std::string source_tag;
};

struct EvalMetrics {
  double mse = 0.0;  // watts^2
  double mae = 0.0;  // watts
  double r2 = 0.0;
  std::size_t n = 0;
};

}  // namespace powerlens
