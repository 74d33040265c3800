#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "powerlens/model.hpp"
#include "powerlens/synthetic.hpp"
#include "powerlens/types.hpp"

namespace powerlens::testing {

inline bool close(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol; }

inline bool close_rel(double a, double b, double tol = 1e-9) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

/// Noiseless records sampled from a callable power(f_ghz, u) on a freq x util grid.
template <typename PowerFn>
std::vector<MeasurementRecord> grid_dataset(const std::vector<Frequency>& freqs, int util_levels,
                                            PowerFn&& power, const std::string& tag = "grid") {
  std::vector<MeasurementRecord> records;
  for (Frequency f : freqs) {
    for (int i = 0; i < util_levels; ++i) {
      const double u = util_levels == 1 ? 0.5 : static_cast<double>(i) / (util_levels - 1);
      records.push_back(MeasurementRecord{f, Utilization(u), power(f.ghz(), u), tag});
    }
  }
  return records;
}

inline std::vector<Frequency> freqs_khz(std::initializer_list<std::int64_t> khz) {
  std::vector<Frequency> out;
  for (std::int64_t k : khz) out.push_back(Frequency(k));
  return out;
}

}  // namespace powerlens::testing
