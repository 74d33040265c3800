#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "powerlens/types.hpp"

namespace powerlens {

/// Training dataset CSV. Header: freq_khz,util_pct,power_w[,u0_pct,u1_pct,u2_pct,u3_pct][,tag]
/// Percent columns are in [0, 100] and are normalized to fractions on load;
/// out-of-range rows are rejected with line numbers.
std::vector<MeasurementRecord> load_dataset(std::istream& in);
std::vector<MeasurementRecord> load_dataset_file(const std::string& path);

void save_dataset(std::span<const MeasurementRecord> records, std::ostream& out);
void save_dataset_file(std::span<const MeasurementRecord> records, const std::string& path);

}  // namespace powerlens
