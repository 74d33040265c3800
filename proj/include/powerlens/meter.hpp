#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "powerlens/types.hpp"

namespace powerlens {

struct CampaignManifest;

/// One row of a meter export: a timestamp plus cumulative energy, power, or both.
struct EnergySample {
  double timestamp_s = 0.0;
  std::optional<double> cumulative_energy_j;
  std::optional<double> power_w;
};

/// Column mapping for vendor CSV exports. Either an energy column, a power
/// column, or a voltage/current pair (power derived as V*I) must be present.
struct MeterSchema {
  std::string name = "custom";
  std::string time_column = "timestamp";
  double time_scale = 1.0;  // multiplier turning the time column into seconds
  std::string energy_column;
  std::string power_column;
  std::string voltage_column;
  std::string current_column;
};

/// Built-in schemas: "energy" (timestamp,energy_j), "power" (timestamp,power_w),
/// "vi" (timestamp,voltage,current).
MeterSchema builtin_meter_schema(const std::string& name);

/// JSON descriptor with the MeterSchema fields; unknown keys rejected.
MeterSchema load_meter_schema(const std::string& path);

struct MeterParseResult {
  std::vector<EnergySample> samples;
  std::vector<std::string> rejected_rows;  // "line N: reason"
};

/// Rows that break timestamp or cumulative-energy monotonicity are rejected
/// with their line numbers; the remaining samples are strictly increasing in time.
MeterParseResult parse_meter_log(std::istream& in, const MeterSchema& schema);
MeterParseResult parse_meter_log_file(const std::string& path, const MeterSchema& schema);

/// Energy in joules over [t0, t1]: linear interpolation of cumulative energy
/// when present, otherwise trapezoidal integration of power samples.
double integrate_energy(std::span<const EnergySample> samples, double t0, double t1);

struct WindowStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

struct WindowPower {
  double t_start = 0.0;
  double t_end = 0.0;
  double power_w = 0.0;
};

std::vector<WindowPower> window_power_series(std::span<const EnergySample> samples, double window_s,
                                             double stride_s);
WindowStats window_power_stats(std::span<const EnergySample> samples, double window_s, double stride_s);

struct JoinResult {
  std::vector<MeasurementRecord> records;
  std::vector<std::string> uncovered_cells;  // listed, not fatal
};

/// Algorithm-1 power recovery: integrates meter energy over each campaign
/// cell's [start, end] span (shifted by the manifest clock offset) and divides
/// by the cell duration, attaching the cell's measured utilization.
JoinResult join_campaign(const CampaignManifest& manifest, std::span<const EnergySample> samples);

void save_meter_log(std::span<const EnergySample> samples, std::ostream& out);
void save_meter_log_file(std::span<const EnergySample> samples, const std::string& path);

}  // namespace powerlens
