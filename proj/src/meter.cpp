#include "powerlens/meter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "powerlens/campaign.hpp"
#include "powerlens/error.hpp"
#include "powerlens/textio.hpp"

namespace powerlens {

namespace {

constexpr double kTimeSlack = 1e-9;  // tolerate float jitter at window edges

int find_column(const std::vector<std::string_view>& header, const std::string& name) {
  if (name.empty()) return -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (trim(header[i]) == name) return static_cast<int>(i);
  return -2;  // requested but absent
}

}  // namespace

MeterSchema builtin_meter_schema(const std::string& name) {
  MeterSchema schema;
  schema.name = name;
  if (name == "energy") {
    schema.energy_column = "energy_j";
  } else if (name == "power") {
    schema.power_column = "power_w";
  } else if (name == "vi") {
    schema.voltage_column = "voltage";
    schema.current_column = "current";
  } else {
    throw Error(Errc::SchemaMismatch, "unknown built-in meter schema '" + name + "'");
  }
  return schema;
}

MeterSchema load_meter_schema(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, path + ": " + e.what());
  }
  MeterSchema schema;
  schema.name = path;
  for (const auto& [key, value] : doc.items()) {
    if (key == "name") schema.name = value.get<std::string>();
    else if (key == "time_column") schema.time_column = value.get<std::string>();
    else if (key == "time_scale") schema.time_scale = value.get<double>();
    else if (key == "energy_column") schema.energy_column = value.get<std::string>();
    else if (key == "power_column") schema.power_column = value.get<std::string>();
    else if (key == "voltage_column") schema.voltage_column = value.get<std::string>();
    else if (key == "current_column") schema.current_column = value.get<std::string>();
    else throw Error(Errc::SchemaMismatch, path + ": unknown schema key '" + key + "'");
  }
  return schema;
}

MeterParseResult parse_meter_log(std::istream& in, const MeterSchema& schema) {
  if (schema.energy_column.empty() && schema.power_column.empty() &&
      (schema.voltage_column.empty() || schema.current_column.empty()))
    throw Error(Errc::SchemaMismatch, "schema declares neither energy, power, nor voltage+current columns");
  if (!(schema.time_scale > 0.0)) throw Error(Errc::SchemaMismatch, "time_scale must be positive");

  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::SchemaMismatch, "meter log has no header row");
  const std::vector<std::string_view> header = split(trim(line), ',');

  const int time_col = find_column(header, schema.time_column);
  const int energy_col = find_column(header, schema.energy_column);
  const int power_col = find_column(header, schema.power_column);
  const int voltage_col = find_column(header, schema.voltage_column);
  const int current_col = find_column(header, schema.current_column);
  if (time_col < 0) throw Error(Errc::SchemaMismatch, "time column '" + schema.time_column + "' not in header");
  if (energy_col == -2) throw Error(Errc::SchemaMismatch, "energy column '" + schema.energy_column + "' not in header");
  if (power_col == -2) throw Error(Errc::SchemaMismatch, "power column '" + schema.power_column + "' not in header");
  if (voltage_col == -2 || current_col == -2)
    throw Error(Errc::SchemaMismatch, "voltage/current columns not in header");
  const bool has_vi = voltage_col >= 0 && current_col >= 0;

  MeterParseResult result;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string context = "line " + std::to_string(line_no);
    const std::vector<std::string_view> fields = split(trim(line), ',');
    if (fields.size() != header.size()) {
      result.rejected_rows.push_back(context + ": column count mismatch");
      continue;
    }
    try {
      EnergySample sample;
      sample.timestamp_s = parse_double(fields[static_cast<std::size_t>(time_col)], context) * schema.time_scale;
      if (energy_col >= 0)
        sample.cumulative_energy_j = parse_double(fields[static_cast<std::size_t>(energy_col)], context);
      if (power_col >= 0) sample.power_w = parse_double(fields[static_cast<std::size_t>(power_col)], context);
      if (has_vi && !sample.power_w) {
        const double v = parse_double(fields[static_cast<std::size_t>(voltage_col)], context);
        const double a = parse_double(fields[static_cast<std::size_t>(current_col)], context);
        sample.power_w = v * a;
      }

      if (!result.samples.empty()) {
        const EnergySample& prev = result.samples.back();
        if (sample.timestamp_s <= prev.timestamp_s) {
          result.rejected_rows.push_back(context + ": non-monotone timestamp");
          continue;
        }
        if (sample.cumulative_energy_j && prev.cumulative_energy_j &&
            *sample.cumulative_energy_j < *prev.cumulative_energy_j) {
          result.rejected_rows.push_back(context + ": cumulative energy decreased");
          continue;
        }
      }
      result.samples.push_back(sample);
    } catch (const Error& e) {
      result.rejected_rows.push_back(e.what());
    }
  }
  return result;
}

MeterParseResult parse_meter_log_file(const std::string& path, const MeterSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  return parse_meter_log(in, schema);
}

namespace {

bool all_have_energy(std::span<const EnergySample> samples) {
  return std::all_of(samples.begin(), samples.end(),
                     [](const EnergySample& s) { return s.cumulative_energy_j.has_value(); });
}

bool all_have_power(std::span<const EnergySample> samples) {
  return std::all_of(samples.begin(), samples.end(), [](const EnergySample& s) { return s.power_w.has_value(); });
}

std::size_t segment_below(std::span<const EnergySample> samples, double t) {
  // Largest i with samples[i].timestamp_s <= t, assuming t within span.
  auto it = std::upper_bound(samples.begin(), samples.end(), t,
                             [](double value, const EnergySample& s) { return value < s.timestamp_s; });
  return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - samples.begin() - 1));
}

double interpolate_energy_at(std::span<const EnergySample> samples, double t) {
  const std::size_t i = segment_below(samples, t);
  const std::size_t j = std::min(i + 1, samples.size() - 1);
  if (i == j) return *samples[i].cumulative_energy_j;
  const double alpha = (t - samples[i].timestamp_s) / (samples[j].timestamp_s - samples[i].timestamp_s);
  return *samples[i].cumulative_energy_j +
         alpha * (*samples[j].cumulative_energy_j - *samples[i].cumulative_energy_j);
}

double power_at(std::span<const EnergySample> samples, double t) {
  const std::size_t i = segment_below(samples, t);
  const std::size_t j = std::min(i + 1, samples.size() - 1);
  if (i == j) return *samples[i].power_w;
  const double alpha = (t - samples[i].timestamp_s) / (samples[j].timestamp_s - samples[i].timestamp_s);
  return *samples[i].power_w + alpha * (*samples[j].power_w - *samples[i].power_w);
}

}  // namespace

double integrate_energy(std::span<const EnergySample> samples, double t0, double t1) {
  if (samples.size() < 2) throw Error(Errc::OutOfRange, "need at least two samples to integrate");
  if (!(t0 < t1)) throw Error(Errc::OutOfRange, "integration window is empty or reversed");
  const double lo = samples.front().timestamp_s;
  const double hi = samples.back().timestamp_s;
  if (t0 < lo - kTimeSlack || t1 > hi + kTimeSlack)
    throw Error(Errc::OutOfRange, "window [" + std::to_string(t0) + ", " + std::to_string(t1) +
                                      "] outside the log span [" + std::to_string(lo) + ", " +
                                      std::to_string(hi) + "]");
  t0 = std::clamp(t0, lo, hi);
  t1 = std::clamp(t1, lo, hi);

  if (all_have_energy(samples)) return interpolate_energy_at(samples, t1) - interpolate_energy_at(samples, t0);
  if (!all_have_power(samples))
    throw Error(Errc::SchemaMismatch, "samples carry neither uniform energy nor uniform power");

  // Trapezoidal integration of power with partial end segments.
  double energy = 0.0;
  const std::size_t first = segment_below(samples, t0);
  const std::size_t last = segment_below(samples, t1);
  for (std::size_t i = first; i <= last && i + 1 < samples.size(); ++i) {
    const double seg_lo = std::max(t0, samples[i].timestamp_s);
    const double seg_hi = std::min(t1, samples[i + 1].timestamp_s);
    if (seg_hi <= seg_lo) continue;
    energy += 0.5 * (power_at(samples, seg_lo) + power_at(samples, seg_hi)) * (seg_hi - seg_lo);
  }
  return energy;
}

std::vector<WindowPower> window_power_series(std::span<const EnergySample> samples, double window_s,
                                             double stride_s) {
  if (samples.size() < 2) throw Error(Errc::WindowTooLarge, "need at least two samples");
  if (!(window_s > 0.0) || !(stride_s > 0.0))
    throw Error(Errc::InvalidArgument, "window and stride must be positive");
  const double lo = samples.front().timestamp_s;
  const double hi = samples.back().timestamp_s;
  if (window_s > hi - lo + kTimeSlack)
    throw Error(Errc::WindowTooLarge, "window of " + std::to_string(window_s) + " s exceeds the log span of " +
                                          std::to_string(hi - lo) + " s");

  std::vector<WindowPower> series;
  for (double start = lo; start + window_s <= hi + kTimeSlack; start += stride_s) {
    const double end = std::min(start + window_s, hi);
    series.push_back(WindowPower{start, end, integrate_energy(samples, start, end) / (end - start)});
  }
  return series;
}

WindowStats window_power_stats(std::span<const EnergySample> samples, double window_s, double stride_s) {
  const std::vector<WindowPower> series = window_power_series(samples, window_s, stride_s);
  WindowStats stats;
  stats.n = series.size();
  for (const WindowPower& w : series) stats.mean += w.power_w;
  stats.mean /= static_cast<double>(series.size());
  if (series.size() > 1) {
    double ss = 0.0;
    for (const WindowPower& w : series) ss += (w.power_w - stats.mean) * (w.power_w - stats.mean);
    stats.stddev = std::sqrt(ss / static_cast<double>(series.size() - 1));
  }
  return stats;
}

JoinResult join_campaign(const CampaignManifest& manifest, std::span<const EnergySample> samples) {
  JoinResult result;
  for (const CampaignManifest::Cell& cell : manifest.cells) {
    if (!cell.ok) {
      result.uncovered_cells.push_back(cell.tag + ": skipped during campaign (" + cell.error + ")");
      continue;
    }
    const double t0 = cell.t_start_s + manifest.clock_offset_s;
    const double t1 = cell.t_end_s + manifest.clock_offset_s;
    try {
      const double energy = integrate_energy(samples, t0, t1);
      const double power = energy / (cell.t_end_s - cell.t_start_s);
      Utilization util = cell.per_core.empty() ? Utilization(cell.utilization)
                                               : Utilization(cell.utilization, cell.per_core);
      result.records.push_back(MeasurementRecord{Frequency(cell.freq_khz), std::move(util), power, cell.tag});
    } catch (const Error& e) {
      if (e.code() != Errc::OutOfRange) throw;
      result.uncovered_cells.push_back(cell.tag + ": " + e.what());
    }
  }
  return result;
}

void save_meter_log(std::span<const EnergySample> samples, std::ostream& out) {
  const bool energy = !samples.empty() && samples.front().cumulative_energy_j.has_value();
  out << (energy ? "timestamp,energy_j" : "timestamp,power_w") << '\n';
  for (const EnergySample& s : samples) {
    out << format_double(s.timestamp_s) << ','
        << format_double(energy ? *s.cumulative_energy_j : s.power_w.value_or(0.0)) << '\n';
  }
  if (!out) throw Error(Errc::IoError, "meter log write failed");
}

void save_meter_log_file(std::span<const EnergySample> samples, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  save_meter_log(samples, out);
}

}  // namespace powerlens
