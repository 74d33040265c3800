#include "powerlens/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "powerlens/error.hpp"
#include "powerlens/textio.hpp"

namespace powerlens {

CampaignSchedule::CampaignSchedule(std::vector<Frequency> frequencies, double runtime_factor_s,
                                   double total_time_s)
    : frequencies_(std::move(frequencies)), runtime_factor_s_(runtime_factor_s), total_time_s_(total_time_s) {
  if (frequencies_.empty()) throw Error(Errc::InvalidArgument, "campaign needs at least one frequency");
  if (!std::is_sorted(frequencies_.begin(), frequencies_.end()))
    throw Error(Errc::InvalidArgument, "campaign frequencies must be sorted ascending");
  if (std::adjacent_find(frequencies_.begin(), frequencies_.end()) != frequencies_.end())
    throw Error(Errc::InvalidArgument, "campaign frequencies must be duplicate-free");
  if (!(runtime_factor_s_ > 0.0) || !(total_time_s_ > 0.0))
    throw Error(Errc::InvalidArgument, "schedule times must be positive");
  if (kMaxFactor * runtime_factor_s_ > total_time_s_ + 1e-9)
    throw Error(Errc::InvalidArgument, "factor * runtime_factor must not exceed total_time");
}

std::vector<CampaignSchedule::Cell> CampaignSchedule::cells() const {
  std::vector<Cell> cells;
  cells.reserve(frequencies_.size() * (kMaxFactor + 1));
  for (Frequency freq : frequencies_)
    for (int factor = 0; factor <= kMaxFactor; ++factor) cells.push_back(Cell{freq, factor});
  return cells;
}

CampaignSchedule plan_campaign(std::vector<Frequency> frequencies, double runtime_factor_s, double total_time_s) {
  return CampaignSchedule(std::move(frequencies), runtime_factor_s, total_time_s);
}

namespace {

std::string cell_tag(const Workload& workload, const CampaignSchedule::Cell& cell) {
  return workload.tag_prefix() + ":d" + std::to_string(cell.factor);
}

}  // namespace

MeasurementRecord run_cell(DeviceBackend& device, Frequency freq, int factor, const CampaignSchedule& schedule,
                           const Workload& workload) {
  const auto& supported = device.supported_frequencies();
  if (std::find(supported.begin(), supported.end(), freq) == supported.end())
    throw Error(Errc::UnsupportedFrequency, std::to_string(freq.khz()) + " kHz is not supported by the device");
  if (factor < 0 || factor > CampaignSchedule::kMaxFactor)
    throw Error(Errc::InvalidArgument, "factor outside 0..=10");

  device.set_frequency(freq);
  const std::optional<double> energy_start = device.read_energy_j();
  const double time_start = device.now_s();
  const CounterSnapshot counters_start = device.read_counters();

  device.execute(schedule.busy_seconds(factor), schedule.idle_seconds(factor), workload.workers);

  const std::optional<double> energy_end = device.read_energy_j();
  const double time_end = device.now_s();
  const CounterSnapshot counters_end = device.read_counters();

  std::vector<double> loads;
  loads.reserve(counters_end.per_core.size());
  for (std::size_t core = 0; core < counters_end.per_core.size(); ++core)
    loads.push_back(cpu_load(counters_start, counters_end, core));

  double power = std::numeric_limits<double>::quiet_NaN();
  if (energy_start && energy_end) {
    if (!(time_end > time_start)) throw Error(Errc::MeterReadFailure, "cell ended with no elapsed time");
    power = (*energy_end - *energy_start) / (time_end - time_start);
  }

  return MeasurementRecord{freq, Utilization(std::move(loads)), power,
                           cell_tag(workload, CampaignSchedule::Cell{freq, factor})};
}

CampaignResult run_campaign(DeviceBackend& device, const CampaignSchedule& schedule, const Workload& workload) {
  if (workload.workers < 1 || workload.workers > device.core_count())
    throw Error(Errc::InvalidArgument, "worker count must be in 1..core_count");

  CampaignResult result;
  result.manifest.workload = workload.tag_prefix();
  result.manifest.total_time_s = schedule.total_time_s();
  result.manifest.runtime_factor_s = schedule.runtime_factor_s();

  for (const CampaignSchedule::Cell& cell : schedule.cells()) {
    CellResult outcome{cell, device.now_s(), 0.0, std::nullopt, {}};
    CampaignManifest::Cell manifest_cell;
    manifest_cell.freq_khz = cell.frequency.khz();
    manifest_cell.factor = cell.factor;
    manifest_cell.t_start_s = outcome.t_start_s;
    manifest_cell.tag = cell_tag(workload, cell);
    try {
      MeasurementRecord record = run_cell(device, cell.frequency, cell.factor, schedule, workload);
      outcome.t_end_s = device.now_s();
      manifest_cell.t_end_s = outcome.t_end_s;
      manifest_cell.utilization = record.utilization.value();
      if (record.utilization.per_core()) manifest_cell.per_core = *record.utilization.per_core();
      if (std::isfinite(record.power_w)) result.records.push_back(record);
      outcome.record = std::move(record);
    } catch (const Error& e) {
      // A failing cell is recorded and skipped; the campaign continues.
      outcome.t_end_s = device.now_s();
      outcome.error = e.what();
      manifest_cell.t_end_s = outcome.t_end_s;
      manifest_cell.ok = false;
      manifest_cell.error = e.what();
    }
    result.manifest.cells.push_back(std::move(manifest_cell));
    result.outcomes.push_back(std::move(outcome));
  }
  return result;
}

void save_manifest_file(const CampaignManifest& manifest, const std::string& path) {
  nlohmann::json cells = nlohmann::json::array();
  for (const CampaignManifest::Cell& cell : manifest.cells) {
    nlohmann::json entry{{"freq_khz", cell.freq_khz}, {"factor", cell.factor},
                         {"t_start_s", cell.t_start_s}, {"t_end_s", cell.t_end_s},
                         {"utilization", cell.utilization}, {"tag", cell.tag},
                         {"ok", cell.ok}};
    if (!cell.per_core.empty()) entry["per_core"] = cell.per_core;
    if (!cell.error.empty()) entry["error"] = cell.error;
    cells.push_back(std::move(entry));
  }
  nlohmann::json doc{{"powerlens_manifest", 1},
                     {"device", manifest.device},
                     {"workload", manifest.workload},
                     {"seed", manifest.seed},
                     {"noise_stddev_w", manifest.noise_stddev_w},
                     {"total_time_s", manifest.total_time_s},
                     {"runtime_factor_s", manifest.runtime_factor_s},
                     {"clock_offset_s", manifest.clock_offset_s},
                     {"cells", std::move(cells)}};
  write_file(path, doc.dump(2) + "\n");
}

CampaignManifest load_manifest_file(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, path + ": " + e.what());
  }
  try {
    if (doc.value("powerlens_manifest", 0) != 1)
      throw Error(Errc::UnsupportedVersion, path + ": unsupported manifest version");
    CampaignManifest manifest;
    manifest.device = doc.value("device", "synthetic");
    manifest.workload = doc.value("workload", "st");
    manifest.seed = doc.value("seed", std::uint64_t{0});
    manifest.noise_stddev_w = doc.value("noise_stddev_w", 0.0);
    manifest.total_time_s = doc.value("total_time_s", 180.0);
    manifest.runtime_factor_s = doc.value("runtime_factor_s", 18.0);
    manifest.clock_offset_s = doc.value("clock_offset_s", 0.0);
    for (const nlohmann::json& entry : doc.at("cells")) {
      CampaignManifest::Cell cell;
      cell.freq_khz = entry.at("freq_khz").get<std::int64_t>();
      cell.factor = entry.at("factor").get<int>();
      cell.t_start_s = entry.at("t_start_s").get<double>();
      cell.t_end_s = entry.at("t_end_s").get<double>();
      cell.utilization = entry.at("utilization").get<double>();
      cell.tag = entry.value("tag", "");
      cell.ok = entry.value("ok", true);
      cell.error = entry.value("error", "");
      if (entry.contains("per_core")) cell.per_core = entry.at("per_core").get<std::vector<double>>();
      manifest.cells.push_back(std::move(cell));
    }
    return manifest;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, path + ": " + e.what());
  }
}

}  // namespace powerlens
