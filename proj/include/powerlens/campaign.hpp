#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "powerlens/tracelog.hpp"
#include "powerlens/types.hpp"

namespace powerlens {

/// The regulated measurement plan: every supported frequency crossed with duty
/// factors 0..=10, each cell lasting total_time seconds of which
/// factor * runtime_factor seconds are busy.
class CampaignSchedule {
 public:
  static constexpr int kMaxFactor = 10;

  CampaignSchedule(std::vector<Frequency> frequencies, double runtime_factor_s = 18.0,
                   double total_time_s = 180.0);

  struct Cell {
    Frequency frequency;
    int factor = 0;
  };

  const std::vector<Frequency>& frequencies() const noexcept { return frequencies_; }
  double runtime_factor_s() const noexcept { return runtime_factor_s_; }
  double total_time_s() const noexcept { return total_time_s_; }

  double busy_seconds(int factor) const noexcept { return factor * runtime_factor_s_; }
  double idle_seconds(int factor) const noexcept { return total_time_s_ - busy_seconds(factor); }

  /// All cells in visiting order: outer loop frequency ascending, inner loop factor 0..=10.
  std::vector<Cell> cells() const;

 private:
  std::vector<Frequency> frequencies_;
  double runtime_factor_s_;
  double total_time_s_;
};

CampaignSchedule plan_campaign(std::vector<Frequency> frequencies, double runtime_factor_s = 18.0,
                               double total_time_s = 180.0);

struct Workload {
  int workers = 1;

  static Workload single_thread() { return Workload{1}; }
  static Workload multi_thread(int n) { return Workload{n}; }

  std::string tag_prefix() const { return workers == 1 ? "st" : "mt" + std::to_string(workers); }
};

/// What the campaign driver needs from a device: frequency control, a clock,
/// per-core busy counters, an optional inline cumulative-energy reading, and a
/// way to run the CPU-bound workload.
class DeviceBackend {
 public:
  virtual ~DeviceBackend() = default;

  virtual const std::vector<Frequency>& supported_frequencies() const = 0;
  virtual int core_count() const = 0;
  virtual void set_frequency(Frequency freq) = 0;
  virtual double now_s() = 0;
  virtual CounterSnapshot read_counters() = 0;

  /// Cumulative joules since some fixed origin, or nullopt when energy comes
  /// from an offline meter log instead.
  virtual std::optional<double> read_energy_j() = 0;

  /// Runs `workers` CPU-bound tasks for busy_s seconds, then idles for idle_s.
  virtual void execute(double busy_s, double idle_s, int workers) = 0;
};

struct CellResult {
  CampaignSchedule::Cell cell;
  double t_start_s = 0.0;
  double t_end_s = 0.0;
  std::optional<MeasurementRecord> record;  // nullopt when the cell was skipped
  std::string error;                        // reason when skipped
};

struct CampaignManifest {
  std::string device = "synthetic";
  std::string workload = "st";
  std::uint64_t seed = 0;
  double noise_stddev_w = 0.0;
  double total_time_s = 180.0;
  double runtime_factor_s = 18.0;
  double clock_offset_s = 0.0;  // meter clock minus device clock, operator-measured

  struct Cell {
    std::int64_t freq_khz = 0;
    int factor = 0;
    double t_start_s = 0.0;
    double t_end_s = 0.0;
    double utilization = 0.0;
    std::vector<double> per_core;
    std::string tag;
    bool ok = true;
    std::string error;
  };
  std::vector<Cell> cells;
};

void save_manifest_file(const CampaignManifest& manifest, const std::string& path);
CampaignManifest load_manifest_file(const std::string& path);

struct CampaignResult {
  std::vector<MeasurementRecord> records;  // completed cells, campaign order
  std::vector<CellResult> outcomes;        // every cell, including skips
  CampaignManifest manifest;
};

/// One Algorithm-1 cell: pin the frequency, run busy then idle, average power
/// over the whole cell from the energy delta, and read the exact utilization
/// back from the device counters. Devices without inline energy produce a
/// record with NaN power to be joined against a meter log offline.
MeasurementRecord run_cell(DeviceBackend& device, Frequency freq, int factor,
                           const CampaignSchedule& schedule, const Workload& workload);

/// Runs every cell in order; a failing cell is recorded as skipped and the
/// campaign continues.
CampaignResult run_campaign(DeviceBackend& device, const CampaignSchedule& schedule, const Workload& workload);

}  // namespace powerlens
