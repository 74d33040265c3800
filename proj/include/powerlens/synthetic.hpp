#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "powerlens/campaign.hpp"
#include "powerlens/meter.hpp"
#include "powerlens/model.hpp"

namespace powerlens {

struct SyntheticDeviceConfig {
  std::vector<Frequency> supported_frequencies;
  int core_count = 4;
  double noise_stddev_w = 0.05;       // per meter sample
  double meter_sample_period_s = 1.0;
  std::uint64_t rng_seed = 0;
  double util_jitter_stddev = 0.01;   // regulated duty vs resulting exact utilization
};

/// Desk-scale stand-in for a board plus a logging meter. Runs on a virtual
/// clock: executing a cell advances time instantly while integrating the truth
/// model's power (plus per-sample Gaussian meter noise) into a cumulative
/// energy counter and an in-memory meter log. Core busy counters tick at
/// nanosecond resolution so counter-derived utilizations match the simulated
/// exact utilization to ~1e-12.
class SyntheticDevice final : public DeviceBackend {
 public:
  SyntheticDevice(PowerModel truth, SyntheticDeviceConfig config);

  const std::vector<Frequency>& supported_frequencies() const override { return config_.supported_frequencies; }
  int core_count() const override { return config_.core_count; }
  void set_frequency(Frequency freq) override;
  double now_s() override { return now_s_; }
  CounterSnapshot read_counters() override;
  std::optional<double> read_energy_j() override { return cumulative_energy_j_; }
  void execute(double busy_s, double idle_s, int workers) override;

  /// Integrates one duty-regulated interval at the current frequency: returns
  /// the energy consumed over duration_s and the resulting exact utilization
  /// (the regulated duty plus seeded jitter). Advances the virtual clock.
  std::pair<double, double> simulate_measurement(double duty, double duration_s, int workers);

  const PowerModel& truth_model() const noexcept { return truth_; }
  const std::vector<EnergySample>& meter_log() const noexcept { return meter_log_; }

 private:
  void advance(double duration_s, double power_w, const std::vector<double>& core_busy_fraction);

  PowerModel truth_;
  SyntheticDeviceConfig config_;
  Frequency current_freq_;
  double now_s_ = 0.0;
  double cumulative_energy_j_ = 0.0;
  double sample_phase_s_ = 0.0;  // time since the last emitted meter sample
  std::vector<std::int64_t> core_busy_ns_;
  std::mt19937_64 rng_;
  std::vector<EnergySample> meter_log_;
};

/// Deterministic per-frequency quadratic truth model with a plausible
/// embedded-board power range for the given table.
PowerModel make_default_truth(const std::vector<Frequency>& table);

/// Evenly spaced supported-frequency table between 102 MHz and 1.479 GHz.
std::vector<Frequency> default_frequency_table(int count);

}  // namespace powerlens
