#include "powerlens/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "powerlens/error.hpp"

namespace powerlens {

namespace {

constexpr std::int64_t kTicksPerSecond = 1'000'000'000;  // counter resolution

}  // namespace

SyntheticDevice::SyntheticDevice(PowerModel truth, SyntheticDeviceConfig config)
    : truth_(std::move(truth)),
      config_(std::move(config)),
      current_freq_(config_.supported_frequencies.empty() ? Frequency(1) : config_.supported_frequencies.front()),
      rng_(config_.rng_seed) {
  if (config_.supported_frequencies.empty())
    throw Error(Errc::InvalidArgument, "synthetic device needs a supported frequency table");
  if (!std::is_sorted(config_.supported_frequencies.begin(), config_.supported_frequencies.end()))
    throw Error(Errc::InvalidArgument, "supported frequencies must be ascending");
  if (config_.core_count < 1) throw Error(Errc::InvalidArgument, "core_count must be >= 1");
  if (!(config_.meter_sample_period_s > 0.0))
    throw Error(Errc::InvalidArgument, "meter sample period must be positive");
  if (config_.noise_stddev_w < 0.0) throw Error(Errc::InvalidArgument, "noise stddev must be >= 0");
  if (!truth_.fitted()) throw Error(Errc::ModelNotFitted, "synthetic device needs a truth model");
  core_busy_ns_.assign(static_cast<std::size_t>(config_.core_count), 0);
  meter_log_.push_back(EnergySample{0.0, 0.0, std::nullopt});
}

void SyntheticDevice::set_frequency(Frequency freq) {
  const auto& table = config_.supported_frequencies;
  if (std::find(table.begin(), table.end(), freq) == table.end())
    throw Error(Errc::UnsupportedFrequency,
                std::to_string(freq.khz()) + " kHz is not in the synthetic frequency table");
  current_freq_ = freq;
}

CounterSnapshot SyntheticDevice::read_counters() {
  CounterSnapshot snapshot;
  snapshot.wall_clock_us = static_cast<std::int64_t>(std::llround(now_s_ * 1e6));
  const std::int64_t total = static_cast<std::int64_t>(std::llround(now_s_ * kTicksPerSecond));
  snapshot.per_core.reserve(core_busy_ns_.size());
  for (std::int64_t busy : core_busy_ns_) {
    const std::int64_t bounded = std::min(busy, total);  // per-cell rounding must not push idle negative
    snapshot.per_core.push_back(CoreTimes{total - bounded, total});
  }
  return snapshot;
}

void SyntheticDevice::advance(double duration_s, double power_w, const std::vector<double>& core_busy_fraction) {
  std::normal_distribution<double> noise(0.0, config_.noise_stddev_w);
  double remaining = duration_s;
  while (remaining > 1e-12) {
    const double step = std::min(remaining, config_.meter_sample_period_s - sample_phase_s_);
    const double sampled = config_.noise_stddev_w > 0.0 ? power_w + noise(rng_) : power_w;
    cumulative_energy_j_ += sampled * step;
    now_s_ += step;
    sample_phase_s_ += step;
    remaining -= step;
    if (sample_phase_s_ >= config_.meter_sample_period_s - 1e-12) {
      meter_log_.push_back(EnergySample{now_s_, cumulative_energy_j_, std::nullopt});
      sample_phase_s_ = 0.0;
    }
  }
  for (std::size_t core = 0; core < core_busy_ns_.size(); ++core) {
    const double fraction = core < core_busy_fraction.size() ? core_busy_fraction[core] : 0.0;
    core_busy_ns_[core] += static_cast<std::int64_t>(std::llround(fraction * duration_s * kTicksPerSecond));
  }
  // Cell boundaries always land in the log so joins interpolate exactly there.
  if (meter_log_.back().timestamp_s < now_s_ - 1e-12)
    meter_log_.push_back(EnergySample{now_s_, cumulative_energy_j_, std::nullopt});
}

std::pair<double, double> SyntheticDevice::simulate_measurement(double duty, double duration_s, int workers) {
  if (!(duty >= 0.0 && duty <= 1.0)) throw Error(Errc::InvalidArgument, "duty must be in [0, 1]");
  if (workers < 1 || workers > config_.core_count)
    throw Error(Errc::InvalidArgument, "workers must be in 1..core_count");
  if (!(duration_s > 0.0)) throw Error(Errc::InvalidArgument, "duration must be positive");

  // The regulated duty lands only approximately; the resulting exact
  // utilization carries seeded per-core jitter and is what the counters see.
  std::normal_distribution<double> jitter(0.0, config_.util_jitter_stddev);
  std::vector<double> core_fraction(static_cast<std::size_t>(config_.core_count), 0.0);
  for (int w = 0; w < workers; ++w)
    core_fraction[static_cast<std::size_t>(w)] =
        std::clamp(duty + (config_.util_jitter_stddev > 0.0 ? jitter(rng_) : 0.0), 0.0, 1.0);

  double exact_util = 0.0;
  for (double f : core_fraction) exact_util += f;
  exact_util /= static_cast<double>(config_.core_count);

  const double power = predict(truth_, current_freq_, Utilization(exact_util));
  const double energy_before = cumulative_energy_j_;
  advance(duration_s, power, core_fraction);
  return {cumulative_energy_j_ - energy_before, exact_util};
}

void SyntheticDevice::execute(double busy_s, double idle_s, int workers) {
  const double duration = busy_s + idle_s;
  if (!(duration > 0.0)) throw Error(Errc::InvalidArgument, "cell duration must be positive");
  const double duty = busy_s / duration;
  simulate_measurement(duty, duration, workers);
}

PowerModel make_default_truth(const std::vector<Frequency>& table) {
  PerFrequencyPayload payload;
  for (Frequency f : table) {
    const double ghz = f.ghz();
    // Plausible embedded-board shape: idle power grows superlinearly with
    // frequency (voltage scaling), the utilization slope grows with frequency.
    payload.entries.push_back(QuadCoeffs{0.5 + 0.9 * ghz, 0.3 + 0.5 * ghz, 0.8 + 1.1 * ghz * ghz});
  }
  return PowerModel::per_frequency(table, std::move(payload));
}

std::vector<Frequency> default_frequency_table(int count) {
  if (count < 1) throw Error(Errc::InvalidArgument, "frequency table needs at least one entry");
  std::vector<Frequency> table;
  const std::int64_t lo = 102'000;
  const std::int64_t hi = 1'479'000;
  for (int i = 0; i < count; ++i) {
    const std::int64_t khz = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    table.push_back(Frequency(khz));
  }
  return table;
}

}  // namespace powerlens
