#pragma once

#include <atomic>
#include <string>
#include <string_view>
#include <vector>

#include "powerlens/campaign.hpp"
#include "powerlens/tracelog.hpp"

namespace powerlens {

// Pure parsers for the kernel text interfaces, separated for testability.

/// Per-core (idle, total) ticks from /proc/stat contents. Idle counts idle+iowait;
/// total sums all eight time fields.
CounterSnapshot parse_proc_stat(std::string_view text, std::int64_t wall_clock_us);

/// Whitespace-separated kHz values, e.g. scaling_available_frequencies.
std::vector<Frequency> parse_frequency_list(std::string_view text);

struct LinuxPaths {
  std::string proc_stat = "/proc/stat";
  std::string cpu_root = "/sys/devices/system/cpu";

  std::string cpufreq_file(int cpu, const std::string& leaf) const;
};

/// Real-device calibration backend. Frequency regulation writes the userspace
/// governor through sysfs and needs an explicit opt-in (and usually root);
/// energy is left to an offline meter log, so records carry NaN power until
/// joined. Wall time is CLOCK_REALTIME seconds to line up with meter exports.
class LinuxDevice final : public DeviceBackend {
 public:
  explicit LinuxDevice(LinuxPaths paths = {}, bool allow_frequency_control = false);

  const std::vector<Frequency>& supported_frequencies() const override { return frequencies_; }
  int core_count() const override { return core_count_; }
  void set_frequency(Frequency freq) override;
  double now_s() override;
  CounterSnapshot read_counters() override;
  std::optional<double> read_energy_j() override { return std::nullopt; }
  void execute(double busy_s, double idle_s, int workers) override;

 private:
  LinuxPaths paths_;
  bool allow_frequency_control_;
  int core_count_ = 0;
  std::vector<Frequency> frequencies_;
};

struct TrackOptions {
  int poll_ms = 20;
  std::string out_path;
  std::string control_path;  // '1' starts logging, '0' stops; empty = start immediately
};

/// Polling tracker over the live system: watches cpu0's current frequency and
/// appends a trace line on every observed change. Returns the number of
/// segments written. `stop` allows the caller (signal handler) to request a
/// flush-and-exit.
std::size_t track_live(const LinuxPaths& paths, const TrackOptions& options, const std::atomic<bool>& stop);

}  // namespace powerlens
