#include "powerlens/linux_device.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <fstream>
#include <iostream>
#include <thread>

#include "powerlens/error.hpp"
#include "powerlens/textio.hpp"

namespace powerlens {

CounterSnapshot parse_proc_stat(std::string_view text, std::int64_t wall_clock_us) {
  CounterSnapshot snapshot;
  snapshot.wall_clock_us = wall_clock_us;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;

    // Per-core lines look like `cpuN user nice system idle iowait irq softirq steal ...`.
    if (line.size() < 4 || line.substr(0, 3) != "cpu" || line[3] < '0' || line[3] > '9') continue;
    std::vector<std::string_view> fields;
    for (std::string_view f : split(line, ' '))
      if (!f.empty()) fields.push_back(f);
    if (fields.size() < 9) throw Error(Errc::ParseError, "short cpu line in /proc/stat");

    std::int64_t total = 0;
    for (std::size_t i = 1; i <= 8; ++i) total += parse_int(fields[i], "/proc/stat");
    const std::int64_t idle = parse_int(fields[4], "/proc/stat") + parse_int(fields[5], "/proc/stat");
    const std::size_t core = static_cast<std::size_t>(parse_int(fields[0].substr(3), "/proc/stat cpu index"));
    if (snapshot.per_core.size() <= core) snapshot.per_core.resize(core + 1);
    snapshot.per_core[core] = CoreTimes{idle, total};
  }
  if (snapshot.per_core.empty()) throw Error(Errc::ParseError, "no per-core cpu lines in /proc/stat");
  return snapshot;
}

std::vector<Frequency> parse_frequency_list(std::string_view text) {
  std::vector<Frequency> frequencies;
  for (std::string_view field : split(text, ' ')) {
    field = trim(field);
    if (field.empty()) continue;
    frequencies.push_back(Frequency(parse_int(field, "frequency list")));
  }
  std::sort(frequencies.begin(), frequencies.end());
  frequencies.erase(std::unique(frequencies.begin(), frequencies.end()), frequencies.end());
  return frequencies;
}

std::string LinuxPaths::cpufreq_file(int cpu, const std::string& leaf) const {
  return cpu_root + "/cpu" + std::to_string(cpu) + "/cpufreq/" + leaf;
}

namespace {

std::int64_t steady_now_us() {
  return std::chrono::duration_cast<std::chrono::microseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

double realtime_now_s() {
  return std::chrono::duration<double>(std::chrono::system_clock::now().time_since_epoch()).count();
}

void busy_spin_until(std::chrono::steady_clock::time_point deadline) {
  volatile double x = 1.000000001;
  while (std::chrono::steady_clock::now() < deadline) {
    for (int i = 0; i < 10000; ++i) x = x * 1.000000001;
  }
  (void)x;
}

}  // namespace

LinuxDevice::LinuxDevice(LinuxPaths paths, bool allow_frequency_control)
    : paths_(std::move(paths)), allow_frequency_control_(allow_frequency_control) {
  const CounterSnapshot probe = parse_proc_stat(read_file(paths_.proc_stat), 0);
  core_count_ = static_cast<int>(probe.per_core.size());
  try {
    frequencies_ = parse_frequency_list(read_file(paths_.cpufreq_file(0, "scaling_available_frequencies")));
  } catch (const Error&) {
    // Some drivers hide the list; fall back to the min/max bounds.
    try {
      const std::int64_t lo = parse_int(trim(read_file(paths_.cpufreq_file(0, "scaling_min_freq"))), "min freq");
      const std::int64_t hi = parse_int(trim(read_file(paths_.cpufreq_file(0, "scaling_max_freq"))), "max freq");
      frequencies_ = {Frequency(lo)};
      if (hi != lo) frequencies_.push_back(Frequency(hi));
    } catch (const Error&) {
      frequencies_.clear();
    }
  }
}

void LinuxDevice::set_frequency(Frequency freq) {
  if (!allow_frequency_control_)
    throw Error(Errc::GovernorPermissionDenied,
                "frequency control needs the explicit opt-in flag (and usually root)");
  for (int cpu = 0; cpu < core_count_; ++cpu) {
    try {
      write_file(paths_.cpufreq_file(cpu, "scaling_governor"), "userspace\n");
      write_file(paths_.cpufreq_file(cpu, "scaling_setspeed"), std::to_string(freq.khz()) + "\n");
    } catch (const Error& e) {
      throw Error(Errc::GovernorPermissionDenied, e.what());
    }
  }
}

double LinuxDevice::now_s() { return realtime_now_s(); }

CounterSnapshot LinuxDevice::read_counters() {
  return parse_proc_stat(read_file(paths_.proc_stat), steady_now_us());
}

void LinuxDevice::execute(double busy_s, double idle_s, int workers) {
  if (busy_s > 0.0) {
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                               std::chrono::duration<double>(busy_s));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back([deadline] { busy_spin_until(deadline); });
    for (std::thread& t : pool) t.join();
  }
  if (idle_s > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(idle_s));
}

namespace {

// Control file semantics: '1' enables logging, '0' stops the tracker.
enum class ControlState { Start, Stop, Absent };

ControlState read_control(const std::string& path) {
  if (path.empty()) return ControlState::Absent;
  std::ifstream in(path);
  if (!in) return ControlState::Absent;
  char c = 0;
  in >> c;
  if (c == '1') return ControlState::Start;
  if (c == '0') return ControlState::Stop;
  return ControlState::Absent;
}

}  // namespace

std::size_t track_live(const LinuxPaths& paths, const TrackOptions& options, const std::atomic<bool>& stop) {
  std::ofstream out(options.out_path, std::ios::binary | std::ios::app);
  if (!out) throw Error(Errc::IoError, "cannot open trace log " + options.out_path);

  TransitionTracker tracker;
  CounterSnapshot last_good;
  std::size_t segments = 0;
  bool logging = options.control_path.empty();  // no control file: start immediately
  const auto poll = std::chrono::milliseconds(options.poll_ms > 0 ? options.poll_ms : 20);

  while (!stop.load(std::memory_order_relaxed)) {
    const ControlState control = read_control(options.control_path);
    if (control == ControlState::Start) logging = true;
    if (control == ControlState::Stop && tracker.seeded()) break;

    if (logging) {
      try {
        const CounterSnapshot counters = parse_proc_stat(read_file(paths.proc_stat), steady_now_us());
        const std::int64_t khz =
            parse_int(trim(read_file(paths.cpufreq_file(0, "scaling_cur_freq"))), "scaling_cur_freq");
        last_good = counters;
        if (auto segment = tracker.observe(Frequency(khz), counters)) {
          append_trace_line(out, *segment);
          out.flush();
          ++segments;
        }
      } catch (const Error& e) {
        // Transient read failures are logged and retried; the tracker never dies on them.
        std::cerr << "powerlens track: " << e.what() << " (retrying)\n";
      }
    }
    std::this_thread::sleep_for(poll);
  }

  // Stop flushes the final partial segment up to the stop instant.
  try {
    const CounterSnapshot counters = parse_proc_stat(read_file(paths.proc_stat), steady_now_us());
    last_good = counters;
  } catch (const Error&) {
  }
  if (tracker.seeded() && !last_good.per_core.empty()) {
    if (auto segment = tracker.flush(last_good)) {
      append_trace_line(out, *segment);
      ++segments;
    }
  }
  return segments;
}

}  // namespace powerlens
