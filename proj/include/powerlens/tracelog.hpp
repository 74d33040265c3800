#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "powerlens/model.hpp"
#include "powerlens/types.hpp"

namespace powerlens {

struct CoreTimes {
  std::int64_t idle_ticks = 0;
  std::int64_t total_ticks = 0;
};

struct CounterSnapshot {
  std::vector<CoreTimes> per_core;
  std::int64_t wall_clock_us = 0;
};

/// Busy fraction of one core between two snapshots: (dTotal - dIdle) / dTotal.
/// Never throws and never returns NaN: negative deltas are treated as zero, a
/// zero total delta yields 0, and the result is clamped to [0, 1]. Each handled
/// anomaly bumps the matching diagnostics() counter.
double cpu_load(const CounterSnapshot& prev, const CounterSnapshot& cur, std::size_t core) noexcept;

/// One maximal constant-frequency interval of a running program.
struct TraceSegment {
  Frequency frequency;          // the frequency that just ended
  double duration_s = 0.0;      // > 0
  std::vector<double> per_core_load;

  double mean_load() const noexcept;
};

/// State machine behind the tracker: feed it (time, frequency, counters)
/// observations; it emits a segment whenever the frequency changes, measuring
/// loads over exactly the segment interval. The first observation only seeds
/// the state. flush() closes the final partial segment at stop time.
class TransitionTracker {
 public:
  std::optional<TraceSegment> observe(Frequency freq, const CounterSnapshot& counters);
  std::optional<TraceSegment> flush(const CounterSnapshot& counters);

  bool seeded() const noexcept { return seeded_; }

 private:
  TraceSegment make_segment(const CounterSnapshot& counters) const;

  bool seeded_ = false;
  std::int64_t last_freq_khz_ = 0;
  CounterSnapshot last_;
};

// Trace log lines are `freq_khz,duration_us,load0_bp,load1_bp,...` with loads
// in basis points (0-10000), one line per segment, append-only.
void append_trace_line(std::ostream& out, const TraceSegment& segment);
std::string trace_line(const TraceSegment& segment);
std::vector<TraceSegment> load_trace(std::istream& in);
std::vector<TraceSegment> load_trace_file(const std::string& path);

/// Replay fixture: CSV rows `t_us,freq_khz,idle0,total0,idle1,total1,...`, one
/// row per poll observation. Counter ticks and timestamps are integers.
struct ReplayObservation {
  std::int64_t t_us = 0;
  std::int64_t freq_khz = 0;
  std::vector<CoreTimes> per_core;
};

std::vector<ReplayObservation> load_replay_fixture(std::istream& in);
std::vector<ReplayObservation> load_replay_fixture_file(const std::string& path);

/// Runs the tracker over a fixture start-to-end; the fixture's last row is the
/// stop instant and flushes a final partial segment.
std::vector<TraceSegment> replay_trace(std::span<const ReplayObservation> observations);

// Duration-weighted prediction over traces.
double segment_power(const PowerModel& model, const TraceSegment& segment);
double trace_power(const PowerModel& model, std::span<const TraceSegment> segments);
double trace_energy(const PowerModel& model, std::span<const TraceSegment> segments);

}  // namespace powerlens
