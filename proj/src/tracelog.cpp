#include "powerlens/tracelog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "powerlens/error.hpp"
#include "powerlens/textio.hpp"

namespace powerlens {

double cpu_load(const CounterSnapshot& prev, const CounterSnapshot& cur, std::size_t core) noexcept {
  if (core >= prev.per_core.size() || core >= cur.per_core.size()) return 0.0;
  std::int64_t d_total = cur.per_core[core].total_ticks - prev.per_core[core].total_ticks;
  std::int64_t d_idle = cur.per_core[core].idle_ticks - prev.per_core[core].idle_ticks;

  if (d_total < 0) {
    diagnostics().load_negative_delta_warnings.fetch_add(1, std::memory_order_relaxed);
    d_total = 0;
  }
  if (d_total == 0) {
    diagnostics().load_zero_delta_warnings.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  if (d_idle < 0) {
    diagnostics().load_negative_delta_warnings.fetch_add(1, std::memory_order_relaxed);
    d_idle = 0;
  }
  double load = static_cast<double>(d_total - d_idle) / static_cast<double>(d_total);
  if (load < 0.0) {
    diagnostics().load_bounds_warnings.fetch_add(1, std::memory_order_relaxed);
    load = 0.0;
  } else if (load > 1.0) {
    diagnostics().load_bounds_warnings.fetch_add(1, std::memory_order_relaxed);
    load = 1.0;
  }
  return load;
}

double TraceSegment::mean_load() const noexcept {
  if (per_core_load.empty()) return 0.0;
  return std::accumulate(per_core_load.begin(), per_core_load.end(), 0.0) /
         static_cast<double>(per_core_load.size());
}

TraceSegment TransitionTracker::make_segment(const CounterSnapshot& counters) const {
  TraceSegment segment{Frequency(last_freq_khz_),
                       static_cast<double>(counters.wall_clock_us - last_.wall_clock_us) / 1e6,
                       {}};
  const std::size_t cores = std::min(last_.per_core.size(), counters.per_core.size());
  segment.per_core_load.reserve(cores);
  for (std::size_t core = 0; core < cores; ++core)
    segment.per_core_load.push_back(cpu_load(last_, counters, core));
  return segment;
}

std::optional<TraceSegment> TransitionTracker::observe(Frequency freq, const CounterSnapshot& counters) {
  if (!seeded_) {
    seeded_ = true;
    last_freq_khz_ = freq.khz();
    last_ = counters;
    return std::nullopt;
  }
  if (freq.khz() == last_freq_khz_) return std::nullopt;
  std::optional<TraceSegment> segment;
  if (counters.wall_clock_us > last_.wall_clock_us) segment = make_segment(counters);
  last_freq_khz_ = freq.khz();
  last_ = counters;
  return segment;
}

std::optional<TraceSegment> TransitionTracker::flush(const CounterSnapshot& counters) {
  if (!seeded_ || counters.wall_clock_us <= last_.wall_clock_us) return std::nullopt;
  TraceSegment segment = make_segment(counters);
  last_ = counters;
  return segment;
}

std::string trace_line(const TraceSegment& segment) {
  std::ostringstream out;
  out << segment.frequency.khz() << ','
      << static_cast<std::int64_t>(std::llround(segment.duration_s * 1e6));
  for (double load : segment.per_core_load) {
    const long bp = std::lround(std::clamp(load, 0.0, 1.0) * 10000.0);
    out << ',' << bp;
  }
  return out.str();
}

void append_trace_line(std::ostream& out, const TraceSegment& segment) { out << trace_line(segment) << '\n'; }

std::vector<TraceSegment> load_trace(std::istream& in) {
  std::vector<TraceSegment> segments;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string context = "trace line " + std::to_string(line_no);
    const std::vector<std::string_view> fields = split(trim(line), ',');
    if (fields.size() < 2) throw Error(Errc::ParseError, context + ": expected freq_khz,duration_us,...");
    const std::int64_t duration_us = parse_int(fields[1], context);
    if (duration_us <= 0) throw Error(Errc::ParseError, context + ": duration must be positive");
    TraceSegment segment{Frequency(parse_int(fields[0], context)), static_cast<double>(duration_us) / 1e6, {}};
    for (std::size_t i = 2; i < fields.size(); ++i) {
      const std::int64_t bp = parse_int(fields[i], context);
      if (bp < 0 || bp > 10000)
        throw Error(Errc::ParseError, context + ": load basis points outside [0, 10000]");
      segment.per_core_load.push_back(static_cast<double>(bp) / 10000.0);
    }
    segments.push_back(std::move(segment));
  }
  return segments;
}

std::vector<TraceSegment> load_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  return load_trace(in);
}

std::vector<ReplayObservation> load_replay_fixture(std::istream& in) {
  std::vector<ReplayObservation> observations;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const std::string context = "fixture line " + std::to_string(line_no);
    const std::vector<std::string_view> fields = split(view, ',');
    if (fields.size() < 4 || fields.size() % 2 != 0)
      throw Error(Errc::ParseError, context + ": expected t_us,freq_khz,idle0,total0,...");
    ReplayObservation obs;
    obs.t_us = parse_int(fields[0], context);
    obs.freq_khz = parse_int(fields[1], context);
    for (std::size_t i = 2; i + 1 < fields.size(); i += 2)
      obs.per_core.push_back(CoreTimes{parse_int(fields[i], context), parse_int(fields[i + 1], context)});
    if (!observations.empty() && obs.t_us < observations.back().t_us)
      throw Error(Errc::ParseError, context + ": timestamps must be nondecreasing");
    observations.push_back(std::move(obs));
  }
  return observations;
}

std::vector<ReplayObservation> load_replay_fixture_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  return load_replay_fixture(in);
}

std::vector<TraceSegment> replay_trace(std::span<const ReplayObservation> observations) {
  std::vector<TraceSegment> segments;
  TransitionTracker tracker;
  CounterSnapshot snapshot;
  for (const ReplayObservation& obs : observations) {
    snapshot.per_core = obs.per_core;
    snapshot.wall_clock_us = obs.t_us;
    if (auto segment = tracker.observe(Frequency(obs.freq_khz), snapshot)) segments.push_back(std::move(*segment));
  }
  // The last observation doubles as the stop instant.
  if (!observations.empty()) {
    snapshot.per_core = observations.back().per_core;
    snapshot.wall_clock_us = observations.back().t_us;
    if (auto segment = tracker.flush(snapshot)) segments.push_back(std::move(*segment));
  }
  return segments;
}

double segment_power(const PowerModel& model, const TraceSegment& segment) {
  if (model.fitted() && model.kind() == ModelKind::Mlp)
    return predict(model, segment.frequency, Utilization(segment.per_core_load));
  return predict(model, segment.frequency, Utilization(segment.mean_load()));
}

double trace_power(const PowerModel& model, std::span<const TraceSegment> segments) {
  if (segments.empty()) throw Error(Errc::EmptyTrace, "no segments to predict over");
  double weighted = 0.0;
  double total = 0.0;
  for (const TraceSegment& segment : segments) {
    if (!(segment.duration_s > 0.0)) throw Error(Errc::InvalidArgument, "segment with nonpositive duration");
    weighted += segment_power(model, segment) * segment.duration_s;
    total += segment.duration_s;
  }
  return weighted / total;
}

double trace_energy(const PowerModel& model, std::span<const TraceSegment> segments) {
  if (segments.empty()) throw Error(Errc::EmptyTrace, "no segments to predict over");
  double energy = 0.0;
  for (const TraceSegment& segment : segments) {
    if (!(segment.duration_s > 0.0)) throw Error(Errc::InvalidArgument, "segment with nonpositive duration");
    energy += segment_power(model, segment) * segment.duration_s;
  }
  return energy;
}

}  // namespace powerlens
