// powerlens: derive CPU power models from meter measurements and predict the
// power/energy of programs from frequency-utilization traces.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "powerlens/campaign.hpp"
#include "powerlens/dataset.hpp"
#include "powerlens/fit.hpp"
#include "powerlens/linux_device.hpp"
#include "powerlens/meter.hpp"
#include "powerlens/metrics.hpp"
#include "powerlens/model_io.hpp"
#include "powerlens/synthetic.hpp"
#include "powerlens/textio.hpp"
#include "powerlens/tracelog.hpp"

namespace {

using namespace powerlens;

constexpr int kExitParseError = 2;
constexpr int kExitFitError = 3;

struct GlobalOptions {
  bool verbose = false;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
};

std::atomic<bool> g_stop{false};

void handle_signal(int) { g_stop.store(true); }

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::ParseError:
    case Errc::UnsupportedVersion:
    case Errc::SchemaMismatch:
    case Errc::IoError:
      return kExitParseError;
    case Errc::InsufficientData:
    case Errc::InsufficientDataAtFrequency:
    case Errc::SingularSystem:
    case Errc::EmptyGroup:
    case Errc::EmptyDataset:
    case Errc::MissingPerCoreData:
    case Errc::NonFiniteLoss:
      return kExitFitError;
    default:
      return 1;
  }
}

// Every run records its resolved configuration for reproducibility.
void write_run_manifest(const GlobalOptions& global, const std::string& subcommand, const nlohmann::json& flags) {
  std::filesystem::create_directories(global.out_dir);
  nlohmann::json doc{{"tool", "powerlens"},
                     {"subcommand", subcommand},
                     {"seed", global.seed},
                     {"verbose", global.verbose},
                     {"flags", flags}};
  write_file(global.out_dir + "/powerlens-run-" + subcommand + ".json", doc.dump(2) + "\n");
}

void print_diagnostics() {
  const Diagnostics& d = diagnostics();
  std::cerr << "diagnostics: negative_prediction_clamps=" << d.negative_prediction_clamps.load()
            << " load_negative_delta=" << d.load_negative_delta_warnings.load()
            << " load_zero_delta=" << d.load_zero_delta_warnings.load()
            << " load_bounds=" << d.load_bounds_warnings.load() << "\n";
}

MeterSchema resolve_schema(const std::string& spec) {
  if (spec == "energy" || spec == "power" || spec == "vi") return builtin_meter_schema(spec);
  return load_meter_schema(spec);
}

std::vector<Frequency> resolve_freqs(const std::string& spec, int auto_count) {
  if (spec == "auto") return default_frequency_table(auto_count);
  std::vector<Frequency> freqs;
  for (std::string_view field : split(spec, ',')) freqs.push_back(Frequency(parse_int(field, "--freqs")));
  std::sort(freqs.begin(), freqs.end());
  return freqs;
}

void print_metrics(const std::string& label, const EvalMetrics& metrics) {
  std::cout << label << ": n=" << metrics.n << " mse=" << format_double(metrics.mse)
            << " mae=" << format_double(metrics.mae) << " r2=" << format_double(metrics.r2) << "\n";
}

// --------------------------------------------------------------------------
// calibrate

struct CalibrateArgs {
  std::string device = "synthetic";
  std::string freqs = "auto";
  int freq_count = 10;
  double total_time = 180.0;
  double runtime_factor = 18.0;
  int workers = 4;
  double noise = 0.05;
  std::string out = "dataset.csv";
  std::string manifest = "";
  std::string meter_log = "";
  std::string truth_model = "";
  bool allow_frequency_control = false;
};

int cmd_calibrate(const GlobalOptions& global, const CalibrateArgs& args) {
  const std::vector<Frequency> freqs = resolve_freqs(args.freqs, args.freq_count);
  const CampaignSchedule schedule = plan_campaign(freqs, args.runtime_factor, args.total_time);
  const Workload workload = args.workers == 1 ? Workload::single_thread() : Workload::multi_thread(args.workers);
  const std::string manifest_path = args.manifest.empty() ? args.out + ".manifest.json" : args.manifest;

  CampaignResult result = [&] {
    if (args.device == "synthetic") {
      SyntheticDeviceConfig config;
      config.supported_frequencies = freqs;
      config.noise_stddev_w = args.noise;
      config.rng_seed = global.seed;
      PowerModel truth =
          args.truth_model.empty() ? make_default_truth(freqs) : load_model_file(args.truth_model);
      SyntheticDevice device(std::move(truth), config);
      CampaignResult r = run_campaign(device, schedule, workload);
      if (!args.meter_log.empty()) save_meter_log_file(device.meter_log(), args.meter_log);
      r.manifest.device = "synthetic";
      r.manifest.seed = global.seed;
      r.manifest.noise_stddev_w = args.noise;
      return r;
    }
    if (args.device != "linux") throw Error(Errc::InvalidArgument, "unknown device '" + args.device + "'");
    LinuxDevice device(LinuxPaths{}, args.allow_frequency_control);
    CampaignResult r = run_campaign(device, schedule, workload);
    r.manifest.device = "linux";
    r.manifest.seed = global.seed;
    return r;
  }();

  save_manifest_file(result.manifest, manifest_path);
  std::cout << "campaign: " << result.records.size() << " measured cells, "
            << result.outcomes.size() - result.records.size() << " skipped\n";
  std::cout << "manifest: " << manifest_path << "\n";

  if (!result.records.empty()) {
    save_dataset_file(result.records, args.out);
    std::cout << "dataset: " << args.out << "\n";
  } else {
    std::cout << "dataset: no inline energy source; run `powerlens ingest` against the meter log\n";
  }

  write_run_manifest(global, "calibrate",
                     {{"device", args.device},
                      {"freq_count", freqs.size()},
                      {"total_time", args.total_time},
                      {"runtime_factor", args.runtime_factor},
                      {"workers", args.workers},
                      {"noise", args.noise},
                      {"out", args.out},
                      {"manifest", manifest_path}});
  return 0;
}

// --------------------------------------------------------------------------
// ingest / meterstats

int cmd_ingest(const GlobalOptions& global, const std::string& schema_spec, const std::string& log_path,
               const std::string& manifest_path, const std::string& out_path) {
  const MeterSchema schema = resolve_schema(schema_spec);
  const MeterParseResult parsed = parse_meter_log_file(log_path, schema);
  for (const std::string& reject : parsed.rejected_rows) std::cerr << "rejected " << reject << "\n";

  const CampaignManifest manifest = load_manifest_file(manifest_path);
  const JoinResult joined = join_campaign(manifest, parsed.samples);
  for (const std::string& cell : joined.uncovered_cells) std::cerr << "uncovered " << cell << "\n";
  if (joined.records.empty()) throw Error(Errc::EmptyDataset, "no campaign cells were covered by the meter log");

  save_dataset_file(joined.records, out_path);
  std::cout << "joined " << joined.records.size() << " cells (" << joined.uncovered_cells.size()
            << " uncovered) -> " << out_path << "\n";
  write_run_manifest(global, "ingest",
                     {{"schema", schema_spec}, {"log", log_path}, {"manifest", manifest_path}, {"out", out_path}});
  return 0;
}

int cmd_meterstats(const GlobalOptions& global, const std::string& schema_spec, const std::string& log_path,
                   double window_s, double stride_s, const std::string& out_path) {
  const MeterSchema schema = resolve_schema(schema_spec);
  const MeterParseResult parsed = parse_meter_log_file(log_path, schema);
  for (const std::string& reject : parsed.rejected_rows) std::cerr << "rejected " << reject << "\n";

  const std::vector<WindowPower> series = window_power_series(parsed.samples, window_s, stride_s);
  const WindowStats stats = window_power_stats(parsed.samples, window_s, stride_s);

  std::ostream* out = &std::cout;
  std::ofstream file;
  if (!out_path.empty() && out_path != "-") {
    file.open(out_path, std::ios::binary);
    if (!file) throw Error(Errc::IoError, "cannot write " + out_path);
    out = &file;
  }
  *out << "t_start,t_end,mean_power_w\n";
  for (const WindowPower& w : series)
    *out << format_double(w.t_start) << ',' << format_double(w.t_end) << ',' << format_double(w.power_w) << '\n';
  std::cerr << "windows=" << stats.n << " mean=" << format_double(stats.mean)
            << " stddev=" << format_double(stats.stddev) << "\n";
  write_run_manifest(global, "meterstats",
                     {{"schema", schema_spec}, {"log", log_path}, {"window", window_s}, {"stride", stride_s}});
  return 0;
}

// --------------------------------------------------------------------------
// fit / eval

struct FitArgs {
  std::string data;
  std::string kind = "per-frequency";
  std::string out = "model.pm";
  std::string config_path;
  int split_index = 3;
};

FitConfig load_fit_config(const std::string& path, std::uint64_t seed) {
  FitConfig config;
  config.mlp_seed = seed;
  if (path.empty()) return config;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, path + ": " + e.what());
  }
  for (const auto& [key, value] : doc.items()) {
    if (key == "ridge_lambda") config.ridge_lambda = value.get<double>();
    else if (key == "tree_max_depth") config.tree_max_depth = value.get<int>();
    else if (key == "tree_min_leaf") config.tree_min_leaf = value.get<int>();
    else if (key == "tree_global") config.tree_global = value.get<bool>();
    else if (key == "mlp_epochs") config.mlp_epochs = value.get<int>();
    else if (key == "mlp_learning_rate") config.mlp_learning_rate = value.get<double>();
    else if (key == "mlp_seed") config.mlp_seed = value.get<std::uint64_t>();
    else throw Error(Errc::ParseError, path + ": unknown fit config key '" + key + "'");
  }
  return config;
}

PowerModel fit_by_kind(const std::string& kind, std::span<const MeasurementRecord> dataset,
                       const FitConfig& config, int split_index) {
  if (kind == "simple") return fit_simple(dataset, config);
  if (kind == "multi-term") return fit_multi_term(dataset, config);
  if (kind == "multi-frequency") return fit_multi_frequency(dataset, split_index, config);
  if (kind == "per-frequency") return fit_per_frequency(dataset, config);
  if (kind == "tree") return fit_tree(dataset, config);
  if (kind == "mlp") return fit_mlp(dataset, config);
  throw Error(Errc::InvalidArgument, "unknown model kind '" + kind + "'");
}

int cmd_fit(const GlobalOptions& global, const FitArgs& args) {
  const std::vector<MeasurementRecord> dataset = load_dataset_file(args.data);
  const FitConfig config = load_fit_config(args.config_path, global.seed);
  const PowerModel model = fit_by_kind(args.kind, dataset, config, args.split_index);
  save_model_file(model, args.out);
  print_metrics("training", evaluate_model(model, dataset));
  std::cout << "model: " << args.out << "\n";
  write_run_manifest(global, "fit",
                     {{"data", args.data}, {"kind", args.kind}, {"out", args.out},
                      {"config", args.config_path}, {"split_index", args.split_index}});
  if (global.verbose) print_diagnostics();
  return 0;
}

int cmd_eval(const GlobalOptions& global, const std::string& model_path, const std::string& data_path,
             bool per_tag) {
  const PowerModel model = load_model_file(model_path);
  const std::vector<MeasurementRecord> dataset = load_dataset_file(data_path);
  print_metrics("aggregate", evaluate_model(model, dataset));

  if (per_tag) {
    std::map<std::string, std::vector<MeasurementRecord>> groups;
    for (const MeasurementRecord& r : dataset) groups[r.source_tag].push_back(r);
    for (const auto& [tag, records] : groups) {
      std::vector<double> predicted, actual;
      for (const MeasurementRecord& r : records) {
        predicted.push_back(predict(model, r.frequency, r.utilization));
        actual.push_back(r.power_w);
      }
      std::cout << "tag " << (tag.empty() ? "(none)" : tag) << ": n=" << records.size()
                << " mse=" << format_double(mse(predicted, actual))
                << " mae=" << format_double(mae(predicted, actual));
      // Per-tag groups are often constant in power; r2 only when defined.
      try {
        std::cout << " r2=" << format_double(r2_score(predicted, actual));
      } catch (const Error&) {
        std::cout << " r2=nan";
      }
      std::cout << "\n";
    }
  }
  write_run_manifest(global, "eval", {{"model", model_path}, {"data", data_path}, {"per_tag", per_tag}});
  if (global.verbose) print_diagnostics();
  return 0;
}

// --------------------------------------------------------------------------
// track / predict / report

int cmd_track(const GlobalOptions& global, const std::string& backend, const std::string& fixture,
              int poll_ms, const std::string& out_path, const std::string& control_path) {
  if (backend == "replay") {
    if (fixture.empty()) throw Error(Errc::InvalidArgument, "--fixture is required for the replay backend");
    const auto observations = load_replay_fixture_file(fixture);
    const auto segments = replay_trace(observations);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + out_path);
    for (const TraceSegment& segment : segments) append_trace_line(out, segment);
    std::cout << "replayed " << segments.size() << " segments -> " << out_path << "\n";
  } else if (backend == "linux") {
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    TrackOptions options;
    options.poll_ms = poll_ms;
    options.out_path = out_path;
    options.control_path = control_path;
    const std::size_t segments = track_live(LinuxPaths{}, options, g_stop);
    std::cout << "tracked " << segments << " segments -> " << out_path << "\n";
  } else {
    throw Error(Errc::InvalidArgument, "unknown backend '" + backend + "'");
  }
  write_run_manifest(global, "track",
                     {{"backend", backend}, {"fixture", fixture}, {"poll_ms", poll_ms}, {"out", out_path}});
  return 0;
}

void write_segment_report(const PowerModel& model, std::span<const TraceSegment> segments, std::ostream& out) {
  out << "t_start,freq_khz,duration_s,util,power_w,energy_j\n";
  double t = 0.0;
  for (const TraceSegment& segment : segments) {
    const double power = segment_power(model, segment);
    out << format_double(t) << ',' << segment.frequency.khz() << ',' << format_double(segment.duration_s) << ','
        << format_double(segment.mean_load()) << ',' << format_double(power) << ','
        << format_double(power * segment.duration_s) << '\n';
    t += segment.duration_s;
  }
}

int cmd_predict(const GlobalOptions& global, const std::string& model_path, const std::string& trace_path,
                bool energy, const std::string& segments_path) {
  const PowerModel model = load_model_file(model_path);
  const std::vector<TraceSegment> segments = load_trace_file(trace_path);
  const double power = trace_power(model, segments);
  std::cout << "power_w " << format_double(power) << "\n";
  if (energy) std::cout << "energy_j " << format_double(trace_energy(model, segments)) << "\n";
  if (!segments_path.empty()) {
    if (segments_path == "-") {
      write_segment_report(model, segments, std::cout);
    } else {
      std::ofstream out(segments_path, std::ios::binary);
      if (!out) throw Error(Errc::IoError, "cannot write " + segments_path);
      write_segment_report(model, segments, out);
    }
  }
  write_run_manifest(global, "predict",
                     {{"model", model_path}, {"trace", trace_path}, {"energy", energy}});
  if (global.verbose) print_diagnostics();
  return 0;
}

int cmd_report(const GlobalOptions& global, const std::string& model_path, const std::string& trace_path,
               const std::string& out_path) {
  const PowerModel model = load_model_file(model_path);
  const std::vector<TraceSegment> segments = load_trace_file(trace_path);
  {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write " + out_path);
    write_segment_report(model, segments, out);
  }
  double total = 0.0;
  for (const TraceSegment& segment : segments) total += segment.duration_s;
  std::cout << "segments " << segments.size() << "\n";
  std::cout << "duration_s " << format_double(total) << "\n";
  std::cout << "power_w " << format_double(trace_power(model, segments)) << "\n";
  std::cout << "energy_j " << format_double(trace_energy(model, segments)) << "\n";
  std::cout << "report: " << out_path << "\n";
  write_run_manifest(global, "report", {{"model", model_path}, {"trace", trace_path}, {"out", out_path}});
  return 0;
}

// --------------------------------------------------------------------------
// simulate: synthetic campaign + trace generation for CI

struct SimulateArgs {
  int freq_count = 10;
  double noise = 0.05;
  int workers = 4;
  double total_time = 180.0;
  double runtime_factor = 18.0;
  int holdout = 200;
  int trace_segments = 24;
};

int cmd_simulate(const GlobalOptions& global, const SimulateArgs& args) {
  std::filesystem::create_directories(global.out_dir);
  const auto path = [&](const char* leaf) { return global.out_dir + "/" + leaf; };

  const std::vector<Frequency> freqs = default_frequency_table(args.freq_count);
  PowerModel truth = make_default_truth(freqs);
  save_model_file(truth, path("truth_model.pm"));

  SyntheticDeviceConfig config;
  config.supported_frequencies = freqs;
  config.noise_stddev_w = args.noise;
  config.rng_seed = global.seed;
  SyntheticDevice device(truth, config);

  const CampaignSchedule schedule = plan_campaign(freqs, args.runtime_factor, args.total_time);
  const Workload workload = args.workers == 1 ? Workload::single_thread() : Workload::multi_thread(args.workers);
  CampaignResult campaign = run_campaign(device, schedule, workload);
  campaign.manifest.device = "synthetic";
  campaign.manifest.seed = global.seed;
  campaign.manifest.noise_stddev_w = args.noise;

  save_dataset_file(campaign.records, path("dataset.csv"));
  save_manifest_file(campaign.manifest, path("manifest.json"));
  save_meter_log_file(device.meter_log(), path("meter.csv"));

  // Held-out evaluation points straight from the truth model.
  std::mt19937_64 rng(global.seed + 1);
  std::uniform_real_distribution<double> util(0.0, 1.0);
  std::vector<MeasurementRecord> holdout;
  for (int i = 0; i < args.holdout; ++i) {
    const Frequency f = freqs[rng() % freqs.size()];
    const Utilization u(util(rng));
    holdout.push_back(MeasurementRecord{f, u, predict(truth, f, u), "holdout"});
  }
  save_dataset_file(holdout, path("holdout.csv"));

  // A DVFS-looking trace fixture: counters tick at 100 Hz like procfs.
  std::uniform_real_distribution<double> seg_dur(0.1, 2.0);
  std::ofstream fixture(path("trace_fixture.csv"), std::ios::binary);
  fixture << "# t_us,freq_khz,idle0,total0,idle1,total1,idle2,total2,idle3,total3\n";
  std::int64_t t_us = 0;
  std::vector<std::int64_t> idle(4, 0), total(4, 0);
  std::int64_t freq = freqs[rng() % freqs.size()].khz();
  auto emit = [&] {
    fixture << t_us << ',' << freq;
    for (int core = 0; core < 4; ++core) fixture << ',' << idle[core] << ',' << total[core];
    fixture << '\n';
  };
  emit();
  for (int i = 0; i < args.trace_segments; ++i) {
    const std::int64_t dur_us = static_cast<std::int64_t>(seg_dur(rng) * 1e6);
    const std::int64_t ticks = dur_us / 10000;  // 100 Hz
    for (int core = 0; core < 4; ++core) {
      const std::int64_t busy = static_cast<std::int64_t>(static_cast<double>(ticks) * util(rng));
      idle[core] += ticks - busy;
      total[core] += ticks;
    }
    t_us += dur_us;
    std::int64_t next = freqs[rng() % freqs.size()].khz();
    if (i + 1 < args.trace_segments && next == freq) next = freqs[(rng() + 1) % freqs.size()].khz();
    freq = next;
    emit();
  }
  fixture.close();

  const auto segments = replay_trace(load_replay_fixture_file(path("trace_fixture.csv")));
  std::ofstream trace(path("trace.log"), std::ios::binary);
  for (const TraceSegment& segment : segments) append_trace_line(trace, segment);
  trace.close();

  std::cout << "simulate: wrote truth_model.pm dataset.csv manifest.json meter.csv holdout.csv "
               "trace_fixture.csv trace.log in "
            << global.out_dir << "\n";
  write_run_manifest(global, "simulate",
                     {{"freq_count", args.freq_count}, {"noise", args.noise}, {"workers", args.workers},
                      {"holdout", args.holdout}, {"trace_segments", args.trace_segments}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"software-based CPU power models from consumer-grade meter measurements"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_flag("--verbose", global.verbose, "print diagnostics counters");
  app.add_option("--seed", global.seed, "rng seed for anything randomized");
  app.add_option("--out-dir", global.out_dir, "directory for run manifests and simulate outputs");

  CalibrateArgs cal;
  CLI::App* calibrate = app.add_subcommand("calibrate", "run the regulated measurement campaign");
  calibrate->add_option("--device", cal.device, "synthetic|linux")->check(CLI::IsMember({"synthetic", "linux"}));
  calibrate->add_option("--freqs", cal.freqs, "comma-separated kHz list or 'auto'");
  calibrate->add_option("--freq-count", cal.freq_count, "table size when --freqs auto");
  calibrate->add_option("--total-time", cal.total_time, "seconds per cell");
  calibrate->add_option("--runtime-factor", cal.runtime_factor, "busy seconds per duty factor step");
  calibrate->add_option("--workers", cal.workers, "CPU-bound worker threads");
  calibrate->add_option("--noise", cal.noise, "synthetic meter noise stddev (W per sample)");
  calibrate->add_option("--out", cal.out, "training dataset CSV");
  calibrate->add_option("--manifest", cal.manifest, "campaign manifest path (default <out>.manifest.json)");
  calibrate->add_option("--meter-log", cal.meter_log, "also dump the synthetic meter log CSV");
  calibrate->add_option("--truth-model", cal.truth_model, "synthetic ground-truth model file");
  calibrate->add_flag("--allow-frequency-control", cal.allow_frequency_control,
                      "opt in to writing the userspace governor (linux device)");

  std::string ingest_schema = "energy", ingest_log, ingest_manifest, ingest_out = "dataset.csv";
  CLI::App* ingest = app.add_subcommand("ingest", "join a meter log against a campaign manifest");
  ingest->add_option("--schema", ingest_schema, "built-in schema name or JSON descriptor path");
  ingest->add_option("--log", ingest_log, "meter export CSV")->required();
  ingest->add_option("--manifest", ingest_manifest, "campaign manifest JSON")->required();
  ingest->add_option("--out", ingest_out, "training dataset CSV");

  std::string ms_schema = "energy", ms_log, ms_out;
  double ms_window = 1.0, ms_stride = 1.0;
  CLI::App* meterstats = app.add_subcommand("meterstats", "sliding-window power statistics of a meter log");
  meterstats->add_option("--schema", ms_schema, "built-in schema name or JSON descriptor path");
  meterstats->add_option("--log", ms_log, "meter export CSV")->required();
  meterstats->add_option("--window", ms_window, "window seconds")->required();
  meterstats->add_option("--stride", ms_stride, "stride seconds");
  meterstats->add_option("--out", ms_out, "per-window CSV (default stdout)");

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "fit a power model from a training dataset");
  fit->add_option("--data", fit_args.data, "training dataset CSV")->required();
  fit->add_option("--kind", fit_args.kind, "simple|multi-term|multi-frequency|per-frequency|tree|mlp")
      ->check(CLI::IsMember({"simple", "multi-term", "multi-frequency", "per-frequency", "tree", "mlp"}));
  fit->add_option("--out", fit_args.out, "model file");
  fit->add_option("--config", fit_args.config_path, "fit config JSON");
  fit->add_option("--split-index", fit_args.split_index, "multi-frequency split level");

  std::string eval_model, eval_data;
  bool eval_per_tag = false;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a model file on a dataset");
  eval->add_option("--model", eval_model, "model file")->required();
  eval->add_option("--data", eval_data, "dataset CSV")->required();
  eval->add_flag("--per-tag", eval_per_tag, "also report metrics per source tag");

  std::string track_backend = "linux", track_fixture, track_out = "trace.log", track_control;
  int track_poll_ms = 20;
  CLI::App* track = app.add_subcommand("track", "log (frequency, duration, loads) trace segments");
  track->add_option("--backend", track_backend, "linux|replay")->check(CLI::IsMember({"linux", "replay"}));
  track->add_option("--fixture", track_fixture, "replay fixture CSV");
  track->add_option("--poll-ms", track_poll_ms, "polling period");
  track->add_option("--out", track_out, "trace log path");
  track->add_option("--control", track_control, "control file: '1' starts logging, '0' stops");

  std::string predict_model, predict_trace, predict_segments;
  bool predict_energy = false;
  CLI::App* predict_cmd = app.add_subcommand("predict", "predict trace power via the duration-weighted mean");
  predict_cmd->add_option("--model", predict_model, "model file")->required();
  predict_cmd->add_option("--trace", predict_trace, "trace log")->required();
  predict_cmd->add_flag("--energy", predict_energy, "also print total energy");
  predict_cmd->add_option("--segments", predict_segments, "write the per-segment breakdown CSV ('-' for stdout)");

  std::string report_model, report_trace, report_out = "report.csv";
  CLI::App* report = app.add_subcommand("report", "per-segment power/energy CSV plus totals");
  report->add_option("--model", report_model, "model file")->required();
  report->add_option("--trace", report_trace, "trace log")->required();
  report->add_option("--out", report_out, "report CSV");

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "synthetic device end-to-end: campaign + trace fixtures");
  simulate->add_option("--freq-count", sim.freq_count, "supported frequency levels");
  simulate->add_option("--noise", sim.noise, "meter noise stddev (W per sample)");
  simulate->add_option("--workers", sim.workers, "workload worker threads");
  simulate->add_option("--total-time", sim.total_time, "seconds per campaign cell");
  simulate->add_option("--runtime-factor", sim.runtime_factor, "busy seconds per duty factor step");
  simulate->add_option("--holdout", sim.holdout, "held-out evaluation points");
  simulate->add_option("--trace-segments", sim.trace_segments, "segments in the generated trace fixture");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*calibrate) return cmd_calibrate(global, cal);
    if (*ingest) return cmd_ingest(global, ingest_schema, ingest_log, ingest_manifest, ingest_out);
    if (*meterstats) return cmd_meterstats(global, ms_schema, ms_log, ms_window, ms_stride, ms_out);
    if (*fit) return cmd_fit(global, fit_args);
    if (*eval) return cmd_eval(global, eval_model, eval_data, eval_per_tag);
    if (*track) return cmd_track(global, track_backend, track_fixture, track_poll_ms, track_out, track_control);
    if (*predict_cmd) return cmd_predict(global, predict_model, predict_trace, predict_energy, predict_segments);
    if (*report) return cmd_report(global, report_model, report_trace, report_out);
    if (*simulate) return cmd_simulate(global, sim);
  } catch (const Error& e) {
    std::cerr << "powerlens: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "powerlens: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
