#include <cmath>
#include <set>

#include "doctest.h"
#include "powerlens/campaign.hpp"
#include "powerlens/fit.hpp"
#include "powerlens/meter.hpp"
#include "powerlens/metrics.hpp"
#include "powerlens/synthetic.hpp"
#include "test_support.hpp"

using namespace powerlens;
using powerlens::testing::freqs_khz;

namespace {

SyntheticDevice make_device(int freq_count, double noise, std::uint64_t seed, double jitter = 0.01) {
  const auto table = default_frequency_table(freq_count);
  SyntheticDeviceConfig config;
  config.supported_frequencies = table;
  config.noise_stddev_w = noise;
  config.rng_seed = seed;
  config.util_jitter_stddev = jitter;
  return SyntheticDevice(make_default_truth(table), config);
}

}  // namespace

TEST_CASE("plan_campaign builds the full factor cross product in order") {
  const CampaignSchedule one = plan_campaign(freqs_khz({500000}));
  CHECK(one.cells().size() == 11);

  const CampaignSchedule board = plan_campaign(default_frequency_table(15));
  const auto cells = board.cells();
  CHECK(cells.size() == 165);
  // Outer loop frequency ascending, inner loop factor 0..=10.
  CHECK(cells[0].factor == 0);
  CHECK(cells[10].factor == 10);
  CHECK(cells[0].frequency == cells[10].frequency);
  CHECK(cells[11].frequency > cells[10].frequency);

  // Default constants: factor 5 runs 90 s busy, 90 s idle.
  CHECK(board.busy_seconds(5) == doctest::Approx(90.0));
  CHECK(board.idle_seconds(5) == doctest::Approx(90.0));

  CHECK_THROWS_AS(plan_campaign({}), Error);
  CHECK_THROWS_AS(plan_campaign(freqs_khz({500000}), 18.0, 100.0), Error);  // 10*18 > 100
}

TEST_CASE("factor 0 on a quiet synthetic device reads idle power") {
  // Truth model with 1.2 W idle everywhere, zero noise and jitter.
  const auto table = freqs_khz({500000, 1000000});
  SyntheticDeviceConfig config;
  config.supported_frequencies = table;
  config.noise_stddev_w = 0.0;
  config.util_jitter_stddev = 0.0;
  SyntheticDevice device(
      PowerModel::per_frequency(table, PerFrequencyPayload{{QuadCoeffs{1.0, 0.5, 1.2}, QuadCoeffs{1.5, 0.8, 1.2}}}),
      config);
  const CampaignSchedule schedule = plan_campaign(table);
  const MeasurementRecord record = run_cell(device, table[0], 0, schedule, Workload::single_thread());
  CHECK(record.utilization.value() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(record.power_w == doctest::Approx(1.2).epsilon(1e-9));
}

TEST_CASE("factor 10 at zero noise reproduces the truth prediction at the recorded utilization") {
  SyntheticDevice device = make_device(3, 0.0, 42);
  const CampaignSchedule schedule = plan_campaign(device.supported_frequencies());
  for (Frequency freq : device.supported_frequencies()) {
    const MeasurementRecord record = run_cell(device, freq, 10, schedule, Workload::multi_thread(4));
    const double expected = predict(device.truth_model(), freq, record.utilization);
    CHECK(std::abs(record.power_w - expected) < 1e-9);
  }
}

TEST_CASE("energy delta over duration is plain division") {
  SyntheticDevice device = make_device(1, 0.0, 1, 0.0);
  const double e0 = *device.read_energy_j();
  const double t0 = device.now_s();
  device.execute(90.0, 90.0, 4);
  const double delta = *device.read_energy_j() - e0;
  const double elapsed = device.now_s() - t0;
  CHECK(elapsed == doctest::Approx(180.0));
  CHECK(delta / elapsed == doctest::Approx(predict(device.truth_model(), device.supported_frequencies()[0],
                                                   Utilization(0.5)))
                               .epsilon(1e-9));
}

TEST_CASE("single-threaded workloads cap mean utilization near one quarter on four cores") {
  SyntheticDevice device = make_device(2, 0.0, 7);
  const CampaignSchedule schedule = plan_campaign(device.supported_frequencies());
  const MeasurementRecord record =
      run_cell(device, device.supported_frequencies()[0], 10, schedule, Workload::single_thread());
  CHECK(record.utilization.value() <= 0.25 + 0.02);
  CHECK(record.utilization.value() >= 0.25 - 0.02);
}

TEST_CASE("multi-threaded factor 10 saturates utilization") {
  SyntheticDevice device = make_device(2, 0.0, 7, 0.0);
  const CampaignSchedule schedule = plan_campaign(device.supported_frequencies());
  const MeasurementRecord record =
      run_cell(device, device.supported_frequencies()[1], 10, schedule, Workload::multi_thread(4));
  CHECK(record.utilization.value() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("run_campaign walks every cell once and tags records") {
  SyntheticDevice device = make_device(3, 0.0, 9);
  const CampaignSchedule schedule = plan_campaign(device.supported_frequencies());
  const CampaignResult result = run_campaign(device, schedule, Workload::multi_thread(4));
  CHECK(result.records.size() == 33);
  CHECK(result.outcomes.size() == 33);
  CHECK(result.manifest.cells.size() == 33);
  CHECK(result.records[0].source_tag == "mt4:d0");
  CHECK(result.records[10].source_tag == "mt4:d10");

  // Every (frequency, factor) pair appears exactly once.
  std::set<std::pair<std::int64_t, int>> seen;
  for (const CellResult& outcome : result.outcomes) {
    CHECK(seen.insert({outcome.cell.frequency.khz(), outcome.cell.factor}).second);
    CHECK(outcome.record.has_value());
  }

  // Cells are contiguous in time and 180 s long.
  for (const auto& cell : result.manifest.cells) CHECK(cell.t_end_s - cell.t_start_s == doctest::Approx(180.0));
}

TEST_CASE("unsupported frequency fails the cell but not the campaign") {
  SyntheticDevice device = make_device(2, 0.0, 3);
  auto table = device.supported_frequencies();
  table.push_back(Frequency(9'999'000));  // not supported by the device
  const CampaignSchedule schedule = plan_campaign(table);
  const CampaignResult result = run_campaign(device, schedule, Workload::multi_thread(2));
  CHECK(result.records.size() == 22);
  CHECK(result.outcomes.size() == 33);
  int skipped = 0;
  for (const CellResult& outcome : result.outcomes)
    if (!outcome.record) {
      ++skipped;
      CHECK(outcome.error.find("UnsupportedFrequency") != std::string::npos);
    }
  CHECK(skipped == 11);
  int manifest_skips = 0;
  for (const auto& cell : result.manifest.cells)
    if (!cell.ok) ++manifest_skips;
  CHECK(manifest_skips == 11);
}

TEST_CASE("records at a fixed frequency are monotone in the duty factor for a monotone truth") {
  SyntheticDevice device = make_device(2, 0.0, 11);
  const CampaignSchedule schedule = plan_campaign(device.supported_frequencies());
  const CampaignResult result = run_campaign(device, schedule, Workload::multi_thread(4));
  for (std::size_t base = 0; base < result.records.size(); base += 11) {
    for (std::size_t i = base + 1; i < base + 11; ++i)
      CHECK(result.records[i].power_w >= result.records[i - 1].power_w - 1e-12);
  }
}

TEST_CASE("simulate_measurement is deterministic per seed and exact at zero noise") {
  SyntheticDevice a = make_device(2, 0.05, 1234);
  SyntheticDevice b = make_device(2, 0.05, 1234);
  const auto [ea, ua] = a.simulate_measurement(0.5, 180.0, 4);
  const auto [eb, ub] = b.simulate_measurement(0.5, 180.0, 4);
  CHECK(ea == eb);  // byte-for-byte
  CHECK(ua == ub);

  SyntheticDevice zero = make_device(2, 0.0, 77, 0.0);
  const auto [energy, util] = zero.simulate_measurement(0.4, 180.0, 4);
  CHECK(util == doctest::Approx(0.4));
  const double truth = predict(zero.truth_model(), zero.supported_frequencies()[0], Utilization(util));
  CHECK(energy == doctest::Approx(truth * 180.0).epsilon(1e-9));
}

TEST_CASE("short-window averages spread wider than long-window averages by roughly sqrt(ratio)") {
  // One long constant-duty stretch of the simulated meter, default noise.
  SyntheticDevice device = make_device(1, 0.05, 5, 0.0);
  for (int i = 0; i < 10; ++i) device.simulate_measurement(0.5, 180.0, 4);
  const auto& log = device.meter_log();
  REQUIRE(log.size() > 1700);
  const WindowStats short_w = window_power_stats(log, 1.0, 1.0);
  const WindowStats long_w = window_power_stats(log, 180.0, 1.0);
  const double ratio = short_w.stddev / long_w.stddev;
  CHECK(ratio > 5.0);
  CHECK(ratio == doctest::Approx(std::sqrt(180.0)).epsilon(0.5));
}

TEST_CASE("full synthetic campaign then per-frequency fit recovers the truth on held-out points") {
  SyntheticDevice device = make_device(5, 0.0, 21);
  const CampaignSchedule schedule = plan_campaign(device.supported_frequencies());
  const CampaignResult campaign = run_campaign(device, schedule, Workload::multi_thread(4));
  const PowerModel model = fit_per_frequency(campaign.records);

  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> util(0.0, 1.0);
  std::vector<MeasurementRecord> holdout;
  for (int i = 0; i < 200; ++i) {
    const Frequency f = device.supported_frequencies()[rng() % 5];
    const Utilization u(util(rng));
    holdout.push_back(MeasurementRecord{f, u, predict(device.truth_model(), f, u), "holdout"});
  }
  const EvalMetrics metrics = evaluate_model(model, holdout);
  CHECK(metrics.r2 >= 0.99);
}

TEST_CASE("campaign manifest round-trips through JSON") {
  SyntheticDevice device = make_device(2, 0.01, 33);
  const CampaignSchedule schedule = plan_campaign(device.supported_frequencies());
  CampaignResult result = run_campaign(device, schedule, Workload::multi_thread(4));
  result.manifest.device = "synthetic";
  result.manifest.seed = 33;
  result.manifest.noise_stddev_w = 0.01;

  const std::string path = "/tmp/powerlens_test_manifest.json";
  save_manifest_file(result.manifest, path);
  const CampaignManifest back = load_manifest_file(path);
  CHECK(back.device == "synthetic");
  CHECK(back.seed == 33);
  CHECK(back.total_time_s == result.manifest.total_time_s);
  REQUIRE(back.cells.size() == result.manifest.cells.size());
  for (std::size_t i = 0; i < back.cells.size(); ++i) {
    CHECK(back.cells[i].freq_khz == result.manifest.cells[i].freq_khz);
    CHECK(back.cells[i].t_start_s == result.manifest.cells[i].t_start_s);  // exact doubles
    CHECK(back.cells[i].utilization == result.manifest.cells[i].utilization);
    CHECK(back.cells[i].per_core == result.manifest.cells[i].per_core);
  }
}

TEST_CASE("synthetic meter log joins back to the same records the campaign produced") {
  SyntheticDevice device = make_device(3, 0.0, 100, 0.0);
  const CampaignSchedule schedule = plan_campaign(device.supported_frequencies());
  CampaignResult result = run_campaign(device, schedule, Workload::multi_thread(4));

  const JoinResult joined = join_campaign(result.manifest, device.meter_log());
  CHECK(joined.uncovered_cells.empty());
  REQUIRE(joined.records.size() == result.records.size());
  for (std::size_t i = 0; i < joined.records.size(); ++i) {
    CHECK(joined.records[i].power_w == doctest::Approx(result.records[i].power_w).epsilon(1e-9));
    CHECK(joined.records[i].utilization.value() == result.records[i].utilization.value());
  }
}
