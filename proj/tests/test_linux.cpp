#include <fstream>

#include "doctest.h"
#include "powerlens/linux_device.hpp"

using namespace powerlens;

TEST_CASE("parse_proc_stat extracts per-core idle and total ticks") {
  const char* text =
      "cpu  1000 10 200 5000 300 0 50 0 0 0\n"
      "cpu0 250 5 50 1250 75 0 10 0 0 0\n"
      "cpu1 250 5 50 1250 75 0 15 0 0 0\n"
      "cpu2 250 0 50 1250 75 0 10 0 0 0\n"
      "cpu3 250 0 50 1250 75 0 15 0 0 0\n"
      "intr 12345\n"
      "ctxt 6789\n";
  const CounterSnapshot snapshot = parse_proc_stat(text, 42);
  CHECK(snapshot.wall_clock_us == 42);
  REQUIRE(snapshot.per_core.size() == 4);
  // idle = idle + iowait; total = sum of the eight time fields.
  CHECK(snapshot.per_core[0].idle_ticks == 1250 + 75);
  CHECK(snapshot.per_core[0].total_ticks == 250 + 5 + 50 + 1250 + 75 + 0 + 10 + 0);
  CHECK(snapshot.per_core[1].total_ticks == 250 + 5 + 50 + 1250 + 75 + 0 + 15 + 0);
}

TEST_CASE("parse_proc_stat rejects garbage") {
  CHECK_THROWS_AS(parse_proc_stat("intr 5\n", 0), Error);
  CHECK_THROWS_AS(parse_proc_stat("cpu0 1 2 3\n", 0), Error);
}

TEST_CASE("parse_proc_stat reads the live system when available") {
  std::ifstream in("/proc/stat");
  if (!in) return;  // not a procfs system
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const CounterSnapshot snapshot = parse_proc_stat(text, 0);
  CHECK(snapshot.per_core.size() >= 1);
  for (const CoreTimes& core : snapshot.per_core) {
    CHECK(core.idle_ticks >= 0);
    CHECK(core.idle_ticks <= core.total_ticks);
  }
}

TEST_CASE("parse_frequency_list sorts and deduplicates") {
  const auto freqs = parse_frequency_list(" 1479000 102000  710000 102000 \n");
  REQUIRE(freqs.size() == 3);
  CHECK(freqs[0] == Frequency(102000));
  CHECK(freqs[2] == Frequency(1479000));
  CHECK_THROWS_AS(parse_frequency_list("not-a-number"), Error);
}

TEST_CASE("linux device refuses frequency control without the opt-in") {
  LinuxPaths paths;
  std::ifstream probe(paths.proc_stat);
  if (!probe) return;
  LinuxDevice device(paths, /*allow_frequency_control=*/false);
  CHECK(device.core_count() >= 1);
  CHECK_FALSE(device.read_energy_j().has_value());  // energy comes from the meter log offline
  try {
    device.set_frequency(Frequency(1000000));
    FAIL("expected GovernorPermissionDenied");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::GovernorPermissionDenied);
  }
}
