#include <sstream>

#include "doctest.h"
#include "powerlens/dataset.hpp"
#include "test_support.hpp"

using namespace powerlens;

TEST_CASE("dataset round-trips through the CSV format") {
  std::vector<MeasurementRecord> records{
      {Frequency(102000), Utilization(0.25), 1.2345, "st:d2"},
      {Frequency(1479000), Utilization(std::vector<double>{1.0, 1.0, 0.5, 0.5}), 4.5, "mt4:d10"},
  };
  // Mixed per-core presence: falls back to the mean-only layout.
  std::stringstream mixed;
  save_dataset(records, mixed);
  CHECK(mixed.str().starts_with("freq_khz,util_pct,power_w,tag\n"));

  std::vector<MeasurementRecord> cores{
      {Frequency(102000), Utilization(std::vector<double>{0.1, 0.2, 0.3, 0.4}), 1.5, "a"},
      {Frequency(500000), Utilization(std::vector<double>{1.0, 0.0, 1.0, 0.0}), 2.5, "b"},
  };
  std::stringstream buffer;
  save_dataset(cores, buffer);
  CHECK(buffer.str().starts_with("freq_khz,util_pct,power_w,u0_pct,u1_pct,u2_pct,u3_pct,tag\n"));
  const auto parsed = load_dataset(buffer);
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].frequency == Frequency(102000));
  CHECK(parsed[0].utilization.value() == doctest::Approx(0.25));
  REQUIRE(parsed[0].utilization.per_core());
  CHECK((*parsed[0].utilization.per_core())[3] == doctest::Approx(0.4));
  CHECK(parsed[1].power_w == 2.5);
  CHECK(parsed[1].source_tag == "b");
}

TEST_CASE("percent columns are normalized and validated") {
  std::stringstream in("freq_khz,util_pct,power_w\n500000,50,2.0\n");
  const auto records = load_dataset(in);
  REQUIRE(records.size() == 1);
  CHECK(records[0].utilization.value() == doctest::Approx(0.5));
}

TEST_CASE("out-of-range rows are rejected with line numbers") {
  {
    std::stringstream in("freq_khz,util_pct,power_w\n500000,50,2.0\n500000,120,2.0\n");
    CHECK_THROWS_WITH_AS(load_dataset(in), doctest::Contains("line 3"), Error);
  }
  {
    std::stringstream in("freq_khz,util_pct,power_w\n500000,50,0.0\n");
    CHECK_THROWS_WITH_AS(load_dataset(in), doctest::Contains("power"), Error);
  }
  {
    std::stringstream in("freq_khz,util_pct,power_w\n-5,50,2.0\n");
    CHECK_THROWS_AS(load_dataset(in), Error);
  }
  {
    std::stringstream in("frequency,util,watts\n1,2,3\n");
    CHECK_THROWS_WITH_AS(load_dataset(in), doctest::Contains("header"), Error);
  }
  {
    std::stringstream in("freq_khz,util_pct,power_w\n500000,50\n");
    CHECK_THROWS_WITH_AS(load_dataset(in), doctest::Contains("columns"), Error);
  }
}

TEST_CASE("blank lines are tolerated") {
  std::stringstream in("freq_khz,util_pct,power_w\n\n500000,50,2.0\n\n");
  CHECK(load_dataset(in).size() == 1);
}
