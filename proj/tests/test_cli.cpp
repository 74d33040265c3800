// End-to-end checks of the installed command surface via subprocesses.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "powerlens/dataset.hpp"
#include "powerlens/model_io.hpp"
#include "powerlens/textio.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args) {
  const std::string command = std::string(POWERLENS_CLI) + " " + args + " 2>&1";
  std::array<char, 4096> buffer{};
  RunResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (std::size_t n = fread(buffer.data(), 1, buffer.size(), pipe)) result.output.append(buffer.data(), n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("powerlens_cli_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const char* leaf) const { return (path / leaf).string(); }
};

}  // namespace

TEST_CASE("calibrate -> fit -> eval -> predict round trip on the synthetic device") {
  TempDir dir;
  const std::string dataset = dir / "dataset.csv";
  const std::string model = dir / "model.pm";

  auto cal = run_cli("--seed 11 --out-dir " + dir.path.string() +
                     " calibrate --device synthetic --freqs auto --freq-count 5 --noise 0 --workers 4 --out " +
                     dataset);
  CAPTURE(cal.output);
  REQUIRE(cal.exit_code == 0);
  CHECK(fs::exists(dataset));
  CHECK(fs::exists(dataset + ".manifest.json"));
  CHECK(fs::exists(dir / "powerlens-run-calibrate.json"));

  auto fit = run_cli("--out-dir " + dir.path.string() + " fit --data " + dataset +
                     " --kind per-frequency --out " + model);
  CAPTURE(fit.output);
  REQUIRE(fit.exit_code == 0);
  CHECK(fit.output.find("training:") != std::string::npos);

  // A model written by fit is accepted by every consumer.
  auto eval = run_cli("eval --model " + model + " --data " + dataset + " --per-tag");
  CAPTURE(eval.output);
  REQUIRE(eval.exit_code == 0);
  CHECK(eval.output.find("aggregate:") != std::string::npos);
  CHECK(eval.output.find("tag mt4:d0:") != std::string::npos);

  auto sim = run_cli("--seed 3 --out-dir " + dir.path.string() + " simulate --freq-count 5 --trace-segments 8");
  REQUIRE(sim.exit_code == 0);
  auto predict = run_cli("predict --model " + model + " --trace " + (dir / "trace.log") + " --energy");
  CAPTURE(predict.output);
  REQUIRE(predict.exit_code == 0);
  CHECK(predict.output.find("power_w ") != std::string::npos);
  CHECK(predict.output.find("energy_j ") != std::string::npos);
}

TEST_CASE("fit all six kinds on one dataset and eval each") {
  TempDir dir;
  run_cli("--seed 5 --out-dir " + dir.path.string() + " simulate --freq-count 6 --noise 0.02");
  const std::string dataset = dir / "dataset.csv";
  const std::string config = dir / "fit.json";
  powerlens::write_file(config, R"({"mlp_epochs": 60})");

  for (const std::string kind :
       {"simple", "multi-term", "multi-frequency", "per-frequency", "tree", "mlp"}) {
    const std::string model = (dir.path / (kind + ".pm")).string();
    auto fit = run_cli("fit --data " + dataset + " --kind " + kind + " --config " + config + " --out " + model);
    CAPTURE(kind);
    CAPTURE(fit.output);
    REQUIRE(fit.exit_code == 0);
    auto eval = run_cli("eval --model " + model + " --data " + (dir / "holdout.csv"));
    // Mlp needs per-core columns: the holdout file carries only means.
    if (kind == "mlp") {
      CHECK(eval.exit_code != 0);
      auto self_eval = run_cli("eval --model " + model + " --data " + dataset);
      REQUIRE(self_eval.exit_code == 0);
    } else {
      REQUIRE(eval.exit_code == 0);
      CHECK(eval.output.find("aggregate:") != std::string::npos);
    }
  }

  // The global-tree variant is selected through the fit config.
  powerlens::write_file(config, R"({"tree_global": true, "tree_max_depth": 6})");
  auto fit = run_cli("fit --data " + dataset + " --kind tree --config " + config + " --out " + (dir / "dt1.pm"));
  REQUIRE(fit.exit_code == 0);
  const powerlens::PowerModel dt1 = powerlens::load_model_file(dir / "dt1.pm");
  CHECK(dt1.as_tree().global);
}

TEST_CASE("ingest joins the synthetic meter log back into a dataset") {
  TempDir dir;
  run_cli("--seed 9 --out-dir " + dir.path.string() + " simulate --freq-count 4 --noise 0");
  auto ingest = run_cli("ingest --schema energy --log " + (dir / "meter.csv") + " --manifest " +
                        (dir / "manifest.json") + " --out " + (dir / "joined.csv"));
  CAPTURE(ingest.output);
  REQUIRE(ingest.exit_code == 0);

  const auto direct = powerlens::load_dataset_file(dir / "dataset.csv");
  const auto joined = powerlens::load_dataset_file(dir / "joined.csv");
  REQUIRE(direct.size() == joined.size());
  for (std::size_t i = 0; i < direct.size(); ++i)
    CHECK(joined[i].power_w == doctest::Approx(direct[i].power_w).epsilon(1e-9));
}

TEST_CASE("meterstats emits per-window rows") {
  TempDir dir;
  run_cli("--seed 2 --out-dir " + dir.path.string() + " simulate --freq-count 3 --noise 0.05");
  auto stats = run_cli("meterstats --schema energy --log " + (dir / "meter.csv") +
                       " --window 180 --stride 60 --out " + (dir / "windows.csv"));
  REQUIRE(stats.exit_code == 0);
  CHECK(stats.output.find("stddev=") != std::string::npos);
  std::ifstream in(dir / "windows.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t_start,t_end,mean_power_w");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) rows += !line.empty();
  CHECK(rows > 10);
}

TEST_CASE("track --backend replay reproduces the bundled fixture deterministically") {
  TempDir dir;
  const std::string fixture = std::string(POWERLENS_SOURCE_DIR) + "/data/fixtures/fig6_replay.csv";
  auto once = run_cli("track --backend replay --fixture " + fixture + " --out " + (dir / "a.log"));
  REQUIRE(once.exit_code == 0);
  auto twice = run_cli("track --backend replay --fixture " + fixture + " --out " + (dir / "b.log"));
  REQUIRE(twice.exit_code == 0);
  CHECK(powerlens::read_file(dir / "a.log") == powerlens::read_file(dir / "b.log"));
  CHECK(once.output.find("replayed 15 segments") != std::string::npos);
}

TEST_CASE("report total equals predict total exactly") {
  TempDir dir;
  run_cli("--seed 7 --out-dir " + dir.path.string() + " simulate --freq-count 5 --trace-segments 12");
  run_cli("fit --data " + (dir / "dataset.csv") + " --kind per-frequency --out " + (dir / "m.pm"));
  auto report = run_cli("report --model " + (dir / "m.pm") + " --trace " + (dir / "trace.log") + " --out " +
                        (dir / "report.csv"));
  REQUIRE(report.exit_code == 0);
  auto predict = run_cli("predict --model " + (dir / "m.pm") + " --trace " + (dir / "trace.log"));
  REQUIRE(predict.exit_code == 0);

  auto value_after = [](const std::string& text, const std::string& key) {
    const auto pos = text.find(key);
    REQUIRE(pos != std::string::npos);
    std::istringstream in(text.substr(pos + key.size()));
    double v = 0.0;
    in >> v;
    return v;
  };
  CHECK(value_after(report.output, "power_w ") == value_after(predict.output, "power_w "));

  // Report rows equal fixture segment count.
  std::ifstream in(dir / "report.csv");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) rows += !line.empty();
  CHECK(rows == 1 + 12);  // header + one row per segment
}

TEST_CASE("parse failures exit 2, fit failures exit 3") {
  TempDir dir;
  powerlens::write_file(dir / "empty.csv", "");
  auto parse = run_cli("fit --data " + (dir / "empty.csv") + " --kind simple --out " + (dir / "x.pm"));
  CHECK(parse.exit_code == 2);
  CHECK(parse.output.find("line 1") != std::string::npos);

  powerlens::write_file(dir / "tiny.csv", "freq_khz,util_pct,power_w\n500000,50,2.0\n");
  auto fit = run_cli("fit --data " + (dir / "tiny.csv") + " --kind simple --out " + (dir / "x.pm"));
  CHECK(fit.exit_code == 3);

  powerlens::write_file(dir / "bad.pm", "powerlens-model v9 simple\n");
  auto eval = run_cli("eval --model " + (dir / "bad.pm") + " --data " + (dir / "tiny.csv"));
  CHECK(eval.exit_code == 2);
}
