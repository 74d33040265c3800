#include "powerlens/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "powerlens/error.hpp"
#include "powerlens/textio.hpp"

namespace powerlens {

namespace {

struct Layout {
  bool per_core = false;
  bool tag = false;

  std::size_t columns() const { return 3 + (per_core ? 4 : 0) + (tag ? 1 : 0); }
};

Layout parse_header(std::string_view line) {
  const std::vector<std::string_view> fields = split(trim(line), ',');
  auto matches = [&](std::initializer_list<const char*> names) {
    if (fields.size() != names.size()) return false;
    std::size_t i = 0;
    for (const char* name : names)
      if (trim(fields[i++]) != name) return false;
    return true;
  };
  if (matches({"freq_khz", "util_pct", "power_w"})) return Layout{false, false};
  if (matches({"freq_khz", "util_pct", "power_w", "tag"})) return Layout{false, true};
  if (matches({"freq_khz", "util_pct", "power_w", "u0_pct", "u1_pct", "u2_pct", "u3_pct"})) return Layout{true, false};
  if (matches({"freq_khz", "util_pct", "power_w", "u0_pct", "u1_pct", "u2_pct", "u3_pct", "tag"}))
    return Layout{true, true};
  throw Error(Errc::ParseError, "line 1: unrecognized dataset header");
}

double percent_to_fraction(std::string_view field, const std::string& context) {
  const double pct = parse_double(field, context);
  if (!(pct >= 0.0 && pct <= 100.0))
    throw Error(Errc::ParseError, context + ": percent value " + std::string(field) + " outside [0, 100]");
  return pct / 100.0;
}

}  // namespace

std::vector<MeasurementRecord> load_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::ParseError, "line 1: empty dataset file");
  const Layout layout = parse_header(line);

  std::vector<MeasurementRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string context = "line " + std::to_string(line_no);
    const std::vector<std::string_view> fields = split(trim(line), ',');
    if (fields.size() != layout.columns())
      throw Error(Errc::ParseError,
                  context + ": expected " + std::to_string(layout.columns()) + " columns, got " +
                      std::to_string(fields.size()));

    Frequency freq(parse_int(fields[0], context));
    const double mean_util = percent_to_fraction(fields[1], context);
    const double power = parse_double(fields[2], context);
    if (!(power > 0.0)) throw Error(Errc::ParseError, context + ": power must be positive watts");

    std::optional<Utilization> util;
    if (layout.per_core) {
      std::vector<double> cores;
      for (std::size_t i = 3; i < 7; ++i) cores.push_back(percent_to_fraction(fields[i], context));
      util.emplace(Utilization(cores));
      if (std::abs(util->value() - mean_util) > 5e-5)  // percent columns round at 2-3 decimals
        throw Error(Errc::ParseError, context + ": util_pct does not match the per-core mean");
      util.emplace(util->value(), cores);
    } else {
      util.emplace(mean_util);
    }

    std::string tag;
    if (layout.tag) tag = std::string(trim(fields.back()));
    records.push_back(MeasurementRecord{freq, std::move(*util), power, std::move(tag)});
  }
  return records;
}

std::vector<MeasurementRecord> load_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  try {
    return load_dataset(in);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void save_dataset(std::span<const MeasurementRecord> records, std::ostream& out) {
  bool per_core = !records.empty();
  bool tag = false;
  for (const MeasurementRecord& r : records) {
    per_core = per_core && r.utilization.per_core() && r.utilization.per_core()->size() == 4;
    tag = tag || !r.source_tag.empty();
  }

  out << "freq_khz,util_pct,power_w";
  if (per_core) out << ",u0_pct,u1_pct,u2_pct,u3_pct";
  if (tag) out << ",tag";
  out << '\n';

  for (const MeasurementRecord& r : records) {
    out << r.frequency.khz() << ',' << format_double(r.utilization.value() * 100.0) << ','
        << format_double(r.power_w);
    if (per_core)
      for (double u : *r.utilization.per_core()) out << ',' << format_double(u * 100.0);
    if (tag) out << ',' << r.source_tag;
    out << '\n';
  }
  if (!out) throw Error(Errc::IoError, "dataset write failed");
}

void save_dataset_file(std::span<const MeasurementRecord> records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  save_dataset(records, out);
}

}  // namespace powerlens
