#include "powerlens/model.hpp"

#include <algorithm>
#include <cmath>

#include "powerlens/error.hpp"

namespace powerlens {

const char* model_kind_token(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Simple: return "simple";
    case ModelKind::MultiTerm: return "multi_term";
    case ModelKind::MultiFrequency: return "multi_frequency";
    case ModelKind::PerFrequency: return "per_frequency";
    case ModelKind::PerFrequencyTree: return "per_frequency_tree";
    case ModelKind::Mlp: return "mlp";
  }
  return "unknown";
}

ModelKind model_kind_from_token(const std::string& token) {
  for (ModelKind kind : {ModelKind::Simple, ModelKind::MultiTerm, ModelKind::MultiFrequency,
                         ModelKind::PerFrequency, ModelKind::PerFrequencyTree, ModelKind::Mlp}) {
    if (token == model_kind_token(kind)) return kind;
  }
  throw Error(Errc::ParseError, "unknown model kind '" + token + "'");
}

double eval_polynomial(const PowerEquationCoeffs& coeffs, Frequency freq, const Utilization& util) {
  const double u = util.value();
  const double f = freq.ghz();
  return coeffs.k0 * u * u + coeffs.k1 * f * u + coeffs.k2 * u + coeffs.b;
}

Vec4 simple_features(double freq_ghz, double util) noexcept {
  const double f3 = freq_ghz * freq_ghz * freq_ghz;
  Vec4 phi;
  phi << 1.0, util, f3, f3 * util;
  return phi;
}

Vec16 monomial_features(double freq_ghz, double util) noexcept {
  Vec16 phi;
  double fi = 1.0;
  for (int i = 0; i < 4; ++i) {
    double uj = 1.0;
    for (int j = 0; j < 4; ++j) {
      phi[i * 4 + j] = fi * uj;
      uj *= util;
    }
    fi *= freq_ghz;
  }
  return phi;
}

namespace {

void require_sorted_unique(const std::vector<Frequency>& table) {
  for (std::size_t i = 1; i < table.size(); ++i) {
    if (!(table[i - 1] < table[i]))
      throw Error(Errc::InvalidArgument, "frequency table must be ascending and duplicate-free");
  }
}

}  // namespace

PowerModel::PowerModel(std::vector<Frequency> table, Payload payload)
    : frequency_table_(std::move(table)), payload_(std::move(payload)) {
  require_sorted_unique(frequency_table_);
}

PowerModel PowerModel::simple(std::vector<Frequency> table, SimplePayload payload) {
  return PowerModel(std::move(table), Payload(std::move(payload)));
}

PowerModel PowerModel::multi_term(std::vector<Frequency> table, MultiTermPayload payload) {
  return PowerModel(std::move(table), Payload(std::move(payload)));
}

PowerModel PowerModel::multi_frequency(std::vector<Frequency> table, MultiFrequencyPayload payload) {
  if (payload.split_index <= 0 || static_cast<std::size_t>(payload.split_index) >= table.size())
    throw Error(Errc::InvalidArgument, "split index must fall strictly inside the frequency table");
  return PowerModel(std::move(table), Payload(std::move(payload)));
}

PowerModel PowerModel::per_frequency(std::vector<Frequency> table, PerFrequencyPayload payload) {
  if (payload.entries.size() != table.size())
    throw Error(Errc::InvalidArgument, "per-frequency payload needs exactly one entry per frequency");
  return PowerModel(std::move(table), Payload(std::move(payload)));
}

PowerModel PowerModel::per_frequency_tree(std::vector<Frequency> table, TreePayload payload) {
  if (payload.global) {
    if (payload.trees.size() != 1)
      throw Error(Errc::InvalidArgument, "global tree payload holds exactly one tree");
  } else if (payload.trees.size() != table.size()) {
    throw Error(Errc::InvalidArgument, "per-frequency tree payload needs exactly one tree per frequency");
  }
  for (const RegressionTree& tree : payload.trees)
    if (tree.empty()) throw Error(Errc::InvalidArgument, "empty tree in payload");
  return PowerModel(std::move(table), Payload(std::move(payload)));
}

PowerModel PowerModel::mlp(std::vector<Frequency> table, MlpPayload payload) {
  for (int i = 0; i < MlpNetwork::kInputs; ++i)
    if (!(payload.net.input_std[i] > 0.0))
      throw Error(Errc::InvalidArgument, "mlp normalization stddev must be positive");
  return PowerModel(std::move(table), Payload(std::move(payload)));
}

ModelKind PowerModel::kind() const {
  if (!fitted()) throw Error(Errc::ModelNotFitted, "model has no payload");
  return static_cast<ModelKind>(payload_.index() - 1);
}

const SimplePayload& PowerModel::as_simple() const {
  if (const auto* p = std::get_if<SimplePayload>(&payload_)) return *p;
  throw Error(Errc::InvalidArgument, "model is not of kind simple");
}
const MultiTermPayload& PowerModel::as_multi_term() const {
  if (const auto* p = std::get_if<MultiTermPayload>(&payload_)) return *p;
  throw Error(Errc::InvalidArgument, "model is not of kind multi_term");
}
const MultiFrequencyPayload& PowerModel::as_multi_frequency() const {
  if (const auto* p = std::get_if<MultiFrequencyPayload>(&payload_)) return *p;
  throw Error(Errc::InvalidArgument, "model is not of kind multi_frequency");
}
const PerFrequencyPayload& PowerModel::as_per_frequency() const {
  if (const auto* p = std::get_if<PerFrequencyPayload>(&payload_)) return *p;
  throw Error(Errc::InvalidArgument, "model is not of kind per_frequency");
}
const TreePayload& PowerModel::as_tree() const {
  if (const auto* p = std::get_if<TreePayload>(&payload_)) return *p;
  throw Error(Errc::InvalidArgument, "model is not of kind per_frequency_tree");
}
const MlpPayload& PowerModel::as_mlp() const {
  if (const auto* p = std::get_if<MlpPayload>(&payload_)) return *p;
  throw Error(Errc::InvalidArgument, "model is not of kind mlp");
}

namespace {

// Evaluates an entry-indexed model at a query frequency: exact table hits use
// that entry, in-between frequencies interpolate the two neighbors'
// predictions linearly by frequency, out-of-range queries take the nearest
// endpoint.
template <typename EvalEntry>
double eval_with_frequency_lookup(const std::vector<Frequency>& table, Frequency freq, EvalEntry&& eval) {
  if (table.empty()) throw Error(Errc::ModelNotFitted, "model has an empty frequency table");
  auto it = std::lower_bound(table.begin(), table.end(), freq);
  if (it != table.end() && *it == freq) return eval(static_cast<std::size_t>(it - table.begin()));
  if (it == table.begin()) return eval(0);
  if (it == table.end()) return eval(table.size() - 1);
  const std::size_t hi = static_cast<std::size_t>(it - table.begin());
  const std::size_t lo = hi - 1;
  const double span = static_cast<double>(table[hi].khz() - table[lo].khz());
  const double t = static_cast<double>(freq.khz() - table[lo].khz()) / span;
  return (1.0 - t) * eval(lo) + t * eval(hi);
}

double predict_raw(const PowerModel& model, Frequency freq, const Utilization& util) {
  const double u = util.value();
  const double f = freq.ghz();
  switch (model.kind()) {
    case ModelKind::Simple:
      return model.as_simple().coeffs.dot(simple_features(f, u));
    case ModelKind::MultiTerm:
      return model.as_multi_term().coeffs.dot(monomial_features(f, u));
    case ModelKind::MultiFrequency: {
      const MultiFrequencyPayload& payload = model.as_multi_frequency();
      const Frequency split = model.frequency_table()[static_cast<std::size_t>(payload.split_index)];
      const Vec16& coeffs = freq < split ? payload.low : payload.high;
      return coeffs.dot(monomial_features(f, u));
    }
    case ModelKind::PerFrequency: {
      const PerFrequencyPayload& payload = model.as_per_frequency();
      return eval_with_frequency_lookup(model.frequency_table(), freq,
                                        [&](std::size_t i) { return eval_quadratic(payload.entries[i], u); });
    }
    case ModelKind::PerFrequencyTree: {
      const TreePayload& payload = model.as_tree();
      if (payload.global) return payload.trees.front().predict(f, u);
      return eval_with_frequency_lookup(model.frequency_table(), freq,
                                        [&](std::size_t i) { return payload.trees[i].predict(f, u); });
    }
    case ModelKind::Mlp: {
      const auto& per_core = util.per_core();
      if (!per_core || per_core->size() != 4)
        throw Error(Errc::MissingPerCoreData, "mlp prediction needs utilizations for exactly 4 cores");
      Eigen::Matrix<double, MlpNetwork::kInputs, 1> input;
      input << f, (*per_core)[0], (*per_core)[1], (*per_core)[2], (*per_core)[3];
      return model.as_mlp().net.predict(input);
    }
  }
  throw Error(Errc::ModelNotFitted, "unreachable model kind");
}

}  // namespace

double predict(const PowerModel& model, Frequency freq, const Utilization& util) {
  if (!model.fitted()) throw Error(Errc::ModelNotFitted, "predict called on an unfitted model");
  double value = predict_raw(model, freq, util);
  if (value < 0.0) {
    diagnostics().negative_prediction_clamps.fetch_add(1, std::memory_order_relaxed);
    value = 0.0;
  }
  return value;
}

}  // namespace powerlens
