#include "powerlens/model_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "powerlens/error.hpp"
#include "powerlens/textio.hpp"

namespace powerlens {

namespace {

constexpr const char* kMagic = "powerlens-model";
constexpr const char* kVersion = "v1";

void write_frequencies(std::ostream& out, const std::vector<Frequency>& table) {
  out << "frequencies";
  for (Frequency f : table) out << ' ' << f.khz();
  out << '\n';
}

void write_coeff_line(std::ostream& out, const char* label, const double* values, int count) {
  out << label;
  for (int i = 0; i < count; ++i) out << ' ' << format_double(values[i]);
  out << '\n';
}

void write_tree(std::ostream& out, const RegressionTree& tree, const std::string& key) {
  out << "tree " << key << ' ' << tree.nodes().size() << '\n';
  for (const RegressionTree::Node& node : tree.nodes()) {
    if (node.is_leaf())
      out << "leaf " << format_double(node.value) << '\n';
    else
      out << "split " << node.feature << ' ' << format_double(node.threshold) << ' ' << node.left << ' '
          << node.right << '\n';
  }
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      std::string_view view = trim(line);
      if (view.empty()) continue;
      tokens.clear();
      for (std::string_view field : split(view, ' '))
        if (!field.empty()) tokens.emplace_back(field);
      return true;
    }
    return false;
  }

  std::vector<std::string> expect(const std::string& what) {
    std::vector<std::string> tokens;
    if (!next(tokens)) throw Error(Errc::ParseError, "model file ended while expecting " + what);
    return tokens;
  }

  std::vector<std::string> expect_keyword(const std::string& keyword) {
    std::vector<std::string> tokens = expect("'" + keyword + "' line");
    if (tokens[0] != keyword)
      throw Error(Errc::ParseError, context() + ": expected '" + keyword + "', got '" + tokens[0] + "'");
    return tokens;
  }

  std::string context() const { return "model file line " + std::to_string(line_no_); }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

std::vector<Frequency> parse_frequencies(LineReader& reader) {
  const std::vector<std::string> tokens = reader.expect_keyword("frequencies");
  std::vector<Frequency> table;
  for (std::size_t i = 1; i < tokens.size(); ++i)
    table.emplace_back(parse_int(tokens[i], reader.context()));
  return table;
}

void parse_reals(const std::vector<std::string>& tokens, std::size_t offset, double* values, std::size_t count,
                 const std::string& context) {
  if (tokens.size() != offset + count)
    throw Error(Errc::ParseError, context + ": expected " + std::to_string(count) + " values, got " +
                                      std::to_string(tokens.size() - offset));
  for (std::size_t i = 0; i < count; ++i) values[i] = parse_double(tokens[offset + i], context);
}

RegressionTree parse_tree_body(LineReader& reader, std::size_t node_count) {
  std::vector<RegressionTree::Node> nodes;
  nodes.reserve(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    const std::vector<std::string> tokens = reader.expect("tree node");
    RegressionTree::Node node;
    if (tokens[0] == "leaf" && tokens.size() == 2) {
      node.value = parse_double(tokens[1], reader.context());
    } else if (tokens[0] == "split" && tokens.size() == 5) {
      node.feature = static_cast<int>(parse_int(tokens[1], reader.context()));
      node.threshold = parse_double(tokens[2], reader.context());
      node.left = static_cast<std::int32_t>(parse_int(tokens[3], reader.context()));
      node.right = static_cast<std::int32_t>(parse_int(tokens[4], reader.context()));
      // Children must sit deeper in the node list, which rules out cycles.
      if (node.feature < 0 || node.feature > 1 || node.left <= static_cast<std::int32_t>(i) ||
          node.right <= static_cast<std::int32_t>(i) || static_cast<std::size_t>(node.left) >= node_count ||
          static_cast<std::size_t>(node.right) >= node_count)
        throw Error(Errc::ParseError, reader.context() + ": malformed split node");
    } else {
      throw Error(Errc::ParseError, reader.context() + ": expected 'leaf' or 'split' node");
    }
    nodes.push_back(node);
  }
  return RegressionTree(std::move(nodes));
}

}  // namespace

void save_model(const PowerModel& model, std::ostream& out) {
  if (!model.fitted()) throw Error(Errc::ModelNotFitted, "cannot save an unfitted model");
  out << kMagic << ' ' << kVersion << ' ' << model_kind_token(model.kind()) << '\n';

  switch (model.kind()) {
    case ModelKind::Simple:
      write_frequencies(out, model.frequency_table());
      write_coeff_line(out, "coeffs", model.as_simple().coeffs.data(), 4);
      break;
    case ModelKind::MultiTerm:
      write_frequencies(out, model.frequency_table());
      write_coeff_line(out, "coeffs", model.as_multi_term().coeffs.data(), 16);
      break;
    case ModelKind::MultiFrequency: {
      const MultiFrequencyPayload& payload = model.as_multi_frequency();
      write_frequencies(out, model.frequency_table());
      out << "split_index " << payload.split_index << '\n';
      write_coeff_line(out, "coeffs", payload.low.data(), 16);
      write_coeff_line(out, "coeffs", payload.high.data(), 16);
      break;
    }
    case ModelKind::PerFrequency: {
      const PerFrequencyPayload& payload = model.as_per_frequency();
      for (std::size_t i = 0; i < payload.entries.size(); ++i) {
        const QuadCoeffs& q = payload.entries[i];
        out << model.frequency_table()[i].khz() << ' ' << format_double(q.a) << ' ' << format_double(q.c) << ' '
            << format_double(q.b) << '\n';
      }
      break;
    }
    case ModelKind::PerFrequencyTree: {
      const TreePayload& payload = model.as_tree();
      write_frequencies(out, model.frequency_table());
      out << "mode " << (payload.global ? "global" : "per_frequency") << '\n';
      if (payload.global) {
        write_tree(out, payload.trees.front(), "-");
      } else {
        for (std::size_t i = 0; i < payload.trees.size(); ++i)
          write_tree(out, payload.trees[i], std::to_string(model.frequency_table()[i].khz()));
      }
      break;
    }
    case ModelKind::Mlp: {
      const MlpNetwork& net = model.as_mlp().net;
      write_frequencies(out, model.frequency_table());
      write_coeff_line(out, "norm_mean", net.input_mean.data(), MlpNetwork::kInputs);
      write_coeff_line(out, "norm_std", net.input_std.data(), MlpNetwork::kInputs);
      out << "layers";
      for (int size : MlpNetwork::kLayerSizes) out << ' ' << size;
      out << '\n';
      for (int layer = 0; layer < MlpNetwork::kLayers; ++layer) {
        out << "weights";
        for (Eigen::Index r = 0; r < net.weights[layer].rows(); ++r)
          for (Eigen::Index c = 0; c < net.weights[layer].cols(); ++c)
            out << ' ' << format_double(net.weights[layer](r, c));
        out << '\n';
        write_coeff_line(out, "bias", net.biases[layer].data(), static_cast<int>(net.biases[layer].size()));
      }
      break;
    }
  }
  if (!out) throw Error(Errc::IoError, "model write failed");
}

PowerModel load_model(std::istream& in) {
  LineReader reader(in);
  const std::vector<std::string> header = reader.expect("header");
  if (header.size() != 3 || header[0] != kMagic)
    throw Error(Errc::ParseError, reader.context() + ": not a powerlens model file");
  if (header[1] != kVersion)
    throw Error(Errc::UnsupportedVersion, "model version '" + header[1] + "' is not supported");
  const ModelKind kind = model_kind_from_token(header[2]);

  switch (kind) {
    case ModelKind::Simple: {
      std::vector<Frequency> table = parse_frequencies(reader);
      SimplePayload payload;
      parse_reals(reader.expect_keyword("coeffs"), 1, payload.coeffs.data(), 4, reader.context());
      return PowerModel::simple(std::move(table), std::move(payload));
    }
    case ModelKind::MultiTerm: {
      std::vector<Frequency> table = parse_frequencies(reader);
      MultiTermPayload payload;
      parse_reals(reader.expect_keyword("coeffs"), 1, payload.coeffs.data(), 16, reader.context());
      return PowerModel::multi_term(std::move(table), std::move(payload));
    }
    case ModelKind::MultiFrequency: {
      std::vector<Frequency> table = parse_frequencies(reader);
      MultiFrequencyPayload payload;
      const std::vector<std::string> split = reader.expect_keyword("split_index");
      if (split.size() != 2) throw Error(Errc::ParseError, reader.context() + ": malformed split_index");
      payload.split_index = static_cast<int>(parse_int(split[1], reader.context()));
      parse_reals(reader.expect_keyword("coeffs"), 1, payload.low.data(), 16, reader.context());
      parse_reals(reader.expect_keyword("coeffs"), 1, payload.high.data(), 16, reader.context());
      return PowerModel::multi_frequency(std::move(table), std::move(payload));
    }
    case ModelKind::PerFrequency: {
      std::vector<Frequency> table;
      PerFrequencyPayload payload;
      std::vector<std::string> tokens;
      while (reader.next(tokens)) {
        if (tokens.size() != 4)
          throw Error(Errc::ParseError, reader.context() + ": expected 'freq_khz a c b'");
        table.emplace_back(parse_int(tokens[0], reader.context()));
        payload.entries.push_back(QuadCoeffs{parse_double(tokens[1], reader.context()),
                                             parse_double(tokens[2], reader.context()),
                                             parse_double(tokens[3], reader.context())});
      }
      if (table.empty()) throw Error(Errc::ParseError, "per-frequency model has no entries");
      return PowerModel::per_frequency(std::move(table), std::move(payload));
    }
    case ModelKind::PerFrequencyTree: {
      std::vector<Frequency> table = parse_frequencies(reader);
      const std::vector<std::string> mode = reader.expect_keyword("mode");
      if (mode.size() != 2 || (mode[1] != "global" && mode[1] != "per_frequency"))
        throw Error(Errc::ParseError, reader.context() + ": malformed mode line");
      TreePayload payload;
      payload.global = mode[1] == "global";
      const std::size_t tree_count = payload.global ? 1 : table.size();
      for (std::size_t i = 0; i < tree_count; ++i) {
        const std::vector<std::string> head = reader.expect_keyword("tree");
        if (head.size() != 3) throw Error(Errc::ParseError, reader.context() + ": malformed tree line");
        if (!payload.global && parse_int(head[1], reader.context()) != table[i].khz())
          throw Error(Errc::ParseError, reader.context() + ": tree order does not match frequency table");
        const std::int64_t node_count = parse_int(head[2], reader.context());
        if (node_count <= 0) throw Error(Errc::ParseError, reader.context() + ": empty tree");
        payload.trees.push_back(parse_tree_body(reader, static_cast<std::size_t>(node_count)));
      }
      return PowerModel::per_frequency_tree(std::move(table), std::move(payload));
    }
    case ModelKind::Mlp: {
      std::vector<Frequency> table = parse_frequencies(reader);
      MlpPayload payload;
      MlpNetwork& net = payload.net;
      parse_reals(reader.expect_keyword("norm_mean"), 1, net.input_mean.data(), MlpNetwork::kInputs,
                  reader.context());
      parse_reals(reader.expect_keyword("norm_std"), 1, net.input_std.data(), MlpNetwork::kInputs,
                  reader.context());
      const std::vector<std::string> layers = reader.expect_keyword("layers");
      if (layers.size() != MlpNetwork::kLayerSizes.size() + 1)
        throw Error(Errc::ParseError, reader.context() + ": malformed layers line");
      for (std::size_t i = 0; i < MlpNetwork::kLayerSizes.size(); ++i)
        if (parse_int(layers[i + 1], reader.context()) != MlpNetwork::kLayerSizes[i])
          throw Error(Errc::ParseError, reader.context() + ": unsupported layer sizes");
      for (int layer = 0; layer < MlpNetwork::kLayers; ++layer) {
        const int rows = MlpNetwork::kLayerSizes[layer + 1];
        const int cols = MlpNetwork::kLayerSizes[layer];
        net.weights[layer].resize(rows, cols);
        const std::vector<std::string> weights = reader.expect_keyword("weights");
        if (weights.size() != static_cast<std::size_t>(rows * cols) + 1)
          throw Error(Errc::ParseError, reader.context() + ": weight count mismatch");
        for (int r = 0; r < rows; ++r)
          for (int c = 0; c < cols; ++c)
            net.weights[layer](r, c) = parse_double(weights[1 + r * cols + c], reader.context());
        net.biases[layer].resize(rows);
        parse_reals(reader.expect_keyword("bias"), 1, net.biases[layer].data(), static_cast<std::size_t>(rows),
                    reader.context());
      }
      return PowerModel::mlp(std::move(table), std::move(payload));
    }
  }
  throw Error(Errc::ParseError, "unreachable model kind");
}

void save_model_file(const PowerModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write " + path);
  save_model(model, out);
}

PowerModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open " + path);
  return load_model(in);
}

}  // namespace powerlens
