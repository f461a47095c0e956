#include <istream>
#include <sstream>

#include "morphlbl/error.hpp"
#include "morphlbl/io_util.hpp"
#include "morphlbl/model.hpp"

namespace morphlbl {

namespace {

constexpr std::string_view kModelHeader = "#morphlbl-model v1";

void write_block(std::string& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += '\t';
      out += format_double(m(r, c));
    }
    out += '\n';
  }
}

class BlockReader {
 public:
  explicit BlockReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next_row() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!trim(line).empty()) return split(trim(line), '\t');
    }
    throw DataError("model file truncated at line " + std::to_string(line_no_));
  }

  void read_block(Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      auto row = next_row();
      if (static_cast<Eigen::Index>(row.size()) != m.cols()) {
        throw DataError("model file line " + std::to_string(line_no_) + ": expected " +
                        std::to_string(m.cols()) + " values, got " + std::to_string(row.size()));
      }
      for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = parse_double(row[static_cast<std::size_t>(c)]);
    }
  }

  void expect_end() {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!trim(line).empty()) {
        throw DataError("model file line " + std::to_string(line_no_) + ": unexpected trailing data");
      }
    }
  }

 private:
  std::istream& in_;
  int line_no_ = 1;
};

}  // namespace

std::string format_model(const ModelParams& params, int num_tags) {
  std::string out(kModelHeader);
  out += '\n';
  out += std::to_string(params.num_words()) + '\t' + std::to_string(num_tags) + '\t' +
         std::to_string(params.num_subtags()) + '\t' + std::to_string(params.dim) + '\t' +
         std::to_string(params.order) + '\n';
  for (const auto& c : params.context_weights) write_block(out, c);
  write_block(out, params.context_embeddings);
  write_block(out, params.target_embeddings);
  write_block(out, params.bias.transpose());
  write_block(out, params.subtag_weights);
  return out;
}

ModelFile parse_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kModelHeader) {
    throw DataError("missing model header '" + std::string(kModelHeader) + "'");
  }
  BlockReader reader(in);
  auto dims = reader.next_row();
  if (dims.size() != 5) throw DataError("model dimensions line needs 5 fields");
  const auto num_words = static_cast<int>(parse_int(dims[0]));
  const auto num_tags = static_cast<int>(parse_int(dims[1]));
  const auto num_subtags = static_cast<int>(parse_int(dims[2]));
  const auto dim = static_cast<int>(parse_int(dims[3]));
  const auto order = static_cast<int>(parse_int(dims[4]));
  if (num_tags < 0) throw DataError("negative tag count in model file");

  ModelFile file;
  try {
    file.params = ModelParams::zeros(num_words, num_subtags, dim, order);
  } catch (const UsageError& e) {
    throw DataError(std::string("bad model dimensions: ") + e.what());
  }
  file.num_tags = num_tags;
  auto& p = file.params;
  for (auto& c : p.context_weights) reader.read_block(c);
  reader.read_block(p.context_embeddings);
  reader.read_block(p.target_embeddings);
  Eigen::MatrixXd bias_row(1, num_words);
  reader.read_block(bias_row);
  p.bias = bias_row.row(0).transpose();
  reader.read_block(p.subtag_weights);
  reader.expect_end();
  if (!p.all_finite()) throw DataError("model file contains non-finite values");
  return file;
}

}  // namespace morphlbl
