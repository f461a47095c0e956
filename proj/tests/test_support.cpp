#include "test_support.hpp"

#include <algorithm>
#include <set>

namespace morphlbl::testing {

TagInventory random_inventory(int num_tags, int num_subtags, std::mt19937_64& rng) {
  TagInventory inv;
  for (int j = 0; j < num_subtags; ++j) inv.add_subtag("s" + std::to_string(j));
  std::set<std::vector<int>> used;
  std::bernoulli_distribution coin(0.5);
  while (inv.size() < num_tags) {
    std::vector<int> subset;
    for (int j = 0; j < num_subtags; ++j) {
      if (coin(rng)) subset.push_back(j);
    }
    if (subset.empty() || !used.insert(subset).second) continue;
    std::string tag;
    for (int j : subset) tag += (tag.empty() ? "s" : ".s") + std::to_string(j);
    inv.add(tag);
  }
  return inv;
}

ModelParams random_params(int num_words, int num_subtags, int dim, int order,
                          std::mt19937_64& rng, double scale) {
  auto p = ModelParams::random(num_words, num_subtags, dim, order, rng, scale);
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (Eigen::Index w = 0; w < p.bias.size(); ++w) p.bias(w) = dist(rng);
  return p;
}

std::vector<WordId> random_history(const ModelParams& params, std::mt19937_64& rng) {
  std::uniform_int_distribution<WordId> id(0, params.bos());
  std::vector<WordId> h(static_cast<std::size_t>(params.history_length()));
  for (auto& x : h) x = id(rng);
  return h;
}

std::vector<Example> random_batch(const ModelParams& params, int num_tags, int size,
                                  double labeled_probability, std::mt19937_64& rng) {
  std::uniform_int_distribution<WordId> word(0, params.num_words() - 1);
  std::uniform_int_distribution<TagId> tag(0, num_tags - 1);
  std::bernoulli_distribution labeled(labeled_probability);
  std::vector<Example> batch;
  for (int i = 0; i < size; ++i) {
    Example ex{random_history(params, rng), word(rng), kNoTag};
    if (labeled(rng)) ex.tag = tag(rng);
    batch.push_back(std::move(ex));
  }
  return batch;
}

namespace {

template <typename Fn>
void perturb_each(Eigen::Ref<Eigen::MatrixXd> block, Eigen::Ref<Eigen::MatrixXd> out, double step,
                  Fn&& objective) {
  for (Eigen::Index r = 0; r < block.rows(); ++r) {
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      const double keep = block(r, c);
      block(r, c) = keep + step;
      const double up = objective();
      block(r, c) = keep - step;
      const double down = objective();
      block(r, c) = keep;
      out(r, c) = (up - down) / (2.0 * step);
    }
  }
}

}  // namespace

ModelParams finite_difference_gradient(const std::vector<Example>& batch, ModelParams params,
                                       const Eigen::MatrixXd& tag_features, ModelKind kind,
                                       double step) {
  auto grad = ModelParams::zeros(params.num_words(), params.num_subtags(), params.dim,
                                 params.order);
  auto objective = [&] { return log_likelihood(batch, params, tag_features, kind); };
  for (std::size_t i = 0; i < params.context_weights.size(); ++i) {
    perturb_each(params.context_weights[i], grad.context_weights[i], step, objective);
  }
  perturb_each(params.context_embeddings, grad.context_embeddings, step, objective);
  perturb_each(params.target_embeddings, grad.target_embeddings, step, objective);
  {
    Eigen::MatrixXd b = params.bias;
    Eigen::MatrixXd gb = Eigen::MatrixXd::Zero(b.rows(), 1);
    auto bias_objective = [&] {
      params.bias = b.col(0);
      return log_likelihood(batch, params, tag_features, kind);
    };
    perturb_each(b, gb, step, bias_objective);
    params.bias = b.col(0);
    grad.bias = gb.col(0);
  }
  perturb_each(params.subtag_weights, grad.subtag_weights, step, objective);
  return grad;
}

std::map<std::string, double> block_relative_errors(const ModelParams& a, const ModelParams& b,
                                                    double floor) {
  auto rel = [floor](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return (x - y).norm() / std::max({x.norm(), y.norm(), floor});
  };
  std::map<std::string, double> out;
  double c_err = 0.0;
  for (std::size_t i = 0; i < a.context_weights.size(); ++i) {
    c_err = std::max(c_err, rel(a.context_weights[i], b.context_weights[i]));
  }
  out["context_weights"] = c_err;
  out["context_embeddings"] = rel(a.context_embeddings, b.context_embeddings);
  out["target_embeddings"] = rel(a.target_embeddings, b.target_embeddings);
  out["bias"] = rel(a.bias, b.bias);
  out["subtag_weights"] = rel(a.subtag_weights, b.subtag_weights);
  return out;
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("morphlbl_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace morphlbl::testing
