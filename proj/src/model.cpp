#include "morphlbl/model.hpp"

#include <cmath>
#include <string>

#include "morphlbl/error.hpp"

namespace morphlbl {

namespace {

double log_sum_exp(const Eigen::Ref<const Eigen::ArrayXd>& values) {
  const double top = values.maxCoeff();
  return top + std::log((values - top).exp().sum());
}

void check_history(std::span<const WordId> history, const ModelParams& params) {
  if (static_cast<int>(history.size()) != params.history_length()) {
    throw DataError("history length " + std::to_string(history.size()) + " != order-1 = " +
                    std::to_string(params.history_length()));
  }
  for (WordId h : history) {
    if (h < 0 || h > params.bos()) throw DataError("history id out of range");
  }
}

void check_word(WordId word, const ModelParams& params) {
  if (word < 0 || word >= params.num_words()) throw DataError("word id out of range");
}

void check_features(const ModelParams& params, const Eigen::MatrixXd& tag_features) {
  if (tag_features.rows() == 0) throw DataError("tag inventory is empty");
  if (tag_features.cols() != params.num_subtags()) {
    throw DataError("tag features have " + std::to_string(tag_features.cols()) +
                    " sub-tags, model has " + std::to_string(params.num_subtags()));
  }
}

void fill_uniform(Eigen::MatrixXd& m, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
  }
}

// Everything needed to evaluate or differentiate the joint model at one
// history.
struct JointState {
  Eigen::VectorXd context;      // dim
  Eigen::MatrixXd tag_vectors;  // num_tags x dim, row t = S^T f_t
  Eigen::MatrixXd scores;       // num_words x num_tags
  double log_partition = 0.0;
};

JointState joint_state(std::span<const WordId> history, const ModelParams& params,
                       const Eigen::MatrixXd& tag_features) {
  check_history(history, params);
  check_features(params, tag_features);
  JointState st;
  st.context = context_vector(history, params);
  st.tag_vectors = tag_features * params.subtag_weights;
  Eigen::MatrixXd shifted = st.tag_vectors.rowwise() + st.context.transpose();
  st.scores = params.target_embeddings * shifted.transpose();
  st.scores.colwise() += params.bias;
  st.log_partition = log_sum_exp(st.scores.reshaped().array());
  return st;
}

}  // namespace

// -------------------------------------------------------------- ModelParams

ModelParams ModelParams::zeros(int num_words, int num_subtags, int dim, int order) {
  if (num_words < 1) throw UsageError("vocabulary must contain at least one word");
  if (dim < 1) throw UsageError("dimensionality must be at least 1");
  if (order < 2) throw UsageError("model order must be at least 2");
  if (num_subtags < 0) throw UsageError("negative sub-tag count");
  ModelParams p;
  p.order = order;
  p.dim = dim;
  p.context_weights.assign(static_cast<std::size_t>(order - 1), Eigen::MatrixXd::Zero(dim, dim));
  p.context_embeddings = Eigen::MatrixXd::Zero(num_words + 1, dim);
  p.target_embeddings = Eigen::MatrixXd::Zero(num_words, dim);
  p.bias = Eigen::VectorXd::Zero(num_words);
  p.subtag_weights = Eigen::MatrixXd::Zero(num_subtags, dim);
  return p;
}

ModelParams ModelParams::random(int num_words, int num_subtags, int dim, int order,
                                std::mt19937_64& rng, double scale, bool zero_subtags) {
  auto p = zeros(num_words, num_subtags, dim, order);
  for (auto& c : p.context_weights) fill_uniform(c, rng, scale);
  fill_uniform(p.context_embeddings, rng, scale);
  fill_uniform(p.target_embeddings, rng, scale);
  if (!zero_subtags) fill_uniform(p.subtag_weights, rng, scale);
  return p;
}

bool ModelParams::all_finite() const {
  for (const auto& c : context_weights) {
    if (!c.allFinite()) return false;
  }
  return context_embeddings.allFinite() && target_embeddings.allFinite() && bias.allFinite() &&
         subtag_weights.allFinite();
}

bool ModelParams::same_shape(const ModelParams& o) const {
  return order == o.order && dim == o.dim && context_weights.size() == o.context_weights.size() &&
         context_embeddings.rows() == o.context_embeddings.rows() &&
         context_embeddings.cols() == o.context_embeddings.cols() &&
         target_embeddings.rows() == o.target_embeddings.rows() &&
         target_embeddings.cols() == o.target_embeddings.cols() && bias.size() == o.bias.size() &&
         subtag_weights.rows() == o.subtag_weights.rows() &&
         subtag_weights.cols() == o.subtag_weights.cols();
}

void ModelParams::add_scaled(const ModelParams& other, double scale) {
  if (!same_shape(other)) throw DataError("parameter shapes differ");
  for (std::size_t i = 0; i < context_weights.size(); ++i) {
    context_weights[i] += scale * other.context_weights[i];
  }
  context_embeddings += scale * other.context_embeddings;
  target_embeddings += scale * other.target_embeddings;
  bias += scale * other.bias;
  subtag_weights += scale * other.subtag_weights;
}

void ModelParams::set_zero() {
  for (auto& c : context_weights) c.setZero();
  context_embeddings.setZero();
  target_embeddings.setZero();
  bias.setZero();
  subtag_weights.setZero();
}

double ModelParams::squared_norm() const {
  double total = 0.0;
  for (const auto& c : context_weights) total += c.squaredNorm();
  return total + context_embeddings.squaredNorm() + target_embeddings.squaredNorm() +
         bias.squaredNorm() + subtag_weights.squaredNorm();
}

Eigen::MatrixXd tag_feature_matrix(const TagInventory& inventory) {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(inventory.size(), inventory.num_subtags());
  for (TagId t = 0; t < inventory.size(); ++t) {
    auto bits = inventory.features(t);
    for (std::size_t j = 0; j < bits.size(); ++j) f(t, static_cast<Eigen::Index>(j)) = bits[j];
  }
  return f;
}

// ------------------------------------------------------------------ scoring

Eigen::VectorXd context_vector(std::span<const WordId> history, const ModelParams& params) {
  check_history(history, params);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(params.dim);
  for (std::size_t i = 0; i < history.size(); ++i) {
    c.noalias() += params.context_weights[i] * params.context_embeddings.row(history[i]).transpose();
  }
  return c;
}

double score_lbl(WordId word, std::span<const WordId> history, const ModelParams& params) {
  check_word(word, params);
  return context_vector(history, params).dot(params.target_embeddings.row(word)) +
         params.bias(word);
}

double score_joint(WordId word, TagId tag, std::span<const WordId> history,
                   const ModelParams& params, const Eigen::MatrixXd& tag_features) {
  check_word(word, params);
  check_features(params, tag_features);
  if (tag < 0 || tag >= tag_features.rows()) throw DataError("tag id out of range");
  Eigen::VectorXd v = context_vector(history, params) +
                      params.subtag_weights.transpose() * tag_features.row(tag).transpose();
  return v.dot(params.target_embeddings.row(word)) + params.bias(word);
}

Eigen::VectorXd lbl_distribution(std::span<const WordId> history, const ModelParams& params) {
  Eigen::ArrayXd s = (params.target_embeddings * context_vector(history, params) + params.bias).array();
  return (s - log_sum_exp(s)).exp().matrix();
}

Eigen::MatrixXd joint_distribution(std::span<const WordId> history, const ModelParams& params,
                                   const Eigen::MatrixXd& tag_features) {
  auto st = joint_state(history, params, tag_features);
  Eigen::MatrixXd p = (st.scores.array() - st.log_partition).exp().matrix();
  if (!p.allFinite()) throw NumericError("non-finite joint distribution");
  return p;
}

Eigen::VectorXd marginal_word_distribution(std::span<const WordId> history,
                                           const ModelParams& params,
                                           const Eigen::MatrixXd& tag_features) {
  auto st = joint_state(history, params, tag_features);
  Eigen::VectorXd out(params.num_words());
  for (Eigen::Index w = 0; w < out.size(); ++w) {
    out(w) = std::exp(log_sum_exp(st.scores.row(w).transpose().array()) - st.log_partition);
  }
  return out;
}

Eigen::VectorXd tag_posterior(WordId word, std::span<const WordId> history,
                              const ModelParams& params, const Eigen::MatrixXd& tag_features) {
  check_word(word, params);
  check_history(history, params);
  check_features(params, tag_features);
  Eigen::ArrayXd a = (tag_features * (params.subtag_weights *
                                      params.target_embeddings.row(word).transpose()))
                         .array();
  return (a - log_sum_exp(a)).exp().matrix();
}

// --------------------------------------------------------------- likelihood

double token_log_likelihood(const Example& ex, const ModelParams& params,
                            const Eigen::MatrixXd& tag_features, ModelKind kind) {
  check_word(ex.word, params);
  if (kind == ModelKind::kLbl) {
    Eigen::ArrayXd s =
        (params.target_embeddings * context_vector(ex.history, params) + params.bias).array();
    return s(ex.word) - log_sum_exp(s);
  }
  auto st = joint_state(ex.history, params, tag_features);
  if (ex.tag != kNoTag) {
    if (ex.tag < 0 || ex.tag >= tag_features.rows()) throw DataError("tag id out of range");
    return st.scores(ex.word, ex.tag) - st.log_partition;
  }
  return log_sum_exp(st.scores.row(ex.word).transpose().array()) - st.log_partition;
}

double log_likelihood(std::span<const Example> batch, const ModelParams& params,
                      const Eigen::MatrixXd& tag_features, ModelKind kind) {
  if (batch.empty()) throw DataError("empty batch");
  double total = 0.0;
  for (const auto& ex : batch) total += token_log_likelihood(ex, params, tag_features, kind);
  return total;
}

// ---------------------------------------------------------------- gradients
//
// For every token the gradient is (observed features) - (expected features
// under the model). Unlabeled tokens replace the observed tag by its
// posterior expectation.

double accumulate_gradient(const Example& ex, const ModelParams& params,
                           const Eigen::MatrixXd& tag_features, ModelKind kind,
                           ModelParams& grad) {
  check_word(ex.word, params);
  const auto& Q = params.target_embeddings;
  const Eigen::Index w = ex.word;

  Eigen::VectorXd dcontext;
  double ll = 0.0;

  if (kind == ModelKind::kLbl) {
    check_history(ex.history, params);
    Eigen::VectorXd c = context_vector(ex.history, params);
    Eigen::ArrayXd s = (Q * c + params.bias).array();
    const double lse = log_sum_exp(s);
    ll = s(w) - lse;
    Eigen::VectorXd p = (s - lse).exp().matrix();

    grad.target_embeddings.row(w) += c.transpose();
    grad.target_embeddings.noalias() -= p * c.transpose();
    grad.bias(w) += 1.0;
    grad.bias -= p;
    dcontext = Q.row(w).transpose() - Q.transpose() * p;
  } else {
    auto st = joint_state(ex.history, params, tag_features);
    const Eigen::Index num_tags = tag_features.rows();
    Eigen::MatrixXd joint = (st.scores.array() - st.log_partition).exp().matrix();
    Eigen::VectorXd marginal = joint.rowwise().sum();

    Eigen::VectorXd observed_tags = Eigen::VectorXd::Zero(num_tags);
    if (ex.tag != kNoTag) {
      if (ex.tag < 0 || ex.tag >= num_tags) throw DataError("tag id out of range");
      observed_tags(ex.tag) = 1.0;
      ll = st.scores(w, ex.tag) - st.log_partition;
    } else {
      Eigen::ArrayXd row = st.scores.row(w).transpose().array();
      const double lse = log_sum_exp(row);
      observed_tags = (row - lse).exp().matrix();
      ll = lse - st.log_partition;
    }

    grad.target_embeddings.row(w) +=
        (st.tag_vectors.transpose() * observed_tags + st.context).transpose();
    grad.target_embeddings.noalias() -= joint * st.tag_vectors;
    grad.target_embeddings.noalias() -= marginal * st.context.transpose();
    grad.bias(w) += 1.0;
    grad.bias -= marginal;

    Eigen::MatrixXd dtag = observed_tags * Q.row(w);
    dtag.noalias() -= joint.transpose() * Q;
    grad.subtag_weights.noalias() += tag_features.transpose() * dtag;

    dcontext = Q.row(w).transpose() - Q.transpose() * marginal;
  }

  for (std::size_t i = 0; i < ex.history.size(); ++i) {
    const auto h = ex.history[i];
    grad.context_weights[i].noalias() +=
        dcontext * params.context_embeddings.row(h);
    grad.context_embeddings.row(h).noalias() +=
        (params.context_weights[i].transpose() * dcontext).transpose();
  }
  return ll;
}

ModelParams gradients(std::span<const Example> batch, const ModelParams& params,
                      const Eigen::MatrixXd& tag_features, ModelKind kind) {
  if (batch.empty()) throw DataError("empty batch");
  auto grad = ModelParams::zeros(params.num_words(), params.num_subtags(), params.dim,
                                 params.order);
  for (const auto& ex : batch) accumulate_gradient(ex, params, tag_features, kind, grad);
  return grad;
}

}  // namespace morphlbl
