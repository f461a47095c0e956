#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "morphlbl/corpus.hpp"

namespace morphlbl {

// Parameters of the log-bilinear model and its tag-augmented extension.
//
// Word ids index rows [0, num_words()) of every per-word block. The context
// embedding table has one extra row at index num_words() for the history
// padding symbol, which is never a prediction target.
struct ModelParams {
  int order = 4;
  int dim = 0;
  std::vector<Eigen::MatrixXd> context_weights;  // order-1 matrices, dim x dim
  Eigen::MatrixXd context_embeddings;            // (num_words+1) x dim
  Eigen::MatrixXd target_embeddings;             // num_words x dim
  Eigen::VectorXd bias;                          // num_words
  Eigen::MatrixXd subtag_weights;                // num_subtags x dim

  static ModelParams zeros(int num_words, int num_subtags, int dim, int order);

  // Weights uniform in [-scale, scale]; biases zero. When `zero_subtags` is
  // set the sub-tag block stays at zero and consumes no random draws, so the
  // remaining blocks match an initialization with the same seed.
  static ModelParams random(int num_words, int num_subtags, int dim, int order,
                            std::mt19937_64& rng, double scale = 0.05,
                            bool zero_subtags = false);

  int num_words() const { return static_cast<int>(target_embeddings.rows()); }
  int num_subtags() const { return static_cast<int>(subtag_weights.rows()); }
  int history_length() const { return order - 1; }
  WordId bos() const { return static_cast<WordId>(num_words()); }

  bool all_finite() const;
  bool same_shape(const ModelParams& other) const;

  // this += scale * other
  void add_scaled(const ModelParams& other, double scale);
  void set_zero();
  double squared_norm() const;
};

// Rows are tags, columns sub-tags: the stacked bit vectors of an inventory.
Eigen::MatrixXd tag_feature_matrix(const TagInventory& inventory);

enum class ModelKind { kLbl, kMorphLbl };

// One prediction event: history, target word, and its tag (or kNoTag).
struct Example {
  std::vector<WordId> history;
  WordId word = 0;
  TagId tag = kNoTag;
};

Eigen::VectorXd context_vector(std::span<const WordId> history, const ModelParams& params);

double score_lbl(WordId word, std::span<const WordId> history, const ModelParams& params);

double score_joint(WordId word, TagId tag, std::span<const WordId> history,
                   const ModelParams& params, const Eigen::MatrixXd& tag_features);

// Word distribution of the plain log-bilinear model.
Eigen::VectorXd lbl_distribution(std::span<const WordId> history, const ModelParams& params);

// num_words x num_tags table of p(w, t | h), normalized over all cells.
Eigen::MatrixXd joint_distribution(std::span<const WordId> history, const ModelParams& params,
                                   const Eigen::MatrixXd& tag_features);

// p(w | h) with the tag summed out.
Eigen::VectorXd marginal_word_distribution(std::span<const WordId> history,
                                           const ModelParams& params,
                                           const Eigen::MatrixXd& tag_features);

// p(t | w, h). Context and bias cancel, so the result depends only on w.
Eigen::VectorXd tag_posterior(WordId word, std::span<const WordId> history,
                              const ModelParams& params, const Eigen::MatrixXd& tag_features);

// Per-token log-probability. Labeled tokens under kMorphLbl score
// log p(w, t | h); unlabeled tokens score log sum_t p(w, t | h). Under kLbl
// every token scores log p(w | h) and tags are ignored.
double token_log_likelihood(const Example& example, const ModelParams& params,
                            const Eigen::MatrixXd& tag_features, ModelKind kind);

double log_likelihood(std::span<const Example> batch, const ModelParams& params,
                      const Eigen::MatrixXd& tag_features,
                      ModelKind kind = ModelKind::kMorphLbl);

// Adds the gradient of one token's log-likelihood into `grad` (which must
// have the shape of `params`) and returns that log-likelihood.
double accumulate_gradient(const Example& example, const ModelParams& params,
                           const Eigen::MatrixXd& tag_features, ModelKind kind,
                           ModelParams& grad);

// Gradient of log_likelihood(batch) with respect to every parameter block.
ModelParams gradients(std::span<const Example> batch, const ModelParams& params,
                      const Eigen::MatrixXd& tag_features,
                      ModelKind kind = ModelKind::kMorphLbl);

// ------------------------------------------------------------ serialization

struct ModelFile {
  ModelParams params;
  int num_tags = 0;
};

// Text format: `#morphlbl-model v1`, a dimensions line
// `num_words num_tags num_subtags dim order`, then each block as rows of
// decimals in the order context_weights, context_embeddings,
// target_embeddings, bias, subtag_weights. Values round-trip exactly.
std::string format_model(const ModelParams& params, int num_tags);
ModelFile parse_model(std::istream& in);

}  // namespace morphlbl
