#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "morphlbl/corpus.hpp"
#include "morphlbl/model.hpp"

namespace morphlbl {

struct TrainConfig {
  ModelKind mode = ModelKind::kMorphLbl;
  int order = 4;
  int dim = 200;
  int epochs = 5;
  int batch_size = 1;
  double learning_rate = 0.1;
  // Steps after which the rate has halved; 0 means one epoch of steps.
  std::int64_t decay_steps = 0;
  std::uint64_t seed = 1;
  // Tokens beyond this prefix lose their tag before training. nullopt keeps
  // the corpus annotation as is.
  std::optional<std::size_t> labeled_prefix;
  double init_scale = 0.05;
  // Keep the sub-tag weights at zero throughout training.
  bool freeze_subtags = false;
  bool shuffle = true;
  // Written after the final epoch when non-empty.
  std::string checkpoint_path;

  void validate() const;  // throws UsageError
};

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

struct EpochStats {
  int epoch = 0;
  double nll_labeled = 0.0;    // mean -log p(w,t|h) over labeled tokens
  double nll_unlabeled = 0.0;  // mean -log p(w|h) over unlabeled tokens
  double nll_total = 0.0;      // mean over all tokens
  std::size_t labeled_tokens = 0;
  std::size_t unlabeled_tokens = 0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  double wall_seconds = 0.0;
  std::string checkpoint_path;
};

// TSV: `epoch<TAB>nll_labeled<TAB>nll_unlabeled<TAB>nll_total`.
std::string format_train_report(const TrainReport& report);

struct TrainResult {
  ModelParams params;
  TrainReport report;
};

// Copy of `corpus` whose tokens after the first `labeled_prefix` (in reading
// order) carry no tag. Annotation statistics are kept for evaluation.
Corpus mask_labels(const Corpus& corpus, std::size_t labeled_prefix);

// One example per token, histories BOS-padded, in reading order.
std::vector<Example> build_examples(const Corpus& corpus, int order, WordId bos);

// params += learning_rate * grads (gradient ascent on the log-likelihood).
void sgd_step(ModelParams& params, const ModelParams& grads, double learning_rate);

// Mean negative log-likelihood of `examples` under `params`, split into the
// labeled and unlabeled terms. Under kLbl every token counts as unlabeled.
EpochStats evaluate_nll(std::span<const Example> examples, const ModelParams& params,
                        const Eigen::MatrixXd& tag_features, ModelKind kind);

// Same statistics for a model that puts equal mass on every outcome.
EpochStats uniform_nll(std::span<const Example> examples, int num_words, int num_tags,
                       ModelKind kind);

TrainResult train(const Corpus& corpus, const TrainConfig& config, const TagInventory& inventory,
                  WordId num_words);

}  // namespace morphlbl
