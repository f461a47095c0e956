#include "morphlbl/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "morphlbl/error.hpp"
#include "morphlbl/io_util.hpp"

namespace morphlbl {

void TrainConfig::validate() const {
  if (order < 2) throw UsageError("order must be >= 2");
  if (dim < 1) throw UsageError("dim must be >= 1");
  if (epochs < 0) throw UsageError("epochs must be >= 0");
  if (batch_size < 1) throw UsageError("batch size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw UsageError("learning rate must be positive");
  }
  if (decay_steps < 0) throw UsageError("decay steps must be >= 0");
  if (!(init_scale >= 0.0)) throw UsageError("init scale must be >= 0");
}

std::string to_string(ModelKind kind) {
  return kind == ModelKind::kLbl ? "lbl" : "morph-lbl";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "lbl") return ModelKind::kLbl;
  if (text == "morph-lbl") return ModelKind::kMorphLbl;
  throw UsageError("unknown mode '" + text + "' (expected lbl or morph-lbl)");
}

std::string format_train_report(const TrainReport& report) {
  std::string out = "epoch\tnll_labeled\tnll_unlabeled\tnll_total\n";
  for (const auto& e : report.epochs) {
    out += std::to_string(e.epoch) + '\t' + format_fixed(e.nll_labeled, 9) + '\t' +
           format_fixed(e.nll_unlabeled, 9) + '\t' + format_fixed(e.nll_total, 9) + '\n';
  }
  return out;
}

Corpus mask_labels(const Corpus& corpus, std::size_t labeled_prefix) {
  if (labeled_prefix > corpus.token_count()) {
    throw UsageError("labeled prefix exceeds token count");
  }
  Corpus out = corpus;
  std::size_t seen = 0;
  for (auto& s : out.sentences) {
    for (auto& tok : s) {
      if (seen++ >= labeled_prefix) tok.tag = kNoTag;
    }
  }
  return out;
}

std::vector<Example> build_examples(const Corpus& corpus, int order, WordId bos) {
  std::vector<Example> out;
  out.reserve(corpus.token_count());
  for (const auto& s : corpus.sentences) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out.push_back({history_at(s, i, order, bos), s[i].word, s[i].tag});
    }
  }
  return out;
}

void sgd_step(ModelParams& params, const ModelParams& grads, double learning_rate) {
  if (!std::isfinite(learning_rate) || learning_rate < 0.0) {
    throw NumericError("invalid learning rate " + format_double(learning_rate));
  }
  if (!grads.all_finite()) throw NumericError("non-finite gradient");
  params.add_scaled(grads, learning_rate);
  if (!params.all_finite()) throw NumericError("update produced non-finite parameters");
}

namespace {

void finish(EpochStats& st, double sum_labeled, double sum_unlabeled) {
  st.nll_labeled = st.labeled_tokens ? sum_labeled / static_cast<double>(st.labeled_tokens) : 0.0;
  st.nll_unlabeled =
      st.unlabeled_tokens ? sum_unlabeled / static_cast<double>(st.unlabeled_tokens) : 0.0;
  const auto total = st.labeled_tokens + st.unlabeled_tokens;
  st.nll_total = total ? (sum_labeled + sum_unlabeled) / static_cast<double>(total) : 0.0;
}

bool counts_as_labeled(const Example& ex, ModelKind kind) {
  return kind == ModelKind::kMorphLbl && ex.tag != kNoTag;
}

}  // namespace

EpochStats evaluate_nll(std::span<const Example> examples, const ModelParams& params,
                        const Eigen::MatrixXd& tag_features, ModelKind kind) {
  EpochStats st;
  double sum_l = 0.0, sum_u = 0.0;
  for (const auto& ex : examples) {
    double nll = -token_log_likelihood(ex, params, tag_features, kind);
    if (counts_as_labeled(ex, kind)) {
      sum_l += nll;
      ++st.labeled_tokens;
    } else {
      sum_u += nll;
      ++st.unlabeled_tokens;
    }
  }
  finish(st, sum_l, sum_u);
  return st;
}

EpochStats uniform_nll(std::span<const Example> examples, int num_words, int num_tags,
                       ModelKind kind) {
  EpochStats st;
  for (const auto& ex : examples) {
    if (counts_as_labeled(ex, kind)) {
      ++st.labeled_tokens;
    } else {
      ++st.unlabeled_tokens;
    }
  }
  const double lv = std::log(static_cast<double>(num_words));
  const double lvt = std::log(static_cast<double>(num_words) * num_tags);
  finish(st, lvt * static_cast<double>(st.labeled_tokens),
         lv * static_cast<double>(st.unlabeled_tokens));
  return st;
}

TrainResult train(const Corpus& corpus, const TrainConfig& config, const TagInventory& inventory,
                  WordId num_words) {
  config.validate();
  if (corpus.token_count() == 0) throw DataError("cannot train on an empty corpus");
  const auto start = std::chrono::steady_clock::now();

  const Corpus masked =
      config.labeled_prefix ? mask_labels(corpus, *config.labeled_prefix) : corpus;
  const WordId bos = num_words;
  std::vector<Example> examples = build_examples(masked, config.order, bos);
  if (config.mode == ModelKind::kMorphLbl && inventory.size() == 0) {
    throw DataError("morph-lbl training needs at least one tag");
  }
  const Eigen::MatrixXd features = tag_feature_matrix(inventory);

  std::mt19937_64 init_rng(config.seed);
  const bool zero_subtags = config.freeze_subtags || config.mode == ModelKind::kLbl;
  TrainResult result{ModelParams::random(num_words, inventory.num_subtags(), config.dim,
                                         config.order, init_rng, config.init_scale, zero_subtags),
                     {}};
  auto& params = result.params;

  // Separate stream so the visiting order does not depend on how many draws
  // initialization consumed.
  std::mt19937_64 order_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> visit(examples.size());
  std::iota(visit.begin(), visit.end(), std::size_t{0});

  const auto batch = static_cast<std::size_t>(config.batch_size);
  const std::int64_t steps_per_epoch =
      static_cast<std::int64_t>((examples.size() + batch - 1) / batch);
  const double decay = static_cast<double>(config.decay_steps ? config.decay_steps
                                                               : steps_per_epoch);

  auto grad = ModelParams::zeros(num_words, inventory.num_subtags(), config.dim, config.order);
  std::int64_t step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(visit.begin(), visit.end(), order_rng);
    EpochStats st;
    st.epoch = epoch;
    double sum_l = 0.0, sum_u = 0.0;
    for (std::size_t begin = 0; begin < visit.size(); begin += batch) {
      const double lr = config.learning_rate / (1.0 + static_cast<double>(step) / decay);
      grad.set_zero();
      const std::size_t end = std::min(visit.size(), begin + batch);
      for (std::size_t i = begin; i < end; ++i) {
        const Example& ex = examples[visit[i]];
        const double ll = accumulate_gradient(ex, params, features, config.mode, grad);
        if (!std::isfinite(ll)) {
          throw NumericError("non-finite loss at step " + std::to_string(step) +
                             " (lr=" + format_double(lr) + ")");
        }
        if (counts_as_labeled(ex, config.mode)) {
          sum_l -= ll;
          ++st.labeled_tokens;
        } else {
          sum_u -= ll;
          ++st.unlabeled_tokens;
        }
      }
      if (zero_subtags) grad.subtag_weights.setZero();
      try {
        sgd_step(params, grad, lr);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at step " + std::to_string(step) +
                           " (lr=" + format_double(lr) + ")");
      }
      ++step;
    }
    finish(st, sum_l, sum_u);
    result.report.epochs.push_back(st);
  }

  if (!config.checkpoint_path.empty()) {
    write_file_atomic(config.checkpoint_path, format_model(params, inventory.size()));
    result.report.checkpoint_path = config.checkpoint_path;
  }
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace morphlbl
