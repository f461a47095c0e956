#include "morphlbl/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "morphlbl/corpus.hpp"
#include "morphlbl/error.hpp"
#include "morphlbl/eval.hpp"
#include "morphlbl/io_util.hpp"
#include "morphlbl/model.hpp"
#include "morphlbl/synthgen.hpp"
#include "morphlbl/training.hpp"

namespace morphlbl {

namespace {

std::string vocab_sidecar(const std::string& model) { return model + ".vocab.tsv"; }
std::string tags_sidecar(const std::string& model) { return model + ".tags.tsv"; }

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

// Everything an evaluation command needs, aligned on one vocabulary.
struct EvalInputs {
  Vocabulary vocab;
  TagInventory inventory;
  EmbeddingTable table;
  std::vector<std::map<TagId, std::int64_t>> tag_counts;
  std::vector<std::int64_t> labeled;  // labeled occurrences seen in training
};

struct SourceOptions {
  std::string model;
  std::string embeddings;
  std::string corpus;
  int min_count = 1;
};

void add_source_options(CLI::App* cmd, SourceOptions& opts) {
  cmd->add_option("--model", opts.model, "Trained model file (sidecars <model>.vocab.tsv/.tags.tsv)");
  cmd->add_option("--embeddings", opts.embeddings, "External embeddings TSV (word<TAB>v1..vd)");
  cmd->add_option("--corpus", opts.corpus, "Annotated corpus supplying parses and labels");
  cmd->add_option("--min-count", opts.min_count, "Rare-word threshold used when the corpus was ingested")
      ->capture_default_str();
}

EvalInputs load_inputs(const SourceOptions& opts) {
  if (opts.model.empty() == opts.embeddings.empty()) {
    throw UsageError("exactly one of --model or --embeddings is required");
  }
  EvalInputs in;
  std::optional<ParsedCorpus> parsed;
  if (!opts.corpus.empty()) parsed = parse_corpus(opts.corpus, IngestConfig{"_", opts.min_count});

  if (!opts.model.empty()) {
    auto model_in = open_input(opts.model);
    auto model = parse_model(model_in);
    auto vocab_in = open_input(vocab_sidecar(opts.model));
    auto vocab_file = parse_vocabulary(vocab_in);
    auto tags_in = open_input(tags_sidecar(opts.model));
    in.inventory = parse_tag_inventory(tags_in);
    in.vocab = std::move(vocab_file.vocab);
    in.labeled = std::move(vocab_file.labeled);
    in.tag_counts = std::move(vocab_file.tag_counts);
    if (in.vocab.size() != model.params.num_words() || in.inventory.size() != model.num_tags ||
        in.inventory.num_subtags() != model.params.num_subtags()) {
      throw DataError("dimension mismatch between model file and its vocabulary/tag files");
    }
    in.table = EmbeddingTable::from_model(model.params, in.vocab);
    if (parsed) {
      if (parsed->vocab.words() != in.vocab.words()) {
        throw DataError("corpus vocabulary does not match the model vocabulary");
      }
      if (parsed->inventory.tags() != in.inventory.tags()) {
        throw DataError("corpus tag set does not match the model tag set");
      }
      in.tag_counts = parsed->corpus.tag_counts;
    }
  } else {
    if (!parsed) throw UsageError("--embeddings requires --corpus");
    auto emb_in = open_input(opts.embeddings);
    in.table = align_embeddings(parse_embeddings(emb_in), parsed->vocab);
    in.vocab = parsed->vocab;
    in.inventory = parsed->inventory;
    in.tag_counts = parsed->corpus.tag_counts;
    in.labeled = parsed->corpus.labeled_occurrences(parsed->vocab.size());
  }
  return in;
}

void print_config(std::ostream& out, const CLI::App* cmd) {
  out << "# " << cmd->get_name() << '\n';
  std::istringstream lines(cmd->config_to_str(true, false));
  for (std::string line; std::getline(lines, line);) {
    if (!line.empty()) out << "#   " << line << '\n';
  }
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& part : split(text, ',')) {
    if (trim(part).empty()) continue;
    out.push_back(static_cast<int>(parse_int(part)));
  }
  if (out.empty()) throw UsageError("empty list '" + text + "'");
  return out;
}

// Fills options not given on the command line from a key=value file.
void apply_config_file(CLI::App* cmd, const std::string& path) {
  auto in = open_input(path);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    throw DataError(path + ": " + e.what());
  }
  for (const auto& item : items) {
    if (item.name.empty() || item.name == "++" || item.name == "--") continue;
    auto* opt = cmd->get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "config") {
      throw UsageError(path + ": unknown key '" + item.fullname() + "'");
    }
    if (opt->count() > 0) continue;
    try {
      opt->add_result(item.inputs);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError(path + ": " + item.name + ": " + e.what());
    }
  }
}

std::string one_line(std::string text) {
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Morphologically guided log-bilinear word embeddings", "morphlbl"};
  app.require_subcommand(1);

  // synth
  SynthSpec spec;
  std::string spec_path, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic tagged corpus");
  synth->add_option("--spec", spec_path, "key=value spec file (flags below override it)");
  synth->add_option("--out", synth_out, "Output corpus path")->required();
  synth->add_option("--seed", spec.seed, "Random seed")->capture_default_str();
  synth->add_option("--tokens", spec.token_count, "Token count")->capture_default_str();
  synth->add_option("--types", spec.vocab_size, "Word types")->capture_default_str();
  synth->add_option("--noise", spec.noise, "Slot noise rate")->capture_default_str();
  synth->add_option("--ambiguity", spec.ambiguity, "Fraction of types with two tags")
      ->capture_default_str();
  synth->add_option("--late-fraction", spec.late_fraction,
                    "Fraction of types that only appear after the onset")
      ->capture_default_str();
  synth->add_option("--late-onset", spec.late_onset, "Onset as a fraction of the tokens")
      ->capture_default_str();
  synth->add_option("--zipf", spec.zipf, "Rank-frequency exponent within each tag")
      ->capture_default_str();
  synth->add_option("--topics", spec.topics, "Sentence topics over adjectives and nouns")
      ->capture_default_str();
  synth->add_option("--topic-coherence", spec.topic_coherence,
                    "Probability a content slot stays on the sentence topic")
      ->capture_default_str();

  // train
  TrainConfig tc;
  tc.dim = 200;
  std::string mode = "morph-lbl", corpus_path, model_out, report_out;
  long long labeled_prefix = -1;
  int train_min_count = 1;
  auto* train_cmd = app.add_subcommand("train", "Train an LBL or Morph-LBL model");
  std::string train_config;
  train_cmd->add_option("--config", train_config, "key=value config file (flags given on the command line win)");
  train_cmd->add_option("--corpus", corpus_path, "Annotated corpus (word<TAB>tag)")->required();
  train_cmd->add_option("--mode", mode, "lbl or morph-lbl")
      ->check(CLI::IsMember({"lbl", "morph-lbl"}))
      ->capture_default_str();
  train_cmd->add_option("--epochs", tc.epochs, "Training epochs")->capture_default_str();
  train_cmd->add_option("--dim", tc.dim, "Embedding dimensionality")->capture_default_str();
  train_cmd->add_option("--order", tc.order, "Model order n (history n-1)")->capture_default_str();
  train_cmd->add_option("--lr", tc.learning_rate, "Initial learning rate")->capture_default_str();
  train_cmd->add_option("--decay-steps", tc.decay_steps, "Rate halves after this many steps (0 = one epoch)")
      ->capture_default_str();
  train_cmd->add_option("--batch-size", tc.batch_size, "Tokens per SGD step")->capture_default_str();
  train_cmd->add_option("--seed", tc.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--labeled-prefix", labeled_prefix,
                        "Keep tags on the first N tokens only (-1 = keep all)")
      ->capture_default_str();
  train_cmd->add_option("--init-scale", tc.init_scale, "Uniform init half-width")->capture_default_str();
  train_cmd->add_flag("--freeze-subtags", tc.freeze_subtags, "Hold sub-tag weights at zero");
  train_cmd->add_option("--min-count", train_min_count, "Map rarer words to <unk>")->capture_default_str();
  train_cmd->add_option("--out", model_out, "Model output path")->required();
  train_cmd->add_option("--report", report_out, "Loss report TSV (default <out>.report.tsv)");

  // eval-morphosim
  SourceOptions ms_src;
  std::string ks_text = "5,10,25,50", filter = "unseen-only", ms_out = "morphosim.tsv";
  auto* ms = app.add_subcommand("eval-morphosim", "MorphoSim curve over neighborhood sizes");
  add_source_options(ms, ms_src);
  ms->add_option("--ks", ks_text, "Comma-separated neighborhood sizes")->capture_default_str();
  ms->add_option("--filter", filter, "all or unseen-only")
      ->check(CLI::IsMember({"all", "unseen-only"}))
      ->capture_default_str();
  ms->add_option("--out", ms_out, "Output TSV")->capture_default_str();

  // eval-knn
  SourceOptions knn_src;
  KnnConfig kc;
  std::string grid_text = "1,3,5,9,15", knn_out = "knn.tsv";
  auto* knn = app.add_subcommand("eval-knn", "Cross-validated k-NN tag classification");
  add_source_options(knn, knn_src);
  knn->add_option("--folds", kc.folds, "Cross-validation folds")->capture_default_str();
  knn->add_option("--seed", kc.seed, "Shuffle and tie-break seed")->capture_default_str();
  knn->add_option("--k-grid", grid_text, "Candidate k values")->capture_default_str();
  knn->add_option("--out", knn_out, "Output TSV")->capture_default_str();

  // neighbors
  SourceOptions nb_src;
  std::vector<std::string> query_words;
  int nb_k = 5;
  std::string nb_out;
  auto* nb = app.add_subcommand("neighbors", "Cosine nearest neighbors with min-Hamming distances");
  add_source_options(nb, nb_src);
  nb->add_option("--word", query_words, "Query word (repeatable; default every tagged word)");
  nb->add_option("--k", nb_k, "Neighbors per word")->capture_default_str();
  nb->add_option("--out", nb_out, "Output TSV (default stdout)");

  // project
  SourceOptions pj_src;
  std::uint64_t pj_seed = 1;
  std::string pj_out = "projection.tsv";
  auto* pj = app.add_subcommand("project", "2-D PCA projection for plotting");
  add_source_options(pj, pj_src);
  pj->add_option("--seed", pj_seed, "Tie-break seed for the most frequent tag")->capture_default_str();
  pj->add_option("--out", pj_out, "Output TSV")->capture_default_str();

  // inspect
  std::string inspect_model;
  auto* inspect = app.add_subcommand("inspect", "Print model dimensions and parameter norms");
  inspect->add_option("--model", inspect_model, "Model file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: usage: " << one_line(e.what()) << '\n';
    return kExitUsage;
  }

  try {
    if (synth->parsed()) {
      if (!spec_path.empty()) {
        // Flags given explicitly win over the file.
        auto file_in = open_input(spec_path);
        SynthSpec from_file = parse_synth_spec(file_in);
        auto take = [&](const char* flag, auto& field, const auto& file_value) {
          if (synth->count(flag) == 0) field = file_value;
        };
        take("--seed", spec.seed, from_file.seed);
        take("--tokens", spec.token_count, from_file.token_count);
        take("--types", spec.vocab_size, from_file.vocab_size);
        take("--noise", spec.noise, from_file.noise);
        take("--ambiguity", spec.ambiguity, from_file.ambiguity);
        take("--late-fraction", spec.late_fraction, from_file.late_fraction);
        take("--late-onset", spec.late_onset, from_file.late_onset);
        take("--zipf", spec.zipf, from_file.zipf);
        take("--topics", spec.topics, from_file.topics);
        take("--topic-coherence", spec.topic_coherence, from_file.topic_coherence);
        spec.cases = from_file.cases;
        spec.numbers = from_file.numbers;
        spec.templates = from_file.templates;
        spec.min_sentence_length = from_file.min_sentence_length;
        spec.max_sentence_length = from_file.max_sentence_length;
      }
      spec.validate();
      out << "# synth\n";
      std::istringstream lines(format_synth_spec(spec));
      for (std::string line; std::getline(lines, line);) out << "#   " << line << '\n';
      write_file_atomic(synth_out, generate(spec));
      out << "wrote " << synth_out << '\n';
      return kExitOk;
    }

    if (train_cmd->parsed()) {
      if (!train_config.empty()) apply_config_file(train_cmd, train_config);
      tc.mode = parse_model_kind(mode);
      if (labeled_prefix >= 0) tc.labeled_prefix = static_cast<std::size_t>(labeled_prefix);
      if (report_out.empty()) report_out = model_out + ".report.tsv";
      tc.validate();
      print_config(out, train_cmd);
      auto parsed = parse_corpus(corpus_path, IngestConfig{"_", train_min_count});
      if (tc.labeled_prefix && *tc.labeled_prefix > parsed.corpus.token_count()) {
        throw UsageError("--labeled-prefix exceeds the corpus token count " +
                         std::to_string(parsed.corpus.token_count()));
      }
      auto result = train(parsed.corpus, tc, parsed.inventory, parsed.vocab.size());
      const Corpus masked = tc.labeled_prefix ? mask_labels(parsed.corpus, *tc.labeled_prefix)
                                              : parsed.corpus;
      auto labeled = masked.labeled_occurrences(parsed.vocab.size());
      write_file_atomic(model_out, format_model(result.params, parsed.inventory.size()));
      write_file_atomic(vocab_sidecar(model_out),
                        format_vocabulary(parsed.vocab, &parsed.corpus, &labeled));
      write_file_atomic(tags_sidecar(model_out), format_tag_inventory(parsed.inventory));
      write_file_atomic(report_out, format_train_report(result.report));
      for (const auto& e : result.report.epochs) {
        out << "epoch " << e.epoch << " nll_total " << format_fixed(e.nll_total, 6) << '\n';
      }
      out << "wrote " << model_out << '\n';
      return kExitOk;
    }

    if (ms->parsed()) {
      print_config(out, ms);
      auto in = load_inputs(ms_src);
      const auto parses = parse_sets_from_counts(in.tag_counts);
      std::vector<bool> unseen;
      if (filter == "unseen-only") unseen = unseen_types(parses, in.labeled);
      auto curve = morphosim_curve(in.table, parses, in.inventory, parse_int_list(ks_text),
                                   filter == "unseen-only" ? &unseen : nullptr);
      write_file_atomic(ms_out, format_morphosim_tsv(curve));
      out << "wrote " << ms_out << '\n';
      return kExitOk;
    }

    if (knn->parsed()) {
      kc.k_grid = parse_int_list(grid_text);
      print_config(out, knn);
      auto in = load_inputs(knn_src);
      const auto parses = parse_sets_from_counts(in.tag_counts);
      auto result = knn_tag_accuracy(in.table, most_frequent_tags(in.tag_counts, kc.seed),
                                     unseen_types(parses, in.labeled), kc);
      if (result.degenerate) warn("only one distinct label; accuracy is trivially 1");
      write_file_atomic(knn_out, format_knn_tsv(result));
      out << "wrote " << knn_out << '\n';
      return kExitOk;
    }

    if (nb->parsed()) {
      print_config(out, nb);
      auto in = load_inputs(nb_src);
      const auto parses = parse_sets_from_counts(in.tag_counts);
      std::vector<WordId> queries;
      for (const auto& w : query_words) queries.push_back(in.vocab.id(w));
      if (query_words.empty()) {
        for (WordId w = 0; w < in.vocab.size(); ++w) {
          if (!parses[static_cast<std::size_t>(w)].empty()) queries.push_back(w);
        }
      }
      std::vector<NeighborRow> rows;
      for (WordId q : queries) {
        int rank = 0;
        for (const auto& n : cosine_knn(q, nb_k, in.table)) {
          const bool both = !parses[static_cast<std::size_t>(q)].empty() &&
                            !parses[static_cast<std::size_t>(n.word)].empty();
          rows.push_back({in.vocab.word(q), ++rank, in.vocab.word(n.word), n.distance,
                          both ? min_hamming(q, n.word, parses, in.inventory) : -1});
        }
      }
      const auto text = format_neighbors_tsv(rows);
      if (nb_out.empty()) {
        out << text;
      } else {
        write_file_atomic(nb_out, text);
        out << "wrote " << nb_out << '\n';
      }
      return kExitOk;
    }

    if (pj->parsed()) {
      print_config(out, pj);
      auto in = load_inputs(pj_src);
      auto projection = project_2d(in.table);
      write_file_atomic(pj_out, format_projection_tsv(in.table, projection,
                                                      most_frequent_tags(in.tag_counts, pj_seed),
                                                      in.inventory));
      out << "wrote " << pj_out << '\n';
      return kExitOk;
    }

    if (inspect->parsed()) {
      print_config(out, inspect);
      auto model_in = open_input(inspect_model);
      auto model = parse_model(model_in);
      const auto& p = model.params;
      out << "words\t" << p.num_words() << '\n'
          << "tags\t" << model.num_tags << '\n'
          << "subtags\t" << p.num_subtags() << '\n'
          << "dim\t" << p.dim << '\n'
          << "order\t" << p.order << '\n';
      for (std::size_t i = 0; i < p.context_weights.size(); ++i) {
        out << "norm.context_weights[" << i << "]\t"
            << format_fixed(p.context_weights[i].norm(), 6) << '\n';
      }
      out << "norm.context_embeddings\t" << format_fixed(p.context_embeddings.norm(), 6) << '\n'
          << "norm.target_embeddings\t" << format_fixed(p.target_embeddings.norm(), 6) << '\n'
          << "norm.bias\t" << format_fixed(p.bias.norm(), 6) << '\n'
          << "norm.subtag_weights\t" << format_fixed(p.subtag_weights.norm(), 6) << '\n';
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.code() << ": " << one_line(e.what()) << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.code() << ": " << one_line(e.what()) << '\n';
    return kExitData;
  } catch (const NumericError& e) {
    err << "error: " << e.code() << ": " << one_line(e.what()) << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: internal: " << one_line(e.what()) << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace morphlbl
