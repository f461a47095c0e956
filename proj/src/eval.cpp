#include "morphlbl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

#include "morphlbl/error.hpp"
#include "morphlbl/io_util.hpp"

namespace morphlbl {

EmbeddingTable EmbeddingTable::from_model(const ModelParams& params, const Vocabulary& vocab) {
  if (vocab.size() != params.num_words()) {
    throw DataError("vocabulary has " + std::to_string(vocab.size()) + " words, model has " +
                    std::to_string(params.num_words()));
  }
  return {params.target_embeddings, vocab.words()};
}

EmbeddingTable parse_embeddings(std::istream& in) {
  std::vector<std::vector<double>> rows;
  EmbeddingTable table;
  std::string line;
  int line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() < 2) {
      throw DataError("embeddings line " + std::to_string(line_no) + ": no vector values");
    }
    if (dim == 0) dim = fields.size() - 1;
    if (fields.size() - 1 != dim) {
      throw DataError("embeddings line " + std::to_string(line_no) + ": expected " +
                      std::to_string(dim) + " values");
    }
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) row.push_back(parse_double(fields[i]));
    table.words.push_back(fields[0]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("embedding file is empty");
  table.vectors.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      table.vectors(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  if (!table.vectors.allFinite()) throw DataError("embedding file contains non-finite values");
  return table;
}

EmbeddingTable align_embeddings(const EmbeddingTable& table, const Vocabulary& vocab) {
  std::unordered_map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < table.words.size(); ++i) {
    row_of.emplace(table.words[i], static_cast<Eigen::Index>(i));
  }
  EmbeddingTable out;
  out.words = vocab.words();
  out.vectors = Eigen::MatrixXd::Zero(vocab.size(), table.dim());
  int missing = 0;
  for (WordId w = 0; w < vocab.size(); ++w) {
    auto it = row_of.find(vocab.word(w));
    if (it == row_of.end()) {
      ++missing;
    } else {
      out.vectors.row(w) = table.vectors.row(it->second);
    }
  }
  if (missing) warn(std::to_string(missing) + " vocabulary words have no embedding");
  return out;
}

ParseSets parse_sets_from_counts(const std::vector<std::map<TagId, std::int64_t>>& tag_counts) {
  ParseSets out(tag_counts.size());
  for (std::size_t w = 0; w < tag_counts.size(); ++w) {
    for (const auto& [t, c] : tag_counts[w]) {
      if (c > 0) out[w].push_back(t);
    }
  }
  return out;
}

// ------------------------------------------------------------ neighbors

namespace {

void check_word(const EmbeddingTable& table, WordId w) {
  if (w < 0 || w >= table.size()) throw DataError("word id out of range for embedding table");
}

Eigen::VectorXd row_norms(const EmbeddingTable& table) {
  return table.vectors.rowwise().norm();
}

// Candidates ranked by (distance, id) against query row `query`.
std::vector<Neighbor> rank_candidates(const EmbeddingTable& table, const Eigen::VectorXd& norms,
                                      WordId query, const std::vector<WordId>& candidates) {
  const double qn = norms(query);
  std::vector<Neighbor> ranked;
  ranked.reserve(candidates.size());
  for (WordId c : candidates) {
    if (c == query) continue;
    const double cn = norms(c);
    if (cn == 0.0) continue;
    const double cosine = table.vectors.row(query).dot(table.vectors.row(c)) / (qn * cn);
    ranked.push_back({c, 1.0 - cosine});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.word < b.word;
  });
  return ranked;
}

}  // namespace

double cosine_distance(const EmbeddingTable& table, WordId a, WordId b) {
  check_word(table, a);
  check_word(table, b);
  const double na = table.vectors.row(a).norm();
  const double nb = table.vectors.row(b).norm();
  if (na == 0.0 || nb == 0.0) throw DataError("cosine distance of a zero-norm embedding");
  return 1.0 - table.vectors.row(a).dot(table.vectors.row(b)) / (na * nb);
}

std::vector<Neighbor> cosine_knn(WordId word, int k, const EmbeddingTable& table,
                                 const std::vector<bool>* candidates) {
  check_word(table, word);
  if (k < 1) throw UsageError("k must be at least 1");
  if (k >= table.size()) throw UsageError("k must be smaller than the vocabulary size");
  const auto norms = row_norms(table);
  if (norms(word) == 0.0) {
    throw DataError("query word '" + table.words.at(static_cast<std::size_t>(word)) +
                    "' has a zero-norm embedding");
  }
  std::vector<WordId> pool;
  int zero_norm = 0;
  for (WordId w = 0; w < table.size(); ++w) {
    if (w == word || (candidates && !(*candidates)[static_cast<std::size_t>(w)])) continue;
    if (norms(w) == 0.0) {
      ++zero_norm;
      continue;
    }
    pool.push_back(w);
  }
  if (zero_norm) warn(std::to_string(zero_norm) + " zero-norm candidates excluded");
  auto ranked = rank_candidates(table, norms, word, pool);
  if (static_cast<int>(ranked.size()) < k) {
    throw DataError("only " + std::to_string(ranked.size()) + " neighbor candidates for k=" +
                    std::to_string(k));
  }
  ranked.resize(static_cast<std::size_t>(k));
  return ranked;
}

// ------------------------------------------------------------ morphosim

int min_hamming(WordId a, WordId b, const ParseSets& parses, const TagInventory& inventory) {
  for (WordId w : {a, b}) {
    if (w < 0 || static_cast<std::size_t>(w) >= parses.size() ||
        parses[static_cast<std::size_t>(w)].empty()) {
      throw DataError("word " + std::to_string(w) + " has no morphological parse");
    }
  }
  int best = inventory.num_subtags() + 1;
  for (TagId ta : parses[static_cast<std::size_t>(a)]) {
    const auto fa = inventory.features(ta);
    for (TagId tb : parses[static_cast<std::size_t>(b)]) {
      best = std::min(best, hamming_distance(fa, inventory.features(tb)));
    }
  }
  return best;
}

namespace {

std::vector<bool> parsed_mask(const ParseSets& parses, int size) {
  std::vector<bool> mask(static_cast<std::size_t>(size), false);
  for (int w = 0; w < size && static_cast<std::size_t>(w) < parses.size(); ++w) {
    mask[static_cast<std::size_t>(w)] = !parses[static_cast<std::size_t>(w)].empty();
  }
  return mask;
}

// Tag-pair Hamming distances computed once; word pairs take the min over
// their parse sets.
class HammingCache {
 public:
  HammingCache(const ParseSets& parses, const TagInventory& inventory) : parses_(parses) {
    const auto n = static_cast<std::size_t>(inventory.size());
    tag_dist_.assign(n * n, 0);
    std::vector<TagInventory::Bits> bits;
    for (TagId t = 0; t < inventory.size(); ++t) bits.push_back(inventory.features(t));
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) tag_dist_[i * n + j] = hamming_distance(bits[i], bits[j]);
    }
    n_ = n;
  }

  int operator()(WordId a, WordId b) const {
    int best = std::numeric_limits<int>::max();
    for (TagId ta : parses_[static_cast<std::size_t>(a)]) {
      for (TagId tb : parses_[static_cast<std::size_t>(b)]) {
        best = std::min(best, tag_dist_[static_cast<std::size_t>(ta) * n_ +
                                        static_cast<std::size_t>(tb)]);
      }
    }
    return best;
  }

 private:
  const ParseSets& parses_;
  std::vector<int> tag_dist_;
  std::size_t n_ = 0;
};

}  // namespace

double morphosim(WordId word, int k, const EmbeddingTable& table, const ParseSets& parses,
                 const TagInventory& inventory) {
  check_word(table, word);
  if (static_cast<std::size_t>(word) >= parses.size() ||
      parses[static_cast<std::size_t>(word)].empty()) {
    throw DataError("word '" + table.words.at(static_cast<std::size_t>(word)) +
                    "' has no morphological parse");
  }
  const auto mask = parsed_mask(parses, table.size());
  const auto neighbors = cosine_knn(word, k, table, &mask);
  double total = 0.0;
  for (const auto& n : neighbors) total += min_hamming(word, n.word, parses, inventory);
  return total / static_cast<double>(k);
}

std::vector<CurvePoint> morphosim_curve(const EmbeddingTable& table, const ParseSets& parses,
                                        const TagInventory& inventory, const std::vector<int>& ks,
                                        const std::vector<bool>* query_filter) {
  if (ks.empty()) throw UsageError("no neighborhood sizes given");
  const int max_k = *std::max_element(ks.begin(), ks.end());
  if (*std::min_element(ks.begin(), ks.end()) < 1) throw UsageError("k must be at least 1");

  const auto norms = row_norms(table);
  const auto mask = parsed_mask(parses, table.size());
  std::vector<WordId> pool;
  for (WordId w = 0; w < table.size(); ++w) {
    if (mask[static_cast<std::size_t>(w)] && norms(w) > 0.0) pool.push_back(w);
  }
  std::vector<WordId> queries;
  for (WordId w : pool) {
    if (!query_filter || (*query_filter)[static_cast<std::size_t>(w)]) queries.push_back(w);
  }
  if (queries.empty()) throw DataError("no words pass the evaluation filter");
  if (static_cast<int>(pool.size()) - 1 < max_k) {
    throw DataError("k=" + std::to_string(max_k) + " exceeds the " +
                    std::to_string(pool.size() - 1) + " available neighbors");
  }

  HammingCache hamming(parses, inventory);
  // Per-word prefix sums of min-Hamming along the neighbor ranking, reduced
  // in word-id order.
  std::vector<double> sums(ks.size(), 0.0);
  for (WordId q : queries) {
    auto ranked = rank_candidates(table, norms, q, pool);
    std::vector<double> prefix(static_cast<std::size_t>(max_k) + 1, 0.0);
    for (int i = 0; i < max_k; ++i) {
      prefix[static_cast<std::size_t>(i) + 1] =
          prefix[static_cast<std::size_t>(i)] + hamming(q, ranked[static_cast<std::size_t>(i)].word);
    }
    for (std::size_t j = 0; j < ks.size(); ++j) {
      sums[j] += prefix[static_cast<std::size_t>(ks[j])] / static_cast<double>(ks[j]);
    }
  }
  std::vector<CurvePoint> curve;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    curve.push_back({ks[j], sums[j] / static_cast<double>(queries.size()), queries.size()});
  }
  return curve;
}

std::vector<bool> unseen_types(const ParseSets& parses, const std::vector<std::int64_t>& labeled) {
  std::vector<bool> out(parses.size(), false);
  for (std::size_t w = 0; w < parses.size(); ++w) {
    out[w] = !parses[w].empty() && (w >= labeled.size() || labeled[w] == 0);
  }
  return out;
}

std::vector<TagId> most_frequent_tags(const std::vector<std::map<TagId, std::int64_t>>& tag_counts,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<TagId> out(tag_counts.size(), kNoTag);
  for (std::size_t w = 0; w < tag_counts.size(); ++w) {
    std::int64_t best = 0;
    std::vector<TagId> tied;
    for (const auto& [t, c] : tag_counts[w]) {
      if (c > best) {
        best = c;
        tied.assign(1, t);
      } else if (c == best && c > 0) {
        tied.push_back(t);
      }
    }
    if (tied.size() == 1) {
      out[w] = tied.front();
    } else if (tied.size() > 1) {
      std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
      out[w] = tied[pick(rng)];
    }
  }
  return out;
}

// --------------------------------------------------------- k-NN accuracy

namespace {

TagId classify(const EmbeddingTable& table, const Eigen::VectorXd& norms, WordId query,
               const std::vector<WordId>& train, const std::vector<TagId>& labels, int k) {
  auto ranked = rank_candidates(table, norms, query, train);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), ranked.size());
  std::map<TagId, int> votes;
  for (std::size_t i = 0; i < take; ++i) ++votes[labels[static_cast<std::size_t>(ranked[i].word)]];
  int best_votes = 0;
  for (const auto& [t, v] : votes) best_votes = std::max(best_votes, v);
  // Ties go to the label whose first vote ranks nearest.
  for (std::size_t i = 0; i < take; ++i) {
    TagId t = labels[static_cast<std::size_t>(ranked[i].word)];
    if (votes[t] == best_votes) return t;
  }
  return kNoTag;
}

BucketAccuracy summarize(const std::vector<double>& accs) {
  BucketAccuracy b;
  b.folds = static_cast<int>(accs.size());
  if (accs.empty()) return b;
  b.mean = std::accumulate(accs.begin(), accs.end(), 0.0) / static_cast<double>(accs.size());
  double var = 0.0;
  for (double a : accs) var += (a - b.mean) * (a - b.mean);
  b.stddev = std::sqrt(var / static_cast<double>(accs.size()));
  return b;
}

}  // namespace

KnnResult knn_tag_accuracy(const EmbeddingTable& table, const std::vector<TagId>& labels,
                           const std::vector<bool>& no_tags, const KnnConfig& config) {
  if (config.folds < 3) throw UsageError("k-NN evaluation needs at least 3 folds");
  if (config.k_grid.empty()) throw UsageError("empty k grid");
  if (labels.size() != static_cast<std::size_t>(table.size())) {
    throw DataError("label count does not match embedding table");
  }
  const auto norms = row_norms(table);
  std::vector<WordId> items;
  for (WordId w = 0; w < table.size(); ++w) {
    if (labels[static_cast<std::size_t>(w)] != kNoTag && norms(w) > 0.0) items.push_back(w);
  }
  if (items.size() < static_cast<std::size_t>(config.folds) * 2) {
    throw DataError("k-NN evaluation needs at least " + std::to_string(config.folds * 2) +
                    " labeled types, have " + std::to_string(items.size()));
  }
  std::mt19937_64 rng(config.seed);
  std::shuffle(items.begin(), items.end(), rng);

  KnnResult result;
  {
    std::vector<TagId> distinct;
    for (WordId w : items) distinct.push_back(labels[static_cast<std::size_t>(w)]);
    std::sort(distinct.begin(), distinct.end());
    result.degenerate = std::unique(distinct.begin(), distinct.end()) - distinct.begin() < 2;
  }

  const auto n = items.size();
  const auto folds = static_cast<std::size_t>(config.folds);
  std::vector<std::size_t> chunk(n);
  for (std::size_t f = 0; f < folds; ++f) {
    for (std::size_t i = f * n / folds; i < (f + 1) * n / folds; ++i) chunk[i] = f;
  }

  std::vector<double> all_accs, no_tag_accs;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t dev_chunk = (f + 1) % folds;
    std::vector<WordId> train, dev, test;
    for (std::size_t i = 0; i < n; ++i) {
      if (chunk[i] == f) {
        test.push_back(items[i]);
      } else if (chunk[i] == dev_chunk) {
        dev.push_back(items[i]);
      } else {
        train.push_back(items[i]);
      }
    }

    int best_k = config.k_grid.front();
    double best_acc = -1.0;
    for (int k : config.k_grid) {
      if (k < 1) throw UsageError("k must be at least 1");
      int correct = 0;
      for (WordId w : dev) {
        correct += classify(table, norms, w, train, labels, k) == labels[static_cast<std::size_t>(w)];
      }
      const double acc = static_cast<double>(correct) / static_cast<double>(dev.size());
      if (acc > best_acc) {
        best_acc = acc;
        best_k = k;
      }
    }
    result.chosen_k.push_back(best_k);

    int correct = 0, nt_correct = 0, nt_total = 0;
    for (WordId w : test) {
      const bool ok = classify(table, norms, w, train, labels, best_k) ==
                      labels[static_cast<std::size_t>(w)];
      correct += ok;
      if (static_cast<std::size_t>(w) < no_tags.size() && no_tags[static_cast<std::size_t>(w)]) {
        ++nt_total;
        nt_correct += ok;
      }
    }
    all_accs.push_back(static_cast<double>(correct) / static_cast<double>(test.size()));
    if (nt_total) no_tag_accs.push_back(static_cast<double>(nt_correct) / nt_total);
  }
  result.all_types = summarize(all_accs);
  result.no_tags = summarize(no_tag_accs);
  return result;
}

// ----------------------------------------------------------- report files

std::string format_morphosim_tsv(const std::vector<CurvePoint>& curve) {
  std::string out = "k\tmean\tcount\n";
  for (const auto& p : curve) {
    out += std::to_string(p.k) + '\t' + format_fixed(p.mean, 6) + '\t' + std::to_string(p.count) +
           '\n';
  }
  return out;
}

std::string format_knn_tsv(const KnnResult& result) {
  std::string out = "bucket\tmean_acc\tstd\tfolds\n";
  auto row = [&](const char* name, const BucketAccuracy& b) {
    out += std::string(name) + '\t' + format_fixed(b.mean, 6) + '\t' + format_fixed(b.stddev, 6) +
           '\t' + std::to_string(b.folds) + '\n';
  };
  row("all-types", result.all_types);
  row("no-tags", result.no_tags);
  return out;
}

std::string format_neighbors_tsv(const std::vector<NeighborRow>& rows) {
  std::string out = "word\trank\tneighbor\tcos_dist\tmin_hamming\n";
  for (const auto& r : rows) {
    out += r.word + '\t' + std::to_string(r.rank) + '\t' + r.neighbor + '\t' +
           format_fixed(r.distance, 6) + '\t' +
           (r.min_hamming < 0 ? std::string("NA") : std::to_string(r.min_hamming)) + '\n';
  }
  return out;
}

std::string format_projection_tsv(const EmbeddingTable& table, const Projection& projection,
                                  const std::vector<TagId>& most_frequent,
                                  const TagInventory& inventory) {
  std::string out = "word\tx\ty\tmost_freq_tag\n";
  for (int w = 0; w < table.size(); ++w) {
    const auto uw = static_cast<std::size_t>(w);
    const TagId t = uw < most_frequent.size() ? most_frequent[uw] : kNoTag;
    out += table.words[uw] + '\t' + format_fixed(projection.coords(w, 0), 6) + '\t' +
           format_fixed(projection.coords(w, 1), 6) + '\t' +
           (t == kNoTag ? std::string("-") : inventory.tag(t)) + '\n';
  }
  return out;
}

}  // namespace morphlbl
