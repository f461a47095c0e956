#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "morphlbl/corpus.hpp"
#include "morphlbl/model.hpp"

namespace morphlbl {

// Row w holds the embedding of word w. Evaluation never mutates it.
struct EmbeddingTable {
  Eigen::MatrixXd vectors;
  std::vector<std::string> words;

  int size() const { return static_cast<int>(vectors.rows()); }
  int dim() const { return static_cast<int>(vectors.cols()); }

  // The target embeddings of a trained model.
  static EmbeddingTable from_model(const ModelParams& params, const Vocabulary& vocab);
};

// `word<TAB>v1<TAB>...<TAB>vd`, one word per line.
EmbeddingTable parse_embeddings(std::istream& in);

// Reorders an external table onto `vocab` ids. Words missing from the
// table get zero rows, which every query skips.
EmbeddingTable align_embeddings(const EmbeddingTable& table, const Vocabulary& vocab);

// M_w for every word id; empty when a word was never observed with a tag.
using ParseSets = std::vector<std::vector<TagId>>;

ParseSets parse_sets_from_counts(const std::vector<std::map<TagId, std::int64_t>>& tag_counts);

struct Neighbor {
  WordId word = 0;
  double distance = 0.0;
};

double cosine_distance(const EmbeddingTable& table, WordId a, WordId b);

// The k words closest to `word` by cosine distance, excluding `word` itself,
// ordered by (distance, id). When `candidates` is given only words with a
// true entry are considered. Zero-norm candidates are skipped.
std::vector<Neighbor> cosine_knn(WordId word, int k, const EmbeddingTable& table,
                                 const std::vector<bool>* candidates = nullptr);

// min over parse pairs of the Hamming distance between tag bit vectors.
int min_hamming(WordId a, WordId b, const ParseSets& parses, const TagInventory& inventory);

// Mean min-Hamming distance between `word` and its k nearest neighbors that
// have at least one parse. Lower means morphologically closer neighbors.
double morphosim(WordId word, int k, const EmbeddingTable& table, const ParseSets& parses,
                 const TagInventory& inventory);

struct CurvePoint {
  int k = 0;
  double mean = 0.0;
  std::size_t count = 0;
};

// Mean morphosim for each k over words with a parse and a nonzero
// embedding. `query_filter`, when set, further restricts the query words
// (neighbors are still drawn from every parsed word).
std::vector<CurvePoint> morphosim_curve(const EmbeddingTable& table, const ParseSets& parses,
                                        const TagInventory& inventory, const std::vector<int>& ks,
                                        const std::vector<bool>* query_filter = nullptr);

// Types that carry annotation but had no labeled occurrence in training.
std::vector<bool> unseen_types(const ParseSets& parses, const std::vector<std::int64_t>& labeled);

// Most frequent tag per word; ties are broken by a seeded draw.
std::vector<TagId> most_frequent_tags(const std::vector<std::map<TagId, std::int64_t>>& tag_counts,
                                      std::uint64_t seed);

struct KnnConfig {
  int folds = 10;
  std::vector<int> k_grid{1, 3, 5, 9, 15};
  std::uint64_t seed = 1;
};

struct BucketAccuracy {
  double mean = 0.0;
  double stddev = 0.0;  // population std over folds
  int folds = 0;        // folds that had at least one test item in the bucket
};

struct KnnResult {
  BucketAccuracy all_types;
  BucketAccuracy no_tags;
  std::vector<int> chosen_k;  // per fold
  bool degenerate = false;    // fewer than two distinct labels
};

// Cross-validated k-NN classification of each word's label from its
// embedding. Per fold the shuffled types split 80/10/10 into
// train/dev/test; k is chosen on dev, accuracy measured on test.
// `labels[w] == kNoTag` excludes w; `no_tags[w]` marks the second bucket.
KnnResult knn_tag_accuracy(const EmbeddingTable& table, const std::vector<TagId>& labels,
                           const std::vector<bool>& no_tags, const KnnConfig& config);

struct Projection {
  Eigen::MatrixXd coords;  // size() x 2
  Eigen::Vector2d variances = Eigen::Vector2d::Zero();
  bool rank_deficient = false;
};

// Mean-centered projection onto the top two principal components. Each
// component's largest-magnitude loading is made positive.
Projection project_2d(const EmbeddingTable& table);

// ----------------------------------------------------------- report files

std::string format_morphosim_tsv(const std::vector<CurvePoint>& curve);
std::string format_knn_tsv(const KnnResult& result);

struct NeighborRow {
  std::string word;
  int rank = 0;
  std::string neighbor;
  double distance = 0.0;
  int min_hamming = -1;  // -1 when either word lacks a parse
};
std::string format_neighbors_tsv(const std::vector<NeighborRow>& rows);

std::string format_projection_tsv(const EmbeddingTable& table, const Projection& projection,
                                  const std::vector<TagId>& most_frequent,
                                  const TagInventory& inventory);

}  // namespace morphlbl
