#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace morphlbl {

using WordId = std::int32_t;
using TagId = std::int32_t;

inline constexpr TagId kNoTag = -1;

// Bidirectional word <-> id index. Ids [0, size()) are predictable words.
// The history padding symbol is not a word: its id is size(), one past the
// last word, so it can index context embeddings but never a target.
class Vocabulary {
 public:
  static constexpr std::string_view kUnkToken = "<unk>";
  static constexpr std::string_view kBosToken = "<s>";

  WordId add(std::string_view word);
  std::optional<WordId> find(std::string_view word) const;
  WordId id(std::string_view word) const;  // throws DataError if unknown
  const std::string& word(WordId id) const;

  WordId size() const { return static_cast<WordId>(words_.size()); }
  WordId bos() const { return size(); }
  // Id of the unknown-word type, or nullopt when no rare words were mapped.
  std::optional<WordId> unk() const { return find(kUnkToken); }

  std::int64_t count(WordId id) const { return counts_.at(static_cast<std::size_t>(id)); }
  void add_count(WordId id, std::int64_t n = 1) { counts_.at(static_cast<std::size_t>(id)) += n; }
  const std::vector<std::string>& words() const { return words_; }

  bool operator==(const Vocabulary& other) const {
    return words_ == other.words_ && counts_ == other.counts_;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> index_;
  std::vector<std::int64_t> counts_;
};

enum class FeaturizeMode { kStrict, kOpen };

// Full morphological tags and their sub-tag bit vectors.
class TagInventory {
 public:
  using Bits = std::vector<std::uint8_t>;

  // Adds a tag; unseen sub-tags extend the sub-tag index.
  TagId add(std::string_view tag);
  int add_subtag(std::string_view subtag);
  std::optional<TagId> find(std::string_view tag) const;

  TagId size() const { return static_cast<TagId>(tags_.size()); }
  int num_subtags() const { return static_cast<int>(subtags_.size()); }
  const std::string& tag(TagId id) const { return tags_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::string>& tags() const { return tags_; }
  const std::vector<std::string>& subtags() const { return subtags_; }
  std::optional<int> subtag_index(std::string_view subtag) const;

  // Bit vector over the current sub-tag index. Vectors of tags added before
  // later sub-tags were introduced are padded on access.
  Bits features(TagId id) const;

  bool operator==(const TagInventory& other) const {
    return tags_ == other.tags_ && subtags_ == other.subtags_;
  }

 private:
  std::vector<std::string> tags_;
  std::unordered_map<std::string, TagId> tag_index_;
  std::vector<std::vector<int>> active_;  // sorted sub-tag indices per tag
  std::vector<std::string> subtags_;
  std::unordered_map<std::string, int> subtag_index_;
};

// Splits a tag on '.' into its distinct sub-tag units, in order of appearance.
std::vector<std::string> split_subtags(std::string_view tag);

// Bit vector for `tag`: component i is 1 iff sub-tag i occurs in the tag.
// Strict mode rejects unknown sub-tags; open mode adds them to the inventory.
TagInventory::Bits featurize_tag(std::string_view tag, TagInventory& inventory,
                                 FeaturizeMode mode);
TagInventory::Bits featurize_tag(std::string_view tag, const TagInventory& inventory);

int hamming_distance(const TagInventory::Bits& a, const TagInventory::Bits& b);

struct Token {
  WordId word = 0;
  TagId tag = kNoTag;
  bool operator==(const Token&) const = default;
};

using Sentence = std::vector<Token>;

// Token stream plus per-word annotation statistics.
//
// `tag_counts` and `parses` hold the annotation of the corpus as read from
// disk; mask_labels() leaves them intact so evaluation can still score the
// masked types.
struct Corpus {
  std::vector<Sentence> sentences;
  std::vector<std::map<TagId, std::int64_t>> tag_counts;  // indexed by word id
  std::vector<std::vector<TagId>> parses;                 // M_w, sorted

  std::size_t token_count() const;
  std::size_t labeled_count() const;
  double labeled_fraction() const;

  // Flat token index -> (sentence, offset).
  std::pair<std::size_t, std::size_t> locate(std::size_t position) const;
  const Token& token(std::size_t position) const;

  // Number of currently labeled (unmasked) occurrences of each word.
  std::vector<std::int64_t> labeled_occurrences(WordId num_words) const;
};

struct IngestConfig {
  std::string unlabeled_marker = "_";
  // Words seen fewer times than this map to <unk>. 1 keeps every type.
  int min_count = 1;
};

struct ParsedCorpus {
  Corpus corpus;
  Vocabulary vocab;
  TagInventory inventory;
};

ParsedCorpus parse_corpus(std::istream& in, const IngestConfig& config = {});
ParsedCorpus parse_corpus(const std::filesystem::path& path, const IngestConfig& config = {});

// Writes the corpus back in the `word<TAB>tag` format.
std::string format_corpus(const Corpus& corpus, const Vocabulary& vocab,
                          const TagInventory& inventory, const IngestConfig& config = {});

// The n-1 word ids preceding `position` within its sentence, BOS-padded.
std::vector<WordId> history_at(const Corpus& corpus, std::size_t position, int order,
                               WordId bos);
std::vector<WordId> history_at(const Sentence& sentence, std::size_t offset, int order,
                               WordId bos);

// Vocabulary TSV (`#morphlbl-vocab v1`). Each row carries the word's count,
// the number of occurrences that were labeled during training, and its
// tag counts as `tag:count` pairs (or `-`).
std::string format_vocabulary(const Vocabulary& vocab, const Corpus* corpus = nullptr,
                              const std::vector<std::int64_t>* labeled = nullptr);

struct VocabularyFile {
  Vocabulary vocab;
  std::vector<std::int64_t> labeled;                      // per word
  std::vector<std::map<TagId, std::int64_t>> tag_counts;  // per word
};
VocabularyFile parse_vocabulary(std::istream& in);

std::string format_tag_inventory(const TagInventory& inventory);
TagInventory parse_tag_inventory(std::istream& in);

}  // namespace morphlbl
