#include "morphlbl/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <sstream>

#include "morphlbl/error.hpp"
#include "morphlbl/io_util.hpp"

namespace morphlbl {

namespace {

constexpr std::string_view kVocabHeader = "#morphlbl-vocab v1";
constexpr std::string_view kTagsHeader = "#morphlbl-tags v1";

std::string line_error(int line_no, const std::string& what) {
  return "line " + std::to_string(line_no) + ": " + what;
}

}  // namespace

// ---------------------------------------------------------------- Vocabulary

WordId Vocabulary::add(std::string_view word) {
  if (auto it = index_.find(std::string(word)); it != index_.end()) return it->second;
  auto id = static_cast<WordId>(words_.size());
  words_.emplace_back(word);
  index_.emplace(words_.back(), id);
  counts_.push_back(0);
  return id;
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::id(std::string_view word) const {
  if (auto found = find(word)) return *found;
  throw DataError("unknown word '" + std::string(word) + "'");
}

const std::string& Vocabulary::word(WordId id) const {
  if (id == bos()) {
    static const std::string bos_token(kBosToken);
    return bos_token;
  }
  return words_.at(static_cast<std::size_t>(id));
}

// -------------------------------------------------------------- TagInventory

std::vector<std::string> split_subtags(std::string_view tag) {
  if (trim(tag).empty()) throw DataError("empty tag string");
  std::vector<std::string> units;
  for (auto& unit : split(tag, '.')) {
    if (unit.empty()) throw DataError("empty sub-tag in '" + std::string(tag) + "'");
    if (std::find(units.begin(), units.end(), unit) == units.end()) units.push_back(unit);
  }
  return units;
}

int TagInventory::add_subtag(std::string_view subtag) {
  if (auto it = subtag_index_.find(std::string(subtag)); it != subtag_index_.end()) {
    return it->second;
  }
  int idx = static_cast<int>(subtags_.size());
  subtags_.emplace_back(subtag);
  subtag_index_.emplace(subtags_.back(), idx);
  return idx;
}

TagId TagInventory::add(std::string_view tag) {
  if (auto found = find(tag)) return *found;
  std::vector<int> active;
  for (const auto& unit : split_subtags(tag)) active.push_back(add_subtag(unit));
  std::sort(active.begin(), active.end());
  auto id = static_cast<TagId>(tags_.size());
  tags_.emplace_back(tag);
  tag_index_.emplace(tags_.back(), id);
  active_.push_back(std::move(active));
  return id;
}

std::optional<TagId> TagInventory::find(std::string_view tag) const {
  auto it = tag_index_.find(std::string(tag));
  if (it == tag_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> TagInventory::subtag_index(std::string_view subtag) const {
  auto it = subtag_index_.find(std::string(subtag));
  if (it == subtag_index_.end()) return std::nullopt;
  return it->second;
}

TagInventory::Bits TagInventory::features(TagId id) const {
  Bits bits(subtags_.size(), 0);
  for (int i : active_.at(static_cast<std::size_t>(id))) bits[static_cast<std::size_t>(i)] = 1;
  return bits;
}

TagInventory::Bits featurize_tag(std::string_view tag, TagInventory& inventory,
                                 FeaturizeMode mode) {
  if (mode == FeaturizeMode::kOpen) return inventory.features(inventory.add(tag));
  return featurize_tag(tag, std::as_const(inventory));
}

TagInventory::Bits featurize_tag(std::string_view tag, const TagInventory& inventory) {
  TagInventory::Bits bits(static_cast<std::size_t>(inventory.num_subtags()), 0);
  for (const auto& unit : split_subtags(tag)) {
    auto idx = inventory.subtag_index(unit);
    if (!idx) throw DataError("unknown sub-tag '" + unit + "'");
    bits[static_cast<std::size_t>(*idx)] = 1;
  }
  return bits;
}

int hamming_distance(const TagInventory::Bits& a, const TagInventory::Bits& b) {
  if (a.size() != b.size()) throw DataError("bit vectors differ in length");
  int d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]) ? 1 : 0;
  return d;
}

// -------------------------------------------------------------------- Corpus

std::size_t Corpus::token_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

std::size_t Corpus::labeled_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) {
    for (const auto& tok : s) n += (tok.tag != kNoTag) ? 1 : 0;
  }
  return n;
}

double Corpus::labeled_fraction() const {
  auto total = token_count();
  return total == 0 ? 0.0 : static_cast<double>(labeled_count()) / static_cast<double>(total);
}

std::pair<std::size_t, std::size_t> Corpus::locate(std::size_t position) const {
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    if (position < sentences[s].size()) return {s, position};
    position -= sentences[s].size();
  }
  throw DataError("token position out of range");
}

const Token& Corpus::token(std::size_t position) const {
  auto [s, i] = locate(position);
  return sentences[s][i];
}

std::vector<std::int64_t> Corpus::labeled_occurrences(WordId num_words) const {
  std::vector<std::int64_t> out(static_cast<std::size_t>(num_words), 0);
  for (const auto& s : sentences) {
    for (const auto& tok : s) {
      if (tok.tag != kNoTag) ++out.at(static_cast<std::size_t>(tok.word));
    }
  }
  return out;
}

std::vector<WordId> history_at(const Sentence& sentence, std::size_t offset, int order,
                               WordId bos) {
  if (order < 2) throw UsageError("model order must be at least 2");
  if (offset >= sentence.size()) throw DataError("token offset out of range");
  const auto len = static_cast<std::size_t>(order - 1);
  std::vector<WordId> history(len, bos);
  // history[len-1] is the immediately preceding word.
  for (std::size_t j = 0; j < len && j < offset; ++j) {
    history[len - 1 - j] = sentence[offset - 1 - j].word;
  }
  return history;
}

std::vector<WordId> history_at(const Corpus& corpus, std::size_t position, int order,
                               WordId bos) {
  auto [s, i] = corpus.locate(position);
  return history_at(corpus.sentences[s], i, order, bos);
}

// ----------------------------------------------------------------- Ingestion

ParsedCorpus parse_corpus(std::istream& in, const IngestConfig& config) {
  struct RawToken {
    std::string word;
    std::string tag;  // empty = unlabeled
  };
  std::vector<std::vector<RawToken>> raw;
  std::vector<RawToken> current;
  std::unordered_map<std::string, std::int64_t> freq;

  std::string line;
  int line_no = 0;
  bool any_token = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      if (!current.empty()) raw.push_back(std::move(current));
      current.clear();
      continue;
    }
    auto fields = split(line, '\t');
    if (fields.size() != 2) {
      throw DataError(line_error(line_no, "expected 2 tab-separated fields, got " +
                                              std::to_string(fields.size())));
    }
    if (fields[0].empty()) throw DataError(line_error(line_no, "empty word"));
    if (fields[0] == Vocabulary::kBosToken) {
      throw DataError(line_error(line_no, "reserved token " + fields[0]));
    }
    if (fields[1].empty()) throw DataError(line_error(line_no, "empty tag field"));
    RawToken tok{fields[0], fields[1] == config.unlabeled_marker ? std::string() : fields[1]};
    if (!tok.tag.empty()) {
      try {
        split_subtags(tok.tag);
      } catch (const DataError& e) {
        throw DataError(line_error(line_no, e.what()));
      }
    }
    ++freq[tok.word];
    current.push_back(std::move(tok));
    any_token = true;
  }
  if (!current.empty()) raw.push_back(std::move(current));
  if (!any_token) throw DataError("empty corpus");

  ParsedCorpus out;
  auto& corpus = out.corpus;
  for (const auto& raw_sentence : raw) {
    Sentence sentence;
    sentence.reserve(raw_sentence.size());
    for (const auto& rt : raw_sentence) {
      bool rare = freq[rt.word] < config.min_count;
      WordId w = out.vocab.add(rare ? std::string(Vocabulary::kUnkToken) : rt.word);
      out.vocab.add_count(w);
      TagId t = rt.tag.empty() ? kNoTag : out.inventory.add(rt.tag);
      sentence.push_back({w, t});
    }
    corpus.sentences.push_back(std::move(sentence));
  }

  corpus.tag_counts.assign(static_cast<std::size_t>(out.vocab.size()), {});
  for (const auto& s : corpus.sentences) {
    for (const auto& tok : s) {
      if (tok.tag != kNoTag) ++corpus.tag_counts[static_cast<std::size_t>(tok.word)][tok.tag];
    }
  }
  corpus.parses.assign(corpus.tag_counts.size(), {});
  for (std::size_t w = 0; w < corpus.tag_counts.size(); ++w) {
    for (const auto& [t, c] : corpus.tag_counts[w]) corpus.parses[w].push_back(t);
  }
  return out;
}

ParsedCorpus parse_corpus(const std::filesystem::path& path, const IngestConfig& config) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  return parse_corpus(in, config);
}

std::string format_corpus(const Corpus& corpus, const Vocabulary& vocab,
                          const TagInventory& inventory, const IngestConfig& config) {
  std::string out;
  bool first = true;
  for (const auto& s : corpus.sentences) {
    if (!first) out += '\n';
    first = false;
    for (const auto& tok : s) {
      out += vocab.word(tok.word);
      out += '\t';
      out += tok.tag == kNoTag ? config.unlabeled_marker : inventory.tag(tok.tag);
      out += '\n';
    }
  }
  return out;
}

// ------------------------------------------------------------- Serialization

std::string format_vocabulary(const Vocabulary& vocab, const Corpus* corpus,
                              const std::vector<std::int64_t>* labeled) {
  std::ostringstream out;
  out << kVocabHeader << '\n';
  for (WordId w = 0; w < vocab.size(); ++w) {
    const auto uw = static_cast<std::size_t>(w);
    out << w << '\t' << vocab.word(w) << '\t' << vocab.count(w) << '\t'
        << (labeled ? labeled->at(uw) : 0) << '\t';
    if (corpus && uw < corpus->tag_counts.size() && !corpus->tag_counts[uw].empty()) {
      bool first = true;
      for (const auto& [t, c] : corpus->tag_counts[uw]) {
        if (!first) out << ',';
        first = false;
        out << t << ':' << c;
      }
    } else {
      out << '-';
    }
    out << '\n';
  }
  return out.str();
}

VocabularyFile parse_vocabulary(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kVocabHeader) {
    throw DataError("missing vocabulary header '" + std::string(kVocabHeader) + "'");
  }
  VocabularyFile out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 5) throw DataError(line_error(line_no, "expected 5 fields"));
    auto id = parse_int(fields[0]);
    if (id != out.vocab.size()) throw DataError(line_error(line_no, "ids must be consecutive"));
    WordId w = out.vocab.add(fields[1]);
    if (w != id) throw DataError(line_error(line_no, "duplicate word " + fields[1]));
    out.vocab.add_count(w, parse_int(fields[2]));
    out.labeled.push_back(parse_int(fields[3]));
    std::map<TagId, std::int64_t> counts;
    if (fields[4] != "-") {
      for (const auto& pair : split(fields[4], ',')) {
        auto kv = split(pair, ':');
        if (kv.size() != 2) throw DataError(line_error(line_no, "bad tag count '" + pair + "'"));
        counts[static_cast<TagId>(parse_int(kv[0]))] = parse_int(kv[1]);
      }
    }
    out.tag_counts.push_back(std::move(counts));
  }
  return out;
}

std::string format_tag_inventory(const TagInventory& inventory) {
  std::ostringstream out;
  out << kTagsHeader << '\n';
  for (int i = 0; i < inventory.num_subtags(); ++i) {
    out << "subtag\t" << i << '\t' << inventory.subtags()[static_cast<std::size_t>(i)] << '\n';
  }
  for (TagId t = 0; t < inventory.size(); ++t) {
    out << "tag\t" << t << '\t' << inventory.tag(t) << '\n';
  }
  return out.str();
}

TagInventory parse_tag_inventory(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTagsHeader) {
    throw DataError("missing tag inventory header '" + std::string(kTagsHeader) + "'");
  }
  TagInventory inv;
  int line_no = 1;
  int expected_subtags = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != 3) throw DataError(line_error(line_no, "expected 3 fields"));
    auto idx = parse_int(fields[1]);
    if (fields[0] == "subtag") {
      if (inv.size() > 0) throw DataError(line_error(line_no, "sub-tags must precede tags"));
      if (idx != expected_subtags || inv.add_subtag(fields[2]) != idx) {
        throw DataError(line_error(line_no, "sub-tag ids must be consecutive and unique"));
      }
      ++expected_subtags;
    } else if (fields[0] == "tag") {
      if (idx != inv.size()) throw DataError(line_error(line_no, "tag ids must be consecutive"));
      for (const auto& unit : split_subtags(fields[2])) {
        if (!inv.subtag_index(unit)) {
          throw DataError(line_error(line_no, "unknown sub-tag '" + unit + "'"));
        }
      }
      if (inv.add(fields[2]) != idx) throw DataError(line_error(line_no, "duplicate tag"));
    } else {
      throw DataError(line_error(line_no, "unknown record kind '" + fields[0] + "'"));
    }
  }
  return inv;
}

}  // namespace morphlbl
