#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "morphlbl/error.hpp"
#include "morphlbl/synthgen.hpp"

using namespace morphlbl;

namespace {

ParsedCorpus parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_corpus(in);
}

std::string pos_of(const std::string& tag) { return tag.substr(0, tag.find('.')); }

std::string case_of(const std::string& tag) { return split_subtags(tag).at(1); }

// Union-find over word ids.
struct Components {
  std::vector<int> parent;
  explicit Components(int n) : parent(static_cast<std::size_t>(n)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
    return x;
  }
  void join(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

}  // namespace

TEST_CASE("default corpus shape") {
  SynthSpec spec;
  const auto text = generate(spec);
  auto p = parse_text(text);
  CHECK(p.corpus.token_count() == 50000);
  CHECK(p.corpus.labeled_count() == 50000);
  CHECK(p.vocab.size() == 200);
  CHECK(p.inventory.size() == 10);
  CHECK(p.inventory.num_subtags() == 7);

  const auto tags = synth_tag_set(spec);
  CHECK(tags.size() == 10);
  for (TagId t = 0; t < p.inventory.size(); ++t) {
    CHECK(std::find(tags.begin(), tags.end(), p.inventory.tag(t)) != tags.end());
  }
  for (const auto& s : p.corpus.sentences) {
    CHECK(s.size() >= 1);
    CHECK(s.size() <= static_cast<std::size_t>(spec.max_sentence_length) + 3);
  }
}

TEST_CASE("same seed gives identical output") {
  SynthSpec spec;
  spec.token_count = 3000;
  CHECK(generate(spec) == generate(spec));
  auto other = spec;
  other.seed = 8;
  CHECK(generate(other) != generate(spec));
}

TEST_CASE("without noise or ambiguity a word determines its tag") {
  SynthSpec spec;
  spec.templates = {{1.0, {"Art", "N"}}};
  spec.noise = 0.0;
  spec.ambiguity = 0.0;
  spec.token_count = 5000;
  auto p = parse_text(generate(spec));
  for (std::size_t w = 0; w < p.vocab.size(); ++w) {
    CHECK(p.corpus.parses[w].size() == 1);
  }
  std::set<std::string> seen_pos;
  for (TagId t = 0; t < p.inventory.size(); ++t) seen_pos.insert(pos_of(p.inventory.tag(t)));
  CHECK(seen_pos == std::set<std::string>{"Art", "N"});
}

TEST_CASE("noun case agrees with a preceding adjective at the noise-adjusted rate") {
  SynthSpec spec;
  spec.templates = {{1.0, {"Adj", "N"}}};
  spec.noise = 0.1;
  spec.ambiguity = 0.0;
  spec.min_sentence_length = 2;
  spec.max_sentence_length = 10;
  spec.token_count = 200000;
  auto p = parse_text(generate(spec));

  // Phrases start at even offsets. A noise slot draws any word; 40% of the
  // types are adjectives, 40% nouns, and a random word's case is uniform.
  const double nu = 0.1, adj = 0.4, noun = 0.4;
  const double clean = (1 - nu) * (1 - nu);
  const double mixed = nu * noun * (1 - nu) + nu * adj * (1 - nu) + nu * nu * adj * noun;
  const double expect = (clean + 0.5 * mixed) / (clean + mixed);

  long long pairs = 0, agree = 0;
  for (const auto& s : p.corpus.sentences) {
    for (std::size_t i = 0; i + 1 < s.size(); i += 2) {
      const auto& a = p.inventory.tag(s[i].tag);
      const auto& n = p.inventory.tag(s[i + 1].tag);
      if (pos_of(a) != "Adj" || pos_of(n) != "N") continue;
      ++pairs;
      agree += case_of(a) == case_of(n);
    }
  }
  REQUIRE(pairs > 50000);
  const double rate = static_cast<double>(agree) / static_cast<double>(pairs);
  INFO("rate " << rate << " expected " << expect);
  CHECK(std::abs(rate - expect) <= 0.02);
}

TEST_CASE("late types only appear after the onset") {
  SynthSpec spec;
  spec.token_count = 20000;
  spec.late_fraction = 0.25;
  spec.late_onset = 0.5;
  auto p = parse_text(generate(spec));
  std::vector<std::size_t> first(p.vocab.size(), SIZE_MAX);
  std::size_t pos = 0;
  for (const auto& s : p.corpus.sentences) {
    for (const auto& tok : s) {
      auto& f = first[static_cast<std::size_t>(tok.word)];
      f = std::min(f, pos++);
    }
  }
  const auto late = std::count_if(first.begin(), first.end(), [](std::size_t f) { return f >= 10000; });
  // 5 of every tag's 20 types.
  CHECK(late == 50);
  CHECK(p.vocab.size() == 200);

  spec.late_fraction = 0.0;
  auto q = parse_text(generate(spec));
  std::size_t seen = 0;
  std::set<WordId> before;
  for (const auto& s : q.corpus.sentences) {
    for (const auto& tok : s) {
      if (seen++ < 10000) before.insert(tok.word);
    }
  }
  CHECK(before.size() == 200);
}

TEST_CASE("rank-frequency exponent") {
  SynthSpec spec;
  spec.templates = {{1.0, {"N"}}};
  spec.noise = 0.0;
  spec.ambiguity = 0.0;
  spec.late_fraction = 0.0;
  spec.cases = 1;
  spec.numbers = 1;
  spec.vocab_size = 30;  // 10 types per tag
  spec.token_count = 100000;
  for (double z : {0.0, 1.0}) {
    spec.zipf = z;
    auto p = parse_text(generate(spec));
    std::vector<std::int64_t> counts;
    for (std::size_t w = 0; w < p.vocab.size(); ++w) counts.push_back(p.vocab.count(static_cast<WordId>(w)));
    std::sort(counts.rbegin(), counts.rend());
    const double ratio = static_cast<double>(counts.front()) / static_cast<double>(counts.back());
    if (z == 0.0) {
      CHECK(ratio < 1.2);
    } else {
      CHECK(ratio == doctest::Approx(10.0).epsilon(0.2));
    }
  }
}

TEST_CASE("fully coherent topics never mix within a sentence") {
  SynthSpec spec;
  spec.noise = 0.0;
  spec.ambiguity = 0.0;
  spec.topics = 2;
  spec.topic_coherence = 1.0;
  spec.token_count = 20000;
  auto p = parse_text(generate(spec));
  Components comp(p.vocab.size());
  std::set<WordId> content;
  for (const auto& s : p.corpus.sentences) {
    WordId anchor = -1;
    for (const auto& tok : s) {
      if (pos_of(p.inventory.tag(tok.tag)) == "Art") continue;
      content.insert(tok.word);
      if (anchor >= 0) comp.join(anchor, tok.word);
      anchor = tok.word;
    }
  }
  std::set<int> roots;
  for (WordId w : content) roots.insert(comp.find(w));
  CHECK(roots.size() == 2);

  spec.topic_coherence = 0.0;
  auto q = parse_text(generate(spec));
  Components mixed(q.vocab.size());
  std::set<WordId> content_q;
  for (const auto& s : q.corpus.sentences) {
    WordId anchor = -1;
    for (const auto& tok : s) {
      if (pos_of(q.inventory.tag(tok.tag)) == "Art") continue;
      content_q.insert(tok.word);
      if (anchor >= 0) mixed.join(anchor, tok.word);
      anchor = tok.word;
    }
  }
  std::set<int> roots_q;
  for (WordId w : content_q) roots_q.insert(mixed.find(w));
  CHECK(roots_q.size() == 1);
}

TEST_CASE("ambiguity adds a second parse in the next case") {
  SynthSpec spec;
  spec.ambiguity = 1.0;
  spec.noise = 0.0;
  spec.token_count = 30000;
  auto p = parse_text(generate(spec));
  std::size_t two = 0;
  for (const auto& parses : p.corpus.parses) {
    CHECK(parses.size() <= 2);
    if (parses.size() == 2) {
      ++two;
      const auto a = split_subtags(p.inventory.tag(parses[0]));
      const auto b = split_subtags(p.inventory.tag(parses[1]));
      CHECK(a.front() == b.front());
      CHECK(a[1] != b[1]);
    }
  }
  CHECK(two > 150);
}

TEST_CASE("spec files") {
  SynthSpec spec;
  spec.cases = 3;
  spec.noise = 0.25;
  spec.topics = 3;
  spec.topic_coherence = 0.5;
  spec.templates = {{0.5, {"Art", "N"}}, {0.5, {"Adj", "N"}}};
  std::istringstream in(format_synth_spec(spec));
  auto back = parse_synth_spec(in);
  CHECK(format_synth_spec(back) == format_synth_spec(spec));
  CHECK(back.templates.size() == 2);
  CHECK(synth_tag_set(back).size() == 3 + 2 * 3 * 2);

  auto rejects = [](const std::string& text) {
    std::istringstream s(text);
    CHECK_THROWS_AS(parse_synth_spec(s), UsageError);
  };
  rejects("noise = 1\n");
  rejects("template = 0.5 Art N\n");
  rejects("template = 1 Art Verb\n");
  rejects("colour = red\n");
  rejects("tokens = many\n");
  rejects("cases = 5\n");

  SynthSpec empty;
  empty.templates.clear();
  CHECK_THROWS_AS(generate(empty), UsageError);
}

TEST_CASE("oracle joint") {
  TagInventory inv;
  for (const char* t : {"A", "B", "A.B"}) featurize_tag(t, inv, FeaturizeMode::kOpen);
  auto zero = ModelParams::zeros(4, 2, 3, 3);
  auto table = oracle_joint({4, 0}, zero, inv);
  REQUIRE(table.size() == 4);
  for (const auto& row : table) {
    REQUIRE(row.size() == 3);
    for (double v : row) CHECK(v == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
  }
  auto big = ModelParams::zeros(40000, 2, 1, 2);
  CHECK_THROWS_AS(oracle_joint({0}, big, inv), DataError);
  CHECK_THROWS_AS(oracle_joint({0}, zero, inv), DataError);
}
