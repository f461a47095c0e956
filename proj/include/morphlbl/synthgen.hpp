#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "morphlbl/corpus.hpp"
#include "morphlbl/model.hpp"

namespace morphlbl {

// A phrase template: a sequence of parts of speech (Art, Adj, N) whose
// members agree in case, and Adj/N additionally in number.
struct PhraseTemplate {
  double probability = 0.0;
  std::vector<std::string> slots;
};

// Generator settings for a synthetic morphologically tagged corpus.
//
// Articles inflect for case; adjectives and nouns for case and number.
// The default (2 cases, 2 numbers) yields 10 tags over 7 sub-tags.
struct SynthSpec {
  int cases = 2;    // Nom, Gen, Dat, Acc (first `cases` of them)
  int numbers = 2;  // Sg, Pl
  int vocab_size = 200;
  std::vector<PhraseTemplate> templates{
      {0.35, {"Art", "Adj", "N"}},
      {0.30, {"Art", "N"}},
      {0.20, {"Adj", "N"}},
      {0.15, {"Art", "Adj", "Adj", "N"}},
  };
  int min_sentence_length = 3;
  int max_sentence_length = 12;
  std::size_t token_count = 50000;
  std::uint64_t seed = 7;
  // Probability that a slot emits a uniformly random word (with one of that
  // word's own tags) instead of a word carrying the slot's tag.
  double noise = 0.1;
  // Fraction of types that also carry the same tag with the next case.
  double ambiguity = 0.1;
  // Fraction of each tag's types that only occur once `late_onset` of the
  // tokens have been emitted.
  double late_fraction = 0.2;
  double late_onset = 0.5;
  // Exponent of the rank-frequency law of the types within each tag; 0 draws
  // them uniformly.
  double zipf = 1.0;
  // Adjectives and nouns are spread over `topics` topics. Each sentence has
  // one; a slot draws from it with probability `topic_coherence`.
  int topics = 1;
  double topic_coherence = 0.0;

  void validate() const;  // throws UsageError
};

SynthSpec parse_synth_spec(std::istream& in, SynthSpec base = {});
std::string format_synth_spec(const SynthSpec& spec);

// Tag strings of the scheme, in tag-id order of a corpus that uses them all.
std::vector<std::string> synth_tag_set(const SynthSpec& spec);

// Corpus text in the `word<TAB>tag` format, every token tagged.
std::string generate(const SynthSpec& spec);

// Brute-force p(w, t | h): plain loops over every cell, no shared code with
// the model's vectorized path. Guards against tables above 1e5 cells.
std::vector<std::vector<double>> oracle_joint(const std::vector<WordId>& history,
                                              const ModelParams& params,
                                              const TagInventory& inventory);

}  // namespace morphlbl
