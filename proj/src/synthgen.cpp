#include "morphlbl/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <random>
#include <sstream>

#include "morphlbl/error.hpp"
#include "morphlbl/io_util.hpp"

namespace morphlbl {

namespace {

constexpr const char* kCaseNames[] = {"Nom", "Gen", "Dat", "Acc"};
constexpr const char* kNumberNames[] = {"Sg", "Pl"};
constexpr const char* kPos[] = {"Art", "Adj", "N"};

bool known_pos(const std::string& pos) {
  return std::find(std::begin(kPos), std::end(kPos), pos) != std::end(kPos);
}

bool inflects_for_number(const std::string& pos) { return pos != "Art"; }

bool has_topic(const std::string& pos) { return pos != "Art"; }

std::string make_tag(const std::string& pos, int c, int num) {
  std::string tag = pos + "." + kCaseNames[c];
  if (inflects_for_number(pos)) tag += std::string(".") + kNumberNames[num];
  return tag;
}

struct TagScheme {
  std::vector<std::string> tags;
  std::vector<std::string> pos;  // per tag
  std::vector<int> tag_case;
  std::vector<int> tag_number;

  int find(const std::string& p, int c, int num) const {
    for (std::size_t t = 0; t < tags.size(); ++t) {
      if (pos[t] == p && tag_case[t] == c && (!inflects_for_number(p) || tag_number[t] == num)) {
        return static_cast<int>(t);
      }
    }
    throw UsageError("no tag for " + p);
  }
};

TagScheme build_scheme(const SynthSpec& spec) {
  TagScheme s;
  for (const std::string p : kPos) {
    for (int c = 0; c < spec.cases; ++c) {
      const int numbers = inflects_for_number(p) ? spec.numbers : 1;
      for (int num = 0; num < numbers; ++num) {
        s.tags.push_back(make_tag(p, c, num));
        s.pos.push_back(p);
        s.tag_case.push_back(c);
        s.tag_number.push_back(num);
      }
    }
  }
  return s;
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

}  // namespace

void SynthSpec::validate() const {
  if (cases < 1 || cases > 4) throw UsageError("cases must be in [1, 4]");
  if (numbers < 1 || numbers > 2) throw UsageError("numbers must be in [1, 2]");
  if (templates.empty()) throw UsageError("synthetic spec has no templates");
  double total = 0.0;
  for (const auto& t : templates) {
    if (t.slots.empty()) throw UsageError("empty template");
    if (!(t.probability >= 0.0)) throw UsageError("negative template probability");
    for (const auto& s : t.slots) {
      if (!known_pos(s)) throw UsageError("unknown part of speech '" + s + "' in template");
    }
    total += t.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw UsageError("template probabilities sum to " + format_double(total) + ", not 1");
  }
  const int num_tags = cases + 2 * cases * numbers;
  if (vocab_size < num_tags) {
    throw UsageError("vocab_size must be at least the tag count " + std::to_string(num_tags));
  }
  if (min_sentence_length < 1 || max_sentence_length < min_sentence_length) {
    throw UsageError("invalid sentence length range");
  }
  if (token_count < 1) throw UsageError("token count must be positive");
  if (!(noise >= 0.0 && noise < 1.0)) throw UsageError("noise must be in [0, 1)");
  if (!(ambiguity >= 0.0 && ambiguity <= 1.0)) throw UsageError("ambiguity must be in [0, 1]");
  if (!(late_fraction >= 0.0 && late_fraction < 1.0)) {
    throw UsageError("late_fraction must be in [0, 1)");
  }
  if (!(late_onset >= 0.0 && late_onset <= 1.0)) throw UsageError("late_onset must be in [0, 1]");
  if (!(zipf >= 0.0 && zipf <= 4.0)) throw UsageError("zipf must be in [0, 4]");
  if (topics < 1) throw UsageError("topics must be >= 1");
  if (!(topic_coherence >= 0.0 && topic_coherence <= 1.0)) {
    throw UsageError("topic_coherence must be in [0, 1]");
  }
}

SynthSpec parse_synth_spec(std::istream& in, SynthSpec spec) {
  bool templates_reset = false;
  for (const auto& [key, value] : parse_key_values(in)) {
    try {
      if (key == "cases") {
        spec.cases = static_cast<int>(parse_int(value));
      } else if (key == "numbers") {
        spec.numbers = static_cast<int>(parse_int(value));
      } else if (key == "vocab_size") {
        spec.vocab_size = static_cast<int>(parse_int(value));
      } else if (key == "min_length") {
        spec.min_sentence_length = static_cast<int>(parse_int(value));
      } else if (key == "max_length") {
        spec.max_sentence_length = static_cast<int>(parse_int(value));
      } else if (key == "tokens") {
        spec.token_count = static_cast<std::size_t>(parse_int(value));
      } else if (key == "seed") {
        spec.seed = static_cast<std::uint64_t>(parse_int(value));
      } else if (key == "noise") {
        spec.noise = parse_double(value);
      } else if (key == "ambiguity") {
        spec.ambiguity = parse_double(value);
      } else if (key == "late_fraction") {
        spec.late_fraction = parse_double(value);
      } else if (key == "topics") {
        spec.topics = static_cast<int>(parse_int(value));
      } else if (key == "topic_coherence") {
        spec.topic_coherence = parse_double(value);
      } else if (key == "zipf") {
        spec.zipf = parse_double(value);
      } else if (key == "late_onset") {
        spec.late_onset = parse_double(value);
      } else if (key == "template") {
        if (!templates_reset) {
          spec.templates.clear();
          templates_reset = true;
        }
        std::istringstream fields(value);
        PhraseTemplate t;
        std::string prob;
        fields >> prob;
        t.probability = parse_double(prob);
        for (std::string slot; fields >> slot;) t.slots.push_back(slot);
        spec.templates.push_back(std::move(t));
      } else {
        throw UsageError("unknown synthetic spec key '" + key + "'");
      }
    } catch (const DataError& e) {
      throw UsageError("spec key '" + key + "': " + e.what());
    }
  }
  spec.validate();
  return spec;
}

std::string format_synth_spec(const SynthSpec& spec) {
  std::ostringstream out;
  out << "cases = " << spec.cases << '\n'
      << "numbers = " << spec.numbers << '\n'
      << "vocab_size = " << spec.vocab_size << '\n'
      << "min_length = " << spec.min_sentence_length << '\n'
      << "max_length = " << spec.max_sentence_length << '\n'
      << "tokens = " << spec.token_count << '\n'
      << "seed = " << spec.seed << '\n'
      << "noise = " << format_double(spec.noise) << '\n'
      << "ambiguity = " << format_double(spec.ambiguity) << '\n'
      << "late_fraction = " << format_double(spec.late_fraction) << '\n'
      << "late_onset = " << format_double(spec.late_onset) << '\n'
      << "zipf = " << format_double(spec.zipf) << '\n'
      << "topics = " << spec.topics << '\n'
      << "topic_coherence = " << format_double(spec.topic_coherence) << '\n';
  for (const auto& t : spec.templates) {
    out << "template = " << format_double(t.probability);
    for (const auto& s : t.slots) out << ' ' << s;
    out << '\n';
  }
  return out.str();
}

std::vector<std::string> synth_tag_set(const SynthSpec& spec) {
  spec.validate();
  return build_scheme(spec).tags;
}

std::string generate(const SynthSpec& spec) {
  spec.validate();
  const TagScheme scheme = build_scheme(spec);
  const int num_tags = static_cast<int>(scheme.tags.size());
  std::mt19937_64 rng(spec.seed);

  // Word inventory: each type has a primary tag, optionally a second one.
  struct WordInfo {
    std::string surface;
    std::vector<int> tags;
    bool late = false;
    double weight = 1.0;
    int topic = -1;
  };
  std::vector<WordInfo> words;
  std::vector<int> pos_counter(std::size(kPos), 0);
  for (int t = 0; t < num_tags; ++t) {
    const int n = spec.vocab_size / num_tags + (t < spec.vocab_size % num_tags ? 1 : 0);
    const int late = std::min(n - 1, static_cast<int>(std::lround(spec.late_fraction * n)));
    const auto pos_index = static_cast<std::size_t>(
        std::find(std::begin(kPos), std::end(kPos), scheme.pos[static_cast<std::size_t>(t)]) -
        std::begin(kPos));
    for (int i = 0; i < n; ++i) {
      WordInfo info;
      info.surface = lower(scheme.pos[static_cast<std::size_t>(t)]) +
                     std::to_string(pos_counter[pos_index]++);
      info.tags.push_back(t);
      info.late = i >= n - late;
      info.weight = std::pow(static_cast<double>(i + 1), -spec.zipf);
      if (has_topic(scheme.pos[static_cast<std::size_t>(t)])) info.topic = i % spec.topics;
      words.push_back(std::move(info));
    }
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (spec.cases > 1) {
    for (auto& w : words) {
      if (unit(rng) < spec.ambiguity) {
        const auto t = static_cast<std::size_t>(w.tags.front());
        w.tags.push_back(scheme.find(scheme.pos[t], (scheme.tag_case[t] + 1) % spec.cases,
                                     scheme.tag_number[t]));
      }
    }
  }

  // Weighted candidate pools per (phase, tag, topic); topic slot 0 means any.
  struct Pool {
    std::vector<int> ids;
    std::discrete_distribution<std::size_t> draw;
  };
  const auto topic_slots = static_cast<std::size_t>(spec.topics) + 1;
  std::vector<Pool> pools(2 * static_cast<std::size_t>(num_tags) * topic_slots);
  auto pool_at = [&](bool late_ok, int tag, int topic) -> Pool& {
    return pools[((late_ok ? 1u : 0u) * static_cast<std::size_t>(num_tags) +
                  static_cast<std::size_t>(tag)) * topic_slots + static_cast<std::size_t>(topic + 1)];
  };
  std::vector<int> all_early, all_words;
  for (std::size_t i = 0; i < words.size(); ++i) {
    for (int t : words[i].tags) {
      for (bool phase : {false, true}) {
        if (!phase && words[i].late) continue;
        pool_at(phase, t, -1).ids.push_back(static_cast<int>(i));
        if (words[i].topic >= 0) pool_at(phase, t, words[i].topic).ids.push_back(static_cast<int>(i));
      }
    }
    all_words.push_back(static_cast<int>(i));
    if (!words[i].late) all_early.push_back(static_cast<int>(i));
  }
  for (auto& pool : pools) {
    std::vector<double> w;
    for (int i : pool.ids) w.push_back(words[static_cast<std::size_t>(i)].weight);
    if (!w.empty()) pool.draw = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }

  std::vector<double> weights;
  for (const auto& t : spec.templates) weights.push_back(t.probability);
  std::discrete_distribution<std::size_t> pick_template(weights.begin(), weights.end());
  std::uniform_int_distribution<int> pick_case(0, spec.cases - 1);
  std::uniform_int_distribution<int> pick_number(0, spec.numbers - 1);
  std::uniform_int_distribution<int> pick_topic(0, spec.topics - 1);
  std::uniform_int_distribution<int> pick_length(spec.min_sentence_length,
                                                 spec.max_sentence_length);
  auto pick = [&rng](const std::vector<int>& from) {
    std::uniform_int_distribution<std::size_t> d(0, from.size() - 1);
    return from[d(rng)];
  };

  const auto onset = static_cast<std::size_t>(
      std::ceil(spec.late_onset * static_cast<double>(spec.token_count)));
  std::string out;
  std::size_t emitted = 0;
  while (emitted < spec.token_count) {
    if (emitted > 0) out += '\n';
    const int target = pick_length(rng);
    const int topic = pick_topic(rng);
    int length = 0;
    while (length < target && emitted < spec.token_count) {
      const auto& tmpl = spec.templates[pick_template(rng)];
      const int c = pick_case(rng);
      const int num = pick_number(rng);
      for (const auto& slot : tmpl.slots) {
        if (emitted >= spec.token_count) break;
        const bool late_ok = emitted >= onset;
        int word = 0;
        int tag = 0;
        if (unit(rng) < spec.noise) {
          word = pick(late_ok ? all_words : all_early);
          const auto& tags = words[static_cast<std::size_t>(word)].tags;
          tag = tags.size() == 1 ? tags.front() : pick(tags);
        } else {
          tag = scheme.find(slot, c, num);
          Pool* pool = &pool_at(late_ok, tag, -1);
          if (has_topic(slot) && unit(rng) < spec.topic_coherence) {
            Pool& on_topic = pool_at(late_ok, tag, topic);
            if (!on_topic.ids.empty()) pool = &on_topic;
          }
          word = pool->ids[pool->draw(rng)];
        }
        out += words[static_cast<std::size_t>(word)].surface;
        out += '\t';
        out += scheme.tags[static_cast<std::size_t>(tag)];
        out += '\n';
        ++emitted;
        ++length;
      }
    }
  }
  return out;
}

std::vector<std::vector<double>> oracle_joint(const std::vector<WordId>& history,
                                              const ModelParams& params,
                                              const TagInventory& inventory) {
  const int V = params.num_words();
  const int T = inventory.size();
  const int d = params.dim;
  if (static_cast<long long>(V) * T > 100000) throw DataError("oracle table too large");
  if (static_cast<int>(history.size()) != params.order - 1) throw DataError("bad history length");

  std::vector<double> context(static_cast<std::size_t>(d), 0.0);
  for (std::size_t i = 0; i < history.size(); ++i) {
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        context[static_cast<std::size_t>(a)] +=
            params.context_weights[i](a, b) * params.context_embeddings(history[i], b);
      }
    }
  }

  std::vector<std::vector<double>> table(static_cast<std::size_t>(V),
                                         std::vector<double>(static_cast<std::size_t>(T), 0.0));
  double total = 0.0;
  for (int w = 0; w < V; ++w) {
    for (int t = 0; t < T; ++t) {
      const auto bits = inventory.features(t);
      double score = params.bias(w);
      for (int a = 0; a < d; ++a) {
        double v = context[static_cast<std::size_t>(a)];
        for (std::size_t j = 0; j < bits.size(); ++j) {
          if (bits[j]) v += params.subtag_weights(static_cast<Eigen::Index>(j), a);
        }
        score += v * params.target_embeddings(w, a);
      }
      const double e = std::exp(score);
      table[static_cast<std::size_t>(w)][static_cast<std::size_t>(t)] = e;
      total += e;
    }
  }
  for (auto& row : table) {
    for (auto& cell : row) cell /= total;
  }
  return table;
}

}  // namespace morphlbl
