#include <array>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sest/data.hpp"
#include "sest/error.hpp"
#include "sest/random.hpp"

namespace sest {

namespace {

constexpr std::array kNouns = {
    "architect", "engineer", "coordinator", "manager", "teacher",  "doctor",   "pilot",    "farmer",
    "lawyer",    "painter",  "student",     "nurse",   "writer",   "singer",   "driver",   "baker",
    "officer",   "chemist",  "banker",      "sailor",  "dancer",   "planner",  "editor",   "builder",
    "gardener",  "merchant", "trader",      "scholar", "minister", "director", "inspector", "clerk",
    "surgeon",   "judge",    "guard",       "poet",    "actor",    "tailor",   "mayor",    "captain",
    "priest",    "cook",     "hunter",      "miner",   "weaver",   "porter",   "herald",   "steward"};

struct Verb {
  const char* past;
  const char* base;
};

constexpr std::array<Verb, 16> kVerbs = {{{"saw", "see"},
                                          {"met", "meet"},
                                          {"hired", "hire"},
                                          {"called", "call"},
                                          {"helped", "help"},
                                          {"paid", "pay"},
                                          {"praised", "praise"},
                                          {"visited", "visit"},
                                          {"thanked", "thank"},
                                          {"followed", "follow"},
                                          {"trained", "train"},
                                          {"chose", "choose"},
                                          {"warned", "warn"},
                                          {"guided", "guide"},
                                          {"greeted", "greet"},
                                          {"joined", "join"}}};

constexpr std::array kAdjectives = {"young", "senior", "local", "new",   "famous", "quiet",  "clever", "busy",
                                    "tall",  "polite", "proud", "eager", "calm",   "honest", "brave",  "kind"};

constexpr std::array kDeterminers = {"the", "a"};
constexpr std::array kLocPreps = {"in", "at", "near", "behind"};
constexpr std::array kModPreps = {"of", "from", "with", "beside"};
constexpr std::array kPlaceNouns = {"office", "market", "garden", "station", "harbor", "library", "village", "castle"};

// Accumulates tokens and dependency arcs of one sentence.
class Builder {
 public:
  int add(const std::string& word, const std::string& pos) {
    tokens_.push_back({tokens_.size(), word, pos});
    arcs_.push_back({kRootHead, tokens_.size() - 1, ""});
    return static_cast<int>(tokens_.size() - 1);
  }
  void arc(int dependent, int head, const std::string& label) {
    arcs_[static_cast<std::size_t>(dependent)].head = head;
    arcs_[static_cast<std::size_t>(dependent)].label = label;
  }
  std::size_t size() const { return tokens_.size(); }

  Sentence finish(const std::string& bracket) {
    Sentence s;
    s.tokens = tokens_;
    s.ctree = parse_constituency(bracket);
    s.dtree = DependencyTree(tokens_, arcs_);
    return s;
  }

 private:
  std::vector<Token> tokens_;
  std::vector<DependencyArc> arcs_;
};

struct NpSpec {
  std::string det;
  std::vector<std::string> adjectives;
  std::string noun;
  std::optional<std::pair<std::string, std::string>> coordinated;  // (conjunction, noun)
};

struct FullNpSpec {
  NpSpec core;
  std::optional<std::pair<std::string, NpSpec>> modifier;  // (preposition, object)
};

struct Phrase {
  std::string bracket;
  int head = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

Phrase render(Builder& b, const NpSpec& np) {
  Phrase p;
  p.begin = b.size();
  std::string s = "(NP (DT " + np.det + ")";
  const int det = b.add(np.det, "DT");
  std::vector<int> adjs;
  for (const auto& a : np.adjectives) {
    s += " (JJ " + a + ")";
    adjs.push_back(b.add(a, "JJ"));
  }
  s += " (NN " + np.noun + ")";
  const int head = b.add(np.noun, "NN");
  b.arc(det, head, "det");
  for (int a : adjs) b.arc(a, head, "amod");
  if (np.coordinated) {
    s += " (CC " + np.coordinated->first + ") (NN " + np.coordinated->second + ")";
    const int cc = b.add(np.coordinated->first, "CC");
    const int conj = b.add(np.coordinated->second, "NN");
    b.arc(cc, conj, "cc");
    b.arc(conj, head, "conj:" + np.coordinated->first);
  }
  s += ")";
  p.bracket = std::move(s);
  p.head = head;
  p.end = b.size() - 1;
  return p;
}

// Renders a possibly modified NP; `core` receives the span of the head NP.
Phrase render(Builder& b, const FullNpSpec& np, Phrase& core) {
  core = render(b, np.core);
  if (!np.modifier) return core;
  const int prep = b.add(np.modifier->first, "IN");
  const Phrase inner = render(b, np.modifier->second);
  b.arc(prep, inner.head, "case");
  b.arc(inner.head, core.head, "nmod:" + np.modifier->first);
  Phrase p;
  p.bracket = "(NP " + core.bracket + " (PP (IN " + np.modifier->first + ") " + inner.bracket + "))";
  p.head = core.head;
  p.begin = core.begin;
  p.end = inner.end;
  return p;
}

class Generator {
 public:
  Generator(const ToyGrammarConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {}

  QaExample example(const std::string& id) {
    const Verb& verb_forms = kVerbs[pick(cfg_.n_verbs)];
    const std::string verb_past = verb_forms.past;
    const std::string verb_base = verb_forms.base;
    const auto question = static_cast<ToyQuestion>(pick(3));

    FullNpSpec subj{np(kNouns[pick(cfg_.n_nouns)]), std::nullopt};
    FullNpSpec obj{np(kNouns[pick(cfg_.n_nouns)]), std::nullopt};
    const bool has_loc = question == ToyQuestion::kLocation || coin(0.5);
    const bool fronted = coin(0.5);
    FullNpSpec loc{np(place()), std::nullopt};
    const std::string loc_prep = kLocPreps[pick(kLocPreps.size())];

    std::vector<FullNpSpec*> slots = {&subj, &obj};
    if (has_loc) slots.push_back(&loc);
    const std::size_t n_mod = std::min(pick(cfg_.distractors + 1), slots.size());
    std::shuffle(slots.begin(), slots.end(), rng_);
    const NpSpec& answer_core = question == ToyQuestion::kSubject  ? subj.core
                                : question == ToyQuestion::kObject ? obj.core
                                                                   : loc.core;
    for (std::size_t k = 0; k < n_mod; ++k) {
      // Modifier nouns often repeat the answer's noun so that only the
      // attachment site tells them apart.
      const std::string noun = coin(0.5) ? answer_core.noun : std::string(kNouns[pick(cfg_.n_nouns)]);
      slots[k]->modifier = std::make_pair(std::string(kModPreps[pick(kModPreps.size())]), np(noun));
    }

    // Context sentence.
    Builder cb;
    std::string bracket = "(S";
    Phrase loc_core;
    auto emit_loc = [&](int& prep_id, Phrase& phrase) {
      prep_id = cb.add(loc_prep, "IN");
      phrase = render(cb, loc, loc_core);
      cb.arc(prep_id, phrase.head, "case");
      return "(PP (IN " + loc_prep + ") " + phrase.bracket + ")";
    };
    int loc_prep_id = -1;
    Phrase loc_phrase;
    int comma = -1;
    if (has_loc && fronted) {
      bracket += " " + emit_loc(loc_prep_id, loc_phrase);
      comma = cb.add(",", ",");
      bracket += " (, ,)";
    }
    Phrase subj_core;
    const Phrase subj_phrase = render(cb, subj, subj_core);
    bracket += " " + subj_phrase.bracket;
    const int verb = cb.add(verb_past, "VBD");
    Phrase obj_core;
    const Phrase obj_phrase = render(cb, obj, obj_core);
    bracket += " (VP (VBD " + verb_past + ") " + obj_phrase.bracket;
    if (has_loc && !fronted) bracket += " " + emit_loc(loc_prep_id, loc_phrase);
    bracket += ")";
    const int stop = cb.add(".", ".");
    bracket += " (. .))";
    cb.arc(subj_phrase.head, verb, "nsubj");
    cb.arc(obj_phrase.head, verb, "obj");
    if (has_loc) cb.arc(loc_phrase.head, verb, "obl:loc");
    if (comma >= 0) cb.arc(comma, verb, "punct");
    cb.arc(stop, verb, "punct");

    // Question sentence.
    Builder qb;
    std::string qbracket;
    Phrase scratch;
    int qverb = -1;
    switch (question) {
      case ToyQuestion::kSubject: {
        const int who = qb.add("who", "WP");
        const int v = qb.add(verb_past, "VBD");
        const Phrase o = render(qb, FullNpSpec{obj.core, std::nullopt}, scratch);
        qverb = v;
        qb.arc(who, v, "nsubj");
        qb.arc(o.head, v, "obj");
        qbracket = "(SBARQ (WHNP (WP who)) (SQ (VP (VBD " + verb_past + ") " + o.bracket + ")) (. ?))";
        break;
      }
      case ToyQuestion::kObject: {
        const int what = qb.add("what", "WP");
        const int did = qb.add("did", "VBD");
        const Phrase s = render(qb, FullNpSpec{subj.core, std::nullopt}, scratch);
        const int v = qb.add(verb_base, "VB");
        qverb = v;
        qb.arc(what, v, "obj");
        qb.arc(did, v, "aux");
        qb.arc(s.head, v, "nsubj");
        qbracket = "(SBARQ (WHNP (WP what)) (SQ (VBD did) " + s.bracket + " (VP (VB " + verb_base + "))) (. ?))";
        break;
      }
      case ToyQuestion::kLocation: {
        const int where = qb.add("where", "WRB");
        const int did = qb.add("did", "VBD");
        const Phrase s = render(qb, FullNpSpec{subj.core, std::nullopt}, scratch);
        const int v = qb.add(verb_base, "VB");
        const Phrase o = render(qb, FullNpSpec{obj.core, std::nullopt}, scratch);
        qverb = v;
        qb.arc(where, v, "advmod");
        qb.arc(did, v, "aux");
        qb.arc(s.head, v, "nsubj");
        qb.arc(o.head, v, "obj");
        qbracket = "(SBARQ (WHADVP (WRB where)) (SQ (VBD did) " + s.bracket + " (VP (VB " + verb_base + ") " +
                   o.bracket + ")) (. ?))";
        break;
      }
    }
    qb.arc(qb.add("?", "."), qverb, "punct");

    QaExample ex;
    ex.id = id;
    ex.context.push_back(cb.finish(bracket));
    const Phrase& answer = question == ToyQuestion::kSubject  ? subj_core
                           : question == ToyQuestion::kObject ? obj_core
                                                              : loc_core;
    ex.answer = {answer.begin, answer.end};
    ex.question = qb.finish(qbracket);
    validate_example(ex);
    return ex;
  }

 private:
  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::string place() { return kPlaceNouns[pick(kPlaceNouns.size())]; }

  NpSpec np(const std::string& noun) {
    NpSpec s;
    s.det = kDeterminers[pick(kDeterminers.size())];
    const std::size_t n_adj = pick(3);
    for (std::size_t i = 0; i < n_adj; ++i) s.adjectives.emplace_back(kAdjectives[pick(cfg_.n_adjectives)]);
    s.noun = noun;
    if (coin(0.25)) s.coordinated = std::make_pair(std::string(coin(0.5) ? "or" : "and"), std::string(kNouns[pick(cfg_.n_nouns)]));
    return s;
  }

  const ToyGrammarConfig& cfg_;
  std::mt19937_64 rng_;
};

}  // namespace

void ToyGrammarConfig::validate() const {
  if (n_examples == 0) throw ArgumentError("toy corpus needs n_examples >= 1");
  if (n_nouns < 2 || n_nouns > kNouns.size()) {
    throw ArgumentError("toy n_nouns must be in [2, " + std::to_string(kNouns.size()) + "]");
  }
  if (n_verbs < 1 || n_verbs > kVerbs.size()) {
    throw ArgumentError("toy n_verbs must be in [1, " + std::to_string(kVerbs.size()) + "]");
  }
  if (n_adjectives < 1 || n_adjectives > kAdjectives.size()) {
    throw ArgumentError("toy n_adjectives must be in [1, " + std::to_string(kAdjectives.size()) + "]");
  }
}

Corpus gen_toy_corpus(const ToyGrammarConfig& cfg) {
  cfg.validate();
  Corpus corpus;
  corpus.examples.reserve(cfg.n_examples);
  for (std::size_t i = 0; i < cfg.n_examples; ++i) {
    Generator g(cfg, mix_seed(cfg.seed, i));
    corpus.examples.push_back(g.example("toy-" + std::to_string(cfg.seed) + "-" + std::to_string(i)));
  }
  return corpus;
}

QaExample tiny_example() {
  Builder cb;
  const int the = cb.add("the", "DT");
  const int dog = cb.add("dog", "NN");
  const int runs = cb.add("runs", "VBZ");
  cb.arc(the, dog, "det");
  cb.arc(dog, runs, "nsubj");
  Builder qb;
  const int who = qb.add("who", "WP");
  const int qruns = qb.add("runs", "VBZ");
  qb.arc(who, qruns, "nsubj");
  QaExample ex;
  ex.id = "tiny";
  ex.context.push_back(cb.finish("(S (NP (DT the) (NN dog)) (VP (VBZ runs)))"));
  ex.question = qb.finish("(SBARQ (WHNP (WP who)) (SQ (VP (VBZ runs))))");
  ex.answer = {0, 1};
  return ex;
}

}  // namespace sest
