#pragma once

// Question-answering corpus records, their JSON-lines encoding, per-token
// syntactic annotation, and the synthetic grammar corpus.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sest/extraction.hpp"
#include "sest/treebank.hpp"

namespace sest {

struct Sentence {
  std::vector<Token> tokens;
  std::optional<ConstituencyTree> ctree;
  std::optional<DependencyTree> dtree;

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct AnswerSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // inclusive
  friend bool operator==(const AnswerSpan&, const AnswerSpan&) = default;
};

struct QaExample {
  std::string id;
  std::vector<Sentence> context;
  Sentence question;
  AnswerSpan answer;

  std::size_t context_length() const;
  // Context tokens in global order (indices renumbered from 0).
  std::vector<Token> context_tokens() const;
  // Tokens begin..end joined by single spaces.
  std::string context_text(std::size_t begin, std::size_t end) const;
  std::string answer_text() const { return context_text(answer.begin, answer.end); }

  friend bool operator==(const QaExample&, const QaExample&) = default;
};

struct Rejection {
  std::string example_id;  // "<line N>" when the id itself is unreadable
  std::string reason;
};

struct Corpus {
  std::vector<QaExample> examples;
  std::vector<Rejection> rejected;

  std::size_t size() const { return examples.size(); }
};

// Throws DataError describing the first violated invariant.
void validate_example(const QaExample& example);

// One JSON object per line; see README for the schema.
std::string example_to_json(const QaExample& example);
QaExample example_from_json(const std::string& line);  // parses and validates

// Invalid records are collected in `rejected`. Throws IoError when the file
// cannot be read and DataError when no record is valid.
Corpus load_corpus(const std::string& path);
Corpus read_corpus(std::istream& in);
void save_corpus(const Corpus& corpus, const std::string& path);
void write_corpus(const Corpus& corpus, std::ostream& out);

// Rejection report, one {"example_id", "reason"} object per line.
std::string validation_report(const Corpus& corpus);

struct Annotation {
  SequenceKind kind = SequenceKind::kSect;
  std::vector<SyntacticSequence> context;   // one per global context token
  std::vector<SyntacticSequence> question;  // one per question token

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

// Runs the extractor of `kind` on every token. Ablations are seeded per
// token occurrence from cfg.seed, the example id and the token position.
// POS tokens whose tag is punctuation get an empty sequence.
Annotation annotate(const QaExample& example, const ExtractionConfig& cfg, SequenceKind kind, LabelVocab& labels,
                    LabelVocab& words);

struct ToyGrammarConfig {
  std::size_t n_examples = 100;
  std::uint64_t seed = 1;
  std::size_t n_nouns = 40;
  std::size_t n_verbs = 12;
  std::size_t n_adjectives = 12;
  // Upper bound on noun phrases that receive a prepositional modifier.
  std::size_t distractors = 2;

  void validate() const;
};

// Question kinds of the toy grammar.
enum class ToyQuestion { kSubject, kObject, kLocation };

Corpus gen_toy_corpus(const ToyGrammarConfig& cfg);

// Three-token context / two-token question instance with both parses.
QaExample tiny_example();

}  // namespace sest
