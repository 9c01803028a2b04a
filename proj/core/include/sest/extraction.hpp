#pragma once

// Per-token syntactic sequences: constituency paths (SECT), windowed
// dependents (SEDT), and POS singletons, plus the ordering ablations.

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sest/treebank.hpp"

namespace sest {

enum class SequenceKind { kSect, kSedt, kPos };
enum class OrderMode { kOriginal, kRandomOrder, kRandomNodes };

std::string to_string(SequenceKind kind);
std::string to_string(OrderMode mode);
SequenceKind parse_sequence_kind(std::string_view text);  // "sect" | "sedt" | "pos"
OrderMode parse_order_mode(std::string_view text);        // "original" | "random-order" | "random-nodes"

struct SyntacticElement {
  static constexpr int kNoWord = -1;

  int label_id = 0;
  int word_id = kNoWord;  // dependent word; SEDT only

  bool has_word() const { return word_id != kNoWord; }
  friend bool operator==(const SyntacticElement&, const SyntacticElement&) = default;
  friend auto operator<=>(const SyntacticElement&, const SyntacticElement&) = default;
};

struct SyntacticSequence {
  SequenceKind kind = SequenceKind::kSect;
  std::vector<SyntacticElement> elements;

  std::size_t size() const { return elements.size(); }
  bool empty() const { return elements.empty(); }
  friend bool operator==(const SyntacticSequence&, const SyntacticSequence&) = default;
};

const std::set<std::string>& default_punctuation();

struct ExtractionConfig {
  std::size_t window = 10;
  OrderMode order_mode = OrderMode::kOriginal;
  std::uint64_t seed = 0;
  std::set<std::string> punctuation_set = default_punctuation();
  bool strip_dep_subcategories = true;

  // Throws ArgumentError when window == 0.
  void validate() const;
};

// Dense label ↔ id map. Id 0 is the reserved unknown label; once frozen,
// unseen labels resolve to it instead of growing the map.
class LabelVocab {
 public:
  static constexpr int kUnk = 0;
  static constexpr std::string_view kUnkLabel = "<unk>";

  LabelVocab();
  // Rebuilds a vocabulary from its id-ordered labels; labels[0] must be "<unk>".
  static LabelVocab from_labels(const std::vector<std::string>& labels, bool frozen);

  int intern(std::string_view label);
  int lookup(std::string_view label) const;
  bool contains(std::string_view label) const;
  const std::string& label(int id) const;
  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  friend bool operator==(const LabelVocab& a, const LabelVocab& b) {
    return a.labels_ == b.labels_ && a.frozen_ == b.frozen_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> ids_;
  bool frozen_ = false;
};

// Substring before the first ':' ("nmod:poss" -> "nmod").
std::string normalize_dep_label(std::string_view label);

SyntacticSequence extract_sect(const ConstituencyTree& tree, std::size_t token_index, const ExtractionConfig& cfg,
                               LabelVocab& vocab);

SyntacticSequence extract_sedt(const DependencyTree& tree, std::size_t token_index, const ExtractionConfig& cfg,
                               LabelVocab& label_vocab, LabelVocab& word_vocab);

// Single-element sequence holding the token's POS tag. Throws on empty pos.
SyntacticSequence extract_pos(const Token& token, LabelVocab& vocab);

// Original: identity. RandomOrder: seeded shuffle. RandomNodes: every label id
// redrawn uniformly from [0, label_vocab_size); word ids are redrawn too when
// word_vocab_size > 0.
SyntacticSequence apply_ablation(const SyntacticSequence& seq, OrderMode mode, std::uint64_t seed,
                                 std::size_t label_vocab_size, std::size_t word_vocab_size = 0);

// Fixed standard-normal vector keyed by (master_seed, label_id).
std::vector<double> node_vector(int label_id, std::size_t dim, std::uint64_t master_seed);

}  // namespace sest
