#include "sest/extraction.hpp"

#include <algorithm>
#include <random>

#include "sest/error.hpp"
#include "sest/random.hpp"

namespace sest {

std::string to_string(SequenceKind kind) {
  switch (kind) {
    case SequenceKind::kSect: return "sect";
    case SequenceKind::kSedt: return "sedt";
    case SequenceKind::kPos: return "pos";
  }
  return "?";
}

std::string to_string(OrderMode mode) {
  switch (mode) {
    case OrderMode::kOriginal: return "original";
    case OrderMode::kRandomOrder: return "random-order";
    case OrderMode::kRandomNodes: return "random-nodes";
  }
  return "?";
}

SequenceKind parse_sequence_kind(std::string_view text) {
  if (text == "sect") return SequenceKind::kSect;
  if (text == "sedt") return SequenceKind::kSedt;
  if (text == "pos") return SequenceKind::kPos;
  throw ArgumentError("unknown sequence kind '" + std::string(text) + "' (expected sect, sedt or pos)");
}

OrderMode parse_order_mode(std::string_view text) {
  if (text == "original") return OrderMode::kOriginal;
  if (text == "random-order") return OrderMode::kRandomOrder;
  if (text == "random-nodes") return OrderMode::kRandomNodes;
  throw ArgumentError("unknown order mode '" + std::string(text) +
                      "' (expected original, random-order or random-nodes)");
}

const std::set<std::string>& default_punctuation() {
  static const std::set<std::string> kSet{"$", ":", "#", ".", "''", "``", ","};
  return kSet;
}

void ExtractionConfig::validate() const {
  if (window == 0) throw ArgumentError("extraction window must be >= 1");
}

LabelVocab::LabelVocab() {
  labels_.emplace_back(kUnkLabel);
  ids_.emplace(std::string(kUnkLabel), kUnk);
}

LabelVocab LabelVocab::from_labels(const std::vector<std::string>& labels, bool frozen) {
  if (labels.empty() || labels.front() != kUnkLabel) {
    throw ArgumentError("vocabulary must start with the reserved <unk> label");
  }
  LabelVocab vocab;
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (vocab.contains(labels[i])) throw ArgumentError("duplicate vocabulary label '" + labels[i] + "'");
    vocab.intern(labels[i]);
  }
  vocab.frozen_ = frozen;
  return vocab;
}

int LabelVocab::intern(std::string_view label) {
  auto it = ids_.find(std::string(label));
  if (it != ids_.end()) return it->second;
  if (frozen_) return kUnk;
  const int id = static_cast<int>(labels_.size());
  labels_.emplace_back(label);
  ids_.emplace(std::string(label), id);
  return id;
}

int LabelVocab::lookup(std::string_view label) const {
  auto it = ids_.find(std::string(label));
  return it == ids_.end() ? kUnk : it->second;
}

bool LabelVocab::contains(std::string_view label) const { return ids_.count(std::string(label)) > 0; }

const std::string& LabelVocab::label(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= labels_.size()) {
    throw ArgumentError("label id " + std::to_string(id) + " out of range");
  }
  return labels_[static_cast<std::size_t>(id)];
}

std::string normalize_dep_label(std::string_view label) {
  return std::string(label.substr(0, label.find(':')));
}

SyntacticSequence extract_sect(const ConstituencyTree& tree, std::size_t token_index, const ExtractionConfig& cfg,
                               LabelVocab& vocab) {
  cfg.validate();
  const auto path = path_to_root(tree, token_index);
  SyntacticSequence seq{SequenceKind::kSect, {}};
  const auto& pos = tree.node(tree.preterminal(token_index)).label;
  // The preterminal counts as the first node here even though the path
  // itself omits it.
  if (cfg.punctuation_set.count(pos) || (!path.empty() && cfg.punctuation_set.count(path.front()))) {
    return seq;
  }
  const std::size_t n = std::min(cfg.window, path.size());
  seq.elements.reserve(n);
  for (std::size_t i = 0; i < n; ++i) seq.elements.push_back({vocab.intern(path[i]), SyntacticElement::kNoWord});
  return apply_ablation(seq, cfg.order_mode, cfg.seed, vocab.size());
}

SyntacticSequence extract_sedt(const DependencyTree& tree, std::size_t token_index, const ExtractionConfig& cfg,
                               LabelVocab& label_vocab, LabelVocab& word_vocab) {
  cfg.validate();
  auto deps = dependents_of(tree, token_index);
  if (deps.size() > cfg.window) {
    const auto distance = [token_index](std::size_t d) {
      return d > token_index ? d - token_index : token_index - d;
    };
    // Nearest first; equal distance keeps the earlier sentence position.
    std::stable_sort(deps.begin(), deps.end(), [&](const auto& a, const auto& b) {
      return distance(a.first) < distance(b.first);
    });
    deps.resize(cfg.window);
    std::sort(deps.begin(), deps.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  SyntacticSequence seq{SequenceKind::kSedt, {}};
  seq.elements.reserve(deps.size());
  for (const auto& [dep, label] : deps) {
    const std::string norm = cfg.strip_dep_subcategories ? normalize_dep_label(label) : label;
    seq.elements.push_back({label_vocab.intern(norm), word_vocab.intern(tree.tokens()[dep].text)});
  }
  return apply_ablation(seq, cfg.order_mode, cfg.seed, label_vocab.size(), word_vocab.size());
}

SyntacticSequence extract_pos(const Token& token, LabelVocab& vocab) {
  if (token.pos.empty()) {
    throw ArgumentError("token " + std::to_string(token.index) + " ('" + token.text + "') has no POS tag");
  }
  return {SequenceKind::kPos, {{vocab.intern(token.pos), SyntacticElement::kNoWord}}};
}

SyntacticSequence apply_ablation(const SyntacticSequence& seq, OrderMode mode, std::uint64_t seed,
                                 std::size_t label_vocab_size, std::size_t word_vocab_size) {
  SyntacticSequence out = seq;
  if (mode == OrderMode::kOriginal || out.empty()) return out;
  std::mt19937_64 rng(mix64(seed));
  if (mode == OrderMode::kRandomOrder) {
    std::shuffle(out.elements.begin(), out.elements.end(), rng);
    return out;
  }
  if (label_vocab_size == 0) throw ArgumentError("random-nodes ablation needs a non-empty label vocabulary");
  std::uniform_int_distribution<int> label_dist(0, static_cast<int>(label_vocab_size) - 1);
  std::uniform_int_distribution<int> word_dist(0, std::max(0, static_cast<int>(word_vocab_size) - 1));
  for (auto& e : out.elements) {
    e.label_id = label_dist(rng);
    if (e.has_word() && word_vocab_size > 0) e.word_id = word_dist(rng);
  }
  return out;
}

std::vector<double> node_vector(int label_id, std::size_t dim, std::uint64_t master_seed) {
  if (dim == 0) throw ArgumentError("node vector dimension must be >= 1");
  std::mt19937_64 rng(mix_seed(master_seed, static_cast<std::uint64_t>(label_id)));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = normal(rng);
  return v;
}

}  // namespace sest
