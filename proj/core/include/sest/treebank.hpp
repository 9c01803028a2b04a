#pragma once

// Token-aligned constituency and dependency trees, plus readers for
// bracketed (Penn Treebank style) and CoNLL-U input.

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sest {

struct Token {
  std::size_t index = 0;
  std::string text;
  std::string pos;

  friend bool operator==(const Token&, const Token&) = default;
};

// Phrase-structure tree stored as an arena. Leaf nodes hold a word and map
// to a token; every other node carries a grammar-category label.
class ConstituencyTree {
 public:
  static constexpr int kNone = -1;

  struct Node {
    std::string label;  // category for internal nodes, word for leaves
    int parent = kNone;
    std::vector<int> children;
    int token = kNone;  // token index for leaves, kNone otherwise

    bool is_leaf() const { return token != kNone; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  ConstituencyTree() = default;
  ConstituencyTree(std::vector<Node> nodes, int root);

  int root() const { return root_; }
  const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  std::size_t node_count() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }

  const std::vector<Token>& tokens() const { return tokens_; }
  std::size_t leaf_count() const { return leaves_.size(); }
  // Node id of the leaf for `token_index`.
  int leaf(std::size_t token_index) const;
  // Node id of the preterminal (POS node) above the leaf.
  int preterminal(std::size_t token_index) const;

  const std::string& root_label() const { return node(root_).label; }

  // Canonical bracketing: "(LABEL child child ...)", leaves as "(POS word)".
  std::string to_string() const;

  // Structural equality (labels, shape, and leaf words).
  friend bool operator==(const ConstituencyTree& a, const ConstituencyTree& b);

 private:
  std::vector<Node> nodes_;
  int root_ = kNone;
  std::vector<int> leaves_;
  std::vector<Token> tokens_;
};

inline constexpr int kRootHead = -1;

struct DependencyArc {
  int head = kRootHead;  // 0-based token index, or kRootHead
  std::size_t dependent = 0;
  std::string label;

  friend bool operator==(const DependencyArc&, const DependencyArc&) = default;
};

// Dependency tree over a sentence; arcs()[i] is the arc whose dependent is i.
class DependencyTree {
 public:
  DependencyTree() = default;
  // Validates the tree invariants; throws StructureError on violation.
  DependencyTree(std::vector<Token> tokens, std::vector<DependencyArc> arcs);

  const std::vector<Token>& tokens() const { return tokens_; }
  const std::vector<DependencyArc>& arcs() const { return arcs_; }
  std::size_t size() const { return tokens_.size(); }
  std::size_t root() const { return root_; }
  const DependencyArc& arc_of(std::size_t dependent) const { return arcs_.at(dependent); }

  friend bool operator==(const DependencyTree&, const DependencyTree&) = default;

 private:
  std::vector<Token> tokens_;
  std::vector<DependencyArc> arcs_;
  std::size_t root_ = 0;
};

// Parses exactly one bracketed tree. An unlabeled outer wrapper "( (S ...) )"
// is unwrapped. Throws ParseError carrying a byte offset.
ConstituencyTree parse_constituency(std::string_view text);

// Parses every tree in `text` (one per line or whitespace-concatenated).
std::vector<ConstituencyTree> parse_constituency_forest(std::string_view text);

// Parses a CoNLL-U document. Multiword ranges ("1-2") and empty nodes ("1.1")
// are skipped. Throws ParseError (line number) or StructureError.
std::vector<DependencyTree> parse_conllu(std::string_view text);

// Serializes back to ten-column CoNLL-U.
std::string to_conllu(const DependencyTree& tree);

// Phrase labels from the leaf's grandparent up to the root (the preterminal
// is excluded), nearest first.
std::vector<std::string> path_to_root(const ConstituencyTree& tree, std::size_t token_index);

// (dependent index, label) for every arc headed by `token_index`, ascending.
std::vector<std::pair<std::size_t, std::string>> dependents_of(const DependencyTree& tree,
                                                               std::size_t token_index);

}  // namespace sest
