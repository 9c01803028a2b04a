#include "sest/treebank.hpp"

#include <algorithm>
#include <charconv>
#include <string>

#include "sest/error.hpp"

namespace sest {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

class BracketReader {
 public:
  explicit BracketReader(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  std::size_t position() const { return pos_; }

  // Reads one tree into `nodes` and returns the root id.
  int read_tree(std::vector<ConstituencyTree::Node>& nodes) {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("empty input: no tree found", pos_);
    if (text_[pos_] != '(') {
      if (text_[pos_] == ')') throw ParseError("unbalanced parentheses: unexpected ')'", pos_);
      throw ParseError("expected '(' at start of tree", pos_);
    }
    int root = read_node(nodes, ConstituencyTree::kNone);
    // Unwrap "( (S ...) )" style outer brackets.
    while (nodes[static_cast<std::size_t>(root)].label.empty()) {
      auto& wrapper = nodes[static_cast<std::size_t>(root)];
      if (wrapper.children.size() != 1 || nodes[static_cast<std::size_t>(wrapper.children[0])].is_leaf()) {
        throw ParseError("unlabeled bracket must wrap exactly one tree", wrapper_offset_);
      }
      root = wrapper.children[0];
      nodes[static_cast<std::size_t>(root)].parent = ConstituencyTree::kNone;
    }
    return root;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  std::string_view read_atom() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) && text_[pos_] != '(' && text_[pos_] != ')') ++pos_;
    return text_.substr(start, pos_ - start);
  }

  int read_node(std::vector<ConstituencyTree::Node>& nodes, int parent) {
    const std::size_t open = pos_;
    ++pos_;  // '('
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes.back().parent = parent;
    skip_space();
    if (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')') {
      nodes[static_cast<std::size_t>(id)].label = std::string(read_atom());
    } else if (parent == ConstituencyTree::kNone) {
      wrapper_offset_ = open;
    }
    bool has_word = false;
    bool has_tree = false;
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) {
        throw ParseError("unbalanced parentheses: '(' at byte " + std::to_string(open) + " is never closed",
                         open);
      }
      const char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        has_tree = true;
        const int child = read_node(nodes, id);
        nodes[static_cast<std::size_t>(id)].children.push_back(child);
        continue;
      }
      const std::size_t word_at = pos_;
      std::string word(read_atom());
      if (has_word) throw ParseError("preterminal has more than one word", word_at);
      has_word = true;
      const int leaf = static_cast<int>(nodes.size());
      nodes.push_back({});
      nodes.back().label = std::move(word);
      nodes.back().parent = id;
      nodes.back().token = 0;  // marker; renumbered by ConstituencyTree
      nodes[static_cast<std::size_t>(id)].children.push_back(leaf);
    }
    auto& self = nodes[static_cast<std::size_t>(id)];
    if (self.children.empty()) throw ParseError("bracket has no children", open);
    if (has_word && has_tree) throw ParseError("word mixed with subtrees: every leaf needs a preterminal", open);
    if (has_word && self.label.empty()) throw ParseError("leaf without preterminal label", open);
    if (self.label.empty() && parent != ConstituencyTree::kNone) throw ParseError("bracket has no label", open);
    return id;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t wrapper_offset_ = 0;
};

// Copies the subtree reachable from `root` into a compact arena.
std::vector<ConstituencyTree::Node> compact(const std::vector<ConstituencyTree::Node>& nodes, int root,
                                            int& new_root) {
  std::vector<ConstituencyTree::Node> out;
  std::vector<std::pair<int, int>> stack{{root, ConstituencyTree::kNone}};
  // Pre-order with an explicit stack so ids follow left-to-right order.
  while (!stack.empty()) {
    auto [old_id, new_parent] = stack.back();
    stack.pop_back();
    const auto& src = nodes[static_cast<std::size_t>(old_id)];
    const int id = static_cast<int>(out.size());
    ConstituencyTree::Node n;
    n.label = src.label;
    n.parent = new_parent;
    n.token = src.token;
    out.push_back(std::move(n));
    if (new_parent != ConstituencyTree::kNone) out[static_cast<std::size_t>(new_parent)].children.push_back(id);
    for (auto it = src.children.rbegin(); it != src.children.rend(); ++it) stack.emplace_back(*it, id);
  }
  new_root = 0;
  return out;
}

void append_bracketing(const ConstituencyTree& tree, int id, std::string& out) {
  const auto& n = tree.node(id);
  if (n.is_leaf()) {
    out += n.label;
    return;
  }
  out += '(';
  out += n.label;
  for (int child : n.children) {
    out += ' ';
    append_bracketing(tree, child, out);
  }
  out += ')';
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      return cols;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool parse_int(std::string_view s, long& out) {
  if (s.empty()) return false;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

ConstituencyTree::ConstituencyTree(std::vector<Node> nodes, int root) : nodes_(std::move(nodes)), root_(root) {
  if (root_ < 0 || static_cast<std::size_t>(root_) >= nodes_.size()) throw StructureError("tree root out of range");
  if (nodes_[static_cast<std::size_t>(root_)].parent != kNone) throw StructureError("tree root has a parent");
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<int> stack{root_};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) throw StructureError("child id out of range");
    if (seen[static_cast<std::size_t>(id)]) throw StructureError("constituency tree contains a cycle or shared node");
    seen[static_cast<std::size_t>(id)] = 1;
    ++visited;
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (n.is_leaf()) {
      if (!n.children.empty()) throw StructureError("leaf node has children");
      if (n.parent == kNone) throw StructureError("leaf has no preterminal");
      n.token = static_cast<int>(leaves_.size());
      leaves_.push_back(id);
      continue;
    }
    if (n.children.empty()) throw StructureError("internal node '" + n.label + "' has no children");
    for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) {
      const int child = *it;
      if (child >= 0 && static_cast<std::size_t>(child) < nodes_.size() &&
          nodes_[static_cast<std::size_t>(child)].parent != id) {
        throw StructureError("child/parent links disagree");
      }
      stack.push_back(child);
    }
  }
  if (visited != nodes_.size()) throw StructureError("constituency tree has unreachable nodes");
  tokens_.reserve(leaves_.size());
  for (std::size_t i = 0; i < leaves_.size(); ++i) {
    const auto& leaf_node = nodes_[static_cast<std::size_t>(leaves_[i])];
    tokens_.push_back({i, leaf_node.label, nodes_[static_cast<std::size_t>(leaf_node.parent)].label});
  }
}

int ConstituencyTree::leaf(std::size_t token_index) const {
  if (token_index >= leaves_.size()) {
    throw ArgumentError("token index " + std::to_string(token_index) + " out of range for tree with " +
                        std::to_string(leaves_.size()) + " leaves");
  }
  return leaves_[token_index];
}

int ConstituencyTree::preterminal(std::size_t token_index) const { return node(leaf(token_index)).parent; }

std::string ConstituencyTree::to_string() const {
  std::string out;
  if (root_ != kNone) append_bracketing(*this, root_, out);
  return out;
}

bool operator==(const ConstituencyTree& a, const ConstituencyTree& b) { return a.to_string() == b.to_string(); }

ConstituencyTree parse_constituency(std::string_view text) {
  BracketReader reader(text);
  std::vector<ConstituencyTree::Node> nodes;
  const int root = reader.read_tree(nodes);
  if (!reader.at_end()) {
    throw ParseError(text[reader.position()] == ')' ? "unbalanced parentheses: unexpected ')'"
                                                    : "trailing input after tree",
                     reader.position());
  }
  int new_root = 0;
  auto compacted = compact(nodes, root, new_root);
  return ConstituencyTree(std::move(compacted), new_root);
}

std::vector<ConstituencyTree> parse_constituency_forest(std::string_view text) {
  BracketReader reader(text);
  std::vector<ConstituencyTree> trees;
  while (!reader.at_end()) {
    std::vector<ConstituencyTree::Node> nodes;
    const int root = reader.read_tree(nodes);
    int new_root = 0;
    auto compacted = compact(nodes, root, new_root);
    trees.emplace_back(std::move(compacted), new_root);
  }
  return trees;
}

DependencyTree::DependencyTree(std::vector<Token> tokens, std::vector<DependencyArc> arcs)
    : tokens_(std::move(tokens)), arcs_(std::move(arcs)) {
  const std::size_t n = tokens_.size();
  if (arcs_.size() != n) {
    throw StructureError("dependency tree has " + std::to_string(arcs_.size()) + " arcs for " + std::to_string(n) +
                         " tokens");
  }
  std::sort(arcs_.begin(), arcs_.end(), [](const auto& x, const auto& y) { return x.dependent < y.dependent; });
  std::size_t roots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& arc = arcs_[i];
    if (arc.dependent != i) {
      throw StructureError("token " + std::to_string(i) + " is not the dependent of exactly one arc");
    }
    if (arc.head == kRootHead) {
      ++roots;
      root_ = i;
    } else if (arc.head < 0 || static_cast<std::size_t>(arc.head) >= n) {
      throw StructureError("arc head " + std::to_string(arc.head) + " out of range");
    } else if (static_cast<std::size_t>(arc.head) == i) {
      throw StructureError("token " + std::to_string(i) + " heads itself");
    }
  }
  if (n > 0 && roots != 1) {
    throw StructureError("dependency tree must have exactly one root arc, found " + std::to_string(roots));
  }
  // 0 = unvisited, 1 = on current chain, 2 = known to reach the root.
  std::vector<char> state(n, 0);
  for (std::size_t start = 0; start < n; ++start) {
    std::vector<std::size_t> chain;
    std::size_t cur = start;
    while (state[cur] == 0) {
      state[cur] = 1;
      chain.push_back(cur);
      if (arcs_[cur].head == kRootHead) break;
      cur = static_cast<std::size_t>(arcs_[cur].head);
    }
    if (state[cur] == 1 && arcs_[cur].head != kRootHead) {
      throw StructureError("dependency heads form a cycle through token " + std::to_string(cur));
    }
    for (std::size_t v : chain) state[v] = 2;
  }
  for (std::size_t i = 0; i < n; ++i) tokens_[i].index = i;
}

std::vector<DependencyTree> parse_conllu(std::string_view text) {
  std::vector<DependencyTree> out;
  std::vector<Token> tokens;
  std::vector<DependencyArc> arcs;
  std::size_t sentence_line = 0;
  auto flush = [&] {
    if (tokens.empty()) return;
    try {
      out.emplace_back(std::move(tokens), std::move(arcs));
    } catch (const StructureError& e) {
      throw StructureError("sentence starting at line " + std::to_string(sentence_line) + ": " + e.what());
    }
    tokens.clear();
    arcs.clear();
  };

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      flush();
      if (end == text.size()) break;
      continue;
    }
    if (line.front() == '#') continue;

    const auto cols = split_tabs(line);
    if (cols[0].find('-') != std::string_view::npos || cols[0].find('.') != std::string_view::npos) continue;
    if (cols.size() < 7) throw ParseError("line " + std::to_string(line_no) + ": missing HEAD column", line_no);
    if (cols.size() < 8) throw ParseError("line " + std::to_string(line_no) + ": missing DEPREL column", line_no);

    long id = 0;
    if (!parse_int(cols[0], id)) throw ParseError("line " + std::to_string(line_no) + ": bad ID", line_no);
    if (tokens.empty()) sentence_line = line_no;
    if (id != static_cast<long>(tokens.size()) + 1) {
      throw ParseError("line " + std::to_string(line_no) + ": token IDs must be consecutive from 1", line_no);
    }
    long head = 0;
    if (!parse_int(cols[6], head) || head < 0) {
      throw ParseError("line " + std::to_string(line_no) + ": missing or invalid HEAD", line_no);
    }
    if (cols[7].empty() || cols[7] == "_") {
      throw ParseError("line " + std::to_string(line_no) + ": missing DEPREL", line_no);
    }
    if (cols[1].empty()) throw ParseError("line " + std::to_string(line_no) + ": empty FORM", line_no);

    std::string_view pos = cols.size() > 4 && cols[4] != "_" ? cols[4] : (cols.size() > 3 ? cols[3] : "_");
    if (pos == "_") pos = {};
    const std::size_t index = tokens.size();
    tokens.push_back({index, std::string(cols[1]), std::string(pos)});
    arcs.push_back({head == 0 ? kRootHead : static_cast<int>(head - 1), index, std::string(cols[7])});
    if (end == text.size()) break;
  }
  flush();
  return out;
}

std::string to_conllu(const DependencyTree& tree) {
  std::string out;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const auto& tok = tree.tokens()[i];
    const auto& arc = tree.arc_of(i);
    out += std::to_string(i + 1);
    out += '\t';
    out += tok.text;
    out += "\t_\t_\t";
    out += tok.pos.empty() ? "_" : tok.pos;
    out += "\t_\t";
    out += std::to_string(arc.head == kRootHead ? 0 : arc.head + 1);
    out += '\t';
    out += arc.label;
    out += "\t_\t_\n";
  }
  out += '\n';
  return out;
}

std::vector<std::string> path_to_root(const ConstituencyTree& tree, std::size_t token_index) {
  std::vector<std::string> labels;
  int id = tree.preterminal(token_index);
  for (id = tree.node(id).parent; id != ConstituencyTree::kNone; id = tree.node(id).parent) {
    labels.push_back(tree.node(id).label);
  }
  return labels;
}

std::vector<std::pair<std::size_t, std::string>> dependents_of(const DependencyTree& tree,
                                                               std::size_t token_index) {
  if (token_index >= tree.size()) {
    throw ArgumentError("token index " + std::to_string(token_index) + " out of range for sentence of " +
                        std::to_string(tree.size()) + " tokens");
  }
  std::vector<std::pair<std::size_t, std::string>> deps;
  for (const auto& arc : tree.arcs()) {
    if (arc.head == static_cast<int>(token_index)) deps.emplace_back(arc.dependent, arc.label);
  }
  return deps;  // arcs are sorted by dependent
}

}  // namespace sest
