#include <doctest.h>

#include <algorithm>
#include <random>

#include "sest/error.hpp"
#include "sest/extraction.hpp"
#include "support.hpp"

using namespace sest;

namespace {

std::vector<std::string> labels_of(const SyntacticSequence& s, const LabelVocab& v) {
  std::vector<std::string> out;
  for (const auto& e : s.elements) out.push_back(v.label(e.label_id));
  return out;
}

std::vector<std::string> words_of(const SyntacticSequence& s, const LabelVocab& v) {
  std::vector<std::string> out;
  for (const auto& e : s.elements) out.push_back(v.label(e.word_id));
  return out;
}

ExtractionConfig with_window(std::size_t w) {
  ExtractionConfig c;
  c.window = w;
  return c;
}

SyntacticSequence sect_of(std::initializer_list<int> ids) {
  SyntacticSequence s;
  for (int id : ids) s.elements.push_back({id, SyntacticElement::kNoWord});
  return s;
}

}  // namespace

TEST_SUITE("extraction") {
  TEST_CASE("coordinator path with window 2 and 10") {
    const auto t = test::coordinator_tree();
    LabelVocab v;
    CHECK(labels_of(extract_sect(t, test::kCoordinator, with_window(2), v), v) ==
          std::vector<std::string>{"NP", "PP"});
    const auto full = extract_sect(t, test::kCoordinator, with_window(10), v);
    CHECK(full.kind == SequenceKind::kSect);
    CHECK(labels_of(full, v) == std::vector<std::string>{"NP", "PP", "VP", "S"});
    for (const auto& e : full.elements) CHECK_FALSE(e.has_word());
  }

  TEST_CASE("punctuation preterminal yields an empty sequence") {
    const auto t = parse_constituency("(S (NP (NN dogs)) (, ,) (VP (VBP bark)) (. .))");
    LabelVocab v;
    CHECK(extract_sect(t, 1, with_window(10), v).empty());
    CHECK(extract_sect(t, 3, with_window(10), v).empty());
    CHECK(extract_sect(t, 0, with_window(10), v).size() == 2);
  }

  TEST_CASE("phrase node labelled as punctuation also filters") {
    const auto t = parse_constituency("(S (, (XX a)) (NP (NN b)))");
    LabelVocab v;
    CHECK(extract_sect(t, 0, with_window(10), v).empty());
  }

  TEST_CASE("invalid token index") {
    const auto t = test::coordinator_tree();
    LabelVocab v;
    CHECK_THROWS_AS(extract_sect(t, 99, with_window(10), v), ArgumentError);
    LabelVocab l, w;
    CHECK_THROWS_AS(extract_sedt(test::unit_tree(), 45, with_window(10), l, w), ArgumentError);
  }

  TEST_CASE("window zero is rejected") { CHECK_THROWS_AS(with_window(0).validate(), ArgumentError); }

  TEST_CASE("default punctuation set") {
    CHECK(default_punctuation() == std::set<std::string>{"$", ":", "#", ".", "''", "``", ","});
  }

  TEST_CASE("sect output is a bounded prefix of the root path") {
    const auto t = test::coordinator_tree();
    for (std::size_t w = 1; w <= 5; ++w) {
      for (std::size_t i = 0; i < t.leaf_count(); ++i) {
        LabelVocab v;
        const auto got = labels_of(extract_sect(t, i, with_window(w), v), v);
        const auto path = path_to_root(t, i);
        CHECK(got.size() <= w);
        CHECK(std::equal(got.begin(), got.end(), path.begin()));
      }
    }
  }

  TEST_CASE("unit dependents with window 20") {
    LabelVocab l, w;
    const auto s = extract_sedt(test::unit_tree(), test::kUnit, with_window(20), l, w);
    CHECK(s.kind == SequenceKind::kSedt);
    CHECK(words_of(s, w) == std::vector<std::string>{"Conference", "is", "the", "basic", "organization"});
    CHECK(labels_of(s, l) == std::vector<std::string>{"nsubj", "cop", "det", "amod", "nmod"});
  }

  TEST_CASE("unit dependents with window 2 break ties leftward") {
    LabelVocab l, w;
    const auto s = extract_sedt(test::unit_tree(), test::kUnit, with_window(2), l, w);
    CHECK(words_of(s, w) == std::vector<std::string>{"the", "basic"});
  }

  TEST_CASE("subcategories kept when stripping is off") {
    ExtractionConfig c = with_window(20);
    c.strip_dep_subcategories = false;
    LabelVocab l, w;
    const auto s = extract_sedt(test::unit_tree(), test::kUnit, c, l, w);
    CHECK(labels_of(s, l).back() == "nmod:of");
  }

  TEST_CASE("token without dependents") {
    LabelVocab l, w;
    CHECK(extract_sedt(test::unit_tree(), 0, with_window(20), l, w).empty());
  }

  TEST_CASE("sedt positions increase and respect the window") {
    const auto t = test::unit_tree();
    for (std::size_t win : {1, 2, 3, 20}) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        LabelVocab l, w;
        const auto s = extract_sedt(t, i, with_window(win), l, w);
        CHECK(s.size() <= win);
        const auto deps = dependents_of(t, i);
        CHECK(s.size() == std::min(win, deps.size()));
        for (const auto& e : s.elements) CHECK(e.has_word());
      }
    }
  }

  TEST_CASE("pos singletons") {
    LabelVocab v;
    CHECK(labels_of(extract_pos({0, "dog", "NN"}, v), v) == std::vector<std::string>{"NN"});
    CHECK(labels_of(extract_pos({1, "runs", "VBZ"}, v), v) == std::vector<std::string>{"VBZ"});
    CHECK(extract_pos({1, "runs", "VBZ"}, v).kind == SequenceKind::kPos);
    CHECK_THROWS_AS(extract_pos({0, "x", ""}, v), ArgumentError);
  }

  TEST_CASE("dependency label normalization") {
    CHECK(normalize_dep_label("nmod:poss") == "nmod");
    CHECK(normalize_dep_label("nsubj") == "nsubj");
    CHECK(normalize_dep_label("a:b:c") == "a");
  }

  TEST_CASE("label vocabulary") {
    LabelVocab v;
    CHECK(v.size() == 1);
    CHECK(v.label(LabelVocab::kUnk) == "<unk>");
    const int np = v.intern("NP");
    CHECK(np == 1);
    CHECK(v.intern("NP") == np);
    v.freeze();
    CHECK(v.intern("QQ") == LabelVocab::kUnk);
    CHECK(v.lookup("QQ") == LabelVocab::kUnk);
    CHECK(v.size() == 2);
    const auto copy = LabelVocab::from_labels(v.labels(), true);
    CHECK(copy == v);
  }

  TEST_CASE("original ablation is the identity") {
    const auto s = sect_of({1, 2, 3, 4});
    CHECK(apply_ablation(s, OrderMode::kOriginal, 42, 10) == s);
  }

  TEST_CASE("random order permutes") {
    const auto s = sect_of({1, 2});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto out = apply_ablation(s, OrderMode::kRandomOrder, seed, 10);
      std::sort(out.elements.begin(), out.elements.end());
      CHECK(out == s);
    }
    const auto longer = sect_of({1, 2, 3, 4, 5, 6, 7, 8});
    bool moved = false;
    for (std::uint64_t seed = 0; seed < 20 && !moved; ++seed) {
      moved = apply_ablation(longer, OrderMode::kRandomOrder, seed, 10) != longer;
    }
    CHECK(moved);
  }

  TEST_CASE("random nodes keep length and vocabulary bounds") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t vocab = 2 + rng() % 30;
      const auto out = apply_ablation(sect_of({1, 1, 1, 1}), OrderMode::kRandomNodes, rng(), vocab);
      CHECK(out.size() == 4);
      for (const auto& e : out.elements) {
        CHECK(e.label_id >= 0);
        CHECK(static_cast<std::size_t>(e.label_id) < vocab);
      }
    }
  }

  TEST_CASE("random nodes redraw sedt words when a word vocabulary is given") {
    SyntacticSequence s;
    s.kind = SequenceKind::kSedt;
    for (int i = 0; i < 6; ++i) s.elements.push_back({1, 1});
    const auto out = apply_ablation(s, OrderMode::kRandomNodes, 3, 5, 50);
    for (const auto& e : out.elements) {
      CHECK(e.has_word());
      CHECK(e.word_id < 50);
    }
  }

  TEST_CASE("ablations are deterministic") {
    const auto s = sect_of({1, 2, 3, 4, 5});
    CHECK(apply_ablation(s, OrderMode::kRandomOrder, 9, 10) == apply_ablation(s, OrderMode::kRandomOrder, 9, 10));
    CHECK(apply_ablation(s, OrderMode::kRandomNodes, 9, 10) == apply_ablation(s, OrderMode::kRandomNodes, 9, 10));
  }

  TEST_CASE("node vectors") {
    const auto a = node_vector(3, 8, 77);
    CHECK(a.size() == 8);
    CHECK(node_vector(3, 8, 77) == a);
    CHECK(node_vector(4, 8, 77) != a);
    CHECK(node_vector(3, 8, 78) != a);
  }

  TEST_CASE("extraction on a tree is deterministic") {
    const auto t = test::coordinator_tree();
    ExtractionConfig c = with_window(10);
    c.order_mode = OrderMode::kRandomOrder;
    c.seed = 11;
    LabelVocab v1, v2;
    CHECK(extract_sect(t, test::kCoordinator, c, v1) == extract_sect(t, test::kCoordinator, c, v2));
  }
}
