#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sest/data.hpp"
#include "sest/error.hpp"
#include "support.hpp"

using namespace sest;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("sest_test_" + name)).string();
}

std::string tiny_json() { return example_to_json(tiny_example()); }

std::string with_id(std::string line, const std::string& id) {
  const auto pos = line.find("\"id\":\"tiny\"");
  REQUIRE(pos != std::string::npos);
  return line.replace(pos, 11, "\"id\":\"" + id + "\"");
}

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  REQUIRE(pos != std::string::npos);
  return s.replace(pos, from.size(), to);
}

using Tree = ConstituencyTree;

std::pair<std::size_t, std::size_t> leaf_span(const Tree& t, int id) {
  const auto& n = t.node(id);
  if (n.is_leaf()) return {static_cast<std::size_t>(n.token), static_cast<std::size_t>(n.token)};
  std::pair<std::size_t, std::size_t> span{SIZE_MAX, 0};
  for (int c : n.children) {
    const auto s = leaf_span(t, c);
    span.first = std::min(span.first, s.first);
    span.second = std::max(span.second, s.second);
  }
  return span;
}

int child_labeled(const Tree& t, int id, const std::string& label) {
  for (int c : t.node(id).children) {
    if (t.node(c).label == label) return c;
  }
  return Tree::kNone;
}

// A modified noun phrase is (NP (NP core) (PP ...)); the answer is the core.
int np_core(const Tree& t, int np) {
  const int inner = child_labeled(t, np, "NP");
  return inner == Tree::kNone ? np : inner;
}

// Reads the answer off the context tree using only the question word.
std::pair<std::size_t, std::size_t> syntax_oracle(const QaExample& ex) {
  const Tree& t = *ex.context.at(0).ctree;
  const std::string& wh = ex.question.tokens.at(0).text;
  const int s = t.root();
  const int vp = child_labeled(t, s, "VP");
  int np = Tree::kNone;
  if (wh == "who") {
    np = child_labeled(t, s, "NP");
  } else if (wh == "what") {
    np = child_labeled(t, vp, "NP");
  } else if (wh == "where") {
    int pp = child_labeled(t, vp, "PP");
    if (pp == Tree::kNone) pp = child_labeled(t, s, "PP");
    REQUIRE(pp != Tree::kNone);
    np = child_labeled(t, pp, "NP");
  }
  REQUIRE(np != Tree::kNone);
  return leaf_span(t, np_core(t, np));
}

bool is_np_span(const Tree& t, std::size_t b, std::size_t e) {
  for (std::size_t id = 0; id < t.node_count(); ++id) {
    if (t.node(static_cast<int>(id)).label == "NP" && leaf_span(t, static_cast<int>(id)) == std::pair{b, e}) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("data") {
  TEST_CASE("reading valid records") {
    std::stringstream in(with_id(tiny_json(), "a") + "\n" + with_id(tiny_json(), "b") + "\n\n" +
                         with_id(tiny_json(), "c") + "\n");
    const auto c = read_corpus(in);
    CHECK(c.size() == 3);
    CHECK(c.rejected.empty());
    CHECK(c.examples[2].id == "c");
  }

  TEST_CASE("answers outside the context are rejected") {
    const auto bad = replace_once(with_id(tiny_json(), "far"), "\"end\":1", "\"end\":3");
    std::stringstream in(tiny_json() + "\n" + bad + "\n");
    const auto c = read_corpus(in);
    CHECK(c.size() == 1);
    REQUIRE(c.rejected.size() == 1);
    CHECK(c.rejected[0].example_id == "far");
    const auto report = validation_report(c);
    CHECK(report.find("\"example_id\":\"far\"") != std::string::npos);
    CHECK(report.find("outside context") != std::string::npos);
  }

  TEST_CASE("parse/token mismatch") {
    const auto bad = replace_once(with_id(tiny_json(), "mis"), "(VBZ runs)", "(VBZ runs) (RB fast)");
    std::stringstream in(tiny_json() + "\n" + bad + "\n");
    const auto c = read_corpus(in);
    REQUIRE(c.rejected.size() == 1);
    CHECK(c.rejected[0].reason.find("parse/token mismatch") != std::string::npos);
    CHECK_THROWS_AS(example_from_json(bad), DataError);
  }

  TEST_CASE("other malformed records") {
    std::stringstream in(tiny_json() + "\n{not json\n" + tiny_json() + "\n" +
                         replace_once(with_id(tiny_json(), "rev"), "\"begin\":0,\"end\":1", "\"begin\":1,\"end\":0") +
                         "\n");
    const auto c = read_corpus(in);
    CHECK(c.size() == 1);
    REQUIRE(c.rejected.size() == 3);
    CHECK(c.rejected[0].example_id == "<line 2>");
    CHECK(c.rejected[1].reason == "duplicate id");
    CHECK(c.rejected[2].example_id == "rev");
  }

  TEST_CASE("unreadable and empty corpora") {
    CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl"), IoError);
    std::stringstream empty("{broken\n");
    CHECK_THROWS_AS(read_corpus(empty), DataError);
  }

  TEST_CASE("corpus files round trip") {
    const auto corpus = gen_toy_corpus({.n_examples = 25, .seed = 9});
    const auto path = temp_path("roundtrip.jsonl");
    save_corpus(corpus, path);
    const auto back = load_corpus(path);
    std::remove(path.c_str());
    CHECK(back.examples == corpus.examples);
    std::ostringstream a, b;
    write_corpus(corpus, a);
    write_corpus(back, b);
    CHECK(a.str() == b.str());
  }

  TEST_CASE("toy generation is deterministic") {
    const ToyGrammarConfig cfg{.n_examples = 1, .seed = 7};
    CHECK(gen_toy_corpus(cfg).examples == gen_toy_corpus(cfg).examples);
    const ToyGrammarConfig other{.n_examples = 1, .seed = 8};
    CHECK(gen_toy_corpus(cfg).examples != gen_toy_corpus(other).examples);
    CHECK_THROWS_AS(gen_toy_corpus({.n_examples = 0}), ArgumentError);
  }

  TEST_CASE("toy answers are noun phrases picked out by syntax") {
    const auto corpus = gen_toy_corpus({.n_examples = 300, .seed = 3});
    std::size_t hits = 0;
    std::set<std::string> wh;
    for (const auto& ex : corpus.examples) {
      const Tree& t = *ex.context.at(0).ctree;
      CHECK(is_np_span(t, ex.answer.begin, ex.answer.end));
      if (syntax_oracle(ex) == std::pair{ex.answer.begin, ex.answer.end}) ++hits;
      wh.insert(ex.question.tokens.at(0).text);
    }
    CHECK(hits == corpus.size());
    CHECK(wh == std::set<std::string>{"what", "where", "who"});
  }

  TEST_CASE("toy answers share words with distractors") {
    const auto corpus = gen_toy_corpus({.n_examples = 200, .seed = 4});
    std::size_t repeated = 0;
    for (const auto& ex : corpus.examples) {
      const auto tokens = ex.context_tokens();
      const auto& head = tokens[ex.answer.end].text;
      std::size_t count = 0;
      for (const auto& tok : tokens) count += tok.text == head;
      repeated += count > 1;
    }
    CHECK(repeated > 20);
  }

  TEST_CASE("toy dependency trees are well formed") {
    const auto corpus = gen_toy_corpus({.n_examples = 100, .seed = 5});
    for (const auto& ex : corpus.examples) {
      for (const Sentence* s : {&ex.context.at(0), &ex.question}) {
        REQUIRE(s->dtree);
        const auto& d = *s->dtree;
        std::size_t roots = 0;
        for (const auto& arc : d.arcs()) roots += arc.head == kRootHead;
        CHECK(roots == 1);
        for (std::size_t i = 0; i < d.size(); ++i) {
          std::size_t steps = 0;
          int cur = static_cast<int>(i);
          while (cur != kRootHead && steps <= d.size()) {
            cur = d.arc_of(static_cast<std::size_t>(cur)).head;
            ++steps;
          }
          CHECK(cur == kRootHead);
        }
        CHECK_NOTHROW(DependencyTree(d.tokens(), d.arcs()));
      }
    }
  }

  TEST_CASE("annotation lengths") {
    const auto corpus = gen_toy_corpus({.n_examples = 20, .seed = 6});
    ExtractionConfig cfg;
    cfg.window = 10;
    for (const auto& ex : corpus.examples) {
      LabelVocab labels, words;
      const auto pos = annotate(ex, cfg, SequenceKind::kPos, labels, words);
      const auto tokens = ex.context_tokens();
      REQUIRE(pos.context.size() == tokens.size());
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        const bool punct = default_punctuation().count(tokens[i].pos) > 0;
        CHECK(pos.context[i].size() == (punct ? 0u : 1u));
      }
      const auto sect = annotate(ex, cfg, SequenceKind::kSect, labels, words);
      CHECK(sect.question.size() == ex.question.size());
      for (const auto& s : sect.context) CHECK(s.size() <= 10);
      CHECK(annotate(ex, cfg, SequenceKind::kSect, labels, words) == sect);
    }
  }

  TEST_CASE("dependency annotation keeps the nearest dependents") {
    std::vector<Token> tokens;
    std::vector<DependencyArc> arcs;
    const char* labels[] = {"det", "amod", "nsubj", "", "obj", "advmod", "obl", "punct"};
    for (std::size_t i = 0; i < 8; ++i) {
      tokens.push_back({i, "w" + std::to_string(i), i == 7 ? "." : "NN"});
      arcs.push_back({i == 3 ? kRootHead : 3, i, labels[i]});
    }
    QaExample ex;
    ex.id = "hub";
    ex.context.push_back({tokens, std::nullopt, DependencyTree(tokens, arcs)});
    ex.question = ex.context[0];
    ex.answer = {3, 3};
    ExtractionConfig cfg;
    cfg.window = 2;
    LabelVocab lv, wv;
    const auto a = annotate(ex, cfg, SequenceKind::kSedt, lv, wv);
    REQUIRE(a.context[3].size() == 2);
    CHECK(wv.label(a.context[3].elements[0].word_id) == "w2");
    CHECK(wv.label(a.context[3].elements[1].word_id) == "w4");
    CHECK_THROWS_AS(annotate(ex, cfg, SequenceKind::kSect, lv, wv), DataError);
  }

  TEST_CASE("annotation errors name the token") {
    auto ex = tiny_example();
    ex.question.dtree.reset();
    LabelVocab lv, wv;
    try {
      annotate(ex, ExtractionConfig{}, SequenceKind::kSedt, lv, wv);
      FAIL("expected a data error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("who") != std::string::npos);
    }
  }

  TEST_CASE("context helpers") {
    const auto ex = tiny_example();
    CHECK(ex.context_length() == 3);
    CHECK(ex.answer_text() == "the dog");
    CHECK(ex.context_tokens()[2].text == "runs");
  }
}
