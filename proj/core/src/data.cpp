#include "sest/data.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unordered_set>

#include "sest/error.hpp"
#include "sest/random.hpp"

namespace sest {

using nlohmann::json;

std::size_t QaExample::context_length() const {
  std::size_t n = 0;
  for (const auto& s : context) n += s.size();
  return n;
}

std::vector<Token> QaExample::context_tokens() const {
  std::vector<Token> out;
  out.reserve(context_length());
  for (const auto& s : context) {
    for (const auto& t : s.tokens) {
      out.push_back(t);
      out.back().index = out.size() - 1;
    }
  }
  return out;
}

std::string QaExample::context_text(std::size_t begin, std::size_t end) const {
  std::string out;
  std::size_t g = 0;
  for (const auto& s : context) {
    for (const auto& t : s.tokens) {
      if (g >= begin && g <= end) {
        if (!out.empty()) out += ' ';
        out += t.text;
      }
      ++g;
    }
  }
  return out;
}

namespace {

void validate_sentence(const Sentence& s, const std::string& where) {
  if (s.tokens.empty()) throw DataError(where + " has no tokens");
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    if (s.tokens[i].text.empty()) throw DataError(where + " token " + std::to_string(i) + " has empty text");
    if (s.tokens[i].index != i) throw DataError(where + " token indices are not contiguous");
  }
  if (s.ctree) {
    if (s.ctree->leaf_count() != s.tokens.size()) {
      throw DataError("parse/token mismatch: " + where + " constituency parse has " +
                      std::to_string(s.ctree->leaf_count()) + " leaves for " + std::to_string(s.tokens.size()) +
                      " tokens");
    }
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      if (s.ctree->tokens()[i].text != s.tokens[i].text) {
        throw DataError("parse/token mismatch: " + where + " leaf " + std::to_string(i) + " is '" +
                        s.ctree->tokens()[i].text + "' but token is '" + s.tokens[i].text + "'");
      }
    }
  }
  if (s.dtree) {
    if (s.dtree->size() != s.tokens.size()) {
      throw DataError("parse/token mismatch: " + where + " dependency parse covers " +
                      std::to_string(s.dtree->size()) + " tokens of " + std::to_string(s.tokens.size()));
    }
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      if (s.dtree->tokens()[i].text != s.tokens[i].text) {
        throw DataError("parse/token mismatch: " + where + " dependency token " + std::to_string(i) + " differs");
      }
    }
  }
}

json sentence_to_json(const Sentence& s) {
  json tokens = json::array();
  for (const auto& t : s.tokens) tokens.push_back({{"text", t.text}, {"pos", t.pos}});
  json out = {{"tokens", std::move(tokens)}};
  if (s.ctree) out["ctree"] = s.ctree->to_string();
  if (s.dtree) {
    json arcs = json::array();
    for (const auto& a : s.dtree->arcs()) arcs.push_back({{"head", a.head}, {"dep", a.dependent}, {"label", a.label}});
    out["dtree"] = std::move(arcs);
  }
  return out;
}

Sentence sentence_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw DataError(where + " is not an object");
  Sentence s;
  const auto& toks = j.at("tokens");
  if (!toks.is_array()) throw DataError(where + " tokens is not an array");
  for (const auto& tj : toks) {
    Token t;
    t.index = s.tokens.size();
    t.text = tj.at("text").get<std::string>();
    if (tj.contains("pos") && !tj.at("pos").is_null()) t.pos = tj.at("pos").get<std::string>();
    s.tokens.push_back(std::move(t));
  }
  if (j.contains("ctree") && !j.at("ctree").is_null()) {
    try {
      s.ctree = parse_constituency(j.at("ctree").get<std::string>());
    } catch (const ParseError& e) {
      throw DataError(where + " constituency parse: " + e.what());
    }
    if (s.ctree->leaf_count() == s.tokens.size()) {
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        if (s.tokens[i].pos.empty()) s.tokens[i].pos = s.ctree->tokens()[i].pos;
      }
    }
  }
  if (j.contains("dtree") && !j.at("dtree").is_null()) {
    std::vector<DependencyArc> arcs;
    for (const auto& aj : j.at("dtree")) {
      DependencyArc a;
      a.head = aj.at("head").get<int>();
      const long long dep = aj.at("dep").get<long long>();
      if (dep < 0) throw DataError(where + " dependency arc has a negative dependent");
      a.dependent = static_cast<std::size_t>(dep);
      a.label = aj.at("label").get<std::string>();
      arcs.push_back(std::move(a));
    }
    if (arcs.size() != s.tokens.size()) {
      throw DataError("parse/token mismatch: " + where + " has " + std::to_string(arcs.size()) +
                      " dependency arcs for " + std::to_string(s.tokens.size()) + " tokens");
    }
    try {
      s.dtree = DependencyTree(s.tokens, std::move(arcs));
    } catch (const StructureError& e) {
      throw DataError(where + " dependency parse: " + e.what());
    }
  }
  return s;
}

std::size_t checked_index(const json& j, const char* key) {
  const long long v = j.at(key).get<long long>();
  if (v < 0) throw DataError(std::string("answer.") + key + " is negative");
  return static_cast<std::size_t>(v);
}

}  // namespace

void validate_example(const QaExample& ex) {
  if (ex.id.empty()) throw DataError("example id is empty");
  if (ex.context.empty()) throw DataError("context has no sentences");
  for (std::size_t i = 0; i < ex.context.size(); ++i) {
    validate_sentence(ex.context[i], "context sentence " + std::to_string(i));
  }
  validate_sentence(ex.question, "question");
  const std::size_t n = ex.context_length();
  if (ex.answer.begin > ex.answer.end) {
    throw DataError("answer.begin " + std::to_string(ex.answer.begin) + " exceeds answer.end " +
                    std::to_string(ex.answer.end));
  }
  if (ex.answer.end >= n) {
    throw DataError("answer.end " + std::to_string(ex.answer.end) + " outside context of " + std::to_string(n) +
                    " tokens");
  }
}

std::string example_to_json(const QaExample& ex) {
  json ctx = json::array();
  for (const auto& s : ex.context) ctx.push_back(sentence_to_json(s));
  json j = {{"id", ex.id},
            {"context", std::move(ctx)},
            {"question", sentence_to_json(ex.question)},
            {"answer", {{"begin", ex.answer.begin}, {"end", ex.answer.end}}}};
  return j.dump();
}

QaExample example_from_json(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed record: ") + e.what());
  }
  try {
    QaExample ex;
    ex.id = j.at("id").get<std::string>();
    const auto& ctx = j.at("context");
    if (!ctx.is_array()) throw DataError("context is not an array");
    for (std::size_t i = 0; i < ctx.size(); ++i) {
      ex.context.push_back(sentence_from_json(ctx[i], "context sentence " + std::to_string(i)));
    }
    ex.question = sentence_from_json(j.at("question"), "question");
    ex.answer.begin = checked_index(j.at("answer"), "begin");
    ex.answer.end = checked_index(j.at("answer"), "end");
    validate_example(ex);
    return ex;
  } catch (const json::exception& e) {
    throw DataError(std::string("schema violation: ") + e.what());
  }
}

Corpus read_corpus(std::istream& in) {
  Corpus corpus;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string id = "<line " + std::to_string(line_no) + ">";
    try {
      const json j = json::parse(line);
      if (j.is_object() && j.contains("id") && j.at("id").is_string()) id = j.at("id").get<std::string>();
    } catch (const json::exception&) {
    }
    try {
      QaExample ex = example_from_json(line);
      if (!seen.insert(ex.id).second) throw DataError("duplicate id");
      corpus.examples.push_back(std::move(ex));
    } catch (const DataError& e) {
      corpus.rejected.push_back({id, e.what()});
    }
  }
  if (corpus.examples.empty()) {
    throw DataError("corpus has no valid examples (" + std::to_string(corpus.rejected.size()) + " rejected)");
  }
  return corpus;
}

Corpus load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read corpus file '" + path + "'");
  return read_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& ex : corpus.examples) out << example_to_json(ex) << '\n';
}

void save_corpus(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write corpus file '" + path + "'");
  write_corpus(corpus, out);
  if (!out) throw IoError("failed writing corpus file '" + path + "'");
}

std::string validation_report(const Corpus& corpus) {
  std::string out;
  for (const auto& r : corpus.rejected) {
    out += json{{"example_id", r.example_id}, {"reason", r.reason}}.dump();
    out += '\n';
  }
  return out;
}

namespace {

std::string token_where(const QaExample& ex, bool question, std::size_t sentence, std::size_t token,
                        const std::string& text) {
  std::string s = "example '" + ex.id + "' ";
  s += question ? "question" : "context sentence " + std::to_string(sentence);
  s += " token " + std::to_string(token) + " ('" + text + "')";
  return s;
}

std::vector<SyntacticSequence> annotate_sentence(const QaExample& ex, const Sentence& s, bool question,
                                                 std::size_t sentence_index, const ExtractionConfig& cfg,
                                                 SequenceKind kind, LabelVocab& labels, LabelVocab& words) {
  std::vector<SyntacticSequence> out;
  out.reserve(s.size());
  const std::uint64_t base = mix_seed(mix_seed(cfg.seed, fnv1a(ex.id)),
                                      (static_cast<std::uint64_t>(question) << 32) | sentence_index);
  for (std::size_t i = 0; i < s.size(); ++i) {
    ExtractionConfig tcfg = cfg;
    tcfg.seed = mix_seed(base, i);
    const std::string& text = s.tokens[i].text;
    try {
      switch (kind) {
        case SequenceKind::kSect:
          if (!s.ctree) throw DataError(token_where(ex, question, sentence_index, i, text) + " has no constituency parse");
          out.push_back(extract_sect(*s.ctree, i, tcfg, labels));
          break;
        case SequenceKind::kSedt:
          if (!s.dtree) throw DataError(token_where(ex, question, sentence_index, i, text) + " has no dependency parse");
          out.push_back(extract_sedt(*s.dtree, i, tcfg, labels, words));
          break;
        case SequenceKind::kPos:
          if (cfg.punctuation_set.count(s.tokens[i].pos)) {
            out.push_back({SequenceKind::kPos, {}});
          } else {
            SyntacticSequence seq = extract_pos(s.tokens[i], labels);
            out.push_back(apply_ablation(seq, cfg.order_mode, tcfg.seed, labels.size()));
          }
          break;
      }
    } catch (const DataError&) {
      throw;
    } catch (const Error& e) {
      throw DataError(token_where(ex, question, sentence_index, i, text) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

Annotation annotate(const QaExample& ex, const ExtractionConfig& cfg, SequenceKind kind, LabelVocab& labels,
                    LabelVocab& words) {
  cfg.validate();
  Annotation a;
  a.kind = kind;
  for (std::size_t si = 0; si < ex.context.size(); ++si) {
    auto seqs = annotate_sentence(ex, ex.context[si], false, si, cfg, kind, labels, words);
    a.context.insert(a.context.end(), std::make_move_iterator(seqs.begin()), std::make_move_iterator(seqs.end()));
  }
  a.question = annotate_sentence(ex, ex.question, true, 0, cfg, kind, labels, words);
  return a;
}

}  // namespace sest
