#include "sest/eval.hpp"

#include <atomic>
#include <cctype>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "sest/error.hpp"

namespace sest {

using nlohmann::json;

std::string to_string(F1Metric metric) { return metric == F1Metric::kChar ? "char" : "token"; }

F1Metric parse_f1_metric(std::string_view text) {
  if (text == "char") return F1Metric::kChar;
  if (text == "token") return F1Metric::kToken;
  throw ArgumentError("unknown metric '" + std::string(text) + "' (expected char or token)");
}

namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_ws(s[i])) ++i;
    const std::size_t start = i;
    while (i < s.size() && !is_ws(s[i])) ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

double multiset_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& g : gold) ++counts[g];
  std::size_t common = 0;
  for (const auto& p : pred) {
    auto it = counts.find(p);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

std::vector<std::string> non_space_chars(std::string_view s) {
  std::vector<std::string> out;
  for (auto& ch : utf8_chars(s)) {
    if (ch.size() == 1 && is_ws(ch[0])) continue;
    out.push_back(std::move(ch));
  }
  return out;
}

}  // namespace

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  for (const auto& t : split_ws(s)) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::string squad_normalize(std::string_view s) {
  std::string lowered;
  lowered.reserve(s.size());
  for (char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::ispunct(u)) continue;
    lowered += u < 0x80 ? static_cast<char>(std::tolower(u)) : c;
  }
  std::string out;
  for (const auto& t : split_ws(lowered)) {
    if (t == "a" || t == "an" || t == "the") continue;
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

int exact_match(std::string_view pred, std::string_view gold, bool squad_style) {
  if (squad_style) return squad_normalize(pred) == squad_normalize(gold) ? 1 : 0;
  return normalize_whitespace(pred) == normalize_whitespace(gold) ? 1 : 0;
}

double f1_char(std::string_view pred, std::string_view gold) {
  return multiset_f1(non_space_chars(pred), non_space_chars(gold));
}

double f1_token(std::string_view pred, std::string_view gold) { return multiset_f1(split_ws(pred), split_ws(gold)); }

PredictionList predict_all(const SestModel& model, std::span<const PreparedExample> examples, std::size_t threads) {
  PredictionList out(examples.size());
  const auto work = [&](std::size_t i) {
    try {
      out[i] = {examples[i].id, model.predict(examples[i])};
    } catch (const DataError&) {
      throw;
    } catch (const Error& e) {
      throw DataError("question '" + examples[i].id + "': " + e.what());
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(threads, examples.size()));
  if (n_threads == 1) {
    for (std::size_t i = 0; i < examples.size(); ++i) work(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n_threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < examples.size(); i = next++) work(i);
      } catch (...) {
        errors[t] = std::current_exception();
        next = examples.size();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

EvalResult score(std::span<const PreparedExample> examples, const PredictionList& predictions,
                 const EvalOptions& options) {
  if (examples.size() != predictions.size()) {
    throw DataError("score: " + std::to_string(predictions.size()) + " predictions for " +
                    std::to_string(examples.size()) + " questions");
  }
  EvalResult r;
  r.metric = options.metric;
  double em_sum = 0.0;
  double f1_sum = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].id != predictions[i].id) {
      throw DataError("score: prediction id '" + predictions[i].id + "' does not match question '" + examples[i].id +
                      "'");
    }
    const auto& p = predictions[i].prediction;
    QuestionResult q;
    q.id = examples[i].id;
    q.predicted_text = p.answer_text;
    q.gold_text = examples[i].answer_text;
    q.em_hit = exact_match(q.predicted_text, q.gold_text, options.squad_style) == 1;
    const std::string pred = options.squad_style ? squad_normalize(q.predicted_text) : q.predicted_text;
    const std::string gold = options.squad_style ? squad_normalize(q.gold_text) : q.gold_text;
    q.f1 = options.metric == F1Metric::kChar ? f1_char(pred, gold) : f1_token(pred, gold);
    q.confidence = p.confidence;
    q.begin = p.begin;
    q.end = p.end;
    em_sum += q.em_hit ? 1.0 : 0.0;
    f1_sum += q.f1;
    r.per_question.push_back(std::move(q));
  }
  if (!examples.empty()) {
    r.em = em_sum / static_cast<double>(examples.size());
    r.f1 = f1_sum / static_cast<double>(examples.size());
  }
  return r;
}

EvalResult evaluate(const SestModel& model, std::span<const PreparedExample> examples, const EvalOptions& options) {
  return score(examples, predict_all(model, examples, options.threads), options);
}

EvalResult evaluate(const SestModel& model, const Corpus& corpus, const EvalOptions& options) {
  std::vector<PreparedExample> prepared;
  prepared.reserve(corpus.size());
  for (const auto& ex : corpus.examples) prepared.push_back(model.prepare(ex));
  return evaluate(model, prepared, options);
}

PredictionList ensemble(std::span<const PredictionList> models) {
  if (models.empty()) throw ArgumentError("ensemble needs at least one model");
  const std::size_t n = models.front().size();
  for (std::size_t m = 1; m < models.size(); ++m) {
    if (models[m].size() != n) throw DataError("ensemble: model " + std::to_string(m) + " covers a different question set");
  }
  PredictionList out;
  out.reserve(n);
  for (std::size_t q = 0; q < n; ++q) {
    const std::string& id = models.front()[q].id;
    std::map<std::pair<std::size_t, std::size_t>, std::pair<double, const Prediction*>> votes;
    for (std::size_t m = 0; m < models.size(); ++m) {
      const auto& kp = models[m][q];
      if (kp.id != id) {
        throw DataError("ensemble: model " + std::to_string(m) + " has question '" + kp.id + "' where '" + id +
                        "' was expected");
      }
      auto& slot = votes[{kp.prediction.begin, kp.prediction.end}];
      if (slot.second == nullptr) slot.second = &kp.prediction;
      slot.first += kp.prediction.confidence;
    }
    // std::map iterates spans in (begin, end) order, so strict > keeps the
    // smallest span among equal scores.
    auto best = votes.begin();
    for (auto it = votes.begin(); it != votes.end(); ++it) {
      if (it->second.first > best->second.first) best = it;
    }
    Prediction p = *best->second.second;
    p.confidence = best->second.first;
    out.push_back({id, std::move(p)});
  }
  return out;
}

std::vector<std::size_t> overlap_sets(std::span<const EvalResult> results) {
  if (results.empty()) throw ArgumentError("overlap_sets needs at least one result");
  if (results.size() > 20) throw ArgumentError("overlap_sets supports at most 20 results");
  const std::size_t n = results.front().per_question.size();
  for (std::size_t r = 1; r < results.size(); ++r) {
    if (results[r].per_question.size() != n) {
      throw DataError("overlap: result " + std::to_string(r) + " covers a different question set");
    }
  }
  std::vector<std::size_t> counts(std::size_t{1} << results.size(), 0);
  for (std::size_t q = 0; q < n; ++q) {
    std::size_t mask = 0;
    const std::string& id = results.front().per_question[q].id;
    for (std::size_t r = 0; r < results.size(); ++r) {
      const auto& pq = results[r].per_question[q];
      if (pq.id != id) {
        throw DataError("overlap: result " + std::to_string(r) + " has question '" + pq.id + "' where '" + id +
                        "' was expected");
      }
      if (pq.em_hit) mask |= std::size_t{1} << r;
    }
    ++counts[mask];
  }
  return counts;
}

std::string report_to_json(const EvalResult& result, const std::string& config_digest) {
  json per = json::array();
  for (const auto& q : result.per_question) {
    per.push_back({{"id", q.id},
                   {"predicted_text", q.predicted_text},
                   {"gold_text", q.gold_text},
                   {"em_hit", q.em_hit},
                   {"f1", q.f1},
                   {"confidence", q.confidence},
                   {"begin", q.begin},
                   {"end", q.end}});
  }
  json j = {{"config_digest", config_digest},
            {"metric", to_string(result.metric)},
            {"em", result.em},
            {"f1", result.f1},
            {"per_question", std::move(per)}};
  return j.dump(2) + "\n";
}

EvalResult report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    EvalResult r;
    r.metric = parse_f1_metric(j.at("metric").get<std::string>());
    r.em = j.at("em").get<double>();
    r.f1 = j.at("f1").get<double>();
    for (const auto& qj : j.at("per_question")) {
      QuestionResult q;
      q.id = qj.at("id").get<std::string>();
      q.predicted_text = qj.at("predicted_text").get<std::string>();
      q.gold_text = qj.at("gold_text").get<std::string>();
      q.em_hit = qj.at("em_hit").get<bool>();
      q.f1 = qj.at("f1").get<double>();
      q.confidence = qj.value("confidence", 0.0);
      q.begin = qj.value("begin", std::size_t{0});
      q.end = qj.value("end", std::size_t{0});
      r.per_question.push_back(std::move(q));
    }
    return r;
  } catch (const json::exception& e) {
    throw LoadError(std::string("malformed evaluation report: ") + e.what());
  } catch (const ArgumentError& e) {
    throw LoadError(std::string("malformed evaluation report: ") + e.what());
  }
}

void save_report(const EvalResult& result, const std::string& config_digest, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write report '" + path + "'");
  out << report_to_json(result, config_digest);
  if (!out) throw IoError("failed writing report '" + path + "'");
}

EvalResult load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read report '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return report_from_json(ss.str());
  } catch (const LoadError& e) {
    throw LoadError("report '" + path + "': " + e.what());
  }
}

}  // namespace sest
