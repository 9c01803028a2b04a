#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sest/data.hpp"
#include "sest/model.hpp"

namespace sest {

enum class F1Metric { kChar, kToken };

std::string to_string(F1Metric metric);
F1Metric parse_f1_metric(std::string_view text);  // "char" | "token"

// Collapses whitespace runs to one space and trims both ends.
std::string normalize_whitespace(std::string_view s);
// Lowercases ASCII, drops ASCII punctuation and the articles a/an/the, then
// normalizes whitespace.
std::string squad_normalize(std::string_view s);

int exact_match(std::string_view pred, std::string_view gold, bool squad_style = false);
// Multiset F1 over non-whitespace Unicode code points.
double f1_char(std::string_view pred, std::string_view gold);
// Multiset F1 over whitespace-separated tokens.
double f1_token(std::string_view pred, std::string_view gold);

struct QuestionResult {
  std::string id;
  std::string predicted_text;
  std::string gold_text;
  bool em_hit = false;
  double f1 = 0.0;
  double confidence = 0.0;
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const QuestionResult&, const QuestionResult&) = default;
};

struct EvalResult {
  F1Metric metric = F1Metric::kChar;
  double em = 0.0;
  double f1 = 0.0;
  std::vector<QuestionResult> per_question;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

struct EvalOptions {
  F1Metric metric = F1Metric::kChar;
  bool squad_style = false;
  std::size_t threads = 1;
};

struct KeyedPrediction {
  std::string id;
  Prediction prediction;
};

using PredictionList = std::vector<KeyedPrediction>;

// Predictions for every example, computed on up to `threads` workers. The
// output order follows `examples`.
PredictionList predict_all(const SestModel& model, std::span<const PreparedExample> examples,
                           std::size_t threads = 1);

// Scores predictions against the gold answers of the examples with the same
// ids (in the same order).
EvalResult score(std::span<const PreparedExample> examples, const PredictionList& predictions,
                 const EvalOptions& options);

EvalResult evaluate(const SestModel& model, std::span<const PreparedExample> examples, const EvalOptions& options);
EvalResult evaluate(const SestModel& model, const Corpus& corpus, const EvalOptions& options);

// Sums confidences of identical (begin, end) spans across models and keeps
// the best per question; ties go to the smaller begin, then smaller end.
PredictionList ensemble(std::span<const PredictionList> models);

// counts[mask] = questions whose em_hit pattern across the k results equals
// `mask` (bit i set when result i is correct). Size 2^k.
std::vector<std::size_t> overlap_sets(std::span<const EvalResult> results);

// {config_digest, metric, em, f1, per_question: [...]}.
std::string report_to_json(const EvalResult& result, const std::string& config_digest);
EvalResult report_from_json(const std::string& text);
void save_report(const EvalResult& result, const std::string& config_digest, const std::string& path);
EvalResult load_report(const std::string& path);

}  // namespace sest
