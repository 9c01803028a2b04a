#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sest/data.hpp"
#include "sest/eval.hpp"
#include "sest/model.hpp"

namespace sest {

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  std::size_t clamped = 0;  // examples whose gold probability hit the log floor
  std::optional<double> train_em;
  std::optional<double> eval_em;
  std::optional<double> eval_f1;

  std::string to_json() const;  // one line, no trailing newline
  friend bool operator==(const EpochLog&, const EpochLog&) = default;
};

struct TrainLog {
  std::vector<EpochLog> epochs;
  std::string to_jsonl() const;
};

struct TrainOptions {
  // Overrides the model's configured epoch count when set.
  std::optional<std::size_t> epochs;
  bool track_train_em = false;
  // Stop once train EM reaches this value (requires track_train_em).
  std::optional<double> stop_at_train_em;
  EvalOptions eval;
  std::function<void(const EpochLog&)> on_epoch;
};

// Per-example Adam updates in a freshly shuffled order every epoch. Throws
// NumericError naming the epoch and example when a loss is not finite.
TrainLog train(SestModel& model, const Corpus& train_corpus, const Corpus* eval_corpus,
               const TrainOptions& options = {});

// Small dimensions for finite-difference checks of the whole model.
ModelConfig gradcheck_config();

// Builds a model for `example` under `cfg` and checks the gradient of the
// span loss at its initial parameters.
ad::GradCheckResult model_grad_check(const ModelConfig& cfg, const QaExample& example, double eps);

}  // namespace sest
