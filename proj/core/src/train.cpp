#include "sest/train.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <random>

#include "sest/error.hpp"
#include "sest/random.hpp"

namespace sest {

std::string EpochLog::to_json() const {
  nlohmann::ordered_json j;
  j["epoch"] = epoch;
  j["mean_loss"] = mean_loss;
  j["clamped"] = clamped;
  if (train_em) j["train_em"] = *train_em;
  if (eval_em) j["eval_em"] = *eval_em;
  if (eval_f1) j["eval_f1"] = *eval_f1;
  return j.dump();
}

std::string TrainLog::to_jsonl() const {
  std::string out;
  for (const auto& e : epochs) out += e.to_json() + "\n";
  return out;
}

TrainLog train(SestModel& model, const Corpus& train_corpus, const Corpus* eval_corpus, const TrainOptions& options) {
  if (train_corpus.examples.empty()) throw DataError("training corpus is empty");
  const ModelConfig& cfg = model.config();
  std::vector<PreparedExample> train_set;
  train_set.reserve(train_corpus.size());
  for (const auto& ex : train_corpus.examples) train_set.push_back(model.prepare(ex));
  std::vector<PreparedExample> eval_set;
  if (eval_corpus != nullptr) {
    for (const auto& ex : eval_corpus->examples) eval_set.push_back(model.prepare(ex));
  }

  const ad::AdamConfig adam{cfg.lr};
  const std::size_t epochs = options.epochs.value_or(cfg.epochs);
  std::vector<std::size_t> order(train_set.size());
  TrainLog log;
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(mix_seed(cfg.seed, fnv1a("epoch")), epoch));
    std::shuffle(order.begin(), order.end(), rng);

    EpochLog entry;
    entry.epoch = epoch;
    double total = 0.0;
    for (const std::size_t i : order) {
      const PreparedExample& ex = train_set[i];
      model.params().zero_grad();
      const LossValue lv = span_loss(model.forward(ex), ex.answer.begin, ex.answer.end);
      const double loss = lv.loss.item();
      if (!std::isfinite(loss)) {
        throw NumericError("loss is not finite at epoch " + std::to_string(epoch) + ", example '" + ex.id + "'");
      }
      if (lv.clamped) ++entry.clamped;
      total += loss;
      ad::backward(lv.loss);
      if (cfg.clip_norm > 0.0) ad::clip_grad_norm(model.params(), cfg.clip_norm);
      ad::adam_step(model.params(), adam);
    }
    entry.mean_loss = total / static_cast<double>(train_set.size());
    if (options.track_train_em) entry.train_em = evaluate(model, train_set, options.eval).em;
    if (!eval_set.empty()) {
      const EvalResult r = evaluate(model, eval_set, options.eval);
      entry.eval_em = r.em;
      entry.eval_f1 = r.f1;
    }
    log.epochs.push_back(entry);
    if (options.on_epoch) options.on_epoch(entry);
    if (options.stop_at_train_em && entry.train_em && *entry.train_em >= *options.stop_at_train_em) break;
  }
  return log;
}

ModelConfig gradcheck_config() {
  ModelConfig cfg;
  cfg.word_dim = 4;
  cfg.char_dim = 3;
  cfg.char_filters = 4;
  cfg.char_width = 3;
  cfg.node_dim = 3;
  cfg.syn_hidden = 3;
  cfg.contextual_dim = 4;
  cfg.seed = 3;
  return cfg;
}

ad::GradCheckResult model_grad_check(const ModelConfig& cfg, const QaExample& example, double eps) {
  Corpus corpus;
  corpus.examples.push_back(example);
  SestModel model = SestModel::build(cfg, corpus);
  const PreparedExample prepared = model.prepare(example);
  return ad::grad_check(
      [&](ad::ParamStore&) { return span_loss(model.forward(prepared), prepared.answer.begin, prepared.answer.end).loss; },
      model.params(), eps);
}

}  // namespace sest
