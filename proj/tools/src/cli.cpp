#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sest/data.hpp"
#include "sest/encoders.hpp"
#include "sest/error.hpp"
#include "sest/eval.hpp"
#include "sest/model.hpp"
#include "sest/train.hpp"

namespace sest::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string flag_name(const std::string& field) {
  std::string s = field;
  for (char& c : s) {
    if (c == '_') c = '-';
  }
  return "--" + s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string json_scalar_text(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_float()) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v.get<double>());
    return std::string(buf, res.ptr);
  }
  if (v.is_number()) return v.dump();
  throw ArgumentError("config key '" + key + "' must be a scalar");
}

const char* type_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::kInteger: return "UINT";
    case FieldKind::kReal: return "FLOAT";
    case FieldKind::kBoolean: return "BOOL";
    case FieldKind::kText: break;
  }
  return "TEXT";
}

// Model configuration assembled from defaults, an optional flat JSON file,
// and per-field flags (in that order of precedence, lowest first).
class ConfigOptions {
 public:
  ConfigOptions(CLI::App& app, ModelConfig defaults) : defaults_(std::move(defaults)) {
    app.add_option("--config", path_, "flat JSON object of model settings; flags take precedence");
    for (const auto& f : config_fields(defaults_)) {
      auto& slot = values_[f.name];
      app.add_option(flag_name(f.name), slot, f.help)
          ->type_name(type_name(f.kind))
          ->default_str(f.value)
          ->group("Model settings");
    }
  }

  ModelConfig resolve(const CLI::App& app) const {
    ModelConfig cfg = defaults_;
    if (!path_.empty()) {
      json j;
      try {
        j = json::parse(read_file(path_));
      } catch (const json::parse_error& e) {
        throw ArgumentError("config '" + path_ + "' is not valid JSON: " + e.what());
      }
      if (!j.is_object()) throw ArgumentError("config '" + path_ + "' must be a JSON object");
      for (const auto& [key, value] : j.items()) {
        if (!set_config_field(cfg, key, json_scalar_text(value, key))) {
          throw ArgumentError("config '" + path_ + "' has unknown key '" + key + "'");
        }
      }
    }
    for (const auto& [name, value] : values_) {
      if (app.count(flag_name(name)) > 0) set_config_field(cfg, name, value);
    }
    cfg.validate();
    return cfg;
  }

 private:
  ModelConfig defaults_;
  std::string path_;
  std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------

struct GenToyArgs {
  std::string out;
  ToyGrammarConfig toy;
};

void cmd_gen_toy(const GenToyArgs& a, std::ostream& out) {
  const Corpus corpus = gen_toy_corpus(a.toy);
  save_corpus(corpus, a.out);
  out << "wrote " << corpus.size() << " examples to " << a.out << "\n";
}

struct ExtractArgs {
  std::string corpus;
  std::string mode = "sect";
  std::size_t window = 0;
  std::string order = "original";
  std::uint64_t seed = 0;
  bool keep_subcategories = false;
  std::string out;
};

void emit_sentence(std::ostream& os, const std::string& sentence_id, const Sentence& sentence,
                   const std::vector<SyntacticSequence>& seqs, std::size_t offset, SequenceKind kind,
                   const LabelVocab& labels, const LabelVocab& words) {
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    const SyntacticSequence& seq = seqs.at(offset + i);
    ordered_json rec;
    rec["sentence_id"] = sentence_id;
    rec["token_index"] = i;
    rec["token"] = sentence.tokens[i].text;
    rec["kind"] = to_string(kind);
    std::vector<std::string> lbl;
    std::vector<std::string> wrd;
    for (const auto& e : seq.elements) {
      lbl.push_back(labels.label(e.label_id));
      if (e.has_word()) wrd.push_back(words.label(e.word_id));
    }
    rec["labels"] = lbl;
    rec["words"] = wrd;
    os << rec.dump() << "\n";
  }
}

void cmd_extract(const ExtractArgs& a, std::ostream& out) {
  const Corpus corpus = load_corpus(a.corpus);
  const SequenceKind kind = parse_sequence_kind(a.mode);
  ExtractionConfig cfg;
  cfg.window = a.window != 0 ? a.window : (kind == SequenceKind::kSedt ? 20 : 10);
  cfg.order_mode = parse_order_mode(a.order);
  cfg.seed = a.seed;
  cfg.strip_dep_subcategories = !a.keep_subcategories;
  cfg.validate();

  LabelVocab labels;
  LabelVocab words;
  std::ostringstream os;
  std::size_t records = 0;
  for (const auto& ex : corpus.examples) {
    const Annotation ann = annotate(ex, cfg, kind, labels, words);
    std::size_t offset = 0;
    for (std::size_t s = 0; s < ex.context.size(); ++s) {
      emit_sentence(os, ex.id + "/context/" + std::to_string(s), ex.context[s], ann.context, offset, kind, labels,
                    words);
      offset += ex.context[s].size();
    }
    emit_sentence(os, ex.id + "/question", ex.question, ann.question, 0, kind, labels, words);
    records += offset + ex.question.size();
  }
  write_file(a.out, os.str());
  out << "wrote " << records << " token records to " << a.out << "\n";
}

struct TrainArgs {
  std::string corpus;
  std::string out;
  std::string eval;
  std::string log;
  std::string glove;
  std::optional<double> stop_at_train_em;
  bool track_train_em = false;
  std::string metric = "char";
  std::size_t threads = 1;
};

void cmd_train(const TrainArgs& a, const ModelConfig& cfg, std::ostream& out) {
  const Corpus train_corpus = load_corpus(a.corpus);
  std::optional<Corpus> eval_corpus;
  if (!a.eval.empty()) eval_corpus = load_corpus(a.eval);

  SestModel model = SestModel::build(cfg, train_corpus);
  if (!a.glove.empty()) {
    std::ifstream in(a.glove);
    if (!in) throw IoError("cannot read word vectors '" + a.glove + "'");
    const std::size_t hits = model.load_word_vectors(read_glove(in, cfg.word_dim));
    out << "{\"word_vectors_loaded\":" << hits << "}\n";
  }

  std::optional<std::ofstream> log_file;
  if (!a.log.empty()) {
    log_file.emplace(a.log, std::ios::binary | std::ios::trunc);
    if (!*log_file) throw IoError("cannot write '" + a.log + "'");
  }
  TrainOptions opts;
  opts.track_train_em = a.track_train_em || a.stop_at_train_em.has_value();
  opts.stop_at_train_em = a.stop_at_train_em;
  opts.eval.metric = parse_f1_metric(a.metric);
  opts.eval.threads = a.threads;
  opts.on_epoch = [&](const EpochLog& e) {
    const std::string line = e.to_json();
    out << line << std::endl;
    if (log_file) *log_file << line << "\n";
  };
  train(model, train_corpus, eval_corpus ? &*eval_corpus : nullptr, opts);
  save(model, a.out);
}

struct EvalArgs {
  std::string model;
  std::string corpus;
  std::string metric = "char";
  std::string report;
  bool squad_style = false;
  std::size_t threads = 1;
};

void print_summary(std::ostream& out, const EvalResult& r) {
  ordered_json j;
  j["metric"] = to_string(r.metric);
  j["questions"] = r.per_question.size();
  j["em"] = r.em;
  j["f1"] = r.f1;
  out << j.dump() << "\n";
}

void cmd_eval(const EvalArgs& a, std::ostream& out) {
  const SestModel model = load(a.model);
  const Corpus corpus = load_corpus(a.corpus);
  const EvalResult r = evaluate(model, corpus, {parse_f1_metric(a.metric), a.squad_style, a.threads});
  if (!a.report.empty()) save_report(r, config_digest(model.config()), a.report);
  print_summary(out, r);
}

struct GradcheckArgs {
  double eps = 1e-5;
  double tolerance = 1e-4;
  bool all_modes = false;
};

int cmd_gradcheck(const GradcheckArgs& a, const ModelConfig& cfg, std::ostream& out, std::ostream& err) {
  if (!(a.eps > 0.0)) throw ArgumentError("--eps must be positive");
  std::vector<ModelConfig> configs;
  if (a.all_modes) {
    for (const SyntaxMode m : {SyntaxMode::kNone, SyntaxMode::kPos, SyntaxMode::kSect, SyntaxMode::kSedt}) {
      for (const SynEncoderKind k : {SynEncoderKind::kLstm, SynEncoderKind::kCnn}) {
        if ((m == SyntaxMode::kNone || m == SyntaxMode::kPos) && k == SynEncoderKind::kCnn) continue;
        ModelConfig c = cfg;
        c.syn_mode = m;
        c.syn_encoder = k;
        configs.push_back(c);
      }
    }
  } else {
    configs.push_back(cfg);
  }
  const QaExample example = tiny_example();
  double worst = 0.0;
  for (const auto& c : configs) {
    const ad::GradCheckResult r = model_grad_check(c, example, a.eps);
    ordered_json j;
    j["syn_mode"] = to_string(c.syn_mode);
    j["syn_encoder"] = to_string(c.syn_encoder);
    j["components"] = r.components;
    j["max_rel_error"] = r.max_rel_error;
    j["worst_param"] = r.worst_param;
    j["worst_index"] = r.worst_index;
    j["analytic"] = r.analytic;
    j["numeric"] = r.numeric;
    out << j.dump() << "\n";
    worst = std::max(worst, r.max_rel_error);
  }
  out << "max relative error: " << worst << "\n";
  if (worst >= a.tolerance) {
    err << "error: max relative error " << worst << " is not below tolerance " << a.tolerance << "\n";
    return 1;
  }
  return 0;
}

struct EnsembleArgs {
  std::vector<std::string> models;
  std::string corpus;
  std::string report;
  std::string metric = "char";
  bool squad_style = false;
  std::size_t threads = 1;
};

void cmd_ensemble(const EnsembleArgs& a, std::ostream& out) {
  const Corpus corpus = load_corpus(a.corpus);
  std::vector<PredictionList> lists;
  std::vector<PreparedExample> gold;
  std::string digest;
  for (const auto& path : a.models) {
    const SestModel model = load(path);
    std::vector<PreparedExample> prepared;
    prepared.reserve(corpus.size());
    for (const auto& ex : corpus.examples) prepared.push_back(model.prepare(ex));
    lists.push_back(predict_all(model, prepared, a.threads));
    if (gold.empty()) gold = std::move(prepared);
    digest += (digest.empty() ? "" : "+") + config_digest(model.config());
  }
  const EvalResult r = score(gold, ensemble(lists), {parse_f1_metric(a.metric), a.squad_style, a.threads});
  if (!a.report.empty()) save_report(r, digest, a.report);
  print_summary(out, r);
}

void cmd_overlap(const std::vector<std::string>& reports, std::ostream& out) {
  std::vector<EvalResult> results;
  for (const auto& p : reports) results.push_back(load_report(p));
  const std::vector<std::size_t> counts = overlap_sets(results);
  ordered_json j;
  j["reports"] = reports;
  j["questions"] = results.empty() ? 0 : results.front().per_question.size();
  ordered_json regions = ordered_json::array();
  for (std::size_t mask = 0; mask < counts.size(); ++mask) {
    std::string bits;
    for (std::size_t i = 0; i < reports.size(); ++i) bits += (mask >> i) & 1U ? '1' : '0';
    regions.push_back({{"correct", bits}, {"count", counts[mask]}});
  }
  j["regions"] = regions;
  out << j.dump() << "\n";
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Syntactic tree embeddings for span-extraction question answering", "sest"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough(false);

  GenToyArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-toy", "generate a synthetic grammar corpus");
  gen_cmd->add_option("--out", gen.out, "output corpus (JSON lines)")->required();
  gen_cmd->add_option("--n", gen.toy.n_examples, "number of examples");
  gen_cmd->add_option("--seed", gen.toy.seed, "generator seed");
  gen_cmd->add_option("--nouns", gen.toy.n_nouns, "noun lexicon size");
  gen_cmd->add_option("--verbs", gen.toy.n_verbs, "verb lexicon size");
  gen_cmd->add_option("--adjectives", gen.toy.n_adjectives, "adjective lexicon size");
  gen_cmd->add_option("--distractors", gen.toy.distractors, "maximum modified noun phrases per context");

  ExtractArgs ext;
  auto* ext_cmd = app.add_subcommand("extract", "write per-token syntactic sequences");
  ext_cmd->add_option("--corpus", ext.corpus, "input corpus")->required();
  ext_cmd->add_option("--mode", ext.mode, "sequence kind")->check(CLI::IsMember({"sect", "sedt", "pos"}));
  ext_cmd->add_option("--window", ext.window, "window size; 0 selects 10 for sect and 20 for sedt");
  ext_cmd->add_option("--order", ext.order, "ordering ablation")
      ->check(CLI::IsMember({"original", "random-order", "random-nodes"}));
  ext_cmd->add_option("--seed", ext.seed, "ablation seed");
  ext_cmd->add_flag("--keep-dep-subcategories", ext.keep_subcategories, "keep ':' suffixes of dependency labels");
  ext_cmd->add_option("--out", ext.out, "output file (JSON lines)")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train a model and write a checkpoint");
  train_cmd->add_option("--corpus", tr.corpus, "training corpus")->required();
  train_cmd->add_option("--out", tr.out, "checkpoint path")->required();
  train_cmd->add_option("--eval", tr.eval, "corpus scored after every epoch");
  train_cmd->add_option("--log", tr.log, "also write the epoch log to this file");
  train_cmd->add_option("--glove", tr.glove, "word vectors in GloVe text format");
  train_cmd->add_flag("--track-train-em", tr.track_train_em, "log training-set EM after every epoch");
  train_cmd->add_option("--stop-at-train-em", tr.stop_at_train_em, "stop once training EM reaches this value");
  train_cmd->add_option("--metric", tr.metric, "F1 metric for --eval")->check(CLI::IsMember({"char", "token"}));
  train_cmd->add_option("--threads", tr.threads, "evaluation worker threads")->check(CLI::PositiveNumber);
  ConfigOptions train_cfg(*train_cmd, ModelConfig{});

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint on a corpus");
  eval_cmd->add_option("--model", ev.model, "checkpoint path")->required();
  eval_cmd->add_option("--corpus", ev.corpus, "evaluation corpus")->required();
  eval_cmd->add_option("--metric", ev.metric, "F1 metric")->check(CLI::IsMember({"char", "token"}));
  eval_cmd->add_option("--report", ev.report, "write the per-question report here");
  eval_cmd->add_flag("--squad-normalize", ev.squad_style, "normalize case, punctuation and articles before EM");
  eval_cmd->add_option("--threads", ev.threads, "worker threads")->check(CLI::PositiveNumber);

  GradcheckArgs gc;
  auto* gc_cmd = app.add_subcommand("gradcheck", "finite-difference check of the full model on a tiny example");
  gc_cmd->add_option("--eps", gc.eps, "central-difference step");
  gc_cmd->add_option("--tolerance", gc.tolerance, "maximum accepted relative error");
  gc_cmd->add_flag("--all-modes", gc.all_modes, "check every syntax mode and encoder combination");
  ConfigOptions gc_cfg(*gc_cmd, gradcheck_config());

  EnsembleArgs en;
  auto* ens_cmd = app.add_subcommand("ensemble", "combine checkpoints by summed span confidence");
  ens_cmd->add_option("--models", en.models, "checkpoint paths")->required()->expected(1, -1);
  ens_cmd->add_option("--corpus", en.corpus, "evaluation corpus")->required();
  ens_cmd->add_option("--report", en.report, "write the per-question report here");
  ens_cmd->add_option("--metric", en.metric, "F1 metric")->check(CLI::IsMember({"char", "token"}));
  ens_cmd->add_flag("--squad-normalize", en.squad_style, "normalize case, punctuation and articles before EM");
  ens_cmd->add_option("--threads", en.threads, "worker threads")->check(CLI::PositiveNumber);

  std::vector<std::string> reports;
  auto* ov_cmd = app.add_subcommand("overlap", "count questions answered correctly by each subset of models");
  ov_cmd->add_option("--reports", reports, "evaluation reports")->required()->expected(1, -1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*gen_cmd) {
      cmd_gen_toy(gen, out);
    } else if (*ext_cmd) {
      cmd_extract(ext, out);
    } else if (*train_cmd) {
      cmd_train(tr, train_cfg.resolve(*train_cmd), out);
    } else if (*eval_cmd) {
      cmd_eval(ev, out);
    } else if (*gc_cmd) {
      return cmd_gradcheck(gc, gc_cfg.resolve(*gc_cmd), out, err);
    } else if (*ens_cmd) {
      cmd_ensemble(en, out);
    } else if (*ov_cmd) {
      cmd_overlap(reports, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace sest::cli
