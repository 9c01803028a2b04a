#pragma once

// Span-prediction model: embedding layer (word, character and structural
// parts), contextual BiLSTM, bidirectional attention, and the two-pointer
// output layer. Includes decoding and checkpoint persistence.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sest/attention.hpp"
#include "sest/autodiff.hpp"
#include "sest/data.hpp"
#include "sest/encoders.hpp"
#include "sest/extraction.hpp"

namespace sest {

enum class SyntaxMode { kNone, kPos, kSect, kSedt };

std::string to_string(SyntaxMode mode);
SyntaxMode parse_syntax_mode(std::string_view text);  // "none" | "pos" | "sect" | "sedt"

struct ModelConfig {
  SyntaxMode syn_mode = SyntaxMode::kSect;
  SynEncoderKind syn_encoder = SynEncoderKind::kLstm;
  std::size_t window = 0;  // 0 selects 10 for SECT and 20 for SEDT
  OrderMode order_mode = OrderMode::kOriginal;
  bool strip_dep_subcategories = true;

  // When false the token representation is the structural embedding alone.
  bool embed_words = true;
  bool freeze_words = false;
  std::size_t word_dim = 100;
  std::size_t char_dim = 8;
  std::size_t char_filters = 100;
  std::size_t char_width = 5;
  std::size_t max_word_chars = 16;
  std::size_t node_dim = 8;
  std::size_t syn_hidden = 30;
  std::size_t syn_cnn_width = 3;

  std::size_t contextual_dim = 20;  // d; even
  std::size_t contextual_layers = 1;
  std::size_t modeling_layers = 2;
  std::size_t max_span_len = 15;

  double lr = 0.005;
  double clip_norm = 5.0;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t effective_window() const;
  ExtractionConfig extraction() const;
  std::optional<SequenceKind> sequence_kind() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Flat key/value view of ModelConfig, used by config files, checkpoints and
// the CLI help text.
enum class FieldKind { kInteger, kReal, kBoolean, kText };

struct ConfigField {
  std::string name;
  FieldKind kind;
  std::string value;  // current value rendered as text
  std::string help;
};

std::vector<ConfigField> config_fields(const ModelConfig& cfg);
// Returns false for an unknown key; throws ArgumentError for a bad value.
bool set_config_field(ModelConfig& cfg, std::string_view key, std::string_view value);
// FNV-1a over the canonical key=value listing, as 16 hex digits.
std::string config_digest(const ModelConfig& cfg);

struct Vocabularies {
  LabelVocab words;
  LabelVocab chars;
  LabelVocab constituents;
  LabelVocab dependencies;
  LabelVocab pos;

  friend bool operator==(const Vocabularies&, const Vocabularies&) = default;
};

inline constexpr std::string_view kPadLabel = "<pad>";

// Collects words, characters and the label inventory of the configured
// syntax mode from `corpus`, then freezes every vocabulary.
Vocabularies build_vocabularies(const Corpus& corpus, const ModelConfig& cfg);

struct PreparedSide {
  std::vector<std::string> texts;
  std::vector<int> words;
  std::vector<std::vector<int>> chars;
  std::vector<SyntacticSequence> syntax;  // empty when the mode is none

  std::size_t size() const { return texts.size(); }
};

struct PreparedExample {
  std::string id;
  PreparedSide context;
  PreparedSide question;
  AnswerSpan answer;
  std::string answer_text;
};

struct Distributions {
  ad::Tensor p1;  // 1 × T
  ad::Tensor p2;  // 1 × T
};

struct Prediction {
  std::size_t begin = 0;
  std::size_t end = 0;
  double confidence = 0.0;
  std::string answer_text;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct EmbedCache;

class SestModel {
 public:
  // Fresh parameters drawn from cfg.seed.
  SestModel(ModelConfig cfg, Vocabularies vocabs);
  static SestModel build(const ModelConfig& cfg, const Corpus& train);

  SestModel(SestModel&&) noexcept = default;
  SestModel& operator=(SestModel&&) noexcept = default;

  const ModelConfig& config() const { return cfg_; }
  const Vocabularies& vocabularies() const { return vocabs_; }
  ad::ParamStore& params() { return params_; }
  const ad::ParamStore& params() const { return params_; }
  std::size_t embedding_dim() const;

  PreparedExample prepare(const QaExample& example) const;
  Distributions forward(const PreparedExample& example) const;
  Prediction predict(const PreparedExample& example) const;

  // Overwrites the word table rows of words found in `glove`.
  std::size_t load_word_vectors(const std::unordered_map<std::string, std::vector<double>>& glove);

 private:
  ad::Tensor embed_side(const PreparedSide& side, EmbedCache& cache) const;

  ModelConfig cfg_;
  Vocabularies vocabs_;
  ad::ParamStore params_;
  std::optional<EmbeddingTable> word_table_;
  std::optional<CharCnnEmbedder> char_cnn_;
  std::optional<SyntacticEncoder> syn_encoder_;
  NodeTable node_table_;
  std::vector<BiLstmEncoder> contextual_;
  AttentionParams attention_;
  BiLstmEncoder end_encoder_;
  ad::Tensor w_p1_;
  ad::Tensor w_p2_;
};

struct LossValue {
  ad::Tensor loss;
  bool clamped = false;  // a gold probability fell below the log floor
};

// -log p1[begin] - log p2[end] with probabilities floored at kLogFloor.
LossValue span_loss(const Distributions& d, std::size_t gold_begin, std::size_t gold_end);

// Best (b, e) with b <= e <= b + max_span_len - 1 under p1[b] * p2[e]; ties go
// to the smaller b, then the smaller e. Leaves answer_text empty.
Prediction decode_span(std::span<const double> p1, std::span<const double> p2, std::size_t max_span_len);

// Exact, byte-stable JSON checkpoint of config, vocabularies and parameters.
std::string checkpoint_to_string(const SestModel& model);
SestModel checkpoint_from_string(const std::string& text);
void save(const SestModel& model, const std::string& path);
SestModel load(const std::string& path);

}  // namespace sest
