#include "sest/model.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <map>

#include "sest/error.hpp"
#include "sest/random.hpp"

namespace sest {

using ad::Tensor;

std::string to_string(SyntaxMode mode) {
  switch (mode) {
    case SyntaxMode::kNone: return "none";
    case SyntaxMode::kPos: return "pos";
    case SyntaxMode::kSect: return "sect";
    case SyntaxMode::kSedt: return "sedt";
  }
  return "?";
}

SyntaxMode parse_syntax_mode(std::string_view text) {
  if (text == "none") return SyntaxMode::kNone;
  if (text == "pos") return SyntaxMode::kPos;
  if (text == "sect") return SyntaxMode::kSect;
  if (text == "sedt") return SyntaxMode::kSedt;
  throw ArgumentError("unknown syntax mode '" + std::string(text) + "' (expected none, pos, sect or sedt)");
}

// ---------------------------------------------------------------------------
// Configuration

void ModelConfig::validate() const {
  const std::pair<const char*, std::size_t> positive[] = {
      {"word_dim", word_dim},       {"char_dim", char_dim},
      {"char_filters", char_filters}, {"char_width", char_width},
      {"max_word_chars", max_word_chars}, {"node_dim", node_dim},
      {"syn_hidden", syn_hidden},   {"syn_cnn_width", syn_cnn_width},
      {"contextual_dim", contextual_dim}, {"contextual_layers", contextual_layers},
      {"modeling_layers", modeling_layers}, {"max_span_len", max_span_len}};
  for (const auto& [name, v] : positive) {
    if (v == 0) throw ArgumentError(std::string("config ") + name + " must be positive");
  }
  if (contextual_dim % 2 != 0) throw ArgumentError("config contextual_dim must be even");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ArgumentError("config lr must be a finite non-negative number");
  if (!(clip_norm >= 0.0)) throw ArgumentError("config clip_norm must be non-negative");
  if (!embed_words && syn_mode == SyntaxMode::kNone) {
    throw ArgumentError("config embed_words=false needs a syntax mode other than none");
  }
}

std::size_t ModelConfig::effective_window() const {
  if (window != 0) return window;
  return syn_mode == SyntaxMode::kSedt ? 20 : 10;
}

ExtractionConfig ModelConfig::extraction() const {
  ExtractionConfig e;
  e.window = effective_window();
  e.order_mode = order_mode;
  e.seed = mix_seed(seed, fnv1a("ablation"));
  e.strip_dep_subcategories = strip_dep_subcategories;
  return e;
}

std::optional<SequenceKind> ModelConfig::sequence_kind() const {
  switch (syn_mode) {
    case SyntaxMode::kNone: return std::nullopt;
    case SyntaxMode::kPos: return SequenceKind::kPos;
    case SyntaxMode::kSect: return SequenceKind::kSect;
    case SyntaxMode::kSedt: return SequenceKind::kSedt;
  }
  return std::nullopt;
}

namespace {

std::size_t parse_size(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ArgumentError("config " + std::string(key) + ": expected a non-negative integer, got '" + std::string(v) +
                        "'");
  }
  return static_cast<std::size_t>(out);
}

double parse_real(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ArgumentError("config " + std::string(key) + ": expected a number, got '" + s + "'");
  }
  return d;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ArgumentError("config " + std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

std::string render_real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct FieldDef {
  const char* name;
  FieldKind kind;
  const char* help;
  std::function<std::string(const ModelConfig&)> get;
  std::function<void(ModelConfig&, std::string_view)> set;
};

#define SEST_SIZE_FIELD(member, help)                                                              \
  FieldDef {                                                                                       \
    #member, FieldKind::kInteger, help, [](const ModelConfig& c) { return std::to_string(c.member); }, \
        [](ModelConfig& c, std::string_view v) { c.member = parse_size(#member, v); }                \
  }

const std::vector<FieldDef>& field_defs() {
  static const std::vector<FieldDef> defs = {
      {"syn_mode", FieldKind::kText, "structural embedding: none, pos, sect or sedt",
       [](const ModelConfig& c) { return to_string(c.syn_mode); },
       [](ModelConfig& c, std::string_view v) { c.syn_mode = parse_syntax_mode(v); }},
      {"syn_encoder", FieldKind::kText, "structural sequence encoder: lstm or cnn",
       [](const ModelConfig& c) { return to_string(c.syn_encoder); },
       [](ModelConfig& c, std::string_view v) { c.syn_encoder = parse_syn_encoder(v); }},
      SEST_SIZE_FIELD(window, "syntactic window size (0 = 10 for sect, 20 for sedt)"),
      {"order_mode", FieldKind::kText, "sequence ablation: original, random-order or random-nodes",
       [](const ModelConfig& c) { return to_string(c.order_mode); },
       [](ModelConfig& c, std::string_view v) { c.order_mode = parse_order_mode(v); }},
      {"strip_dep_subcategories", FieldKind::kBoolean, "drop dependency label subtypes (nmod:poss -> nmod)",
       [](const ModelConfig& c) { return std::string(c.strip_dep_subcategories ? "true" : "false"); },
       [](ModelConfig& c, std::string_view v) { c.strip_dep_subcategories = parse_bool("strip_dep_subcategories", v); }},
      {"embed_words", FieldKind::kBoolean, "include word and character embeddings (false = syntax only)",
       [](const ModelConfig& c) { return std::string(c.embed_words ? "true" : "false"); },
       [](ModelConfig& c, std::string_view v) { c.embed_words = parse_bool("embed_words", v); }},
      {"freeze_words", FieldKind::kBoolean, "keep word vectors fixed during training",
       [](const ModelConfig& c) { return std::string(c.freeze_words ? "true" : "false"); },
       [](ModelConfig& c, std::string_view v) { c.freeze_words = parse_bool("freeze_words", v); }},
      SEST_SIZE_FIELD(word_dim, "word embedding size"),
      SEST_SIZE_FIELD(char_dim, "character embedding size"),
      SEST_SIZE_FIELD(char_filters, "character CNN filters"),
      SEST_SIZE_FIELD(char_width, "character CNN width"),
      SEST_SIZE_FIELD(max_word_chars, "characters kept per word"),
      SEST_SIZE_FIELD(node_dim, "fixed syntactic node vector size"),
      SEST_SIZE_FIELD(syn_hidden, "structural encoder units (per direction for lstm)"),
      SEST_SIZE_FIELD(syn_cnn_width, "structural CNN filter width"),
      SEST_SIZE_FIELD(contextual_dim, "contextual dimension d (even)"),
      SEST_SIZE_FIELD(contextual_layers, "contextual BiLSTM layers"),
      SEST_SIZE_FIELD(modeling_layers, "modeling BiLSTM layers"),
      SEST_SIZE_FIELD(max_span_len, "longest decodable answer in tokens"),
      {"lr", FieldKind::kReal, "Adam learning rate", [](const ModelConfig& c) { return render_real(c.lr); },
       [](ModelConfig& c, std::string_view v) { c.lr = parse_real("lr", v); }},
      {"clip_norm", FieldKind::kReal, "global gradient norm limit (0 = off)",
       [](const ModelConfig& c) { return render_real(c.clip_norm); },
       [](ModelConfig& c, std::string_view v) { c.clip_norm = parse_real("clip_norm", v); }},
      SEST_SIZE_FIELD(epochs, "training epochs"),
      {"seed", FieldKind::kInteger, "seed for parameters, shuffling and ablations",
       [](const ModelConfig& c) { return std::to_string(c.seed); },
       [](ModelConfig& c, std::string_view v) { c.seed = parse_size("seed", v); }},
  };
  return defs;
}

#undef SEST_SIZE_FIELD

}  // namespace

std::vector<ConfigField> config_fields(const ModelConfig& cfg) {
  std::vector<ConfigField> out;
  for (const auto& d : field_defs()) out.push_back({d.name, d.kind, d.get(cfg), d.help});
  return out;
}

bool set_config_field(ModelConfig& cfg, std::string_view key, std::string_view value) {
  for (const auto& d : field_defs()) {
    if (key == d.name) {
      d.set(cfg, value);
      return true;
    }
  }
  return false;
}

std::string config_digest(const ModelConfig& cfg) {
  std::string canon;
  for (const auto& f : config_fields(cfg)) canon += f.name + "=" + f.value + "\n";
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(canon)));
  return buf;
}

// ---------------------------------------------------------------------------
// Vocabularies

namespace {

LabelVocab& label_vocab_for(Vocabularies& v, SequenceKind kind) {
  switch (kind) {
    case SequenceKind::kSect: return v.constituents;
    case SequenceKind::kSedt: return v.dependencies;
    case SequenceKind::kPos: return v.pos;
  }
  return v.constituents;
}

void collect_words(const Sentence& s, Vocabularies& v) {
  for (const auto& t : s.tokens) {
    v.words.intern(t.text);
    for (const auto& ch : utf8_chars(t.text)) v.chars.intern(ch);
  }
}

}  // namespace

Vocabularies build_vocabularies(const Corpus& corpus, const ModelConfig& cfg) {
  cfg.validate();
  Vocabularies v;
  v.words.intern(kPadLabel);
  v.chars.intern(kPadLabel);
  for (const auto& ex : corpus.examples) {
    for (const auto& s : ex.context) collect_words(s, v);
    collect_words(ex.question, v);
  }
  if (const auto kind = cfg.sequence_kind()) {
    ExtractionConfig ecfg = cfg.extraction();
    ecfg.order_mode = OrderMode::kOriginal;
    for (const auto& ex : corpus.examples) annotate(ex, ecfg, *kind, label_vocab_for(v, *kind), v.words);
  }
  v.words.freeze();
  v.chars.freeze();
  v.constituents.freeze();
  v.dependencies.freeze();
  v.pos.freeze();
  return v;
}

// ---------------------------------------------------------------------------
// Model

struct EmbedCache {
  std::map<int, Tensor> words;
  std::map<std::string, Tensor> chars;
  std::map<std::vector<SyntacticElement>, Tensor> syntax;
};

SestModel::SestModel(ModelConfig cfg, Vocabularies vocabs)
    : cfg_(std::move(cfg)), vocabs_(std::move(vocabs)), params_(cfg_.seed) {
  cfg_.validate();
  const std::size_t d = cfg_.contextual_dim;
  if (cfg_.embed_words || cfg_.syn_mode == SyntaxMode::kSedt) {
    word_table_ = EmbeddingTable::create(params_, "embed.word", vocabs_.words.size(), cfg_.word_dim, !cfg_.freeze_words);
  }
  if (cfg_.embed_words) {
    char_cnn_ = CharCnnEmbedder::create(params_, "embed.char", vocabs_.chars.size(), cfg_.char_dim, cfg_.char_filters,
                                        cfg_.char_width, cfg_.max_word_chars);
  }
  if (const auto kind = cfg_.sequence_kind()) {
    const std::size_t input = cfg_.node_dim + (*kind == SequenceKind::kSedt ? cfg_.word_dim : 0);
    syn_encoder_ =
        SyntacticEncoder::create(params_, "embed.syn", cfg_.syn_encoder, input, cfg_.syn_hidden, cfg_.syn_cnn_width);
    node_table_ = NodeTable(label_vocab_for(vocabs_, *kind).size(), cfg_.node_dim,
                            mix_seed(cfg_.seed, fnv1a("nodes." + to_string(*kind))));
  }
  const std::size_t e = embedding_dim();
  for (std::size_t l = 0; l < cfg_.contextual_layers; ++l) {
    contextual_.push_back(
        BiLstmEncoder::create(params_, "contextual.layer" + std::to_string(l), l == 0 ? e : d, d / 2));
  }
  attention_ = AttentionParams::create(params_, "attention", d, cfg_.modeling_layers);
  end_encoder_ = BiLstmEncoder::create(params_, "output.end", d, d / 2);
  w_p1_ = params_.add("output.w_p1", {1, 5 * d});
  w_p2_ = params_.add("output.w_p2", {1, 5 * d});
}

SestModel SestModel::build(const ModelConfig& cfg, const Corpus& train) {
  return SestModel(cfg, build_vocabularies(train, cfg));
}

std::size_t SestModel::embedding_dim() const {
  std::size_t e = 0;
  if (cfg_.embed_words) e += cfg_.word_dim + cfg_.char_filters;
  if (syn_encoder_) e += syn_encoder_->output_dim();
  return e;
}

std::size_t SestModel::load_word_vectors(const std::unordered_map<std::string, std::vector<double>>& glove) {
  if (!word_table_) throw StateError("model has no word table");
  return apply_glove(*word_table_, vocabs_.words, glove);
}

namespace {

PreparedSide prepare_side(const std::vector<Token>& tokens, const Vocabularies& v, std::size_t max_chars) {
  PreparedSide side;
  for (const auto& t : tokens) {
    side.texts.push_back(t.text);
    side.words.push_back(v.words.lookup(t.text));
    std::vector<int> chars;
    for (const auto& ch : utf8_chars(t.text)) {
      if (chars.size() == max_chars) break;
      chars.push_back(v.chars.lookup(ch));
    }
    side.chars.push_back(std::move(chars));
  }
  return side;
}

}  // namespace

PreparedExample SestModel::prepare(const QaExample& example) const {
  PreparedExample p;
  p.id = example.id;
  p.context = prepare_side(example.context_tokens(), vocabs_, cfg_.max_word_chars);
  p.question = prepare_side(example.question.tokens, vocabs_, cfg_.max_word_chars);
  if (const auto kind = cfg_.sequence_kind()) {
    // Frozen vocabularies resolve unseen labels to <unk> without growing,
    // so interning through them only reads.
    auto& vocabs = const_cast<Vocabularies&>(vocabs_);
    Annotation a = annotate(example, cfg_.extraction(), *kind, label_vocab_for(vocabs, *kind), vocabs.words);
    p.context.syntax = std::move(a.context);
    p.question.syntax = std::move(a.question);
  }
  p.answer = example.answer;
  p.answer_text = example.answer_text();
  return p;
}

Tensor SestModel::embed_side(const PreparedSide& side, EmbedCache& cache) const {
  if (side.size() == 0) throw DataError("cannot embed an empty token sequence");
  if (syn_encoder_ && side.syntax.size() != side.size()) {
    const std::size_t i = std::min(side.syntax.size(), side.size() - 1);
    throw DataError("token " + std::to_string(i) + " ('" + side.texts[i] + "') has no syntactic sequence for mode " +
                    to_string(cfg_.syn_mode));
  }
  std::vector<Tensor> cols;
  cols.reserve(side.size());
  std::vector<Tensor> parts;
  for (std::size_t i = 0; i < side.size(); ++i) {
    parts.clear();
    if (cfg_.embed_words) {
      auto w = cache.words.find(side.words[i]);
      if (w == cache.words.end()) w = cache.words.emplace(side.words[i], word_table_->lookup(side.words[i])).first;
      parts.push_back(w->second);
      auto c = cache.chars.find(side.texts[i]);
      if (c == cache.chars.end()) c = cache.chars.emplace(side.texts[i], char_cnn_->embed(side.chars[i])).first;
      parts.push_back(c->second);
    }
    if (syn_encoder_) {
      const auto& seq = side.syntax[i];
      auto s = cache.syntax.find(seq.elements);
      if (s == cache.syntax.end()) {
        s = cache.syntax
                .emplace(seq.elements,
                         encode_syntactic(seq, *syn_encoder_, node_table_, word_table_ ? &*word_table_ : nullptr))
                .first;
      }
      parts.push_back(s->second);
    }
    cols.push_back(parts.size() == 1 ? parts.front() : ad::concat_rows(parts));
  }
  Tensor x = ad::concat_cols(cols);
  for (const auto& layer : contextual_) x = layer.encode_columns(x);
  return x;
}

Distributions SestModel::forward(const PreparedExample& ex) const {
  EmbedCache cache;
  Tensor H;
  Tensor U;
  try {
    H = embed_side(ex.context, cache);
    U = embed_side(ex.question, cache);
  } catch (const DataError& e) {
    throw DataError("example '" + ex.id + "': " + e.what());
  }
  const FusedRepresentation f = attend(H, U, attention_);
  const Tensor M2 = end_encoder_.encode_columns(f.M);
  const Tensor gm[] = {f.G, f.M};
  const Tensor gm2[] = {f.G, M2};
  return {ad::softmax_vec(ad::matmul(w_p1_, ad::concat_rows(gm))),
          ad::softmax_vec(ad::matmul(w_p2_, ad::concat_rows(gm2)))};
}

Prediction SestModel::predict(const PreparedExample& ex) const {
  const Distributions d = forward(ex);
  Prediction p = decode_span(d.p1.values(), d.p2.values(), cfg_.max_span_len);
  for (std::size_t i = p.begin; i <= p.end; ++i) {
    if (i > p.begin) p.answer_text += ' ';
    p.answer_text += ex.context.texts[i];
  }
  return p;
}

LossValue span_loss(const Distributions& d, std::size_t gold_begin, std::size_t gold_end) {
  const std::size_t T = d.p1.size();
  if (d.p2.size() != T) throw ShapeError("span_loss: p1 and p2 lengths differ");
  if (gold_begin >= T || gold_end >= T) {
    throw ArgumentError("span_loss: gold span (" + std::to_string(gold_begin) + ", " + std::to_string(gold_end) +
                        ") outside context of " + std::to_string(T));
  }
  LossValue out;
  out.clamped = d.p1.values()[gold_begin] < ad::kLogFloor || d.p2.values()[gold_end] < ad::kLogFloor;
  out.loss = ad::add(ad::neg_log(ad::pick(d.p1, gold_begin)), ad::neg_log(ad::pick(d.p2, gold_end)));
  return out;
}

Prediction decode_span(std::span<const double> p1, std::span<const double> p2, std::size_t max_span_len) {
  const std::size_t T = p1.size();
  if (T == 0 || p2.size() != T) throw ArgumentError("decode_span: distributions must be non-empty and equal length");
  if (max_span_len == 0) throw ArgumentError("decode_span: max_span_len must be positive");
  Prediction best;
  bool have = false;
  // Indices of the window [e - L + 1, e] with non-increasing p1; the front
  // is the earliest maximum.
  std::deque<std::size_t> window;
  for (std::size_t e = 0; e < T; ++e) {
    while (!window.empty() && p1[window.back()] < p1[e]) window.pop_back();
    window.push_back(e);
    const std::size_t lo = e + 1 >= max_span_len ? e + 1 - max_span_len : 0;
    while (window.front() < lo) window.pop_front();
    const std::size_t b = p2[e] == 0.0 ? lo : window.front();
    const double conf = p1[b] * p2[e];
    if (!have || conf > best.confidence) {
      best.begin = b;
      best.end = e;
      best.confidence = conf;
      have = true;
    } else if (conf == best.confidence && b < best.begin) {
      best.begin = b;
      best.end = e;
    }
  }
  return best;
}

}  // namespace sest
