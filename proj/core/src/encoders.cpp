#include "sest/encoders.hpp"

#include <sstream>

#include "sest/error.hpp"
#include "sest/random.hpp"

namespace sest {

using ad::Shape;
using ad::Tensor;

std::string to_string(SynEncoderKind kind) { return kind == SynEncoderKind::kLstm ? "lstm" : "cnn"; }

SynEncoderKind parse_syn_encoder(std::string_view text) {
  if (text == "lstm") return SynEncoderKind::kLstm;
  if (text == "cnn") return SynEncoderKind::kCnn;
  throw ArgumentError("unknown syntactic encoder '" + std::string(text) + "' (expected lstm or cnn)");
}

namespace {

void check_vector(const Tensor& x, std::size_t dim, const char* who) {
  if (x.cols() != 1 || x.rows() != dim) {
    throw ShapeError(std::string(who) + ": expected input " + std::to_string(dim) + "x1, got " +
                     ad::to_string(x.shape()));
  }
}

Tensor activate(const Tensor& x, Activation a) {
  switch (a) {
    case Activation::kRelu: return ad::relu(x);
    case Activation::kTanh: return ad::tanh(x);
    case Activation::kIdentity: return x;
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// LSTM

LstmCell LstmCell::create(ad::ParamStore& store, const std::string& prefix, std::size_t input_dim,
                          std::size_t hidden_dim) {
  if (input_dim == 0 || hidden_dim == 0) throw ArgumentError("LSTM dimensions must be positive");
  using Init = ad::ParamStore::Init;
  const Shape w{hidden_dim, input_dim + hidden_dim};
  const Shape b{hidden_dim, 1};
  LstmCell cell;
  cell.input_dim = input_dim;
  cell.hidden_dim = hidden_dim;
  cell.w_i = store.add(prefix + ".w_i", w);
  cell.w_f = store.add(prefix + ".w_f", w);
  cell.w_o = store.add(prefix + ".w_o", w);
  cell.w_g = store.add(prefix + ".w_g", w);
  cell.b_i = store.add(prefix + ".b_i", b, Init::kZeros);
  cell.b_f = store.add(prefix + ".b_f", b, Init::kConstant, 1.0);
  cell.b_o = store.add(prefix + ".b_o", b, Init::kZeros);
  cell.b_g = store.add(prefix + ".b_g", b, Init::kZeros);
  return cell;
}

LstmCell::State LstmCell::initial_state() const {
  return {Tensor::zeros({hidden_dim, 1}), Tensor::zeros({hidden_dim, 1})};
}

LstmCell::State LstmCell::step(const Tensor& x, const State& prev) const {
  const Tensor parts[] = {x, prev.h};
  const Tensor z = ad::concat_rows(parts);
  const Tensor i = ad::sigmoid(ad::add(ad::matmul(w_i, z), b_i));
  const Tensor f = ad::sigmoid(ad::add(ad::matmul(w_f, z), b_f));
  const Tensor o = ad::sigmoid(ad::add(ad::matmul(w_o, z), b_o));
  const Tensor g = ad::tanh(ad::add(ad::matmul(w_g, z), b_g));
  const Tensor c = ad::add(ad::mul(f, prev.c), ad::mul(i, g));
  return {ad::mul(o, ad::tanh(c)), c};
}

BiLstmEncoder BiLstmEncoder::create(ad::ParamStore& store, const std::string& prefix, std::size_t input_dim,
                                    std::size_t hidden_dim) {
  BiLstmEncoder enc;
  enc.fwd_ = LstmCell::create(store, prefix + ".fwd", input_dim, hidden_dim);
  enc.bwd_ = LstmCell::create(store, prefix + ".bwd", input_dim, hidden_dim);
  return enc;
}

void BiLstmEncoder::check_inputs(std::span<const Tensor> xs) const {
  for (const auto& x : xs) check_vector(x, input_dim(), "bilstm");
}

std::vector<Tensor> BiLstmEncoder::run(const LstmCell& cell, std::span<const Tensor> xs, bool reverse) const {
  std::vector<Tensor> hs(xs.size());
  auto state = cell.initial_state();
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const std::size_t t = reverse ? xs.size() - 1 - k : k;
    state = cell.step(xs[t], state);
    hs[t] = state.h;
  }
  return hs;
}

Tensor BiLstmEncoder::encode_final(std::span<const Tensor> xs) const {
  check_inputs(xs);
  if (xs.empty()) return Tensor::zeros({output_dim(), 1});
  const auto fwd = run(fwd_, xs, false);
  const auto bwd = run(bwd_, xs, true);
  const Tensor parts[] = {bwd.front(), fwd.back()};
  return ad::concat_rows(parts);
}

Tensor BiLstmEncoder::encode_sequence(std::span<const Tensor> xs) const {
  check_inputs(xs);
  if (xs.empty()) throw ArgumentError("bilstm encode_sequence needs at least one input");
  const auto fwd = run(fwd_, xs, false);
  const auto bwd = run(bwd_, xs, true);
  const Tensor parts[] = {ad::concat_cols(fwd), ad::concat_cols(bwd)};
  return ad::concat_rows(parts);
}

Tensor BiLstmEncoder::encode_columns(const Tensor& x) const {
  std::vector<Tensor> cols;
  cols.reserve(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) cols.push_back(ad::column(x, j));
  return encode_sequence(cols);
}

Tensor bilstm_encode(const BiLstmEncoder& enc, std::span<const Tensor> xs) { return enc.encode_final(xs); }

// ---------------------------------------------------------------------------
// CNN

CnnEncoder CnnEncoder::create(ad::ParamStore& store, const std::string& prefix, std::size_t input_dim,
                              std::size_t width, std::size_t filters, Activation activation) {
  if (input_dim == 0 || width == 0 || filters == 0) throw ArgumentError("CNN dimensions must be positive");
  CnnEncoder enc;
  enc.input_dim_ = input_dim;
  enc.width_ = width;
  enc.filters_ = filters;
  enc.activation_ = activation;
  enc.w_ = store.add(prefix + ".w", {filters, width * input_dim});
  enc.b_ = store.add(prefix + ".b", {filters, 1}, ad::ParamStore::Init::kZeros);
  return enc;
}

Tensor CnnEncoder::encode(std::span<const Tensor> xs) const {
  if (xs.empty()) throw ArgumentError("cnn_encode needs at least one input vector");
  for (const auto& x : xs) check_vector(x, input_dim_, "cnn");
  std::vector<Tensor> padded(xs.begin(), xs.end());
  if (padded.size() < width_) {
    const Tensor zero = Tensor::zeros({input_dim_, 1});
    padded.resize(width_, zero);
  }
  const std::size_t windows = padded.size() - width_ + 1;
  std::vector<Tensor> cols;
  cols.reserve(windows);
  for (std::size_t i = 0; i < windows; ++i) {
    cols.push_back(ad::concat_rows(std::span<const Tensor>(padded.data() + i, width_)));
  }
  const Tensor x = ad::concat_cols(cols);  // (width*input) x windows
  const Tensor c = activate(ad::add_broadcast(ad::matmul(w_, x), b_), activation_);
  return ad::max_over_rows(c);
}

Tensor cnn_encode(const CnnEncoder& enc, std::span<const Tensor> xs) { return enc.encode(xs); }

// ---------------------------------------------------------------------------
// Embeddings

EmbeddingTable EmbeddingTable::create(ad::ParamStore& store, const std::string& name, std::size_t vocab_size,
                                      std::size_t dim, bool trainable) {
  if (vocab_size == 0 || dim == 0) throw ArgumentError("embedding table '" + name + "' needs positive sizes");
  EmbeddingTable t;
  t.table_ = store.add(name, {vocab_size, dim}, ad::ParamStore::Init::kNormal, 0.1, trainable);
  return t;
}

Tensor EmbeddingTable::lookup(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= vocab_size()) {
    throw ArgumentError("embedding id " + std::to_string(id) + " outside [0, " + std::to_string(vocab_size()) + ")");
  }
  return ad::row(table_, static_cast<std::size_t>(id));
}

std::unordered_map<std::string, std::vector<double>> read_glove(std::istream& in, std::size_t dim) {
  std::unordered_map<std::string, std::vector<double>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    std::vector<double> v;
    v.reserve(dim);
    double x = 0.0;
    while (ss >> x) v.push_back(x);
    if (!ss.eof()) throw ParseError("embedding file: non-numeric value", line_no);
    if (v.size() != dim) {
      throw ParseError("embedding file: expected " + std::to_string(dim) + " values for '" + word + "', got " +
                           std::to_string(v.size()),
                       line_no);
    }
    out.emplace(std::move(word), std::move(v));
  }
  return out;
}

std::size_t apply_glove(EmbeddingTable& table, const LabelVocab& words,
                        const std::unordered_map<std::string, std::vector<double>>& glove) {
  auto values = table.table().mutable_values();
  const std::size_t dim = table.dim();
  std::size_t hits = 0;
  for (std::size_t id = 0; id < words.size() && id < table.vocab_size(); ++id) {
    auto it = glove.find(words.label(static_cast<int>(id)));
    if (it == glove.end()) continue;
    if (it->second.size() != dim) throw ShapeError("embedding vector width does not match the word table");
    std::copy(it->second.begin(), it->second.end(), values.begin() + static_cast<std::ptrdiff_t>(id * dim));
    ++hits;
  }
  return hits;
}

std::vector<std::string> utf8_chars(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if (lead >= 0xF0 && lead < 0xF8) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = lead < 0xF0 ? 3 : 1;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    if (i + len > text.size()) len = 1;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        len = 1;
        break;
      }
    }
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

CharCnnEmbedder CharCnnEmbedder::create(ad::ParamStore& store, const std::string& prefix, std::size_t char_vocab,
                                        std::size_t char_dim, std::size_t filters, std::size_t width,
                                        std::size_t max_chars) {
  if (max_chars == 0) throw ArgumentError("max word length must be positive");
  CharCnnEmbedder e;
  e.chars_ = EmbeddingTable::create(store, prefix + ".table", char_vocab, char_dim, true);
  e.cnn_ = CnnEncoder::create(store, prefix + ".cnn", char_dim, width, filters, Activation::kRelu);
  e.max_chars_ = max_chars;
  return e;
}

Tensor CharCnnEmbedder::embed(std::span<const int> char_ids) const {
  const std::size_t n = std::min(char_ids.size(), max_chars_);
  if (n == 0) return Tensor::zeros({output_dim(), 1});
  std::vector<Tensor> xs;
  xs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) xs.push_back(chars_.lookup(char_ids[i]));
  return cnn_.encode(xs);
}

// ---------------------------------------------------------------------------
// Structural embedding

NodeTable::NodeTable(std::size_t vocab_size, std::size_t dim, std::uint64_t master_seed) : dim_(dim) {
  if (dim == 0) throw ArgumentError("node vector dimension must be positive");
  vectors_.reserve(vocab_size);
  for (std::size_t id = 0; id < vocab_size; ++id) {
    vectors_.push_back(Tensor::column(node_vector(static_cast<int>(id), dim, master_seed)));
  }
}

const Tensor& NodeTable::vector(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= vectors_.size()) {
    throw ArgumentError("node label id " + std::to_string(id) + " outside the label vocabulary");
  }
  return vectors_[static_cast<std::size_t>(id)];
}

SyntacticEncoder SyntacticEncoder::create(ad::ParamStore& store, const std::string& prefix, SynEncoderKind kind,
                                          std::size_t input_dim, std::size_t units, std::size_t cnn_width) {
  SyntacticEncoder enc;
  enc.kind_ = kind;
  enc.input_dim_ = input_dim;
  if (kind == SynEncoderKind::kLstm) {
    enc.lstm_ = BiLstmEncoder::create(store, prefix + ".lstm", input_dim, units);
  } else {
    enc.cnn_ = CnnEncoder::create(store, prefix + ".cnn", input_dim, cnn_width, units, Activation::kRelu);
  }
  return enc;
}

std::size_t SyntacticEncoder::output_dim() const {
  return kind_ == SynEncoderKind::kLstm ? lstm_->output_dim() : cnn_->filters();
}

Tensor SyntacticEncoder::encode(std::span<const Tensor> xs) const {
  if (xs.empty()) return Tensor::zeros({output_dim(), 1});
  return kind_ == SynEncoderKind::kLstm ? lstm_->encode_final(xs) : cnn_->encode(xs);
}

Tensor encode_syntactic(const SyntacticSequence& seq, const SyntacticEncoder& enc, const NodeTable& labels,
                        const EmbeddingTable* word_table) {
  std::vector<Tensor> xs;
  xs.reserve(seq.size());
  for (const auto& el : seq.elements) {
    if (seq.kind == SequenceKind::kSedt) {
      if (word_table == nullptr) throw ArgumentError("dependency sequences need a word table");
      const Tensor parts[] = {word_table->lookup(el.word_id), labels.vector(el.label_id)};
      xs.push_back(ad::concat_rows(parts));
    } else {
      xs.push_back(labels.vector(el.label_id));
    }
  }
  for (const auto& x : xs) check_vector(x, enc.input_dim(), "encode_syntactic");
  return enc.encode(xs);
}

Tensor embed_word(int word_id, std::span<const int> char_ids, const EmbeddingTable* word_table,
                  const CharCnnEmbedder* chars, const Tensor* structural) {
  std::vector<Tensor> parts;
  if (word_table != nullptr) parts.push_back(word_table->lookup(word_id));
  if (chars != nullptr) parts.push_back(chars->embed(char_ids));
  if (structural != nullptr) parts.push_back(*structural);
  if (parts.empty()) throw ArgumentError("embed_word: no embedding parts configured");
  if (parts.size() == 1) return parts.front();
  return ad::concat_rows(parts);
}

}  // namespace sest
