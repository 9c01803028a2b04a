#pragma once

// Sequence encoders for the structural embedding and the word/character
// input layer.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sest/autodiff.hpp"
#include "sest/extraction.hpp"

namespace sest {

enum class Activation { kRelu, kIdentity, kTanh };
enum class SynEncoderKind { kLstm, kCnn };

std::string to_string(SynEncoderKind kind);
SynEncoderKind parse_syn_encoder(std::string_view text);  // "lstm" | "cnn"

// One LSTM direction. Gate weights act on [x; h_prev].
struct LstmCell {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  ad::Tensor w_i, w_f, w_o, w_g;  // hidden × (input + hidden)
  ad::Tensor b_i, b_f, b_o, b_g;  // hidden × 1

  static LstmCell create(ad::ParamStore& store, const std::string& prefix, std::size_t input_dim,
                         std::size_t hidden_dim);

  struct State {
    ad::Tensor h;
    ad::Tensor c;
  };
  State initial_state() const;
  State step(const ad::Tensor& x, const State& prev) const;
};

class BiLstmEncoder {
 public:
  BiLstmEncoder() = default;
  static BiLstmEncoder create(ad::ParamStore& store, const std::string& prefix, std::size_t input_dim,
                              std::size_t hidden_dim);

  std::size_t input_dim() const { return fwd_.input_dim; }
  std::size_t hidden_dim() const { return fwd_.hidden_dim; }
  std::size_t output_dim() const { return 2 * fwd_.hidden_dim; }
  const LstmCell& forward_cell() const { return fwd_; }
  const LstmCell& backward_cell() const { return bwd_; }

  // [backward final state at position 0; forward final state at T]. Empty
  // input gives the zero vector.
  ad::Tensor encode_final(std::span<const ad::Tensor> xs) const;
  // 2h × T; column t is [forward h_t; backward h_t].
  ad::Tensor encode_sequence(std::span<const ad::Tensor> xs) const;
  ad::Tensor encode_columns(const ad::Tensor& x) const;

 private:
  void check_inputs(std::span<const ad::Tensor> xs) const;
  std::vector<ad::Tensor> run(const LstmCell& cell, std::span<const ad::Tensor> xs, bool reverse) const;

  LstmCell fwd_;
  LstmCell bwd_;
};

ad::Tensor bilstm_encode(const BiLstmEncoder& enc, std::span<const ad::Tensor> xs);

class CnnEncoder {
 public:
  CnnEncoder() = default;
  static CnnEncoder create(ad::ParamStore& store, const std::string& prefix, std::size_t input_dim,
                           std::size_t width, std::size_t filters, Activation activation = Activation::kRelu);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t width() const { return width_; }
  std::size_t filters() const { return filters_; }
  const ad::Tensor& weight() const { return w_; }  // filters × (width · input_dim)
  const ad::Tensor& bias() const { return b_; }    // filters × 1

  // Max over windows of act(w_j · x_{i:i+width-1} + b_j); inputs shorter
  // than the filter are right-padded with zero vectors.
  ad::Tensor encode(std::span<const ad::Tensor> xs) const;

 private:
  std::size_t input_dim_ = 0;
  std::size_t width_ = 0;
  std::size_t filters_ = 0;
  Activation activation_ = Activation::kRelu;
  ad::Tensor w_;
  ad::Tensor b_;
};

ad::Tensor cnn_encode(const CnnEncoder& enc, std::span<const ad::Tensor> xs);

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  static EmbeddingTable create(ad::ParamStore& store, const std::string& name, std::size_t vocab_size,
                               std::size_t dim, bool trainable);

  std::size_t vocab_size() const { return table_.rows(); }
  std::size_t dim() const { return table_.cols(); }
  bool trainable() const { return table_.requires_grad(); }
  const ad::Tensor& table() const { return table_; }
  ad::Tensor& table() { return table_; }

  ad::Tensor lookup(int id) const;  // dim × 1

 private:
  ad::Tensor table_;
};

// Reads "word v1 ... vN" lines. Lines of the wrong width are rejected.
std::unordered_map<std::string, std::vector<double>> read_glove(std::istream& in, std::size_t dim);
// Overwrites rows of `table` for words present in `glove`; returns how many.
std::size_t apply_glove(EmbeddingTable& table, const LabelVocab& words,
                        const std::unordered_map<std::string, std::vector<double>>& glove);

// Splits UTF-8 text into code points (invalid bytes become single units).
std::vector<std::string> utf8_chars(std::string_view text);

class CharCnnEmbedder {
 public:
  CharCnnEmbedder() = default;
  static CharCnnEmbedder create(ad::ParamStore& store, const std::string& prefix, std::size_t char_vocab,
                                std::size_t char_dim, std::size_t filters, std::size_t width,
                                std::size_t max_chars);

  std::size_t output_dim() const { return cnn_.filters(); }
  std::size_t max_chars() const { return max_chars_; }
  const EmbeddingTable& chars() const { return chars_; }

  ad::Tensor embed(std::span<const int> char_ids) const;

 private:
  EmbeddingTable chars_;
  CnnEncoder cnn_;
  std::size_t max_chars_ = 16;
};

// Fixed (untrained) node vectors for every id of a label vocabulary.
class NodeTable {
 public:
  NodeTable() = default;
  NodeTable(std::size_t vocab_size, std::size_t dim, std::uint64_t master_seed);

  std::size_t size() const { return vectors_.size(); }
  std::size_t dim() const { return dim_; }
  const ad::Tensor& vector(int id) const;

 private:
  std::size_t dim_ = 0;
  std::vector<ad::Tensor> vectors_;
};

class SyntacticEncoder {
 public:
  SyntacticEncoder() = default;
  // LSTM: hidden units per direction; CNN: number of filters of `cnn_width`.
  static SyntacticEncoder create(ad::ParamStore& store, const std::string& prefix, SynEncoderKind kind,
                                 std::size_t input_dim, std::size_t units, std::size_t cnn_width);

  SynEncoderKind kind() const { return kind_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const;
  const BiLstmEncoder& lstm() const { return *lstm_; }
  const CnnEncoder& cnn() const { return *cnn_; }

  ad::Tensor encode(std::span<const ad::Tensor> xs) const;

 private:
  SynEncoderKind kind_ = SynEncoderKind::kLstm;
  std::size_t input_dim_ = 0;
  std::optional<BiLstmEncoder> lstm_;
  std::optional<CnnEncoder> cnn_;
};

// Element inputs: node vector (SECT/POS) or [word embedding; label node
// vector] (SEDT). Empty sequences map to the zero vector.
ad::Tensor encode_syntactic(const SyntacticSequence& seq, const SyntacticEncoder& enc, const NodeTable& labels,
                            const EmbeddingTable* word_table);

// Concatenation of whichever parts are present: [word; char-CNN; structural].
ad::Tensor embed_word(int word_id, std::span<const int> char_ids, const EmbeddingTable* word_table,
                      const CharCnnEmbedder* chars, const ad::Tensor* structural);

}  // namespace sest
