#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "sest/encoders.hpp"
#include "sest/error.hpp"
#include "support.hpp"

using namespace sest;
using ad::Tensor;

namespace {

std::vector<double> vals(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

void set_values(ad::ParamStore& s, const std::string& name, std::vector<double> v) {
  auto dst = s.get(name).mutable_values();
  REQUIRE(dst.size() == v.size());
  std::copy(v.begin(), v.end(), dst.begin());
}

void zero_all(ad::ParamStore& s) {
  for (auto& [_, e] : s.entries()) {
    for (double& v : e.tensor.mutable_values()) v = 0.0;
  }
}

std::vector<Tensor> random_columns(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    for (auto& x : v) x = d(rng);
    out.push_back(Tensor::column(v));
  }
  return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor weighted(const Tensor& y, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> w(y.size());
  for (auto& x : w) x = d(rng);
  return ad::sum(ad::mul(y, Tensor::constant(y.shape(), w)));
}

}  // namespace

TEST_SUITE("encoders") {
  TEST_CASE("zero LSTM parameters give zero output") {
    ad::ParamStore s(1);
    const auto enc = BiLstmEncoder::create(s, "enc", 3, 4);
    zero_all(s);
    std::mt19937_64 rng(2);
    const auto y = vals(bilstm_encode(enc, random_columns(rng, 5, 3)));
    CHECK(y.size() == 8);
    for (double v : y) CHECK(v == 0.0);
  }

  TEST_CASE("empty sequence is the zero vector") {
    ad::ParamStore s(1);
    const auto enc = BiLstmEncoder::create(s, "enc", 3, 4);
    const auto y = vals(enc.encode_final({}));
    CHECK(y == std::vector<double>(8, 0.0));
  }

  TEST_CASE("gate shapes and forget bias") {
    ad::ParamStore s(1);
    const auto enc = BiLstmEncoder::create(s, "enc", 3, 4);
    const auto& c = enc.forward_cell();
    CHECK(c.w_i.shape() == ad::Shape{4, 7});
    CHECK(c.w_g.shape() == ad::Shape{4, 7});
    CHECK(c.b_o.shape() == ad::Shape{4, 1});
    CHECK(vals(c.b_f) == std::vector<double>(4, 1.0));
    CHECK(vals(c.b_i) == std::vector<double>(4, 0.0));
  }

  TEST_CASE("single hand-computed LSTM step") {
    ad::ParamStore s(1);
    const auto enc = BiLstmEncoder::create(s, "enc", 1, 1);
    for (const std::string dir : {"fwd", "bwd"}) {
      set_values(s, "enc." + dir + ".w_i", {0.5, 0.0});
      set_values(s, "enc." + dir + ".b_i", {0.1});
      set_values(s, "enc." + dir + ".w_f", {0.3, 0.0});
      set_values(s, "enc." + dir + ".b_f", {1.0});
      set_values(s, "enc." + dir + ".w_o", {-0.4, 0.0});
      set_values(s, "enc." + dir + ".b_o", {0.2});
      set_values(s, "enc." + dir + ".w_g", {0.8, 0.0});
      set_values(s, "enc." + dir + ".b_g", {-0.1});
    }
    const double x = 1.5;
    const double i = sigmoid(0.5 * x + 0.1);
    const double o = sigmoid(-0.4 * x + 0.2);
    const double g = std::tanh(0.8 * x - 0.1);
    const double h = o * std::tanh(i * g);
    const Tensor xs[] = {Tensor::column({x})};
    const auto y = vals(bilstm_encode(enc, xs));
    REQUIRE(y.size() == 2);
    CHECK(y[0] == doctest::Approx(h).epsilon(1e-14));
    CHECK(y[1] == doctest::Approx(h).epsilon(1e-14));
  }

  TEST_CASE("wrong LSTM input width") {
    ad::ParamStore s(1);
    const auto enc = BiLstmEncoder::create(s, "enc", 3, 2);
    const Tensor xs[] = {Tensor::column({1, 2})};
    CHECK_THROWS_AS(enc.encode_final(xs), ShapeError);
    CHECK_THROWS_AS(enc.encode_sequence({}), ArgumentError);
  }

  TEST_CASE("no leakage past the sequence end") {
    ad::ParamStore s(3);
    const auto enc = BiLstmEncoder::create(s, "enc", 2, 3);
    std::mt19937_64 rng(4);
    const auto xs = random_columns(rng, 6, 2);
    const auto a = enc.encode_sequence(std::span<const Tensor>(xs.data(), 3));
    const auto b = enc.encode_sequence(xs);
    for (std::size_t t = 0; t < 3; ++t) {
      for (std::size_t r = 0; r < 3; ++r) CHECK(a.at(r, t) == b.at(r, t));
    }
    CHECK(b.shape() == ad::Shape{6, 6});
    const auto fin = vals(enc.encode_final(std::span<const Tensor>(xs.data(), 3)));
    CHECK(fin[3] == a.at(0, 2));  // forward half of the final state is the last forward column
    CHECK(fin[0] == a.at(3, 0));  // backward half is the first backward column
  }

  TEST_CASE("hand-built CNN takes the maximum window") {
    ad::ParamStore s(1);
    const auto cnn = CnnEncoder::create(s, "cnn", 1, 1, 1, Activation::kIdentity);
    set_values(s, "cnn.w", {1.0});
    const Tensor xs[] = {Tensor::column({2}), Tensor::column({5}), Tensor::column({3})};
    CHECK(vals(cnn_encode(cnn, xs)) == std::vector<double>{5.0});
  }

  TEST_CASE("relu CNN on zero inputs") {
    ad::ParamStore s(1);
    const auto cnn = CnnEncoder::create(s, "cnn", 3, 2, 4);
    const std::vector<Tensor> xs(3, Tensor::zeros({3, 1}));
    CHECK(vals(cnn.encode(xs)) == std::vector<double>(4, 0.0));
  }

  TEST_CASE("CNN input shorter than the filter") {
    ad::ParamStore s(1);
    const auto cnn = CnnEncoder::create(s, "cnn", 2, 5, 3, Activation::kTanh);
    const Tensor xs[] = {Tensor::column({0.3, -0.2})};
    const auto y = vals(cnn.encode(xs));
    CHECK(y.size() == 3);
    for (double v : y) CHECK(std::isfinite(v));
    CHECK_THROWS_AS(cnn.encode({}), ArgumentError);
    const Tensor bad[] = {Tensor::column({1, 2, 3})};
    CHECK_THROWS_AS(cnn.encode(bad), ShapeError);
  }

  TEST_CASE("CNN order sensitivity and zero padding") {
    ad::ParamStore s(1);
    const auto cnn = CnnEncoder::create(s, "cnn", 1, 2, 1, Activation::kRelu);
    set_values(s, "cnn.w", {2.0, -1.0});
    const Tensor fwd[] = {Tensor::column({1}), Tensor::column({3})};
    const Tensor rev[] = {Tensor::column({3}), Tensor::column({1})};
    CHECK(vals(cnn.encode(fwd)) == std::vector<double>{0.0});
    CHECK(vals(cnn.encode(rev)) == std::vector<double>{5.0});
    const Tensor padded[] = {Tensor::column({3}), Tensor::column({1}), Tensor::zeros({1, 1}), Tensor::zeros({1, 1})};
    CHECK(vals(cnn.encode(padded)) == vals(cnn.encode(rev)));
  }

  TEST_CASE("embedding lookup and unknown rows") {
    ad::ParamStore s(1);
    const auto t = EmbeddingTable::create(s, "emb", 5, 3, true);
    CHECK(t.lookup(2).shape() == ad::Shape{3, 1});
    CHECK(vals(t.lookup(2)) == std::vector<double>{t.table().at(2, 0), t.table().at(2, 1), t.table().at(2, 2)});
    CHECK(t.trainable());
    CHECK_THROWS_AS(t.lookup(5), ArgumentError);
    const auto frozen = EmbeddingTable::create(s, "fixed", 5, 3, false);
    CHECK_FALSE(frozen.trainable());
  }

  TEST_CASE("GloVe text vectors") {
    std::istringstream in("dog 0.5 1 -2\ncat 1 2 3\n");
    const auto g = read_glove(in, 3);
    CHECK(g.at("dog") == std::vector<double>{0.5, 1, -2});
    ad::ParamStore s(1);
    auto table = EmbeddingTable::create(s, "emb", 3, 3, false);
    LabelVocab words;
    words.intern("dog");
    words.intern("bird");
    CHECK(apply_glove(table, words, g) == 1);
    CHECK(vals(table.lookup(1)) == std::vector<double>{0.5, 1, -2});
    std::istringstream bad("dog 1 2\ncat 1 2 3\n");
    try {
      read_glove(bad, 3);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.position() == 1);
    }
  }

  TEST_CASE("UTF-8 code points") {
    CHECK(utf8_chars("héllo").size() == 5);
    CHECK(utf8_chars("").empty());
    CHECK(utf8_chars("a\xe2\x82\xac").back() == "\xe2\x82\xac");
  }

  TEST_CASE("character CNN truncates and pads") {
    ad::ParamStore s(1);
    const auto cc = CharCnnEmbedder::create(s, "char", 10, 8, 100, 5, 16);
    CHECK(cc.output_dim() == 100);
    std::vector<int> long_word(30, 3);
    std::vector<int> first16(16, 3);
    CHECK(vals(cc.embed(long_word)) == vals(cc.embed(first16)));
    const int short_word[] = {1, 2};
    CHECK(cc.embed(short_word).size() == 100);
  }

  TEST_CASE("sect sequence through a 30-unit BiLSTM") {
    ad::ParamStore s(1);
    const NodeTable nodes(6, 8, 5);
    const auto enc = SyntacticEncoder::create(s, "syn", SynEncoderKind::kLstm, 8, 30, 3);
    SyntacticSequence seq;
    for (int id : {1, 2, 3}) seq.elements.push_back({id, SyntacticElement::kNoWord});
    CHECK(enc.output_dim() == 60);
    CHECK(encode_syntactic(seq, enc, nodes, nullptr).size() == 60);
    const auto empty = vals(encode_syntactic(SyntacticSequence{}, enc, nodes, nullptr));
    CHECK(empty == std::vector<double>(60, 0.0));
    const auto cnn = SyntacticEncoder::create(s, "syncnn", SynEncoderKind::kCnn, 8, 30, 3);
    CHECK(cnn.output_dim() == 30);
    CHECK(encode_syntactic(seq, cnn, nodes, nullptr).size() == 30);
  }

  TEST_CASE("sedt elements carry word and label vectors") {
    ad::ParamStore s(1);
    LabelVocab labels, words;
    ExtractionConfig cfg;
    cfg.window = 20;
    const auto seq = extract_sedt(test::unit_tree(), test::kUnit, cfg, labels, words);
    const NodeTable nodes(labels.size(), 8, 5);
    const auto table = EmbeddingTable::create(s, "word", words.size(), 100, true);
    const auto enc = SyntacticEncoder::create(s, "syn", SynEncoderKind::kLstm, 108, 30, 3);
    CHECK(encode_syntactic(seq, enc, nodes, &table).size() == 60);
    const auto narrow = SyntacticEncoder::create(s, "narrow", SynEncoderKind::kLstm, 8, 30, 3);
    CHECK_THROWS_AS(encode_syntactic(seq, narrow, nodes, &table), ShapeError);
    CHECK_THROWS_AS(encode_syntactic(seq, enc, nodes, nullptr), ArgumentError);
  }

  TEST_CASE("ablated sequences keep the output width") {
    ad::ParamStore s(1);
    const NodeTable nodes(6, 8, 5);
    const auto enc = SyntacticEncoder::create(s, "syn", SynEncoderKind::kLstm, 8, 30, 3);
    SyntacticSequence seq;
    for (int id : {1, 2, 3, 4}) seq.elements.push_back({id, SyntacticElement::kNoWord});
    const auto rnd = apply_ablation(seq, OrderMode::kRandomNodes, 7, 6);
    CHECK(encode_syntactic(rnd, enc, nodes, nullptr).shape() == encode_syntactic(seq, enc, nodes, nullptr).shape());
  }

  TEST_CASE("node table vectors are fixed") {
    const NodeTable nodes(4, 8, 5);
    CHECK(nodes.size() == 4);
    CHECK(vals(nodes.vector(2)) == node_vector(2, 8, 5));
    CHECK_FALSE(nodes.vector(2).requires_grad());
    CHECK_THROWS_AS(nodes.vector(4), ArgumentError);
  }

  TEST_CASE("token representation widths") {
    ad::ParamStore s(1);
    const auto words = EmbeddingTable::create(s, "word", 10, 100, true);
    const auto chars = CharCnnEmbedder::create(s, "char", 10, 8, 100, 5, 16);
    const int ids[] = {1, 2, 3};
    CHECK(embed_word(4, ids, &words, &chars, nullptr).size() == 200);
    const Tensor syn = Tensor::zeros({60, 1});
    CHECK(embed_word(4, ids, &words, &chars, &syn).size() == 260);
    const auto unk = vals(embed_word(LabelVocab::kUnk, ids, &words, &chars, nullptr));
    for (double v : unk) CHECK(std::isfinite(v));
    CHECK(unk[0] == words.table().at(0, 0));
  }

  TEST_CASE("encoder gradients") {
    std::mt19937_64 rng(8);
    const auto xs = random_columns(rng, 4, 3);
    {
      ad::ParamStore s(2);
      const auto enc = BiLstmEncoder::create(s, "lstm", 3, 2);
      const auto r = ad::grad_check([&](ad::ParamStore&) { return weighted(enc.encode_final(xs), 1); }, s, 1e-5);
      CHECK(r.max_rel_error < 1e-4);
      const auto r2 = ad::grad_check([&](ad::ParamStore&) { return weighted(enc.encode_sequence(xs), 2); }, s, 1e-5);
      CHECK(r2.max_rel_error < 1e-4);
    }
    {
      ad::ParamStore s(2);
      const auto cnn = CnnEncoder::create(s, "cnn", 3, 2, 4, Activation::kTanh);
      const auto r = ad::grad_check([&](ad::ParamStore&) { return weighted(cnn.encode(xs), 3); }, s, 1e-5);
      CHECK(r.max_rel_error < 1e-4);
    }
    {
      ad::ParamStore s(2);
      const auto cc = CharCnnEmbedder::create(s, "char", 6, 3, 4, 3, 16);
      const int ids[] = {1, 2, 3, 4, 5};
      const auto r = ad::grad_check([&](ad::ParamStore&) { return weighted(cc.embed(ids), 4); }, s, 1e-5);
      CHECK(r.max_rel_error < 1e-4);
    }
    for (const auto kind : {SynEncoderKind::kLstm, SynEncoderKind::kCnn}) {
      ad::ParamStore s(2);
      const NodeTable nodes(6, 4, 5);
      const auto words = EmbeddingTable::create(s, "word", 5, 3, true);
      const auto enc = SyntacticEncoder::create(s, "syn", kind, 7, 3, 2);
      SyntacticSequence seq;
      seq.kind = SequenceKind::kSedt;
      for (int id : {1, 3, 2}) seq.elements.push_back({id, id + 1});
      const auto r = ad::grad_check(
          [&](ad::ParamStore&) { return weighted(encode_syntactic(seq, enc, nodes, &words), 5); }, s, 1e-5);
      CHECK(r.max_rel_error < 1e-4);
    }
  }
}
