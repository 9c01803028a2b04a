#include <doctest.h>

#include <cmath>
#include <random>

#include "sest/attention.hpp"
#include "sest/error.hpp"

using namespace sest;
using ad::Shape;
using ad::Tensor;

namespace {

Tensor random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = d(rng);
  return Tensor::constant({rows, cols}, v);
}

// Reorders the columns of a constant matrix.
Tensor permute_cols(const Tensor& x, const std::vector<std::size_t>& order) {
  std::vector<Tensor> cols;
  for (std::size_t j : order) cols.push_back(ad::column(x, j));
  return ad::concat_cols(cols);
}

void check_close(const Tensor& a, const Tensor& b, double tol) {
  REQUIRE(a.shape() == b.shape());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values()[i] - b.values()[i]) <= tol);
}

Tensor column_mean(const Tensor& x) {
  std::vector<double> m(x.rows(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) m[r] += x.at(r, c) / static_cast<double>(x.cols());
  }
  return Tensor::column(m);
}

}  // namespace

TEST_SUITE("attention") {
  TEST_CASE("zero weights give zero similarity") {
    std::mt19937_64 rng(1);
    const auto S = similarity(random_matrix(rng, 3, 4), random_matrix(rng, 3, 2), Tensor::zeros({9, 1}));
    CHECK(S.shape() == Shape{4, 2});
    for (double v : S.values()) CHECK(v == 0.0);
  }

  TEST_CASE("scalar similarity") {
    const auto S = similarity(Tensor::column({2}), Tensor::column({3}), Tensor::column({1, 1, 1}));
    CHECK(S.item() == doctest::Approx(11.0));
  }

  TEST_CASE("similarity shape checks") {
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(similarity(random_matrix(rng, 3, 4), random_matrix(rng, 2, 2), Tensor::zeros({9, 1})),
                    ShapeError);
    CHECK_THROWS_AS(similarity(random_matrix(rng, 3, 4), random_matrix(rng, 3, 2), Tensor::zeros({6, 1})),
                    ShapeError);
  }

  TEST_CASE("similarity is equivariant and linear") {
    std::mt19937_64 rng(2);
    const auto H = random_matrix(rng, 3, 5);
    const auto U = random_matrix(rng, 3, 4);
    const auto w = random_matrix(rng, 9, 1);
    const auto S = similarity(H, U, w);
    const auto swapped = similarity(H, permute_cols(U, {1, 0, 2, 3}), w);
    for (std::size_t t = 0; t < 5; ++t) {
      CHECK(swapped.at(t, 0) == doctest::Approx(S.at(t, 1)).epsilon(1e-12));
      CHECK(swapped.at(t, 1) == doctest::Approx(S.at(t, 0)).epsilon(1e-12));
    }
    const auto doubled = similarity(H, U, ad::scale(w, 2.0));
    for (std::size_t i = 0; i < S.size(); ++i) CHECK(doubled.values()[i] == doctest::Approx(2.0 * S.values()[i]));
  }

  TEST_CASE("uniform rows average the question") {
    std::mt19937_64 rng(3);
    const auto U = random_matrix(rng, 3, 4);
    const auto Ht = context_to_question(Tensor::zeros({2, 4}), U);
    CHECK(Ht.shape() == Shape{3, 2});
    check_close(ad::column(Ht, 0), column_mean(U), 1e-12);
    check_close(ad::column(Ht, 1), column_mean(U), 1e-12);
  }

  TEST_CASE("a dominant entry selects its question vector") {
    std::mt19937_64 rng(4);
    const auto U = random_matrix(rng, 3, 4);
    const auto Ht = context_to_question(Tensor::constant({1, 4}, {0, 1e6, 0, 0}), U);
    check_close(Ht, ad::column(U, 1), 1e-6);
  }

  TEST_CASE("single question word") {
    std::mt19937_64 rng(5);
    const auto U = random_matrix(rng, 3, 1);
    const auto Ht = context_to_question(random_matrix(rng, 4, 1), U);
    for (std::size_t t = 0; t < 4; ++t) check_close(ad::column(Ht, t), U, 0.0);
    CHECK_THROWS_AS(context_to_question(Tensor::zeros({4, 0}), Tensor::zeros({3, 0})), ArgumentError);
  }

  TEST_CASE("question-to-context summaries") {
    std::mt19937_64 rng(6);
    const auto H = random_matrix(rng, 3, 5);
    check_close(question_to_context(Tensor::zeros({5, 2}), H), column_mean(H), 1e-12);
    const auto h1 = random_matrix(rng, 3, 1);
    check_close(question_to_context(random_matrix(rng, 1, 3), h1), h1, 1e-15);
    CHECK_THROWS_AS(question_to_context(Tensor::zeros({0, 2}), Tensor::zeros({3, 0})), ArgumentError);
    CHECK_THROWS_AS(question_to_context(Tensor::zeros({4, 2}), H), ShapeError);
  }

  TEST_CASE("summaries ignore question order") {
    std::mt19937_64 rng(7);
    const auto H = random_matrix(rng, 4, 6);
    const auto U = random_matrix(rng, 4, 5);
    const auto w = random_matrix(rng, 12, 1);
    const auto S = similarity(H, U, w);
    const std::vector<std::size_t> order{3, 0, 4, 2, 1};
    const auto Up = permute_cols(U, order);
    const auto Sp = similarity(H, Up, w);
    check_close(question_to_context(S, H), question_to_context(Sp, H), 1e-12);
    check_close(context_to_question(S, U), context_to_question(Sp, Up), 1e-12);
    AttentionParams params;
    ad::ParamStore store(1);
    params = AttentionParams::create(store, "att", 4);
    params.w_s = Tensor::constant({12, 1}, {w.values().begin(), w.values().end()});
    check_close(attend(H, U, params).G, attend(H, Up, params).G, 1e-12);
  }

  TEST_CASE("attention weights sum to one") {
    std::mt19937_64 rng(8);
    const auto S = random_matrix(rng, 6, 5);
    for (std::size_t t = 0; t < 6; ++t) {
      double total = 0.0;
      const auto a = ad::softmax_vec(ad::row(S, t));
      for (double v : a.values()) total += v;
      CHECK(std::abs(total - 1.0) <= 1e-9);
    }
    const auto Ones = Tensor::constant({1, 5}, std::vector<double>(5, 1.0));
    const auto weights = context_to_question(S, Ones);
    for (double v : weights.values()) CHECK(std::abs(v - 1.0) <= 1e-9);
  }

  TEST_CASE("fused blocks") {
    const auto G = fuse(Tensor::column({2}), Tensor::column({3}), Tensor::column({5}));
    CHECK(std::vector<double>(G.values().begin(), G.values().end()) == std::vector<double>{2, 3, 6, 10});
    std::mt19937_64 rng(9);
    const auto Ht = random_matrix(rng, 2, 3);
    const auto Z = fuse(Tensor::zeros({2, 3}), Ht, random_matrix(rng, 2, 1));
    for (std::size_t t = 0; t < 3; ++t) {
      for (std::size_t r = 0; r < 2; ++r) {
        CHECK(Z.at(r, t) == 0.0);
        CHECK(Z.at(2 + r, t) == Ht.at(r, t));
        CHECK(Z.at(4 + r, t) == 0.0);
        CHECK(Z.at(6 + r, t) == 0.0);
      }
    }
    for (std::size_t d : {1u, 2u, 5u}) {
      CHECK(fuse(random_matrix(rng, d, 4), random_matrix(rng, d, 4), random_matrix(rng, d, 1)).rows() == 4 * d);
    }
    CHECK_THROWS_AS(fuse(Tensor::zeros({2, 3}), Tensor::zeros({2, 4}), Tensor::zeros({2, 1})), ShapeError);
    CHECK_THROWS_AS(fuse(Tensor::zeros({2, 3}), Tensor::zeros({2, 3}), Tensor::zeros({3, 1})), ShapeError);
  }

  TEST_CASE("modeling stack") {
    ad::ParamStore store(1);
    const auto params = AttentionParams::create(store, "att", 4);
    CHECK(params.modeling.size() == 2);
    CHECK(params.w_s.shape() == Shape{12, 1});
    std::mt19937_64 rng(10);
    const auto M = model_encode(random_matrix(rng, 16, 7), params);
    CHECK(M.shape() == Shape{4, 7});
    for (auto& [_, e] : store.entries()) {
      for (double& v : e.tensor.mutable_values()) v = 0.0;
    }
    const auto M0 = model_encode(random_matrix(rng, 16, 7), params);
    for (double v : M0.values()) CHECK(v == 0.0);
    CHECK_THROWS_AS(AttentionParams::create(store, "odd", 3), ArgumentError);
  }

  TEST_CASE("attention gradients on a 4x3 instance") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      ad::ParamStore store(seed);
      const auto H = store.add("H", {2, 4}, ad::ParamStore::Init::kNormal, 1.0);
      const auto U = store.add("U", {2, 3}, ad::ParamStore::Init::kNormal, 1.0);
      const auto params = AttentionParams::create(store, "att", 2);
      std::mt19937_64 rng(seed);
      const auto weights = random_matrix(rng, 2, 4);
      const auto r = ad::grad_check(
          [&](ad::ParamStore&) { return ad::sum(ad::mul(attend(H, U, params).M, weights)); }, store, 1e-5);
      CHECK(r.max_rel_error < 1e-4);
      const auto weights_g = random_matrix(rng, 8, 4);
      const auto rg = ad::grad_check(
          [&](ad::ParamStore&) { return ad::sum(ad::mul(attend(H, U, params).G, weights_g)); }, store, 1e-5);
      CHECK(rg.max_rel_error < 1e-4);
    }
  }
}
