#include "sest/attention.hpp"

#include "sest/error.hpp"

namespace sest {

using ad::Tensor;

AttentionParams AttentionParams::create(ad::ParamStore& store, const std::string& prefix, std::size_t d,
                                        std::size_t modeling_layers) {
  if (d == 0 || d % 2 != 0) throw ArgumentError("contextual dimension must be a positive even number");
  if (modeling_layers == 0) throw ArgumentError("at least one modeling layer is required");
  AttentionParams p;
  p.d = d;
  p.w_s = store.add(prefix + ".w_s", {3 * d, 1});
  for (std::size_t l = 0; l < modeling_layers; ++l) {
    p.modeling.push_back(
        BiLstmEncoder::create(store, prefix + ".modeling" + std::to_string(l), l == 0 ? 4 * d : d, d / 2));
  }
  return p;
}

Tensor similarity(const Tensor& H, const Tensor& U, const Tensor& w_s) {
  const std::size_t d = H.rows();
  if (U.rows() != d) {
    throw ShapeError("similarity: context is " + ad::to_string(H.shape()) + " but question is " +
                     ad::to_string(U.shape()));
  }
  if (w_s.rows() != 3 * d || w_s.cols() != 1) {
    throw ShapeError("similarity: weight must be " + std::to_string(3 * d) + "x1, got " + ad::to_string(w_s.shape()));
  }
  const Tensor w_h = ad::transpose(ad::slice_rows(w_s, 0, d));
  const Tensor w_u = ad::transpose(ad::slice_rows(w_s, d, d));
  const Tensor w_hu = ad::slice_rows(w_s, 2 * d, d);
  const Tensor from_h = ad::transpose(ad::matmul(w_h, H));  // T × 1
  const Tensor from_u = ad::matmul(w_u, U);                 // 1 × J
  const Tensor cross = ad::matmul(ad::transpose(ad::mul_broadcast(H, w_hu)), U);
  return ad::add_broadcast(ad::add_broadcast(cross, from_h), from_u);
}

Tensor context_to_question(const Tensor& S, const Tensor& U) {
  if (S.cols() == 0 || U.cols() == 0) throw ArgumentError("context_to_question: empty question");
  if (S.cols() != U.cols()) {
    throw ShapeError("context_to_question: similarity " + ad::to_string(S.shape()) + " vs question " +
                     ad::to_string(U.shape()));
  }
  std::vector<Tensor> cols;
  cols.reserve(S.rows());
  for (std::size_t t = 0; t < S.rows(); ++t) {
    cols.push_back(ad::matmul(U, ad::softmax_vec(ad::row(S, t))));
  }
  return ad::concat_cols(cols);
}

Tensor question_to_context(const Tensor& S, const Tensor& H) {
  if (S.rows() == 0 || H.cols() == 0) throw ArgumentError("question_to_context: empty context");
  if (S.rows() != H.cols()) {
    throw ShapeError("question_to_context: similarity " + ad::to_string(S.shape()) + " vs context " +
                     ad::to_string(H.shape()));
  }
  const Tensor b = ad::softmax_vec(ad::max_over_rows(S));  // T × 1
  return ad::matmul(H, b);
}

Tensor fuse(const Tensor& H, const Tensor& H_tilde, const Tensor& h_hat) {
  if (!(H.shape() == H_tilde.shape())) {
    throw ShapeError("fuse: " + ad::to_string(H.shape()) + " vs " + ad::to_string(H_tilde.shape()));
  }
  if (h_hat.rows() != H.rows() || h_hat.cols() != 1) {
    throw ShapeError("fuse: summary vector is " + ad::to_string(h_hat.shape()) + ", context is " +
                     ad::to_string(H.shape()));
  }
  const Tensor parts[] = {H, H_tilde, ad::mul(H, H_tilde), ad::mul_broadcast(H, h_hat)};
  return ad::concat_rows(parts);
}

Tensor model_encode(const Tensor& G, const AttentionParams& params) {
  Tensor x = G;
  for (const auto& layer : params.modeling) x = layer.encode_columns(x);
  return x;
}

FusedRepresentation attend(const Tensor& H, const Tensor& U, const AttentionParams& params) {
  const Tensor S = similarity(H, U, params.w_s);
  const Tensor G = fuse(H, context_to_question(S, U), question_to_context(S, H));
  return {G, model_encode(G, params)};
}

}  // namespace sest
