#pragma once

// Bidirectional attention between a d×T context matrix H and a d×J
// question matrix U, followed by the modeling BiLSTM stack.

#include <cstddef>
#include <string>
#include <vector>

#include "sest/autodiff.hpp"
#include "sest/encoders.hpp"

namespace sest {

struct AttentionParams {
  std::size_t d = 0;
  ad::Tensor w_s;  // 3d × 1, split as [w_h; w_u; w_hu]
  std::vector<BiLstmEncoder> modeling;

  // Modeling layers take 4d (first) or d (later) inputs with d/2 units per
  // direction; d must be even.
  static AttentionParams create(ad::ParamStore& store, const std::string& prefix, std::size_t d,
                                std::size_t modeling_layers = 2);
};

struct FusedRepresentation {
  ad::Tensor G;  // 4d × T
  ad::Tensor M;  // d × T
};

// S[t][j] = w_s · [h_t; u_j; h_t ∘ u_j]; result is T × J.
ad::Tensor similarity(const ad::Tensor& H, const ad::Tensor& U, const ad::Tensor& w_s);

// Column t is Σ_j softmax(S[t, :])_j u_j; result is d × T.
ad::Tensor context_to_question(const ad::Tensor& S, const ad::Tensor& U);

// softmax over t of max_j S[t][j], used to weight the columns of H; d × 1.
ad::Tensor question_to_context(const ad::Tensor& S, const ad::Tensor& H);

// Column t is [h_t; h̃_t; h_t ∘ h̃_t; h_t ∘ ĥ].
ad::Tensor fuse(const ad::Tensor& H, const ad::Tensor& H_tilde, const ad::Tensor& h_hat);

ad::Tensor model_encode(const ad::Tensor& G, const AttentionParams& params);

FusedRepresentation attend(const ad::Tensor& H, const ad::Tensor& U, const AttentionParams& params);

}  // namespace sest
