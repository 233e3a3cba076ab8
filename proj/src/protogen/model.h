// protogen/model.h
//
// Copyright 2026 The Protogen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PROTOGEN_MODEL_H_
#define PROTOGEN_MODEL_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "protogen/layers.h"
#include "protogen/param.h"
#include "protogen/tensor.h"
#include "protogen/text.h"

namespace protogen {

struct ModelConfig {
  int d = 64;        // hidden size
  int heads = 4;     // attention heads
  int d_s = 32;      // scaling-module hidden width
  int layers_enc = 2;
  int layers_dec = 2;
  int d_ff = 128;
  int vocab = 0;     // set from the vocabulary before construction
  int p_max = 64;    // max sequence length
  int d_max = 16;    // distance values clamp here; 0 is the concept bucket
  double init_std_base = 0.02;
  double init_std_new = 5e-3;  // group embeddings, scaling module, distances

  int d_k() const { return d / heads; }
  void validate() const;
};

// Which of the three injection mechanisms take part in a forward pass, plus
// the hard-mask ablations that replace the scaling module.
struct AblationFlags {
  bool group_embeddings = true;       // GE
  bool scaling_module = true;         // SM
  bool position_indicator = true;     // PPI
  bool hard_mask_all = false;         // HM1: hide every prototype state
  bool hard_mask_nonconcept = false;  // HM2: hide non-matching prototype states
};

// Concatenated [concepts; prototype] ready for the encoder.
struct EncodedInput {
  std::vector<int> ids;
  std::vector<std::string> surfaces;
  int n_concepts = 0;
  std::vector<int> distances;        // 0 on concept positions, >= 1 otherwise
  std::vector<uint8_t> concept_hit;  // token concept-matches some concept

  int length() const { return static_cast<int>(ids.size()); }
};

// Distance layout over S = [concepts; prototype]: concept positions get 0;
// prototype position v gets 1 + min_p |v - p| over prototype positions p
// whose token matches a concept, clamped to d_max; if nothing matches, every
// prototype position gets d_max.
std::vector<int> distance_annotate(const std::vector<std::string>& s_tokens,
                                   int n_concepts,
                                   const std::vector<std::string>& concepts,
                                   int d_max);

// Builds ids, distances and match flags from surfaces. The prototype is
// truncated so the total length fits p_max.
EncodedInput encode_input(const std::vector<std::string>& concepts,
                          const std::vector<std::string>& prototype,
                          const Vocabulary& vocab, const ModelConfig& cfg);

// Single-pair cross-attention score for head x:
//   (W_q h_d)^T (W_k h_e + E_D(dist)) / sqrt(d_k)
// with W_q, W_k packed d x d and E_D rows in per-head key space.
template <typename T>
T cross_attention_score(const std::vector<T>& h_dec,
                        const std::vector<T>& h_enc, int dist,
                        const Matrix<T>& wq, const Matrix<T>& wk,
                        const Matrix<T>& dist_table, int head, int d_k);

template <typename T>
class Model {
 public:
  // Deterministic initialization: new-module arrays (group embeddings,
  // scaling module, distance table) use init_std_new, the transformer body
  // init_std_base, biases zero, layer-norm gain one.
  Model(const ModelConfig& cfg, uint64_t seed);

  // Teacher-forced forward pass to logits (dec_len x vocab). dec_in must
  // start with BOS. The gate matrix from the scaling module is available via
  // gates() afterwards (empty when the module is off).
  const Matrix<T>& forward(const EncodedInput& src,
                           const std::vector<int>& dec_in,
                           const AblationFlags& flags,
                           const DropoutState& dp = {});

  // Backward from dlogits; dgates_extra (possibly empty) adds the encoder
  // classification term. Gradients accumulate into the parameter set.
  void backward(const Matrix<T>& dlogits, const Matrix<T>& dgates_extra);

  const Matrix<T>& gates() const { return gates_; }
  const Matrix<T>& encoder_output() const { return enc_out_; }
  ParamSet<T>& params() { return params_; }
  const ModelConfig& config() const { return cfg_; }
  uint64_t seed() const { return seed_; }

  // Attention probabilities of decoder layer `layer`'s cross-attention from
  // the last forward, one matrix per head.
  const std::vector<Matrix<T>>& cross_attention_probs(int layer);

  Param<T>* find_param(const std::string& name) { return params_.find(name); }

  // E(s_v) = token + absolute position (+ the group vector when enabled).
  Matrix<T> embed_input(const EncodedInput& src, bool group_embeddings);

 private:
  Matrix<T> embed_target(const std::vector<int>& dec_in);

  ModelConfig cfg_;
  uint64_t seed_ = 0;
  ParamSet<T> params_;

  Param<T>* tok_emb_ = nullptr;    // vocab x d, shared encoder/decoder
  Param<T>* pos_emb_ = nullptr;    // p_max x d
  Param<T>* group_c_ = nullptr;    // 1 x d
  Param<T>* group_o_ = nullptr;    // 1 x d
  Param<T>* dist_table_ = nullptr; // (d_max + 1) x d_k
  std::vector<EncoderLayer<T>> enc_layers_;
  LayerNorm<T> enc_final_ln_;
  ScalingModule<T> scaling_;
  std::vector<DecoderLayer<T>> dec_layers_;
  LayerNorm<T> dec_final_ln_;
  Param<T>* w_out_ = nullptr;      // vocab x d

  // per-forward state
  AblationFlags flags_;
  EncodedInput src_;
  std::vector<int> dec_in_;
  std::vector<T> key_penalty_;
  Matrix<T> enc_pre_, enc_out_, gates_, dec_final_, logits_;
  DropoutMask<T> src_drop_, tgt_drop_;
};

using RealModel = Model<float>;

}  // namespace protogen

#endif  // PROTOGEN_MODEL_H_
