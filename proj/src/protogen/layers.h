// protogen/layers.h
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

#ifndef PROTOGEN_LAYERS_H_
#define PROTOGEN_LAYERS_H_

#include <string>
#include <vector>

#include "protogen/param.h"
#include "protogen/rng.h"
#include "protogen/tensor.h"

namespace protogen {

// Inverted dropout. A null rng or zero rate disables it.
struct DropoutState {
  Rng* rng = nullptr;
  double rate = 0.0;
  bool on() const { return rng != nullptr && rate > 0.0; }
};

template <typename T>
struct DropoutMask {
  Matrix<T> mask;
  bool used = false;
  void apply(Matrix<T>& x, const DropoutState& dp);
  void backward(Matrix<T>& dx) const;
};

// y = x W^T + b with W stored out x in.
template <typename T>
class Linear {
 public:
  void init(ParamSet<T>& ps, const std::string& prefix, int in_dim,
            int out_dim, bool bias);
  Matrix<T> forward(const Matrix<T>& x);
  Matrix<T> backward(const Matrix<T>& dy);

  Param<T>* weight() { return w_; }
  Param<T>* bias() { return b_; }

 private:
  Param<T>* w_ = nullptr;
  Param<T>* b_ = nullptr;
  Matrix<T> x_;
};

template <typename T>
class LayerNorm {
 public:
  void init(ParamSet<T>& ps, const std::string& prefix, int dim);
  Matrix<T> forward(const Matrix<T>& x);
  Matrix<T> backward(const Matrix<T>& dy);

  static constexpr double kEps = 1e-5;

 private:
  Param<T>* gamma_ = nullptr;
  Param<T>* beta_ = nullptr;
  Matrix<T> x_;
  std::vector<T> mean_, rstd_;
};

// Extra inputs for encoder-decoder attention: the shared distance embedding
// added to per-head keys and an additive key penalty (0 or -inf) used by the
// hard-mask ablations.
template <typename T>
struct CrossAttnExtras {
  const std::vector<int>* distances = nullptr;
  Param<T>* dist_table = nullptr;  // (D_max + 1) x d_k
  const std::vector<T>* key_penalty = nullptr;
};

template <typename T>
class MultiHeadAttention {
 public:
  void init(ParamSet<T>& ps, const std::string& prefix, int d, int heads);

  // q_in: n_q x d, kv_in: n_k x d. Scores follow
  //   s = (W_q q)^T (W_k k + E_D(dist)) / sqrt(d_k)
  // per head; the distance term drops out when extras is null.
  Matrix<T> forward(const Matrix<T>& q_in, const Matrix<T>& kv_in, bool causal,
                    const CrossAttnExtras<T>* extras);

  Matrix<T> backward_self(const Matrix<T>& dout);
  Matrix<T> backward_cross(const Matrix<T>& dout, Matrix<T>& dkv_accum);

  // Per-head attention probabilities from the last forward.
  const std::vector<Matrix<T>>& attention_probs() const { return a_; }

 private:
  Matrix<T> backward_impl(const Matrix<T>& dout, Matrix<T>& dkv);

  int d_ = 0, heads_ = 0, dk_ = 0;
  Param<T>* wq_ = nullptr;
  Param<T>* wk_ = nullptr;
  Param<T>* wv_ = nullptr;
  Param<T>* wo_ = nullptr;

  Matrix<T> q_in_, kv_in_, concat_;
  bool causal_ = false;
  CrossAttnExtras<T> extras_;
  bool has_extras_ = false;
  std::vector<Matrix<T>> qh_, kh_, vh_, a_;
};

template <typename T>
class FeedForward {
 public:
  void init(ParamSet<T>& ps, const std::string& prefix, int d, int d_ff);
  Matrix<T> forward(const Matrix<T>& x);
  Matrix<T> backward(const Matrix<T>& dy);

 private:
  Linear<T> fc1_, fc2_;
  Matrix<T> z1_;
};

// Per-position, per-channel gate on encoder outputs:
//   gates = sigmoid(W2 relu(W1 h + b1) + b2),  out = h .* (2 * gates).
// Zero-initialized parameters make it the exact identity.
template <typename T>
class ScalingModule {
 public:
  void init(ParamSet<T>& ps, int d, int d_s);
  // Fills `gates` (n x d, entries strictly inside (0, 1)).
  Matrix<T> forward(const Matrix<T>& h, Matrix<T>& gates);
  // dgates_extra carries the encoder classification loss term; may be empty.
  Matrix<T> backward(const Matrix<T>& dout, const Matrix<T>& dgates_extra);

 private:
  Linear<T> fc1_, fc2_;
  Matrix<T> h_, z1_, gates_;
};

template <typename T>
class EncoderLayer {
 public:
  void init(ParamSet<T>& ps, const std::string& prefix, int d, int heads,
            int d_ff);
  Matrix<T> forward(const Matrix<T>& x, const DropoutState& dp);
  Matrix<T> backward(const Matrix<T>& dout);
  MultiHeadAttention<T>& attention() { return attn_; }

 private:
  LayerNorm<T> ln1_, ln2_;
  MultiHeadAttention<T> attn_;
  FeedForward<T> ffn_;
  DropoutMask<T> drop1_, drop2_;
};

template <typename T>
class DecoderLayer {
 public:
  void init(ParamSet<T>& ps, const std::string& prefix, int d, int heads,
            int d_ff);
  Matrix<T> forward(const Matrix<T>& y, const Matrix<T>& enc,
                    const CrossAttnExtras<T>* extras, const DropoutState& dp);
  // Returns dy; adds the encoder-side gradient into denc_accum.
  Matrix<T> backward(const Matrix<T>& dout, Matrix<T>& denc_accum);
  MultiHeadAttention<T>& cross_attention() { return cross_; }
  MultiHeadAttention<T>& self_attention() { return self_; }

 private:
  LayerNorm<T> ln1_, ln2_, ln3_;
  MultiHeadAttention<T> self_, cross_;
  FeedForward<T> ffn_;
  DropoutMask<T> drop1_, drop2_, drop3_;
};

}  // namespace protogen

#endif  // PROTOGEN_LAYERS_H_
