// protogen/model.cc
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

#include "protogen/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "protogen/kernels.h"
#include "protogen/rng.h"

namespace protogen {

void ModelConfig::validate() const {
  if (d < 1 || heads < 1 || d % heads != 0) {
    throw std::invalid_argument("model width must be divisible by head count");
  }
  if (d_s < 1 || d_ff < 1 || layers_enc < 1 || layers_dec < 1 || p_max < 2) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  if (d_max < 2) {
    throw std::invalid_argument("d_max must be >= 2");
  }
  if (vocab < kNumReservedIds) {
    throw std::invalid_argument("vocabulary too small");
  }
}

std::vector<int> distance_annotate(const std::vector<std::string>& s_tokens,
                                   int n_concepts,
                                   const std::vector<std::string>& concepts,
                                   int d_max) {
  if (n_concepts < 1 || static_cast<int>(s_tokens.size()) <= n_concepts) {
    throw std::invalid_argument("input needs concepts and a prototype part");
  }
  const int n = static_cast<int>(s_tokens.size());
  const int n_o = n - n_concepts;
  std::vector<int> centers;  // prototype-local positions 1..n_o
  for (int p = 0; p < n_o; ++p) {
    const std::string& tok = s_tokens[n_concepts + p];
    for (const auto& c : concepts) {
      if (concept_match(tok, c)) {
        centers.push_back(p + 1);
        break;
      }
    }
  }
  std::vector<int> dist(n, 0);
  for (int p = 0; p < n_o; ++p) {
    int value = d_max;
    if (!centers.empty()) {
      int best = std::numeric_limits<int>::max();
      for (int c : centers) best = std::min(best, std::abs(p + 1 - c));
      value = std::min(best + 1, d_max);
    }
    dist[n_concepts + p] = value;
  }
  return dist;
}

EncodedInput encode_input(const std::vector<std::string>& concepts,
                          const std::vector<std::string>& prototype,
                          const Vocabulary& vocab, const ModelConfig& cfg) {
  if (concepts.empty()) throw std::invalid_argument("empty concept set");
  EncodedInput enc;
  enc.n_concepts = static_cast<int>(concepts.size());
  std::vector<std::string> s_tokens = concepts;
  const int proto_budget =
      std::max(1, cfg.p_max - enc.n_concepts);  // always room for >= 1 token
  for (const auto& tok : prototype) {
    if (static_cast<int>(s_tokens.size()) - enc.n_concepts >= proto_budget) {
      break;
    }
    s_tokens.push_back(tok);
  }
  if (static_cast<int>(s_tokens.size()) == enc.n_concepts) {
    // No prototype retrieved: fall back to a lone UNK so the layout
    // [concepts; prototype] is preserved.
    s_tokens.push_back("<unk>");
  }
  enc.ids = vocab.encode(s_tokens);
  enc.distances =
      distance_annotate(s_tokens, enc.n_concepts, concepts, cfg.d_max);
  enc.concept_hit.assign(s_tokens.size(), 0);
  for (size_t v = 0; v < s_tokens.size(); ++v) {
    for (const auto& c : concepts) {
      if (concept_match(s_tokens[v], c)) {
        enc.concept_hit[v] = 1;
        break;
      }
    }
  }
  enc.surfaces = std::move(s_tokens);
  return enc;
}

template <typename T>
T cross_attention_score(const std::vector<T>& h_dec,
                        const std::vector<T>& h_enc, int dist,
                        const Matrix<T>& wq, const Matrix<T>& wk,
                        const Matrix<T>& dist_table, int head, int d_k) {
  const int d = static_cast<int>(h_dec.size());
  T score = T(0);
  for (int c = 0; c < d_k; ++c) {
    const int row = head * d_k + c;
    T q = T(0), k = T(0);
    for (int j = 0; j < d; ++j) {
      q += wq.at(row, j) * h_dec[j];
      k += wk.at(row, j) * h_enc[j];
    }
    k += dist_table.at(dist, c);
    score += q * k;
  }
  return score / std::sqrt(T(d_k));
}

namespace {

template <typename T>
void fill_normal(Param<T>* p, uint64_t seed, double std_dev) {
  Rng rng(seed_for(seed, p->name));
  for (T& v : p->w.data) v = T(rng.normal() * std_dev);
}

}  // namespace

template <typename T>
Model<T>::Model(const ModelConfig& cfg, uint64_t seed)
    : cfg_(cfg), seed_(seed) {
  cfg_.validate();
  tok_emb_ = params_.add("emb.tok", cfg.vocab, cfg.d);
  pos_emb_ = params_.add("emb.pos", cfg.p_max, cfg.d);
  group_c_ = params_.add("emb.group_c", 1, cfg.d);
  group_o_ = params_.add("emb.group_o", 1, cfg.d);
  dist_table_ = params_.add("emb.dist", cfg.d_max + 1, cfg.d_k());
  enc_layers_.resize(cfg.layers_enc);
  for (int l = 0; l < cfg.layers_enc; ++l) {
    enc_layers_[l].init(params_, "enc." + std::to_string(l), cfg.d, cfg.heads,
                        cfg.d_ff);
  }
  enc_final_ln_.init(params_, "enc.final_ln", cfg.d);
  scaling_.init(params_, cfg.d, cfg.d_s);
  dec_layers_.resize(cfg.layers_dec);
  for (int l = 0; l < cfg.layers_dec; ++l) {
    dec_layers_[l].init(params_, "dec." + std::to_string(l), cfg.d, cfg.heads,
                        cfg.d_ff);
  }
  dec_final_ln_.init(params_, "dec.final_ln", cfg.d);
  w_out_ = params_.add("out.proj", cfg.vocab, cfg.d);

  // Initialization: layer-norm gains to one, biases zero, the three
  // knowledge-injection modules at init_std_new, everything else at
  // init_std_base.
  for (Param<T>* p : params_.all()) {
    const std::string& n = p->name;
    const bool is_gain = n.ends_with(".gamma");
    const bool is_shift =
        n.ends_with(".beta") || n.ends_with(".b");
    const bool is_new_module = n == "emb.group_c" || n == "emb.group_o" ||
                               n == "emb.dist" || n.starts_with("scale.");
    if (is_gain) {
      p->w.fill(T(1));
    } else if (is_shift) {
      p->w.fill(T(0));
    } else if (is_new_module) {
      fill_normal(p, seed, cfg.init_std_new);
    } else {
      fill_normal(p, seed, cfg.init_std_base);
    }
  }
}

template <typename T>
Matrix<T> Model<T>::embed_input(const EncodedInput& src,
                                bool group_embeddings) {
  const int n = src.length();
  if (n > cfg_.p_max) throw std::invalid_argument("source exceeds p_max");
  Matrix<T> x(n, cfg_.d);
  for (int i = 0; i < n; ++i) {
    const int id = src.ids[i];
    if (id < 0 || id >= cfg_.vocab) {
      throw std::invalid_argument("token id outside vocabulary");
    }
    const T* tok = tok_emb_->w.row(id);
    const T* pos = pos_emb_->w.row(i);
    const T* grp = i < src.n_concepts ? group_c_->w.row(0) : group_o_->w.row(0);
    T* xi = x.row(i);
    for (int j = 0; j < cfg_.d; ++j) {
      xi[j] = tok[j] + pos[j];
      if (group_embeddings) xi[j] += grp[j];
    }
  }
  return x;
}

template <typename T>
Matrix<T> Model<T>::embed_target(const std::vector<int>& dec_in) {
  const int n = static_cast<int>(dec_in.size());
  if (n > cfg_.p_max) throw std::invalid_argument("target exceeds p_max");
  if (n == 0 || dec_in[0] != kBosId) {
    throw std::invalid_argument("decoder input must start with BOS");
  }
  Matrix<T> y(n, cfg_.d);
  for (int i = 0; i < n; ++i) {
    const int id = dec_in[i];
    if (id < 0 || id >= cfg_.vocab) {
      throw std::invalid_argument("token id outside vocabulary");
    }
    const T* tok = tok_emb_->w.row(id);
    const T* pos = pos_emb_->w.row(i);
    T* yi = y.row(i);
    for (int j = 0; j < cfg_.d; ++j) yi[j] = tok[j] + pos[j];
  }
  return y;
}

template <typename T>
const Matrix<T>& Model<T>::forward(const EncodedInput& src,
                                   const std::vector<int>& dec_in,
                                   const AblationFlags& flags,
                                   const DropoutState& dp) {
  flags_ = flags;
  src_ = src;
  dec_in_ = dec_in;
  if (src.n_concepts < 1) throw std::invalid_argument("empty concept block");

  Matrix<T> x = embed_input(src, flags.group_embeddings);
  check_finite(x, "encoder embeddings");
  src_drop_.apply(x, dp);
  for (auto& layer : enc_layers_) x = layer.forward(x, dp);
  enc_pre_ = enc_final_ln_.forward(x);

  if (flags.scaling_module) {
    enc_out_ = scaling_.forward(enc_pre_, gates_);
  } else {
    enc_out_ = enc_pre_;
    gates_ = Matrix<T>();
  }

  // Hard masks knock key positions out of every cross-attention softmax.
  key_penalty_.assign(src.length(), T(0));
  const T neg_inf = -std::numeric_limits<T>::infinity();
  if (flags.hard_mask_all) {
    for (int v = src.n_concepts; v < src.length(); ++v) {
      key_penalty_[v] = neg_inf;
    }
  } else if (flags.hard_mask_nonconcept) {
    for (int v = src.n_concepts; v < src.length(); ++v) {
      if (!src.concept_hit[v]) key_penalty_[v] = neg_inf;
    }
  }

  CrossAttnExtras<T> extras;
  extras.distances = flags.position_indicator ? &src_.distances : nullptr;
  extras.dist_table = dist_table_;
  extras.key_penalty =
      (flags.hard_mask_all || flags.hard_mask_nonconcept) ? &key_penalty_
                                                          : nullptr;

  Matrix<T> y = embed_target(dec_in);
  tgt_drop_.apply(y, dp);
  for (auto& layer : dec_layers_) {
    y = layer.forward(y, enc_out_, &extras, dp);
  }
  dec_final_ = dec_final_ln_.forward(y);
  logits_.resize(dec_final_.rows, cfg_.vocab);
  kernels::matmul_nt(dec_final_, w_out_->w, logits_);
  return logits_;
}

template <typename T>
void Model<T>::backward(const Matrix<T>& dlogits,
                        const Matrix<T>& dgates_extra) {
  // Output projection.
  kernels::matmul_tn(dlogits, dec_final_, w_out_->g, /*accumulate=*/true);
  Matrix<T> dy(dec_final_.rows, cfg_.d);
  kernels::matmul_nn(dlogits, w_out_->w, dy);
  dy = dec_final_ln_.backward(dy);

  Matrix<T> denc(enc_out_.rows, cfg_.d);
  for (int l = static_cast<int>(dec_layers_.size()) - 1; l >= 0; --l) {
    dy = dec_layers_[l].backward(dy, denc);
  }

  // Decoder-side embedding gradients.
  tgt_drop_.backward(dy);
  for (int i = 0; i < dy.rows; ++i) {
    const int id = dec_in_[i];
    T* tok = tok_emb_->g.row(id);
    T* pos = pos_emb_->g.row(i);
    const T* dyi = dy.row(i);
    for (int j = 0; j < cfg_.d; ++j) {
      tok[j] += dyi[j];
      pos[j] += dyi[j];
    }
  }

  Matrix<T> dx;
  if (flags_.scaling_module) {
    dx = scaling_.backward(denc, dgates_extra);
  } else {
    dx = denc;
  }
  dx = enc_final_ln_.backward(dx);
  for (int l = static_cast<int>(enc_layers_.size()) - 1; l >= 0; --l) {
    dx = enc_layers_[l].backward(dx);
  }

  src_drop_.backward(dx);
  for (int i = 0; i < dx.rows; ++i) {
    const int id = src_.ids[i];
    T* tok = tok_emb_->g.row(id);
    T* pos = pos_emb_->g.row(i);
    const T* dxi = dx.row(i);
    for (int j = 0; j < cfg_.d; ++j) {
      tok[j] += dxi[j];
      pos[j] += dxi[j];
    }
    if (flags_.group_embeddings) {
      T* grp = i < src_.n_concepts ? group_c_->g.row(0) : group_o_->g.row(0);
      for (int j = 0; j < cfg_.d; ++j) grp[j] += dxi[j];
    }
  }
}

template <typename T>
const std::vector<Matrix<T>>& Model<T>::cross_attention_probs(int layer) {
  return dec_layers_.at(layer).cross_attention().attention_probs();
}

template float cross_attention_score<float>(const std::vector<float>&,
                                            const std::vector<float>&, int,
                                            const Matrix<float>&,
                                            const Matrix<float>&,
                                            const Matrix<float>&, int, int);
template double cross_attention_score<double>(const std::vector<double>&,
                                              const std::vector<double>&, int,
                                              const Matrix<double>&,
                                              const Matrix<double>&,
                                              const Matrix<double>&, int, int);

template class Model<float>;
template class Model<double>;

}  // namespace protogen
