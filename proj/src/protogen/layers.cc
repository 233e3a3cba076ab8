// protogen/layers.cc
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

#include "protogen/layers.h"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "protogen/kernels.h"

namespace protogen {

namespace {

template <typename T>
void add_inplace(Matrix<T>& a, const Matrix<T>& b) {
  for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

template <typename T>
Matrix<T> slice_cols(const Matrix<T>& m, int c0, int width) {
  Matrix<T> out(m.rows, width);
  for (int i = 0; i < m.rows; ++i) {
    const T* src = m.row(i) + c0;
    std::copy(src, src + width, out.row(i));
  }
  return out;
}

template <typename T>
void write_cols(Matrix<T>& dst, const Matrix<T>& src, int c0) {
  for (int i = 0; i < src.rows; ++i) {
    std::copy(src.row(i), src.row(i) + src.cols, dst.row(i) + c0);
  }
}

}  // namespace

template <typename T>
void DropoutMask<T>::apply(Matrix<T>& x, const DropoutState& dp) {
  used = dp.on();
  if (!used) return;
  mask.resize(x.rows, x.cols);
  const T keep_scale = T(1.0 / (1.0 - dp.rate));
  for (size_t i = 0; i < x.data.size(); ++i) {
    mask.data[i] = dp.rng->uniform() >= dp.rate ? keep_scale : T(0);
    x.data[i] *= mask.data[i];
  }
}

template <typename T>
void DropoutMask<T>::backward(Matrix<T>& dx) const {
  if (!used) return;
  for (size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= mask.data[i];
}

template <typename T>
void Linear<T>::init(ParamSet<T>& ps, const std::string& prefix, int in_dim,
                     int out_dim, bool bias) {
  w_ = ps.add(prefix + ".w", out_dim, in_dim);
  if (bias) b_ = ps.add(prefix + ".b", 1, out_dim);
}

template <typename T>
Matrix<T> Linear<T>::forward(const Matrix<T>& x) {
  x_ = x;
  Matrix<T> y(x.rows, w_->w.rows);
  kernels::matmul_nt(x, w_->w, y);
  if (b_ != nullptr) {
    for (int i = 0; i < y.rows; ++i) {
      const T* bias = b_->w.row(0);
      T* yi = y.row(i);
      for (int j = 0; j < y.cols; ++j) yi[j] += bias[j];
    }
  }
  return y;
}

template <typename T>
Matrix<T> Linear<T>::backward(const Matrix<T>& dy) {
  kernels::matmul_tn(dy, x_, w_->g, /*accumulate=*/true);
  if (b_ != nullptr) {
    T* db = b_->g.row(0);
    for (int i = 0; i < dy.rows; ++i) {
      const T* dyi = dy.row(i);
      for (int j = 0; j < dy.cols; ++j) db[j] += dyi[j];
    }
  }
  Matrix<T> dx(dy.rows, w_->w.cols);
  kernels::matmul_nn(dy, w_->w, dx);
  return dx;
}

template <typename T>
void LayerNorm<T>::init(ParamSet<T>& ps, const std::string& prefix, int dim) {
  gamma_ = ps.add(prefix + ".gamma", 1, dim);
  beta_ = ps.add(prefix + ".beta", 1, dim);
}

template <typename T>
Matrix<T> LayerNorm<T>::forward(const Matrix<T>& x) {
  x_ = x;
  Matrix<T> y(x.rows, x.cols);
  kernels::layer_norm_rows(x, gamma_->w.data, beta_->w.data, T(kEps), y, mean_,
                           rstd_);
  return y;
}

template <typename T>
Matrix<T> LayerNorm<T>::backward(const Matrix<T>& dy) {
  Matrix<T> dx(dy.rows, dy.cols);
  kernels::layer_norm_backward_rows(x_, gamma_->w.data, mean_, rstd_, dy, dx,
                                    gamma_->g.data, beta_->g.data);
  return dx;
}

template <typename T>
void MultiHeadAttention<T>::init(ParamSet<T>& ps, const std::string& prefix,
                                 int d, int heads) {
  d_ = d;
  heads_ = heads;
  dk_ = d / heads;
  wq_ = ps.add(prefix + ".wq", d, d);
  wk_ = ps.add(prefix + ".wk", d, d);
  wv_ = ps.add(prefix + ".wv", d, d);
  wo_ = ps.add(prefix + ".wo", d, d);
}

template <typename T>
Matrix<T> MultiHeadAttention<T>::forward(const Matrix<T>& q_in,
                                         const Matrix<T>& kv_in, bool causal,
                                         const CrossAttnExtras<T>* extras) {
  q_in_ = q_in;
  kv_in_ = kv_in;
  causal_ = causal;
  has_extras_ = extras != nullptr;
  if (has_extras_) extras_ = *extras;

  const int n_q = q_in.rows, n_k = kv_in.rows;
  Matrix<T> q(n_q, d_), k(n_k, d_), v(n_k, d_);
  kernels::matmul_nt(q_in, wq_->w, q);
  kernels::matmul_nt(kv_in, wk_->w, k);
  kernels::matmul_nt(kv_in, wv_->w, v);

  qh_.assign(heads_, {});
  kh_.assign(heads_, {});
  vh_.assign(heads_, {});
  a_.assign(heads_, {});
  concat_.resize(n_q, d_);

  const T inv_sqrt_dk = T(1) / std::sqrt(T(dk_));
  const T neg_inf = -std::numeric_limits<T>::infinity();

  for (int h = 0; h < heads_; ++h) {
    qh_[h] = slice_cols(q, h * dk_, dk_);
    kh_[h] = slice_cols(k, h * dk_, dk_);
    vh_[h] = slice_cols(v, h * dk_, dk_);
    if (has_extras_ && extras_.distances != nullptr) {
      // Shared distance embedding added in key space, same row per position
      // for every head.
      for (int j = 0; j < n_k; ++j) {
        const int dist = (*extras_.distances)[j];
        const T* drow = extras_.dist_table->w.row(dist);
        T* krow = kh_[h].row(j);
        for (int c = 0; c < dk_; ++c) krow[c] += drow[c];
      }
    }
    Matrix<T> s(n_q, n_k);
    kernels::matmul_nt(qh_[h], kh_[h], s);
    for (T& val : s.data) val *= inv_sqrt_dk;
    if (causal_) {
      for (int i = 0; i < n_q; ++i) {
        for (int j = i + 1; j < n_k; ++j) s.at(i, j) = neg_inf;
      }
    }
    if (has_extras_ && extras_.key_penalty != nullptr) {
      for (int i = 0; i < n_q; ++i) {
        for (int j = 0; j < n_k; ++j) s.at(i, j) += (*extras_.key_penalty)[j];
      }
    }
    kernels::softmax_rows(s);
    a_[h] = std::move(s);
    Matrix<T> oh(n_q, dk_);
    kernels::matmul_nn(a_[h], vh_[h], oh);
    write_cols(concat_, oh, h * dk_);
  }

  Matrix<T> out(n_q, d_);
  kernels::matmul_nt(concat_, wo_->w, out);
  return out;
}

template <typename T>
Matrix<T> MultiHeadAttention<T>::backward_impl(const Matrix<T>& dout,
                                               Matrix<T>& dkv) {
  const int n_q = q_in_.rows, n_k = kv_in_.rows;
  const T inv_sqrt_dk = T(1) / std::sqrt(T(dk_));

  kernels::matmul_tn(dout, concat_, wo_->g, /*accumulate=*/true);
  Matrix<T> dconcat(n_q, d_);
  kernels::matmul_nn(dout, wo_->w, dconcat);

  Matrix<T> dq(n_q, d_), dk(n_k, d_), dv(n_k, d_);
  for (int h = 0; h < heads_; ++h) {
    Matrix<T> doh = slice_cols(dconcat, h * dk_, dk_);
    Matrix<T> da(n_q, n_k);
    kernels::matmul_nt(doh, vh_[h], da);
    Matrix<T> dvh(n_k, dk_);
    kernels::matmul_tn(a_[h], doh, dvh);
    Matrix<T> ds(n_q, n_k);
    kernels::softmax_backward_rows(a_[h], da, ds);
    for (T& val : ds.data) val *= inv_sqrt_dk;
    Matrix<T> dqh(n_q, dk_);
    kernels::matmul_nn(ds, kh_[h], dqh);
    Matrix<T> dkh(n_k, dk_);
    kernels::matmul_tn(ds, qh_[h], dkh);
    if (has_extras_ && extras_.distances != nullptr) {
      for (int j = 0; j < n_k; ++j) {
        const int dist = (*extras_.distances)[j];
        T* grow = extras_.dist_table->g.row(dist);
        const T* dkrow = dkh.row(j);
        for (int c = 0; c < dk_; ++c) grow[c] += dkrow[c];
      }
    }
    write_cols(dq, dqh, h * dk_);
    write_cols(dk, dkh, h * dk_);
    write_cols(dv, dvh, h * dk_);
  }

  kernels::matmul_tn(dq, q_in_, wq_->g, /*accumulate=*/true);
  kernels::matmul_tn(dk, kv_in_, wk_->g, /*accumulate=*/true);
  kernels::matmul_tn(dv, kv_in_, wv_->g, /*accumulate=*/true);

  Matrix<T> dq_in(n_q, d_);
  kernels::matmul_nn(dq, wq_->w, dq_in);
  Matrix<T> tmp(n_k, d_);
  kernels::matmul_nn(dk, wk_->w, tmp);
  add_inplace(dkv, tmp);
  kernels::matmul_nn(dv, wv_->w, tmp);
  add_inplace(dkv, tmp);
  return dq_in;
}

template <typename T>
Matrix<T> MultiHeadAttention<T>::backward_self(const Matrix<T>& dout) {
  Matrix<T> dkv(kv_in_.rows, d_);
  Matrix<T> dq_in = backward_impl(dout, dkv);
  add_inplace(dq_in, dkv);
  return dq_in;
}

template <typename T>
Matrix<T> MultiHeadAttention<T>::backward_cross(const Matrix<T>& dout,
                                                Matrix<T>& dkv_accum) {
  Matrix<T> dkv(kv_in_.rows, d_);
  Matrix<T> dq_in = backward_impl(dout, dkv);
  add_inplace(dkv_accum, dkv);
  return dq_in;
}

template <typename T>
void FeedForward<T>::init(ParamSet<T>& ps, const std::string& prefix, int d,
                          int d_ff) {
  fc1_.init(ps, prefix + ".fc1", d, d_ff, /*bias=*/true);
  fc2_.init(ps, prefix + ".fc2", d_ff, d, /*bias=*/true);
}

template <typename T>
Matrix<T> FeedForward<T>::forward(const Matrix<T>& x) {
  z1_ = fc1_.forward(x);
  Matrix<T> a = z1_;
  for (T& v : a.data) v = v > T(0) ? v : T(0);
  return fc2_.forward(a);
}

template <typename T>
Matrix<T> FeedForward<T>::backward(const Matrix<T>& dy) {
  Matrix<T> da = fc2_.backward(dy);
  for (size_t i = 0; i < da.data.size(); ++i) {
    if (z1_.data[i] <= T(0)) da.data[i] = T(0);
  }
  return fc1_.backward(da);
}

template <typename T>
void ScalingModule<T>::init(ParamSet<T>& ps, int d, int d_s) {
  fc1_.init(ps, "scale.fc1", d, d_s, /*bias=*/true);
  fc2_.init(ps, "scale.fc2", d_s, d, /*bias=*/true);
}

template <typename T>
Matrix<T> ScalingModule<T>::forward(const Matrix<T>& h, Matrix<T>& gates) {
  h_ = h;
  z1_ = fc1_.forward(h);
  Matrix<T> a = z1_;
  for (T& v : a.data) v = v > T(0) ? v : T(0);
  Matrix<T> z2 = fc2_.forward(a);
  gates_.resize(h.rows, h.cols);
  // Clamp keeps the gates strictly inside (0, 1) even where the float
  // sigmoid saturates, so log(gate) terms stay finite.
  const T lo = T(1e-6), hi = T(1) - T(1e-6);
  for (size_t i = 0; i < z2.data.size(); ++i) {
    T s = T(1) / (T(1) + std::exp(-z2.data[i]));
    gates_.data[i] = std::min(hi, std::max(lo, s));
  }
  gates = gates_;
  Matrix<T> out(h.rows, h.cols);
  for (size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = h.data[i] * (T(2) * gates_.data[i]);
  }
  return out;
}

template <typename T>
Matrix<T> ScalingModule<T>::backward(const Matrix<T>& dout,
                                     const Matrix<T>& dgates_extra) {
  Matrix<T> dgates(gates_.rows, gates_.cols);
  for (size_t i = 0; i < dgates.data.size(); ++i) {
    dgates.data[i] = dout.data[i] * T(2) * h_.data[i];
    if (dgates_extra.size() > 0) dgates.data[i] += dgates_extra.data[i];
  }
  Matrix<T> dz2(gates_.rows, gates_.cols);
  for (size_t i = 0; i < dz2.data.size(); ++i) {
    const T g = gates_.data[i];
    dz2.data[i] = dgates.data[i] * g * (T(1) - g);
  }
  Matrix<T> da = fc2_.backward(dz2);
  for (size_t i = 0; i < da.data.size(); ++i) {
    if (z1_.data[i] <= T(0)) da.data[i] = T(0);
  }
  Matrix<T> dh = fc1_.backward(da);
  for (size_t i = 0; i < dh.data.size(); ++i) {
    dh.data[i] += dout.data[i] * T(2) * gates_.data[i];
  }
  return dh;
}

template <typename T>
void EncoderLayer<T>::init(ParamSet<T>& ps, const std::string& prefix, int d,
                           int heads, int d_ff) {
  ln1_.init(ps, prefix + ".ln1", d);
  attn_.init(ps, prefix + ".attn", d, heads);
  ln2_.init(ps, prefix + ".ln2", d);
  ffn_.init(ps, prefix + ".ffn", d, d_ff);
}

template <typename T>
Matrix<T> EncoderLayer<T>::forward(const Matrix<T>& x, const DropoutState& dp) {
  Matrix<T> norm1 = ln1_.forward(x);
  Matrix<T> a = attn_.forward(norm1, norm1, false, nullptr);
  drop1_.apply(a, dp);
  Matrix<T> x1 = x;
  add_inplace(x1, a);
  Matrix<T> f = ffn_.forward(ln2_.forward(x1));
  drop2_.apply(f, dp);
  add_inplace(f, x1);
  return f;
}

template <typename T>
Matrix<T> EncoderLayer<T>::backward(const Matrix<T>& dout) {
  Matrix<T> df = dout;
  drop2_.backward(df);
  Matrix<T> dx1 = ln2_.backward(ffn_.backward(df));
  add_inplace(dx1, dout);
  Matrix<T> da = dx1;
  drop1_.backward(da);
  Matrix<T> dx = ln1_.backward(attn_.backward_self(da));
  add_inplace(dx, dx1);
  return dx;
}

template <typename T>
Matrix<T> DecoderLayer<T>::forward(const Matrix<T>& y, const Matrix<T>& enc,
                                   const CrossAttnExtras<T>* extras,
                                   const DropoutState& dp) {
  Matrix<T> norm1 = ln1_.forward(y);
  Matrix<T> sa = self_.forward(norm1, norm1, /*causal=*/true, nullptr);
  drop1_.apply(sa, dp);
  Matrix<T> y1 = y;
  add_inplace(y1, sa);

  Matrix<T> ca = cross_.forward(ln2_.forward(y1), enc, false, extras);
  drop2_.apply(ca, dp);
  Matrix<T> y2 = y1;
  add_inplace(y2, ca);

  Matrix<T> f = ffn_.forward(ln3_.forward(y2));
  drop3_.apply(f, dp);
  add_inplace(f, y2);
  return f;
}

template <typename T>
Matrix<T> DecoderLayer<T>::backward(const Matrix<T>& dout,
                                    Matrix<T>& denc_accum) {
  Matrix<T> df = dout;
  drop3_.backward(df);
  Matrix<T> dy2 = ln3_.backward(ffn_.backward(df));
  add_inplace(dy2, dout);

  Matrix<T> dca = dy2;
  drop2_.backward(dca);
  Matrix<T> dy1 = ln2_.backward(cross_.backward_cross(dca, denc_accum));
  add_inplace(dy1, dy2);

  Matrix<T> dsa = dy1;
  drop1_.backward(dsa);
  Matrix<T> dy = ln1_.backward(self_.backward_self(dsa));
  add_inplace(dy, dy1);
  return dy;
}

template <typename T>
void DecoderLayer<T>::init(ParamSet<T>& ps, const std::string& prefix, int d,
                           int heads, int d_ff) {
  ln1_.init(ps, prefix + ".ln1", d);
  self_.init(ps, prefix + ".self", d, heads);
  ln2_.init(ps, prefix + ".ln2", d);
  cross_.init(ps, prefix + ".cross", d, heads);
  ln3_.init(ps, prefix + ".ln3", d);
  ffn_.init(ps, prefix + ".ffn", d, d_ff);
}

#define PROTOGEN_INSTANTIATE_LAYERS(T) \
  template struct DropoutMask<T>;      \
  template class Linear<T>;            \
  template class LayerNorm<T>;         \
  template class MultiHeadAttention<T>;\
  template class FeedForward<T>;       \
  template class ScalingModule<T>;     \
  template class EncoderLayer<T>;      \
  template class DecoderLayer<T>;

PROTOGEN_INSTANTIATE_LAYERS(float)
PROTOGEN_INSTANTIATE_LAYERS(double)
#undef PROTOGEN_INSTANTIATE_LAYERS

}  // namespace protogen
