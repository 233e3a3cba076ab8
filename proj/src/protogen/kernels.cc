// protogen/kernels.cc
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

#include "protogen/kernels.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace protogen::kernels {

namespace {

void check_shapes(int ar, int ac, int br, int bc, int outr, int outc,
                  const char* op) {
  if (ac != br || outr != ar || outc != bc) {
    throw std::invalid_argument(std::string("shape mismatch in ") + op);
  }
}

}  // namespace

template <typename T>
void matmul_nn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out,
               bool accumulate) {
  check_shapes(a.rows, a.cols, b.rows, b.cols, out.rows, out.cols, "matmul_nn");
  const int m = a.rows, k = a.cols, n = b.cols;
#pragma omp parallel for schedule(static) if (m > 1 && size_t(m) * k * n >= (1 << 20))
  for (int i = 0; i < m; ++i) {
    const T* ai = a.row(i);
    T* oi = out.row(i);
    if (!accumulate) std::fill(oi, oi + n, T(0));
    for (int p = 0; p < k; ++p) {
      const T av = ai[p];
      const T* bp = b.row(p);
      for (int j = 0; j < n; ++j) oi[j] += av * bp[j];
    }
  }
}

template <typename T>
void matmul_nt(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out,
               bool accumulate) {
  check_shapes(a.rows, a.cols, b.cols, b.rows, out.rows, out.cols, "matmul_nt");
  const int m = a.rows, k = a.cols, n = b.rows;
#pragma omp parallel for schedule(static) if (m > 1 && size_t(m) * k * n >= (1 << 20))
  for (int i = 0; i < m; ++i) {
    const T* ai = a.row(i);
    T* oi = out.row(i);
    for (int j = 0; j < n; ++j) {
      const T* bj = b.row(j);
      T acc = accumulate ? oi[j] : T(0);
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      oi[j] = acc;
    }
  }
}

template <typename T>
void matmul_tn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out,
               bool accumulate) {
  check_shapes(a.cols, a.rows, b.rows, b.cols, out.rows, out.cols, "matmul_tn");
  const int m = a.cols, k = a.rows, n = b.cols;
#pragma omp parallel for schedule(static) if (m > 1 && size_t(m) * k * n >= (1 << 20))
  for (int i = 0; i < m; ++i) {
    T* oi = out.row(i);
    if (!accumulate) std::fill(oi, oi + n, T(0));
    for (int p = 0; p < k; ++p) {
      const T av = a.at(p, i);
      const T* bp = b.row(p);
      for (int j = 0; j < n; ++j) oi[j] += av * bp[j];
    }
  }
}

template <typename T>
void softmax_rows(Matrix<T>& s) {
  const int m = s.rows, n = s.cols;
#pragma omp parallel for schedule(static) if (m > 1 && size_t(m) * n >= (1 << 18))
  for (int i = 0; i < m; ++i) {
    T* row = s.row(i);
    T mx = row[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, row[j]);
    T sum = T(0);
    for (int j = 0; j < n; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    const T inv = T(1) / sum;
    for (int j = 0; j < n; ++j) row[j] *= inv;
  }
}

template <typename T>
void softmax_backward_rows(const Matrix<T>& a, const Matrix<T>& da,
                           Matrix<T>& ds) {
  const int m = a.rows, n = a.cols;
#pragma omp parallel for schedule(static) if (m > 1 && size_t(m) * n >= (1 << 18))
  for (int i = 0; i < m; ++i) {
    const T* ai = a.row(i);
    const T* dai = da.row(i);
    T* dsi = ds.row(i);
    T dot = T(0);
    for (int j = 0; j < n; ++j) dot += ai[j] * dai[j];
    for (int j = 0; j < n; ++j) dsi[j] = ai[j] * (dai[j] - dot);
  }
}

template <typename T>
void layer_norm_rows(const Matrix<T>& x, const std::vector<T>& gamma,
                     const std::vector<T>& beta, T eps, Matrix<T>& y,
                     std::vector<T>& mean, std::vector<T>& rstd) {
  const int m = x.rows, n = x.cols;
  mean.resize(m);
  rstd.resize(m);
#pragma omp parallel for schedule(static) if (m > 1 && size_t(m) * n >= (1 << 18))
  for (int i = 0; i < m; ++i) {
    const T* xi = x.row(i);
    T* yi = y.row(i);
    T mu = T(0);
    for (int j = 0; j < n; ++j) mu += xi[j];
    mu /= T(n);
    T var = T(0);
    for (int j = 0; j < n; ++j) var += (xi[j] - mu) * (xi[j] - mu);
    var /= T(n);
    const T rs = T(1) / std::sqrt(var + eps);
    for (int j = 0; j < n; ++j) yi[j] = gamma[j] * (xi[j] - mu) * rs + beta[j];
    mean[i] = mu;
    rstd[i] = rs;
  }
}

template <typename T>
void layer_norm_backward_rows(const Matrix<T>& x, const std::vector<T>& gamma,
                              const std::vector<T>& mean,
                              const std::vector<T>& rstd, const Matrix<T>& dy,
                              Matrix<T>& dx, std::vector<T>& dgamma,
                              std::vector<T>& dbeta) {
  const int m = x.rows, n = x.cols;
  // Parameter gradients accumulate in fixed row order for determinism.
  for (int i = 0; i < m; ++i) {
    const T* xi = x.row(i);
    const T* dyi = dy.row(i);
    for (int j = 0; j < n; ++j) {
      const T xhat = (xi[j] - mean[i]) * rstd[i];
      dgamma[j] += dyi[j] * xhat;
      dbeta[j] += dyi[j];
    }
  }
#pragma omp parallel for schedule(static) if (m > 1 && size_t(m) * n >= (1 << 18))
  for (int i = 0; i < m; ++i) {
    const T* xi = x.row(i);
    const T* dyi = dy.row(i);
    T* dxi = dx.row(i);
    T sum_g = T(0), sum_gx = T(0);
    for (int j = 0; j < n; ++j) {
      const T xhat = (xi[j] - mean[i]) * rstd[i];
      const T g = dyi[j] * gamma[j];
      sum_g += g;
      sum_gx += g * xhat;
    }
    for (int j = 0; j < n; ++j) {
      const T xhat = (xi[j] - mean[i]) * rstd[i];
      const T g = dyi[j] * gamma[j];
      dxi[j] = (g - (sum_g + xhat * sum_gx) / T(n)) * rstd[i];
    }
  }
}

namespace ref {

template <typename T>
void matmul_nn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out,
               bool accumulate) {
  check_shapes(a.rows, a.cols, b.rows, b.cols, out.rows, out.cols,
               "ref::matmul_nn");
  for (int i = 0; i < a.rows; ++i) {
    T* oi = out.row(i);
    if (!accumulate) std::fill(oi, oi + out.cols, T(0));
    for (int p = 0; p < a.cols; ++p) {
      const T av = a.at(i, p);
      const T* bp = b.row(p);
      for (int j = 0; j < b.cols; ++j) oi[j] += av * bp[j];
    }
  }
}

template <typename T>
void matmul_nt(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out,
               bool accumulate) {
  check_shapes(a.rows, a.cols, b.cols, b.rows, out.rows, out.cols,
               "ref::matmul_nt");
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < b.rows; ++j) {
      T acc = accumulate ? out.at(i, j) : T(0);
      for (int p = 0; p < a.cols; ++p) acc += a.at(i, p) * b.at(j, p);
      out.at(i, j) = acc;
    }
  }
}

template <typename T>
void matmul_tn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out,
               bool accumulate) {
  check_shapes(a.cols, a.rows, b.rows, b.cols, out.rows, out.cols,
               "ref::matmul_tn");
  for (int i = 0; i < a.cols; ++i) {
    T* oi = out.row(i);
    if (!accumulate) std::fill(oi, oi + out.cols, T(0));
    for (int p = 0; p < a.rows; ++p) {
      const T av = a.at(p, i);
      const T* bp = b.row(p);
      for (int j = 0; j < b.cols; ++j) oi[j] += av * bp[j];
    }
  }
}

template <typename T>
void softmax_rows(Matrix<T>& s) {
  for (int i = 0; i < s.rows; ++i) {
    T* row = s.row(i);
    T mx = row[0];
    for (int j = 1; j < s.cols; ++j) mx = std::max(mx, row[j]);
    T sum = T(0);
    for (int j = 0; j < s.cols; ++j) {
      row[j] = std::exp(row[j] - mx);
      sum += row[j];
    }
    const T inv = T(1) / sum;
    for (int j = 0; j < s.cols; ++j) row[j] *= inv;
  }
}

template <typename T>
void layer_norm_rows(const Matrix<T>& x, const std::vector<T>& gamma,
                     const std::vector<T>& beta, T eps, Matrix<T>& y,
                     std::vector<T>& mean, std::vector<T>& rstd) {
  const int n = x.cols;
  mean.resize(x.rows);
  rstd.resize(x.rows);
  for (int i = 0; i < x.rows; ++i) {
    const T* xi = x.row(i);
    T* yi = y.row(i);
    T mu = T(0);
    for (int j = 0; j < n; ++j) mu += xi[j];
    mu /= T(n);
    T var = T(0);
    for (int j = 0; j < n; ++j) var += (xi[j] - mu) * (xi[j] - mu);
    var /= T(n);
    const T rs = T(1) / std::sqrt(var + eps);
    for (int j = 0; j < n; ++j) yi[j] = gamma[j] * (xi[j] - mu) * rs + beta[j];
    mean[i] = mu;
    rstd[i] = rs;
  }
}

}  // namespace ref

// clang-format off
#define PROTOGEN_INSTANTIATE(T)                                              \
  template void matmul_nn<T>(const Matrix<T>&, const Matrix<T>&, Matrix<T>&, bool); \
  template void matmul_nt<T>(const Matrix<T>&, const Matrix<T>&, Matrix<T>&, bool); \
  template void matmul_tn<T>(const Matrix<T>&, const Matrix<T>&, Matrix<T>&, bool); \
  template void softmax_rows<T>(Matrix<T>&);                                 \
  template void softmax_backward_rows<T>(const Matrix<T>&, const Matrix<T>&, Matrix<T>&); \
  template void layer_norm_rows<T>(const Matrix<T>&, const std::vector<T>&,  \
                                   const std::vector<T>&, T, Matrix<T>&,     \
                                   std::vector<T>&, std::vector<T>&);        \
  template void layer_norm_backward_rows<T>(                                 \
      const Matrix<T>&, const std::vector<T>&, const std::vector<T>&,        \
      const std::vector<T>&, const Matrix<T>&, Matrix<T>&, std::vector<T>&,  \
      std::vector<T>&);                                                      \
  template void ref::matmul_nn<T>(const Matrix<T>&, const Matrix<T>&, Matrix<T>&, bool); \
  template void ref::matmul_nt<T>(const Matrix<T>&, const Matrix<T>&, Matrix<T>&, bool); \
  template void ref::matmul_tn<T>(const Matrix<T>&, const Matrix<T>&, Matrix<T>&, bool); \
  template void ref::softmax_rows<T>(Matrix<T>&);                            \
  template void ref::layer_norm_rows<T>(const Matrix<T>&, const std::vector<T>&, \
                                        const std::vector<T>&, T, Matrix<T>&, \
                                        std::vector<T>&, std::vector<T>&);
// clang-format on

PROTOGEN_INSTANTIATE(float)
PROTOGEN_INSTANTIATE(double)
#undef PROTOGEN_INSTANTIATE

}  // namespace protogen::kernels
