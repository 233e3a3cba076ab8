// protogen/kernels.h
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

#ifndef PROTOGEN_KERNELS_H_
#define PROTOGEN_KERNELS_H_

#include <vector>

#include "protogen/tensor.h"

// Dense kernels behind every forward/backward pass. The OpenMP versions
// parallelize over output rows only; each output element keeps the serial
// accumulation order, so results are bit-identical to kernels::ref at any
// thread count.

namespace protogen::kernels {

// out = a * b           (a: m x k, b: k x n, out: m x n)
template <typename T>
void matmul_nn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out,
               bool accumulate = false);

// out = a * b^T         (a: m x k, b: n x k, out: m x n)
template <typename T>
void matmul_nt(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out,
               bool accumulate = false);

// out = a^T * b         (a: k x m, b: k x n, out: m x n)
template <typename T>
void matmul_tn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out,
               bool accumulate = false);

// Row-wise softmax in place, with max subtraction.
template <typename T>
void softmax_rows(Matrix<T>& s);

// ds = a .* (da - rowsum(da .* a)) given a = softmax(s) row-wise.
template <typename T>
void softmax_backward_rows(const Matrix<T>& a, const Matrix<T>& da,
                           Matrix<T>& ds);

// y = gamma .* (x - mean) * rstd + beta per row; mean/rstd cached per row.
template <typename T>
void layer_norm_rows(const Matrix<T>& x, const std::vector<T>& gamma,
                     const std::vector<T>& beta, T eps, Matrix<T>& y,
                     std::vector<T>& mean, std::vector<T>& rstd);

template <typename T>
void layer_norm_backward_rows(const Matrix<T>& x, const std::vector<T>& gamma,
                              const std::vector<T>& mean,
                              const std::vector<T>& rstd, const Matrix<T>& dy,
                              Matrix<T>& dx, std::vector<T>& dgamma,
                              std::vector<T>& dbeta);

namespace ref {

// Serial reference implementations kept for testing and benchmarking.
template <typename T>
void matmul_nn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out,
               bool accumulate = false);
template <typename T>
void matmul_nt(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out,
               bool accumulate = false);
template <typename T>
void matmul_tn(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out,
               bool accumulate = false);
template <typename T>
void softmax_rows(Matrix<T>& s);
template <typename T>
void layer_norm_rows(const Matrix<T>& x, const std::vector<T>& gamma,
                     const std::vector<T>& beta, T eps, Matrix<T>& y,
                     std::vector<T>& mean, std::vector<T>& rstd);

}  // namespace ref

}  // namespace protogen::kernels

#endif  // PROTOGEN_KERNELS_H_
