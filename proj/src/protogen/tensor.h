// protogen/tensor.h
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

#ifndef PROTOGEN_TENSOR_H_
#define PROTOGEN_TENSOR_H_

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace protogen {

// Dense row-major matrix. Vectors are 1 x n matrices.
template <typename T>
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(size_t(r) * size_t(c), T(0)) {}

  T* row(int i) { return data.data() + size_t(i) * cols; }
  const T* row(int i) const { return data.data() + size_t(i) * cols; }
  T& at(int i, int j) { return data[size_t(i) * cols + j]; }
  const T& at(int i, int j) const { return data[size_t(i) * cols + j]; }

  size_t size() const { return data.size(); }
  void fill(T v) { data.assign(data.size(), v); }
  void resize(int r, int c) {
    rows = r;
    cols = c;
    data.assign(size_t(r) * size_t(c), T(0));
  }

  bool all_finite() const {
    for (T v : data) {
      if (!std::isfinite(double(v))) return false;
    }
    return true;
  }
};

template <typename T>
void check_finite(const Matrix<T>& m, const char* what) {
  if (!m.all_finite()) {
    throw std::runtime_error(std::string("non-finite values in ") + what);
  }
}

}  // namespace protogen

#endif  // PROTOGEN_TENSOR_H_
