// tools/bench.cc
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

// Times the OpenMP kernels against the serial reference implementations and
// verifies that both produce bit-identical results.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "protogen/kernels.h"
#include "protogen/rng.h"
#include "protogen/tensor.h"

namespace {

using protogen::Matrix;
using protogen::Rng;

Matrix<float> random_matrix(int r, int c, Rng& rng) {
  Matrix<float> m(r, c);
  for (float& v : m.data) v = float(rng.normal());
  return m;
}

double time_ms(const std::function<void()>& fn, int iters) {
  fn();  // warmup
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < iters; ++i) fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count() /
         double(iters);
}

bool bit_equal(const Matrix<float>& a, const Matrix<float>& b) {
  return a.rows == b.rows && a.cols == b.cols &&
         std::memcmp(a.data.data(), b.data.data(),
                     a.data.size() * sizeof(float)) == 0;
}

void bench_size(int n, int iters) {
  Rng rng(42);
  Matrix<float> a = random_matrix(n, n, rng);
  Matrix<float> b = random_matrix(n, n, rng);
  Matrix<float> out_par(n, n), out_ref(n, n);

  const double t_par = time_ms(
      [&] { protogen::kernels::matmul_nt(a, b, out_par); }, iters);
  const double t_ref = time_ms(
      [&] { protogen::kernels::ref::matmul_nt(a, b, out_ref); }, iters);
  const bool ok_mm = bit_equal(out_par, out_ref);

  Matrix<float> s_par = random_matrix(n, n, rng);
  Matrix<float> s_ref = s_par;
  const double sm_par =
      time_ms([&] { Matrix<float> t = s_par; protogen::kernels::softmax_rows(t); },
              iters);
  const double sm_ref = time_ms(
      [&] { Matrix<float> t = s_ref; protogen::kernels::ref::softmax_rows(t); },
      iters);
  Matrix<float> v_par = s_par, v_ref = s_ref;
  protogen::kernels::softmax_rows(v_par);
  protogen::kernels::ref::softmax_rows(v_ref);
  const bool ok_sm = bit_equal(v_par, v_ref);

  std::printf(
      "n=%4d  matmul_nt omp %8.3f ms  ref %8.3f ms  x%.2f %s   softmax omp "
      "%7.3f ms  ref %7.3f ms  x%.2f %s\n",
      n, t_par, t_ref, t_ref / t_par, ok_mm ? "(bit-equal)" : "(MISMATCH!)",
      sm_par, sm_ref, sm_ref / sm_par, ok_sm ? "(bit-equal)" : "(MISMATCH!)");
}

}  // namespace

int main(int argc, char** argv) {
  int iters = 5;
  if (argc > 1) iters = std::atoi(argv[1]);
#ifdef _OPENMP
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both paths run serially\n");
#endif
  for (int n : {64, 128, 256, 512}) bench_size(n, iters);
  return 0;
}
