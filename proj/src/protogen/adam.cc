// protogen/adam.cc
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

#include "protogen/adam.h"

#include <cmath>

namespace protogen {

template <typename T>
void Adam<T>::step(ParamSet<T>& params, double lr) {
  const auto& all = params.all();
  if (m_.empty()) {
    m_.resize(all.size());
    v_.resize(all.size());
    for (size_t i = 0; i < all.size(); ++i) {
      m_[i].assign(all[i]->size(), T(0));
      v_[i].assign(all[i]->size(), T(0));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, double(t_));
  const double bc2 = 1.0 - std::pow(beta2_, double(t_));
  for (size_t i = 0; i < all.size(); ++i) {
    Param<T>* p = all[i];
    T* w = p->w.data.data();
    const T* g = p->g.data.data();
    T* m = m_[i].data();
    T* v = v_[i].data();
    const long n = static_cast<long>(p->size());
#pragma omp parallel for schedule(static) if (n > 4096)
    for (long j = 0; j < n; ++j) {
      m[j] = T(beta1_) * m[j] + T(1.0 - beta1_) * g[j];
      v[j] = T(beta2_) * v[j] + T(1.0 - beta2_) * g[j] * g[j];
      const double mhat = double(m[j]) / bc1;
      const double vhat = double(v[j]) / bc2;
      w[j] -= T(lr * mhat / (std::sqrt(vhat) + eps_));
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace protogen
