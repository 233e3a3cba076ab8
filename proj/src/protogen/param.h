// protogen/param.h
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

#ifndef PROTOGEN_PARAM_H_
#define PROTOGEN_PARAM_H_

#include <deque>
#include <stdexcept>
#include <string>
#include <vector>

#include "protogen/tensor.h"

namespace protogen {

// One named trainable array with its gradient.
template <typename T>
struct Param {
  std::string name;
  Matrix<T> w;
  Matrix<T> g;

  size_t size() const { return w.size(); }
};

// Owns every trainable array of a model in a stable registration order.
// That order is the canonical one for checkpoints and optimizer state.
template <typename T>
class ParamSet {
 public:
  Param<T>* add(const std::string& name, int rows, int cols) {
    owned_.emplace_back();
    Param<T>& p = owned_.back();
    p.name = name;
    p.w.resize(rows, cols);
    p.g.resize(rows, cols);
    order_.push_back(&p);
    return &p;
  }

  Param<T>* find(const std::string& name) {
    for (Param<T>* p : order_) {
      if (p->name == name) return p;
    }
    return nullptr;
  }

  const std::vector<Param<T>*>& all() { return order_; }
  const std::vector<Param<T>*>& all() const { return order_; }

  void zero_grads() {
    for (Param<T>* p : order_) p->g.fill(T(0));
  }

  size_t total_size() const {
    size_t n = 0;
    for (const Param<T>* p : order_) n += p->size();
    return n;
  }

  // First array holding a non-finite weight or gradient, empty when clean.
  std::string first_non_finite() const {
    for (const Param<T>* p : order_) {
      if (!p->w.all_finite() || !p->g.all_finite()) return p->name;
    }
    return {};
  }

 private:
  std::deque<Param<T>> owned_;  // deque: stable addresses
  std::vector<Param<T>*> order_;
};

}  // namespace protogen

#endif  // PROTOGEN_PARAM_H_
