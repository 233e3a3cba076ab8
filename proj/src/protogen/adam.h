// protogen/adam.h
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

#ifndef PROTOGEN_ADAM_H_
#define PROTOGEN_ADAM_H_

#include <vector>

#include "protogen/param.h"

namespace protogen {

// Adam with bias correction. Zero gradients leave parameters untouched
// because both moments stay exactly zero.
template <typename T>
class Adam {
 public:
  Adam(double beta1, double beta2, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamSet<T>& params, double lr);

  long steps_taken() const { return t_; }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<std::vector<T>> m_, v_;
};

}  // namespace protogen

#endif  // PROTOGEN_ADAM_H_
