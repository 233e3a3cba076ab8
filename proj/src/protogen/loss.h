// protogen/loss.h
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

#ifndef PROTOGEN_LOSS_H_
#define PROTOGEN_LOSS_H_

#include <cstdint>
#include <vector>

#include "protogen/tensor.h"

namespace protogen {

struct LossSum {
  double sum = 0.0;       // loss summed over counted positions
  long positions = 0;     // positions that contributed
};

// Label-smoothed cross-entropy summed over non-PAD positions. The smoothed
// target puts 1 - eps on the gold id and eps / (V - 1) elsewhere. When
// dlogits is non-null it receives (p - q) * grad_scale per counted row.
template <typename T>
LossSum label_smoothed_ce_sum(const Matrix<T>& logits,
                              const std::vector<int>& labels, double eps,
                              Matrix<T>* dlogits, T grad_scale);

// Mean label-smoothed cross-entropy over one instance (the generation loss);
// 0 when every position is PAD.
template <typename T>
double loss_decoder(const Matrix<T>& logits, const std::vector<int>& labels,
                    double eps);

// Encoder classification loss: binary cross-entropy on the per-position gate
// mean against "this input token concept-matches some target token", summed
// over all input positions. When dgates is non-null it receives
// d(loss)/d(gate) * grad_scale.
template <typename T>
LossSum encoder_class_loss(const Matrix<T>& gates,
                           const std::vector<uint8_t>& in_target,
                           Matrix<T>* dgates, T grad_scale);

// L = L_D + lambda * L_E.
double total_loss(double l_d, double l_e, double lambda);

// Linear warmup to base_lr, then inverse-sqrt decay. step >= 1.
double lr_schedule(long step, double base_lr, long warmup);

}  // namespace protogen

#endif  // PROTOGEN_LOSS_H_
