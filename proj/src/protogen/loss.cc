// protogen/loss.cc
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

#include "protogen/loss.h"

#include <cmath>
#include <stdexcept>

#include "protogen/text.h"

namespace protogen {

template <typename T>
LossSum label_smoothed_ce_sum(const Matrix<T>& logits,
                              const std::vector<int>& labels, double eps,
                              Matrix<T>* dlogits, T grad_scale) {
  if (static_cast<int>(labels.size()) != logits.rows) {
    throw std::invalid_argument("labels/logits row mismatch");
  }
  if (eps < 0.0 || eps >= 1.0) throw std::invalid_argument("eps outside [0,1)");
  const int v = logits.cols;
  const double off = eps / double(v - 1);
  LossSum out;
  for (int i = 0; i < logits.rows; ++i) {
    const int gold = labels[i];
    if (gold == kPadId) continue;
    if (gold < 0 || gold >= v) {
      throw std::invalid_argument("gold id outside vocabulary");
    }
    const T* row = logits.row(i);
    // log-softmax in double for stability.
    double mx = row[0];
    for (int j = 1; j < v; ++j) mx = std::max(mx, double(row[j]));
    double z = 0.0;
    for (int j = 0; j < v; ++j) z += std::exp(double(row[j]) - mx);
    const double log_z = std::log(z) + mx;
    double loss = 0.0;
    for (int j = 0; j < v; ++j) {
      const double q = j == gold ? 1.0 - eps : off;
      const double logp = double(row[j]) - log_z;
      loss -= q * logp;
      if (dlogits != nullptr) {
        const double p = std::exp(logp);
        dlogits->at(i, j) += T((p - q)) * grad_scale;
      }
    }
    out.sum += loss;
    out.positions += 1;
  }
  return out;
}

template <typename T>
double loss_decoder(const Matrix<T>& logits, const std::vector<int>& labels,
                    double eps) {
  LossSum s = label_smoothed_ce_sum<T>(logits, labels, eps, nullptr, T(0));
  return s.positions == 0 ? 0.0 : s.sum / double(s.positions);
}

template <typename T>
LossSum encoder_class_loss(const Matrix<T>& gates,
                           const std::vector<uint8_t>& in_target,
                           Matrix<T>* dgates, T grad_scale) {
  if (static_cast<int>(in_target.size()) != gates.rows) {
    throw std::invalid_argument("gate rows must match input length");
  }
  const int d = gates.cols;
  LossSum out;
  for (int i = 0; i < gates.rows; ++i) {
    const T* row = gates.row(i);
    double mean = 0.0;
    for (int j = 0; j < d; ++j) mean += double(row[j]);
    mean /= double(d);
    const bool positive = in_target[i] != 0;
    out.sum += positive ? -std::log(mean) : -std::log(1.0 - mean);
    out.positions += 1;
    if (dgates != nullptr) {
      const double dmean =
          positive ? -1.0 / mean : 1.0 / (1.0 - mean);
      const T per_channel = T(dmean / double(d)) * grad_scale;
      for (int j = 0; j < d; ++j) dgates->at(i, j) += per_channel;
    }
  }
  return out;
}

double total_loss(double l_d, double l_e, double lambda) {
  return l_d + lambda * l_e;
}

double lr_schedule(long step, double base_lr, long warmup) {
  if (step < 1) throw std::invalid_argument("step must be >= 1");
  if (warmup < 1) return base_lr * std::sqrt(1.0 / double(step));
  if (step <= warmup) return base_lr * double(step) / double(warmup);
  return base_lr * std::sqrt(double(warmup) / double(step));
}

#define PROTOGEN_INSTANTIATE_LOSS(T)                                     \
  template LossSum label_smoothed_ce_sum<T>(                             \
      const Matrix<T>&, const std::vector<int>&, double, Matrix<T>*, T); \
  template double loss_decoder<T>(const Matrix<T>&,                      \
                                  const std::vector<int>&, double);      \
  template LossSum encoder_class_loss<T>(const Matrix<T>&,               \
                                         const std::vector<uint8_t>&,    \
                                         Matrix<T>*, T);

PROTOGEN_INSTANTIATE_LOSS(float)
PROTOGEN_INSTANTIATE_LOSS(double)
#undef PROTOGEN_INSTANTIATE_LOSS

}  // namespace protogen
