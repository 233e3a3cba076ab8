// protogen/beam.cc
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

#include "protogen/beam.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace protogen {

namespace {

std::vector<double> log_softmax(const std::vector<float>& logits) {
  double mx = -std::numeric_limits<double>::infinity();
  for (float v : logits) mx = std::max(mx, double(v));
  double z = 0.0;
  for (float v : logits) z += std::exp(double(v) - mx);
  const double log_z = std::log(z) + mx;
  std::vector<double> out(logits.size());
  for (size_t i = 0; i < logits.size(); ++i) out[i] = double(logits[i]) - log_z;
  return out;
}

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.ids < b.ids;
}

std::vector<int> content_ids(const Hypothesis& h) {
  std::vector<int> out;
  for (size_t i = 1; i < h.ids.size(); ++i) {
    if (h.ids[i] == kEosId) break;
    out.push_back(h.ids[i]);
  }
  return out;
}

}  // namespace

std::vector<int> beam_search(const StepLogitsFn& step_logits, int vocab_size,
                             const BeamConfig& cfg) {
  if (cfg.beam_size < 1) throw std::invalid_argument("beam size must be >= 1");
  if (cfg.max_len < 1) throw std::invalid_argument("max_len must be >= 1");

  std::vector<Hypothesis> beam = {Hypothesis{{kBosId}, 0.0, false}};
  for (int step = 0; step < cfg.max_len; ++step) {
    bool any_live = false;
    std::vector<Hypothesis> candidates;
    for (const Hypothesis& hyp : beam) {
      if (hyp.finished) {
        candidates.push_back(hyp);
        continue;
      }
      any_live = true;
      std::vector<double> logp = log_softmax(step_logits(hyp.ids));
      if (static_cast<int>(logp.size()) != vocab_size) {
        throw std::runtime_error("step function returned wrong vocab size");
      }
      logp[kPadId] = -std::numeric_limits<double>::infinity();
      logp[kBosId] = -std::numeric_limits<double>::infinity();

      std::vector<int> order(vocab_size);
      for (int i = 0; i < vocab_size; ++i) order[i] = i;
      const int expand = std::min(cfg.beam_size, vocab_size);
      std::partial_sort(order.begin(), order.begin() + expand, order.end(),
                        [&](int a, int b) {
                          if (logp[a] != logp[b]) return logp[a] > logp[b];
                          return a < b;
                        });
      for (int e = 0; e < expand; ++e) {
        const int tok = order[e];
        if (std::isinf(logp[tok])) continue;
        Hypothesis next = hyp;
        next.ids.push_back(tok);
        next.log_prob += logp[tok];
        next.finished = tok == kEosId;
        candidates.push_back(std::move(next));
      }
    }
    if (!any_live) break;
    std::sort(candidates.begin(), candidates.end(), better);
    if (static_cast<int>(candidates.size()) > cfg.beam_size) {
      candidates.resize(cfg.beam_size);
    }
    beam = std::move(candidates);
  }

  const Hypothesis* best_finished = nullptr;
  const Hypothesis* best_any = nullptr;
  for (const Hypothesis& hyp : beam) {
    if (best_any == nullptr || better(hyp, *best_any)) best_any = &hyp;
    if (hyp.finished &&
        (best_finished == nullptr || better(hyp, *best_finished))) {
      best_finished = &hyp;
    }
  }
  const Hypothesis* chosen = best_finished != nullptr ? best_finished : best_any;
  return content_ids(*chosen);
}

std::vector<std::string> generate_tokens(Model<float>& model,
                                         const EncodedInput& src,
                                         const Vocabulary& vocab,
                                         const AblationFlags& flags,
                                         const BeamConfig& cfg) {
  if (src.n_concepts < 1) throw std::invalid_argument("empty concept set");
  BeamConfig bounded = cfg;
  bounded.max_len = std::min(cfg.max_len, model.config().p_max - 1);
  auto step = [&](const std::vector<int>& prefix) {
    const Matrix<float>& logits = model.forward(src, prefix, flags);
    const float* last = logits.row(logits.rows - 1);
    return std::vector<float>(last, last + logits.cols);
  };
  std::vector<int> ids = beam_search(step, model.config().vocab, bounded);
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (int id : ids) out.push_back(vocab.surface(id));
  return out;
}

}  // namespace protogen
