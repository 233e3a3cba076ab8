// protogen/trainer.h
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

#ifndef PROTOGEN_TRAINER_H_
#define PROTOGEN_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "protogen/adam.h"
#include "protogen/index.h"
#include "protogen/model.h"
#include "protogen/rng.h"
#include "protogen/text.h"

namespace protogen {

struct TrainConfig {
  double lambda_loss = 1.0;      // weight on the encoder classification loss
  double label_smoothing = 0.1;
  double base_lr = 4e-5;
  long warmup = 500;
  long max_updates = 5000;
  long max_tokens = 1024;        // per-batch token budget (source + target)
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double dropout = 0.1;
  double clip_norm = 0.0;        // 0 disables clipping
  uint64_t seed = 1;
  int min_freq = 1;
  int retrieve_k = 1;

  // Ablation switches.
  bool ge = true;    // group embeddings
  bool sm = true;    // scaling module
  bool ppi = true;   // prototype position indicator
  bool hm1 = false;  // hard mask: hide all prototype states
  bool hm2 = false;  // hard mask: hide non-concept prototype states
  bool sm0 = false;  // keep scaling module, drop its classification loss

  void validate() const;
  AblationFlags flags() const;
  // lambda is forced to 0 when the scaling module is off or sm0 is set.
  double lambda_effective() const;
};

struct StepReport {
  long step = 0;
  double l_d = 0.0;
  double l_e = 0.0;
  double total = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;

  std::string to_json_line() const;
};

// One instance, tokenized and id-mapped, ready for the model.
struct PreparedInstance {
  EncodedInput src;
  std::vector<uint8_t> in_target;  // per source position, the L_E label
  std::vector<int> dec_in;         // BOS + target ids
  std::vector<int> labels;         // target ids + EOS
  long tokens() const {
    return static_cast<long>(src.ids.size() + dec_in.size());
  }
};

PreparedInstance prepare_instance(const TrainingInstance& inst,
                                  const Vocabulary& vocab,
                                  const ModelConfig& cfg);

// Fills missing prototypes from the index (top-1, excluding the exact
// target sentence), builds the vocabulary, and prepares every instance.
struct PreparedData {
  Vocabulary vocab;
  std::vector<TrainingInstance> raw;  // with prototypes filled in
  std::vector<PreparedInstance> instances;
};

PreparedData prepare_training_data(std::vector<TrainingInstance> data,
                                   const PrototypeIndex* index,
                                   const ModelConfig& cfg, int min_freq,
                                   int retrieve_k);

// Forward pass plus losses for one instance; optionally backward with the
// given gradient scales. Shared by the trainer (float) and the gradient
// checker (double).
template <typename T>
struct InstanceLosses {
  double ce_sum = 0.0;
  long ce_tokens = 0;
  double le_sum = 0.0;
  long le_positions = 0;
};

template <typename T>
InstanceLosses<T> instance_forward_backward(Model<T>& model,
                                            const PreparedInstance& inst,
                                            const AblationFlags& flags,
                                            double label_smoothing,
                                            bool do_backward, T ce_scale,
                                            T le_scale,
                                            const DropoutState& dp = {});

// Deterministic single-process training driver.
class Trainer {
 public:
  Trainer(Model<float>& model, const TrainConfig& cfg,
          std::vector<PreparedInstance> data);

  StepReport step();  // one optimizer update
  long steps_done() const { return step_; }

  // Runs up to cfg.max_updates steps, invoking on_step per update.
  void run(const std::function<void(const StepReport&)>& on_step = {});

 private:
  void refill_batches();

  Model<float>& model_;
  TrainConfig cfg_;
  std::vector<PreparedInstance> data_;
  Adam<float> adam_;
  Rng shuffle_rng_;
  Rng dropout_rng_;
  std::vector<std::vector<int>> batches_;  // instance indices, consumed back
  long step_ = 0;
};

}  // namespace protogen

#endif  // PROTOGEN_TRAINER_H_
