// protogen/gradcheck.h
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

#ifndef PROTOGEN_GRADCHECK_H_
#define PROTOGEN_GRADCHECK_H_

#include <string>
#include <vector>

#include "protogen/model.h"
#include "protogen/trainer.h"

namespace protogen {

struct GradCheckEntry {
  std::string name;
  int checked = 0;
  double max_rel_err = 0.0;
  size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_err = 0.0;
  bool passed(double tolerance) const { return max_rel_err < tolerance; }
};

// Compares analytic gradients against central finite differences (64-bit
// model, dropout off) on up to max_coords sampled coordinates per array.
// Relative error: |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport gradcheck(const ModelConfig& cfg, const TrainConfig& tcfg,
                          const PreparedInstance& inst, int max_coords = 50,
                          double fd_step = 1e-5, uint64_t sample_seed = 1234);

// A tiny model plus a fixed synthetic instance for quick checks.
struct GradCheckSetup {
  ModelConfig model_cfg;
  TrainConfig train_cfg;
  PreparedInstance instance;
};
GradCheckSetup make_gradcheck_setup(uint64_t seed);

}  // namespace protogen

#endif  // PROTOGEN_GRADCHECK_H_
