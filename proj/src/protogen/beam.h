// protogen/beam.h
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

#ifndef PROTOGEN_BEAM_H_
#define PROTOGEN_BEAM_H_

#include <functional>
#include <vector>

#include "protogen/model.h"

namespace protogen {

struct Hypothesis {
  std::vector<int> ids;  // starts with BOS
  double log_prob = 0.0;
  bool finished = false;
};

struct BeamConfig {
  int beam_size = 5;
  int max_len = 32;
};

// Maps a BOS-prefixed id sequence to next-token logits.
using StepLogitsFn = std::function<std::vector<float>(const std::vector<int>&)>;

// Length-unnormalized beam search. Each live hypothesis expands by its top
// beam_size tokens; the best beam_size candidates survive; finished
// hypotheses carry over unchanged. Returns the content ids (BOS/EOS
// stripped) of the best finished hypothesis in the final beam, or the best
// unfinished one if nothing finished by max_len. Ties break toward the
// lexicographically smaller id sequence.
std::vector<int> beam_search(const StepLogitsFn& step_logits, int vocab_size,
                             const BeamConfig& cfg);

// Runs the model over a prepared source with beam search and returns the
// generated surfaces. Throws on an empty concept set.
std::vector<std::string> generate_tokens(Model<float>& model,
                                         const EncodedInput& src,
                                         const Vocabulary& vocab,
                                         const AblationFlags& flags,
                                         const BeamConfig& cfg);

}  // namespace protogen

#endif  // PROTOGEN_BEAM_H_
