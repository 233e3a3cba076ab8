// protogen/checkpoint.h
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

#ifndef PROTOGEN_CHECKPOINT_H_
#define PROTOGEN_CHECKPOINT_H_

#include <memory>
#include <string>

#include "protogen/model.h"
#include "protogen/text.h"

namespace protogen {

// Checkpoint container: "PGEN" magic, a little-endian uint32 header length,
// a JSON header (format version, config, flags, seed, vocabulary, array
// names and shapes), then the raw little-endian float32 arrays in header
// order. Round trips are bit-exact.
struct Checkpoint {
  ModelConfig config;
  AblationFlags flags;
  uint64_t seed = 0;
  Vocabulary vocab;
  std::unique_ptr<Model<float>> model;

  static constexpr int kFormatVersion = 1;
};

void save_checkpoint(const std::string& path, Model<float>& model,
                     const AblationFlags& flags, const Vocabulary& vocab);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace protogen

#endif  // PROTOGEN_CHECKPOINT_H_
