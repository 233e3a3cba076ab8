// protogen/metrics.h
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

#ifndef PROTOGEN_METRICS_H_
#define PROTOGEN_METRICS_H_

#include <string>
#include <vector>

#include "protogen/beam.h"
#include "protogen/index.h"
#include "protogen/model.h"
#include "protogen/text.h"

namespace protogen {

using TokenList = std::vector<std::string>;

// Corpus BLEU-n: geometric mean of modified k-gram precisions (k = 1..n)
// with brevity penalty against the closest reference length. Zero k-gram
// numerators are smoothed with 1e-9 so tiny corpora stay defined.
double bleu(const std::vector<TokenList>& candidates,
            const std::vector<std::vector<TokenList>>& references, int n);

// Bigram-overlap F1, averaged over instances; multiple references take the
// best F1.
double rouge_n(const std::vector<TokenList>& candidates,
               const std::vector<std::vector<TokenList>>& references, int n);

// LCS-based F1 with beta = 1 for a single pair.
double rouge_l_pair(const TokenList& candidate, const TokenList& reference);

double rouge_l(const std::vector<TokenList>& candidates,
               const std::vector<std::vector<TokenList>>& references);

// Number of concepts with no concept-matching token in the generation.
int missing_concepts(const TokenList& generated,
                     const std::vector<std::string>& concepts);

struct EvalReport {
  double bleu3 = 0.0;
  double bleu4 = 0.0;
  double rouge2 = 0.0;
  double rouge_l = 0.0;
  std::vector<long> missing_histogram;  // index = missing-concept count
  long instances = 0;

  std::string to_json() const;
};

// Generates with beam search for every concept set in the dataset (grouping
// identical concept lists into one multi-reference instance), then scores.
// Prototypes come from the instance when present, otherwise from the index.
EvalReport evaluate(Model<float>& model, const AblationFlags& flags,
                    const Vocabulary& vocab,
                    const std::vector<TrainingInstance>& data,
                    const PrototypeIndex* index, const BeamConfig& beam_cfg);

}  // namespace protogen

#endif  // PROTOGEN_METRICS_H_
