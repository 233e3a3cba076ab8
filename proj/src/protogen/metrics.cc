// protogen/metrics.cc
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

#include "protogen/metrics.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "json.hpp"

namespace protogen {

namespace {

std::map<std::vector<std::string>, long> ngram_counts(const TokenList& tokens,
                                                      int n) {
  std::map<std::vector<std::string>, long> counts;
  if (static_cast<int>(tokens.size()) < n) return counts;
  for (size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i,
                                      tokens.begin() + i + n)];
  }
  return counts;
}

long clipped_matches(const std::map<std::vector<std::string>, long>& cand,
                     const std::vector<std::map<std::vector<std::string>, long>>&
                         refs) {
  long matches = 0;
  for (const auto& [gram, count] : cand) {
    long best_ref = 0;
    for (const auto& ref : refs) {
      auto it = ref.find(gram);
      if (it != ref.end()) best_ref = std::max(best_ref, it->second);
    }
    matches += std::min(count, best_ref);
  }
  return matches;
}

// Closest reference length to the candidate, ties toward the shorter one.
long best_match_length(size_t cand_len,
                       const std::vector<TokenList>& references) {
  long best = -1;
  for (const auto& ref : references) {
    const long len = static_cast<long>(ref.size());
    if (best < 0) {
      best = len;
      continue;
    }
    const long d_new = std::labs(len - long(cand_len));
    const long d_old = std::labs(best - long(cand_len));
    if (d_new < d_old || (d_new == d_old && len < best)) best = len;
  }
  return best;
}

}  // namespace

double bleu(const std::vector<TokenList>& candidates,
            const std::vector<std::vector<TokenList>>& references, int n) {
  if (n < 1 || n > 4) throw std::invalid_argument("bleu order must be 1..4");
  if (candidates.empty()) throw std::invalid_argument("no candidates");
  if (candidates.size() != references.size()) {
    throw std::invalid_argument("candidate/reference count mismatch");
  }
  std::vector<long> matches(n, 0), totals(n, 0);
  long cand_len = 0, ref_len = 0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    const TokenList& cand = candidates[i];
    cand_len += static_cast<long>(cand.size());
    ref_len += best_match_length(cand.size(), references[i]);
    for (int k = 1; k <= n; ++k) {
      auto cand_grams = ngram_counts(cand, k);
      std::vector<std::map<std::vector<std::string>, long>> ref_grams;
      for (const auto& ref : references[i]) {
        ref_grams.push_back(ngram_counts(ref, k));
      }
      matches[k - 1] += clipped_matches(cand_grams, ref_grams);
      long total = static_cast<long>(cand.size()) - k + 1;
      totals[k - 1] += std::max(total, 0L);
    }
  }
  double log_precision = 0.0;
  for (int k = 0; k < n; ++k) {
    if (totals[k] == 0) return 0.0;
    const double num = matches[k] > 0 ? double(matches[k]) : 1e-9;
    log_precision += std::log(num / double(totals[k]));
  }
  double brevity = 1.0;
  if (cand_len < ref_len) {
    brevity = std::exp(1.0 - double(ref_len) / double(cand_len));
  }
  return brevity * std::exp(log_precision / double(n));
}

double rouge_n(const std::vector<TokenList>& candidates,
               const std::vector<std::vector<TokenList>>& references, int n) {
  if (candidates.empty()) throw std::invalid_argument("no candidates");
  if (candidates.size() != references.size()) {
    throw std::invalid_argument("candidate/reference count mismatch");
  }
  double sum = 0.0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    auto cand_grams = ngram_counts(candidates[i], n);
    long cand_total = 0;
    for (const auto& [gram, c] : cand_grams) cand_total += c;
    double best = 0.0;
    for (const auto& ref : references[i]) {
      auto ref_grams = ngram_counts(ref, n);
      long ref_total = 0;
      for (const auto& [gram, c] : ref_grams) ref_total += c;
      long overlap = 0;
      for (const auto& [gram, c] : cand_grams) {
        auto it = ref_grams.find(gram);
        if (it != ref_grams.end()) overlap += std::min(c, it->second);
      }
      if (cand_total == 0 || ref_total == 0 || overlap == 0) continue;
      const double p = double(overlap) / double(cand_total);
      const double r = double(overlap) / double(ref_total);
      best = std::max(best, 2.0 * p * r / (p + r));
    }
    sum += best;
  }
  return sum / double(candidates.size());
}

double rouge_l_pair(const TokenList& candidate, const TokenList& reference) {
  if (candidate.empty() || reference.empty()) {
    throw std::invalid_argument("rouge-l needs non-empty sequences");
  }
  const size_t m = candidate.size(), n = reference.size();
  std::vector<long> prev(n + 1, 0), cur(n + 1, 0);
  for (size_t i = 1; i <= m; ++i) {
    for (size_t j = 1; j <= n; ++j) {
      if (candidate[i - 1] == reference[j - 1]) {
        cur[j] = prev[j - 1] + 1;
      } else {
        cur[j] = std::max(prev[j], cur[j - 1]);
      }
    }
    std::swap(prev, cur);
  }
  const long lcs = prev[n];
  if (lcs == 0) return 0.0;
  const double p = double(lcs) / double(m);
  const double r = double(lcs) / double(n);
  return 2.0 * p * r / (p + r);
}

double rouge_l(const std::vector<TokenList>& candidates,
               const std::vector<std::vector<TokenList>>& references) {
  if (candidates.empty()) throw std::invalid_argument("no candidates");
  double sum = 0.0;
  for (size_t i = 0; i < candidates.size(); ++i) {
    double best = 0.0;
    for (const auto& ref : references[i]) {
      if (candidates[i].empty()) continue;
      best = std::max(best, rouge_l_pair(candidates[i], ref));
    }
    sum += best;
  }
  return sum / double(candidates.size());
}

int missing_concepts(const TokenList& generated,
                     const std::vector<std::string>& concepts) {
  if (concepts.empty()) throw std::invalid_argument("empty concept set");
  int missing = 0;
  for (const auto& c : concepts) {
    bool found = false;
    for (const auto& tok : generated) {
      if (concept_match(tok, c)) {
        found = true;
        break;
      }
    }
    if (!found) ++missing;
  }
  return missing;
}

std::string EvalReport::to_json() const {
  nlohmann::json j;
  j["bleu3"] = bleu3;
  j["bleu4"] = bleu4;
  j["rouge2"] = rouge2;
  j["rouge_l"] = rouge_l;
  j["missing_histogram"] = missing_histogram;
  j["instances"] = instances;
  return j.dump(2);
}

EvalReport evaluate(Model<float>& model, const AblationFlags& flags,
                    const Vocabulary& vocab,
                    const std::vector<TrainingInstance>& data,
                    const PrototypeIndex* index, const BeamConfig& beam_cfg) {
  if (data.empty()) throw std::invalid_argument("empty evaluation dataset");
  for (const auto& inst : data) {
    if (inst.target.empty()) {
      throw std::invalid_argument("evaluation instance without target");
    }
  }

  // Group identical concept lists into one multi-reference instance,
  // keeping first-seen order.
  std::vector<std::vector<std::string>> concept_lists;
  std::vector<std::vector<TokenList>> references;
  std::vector<TokenList> prototypes;
  std::map<std::vector<std::string>, size_t> group_of;
  for (const auto& inst : data) {
    auto it = group_of.find(inst.concepts);
    if (it == group_of.end()) {
      group_of[inst.concepts] = concept_lists.size();
      concept_lists.push_back(inst.concepts);
      references.push_back({inst.target});
      prototypes.push_back(inst.prototype);
    } else {
      references[it->second].push_back(inst.target);
      if (prototypes[it->second].empty()) {
        prototypes[it->second] = inst.prototype;
      }
    }
  }

  EvalReport report;
  report.instances = static_cast<long>(concept_lists.size());
  std::vector<TokenList> candidates;
  size_t max_missing = 0;
  std::vector<int> missing_counts;
  for (size_t g = 0; g < concept_lists.size(); ++g) {
    TokenList prototype = prototypes[g];
    if (prototype.empty() && index != nullptr) {
      auto results = index->retrieve(concept_lists[g], 1,
                                     join_tokens(references[g].front()));
      if (!results.empty()) prototype = results.front().tokens;
    }
    EncodedInput src =
        encode_input(concept_lists[g], prototype, vocab, model.config());
    TokenList generated =
        generate_tokens(model, src, vocab, flags, beam_cfg);
    const int missing = missing_concepts(generated, concept_lists[g]);
    missing_counts.push_back(missing);
    max_missing = std::max(max_missing, size_t(missing));
    candidates.push_back(std::move(generated));
  }
  report.missing_histogram.assign(max_missing + 1, 0);
  for (int m : missing_counts) ++report.missing_histogram[m];

  report.bleu3 = bleu(candidates, references, 3);
  report.bleu4 = bleu(candidates, references, 4);
  report.rouge2 = rouge_n(candidates, references, 2);
  report.rouge_l = protogen::rouge_l(candidates, references);
  return report;
}

}  // namespace protogen
