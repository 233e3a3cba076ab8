// protogen/index.cc
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

#include "protogen/index.h"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

#include "protogen/text.h"

namespace protogen {

PrototypeIndex PrototypeIndex::build(
    const std::vector<std::string>& corpus_lines, const std::string& label) {
  if (corpus_lines.empty()) throw std::runtime_error("empty corpus");
  PrototypeIndex idx;
  idx.label_ = label;
  idx.sentences_.reserve(corpus_lines.size());
  for (const auto& line : corpus_lines) {
    int id = static_cast<int>(idx.sentences_.size());
    auto tokens = tokenize(line);
    for (const auto& tok : tokens) {
      auto& posting = idx.postings_[stem(tok)];
      if (posting.empty() || posting.back() != id) posting.push_back(id);
    }
    idx.sentences_.push_back(std::move(tokens));
  }
  return idx;
}

std::vector<RetrievalResult> PrototypeIndex::retrieve(
    const std::vector<std::string>& concepts, int k,
    const std::optional<std::string>& exclude_text) const {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::optional<std::vector<std::string>> exclude_tokens;
  if (exclude_text) exclude_tokens = tokenize(*exclude_text);

  // Distinct matched concepts per candidate, independent of query order:
  // concepts sharing a stem count once.
  std::unordered_map<int, std::vector<bool>> hits;
  std::vector<std::string> concept_stems;
  concept_stems.reserve(concepts.size());
  for (const auto& c : concepts) concept_stems.push_back(stem(c));

  for (size_t ci = 0; ci < concept_stems.size(); ++ci) {
    bool duplicate_stem = false;
    for (size_t cj = 0; cj < ci; ++cj) {
      if (concept_stems[cj] == concept_stems[ci]) duplicate_stem = true;
    }
    if (duplicate_stem) continue;
    auto it = postings_.find(concept_stems[ci]);
    if (it == postings_.end()) continue;
    for (int sid : it->second) {
      auto& mask = hits[sid];
      if (mask.empty()) mask.assign(concepts.size(), false);
      mask[ci] = true;
    }
  }

  std::vector<RetrievalResult> candidates;
  candidates.reserve(hits.size());
  for (const auto& [sid, mask] : hits) {
    if (exclude_tokens && sentences_[sid] == *exclude_tokens) continue;
    RetrievalResult r;
    r.sentence_id = sid;
    r.tokens = sentences_[sid];
    for (size_t ci = 0; ci < concepts.size(); ++ci) {
      if (mask[ci]) r.matched_concepts.push_back(concepts[ci]);
    }
    r.score = static_cast<int>(r.matched_concepts.size());
    candidates.push_back(std::move(r));
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const RetrievalResult& a, const RetrievalResult& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.tokens.size() != b.tokens.size()) {
                return a.tokens.size() < b.tokens.size();
              }
              return a.sentence_id < b.sentence_id;
            });
  if (static_cast<int>(candidates.size()) > k) candidates.resize(k);
  return candidates;
}

void PrototypeIndex::save(const std::string& path) const {
  nlohmann::json j;
  j["format_version"] = kFormatVersion;
  j["label"] = label_;
  j["sentences"] = sentences_;
  j["postings"] = postings_;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write index: " + path);
  out << j.dump() << "\n";
}

PrototypeIndex PrototypeIndex::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open index: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("invalid index file " + path + ": " + e.what());
  }
  if (!j.contains("format_version") ||
      j["format_version"].get<int>() != kFormatVersion) {
    throw std::runtime_error("unsupported index format version in " + path);
  }
  PrototypeIndex idx;
  idx.label_ = j.at("label").get<std::string>();
  idx.sentences_ =
      j.at("sentences").get<std::vector<std::vector<std::string>>>();
  idx.postings_ =
      j.at("postings").get<std::map<std::string, std::vector<int>>>();
  for (const auto& [s, posting] : idx.postings_) {
    if (posting.empty()) {
      throw std::runtime_error("index has empty posting for stem " + s);
    }
    for (size_t i = 0; i < posting.size(); ++i) {
      if (posting[i] < 0 ||
          posting[i] >= static_cast<int>(idx.sentences_.size())) {
        throw std::runtime_error("index posting for " + s +
                                 " references a missing sentence");
      }
      if (i > 0 && posting[i] <= posting[i - 1]) {
        throw std::runtime_error("index posting for " + s + " not ascending");
      }
    }
  }
  return idx;
}

CooccurrenceHistogram cooccurrence_histogram(
    const std::vector<std::pair<RetrievalResult, std::vector<std::string>>>&
        results_with_targets) {
  CooccurrenceHistogram h;
  for (const auto& [result, target] : results_with_targets) {
    if (target.empty()) throw std::invalid_argument("empty target sentence");
    int n = 0;
    for (const auto& c : result.matched_concepts) {
      bool in_target = false;
      for (const auto& t : target) {
        if (concept_match(t, c)) {
          in_target = true;
          break;
        }
      }
      if (in_target) ++n;
    }
    if (n == 0) {
      ++h.zero;
    } else {
      ++h.buckets[std::min(n, 5) - 1];
    }
  }
  return h;
}

}  // namespace protogen
