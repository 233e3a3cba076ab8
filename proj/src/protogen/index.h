// protogen/index.h
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

#ifndef PROTOGEN_INDEX_H_
#define PROTOGEN_INDEX_H_

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace protogen {

struct RetrievalResult {
  int sentence_id = -1;
  std::vector<std::string> tokens;
  // Concepts of the query that matched at least one token, in query order.
  std::vector<std::string> matched_concepts;
  int score = 0;  // == matched_concepts.size()
};

// Inverted index over a sentence corpus: stem -> ascending sentence ids.
// Immutable after build; safe for concurrent readers.
class PrototypeIndex {
 public:
  // Tokenizes and indexes each corpus line. Throws on an empty corpus.
  static PrototypeIndex build(const std::vector<std::string>& corpus_lines,
                              const std::string& label);

  // Candidates are ranked by (1) descending count of distinct matched
  // concepts, (2) ascending token count, (3) ascending sentence id. Sentences
  // token-equal to `exclude_text` are skipped. Returns up to k results with
  // score >= 1; concept order never affects the ranking.
  std::vector<RetrievalResult> retrieve(
      const std::vector<std::string>& concepts, int k,
      const std::optional<std::string>& exclude_text = std::nullopt) const;

  const std::vector<std::vector<std::string>>& sentences() const {
    return sentences_;
  }
  const std::map<std::string, std::vector<int>>& postings() const {
    return postings_;
  }
  const std::string& label() const { return label_; }

  void save(const std::string& path) const;
  static PrototypeIndex load(const std::string& path);

  static constexpr int kFormatVersion = 1;

 private:
  std::string label_;
  std::vector<std::vector<std::string>> sentences_;
  std::map<std::string, std::vector<int>> postings_;
};

// Histogram of how many retrieved-prototype concepts also occur in the
// target, bucketed 1..5 (counts above 5 clamp into bucket 5; zero
// co-occurrences are tallied separately).
struct CooccurrenceHistogram {
  long zero = 0;
  std::array<long, 5> buckets{};  // buckets[i] holds count i+1
};

CooccurrenceHistogram cooccurrence_histogram(
    const std::vector<std::pair<RetrievalResult, std::vector<std::string>>>&
        results_with_targets);

}  // namespace protogen

#endif  // PROTOGEN_INDEX_H_
