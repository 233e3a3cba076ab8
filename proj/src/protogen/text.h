// protogen/text.h
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

#ifndef PROTOGEN_TEXT_H_
#define PROTOGEN_TEXT_H_

#include <string>
#include <unordered_map>
#include <vector>

namespace protogen {

// Reserved vocabulary ids, fixed project-wide.
constexpr int kPadId = 0;
constexpr int kBosId = 1;
constexpr int kEosId = 2;
constexpr int kUnkId = 3;
constexpr int kNumReservedIds = 4;

// Lowercases and splits `text` into word-level tokens. Runs of letters and
// digits form one token, every other printable character becomes its own
// token, whitespace separates. Bytes >= 0x80 are kept inside word tokens so
// UTF-8 sequences survive intact.
std::vector<std::string> tokenize(const std::string& text);

// Inverse of tokenize up to whitespace: tokens joined by single spaces.
std::string join_tokens(const std::vector<std::string>& tokens);

// Deterministic suffix stripper used for concept matching. Strips one of
// "ing", "ed", "es", "s" (first that applies, in that order) provided the
// remainder keeps at least 3 characters.
std::string stem(const std::string& token);

// True iff the two surfaces share a stem.
bool concept_match(const std::string& token, const std::string& concept_lemma);

// One generation task: concepts, gold target, optional prototype sentence.
struct TrainingInstance {
  std::vector<std::string> concepts;
  std::vector<std::string> target;
  std::vector<std::string> prototype;  // empty until retrieval fills it in
};

// Frequency-cut word vocabulary with the four reserved ids up front.
class Vocabulary {
 public:
  Vocabulary();

  // Tokens with frequency >= min_freq get ids from 4 upward, ordered by
  // descending frequency then lexicographically.
  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          int min_freq);
  static Vocabulary from_id_list(const std::vector<std::string>& id_to_token);

  int id(const std::string& surface) const;  // kUnkId when absent
  const std::string& surface(int id) const;
  int size() const { return static_cast<int>(id_to_token_.size()); }
  const std::vector<std::string>& id_list() const { return id_to_token_; }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// JSON-lines dataset: {"concepts": [...], "target": "...", "prototype": "..."}
// per line. Throws std::runtime_error naming the offending line or field.
std::vector<TrainingInstance> load_dataset(const std::string& path);

// Plain-text corpus, one sentence per line; blank lines are skipped.
std::vector<std::string> load_corpus_lines(const std::string& path);

}  // namespace protogen

#endif  // PROTOGEN_TEXT_H_
