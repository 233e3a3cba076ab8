// protogen/text.cc
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

#include "protogen/text.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace protogen {

namespace {

bool is_word_byte(unsigned char c) {
  return std::isalnum(c) || c >= 0x80;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    } else if (is_word_byte(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
      out.push_back(std::string(1, static_cast<char>(c)));
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string stem(const std::string& token) {
  static const std::vector<std::string> kSuffixes = {"ing", "ed", "es", "s"};
  for (const auto& suf : kSuffixes) {
    if (token.size() >= suf.size() + 3 &&
        token.compare(token.size() - suf.size(), suf.size(), suf) == 0) {
      return token.substr(0, token.size() - suf.size());
    }
  }
  return token;
}

bool concept_match(const std::string& token, const std::string& concept_lemma) {
  return stem(token) == stem(concept_lemma);
}

Vocabulary::Vocabulary() {
  id_to_token_ = {"<pad>", "<bos>", "<eos>", "<unk>"};
  for (int i = 0; i < kNumReservedIds; ++i) token_to_id_[id_to_token_[i]] = i;
}

Vocabulary Vocabulary::build(
    const std::vector<std::vector<std::string>>& corpus, int min_freq) {
  if (min_freq < 1) throw std::invalid_argument("min_freq must be >= 1");
  std::map<std::string, long> freq;
  for (const auto& sent : corpus) {
    for (const auto& tok : sent) ++freq[tok];
  }
  std::vector<std::pair<std::string, long>> kept;
  for (const auto& [tok, n] : freq) {
    if (n >= min_freq) kept.emplace_back(tok, n);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  for (const auto& [tok, n] : kept) {
    (void)n;
    v.token_to_id_[tok] = static_cast<int>(v.id_to_token_.size());
    v.id_to_token_.push_back(tok);
  }
  return v;
}

Vocabulary Vocabulary::from_id_list(
    const std::vector<std::string>& id_to_token) {
  if (id_to_token.size() < kNumReservedIds) {
    throw std::runtime_error("vocabulary list misses reserved ids");
  }
  Vocabulary v;
  v.id_to_token_ = id_to_token;
  v.token_to_id_.clear();
  for (size_t i = 0; i < id_to_token.size(); ++i) {
    v.token_to_id_[id_to_token[i]] = static_cast<int>(i);
  }
  return v;
}

int Vocabulary::id(const std::string& surface) const {
  auto it = token_to_id_.find(surface);
  return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::surface(int id) const {
  if (id < 0 || id >= size()) throw std::out_of_range("vocabulary id");
  return id_to_token_[id];
}

std::vector<int> Vocabulary::encode(
    const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<TrainingInstance> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::vector<TrainingInstance> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed JSON: " + e.what());
    }
    auto require = [&](const char* field) {
      if (!j.contains(field)) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": missing required field \"" + field + "\"");
      }
    };
    require("concepts");
    require("target");
    TrainingInstance inst;
    for (const auto& c : j.at("concepts")) {
      std::string lemma = c.get<std::string>();
      std::transform(lemma.begin(), lemma.end(), lemma.begin(),
                     [](unsigned char ch) { return std::tolower(ch); });
      if (lemma.empty()) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": empty concept");
      }
      inst.concepts.push_back(lemma);
    }
    if (inst.concepts.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": \"concepts\" must be non-empty");
    }
    for (size_t a = 0; a < inst.concepts.size(); ++a) {
      for (size_t b = a + 1; b < inst.concepts.size(); ++b) {
        if (stem(inst.concepts[a]) == stem(inst.concepts[b])) {
          throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                   ": concepts \"" + inst.concepts[a] +
                                   "\" and \"" + inst.concepts[b] +
                                   "\" share a stem");
        }
      }
    }
    inst.target = tokenize(j.at("target").get<std::string>());
    if (inst.target.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": empty target");
    }
    if (j.contains("prototype")) {
      inst.prototype = tokenize(j.at("prototype").get<std::string>());
    }
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<std::string> load_corpus_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    lines.push_back(line);
  }
  return lines;
}

}  // namespace protogen
