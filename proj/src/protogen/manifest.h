// protogen/manifest.h
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

#ifndef PROTOGEN_MANIFEST_H_
#define PROTOGEN_MANIFEST_H_

#include <cstdint>
#include <map>
#include <string>

namespace protogen {

// Reproducibility sidecar written next to every output artifact
// (<artifact>.manifest.json): the subcommand, every resolved setting, the
// seed, and the input/output paths. Re-running from it reproduces the
// artifact.
struct RunManifest {
  std::string subcommand;
  uint64_t seed = 0;
  std::map<std::string, std::string> config;   // resolved settings
  std::map<std::string, std::string> inputs;   // role -> path
  std::map<std::string, std::string> outputs;  // role -> path
  std::map<std::string, int> format_versions;

  void set(const std::string& key, const std::string& value) {
    config[key] = value;
  }
  void set(const std::string& key, double value);
  void set(const std::string& key, long value);
  void set(const std::string& key, bool value);

  // Writes to <artifact_path>.manifest.json.
  void write_for(const std::string& artifact_path) const;
};

}  // namespace protogen

#endif  // PROTOGEN_MANIFEST_H_
