// protogen/manifest.cc
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

#include "protogen/manifest.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace protogen {

void RunManifest::set(const std::string& key, double value) {
  std::ostringstream os;
  os << value;
  config[key] = os.str();
}

void RunManifest::set(const std::string& key, long value) {
  config[key] = std::to_string(value);
}

void RunManifest::set(const std::string& key, bool value) {
  config[key] = value ? "true" : "false";
}

void RunManifest::write_for(const std::string& artifact_path) const {
  nlohmann::json j;
  j["subcommand"] = subcommand;
  j["seed"] = seed;
  j["config"] = config;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["format_versions"] = format_versions;
  const std::string path = artifact_path + ".manifest.json";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace protogen
