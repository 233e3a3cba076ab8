// protogen/checkpoint.cc
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

#include "protogen/checkpoint.h"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace protogen {

namespace {

constexpr char kMagic[4] = {'P', 'G', 'E', 'N'};

nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"d", c.d},
          {"heads", c.heads},
          {"d_s", c.d_s},
          {"layers_enc", c.layers_enc},
          {"layers_dec", c.layers_dec},
          {"d_ff", c.d_ff},
          {"vocab", c.vocab},
          {"p_max", c.p_max},
          {"d_max", c.d_max},
          {"init_std_base", c.init_std_base},
          {"init_std_new", c.init_std_new}};
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.d = j.at("d").get<int>();
  c.heads = j.at("heads").get<int>();
  c.d_s = j.at("d_s").get<int>();
  c.layers_enc = j.at("layers_enc").get<int>();
  c.layers_dec = j.at("layers_dec").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.vocab = j.at("vocab").get<int>();
  c.p_max = j.at("p_max").get<int>();
  c.d_max = j.at("d_max").get<int>();
  c.init_std_base = j.at("init_std_base").get<double>();
  c.init_std_new = j.at("init_std_new").get<double>();
  return c;
}

nlohmann::json flags_to_json(const AblationFlags& f) {
  return {{"ge", f.group_embeddings},
          {"sm", f.scaling_module},
          {"ppi", f.position_indicator},
          {"hm1", f.hard_mask_all},
          {"hm2", f.hard_mask_nonconcept}};
}

AblationFlags flags_from_json(const nlohmann::json& j) {
  AblationFlags f;
  f.group_embeddings = j.at("ge").get<bool>();
  f.scaling_module = j.at("sm").get<bool>();
  f.position_indicator = j.at("ppi").get<bool>();
  f.hard_mask_all = j.at("hm1").get<bool>();
  f.hard_mask_nonconcept = j.at("hm2").get<bool>();
  return f;
}

}  // namespace

void save_checkpoint(const std::string& path, Model<float>& model,
                     const AblationFlags& flags, const Vocabulary& vocab) {
  nlohmann::json header;
  header["format_version"] = Checkpoint::kFormatVersion;
  header["config"] = config_to_json(model.config());
  header["flags"] = flags_to_json(flags);
  header["seed"] = model.seed();
  header["vocab"] = vocab.id_list();
  nlohmann::json arrays = nlohmann::json::array();
  for (const Param<float>* p : model.params().all()) {
    arrays.push_back(
        {{"name", p->name}, {"rows", p->w.rows}, {"cols", p->w.cols}});
  }
  header["arrays"] = arrays;

  const std::string header_str = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  const uint32_t len = static_cast<uint32_t>(header_str.size());
  char len_bytes[4];
  for (int i = 0; i < 4; ++i) len_bytes[i] = char((len >> (8 * i)) & 0xff);
  out.write(len_bytes, 4);
  out.write(header_str.data(), std::streamsize(header_str.size()));
  for (const Param<float>* p : model.params().all()) {
    out.write(reinterpret_cast<const char*>(p->w.data.data()),
              std::streamsize(p->size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("short write to checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not a checkpoint file: " + path);
  }
  char len_bytes[4];
  in.read(len_bytes, 4);
  if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
  uint32_t len = 0;
  for (int i = 0; i < 4; ++i) {
    len |= uint32_t(static_cast<unsigned char>(len_bytes[i])) << (8 * i);
  }
  std::string header_str(len, '\0');
  in.read(header_str.data(), std::streamsize(len));
  if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("invalid checkpoint header: " +
                             std::string(e.what()));
  }
  if (header.at("format_version").get<int>() != Checkpoint::kFormatVersion) {
    throw std::runtime_error("unsupported checkpoint format version");
  }

  Checkpoint ckpt;
  ckpt.config = config_from_json(header.at("config"));
  ckpt.flags = flags_from_json(header.at("flags"));
  ckpt.seed = header.at("seed").get<uint64_t>();
  ckpt.vocab =
      Vocabulary::from_id_list(header.at("vocab").get<std::vector<std::string>>());
  ckpt.model = std::make_unique<Model<float>>(ckpt.config, ckpt.seed);

  const auto& arrays = header.at("arrays");
  const auto& params = ckpt.model->params().all();
  if (arrays.size() != params.size()) {
    throw std::runtime_error("checkpoint array count mismatch");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& meta = arrays[i];
    if (meta.at("name").get<std::string>() != params[i]->name ||
        meta.at("rows").get<int>() != params[i]->w.rows ||
        meta.at("cols").get<int>() != params[i]->w.cols) {
      throw std::runtime_error("checkpoint array mismatch at " +
                               params[i]->name);
    }
    in.read(reinterpret_cast<char*>(params[i]->w.data.data()),
            std::streamsize(params[i]->size() * sizeof(float)));
    if (!in) {
      throw std::runtime_error("truncated checkpoint payload at " +
                               params[i]->name);
    }
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw std::runtime_error("trailing bytes in checkpoint: " + path);
  }
  return ckpt;
}

}  // namespace protogen
