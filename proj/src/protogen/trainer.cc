// protogen/trainer.cc
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

#include "protogen/trainer.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "protogen/loss.h"

namespace protogen {

void TrainConfig::validate() const {
  if (hm1 && hm2) throw std::invalid_argument("hm1 and hm2 are exclusive");
  if (sm0 && !sm) throw std::invalid_argument("sm0 requires the scaling module");
  if (label_smoothing < 0.0 || label_smoothing >= 1.0) {
    throw std::invalid_argument("label smoothing outside [0,1)");
  }
  if (lambda_loss < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (max_tokens < 1 || max_updates < 0 || retrieve_k < 1) {
    throw std::invalid_argument("invalid training limits");
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw std::invalid_argument("dropout outside [0,1)");
  }
}

AblationFlags TrainConfig::flags() const {
  AblationFlags f;
  f.group_embeddings = ge;
  f.scaling_module = sm;
  f.position_indicator = ppi;
  f.hard_mask_all = hm1;
  f.hard_mask_nonconcept = hm2;
  return f;
}

double TrainConfig::lambda_effective() const {
  return (sm && !sm0) ? lambda_loss : 0.0;
}

std::string StepReport::to_json_line() const {
  nlohmann::json j;
  j["step"] = step;
  j["l_d"] = l_d;
  j["l_e"] = l_e;
  j["total"] = total;
  j["lr"] = lr;
  j["grad_norm"] = grad_norm;
  return j.dump();
}

PreparedInstance prepare_instance(const TrainingInstance& inst,
                                  const Vocabulary& vocab,
                                  const ModelConfig& cfg) {
  if (inst.target.empty()) throw std::invalid_argument("instance without target");
  PreparedInstance out;
  out.src = encode_input(inst.concepts, inst.prototype, vocab, cfg);

  out.in_target.assign(out.src.surfaces.size(), 0);
  for (size_t v = 0; v < out.src.surfaces.size(); ++v) {
    for (const auto& t : inst.target) {
      if (concept_match(out.src.surfaces[v], t)) {
        out.in_target[v] = 1;
        break;
      }
    }
  }

  const int max_target = cfg.p_max - 1;
  std::vector<int> target_ids = vocab.encode(inst.target);
  if (static_cast<int>(target_ids.size()) > max_target) {
    target_ids.resize(max_target);
  }
  out.dec_in.push_back(kBosId);
  out.dec_in.insert(out.dec_in.end(), target_ids.begin(), target_ids.end());
  out.labels = target_ids;
  out.labels.push_back(kEosId);
  return out;
}

PreparedData prepare_training_data(std::vector<TrainingInstance> data,
                                   const PrototypeIndex* index,
                                   const ModelConfig& cfg, int min_freq,
                                   int retrieve_k) {
  if (data.empty()) throw std::invalid_argument("empty dataset");
  PreparedData out;
  for (auto& inst : data) {
    if (inst.prototype.empty() && index != nullptr) {
      auto results = index->retrieve(inst.concepts, retrieve_k,
                                     join_tokens(inst.target));
      if (!results.empty()) inst.prototype = results.front().tokens;
    }
  }
  std::vector<std::vector<std::string>> vocab_corpus;
  for (const auto& inst : data) {
    vocab_corpus.push_back(inst.concepts);
    vocab_corpus.push_back(inst.target);
    if (!inst.prototype.empty()) vocab_corpus.push_back(inst.prototype);
  }
  out.vocab = Vocabulary::build(vocab_corpus, min_freq);

  ModelConfig cfg_with_vocab = cfg;
  cfg_with_vocab.vocab = out.vocab.size();
  for (const auto& inst : data) {
    out.instances.push_back(prepare_instance(inst, out.vocab, cfg_with_vocab));
  }
  out.raw = std::move(data);
  return out;
}

template <typename T>
InstanceLosses<T> instance_forward_backward(Model<T>& model,
                                            const PreparedInstance& inst,
                                            const AblationFlags& flags,
                                            double label_smoothing,
                                            bool do_backward, T ce_scale,
                                            T le_scale,
                                            const DropoutState& dp) {
  InstanceLosses<T> out;
  const Matrix<T>& logits = model.forward(inst.src, inst.dec_in, flags, dp);

  Matrix<T> dlogits;
  if (do_backward) dlogits.resize(logits.rows, logits.cols);
  LossSum ce = label_smoothed_ce_sum<T>(logits, inst.labels, label_smoothing,
                                        do_backward ? &dlogits : nullptr,
                                        ce_scale);
  out.ce_sum = ce.sum;
  out.ce_tokens = ce.positions;

  Matrix<T> dgates;
  const bool use_le = flags.scaling_module && le_scale != T(0);
  if (flags.scaling_module) {
    const Matrix<T>& gates = model.gates();
    if (use_le && do_backward) dgates.resize(gates.rows, gates.cols);
    LossSum le = encoder_class_loss<T>(
        gates, inst.in_target, use_le && do_backward ? &dgates : nullptr,
        le_scale);
    out.le_sum = le.sum;
    out.le_positions = le.positions;
  }

  if (do_backward) model.backward(dlogits, dgates);
  return out;
}

Trainer::Trainer(Model<float>& model, const TrainConfig& cfg,
                 std::vector<PreparedInstance> data)
    : model_(model),
      cfg_(cfg),
      data_(std::move(data)),
      adam_(cfg.adam_beta1, cfg.adam_beta2),
      shuffle_rng_(seed_for(cfg.seed, "shuffle")),
      dropout_rng_(seed_for(cfg.seed, "dropout")) {
  cfg_.validate();
  if (data_.empty()) throw std::invalid_argument("no training instances");
  for (const auto& inst : data_) {
    if (inst.tokens() > cfg_.max_tokens) {
      throw std::invalid_argument("instance exceeds the batch token budget");
    }
  }
}

void Trainer::refill_batches() {
  std::vector<int> order(data_.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[shuffle_rng_.uniform_int(int(i))]);
  }
  std::vector<std::vector<int>> batches;
  std::vector<int> cur;
  long cur_tokens = 0;
  for (int idx : order) {
    const long t = data_[idx].tokens();
    if (!cur.empty() && cur_tokens + t > cfg_.max_tokens) {
      batches.push_back(std::move(cur));
      cur.clear();
      cur_tokens = 0;
    }
    cur.push_back(idx);
    cur_tokens += t;
  }
  if (!cur.empty()) batches.push_back(std::move(cur));
  // Consumed from the back; reverse to keep epoch order.
  std::reverse(batches.begin(), batches.end());
  batches_ = std::move(batches);
}

StepReport Trainer::step() {
  if (batches_.empty()) refill_batches();
  std::vector<int> batch = std::move(batches_.back());
  batches_.pop_back();

  long ce_tokens = 0, le_positions = 0;
  for (int idx : batch) {
    ce_tokens += static_cast<long>(data_[idx].labels.size());
    le_positions += static_cast<long>(data_[idx].src.ids.size());
  }
  const double lambda = cfg_.lambda_effective();
  const float ce_scale = 1.0f / float(ce_tokens);
  const float le_scale =
      lambda > 0.0 ? float(lambda / double(le_positions)) : 0.0f;

  DropoutState dp;
  if (cfg_.dropout > 0.0) {
    dp.rng = &dropout_rng_;
    dp.rate = cfg_.dropout;
  }

  model_.params().zero_grads();
  double ce_sum = 0.0, le_sum = 0.0;
  for (int idx : batch) {
    auto losses = instance_forward_backward<float>(
        model_, data_[idx], cfg_.flags(), cfg_.label_smoothing,
        /*do_backward=*/true, ce_scale, le_scale, dp);
    ce_sum += losses.ce_sum;
    le_sum += losses.le_sum;
  }

  StepReport report;
  report.step = step_ + 1;
  report.l_d = ce_sum / double(ce_tokens);
  report.l_e = le_positions > 0 ? le_sum / double(le_positions) : 0.0;
  report.total = total_loss(report.l_d, report.l_e, lambda);
  if (!std::isfinite(report.total)) {
    std::string bad = model_.params().first_non_finite();
    throw std::runtime_error("non-finite loss at step " +
                             std::to_string(report.step) +
                             (bad.empty() ? "" : " (array " + bad + ")"));
  }

  double sq = 0.0;
  for (const Param<float>* p : model_.params().all()) {
    for (float g : p->g.data) sq += double(g) * double(g);
  }
  report.grad_norm = std::sqrt(sq);
  if (!std::isfinite(report.grad_norm)) {
    std::string bad = model_.params().first_non_finite();
    throw std::runtime_error("non-finite gradient at step " +
                             std::to_string(report.step) +
                             (bad.empty() ? "" : " (array " + bad + ")"));
  }
  if (cfg_.clip_norm > 0.0 && report.grad_norm > cfg_.clip_norm) {
    const float s = float(cfg_.clip_norm / report.grad_norm);
    for (Param<float>* p : model_.params().all()) {
      for (float& g : p->g.data) g *= s;
    }
  }

  report.lr = lr_schedule(report.step, cfg_.base_lr, cfg_.warmup);
  adam_.step(model_.params(), report.lr);
  ++step_;
  return report;
}

void Trainer::run(const std::function<void(const StepReport&)>& on_step) {
  while (step_ < cfg_.max_updates) {
    StepReport r = step();
    if (on_step) on_step(r);
  }
}

template InstanceLosses<float> instance_forward_backward<float>(
    Model<float>&, const PreparedInstance&, const AblationFlags&, double, bool,
    float, float, const DropoutState&);
template InstanceLosses<double> instance_forward_backward<double>(
    Model<double>&, const PreparedInstance&, const AblationFlags&, double,
    bool, double, double, const DropoutState&);

}  // namespace protogen
