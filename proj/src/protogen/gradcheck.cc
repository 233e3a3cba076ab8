// protogen/gradcheck.cc
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

#include "protogen/gradcheck.h"

#include <algorithm>
#include <cmath>

#include "protogen/rng.h"

namespace protogen {

namespace {

double total_loss_value(Model<double>& model, const PreparedInstance& inst,
                        const AblationFlags& flags, double label_smoothing,
                        double lambda) {
  auto losses = instance_forward_backward<double>(
      model, inst, flags, label_smoothing, /*do_backward=*/false, 0.0, 0.0);
  const double l_d =
      losses.ce_tokens > 0 ? losses.ce_sum / double(losses.ce_tokens) : 0.0;
  const double l_e = losses.le_positions > 0
                         ? losses.le_sum / double(losses.le_positions)
                         : 0.0;
  return l_d + lambda * l_e;
}

}  // namespace

GradCheckReport gradcheck(const ModelConfig& cfg, const TrainConfig& tcfg,
                          const PreparedInstance& inst, int max_coords,
                          double fd_step, uint64_t sample_seed) {
  Model<double> model(cfg, tcfg.seed);
  const AblationFlags flags = tcfg.flags();
  const double lambda = tcfg.lambda_effective();

  // Analytic gradients with the same normalization the loss value uses.
  model.params().zero_grads();
  auto losses = instance_forward_backward<double>(
      model, inst, flags, tcfg.label_smoothing, /*do_backward=*/true,
      1.0 / double(inst.labels.size()),
      lambda > 0.0 ? lambda / double(inst.src.ids.size()) : 0.0);
  (void)losses;

  GradCheckReport report;
  Rng rng(sample_seed);
  for (Param<double>* p : model.params().all()) {
    GradCheckEntry entry;
    entry.name = p->name;
    const size_t n = p->size();
    std::vector<size_t> coords;
    if (static_cast<int>(n) <= max_coords) {
      for (size_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
      for (int i = 0; i < max_coords; ++i) {
        coords.push_back(size_t(rng.uniform_int(int(n))));
      }
    }
    for (size_t c : coords) {
      const double saved = p->w.data[c];
      p->w.data[c] = saved + fd_step;
      const double plus =
          total_loss_value(model, inst, flags, tcfg.label_smoothing, lambda);
      p->w.data[c] = saved - fd_step;
      const double minus =
          total_loss_value(model, inst, flags, tcfg.label_smoothing, lambda);
      p->w.data[c] = saved;
      const double numeric = (plus - minus) / (2.0 * fd_step);
      const double analytic = p->g.data[c];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric),
                                   1e-8});
      if (rel > entry.max_rel_err) {
        entry.max_rel_err = rel;
        entry.worst_index = c;
        entry.analytic = analytic;
        entry.numeric = numeric;
      }
      ++entry.checked;
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

GradCheckSetup make_gradcheck_setup(uint64_t seed) {
  GradCheckSetup setup;
  setup.model_cfg.d = 8;
  setup.model_cfg.heads = 2;
  setup.model_cfg.d_s = 8;
  setup.model_cfg.layers_enc = 1;
  setup.model_cfg.layers_dec = 1;
  setup.model_cfg.d_ff = 16;
  setup.model_cfg.p_max = 16;
  setup.model_cfg.d_max = 8;
  // Larger-than-training init so every gradient sits well above the
  // finite-difference noise floor; a sign or indexing bug still shows up as
  // an O(1) relative error.
  setup.model_cfg.init_std_base = 0.4;
  setup.model_cfg.init_std_new = 0.2;

  setup.train_cfg.seed = seed;
  setup.train_cfg.dropout = 0.0;

  std::vector<std::vector<std::string>> corpus = {
      {"a", "man", "sits", "with", "a", "guitar"},
      {"a", "man", "plays", "guitar", "on", "stage"},
  };
  Vocabulary vocab = Vocabulary::build(corpus, 1);
  setup.model_cfg.vocab = vocab.size();

  TrainingInstance inst;
  inst.concepts = {"guitar", "sit"};
  inst.prototype = {"a", "man", "sits", "with", "a", "guitar"};
  inst.target = {"a", "man", "plays", "guitar", "on", "stage"};
  setup.instance = prepare_instance(inst, vocab, setup.model_cfg);
  return setup;
}

}  // namespace protogen
