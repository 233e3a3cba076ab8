// tests/test_train.cc
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

#include <cmath>

#include "doctest.h"

#include "protogen/gradcheck.h"
#include "protogen/loss.h"
#include "protogen/trainer.h"

using namespace protogen;

namespace {

struct Toy {
  ModelConfig cfg;
  Vocabulary vocab;
  std::vector<PreparedInstance> instances;
};

Toy make_toy() {
  Toy toy;
  toy.cfg.d = 16;
  toy.cfg.heads = 2;
  toy.cfg.d_s = 8;
  toy.cfg.layers_enc = 1;
  toy.cfg.layers_dec = 1;
  toy.cfg.d_ff = 32;
  toy.cfg.p_max = 24;
  toy.cfg.d_max = 8;

  std::vector<TrainingInstance> raw;
  TrainingInstance a;
  a.concepts = {"dog", "run"};
  a.prototype = {"a", "dog", "runs", "in", "the", "park"};
  a.target = {"a", "dog", "runs", "fast"};
  raw.push_back(a);
  TrainingInstance b;
  b.concepts = {"cat", "sleep"};
  b.prototype = {"the", "cat", "sleeps", "on", "the", "mat"};
  b.target = {"a", "cat", "sleeps"};
  raw.push_back(b);

  std::vector<std::vector<std::string>> corpus;
  for (const auto& inst : raw) {
    corpus.push_back(inst.concepts);
    corpus.push_back(inst.target);
    corpus.push_back(inst.prototype);
  }
  toy.vocab = Vocabulary::build(corpus, 1);
  toy.cfg.vocab = toy.vocab.size();
  for (const auto& inst : raw) {
    toy.instances.push_back(prepare_instance(inst, toy.vocab, toy.cfg));
  }
  return toy;
}

TrainConfig fast_config() {
  TrainConfig cfg;
  cfg.base_lr = 1e-3;
  cfg.warmup = 10;
  cfg.dropout = 0.0;
  cfg.label_smoothing = 0.0;
  cfg.seed = 42;
  return cfg;
}

}  // namespace

TEST_CASE("train config validation") {
  TrainConfig cfg;
  cfg.hm1 = cfg.hm2 = true;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.sm0 = true;
  cfg.sm = false;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.label_smoothing = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TrainConfig{};
  cfg.lambda_loss = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK(TrainConfig{}.lambda_effective() == doctest::Approx(1.0));
  TrainConfig sm0;
  sm0.sm0 = true;
  CHECK(sm0.lambda_effective() == 0.0);
  TrainConfig off;
  off.sm = false;
  CHECK(off.lambda_effective() == 0.0);
}

TEST_CASE("HM1 zeroes attention over every prototype position") {
  Toy toy = make_toy();
  Model<float> model(toy.cfg, 3);
  AblationFlags flags;
  flags.scaling_module = false;
  flags.hard_mask_all = true;
  const PreparedInstance& inst = toy.instances[0];
  model.forward(inst.src, inst.dec_in, flags);
  for (int layer = 0; layer < toy.cfg.layers_dec; ++layer) {
    for (const auto& probs : model.cross_attention_probs(layer)) {
      for (int i = 0; i < probs.rows; ++i) {
        for (int j = inst.src.n_concepts; j < probs.cols; ++j) {
          CHECK(probs.at(i, j) == 0.0f);
        }
        double kept = 0.0;
        for (int j = 0; j < inst.src.n_concepts; ++j) kept += probs.at(i, j);
        CHECK(kept == doctest::Approx(1.0).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("HM2 keeps only concept-matching prototype positions") {
  Toy toy = make_toy();
  // prototype "a man sits" with concept "sit": only "sits" stays visible.
  TrainingInstance inst;
  inst.concepts = {"sit"};
  inst.prototype = {"a", "man", "sits"};
  inst.target = {"a", "man", "sits"};
  std::vector<std::vector<std::string>> corpus = {inst.prototype};
  Vocabulary vocab = Vocabulary::build(corpus, 1);
  ModelConfig cfg = toy.cfg;
  cfg.vocab = vocab.size();
  PreparedInstance prep = prepare_instance(inst, vocab, cfg);

  Model<float> model(cfg, 5);
  AblationFlags flags;
  flags.scaling_module = false;
  flags.hard_mask_nonconcept = true;
  model.forward(prep.src, prep.dec_in, flags);
  // Positions: [sit | a man sits] -> prototype "a"(1), "man"(2) masked,
  // "sits"(3) kept.
  for (const auto& probs : model.cross_attention_probs(0)) {
    for (int i = 0; i < probs.rows; ++i) {
      CHECK(probs.at(i, 1) == 0.0f);
      CHECK(probs.at(i, 2) == 0.0f);
      CHECK(probs.at(i, 3) > 0.0f);
    }
  }
}

TEST_CASE("no hard-mask flag leaves attention untouched") {
  Toy toy = make_toy();
  Model<float> model1(toy.cfg, 3);
  Model<float> model2(toy.cfg, 3);
  AblationFlags flags;
  const PreparedInstance& inst = toy.instances[0];
  Matrix<float> a = model1.forward(inst.src, inst.dec_in, flags);
  Matrix<float> b = model2.forward(inst.src, inst.dec_in, flags);
  CHECK(a.data == b.data);
}

TEST_CASE("HM1 needs at least one concept position") {
  Toy toy = make_toy();
  Model<float> model(toy.cfg, 3);
  AblationFlags flags;
  flags.hard_mask_all = true;
  EncodedInput src = toy.instances[0].src;
  src.n_concepts = 0;
  CHECK_THROWS_AS(model.forward(src, toy.instances[0].dec_in, flags),
                  std::invalid_argument);
}

TEST_CASE("two trainers with the same seed produce identical reports") {
  Toy toy = make_toy();
  TrainConfig cfg = fast_config();
  cfg.dropout = 0.1;  // exercise the seeded dropout path too
  Model<float> m1(toy.cfg, 11);
  Model<float> m2(toy.cfg, 11);
  Trainer t1(m1, cfg, toy.instances);
  Trainer t2(m2, cfg, toy.instances);
  for (int s = 0; s < 10; ++s) {
    StepReport r1 = t1.step();
    StepReport r2 = t2.step();
    CHECK(r1.l_d == r2.l_d);
    CHECK(r1.l_e == r2.l_e);
    CHECK(r1.grad_norm == r2.grad_norm);
    CHECK(r1.lr == r2.lr);
  }
  const auto& p1 = m1.params().all();
  const auto& p2 = m2.params().all();
  for (size_t i = 0; i < p1.size(); ++i) CHECK(p1[i]->w.data == p2[i]->w.data);
}

TEST_CASE("a step on a single instance decreases its loss") {
  Toy toy = make_toy();
  TrainConfig cfg = fast_config();
  cfg.base_lr = 1e-3;
  cfg.warmup = 1;
  std::vector<PreparedInstance> one = {toy.instances[0]};
  Model<float> model(toy.cfg, 21);
  Trainer trainer(model, cfg, one);
  StepReport first = trainer.step();
  StepReport second = trainer.step();
  CHECK(second.total < first.total);
}

TEST_CASE("disabled group embeddings receive no gradient and never move") {
  Toy toy = make_toy();
  TrainConfig cfg = fast_config();
  cfg.ge = false;
  Model<float> model(toy.cfg, 31);
  const std::vector<float> gc_before = model.find_param("emb.group_c")->w.data;
  const std::vector<float> go_before = model.find_param("emb.group_o")->w.data;
  Trainer trainer(model, cfg, toy.instances);
  for (int s = 0; s < 5; ++s) trainer.step();
  for (float g : model.find_param("emb.group_c")->g.data) CHECK(g == 0.0f);
  CHECK(model.find_param("emb.group_c")->w.data == gc_before);
  CHECK(model.find_param("emb.group_o")->w.data == go_before);
}

TEST_CASE("disabled indicator and scaling leave their arrays untouched") {
  Toy toy = make_toy();
  TrainConfig cfg = fast_config();
  cfg.ppi = false;
  cfg.sm = false;
  Model<float> model(toy.cfg, 33);
  const std::vector<float> dist_before = model.find_param("emb.dist")->w.data;
  const std::vector<float> sw_before = model.find_param("scale.fc1.w")->w.data;
  Trainer trainer(model, cfg, toy.instances);
  for (int s = 0; s < 5; ++s) trainer.step();
  CHECK(model.find_param("emb.dist")->w.data == dist_before);
  CHECK(model.find_param("scale.fc1.w")->w.data == sw_before);
}

TEST_CASE("Adam leaves zero-gradient parameters unchanged") {
  ParamSet<float> ps;
  Param<float>* moving = ps.add("moving", 2, 2);
  Param<float>* frozen = ps.add("frozen", 2, 2);
  moving->w.fill(1.0f);
  frozen->w.fill(1.0f);
  Adam<float> adam(0.9, 0.999);
  for (int s = 0; s < 3; ++s) {
    moving->g.fill(0.5f);
    frozen->g.fill(0.0f);
    adam.step(ps, 1e-2);
  }
  for (float v : frozen->w.data) CHECK(v == 1.0f);
  for (float v : moving->w.data) CHECK(v != 1.0f);
}

TEST_CASE("sm0 removes the classification loss but keeps the gates") {
  Toy toy = make_toy();
  TrainConfig cfg = fast_config();
  cfg.sm0 = true;
  Model<float> model(toy.cfg, 35);
  Trainer trainer(model, cfg, toy.instances);
  StepReport r = trainer.step();
  CHECK(r.total == doctest::Approx(r.l_d));
  CHECK(r.l_e > 0.0);  // still reported, just unweighted
}

TEST_CASE("baseline step equals mechanism-free model when new arrays are zero") {
  Toy toy = make_toy();
  ModelConfig zeroed = toy.cfg;
  zeroed.init_std_new = 0.0;

  TrainConfig on_cfg = fast_config();
  on_cfg.lambda_loss = 0.0;  // keep the losses comparable
  TrainConfig off_cfg = on_cfg;
  off_cfg.ge = off_cfg.sm = off_cfg.ppi = false;

  Model<float> on_model(zeroed, 50);
  Model<float> off_model(zeroed, 50);
  Trainer on_trainer(on_model, on_cfg, toy.instances);
  Trainer off_trainer(off_model, off_cfg, toy.instances);
  StepReport r_on = on_trainer.step();
  StepReport r_off = off_trainer.step();
  CHECK(r_on.l_d == doctest::Approx(r_off.l_d).epsilon(1e-6));
}

TEST_CASE("gradcheck on the tiny double model stays under tolerance") {
  GradCheckSetup setup = make_gradcheck_setup(7);
  GradCheckReport report =
      gradcheck(setup.model_cfg, setup.train_cfg, setup.instance, 10);
  CHECK(report.passed(1e-4));
  bool saw_scaling = false, saw_dist = false, saw_group = false;
  for (const auto& e : report.entries) {
    if (e.name.rfind("scale.", 0) == 0) saw_scaling = true;
    if (e.name == "emb.dist") saw_dist = true;
    if (e.name == "emb.group_c") saw_group = true;
  }
  CHECK(saw_scaling);
  CHECK(saw_dist);
  CHECK(saw_group);
}

TEST_CASE("instance exceeding the token budget is rejected") {
  Toy toy = make_toy();
  TrainConfig cfg = fast_config();
  cfg.max_tokens = 4;
  Model<float> model(toy.cfg, 3);
  CHECK_THROWS_AS(Trainer(model, cfg, toy.instances), std::invalid_argument);
}
