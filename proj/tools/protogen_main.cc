// tools/protogen_main.cc
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

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "protogen/beam.h"
#include "protogen/checkpoint.h"
#include "protogen/gradcheck.h"
#include "protogen/index.h"
#include "protogen/manifest.h"
#include "protogen/metrics.h"
#include "protogen/model.h"
#include "protogen/text.h"
#include "protogen/trainer.h"

namespace {

using namespace protogen;

bool verbose_logging() {
  const char* env = std::getenv("PROTOGEN_LOG");
  return env == nullptr || std::string(env) != "quiet";
}

std::vector<std::string> parse_concepts(const std::string& csv) {
  std::vector<std::string> concepts;
  std::string cur;
  for (char c : csv) {
    if (c == ',') {
      if (!cur.empty()) concepts.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(char(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) concepts.push_back(cur);
  if (concepts.empty()) throw std::runtime_error("empty concept list");
  for (size_t a = 0; a < concepts.size(); ++a) {
    for (size_t b = a + 1; b < concepts.size(); ++b) {
      if (stem(concepts[a]) == stem(concepts[b])) {
        throw std::runtime_error("concepts \"" + concepts[a] + "\" and \"" +
                                 concepts[b] + "\" share a stem");
      }
    }
  }
  return concepts;
}

struct TrainCli {
  std::string data_path;
  std::string index_path;
  std::string out_path;
  std::string log_path;
  std::string preset;
  ModelConfig model;
  TrainConfig train;
};

void fill_train_manifest(RunManifest& m, const TrainCli& cli) {
  m.set("d", long(cli.model.d));
  m.set("heads", long(cli.model.heads));
  m.set("d_s", long(cli.model.d_s));
  m.set("layers_enc", long(cli.model.layers_enc));
  m.set("layers_dec", long(cli.model.layers_dec));
  m.set("d_ff", long(cli.model.d_ff));
  m.set("p_max", long(cli.model.p_max));
  m.set("d_max", long(cli.model.d_max));
  m.set("init_std_base", cli.model.init_std_base);
  m.set("init_std_new", cli.model.init_std_new);
  m.set("lambda", cli.train.lambda_loss);
  m.set("label_smoothing", cli.train.label_smoothing);
  m.set("lr", cli.train.base_lr);
  m.set("warmup", cli.train.warmup);
  m.set("max_updates", cli.train.max_updates);
  m.set("max_tokens", cli.train.max_tokens);
  m.set("beta1", cli.train.adam_beta1);
  m.set("beta2", cli.train.adam_beta2);
  m.set("dropout", cli.train.dropout);
  m.set("clip_norm", cli.train.clip_norm);
  m.set("min_freq", long(cli.train.min_freq));
  m.set("retrieve_k", long(cli.train.retrieve_k));
  m.set("ge", cli.train.ge);
  m.set("sm", cli.train.sm);
  m.set("ppi", cli.train.ppi);
  m.set("hm1", cli.train.hm1);
  m.set("hm2", cli.train.hm2);
  m.set("sm0", cli.train.sm0);
}

int run_train(const TrainCli& cli) {
  auto data = load_dataset(cli.data_path);
  std::optional<PrototypeIndex> index;
  if (!cli.index_path.empty()) index = PrototypeIndex::load(cli.index_path);

  PreparedData prep = prepare_training_data(
      data, index ? &*index : nullptr, cli.model, cli.train.min_freq,
      cli.train.retrieve_k);
  ModelConfig mcfg = cli.model;
  mcfg.vocab = prep.vocab.size();

  Model<float> model(mcfg, cli.train.seed);
  Trainer trainer(model, cli.train, prep.instances);

  const std::string log_path =
      cli.log_path.empty() ? cli.out_path + ".log.jsonl" : cli.log_path;
  std::ofstream log(log_path);
  if (!log) throw std::runtime_error("cannot write training log: " + log_path);
  const bool verbose = verbose_logging();
  trainer.run([&](const StepReport& r) {
    log << r.to_json_line() << "\n";
    if (verbose && (r.step % 100 == 0 || r.step == cli.train.max_updates)) {
      std::cerr << "step " << r.step << " l_d " << r.l_d << " l_e " << r.l_e
                << " lr " << r.lr << "\n";
    }
  });

  save_checkpoint(cli.out_path, model, cli.train.flags(), prep.vocab);

  RunManifest manifest;
  manifest.subcommand = "train";
  manifest.seed = cli.train.seed;
  fill_train_manifest(manifest, cli);
  manifest.set("vocab_size", long(prep.vocab.size()));
  manifest.inputs["data"] = cli.data_path;
  if (!cli.index_path.empty()) manifest.inputs["index"] = cli.index_path;
  manifest.outputs["checkpoint"] = cli.out_path;
  manifest.outputs["log"] = log_path;
  manifest.format_versions["checkpoint"] = Checkpoint::kFormatVersion;
  manifest.format_versions["index"] = PrototypeIndex::kFormatVersion;
  manifest.write_for(cli.out_path);
  return 0;
}

int main_impl(int argc, char** argv) {
  CLI::App app{"retrieve-and-edit concept-to-text generation"};
  app.require_subcommand(1);

  // ---- build-index ----
  auto* build_cmd = app.add_subcommand(
      "build-index", "build an inverted index over a sentence corpus");
  std::string corpus_path, index_out, corpus_label = "in-domain";
  build_cmd->add_option("--corpus", corpus_path, "plain-text corpus, one sentence per line")
      ->required();
  build_cmd->add_option("--out", index_out, "index output path")->required();
  build_cmd->add_option("--label", corpus_label, "corpus label stored in the index");

  // ---- retrieve ----
  auto* retrieve_cmd =
      app.add_subcommand("retrieve", "retrieve prototypes for a concept set");
  std::string retrieve_index, retrieve_concepts, retrieve_exclude;
  int retrieve_k = 1;
  retrieve_cmd->add_option("--index", retrieve_index, "index file")->required();
  retrieve_cmd->add_option("--concepts", retrieve_concepts, "comma-separated concepts")
      ->required();
  retrieve_cmd->add_option("--k", retrieve_k, "number of results");
  retrieve_cmd->add_option("--exclude", retrieve_exclude,
                           "skip sentences token-equal to this text");

  // ---- train ----
  TrainCli tc;
  auto* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--data", tc.data_path, "training JSONL")->required();
  train_cmd->add_option("--index", tc.index_path,
                        "prototype index (fills missing prototypes)");
  train_cmd->add_option("--out", tc.out_path, "checkpoint output path")->required();
  train_cmd->add_option("--log", tc.log_path,
                        "step-report JSONL path (default <out>.log.jsonl)");
  train_cmd->add_option("--d", tc.model.d, "model width")->capture_default_str();
  train_cmd->add_option("--heads", tc.model.heads, "attention heads")
      ->capture_default_str();
  train_cmd->add_option("--d-s", tc.model.d_s, "scaling-module hidden width")
      ->capture_default_str();
  train_cmd->add_option("--layers-enc", tc.model.layers_enc, "encoder layers")
      ->capture_default_str();
  train_cmd->add_option("--layers-dec", tc.model.layers_dec, "decoder layers")
      ->capture_default_str();
  train_cmd->add_option("--d-ff", tc.model.d_ff, "feed-forward width")
      ->capture_default_str();
  train_cmd->add_option("--p-max", tc.model.p_max, "max sequence length")
      ->capture_default_str();
  train_cmd->add_option("--d-max", tc.model.d_max, "distance clamp")
      ->capture_default_str();
  train_cmd->add_option("--init-std", tc.model.init_std_new,
                        "init std for group/scaling/distance arrays")
      ->capture_default_str();
  train_cmd->add_option("--init-std-base", tc.model.init_std_base,
                        "init std for the transformer body")
      ->capture_default_str();
  train_cmd->add_option("--lambda", tc.train.lambda_loss,
                        "weight of the encoder classification loss")
      ->capture_default_str();
  train_cmd->add_option("--label-smoothing", tc.train.label_smoothing,
                        "label smoothing")
      ->capture_default_str();
  train_cmd->add_option("--lr", tc.train.base_lr, "base learning rate")
      ->capture_default_str();
  train_cmd->add_option("--warmup", tc.train.warmup, "warmup steps")
      ->capture_default_str();
  train_cmd->add_option("--max-updates", tc.train.max_updates, "update count")
      ->capture_default_str();
  train_cmd->add_option("--max-tokens", tc.train.max_tokens,
                        "token budget per batch")
      ->capture_default_str();
  train_cmd->add_option("--beta1", tc.train.adam_beta1, "Adam beta1")
      ->capture_default_str();
  train_cmd->add_option("--beta2", tc.train.adam_beta2, "Adam beta2")
      ->capture_default_str();
  train_cmd->add_option("--dropout", tc.train.dropout, "dropout rate")
      ->capture_default_str();
  train_cmd->add_option("--clip-norm", tc.train.clip_norm,
                        "gradient clipping (0 = off)")
      ->capture_default_str();
  train_cmd->add_option("--seed", tc.train.seed, "random seed")
      ->capture_default_str();
  train_cmd->add_option("--min-freq", tc.train.min_freq,
                        "vocabulary frequency cut")
      ->capture_default_str();
  train_cmd->add_option("--k", tc.train.retrieve_k,
                        "prototypes retrieved per instance")
      ->capture_default_str();
  auto* ge_opt = train_cmd->add_flag("--ge,!--no-ge", tc.train.ge,
                                     "group embeddings (default on)");
  auto* sm_opt = train_cmd->add_flag("--sm,!--no-sm", tc.train.sm,
                                     "scaling module (default on)");
  auto* ppi_opt = train_cmd->add_flag("--ppi,!--no-ppi", tc.train.ppi,
                                      "prototype position indicator (default on)");
  train_cmd->add_flag("--hm1", tc.train.hm1, "hard mask: hide all prototype states");
  train_cmd->add_flag("--hm2", tc.train.hm2,
                      "hard mask: hide non-concept prototype states");
  train_cmd->add_flag("--sm0", tc.train.sm0,
                      "scaling module without its classification loss");
  train_cmd->add_option("--preset", tc.preset,
                        "flag bundle: bart (no mechanisms) or eki (all)")
      ->check(CLI::IsMember({"bart", "eki"}));

  // ---- generate ----
  auto* gen_cmd = app.add_subcommand("generate", "generate a sentence");
  std::string gen_ckpt, gen_index, gen_concepts, gen_prototype, gen_out;
  int gen_beam = 5, gen_max_len = 32;
  gen_cmd->add_option("--ckpt", gen_ckpt, "checkpoint")->required();
  gen_cmd->add_option("--index", gen_index, "prototype index");
  gen_cmd->add_option("--concepts", gen_concepts, "comma-separated concepts")
      ->required();
  gen_cmd->add_option("--prototype", gen_prototype,
                      "use this prototype instead of retrieving");
  gen_cmd->add_option("--beam", gen_beam, "beam size")->capture_default_str();
  gen_cmd->add_option("--max-len", gen_max_len, "generation length cap")
      ->capture_default_str();
  gen_cmd->add_option("--out", gen_out, "also write the sentence to this file");

  // ---- evaluate ----
  auto* eval_cmd = app.add_subcommand("evaluate", "score a model on a dataset");
  std::string eval_ckpt, eval_data, eval_index, eval_report;
  int eval_beam = 5, eval_max_len = 32;
  eval_cmd->add_option("--ckpt", eval_ckpt, "checkpoint")->required();
  eval_cmd->add_option("--data", eval_data, "evaluation JSONL")->required();
  eval_cmd->add_option("--index", eval_index, "prototype index");
  eval_cmd->add_option("--report", eval_report, "EvalReport JSON output path");
  eval_cmd->add_option("--beam", eval_beam, "beam size")->capture_default_str();
  eval_cmd->add_option("--max-len", eval_max_len, "generation length cap")
      ->capture_default_str();

  // ---- gradcheck ----
  auto* grad_cmd =
      app.add_subcommand("gradcheck", "finite-difference gradient check");
  std::string grad_config = "tiny";
  uint64_t grad_seed = 7;
  double grad_tol = 1e-4;
  int grad_coords = 50;
  grad_cmd->add_option("--config", grad_config, "tiny | desk")
      ->check(CLI::IsMember({"tiny", "desk"}))
      ->capture_default_str();
  grad_cmd->add_option("--seed", grad_seed, "model seed")->capture_default_str();
  grad_cmd->add_option("--tolerance", grad_tol, "max relative error")
      ->capture_default_str();
  grad_cmd->add_option("--coords", grad_coords, "sampled coordinates per array")
      ->capture_default_str();

  // ---- stats ----
  auto* stats_cmd = app.add_subcommand(
      "stats", "co-occurrence histogram of retrieved prototypes vs targets");
  std::string stats_data, stats_index;
  stats_cmd->add_option("--data", stats_data, "dataset JSONL")->required();
  stats_cmd->add_option("--index", stats_index, "prototype index")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  }

  if (build_cmd->parsed()) {
    auto lines = load_corpus_lines(corpus_path);
    PrototypeIndex index = PrototypeIndex::build(lines, corpus_label);
    index.save(index_out);
    RunManifest manifest;
    manifest.subcommand = "build-index";
    manifest.set("label", corpus_label);
    manifest.set("sentences", long(index.sentences().size()));
    manifest.inputs["corpus"] = corpus_path;
    manifest.outputs["index"] = index_out;
    manifest.format_versions["index"] = PrototypeIndex::kFormatVersion;
    manifest.write_for(index_out);
    std::cout << "indexed " << index.sentences().size() << " sentences ("
              << index.postings().size() << " stems)\n";
    return 0;
  }

  if (retrieve_cmd->parsed()) {
    PrototypeIndex index = PrototypeIndex::load(retrieve_index);
    auto concepts = parse_concepts(retrieve_concepts);
    std::optional<std::string> exclude;
    if (!retrieve_exclude.empty()) exclude = retrieve_exclude;
    auto results = index.retrieve(concepts, retrieve_k, exclude);
    for (const auto& r : results) {
      nlohmann::json j;
      j["id"] = r.sentence_id;
      j["score"] = r.score;
      j["matched"] = r.matched_concepts;
      j["sentence"] = join_tokens(r.tokens);
      std::cout << j.dump() << "\n";
    }
    return 0;
  }

  if (train_cmd->parsed()) {
    if (!tc.preset.empty()) {
      const bool on = tc.preset == "eki";
      if (ge_opt->count() == 0) tc.train.ge = on;
      if (sm_opt->count() == 0) tc.train.sm = on;
      if (ppi_opt->count() == 0) tc.train.ppi = on;
    }
    tc.train.validate();
    return run_train(tc);
  }

  if (gen_cmd->parsed()) {
    Checkpoint ckpt = load_checkpoint(gen_ckpt);
    auto concepts = parse_concepts(gen_concepts);
    std::vector<std::string> prototype;
    if (!gen_prototype.empty()) {
      prototype = tokenize(gen_prototype);
    } else if (!gen_index.empty()) {
      PrototypeIndex index = PrototypeIndex::load(gen_index);
      auto results = index.retrieve(concepts, 1);
      if (!results.empty()) prototype = results.front().tokens;
    }
    EncodedInput src =
        encode_input(concepts, prototype, ckpt.vocab, ckpt.config);
    BeamConfig bc;
    bc.beam_size = gen_beam;
    bc.max_len = gen_max_len;
    auto tokens =
        generate_tokens(*ckpt.model, src, ckpt.vocab, ckpt.flags, bc);
    const std::string sentence = join_tokens(tokens);
    std::cout << sentence << "\n";
    if (!gen_out.empty()) {
      std::ofstream out(gen_out);
      if (!out) throw std::runtime_error("cannot write output: " + gen_out);
      out << sentence << "\n";
      RunManifest manifest;
      manifest.subcommand = "generate";
      manifest.seed = ckpt.seed;
      manifest.set("beam", long(gen_beam));
      manifest.set("max_len", long(gen_max_len));
      manifest.set("concepts", gen_concepts);
      manifest.inputs["checkpoint"] = gen_ckpt;
      if (!gen_index.empty()) manifest.inputs["index"] = gen_index;
      manifest.outputs["sentence"] = gen_out;
      manifest.write_for(gen_out);
    }
    return 0;
  }

  if (eval_cmd->parsed()) {
    Checkpoint ckpt = load_checkpoint(eval_ckpt);
    auto data = load_dataset(eval_data);
    std::optional<PrototypeIndex> index;
    if (!eval_index.empty()) index = PrototypeIndex::load(eval_index);
    BeamConfig bc;
    bc.beam_size = eval_beam;
    bc.max_len = eval_max_len;
    EvalReport report = evaluate(*ckpt.model, ckpt.flags, ckpt.vocab, data,
                                 index ? &*index : nullptr, bc);
    std::cout << report.to_json() << "\n";
    if (!eval_report.empty()) {
      std::ofstream out(eval_report);
      if (!out) {
        throw std::runtime_error("cannot write report: " + eval_report);
      }
      out << report.to_json() << "\n";
      RunManifest manifest;
      manifest.subcommand = "evaluate";
      manifest.seed = ckpt.seed;
      manifest.set("beam", long(eval_beam));
      manifest.set("max_len", long(eval_max_len));
      manifest.inputs["checkpoint"] = eval_ckpt;
      manifest.inputs["data"] = eval_data;
      if (!eval_index.empty()) manifest.inputs["index"] = eval_index;
      manifest.outputs["report"] = eval_report;
      manifest.format_versions["checkpoint"] = Checkpoint::kFormatVersion;
      manifest.write_for(eval_report);
    }
    return 0;
  }

  if (grad_cmd->parsed()) {
    GradCheckSetup setup = make_gradcheck_setup(grad_seed);
    if (grad_config == "desk") {
      ModelConfig desk;  // default desk-scale dimensions
      desk.vocab = setup.model_cfg.vocab;
      desk.init_std_new = setup.model_cfg.init_std_new;
      setup.model_cfg = desk;
    }
    GradCheckReport report = gradcheck(setup.model_cfg, setup.train_cfg,
                                       setup.instance, grad_coords);
    std::printf("%-18s %8s %14s\n", "array", "checked", "max_rel_err");
    for (const auto& e : report.entries) {
      std::printf("%-18s %8d %14.3e\n", e.name.c_str(), e.checked,
                  e.max_rel_err);
    }
    std::printf("overall max relative error: %.3e (tolerance %.1e)\n",
                report.max_rel_err, grad_tol);
    if (!report.passed(grad_tol)) {
      for (const auto& e : report.entries) {
        if (e.max_rel_err >= grad_tol) {
          std::cerr << "gradcheck failure: array " << e.name << " index "
                    << e.worst_index << " analytic " << e.analytic
                    << " numeric " << e.numeric << "\n";
        }
      }
      return 1;
    }
    return 0;
  }

  if (stats_cmd->parsed()) {
    auto data = load_dataset(stats_data);
    PrototypeIndex index = PrototypeIndex::load(stats_index);
    std::vector<std::pair<RetrievalResult, std::vector<std::string>>> pairs;
    for (const auto& inst : data) {
      auto results = index.retrieve(inst.concepts, 1, join_tokens(inst.target));
      if (!results.empty()) pairs.emplace_back(results.front(), inst.target);
    }
    CooccurrenceHistogram h = cooccurrence_histogram(pairs);
    std::cout << "corpus: " << index.label() << "\n";
    std::cout << "retrieved prototypes: " << pairs.size() << " of "
              << data.size() << " instances\n";
    std::cout << "co-occurring concepts   1       2       3       4       5\n";
    std::printf("counts            %7ld %7ld %7ld %7ld %7ld\n", h.buckets[0],
                h.buckets[1], h.buckets[2], h.buckets[3], h.buckets[4]);
    std::cout << "(zero co-occurrences: " << h.zero << ")\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return main_impl(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
