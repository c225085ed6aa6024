/*
 * Copyright 2026 LRDS Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lrds/harness.hpp"

namespace {

// Exit codes: 0 success, 2 usage/config error, 3 validation error,
// 4 numerical error.
constexpr int kUsageError = 2;
constexpr int kValidationError = 3;
constexpr int kNumericalError = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge distillation with label revision and influence-based data selection"};
  app.require_subcommand(1);

  std::string config_path, teacher_path, scores_path, model_path, ablation_path, out_dir;
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Experiment config JSON")->required();
    cmd->add_option("--out", out_dir, "Output directory (overrides config)");
    cmd->add_option("--seed", seed, "Training seed (overrides config)");
  };

  CLI::App* teach = app.add_subcommand("teach", "Train the teacher model");
  add_common(teach);

  CLI::App* score = app.add_subcommand("score", "Influence-score the training set");
  add_common(score);
  score->add_option("--teacher", teacher_path, "Teacher checkpoint")->required();

  CLI::App* distill = app.add_subcommand("distill", "Distill a student with LR and DS");
  add_common(distill);
  distill->add_option("--teacher", teacher_path, "Teacher checkpoint")->required();
  distill->add_option("--scores", scores_path, "Scores CSV from the score stage")->required();

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  add_common(eval);
  eval->add_option("--model", model_path, "Model checkpoint")->required();

  CLI::App* ablate = app.add_subcommand("ablate", "Run an ablation sweep");
  add_common(ablate);
  ablate->add_option("--ablation", ablation_path, "Ablation spec JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (ablate->parsed()) return lrds::run_ablate(config_path, ablation_path, out_dir);
    const lrds::Experiment exp = lrds::load_experiment(config_path, out_dir, seed);
    if (teach->parsed()) return lrds::run_teach(exp);
    if (score->parsed()) return lrds::run_score(exp, teacher_path);
    if (distill->parsed()) return lrds::run_distill(exp, teacher_path, scores_path);
    if (eval->parsed()) return lrds::run_eval(exp, model_path);
  } catch (const lrds::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidationError;
  } catch (const lrds::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const lrds::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}
