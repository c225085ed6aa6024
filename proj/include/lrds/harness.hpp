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
#ifndef LRDS_HARNESS_HPP
#define LRDS_HARNESS_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "lrds/trainer.hpp"

namespace lrds {

/// A fully resolved experiment: datasets loaded, sub-configs validated.
struct Experiment {
  nlohmann::json raw;
  std::string config_hash;
  std::string out_dir;
  Dataset train;
  std::optional<Dataset> test;
  std::string model_kind;  // "mlp" or "scalar_mean"
  ModelSpec teacher_spec;  // mlp only
  std::optional<ModelSpec> student_spec;
  DistillConfig distill_cfg;
  DistillConfig teacher_cfg;  // optimizer settings for teacher training
  InfluenceConfig influence_cfg;
};

Experiment experiment_from_json(const nlohmann::json& raw,
                                const std::string& out_override = "",
                                std::optional<std::uint64_t> seed_override = {});
Experiment load_experiment(const std::string& config_path,
                           const std::string& out_override = "",
                           std::optional<std::uint64_t> seed_override = {});

/// Pipeline stages. Each writes its artifacts under exp.out_dir and
/// returns 0 on success; failures are reported by exception.
int run_teach(const Experiment& exp);
int run_score(const Experiment& exp, const std::string& teacher_path);
int run_distill(const Experiment& exp, const std::string& teacher_path,
                const std::string& scores_path);
int run_eval(const Experiment& exp, const std::string& model_path);

/// Ablation sweep: runs teach -> score once per seed, then distill per
/// parameter value (optionally crossed with a second parameter), and
/// writes a plot-ready summary CSV with per-run rows plus mean/stddev
/// rows per value.
int run_ablate(const std::string& config_path, const std::string& ablation_path,
               const std::string& out_override = "");

/// Hash of the canonical serialization of a JSON document.
std::string config_hash_of(const nlohmann::json& j);

}  // namespace lrds

#endif  // LRDS_HARNESS_HPP
