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
#include "lrds/harness.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using nlohmann::json;

namespace lrds {

namespace {

bool verbose() {
  const char* v = std::getenv("LRDS_VERBOSE");
  return v && std::strcmp(v, "0") != 0;
}

void note(const std::string& msg) {
  if (verbose()) std::cerr << "[lrds] " << msg << "\n";
}

Dataset dataset_from_json(const json& j, bool test_split) {
  const std::string source = j.at("source").get<std::string>();
  if (source == "blobs") {
    BlobSpec spec;
    spec.class_count = j.value("class_count", 3);
    spec.samples_per_class =
        test_split ? j.value("test_samples_per_class", j.value("samples_per_class", 100) / 2)
                   : j.value("samples_per_class", 100);
    spec.spread = j.value("spread", 1.0);
    spec.label_noise_rate =
        test_split ? j.value("test_label_noise_rate", 0.0) : j.value("label_noise_rate", 0.0);
    spec.seed = test_split ? j.value("test_seed", j.value("seed", std::uint64_t{0}) + 1)
                           : j.value("seed", std::uint64_t{0});
    if (j.contains("centers")) {
      for (const auto& c : j.at("centers")) {
        const auto vals = c.get<std::vector<double>>();
        spec.centers.emplace_back(
            Eigen::Map<const Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size())));
      }
    }
    return gen_blobs(spec);
  }
  if (source == "csv") {
    const std::string key = test_split ? "test_path" : "path";
    if (!j.contains(key)) throw std::invalid_argument("dataset: missing " + key);
    const std::string path = j.at(key).get<std::string>();
    if (!fs::exists(path)) throw std::invalid_argument("dataset: file does not exist: " + path);
    return load_csv(path, j.value("class_count", 0));
  }
  if (source == "idx") {
    const std::string ikey = test_split ? "test_images" : "images";
    const std::string lkey = test_split ? "test_labels" : "labels";
    const std::string images = j.at(ikey).get<std::string>();
    const std::string labels = j.at(lkey).get<std::string>();
    for (const auto& p : {images, labels})
      if (!fs::exists(p)) throw std::invalid_argument("dataset: file does not exist: " + p);
    return load_idx(images, labels);
  }
  throw std::invalid_argument("dataset: unknown source " + source);
}

bool has_test_split(const json& j) {
  const std::string source = j.at("source").get<std::string>();
  if (source == "blobs") return j.value("test_samples_per_class", j.value("samples_per_class", 100) / 2) > 0;
  if (source == "csv") return j.contains("test_path");
  return j.contains("test_images");
}

ModelSpec model_spec_from_json(const json& j) {
  ModelSpec spec;
  spec.layer_dims = j.at("layer_dims").get<std::vector<int>>();
  spec.activation = j.value("activation", "relu");
  spec.init_scale = j.value("init_scale", 1.0);
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.validate();
  return spec;
}

LossSpec loss_spec_from_json(const json& j) {
  LossSpec spec;
  spec.kind = loss_kind_from_string(j.value("kind", "lrds"));
  spec.tau = j.value("tau", 4.0);
  spec.lambda1 = j.value("lambda1", 1.0);
  spec.lambda2 = j.value("lambda2", 1.0);
  spec.right_part_loss = right_part_loss_from_string(j.value("right_part_loss", "mse_logits"));
  spec.validate();
  return spec;
}

DistillConfig distill_from_json(const json& j) {
  DistillConfig cfg;
  if (j.contains("loss")) cfg.loss = loss_spec_from_json(j.at("loss"));
  if (j.contains("eta_mode")) {
    const auto& e = j.at("eta_mode");
    cfg.eta_mode = eta_mode_from_string(e.value("mode", "fixed"), e.value("value", 0.8));
  }
  cfg.pct = j.value("pct", 0.8);
  cfg.order = split_order_from_string(j.value("order", "highest_first"));
  cfg.epochs = j.value("epochs", 120);
  cfg.batch_size = j.value("batch_size", 64);
  cfg.lr0 = j.value("lr0", 0.05);
  cfg.lr_decay_epochs = j.value("lr_decay_epochs", std::vector<int>{60, 90, 105});
  cfg.lr_decay_factor = j.value("lr_decay_factor", 0.1);
  cfg.momentum = j.value("momentum", 0.9);
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.validate();
  return cfg;
}

InfluenceConfig influence_from_json(const json& j) {
  InfluenceConfig cfg;
  cfg.solver = solver_from_string(j.value("solver", "exact"));
  cfg.damping = j.value("damping", 1e-3);
  cfg.cg_max_iters = j.value("cg_max_iters", 100);
  cfg.cg_tol = j.value("cg_tol", 1e-6);
  cfg.scalarization = scalarization_from_string(j.value("scalarization", "param_norm"));
  cfg.exact_threshold = j.value("exact_threshold", 2000);
  cfg.validate();
  return cfg;
}

void ensure_out_dir(const std::string& dir) {
  if (dir.empty()) throw std::invalid_argument("config: out_dir is empty");
  fs::create_directories(dir);
}

// --- scalar_mean toy model ------------------------------------------------
// One parameter theta, per-sample loss 0.5 (theta - x)^2 over 1-D features.
// Mean Hessian is exactly 1.

double load_scalar_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_checkpoint: cannot open " + path);
  json j;
  in >> j;
  return j.at("flat_params").at(0).get<double>();
}

std::string scalar_checksum(double theta) {
  std::uint64_t bits;
  std::memcpy(&bits, &theta, sizeof bits);
  return to_hex(fnv1a64(&bits, sizeof bits));
}

std::string checkpoint_model_kind(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("checkpoint: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("checkpoint: " + std::string(e.what()));
  }
  return j.value("model_kind", "mlp");
}

}  // namespace

std::string config_hash_of(const json& j) {
  const std::string dump = j.dump();
  return to_hex(fnv1a64(dump.data(), dump.size()));
}

Experiment experiment_from_json(const json& raw, const std::string& out_override,
                                std::optional<std::uint64_t> seed_override) {
  json j = raw;
  if (!out_override.empty()) j["out_dir"] = out_override;
  if (seed_override) {
    j["distill"]["seed"] = *seed_override;
    if (j.contains("teacher_train")) j["teacher_train"]["seed"] = *seed_override;
  }

  Experiment exp;
  exp.raw = j;
  exp.config_hash = config_hash_of(j);
  exp.out_dir = j.value("out_dir", "out");

  const json& dj = j.at("dataset");
  exp.train = dataset_from_json(dj, false);
  if (has_test_split(dj)) exp.test = dataset_from_json(dj, true);

  const json& tj = j.at("teacher");
  exp.model_kind = tj.value("kind", "mlp");
  if (exp.model_kind == "mlp") {
    exp.teacher_spec = model_spec_from_json(tj);
  } else if (exp.model_kind != "scalar_mean") {
    throw std::invalid_argument("config: unknown teacher kind " + exp.model_kind);
  }
  if (j.contains("student")) exp.student_spec = model_spec_from_json(j.at("student"));

  exp.distill_cfg = distill_from_json(j.value("distill", json::object()));
  exp.teacher_cfg =
      j.contains("teacher_train") ? distill_from_json(j.at("teacher_train")) : exp.distill_cfg;
  if (seed_override && !j.contains("teacher_train")) exp.teacher_cfg.seed = *seed_override;
  exp.influence_cfg = influence_from_json(j.value("influence", json::object()));
  return exp;
}

Experiment load_experiment(const std::string& config_path, const std::string& out_override,
                           std::optional<std::uint64_t> seed_override) {
  std::ifstream in(config_path);
  if (!in) throw ParseError("config: cannot open " + config_path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("config: " + config_path + ": " + e.what());
  }
  try {
    return experiment_from_json(j, out_override, seed_override);
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: " + config_path + ": " + e.what());
  }
}

int run_teach(const Experiment& exp) {
  ensure_out_dir(exp.out_dir);
  const std::string ckpt = exp.out_dir + "/teacher.json";
  if (exp.model_kind == "scalar_mean") {
    if (exp.train.dim() != 1)
      throw ValidationError("teach: scalar_mean expects 1-D features");
    // Full-batch gradient descent on the quadratic; converges to the mean.
    double theta = 0.0;
    const double mean = exp.train.features.col(0).mean();
    const double lr = std::min(1.0, exp.teacher_cfg.lr0);
    for (int e = 0; e < 100000 && std::abs(theta - mean) > 1e-13; ++e)
      theta -= lr * (theta - mean);
    json ck;
    ck["format_version"] = 1;
    ck["model_kind"] = "scalar_mean";
    ck["flat_params"] = {theta};
    ck["config_hash"] = exp.config_hash;
    std::ofstream out(ckpt);
    out << ck.dump(2) << "\n";
    note("teach: scalar_mean theta=" + std::to_string(theta));
    return 0;
  }

  TrainLog log;
  const MLPModel teacher = train_teacher(
      exp.teacher_spec, exp.train, exp.teacher_cfg,
      exp.test ? &*exp.test : nullptr, &log);
  save_checkpoint(teacher, ckpt, exp.config_hash);
  write_trainlog_csv(exp.out_dir + "/teacher_log.csv", log, exp.config_hash);
  note("teach: train_acc=" + std::to_string(evaluate(teacher, exp.train)));
  return 0;
}

int run_score(const Experiment& exp, const std::string& teacher_path) {
  ensure_out_dir(exp.out_dir);
  const std::string kind = checkpoint_model_kind(teacher_path);
  InfluenceReport report;
  if (kind == "scalar_mean") {
    const double theta = load_scalar_checkpoint(teacher_path);
    if (exp.train.dim() != 1)
      throw ValidationError("score: scalar_mean expects 1-D features");
    report.config = exp.influence_cfg;
    report.teacher_checksum = scalar_checksum(theta);
    const Eigen::MatrixXd hess = Eigen::MatrixXd::Identity(1, 1);
    for (Eigen::Index i = 0; i < exp.train.size(); ++i) {
      Eigen::VectorXd g(1);
      g << theta - exp.train.features(i, 0);
      const Eigen::VectorXd infl = param_influence(hess, g, exp.influence_cfg);
      report.scores.push_back(exp.influence_cfg.scalarization == Scalarization::param_norm
                                  ? infl.norm()
                                  : -g.dot(infl));
    }
  } else {
    const MLPModel teacher = load_checkpoint(teacher_path);
    if (teacher.input_dim() != static_cast<int>(exp.train.dim()) ||
        teacher.class_count() != exp.train.class_count)
      throw ValidationError("score: teacher checkpoint does not match dataset dims");
    report = score_dataset(teacher, exp.train, exp.influence_cfg);
  }
  write_scores_csv(exp.out_dir + "/scores.csv", report, exp.config_hash,
                   exp.train.checksum());
  return 0;
}

int run_distill(const Experiment& exp, const std::string& teacher_path,
                const std::string& scores_path) {
  ensure_out_dir(exp.out_dir);
  if (checkpoint_model_kind(teacher_path) != "mlp")
    throw ValidationError("distill: teacher must be an mlp checkpoint");
  const MLPModel teacher = load_checkpoint(teacher_path);
  const ScoresFile scores = read_scores_csv(scores_path);

  if (!scores.report.teacher_checksum.empty() &&
      scores.report.teacher_checksum != teacher.checksum())
    throw ValidationError("distill: scores were computed for a different teacher (stale scores)");
  if (!scores.dataset_checksum.empty() && scores.dataset_checksum != exp.train.checksum())
    throw ValidationError("distill: scores were computed for a different dataset (stale scores)");
  if (scores.report.scores.size() != static_cast<std::size_t>(exp.train.size()))
    throw ValidationError("distill: scores do not cover the dataset");
  if (!exp.student_spec)
    throw std::invalid_argument("distill: config has no student section");

  const SplitPlan plan = rank_and_split(scores.report, exp.distill_cfg.pct,
                                        exp.distill_cfg.order, exp.distill_cfg.seed);
  write_split_plan(exp.out_dir + "/split_plan.json", plan, exp.config_hash);

  const RevisionCache cache = precompute_revision(teacher, exp.train, plan, exp.distill_cfg);
  write_revised_cache(exp.out_dir + "/revised_labels.csv", cache.wrong_dt_indices,
                      cache.revised_labels, exp.config_hash);

  auto [student, log] = distill(teacher, *exp.student_spec, exp.train, plan,
                                exp.distill_cfg, exp.test ? &*exp.test : nullptr);
  save_checkpoint(student, exp.out_dir + "/student.json", exp.config_hash);
  write_trainlog_csv(exp.out_dir + "/student_log.csv", log, exp.config_hash);
  if (exp.test)
    std::cout << "test_acc=" << evaluate(student, *exp.test) << "\n";
  return 0;
}

int run_eval(const Experiment& exp, const std::string& model_path) {
  const MLPModel model = load_checkpoint(model_path);
  std::cout << "train_acc=" << evaluate(model, exp.train);
  if (exp.test) std::cout << " test_acc=" << evaluate(model, *exp.test);
  std::cout << "\n";
  return 0;
}

namespace {

void apply_ablation_value(json& cfg, const std::string& parameter, const json& value) {
  if (parameter == "lambda1")
    cfg["distill"]["loss"]["lambda1"] = value.get<double>();
  else if (parameter == "lambda2")
    cfg["distill"]["loss"]["lambda2"] = value.get<double>();
  else if (parameter == "eta") {
    if (value.is_string())
      cfg["distill"]["eta_mode"] = {{"mode", value.get<std::string>()}};
    else
      cfg["distill"]["eta_mode"] = {{"mode", "fixed"}, {"value", value.get<double>()}};
  } else if (parameter == "pct")
    cfg["distill"]["pct"] = value.get<double>();
  else if (parameter == "order")
    cfg["distill"]["order"] = value.get<std::string>();
  else if (parameter == "right_part_loss")
    cfg["distill"]["loss"]["right_part_loss"] = value.get<std::string>();
  else
    throw std::invalid_argument("ablation: unknown parameter " + parameter);
}

std::string value_tag(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  std::string s = v.dump();
  for (auto& c : s)
    if (c == '.') c = 'p';
  return s;
}

}  // namespace

int run_ablate(const std::string& config_path, const std::string& ablation_path,
               const std::string& out_override) {
  std::ifstream cin_(config_path);
  if (!cin_) throw ParseError("config: cannot open " + config_path);
  json base;
  cin_ >> base;
  std::ifstream ain(ablation_path);
  if (!ain) throw ParseError("ablation: cannot open " + ablation_path);
  json ab;
  try {
    ain >> ab;
  } catch (const json::exception& e) {
    throw ParseError("ablation: " + std::string(e.what()));
  }

  const std::string parameter = ab.at("parameter").get<std::string>();
  const json values = ab.at("values");
  const auto seeds = ab.at("seeds").get<std::vector<std::uint64_t>>();
  const std::string parameter2 = ab.value("parameter2", "");
  const json values2 = ab.value("values2", json::array());
  if (values.empty() || seeds.empty())
    throw std::invalid_argument("ablation: values and seeds must be non-empty");
  if (!parameter2.empty() && values2.empty())
    throw std::invalid_argument("ablation: parameter2 given without values2");

  const std::string root =
      !out_override.empty() ? out_override : base.value("out_dir", "out");
  fs::create_directories(root);

  struct Row {
    std::string v1, v2;
    std::uint64_t seed;
    double acc = std::numeric_limits<double>::quiet_NaN();
    std::string error;
  };
  std::vector<Row> rows;
  int failures = 0, total = 0;

  for (std::uint64_t seed : seeds) {
    // Teacher and scores are shared across parameter values for this seed.
    json seed_cfg = base;
    seed_cfg["teacher"]["seed"] = seed;
    seed_cfg["teacher_train"] = seed_cfg.value("teacher_train", seed_cfg.value("distill", json::object()));
    seed_cfg["teacher_train"]["seed"] = seed;
    seed_cfg["distill"]["seed"] = seed;
    if (seed_cfg.contains("student")) seed_cfg["student"]["seed"] = seed + 1000;
    const std::string seed_dir = root + "/seed" + std::to_string(seed);
    seed_cfg["out_dir"] = seed_dir;

    std::string teacher_path = seed_dir + "/teacher.json";
    std::string scores_path = seed_dir + "/scores.csv";
    try {
      const Experiment shared = experiment_from_json(seed_cfg);
      run_teach(shared);
      run_score(shared, teacher_path);
    } catch (const std::exception& e) {
      note("ablate: seed " + std::to_string(seed) + " setup failed: " + e.what());
      // All runs of this seed fail.
      const json v2list = parameter2.empty() ? json::array({nullptr}) : values2;
      for (const auto& v1 : values)
        for (const auto& v2 : v2list) {
          rows.push_back({value_tag(v1), v2.is_null() ? "" : value_tag(v2), seed,
                          std::numeric_limits<double>::quiet_NaN(), e.what()});
          ++failures;
          ++total;
        }
      continue;
    }

    const json v2list = parameter2.empty() ? json::array({nullptr}) : values2;
    for (const auto& v1 : values) {
      for (const auto& v2 : v2list) {
        json run_cfg = seed_cfg;
        apply_ablation_value(run_cfg, parameter, v1);
        std::string tag = parameter + "=" + value_tag(v1);
        if (!v2.is_null()) {
          apply_ablation_value(run_cfg, parameter2, v2);
          tag += "_" + parameter2 + "=" + value_tag(v2);
        }
        run_cfg["out_dir"] = seed_dir + "/" + tag;
        Row row{value_tag(v1), v2.is_null() ? "" : value_tag(v2), seed, 0.0, ""};
        ++total;
        try {
          const Experiment exp = experiment_from_json(run_cfg);
          run_distill(exp, teacher_path, scores_path);
          const MLPModel student = load_checkpoint(run_cfg["out_dir"].get<std::string>() + "/student.json");
          row.acc = exp.test ? evaluate(student, *exp.test) : evaluate(student, exp.train);
        } catch (const std::exception& e) {
          row.error = e.what();
          row.acc = std::numeric_limits<double>::quiet_NaN();
          ++failures;
        }
        note("ablate: " + tag + " seed=" + std::to_string(seed) + " acc=" +
             std::to_string(row.acc));
        rows.push_back(std::move(row));
      }
    }
  }

  // Summary CSV: per-run rows, then mean/stddev rows per value combination.
  const std::string summary_path = root + "/ablation_summary.csv";
  std::ofstream out(summary_path);
  if (!out) throw ParseError("ablate: cannot open " + summary_path);
  out.precision(17);
  out << "# config " << config_hash_of(base) << "\n";
  out << "parameter,value,parameter2,value2,seed,test_acc,error\n";
  for (const auto& r : rows)
    out << parameter << "," << r.v1 << "," << parameter2 << "," << r.v2 << ","
        << r.seed << "," << r.acc << "," << r.error << "\n";

  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : rows)
    if (r.error.empty()) groups[{r.v1, r.v2}].push_back(r.acc);
  for (const auto& [key, accs] : groups) {
    double mean = 0.0;
    for (double a : accs) mean += a;
    mean /= static_cast<double>(accs.size());
    double var = 0.0;
    for (double a : accs) var += (a - mean) * (a - mean);
    const double sd = accs.size() > 1 ? std::sqrt(var / (static_cast<double>(accs.size()) - 1)) : 0.0;
    out << parameter << "," << key.first << "," << parameter2 << "," << key.second
        << ",mean," << mean << ",\n";
    out << parameter << "," << key.first << "," << parameter2 << "," << key.second
        << ",stddev," << sd << ",\n";
  }

  if (failures == total)
    throw ValidationError("ablate: every sub-run failed");
  return 0;
}

}  // namespace lrds
