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
#include "lrds/influence.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace lrds {

Solver solver_from_string(const std::string& s) {
  if (s == "exact") return Solver::exact;
  if (s == "conjugate_gradient") return Solver::conjugate_gradient;
  throw std::invalid_argument("unknown solver: " + s);
}

Scalarization scalarization_from_string(const std::string& s) {
  if (s == "param_norm") return Scalarization::param_norm;
  if (s == "self_influence") return Scalarization::self_influence;
  throw std::invalid_argument("unknown scalarization: " + s);
}

SplitOrder split_order_from_string(const std::string& s) {
  if (s == "highest_first") return SplitOrder::highest_first;
  if (s == "lowest_first") return SplitOrder::lowest_first;
  if (s == "random") return SplitOrder::random;
  throw std::invalid_argument("unknown split order: " + s);
}

std::string to_string(Solver s) {
  return s == Solver::exact ? "exact" : "conjugate_gradient";
}
std::string to_string(Scalarization s) {
  return s == Scalarization::param_norm ? "param_norm" : "self_influence";
}
std::string to_string(SplitOrder o) {
  switch (o) {
    case SplitOrder::highest_first: return "highest_first";
    case SplitOrder::lowest_first: return "lowest_first";
    case SplitOrder::random: return "random";
  }
  return "?";
}

void InfluenceConfig::validate() const {
  if (damping < 0.0) throw std::invalid_argument("InfluenceConfig: damping must be >= 0");
  if (cg_max_iters < 1) throw std::invalid_argument("InfluenceConfig: cg_max_iters must be >= 1");
  if (!(cg_tol > 0.0)) throw std::invalid_argument("InfluenceConfig: cg_tol must be > 0");
  if (exact_threshold < 1)
    throw std::invalid_argument("InfluenceConfig: exact_threshold must be >= 1");
}

Eigen::VectorXd solve_damped_cg(const LinearOp& apply_hessian, double damping,
                                const Eigen::VectorXd& v, int max_iters,
                                double tol) {
  const double vnorm = v.norm();
  if (vnorm == 0.0) return Eigen::VectorXd::Zero(v.size());

  const auto apply = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return apply_hessian(u) + damping * u;
  };

  Eigen::VectorXd u = Eigen::VectorXd::Zero(v.size());
  Eigen::VectorXd r = v;
  Eigen::VectorXd p = r;
  double rs = r.squaredNorm();
  for (int it = 0; it < max_iters; ++it) {
    if (std::sqrt(rs) <= tol * vnorm) break;
    const Eigen::VectorXd ap = apply(p);
    const double pap = p.dot(ap);
    if (!(pap > 0.0))
      throw NumericalError("solve_damped_cg: operator not positive definite (p^T A p = " +
                           std::to_string(pap) + ")");
    const double alpha = rs / pap;
    u += alpha * p;
    r -= alpha * ap;
    const double rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  // Recompute the true residual; the recurrence can drift.
  const double resid = (apply(u) - v).norm();
  if (resid > tol * vnorm)
    throw ConvergenceError("solve_damped_cg: residual " + std::to_string(resid / vnorm) +
                               " above tolerance after " + std::to_string(max_iters) +
                               " iterations",
                           resid / vnorm);
  return u;
}

DenseDampedSolver::DenseDampedSolver(const Eigen::MatrixXd& hessian,
                                     double damping, double tol)
    : damped_(hessian), tol_(tol) {
  if (damped_.rows() != damped_.cols())
    throw std::invalid_argument("DenseDampedSolver: Hessian must be square");
  damped_.diagonal().array() += damping;
  ldlt_.compute(damped_);
  if (ldlt_.info() != Eigen::Success)
    throw NumericalError("DenseDampedSolver: LDLT factorization failed");
}

Eigen::VectorXd DenseDampedSolver::solve(const Eigen::VectorXd& v) const {
  if (v.size() != damped_.rows())
    throw std::invalid_argument("DenseDampedSolver: dimension mismatch");
  const double vnorm = v.norm();
  if (vnorm == 0.0) return Eigen::VectorXd::Zero(v.size());
  Eigen::VectorXd u = ldlt_.solve(v);
  const double resid = (damped_ * u - v).norm();
  if (resid > tol_ * vnorm)
    throw NumericalError("DenseDampedSolver: residual " + std::to_string(resid / vnorm) +
                         " above tolerance (singular damped Hessian?)");
  return u;
}

namespace {

TrainBatch full_batch(const Dataset& data) {
  TrainBatch b;
  b.x = data.features;
  b.y = data.labels;
  return b;
}

LossSpec ce_spec() {
  LossSpec s;
  s.kind = LossKind::ce;
  return s;
}

/// Damped-solve context shared across right-hand sides.
std::function<Eigen::VectorXd(const Eigen::VectorXd&)> make_solver(
    const MLPModel& teacher, const Dataset& data, const InfluenceConfig& cfg) {
  cfg.validate();
  const TrainBatch batch = full_batch(data);
  if (cfg.solver == Solver::exact) {
    const Eigen::MatrixXd h =
        exact_hessian(teacher, batch, ce_spec(), cfg.exact_threshold);
    auto dense = std::make_shared<DenseDampedSolver>(h, cfg.damping, cfg.cg_tol);
    return [dense](const Eigen::VectorXd& v) { return dense->solve(v); };
  }
  auto model = std::make_shared<MLPModel>(teacher);
  auto batch_ptr = std::make_shared<TrainBatch>(batch);
  return [model, batch_ptr, cfg](const Eigen::VectorXd& v) {
    const LinearOp op = [&](const Eigen::VectorXd& u) {
      return hvp(*model, *batch_ptr, u, ce_spec());
    };
    return solve_damped_cg(op, cfg.damping, v, cfg.cg_max_iters, cfg.cg_tol);
  };
}

}  // namespace

Eigen::VectorXd per_sample_grad(const MLPModel& teacher, const Eigen::VectorXd& x,
                                int y) {
  TrainBatch b;
  b.x = x.transpose();
  b.y = {y};
  return loss_and_grad(teacher, b, ce_spec()).second;
}

Eigen::VectorXd inverse_hvp(const MLPModel& teacher, const Dataset& data,
                            const Eigen::VectorXd& v, const InfluenceConfig& cfg) {
  if (v.size() != teacher.param_count())
    throw std::invalid_argument("inverse_hvp: dimension mismatch");
  if (!v.allFinite()) throw std::invalid_argument("inverse_hvp: non-finite input");
  return make_solver(teacher, data, cfg)(v);
}

Eigen::VectorXd param_influence(const MLPModel& teacher, const Dataset& data,
                                const Eigen::VectorXd& x, int y,
                                const InfluenceConfig& cfg) {
  return -inverse_hvp(teacher, data, per_sample_grad(teacher, x, y), cfg);
}

Eigen::VectorXd param_influence(const Eigen::MatrixXd& hessian,
                                const Eigen::VectorXd& grad,
                                const InfluenceConfig& cfg) {
  cfg.validate();
  DenseDampedSolver solver(hessian, cfg.damping, cfg.cg_tol);
  return -solver.solve(grad);
}

double prediction_influence(const MLPModel& teacher, const Dataset& data,
                            const Eigen::VectorXd& x_train, int y_train,
                            const Eigen::VectorXd& x_test, int y_test,
                            const InfluenceConfig& cfg) {
  const Eigen::VectorXd g_test = per_sample_grad(teacher, x_test, y_test);
  const Eigen::VectorXd u =
      inverse_hvp(teacher, data, per_sample_grad(teacher, x_train, y_train), cfg);
  return -g_test.dot(u);
}

InfluenceReport score_dataset(const MLPModel& teacher, const Dataset& data,
                              const InfluenceConfig& cfg) {
  cfg.validate();
  data.validate();
  if (data.class_count != teacher.class_count() || data.dim() != teacher.input_dim())
    throw std::invalid_argument("score_dataset: teacher/dataset shape mismatch");

  const auto solve = make_solver(teacher, data, cfg);
  InfluenceReport report;
  report.config = cfg;
  report.teacher_checksum = teacher.checksum();
  report.scores.resize(static_cast<std::size_t>(data.size()));
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const Eigen::VectorXd g = per_sample_grad(
        teacher, data.features.row(i).transpose(), data.labels[static_cast<std::size_t>(i)]);
    const Eigen::VectorXd u = solve(g);
    const double score = cfg.scalarization == Scalarization::param_norm
                             ? u.norm()
                             : g.dot(u);
    if (!std::isfinite(score))
      throw NumericalError("score_dataset: non-finite score at sample " + std::to_string(i));
    report.scores[static_cast<std::size_t>(i)] = score;
  }
  return report;
}

SplitPlan rank_and_split(const InfluenceReport& report, double pct,
                         SplitOrder order, std::uint64_t seed) {
  if (pct < 0.0 || pct > 1.0)
    throw std::invalid_argument("rank_and_split: pct must be in [0,1]");
  const int n = static_cast<int>(report.scores.size());
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  switch (order) {
    case SplitOrder::highest_first:
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return report.scores[static_cast<std::size_t>(a)] >
               report.scores[static_cast<std::size_t>(b)];
      });
      break;
    case SplitOrder::lowest_first:
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return report.scores[static_cast<std::size_t>(a)] <
               report.scores[static_cast<std::size_t>(b)];
      });
      break;
    case SplitOrder::random: {
      SeededRng rng(seed);
      rng.shuffle(idx);
      break;
    }
  }
  const int k = static_cast<int>(std::floor(pct * n + 0.5));
  SplitPlan plan;
  plan.dt_indices.assign(idx.begin(), idx.begin() + k);
  plan.ds_indices.assign(idx.begin() + k, idx.end());
  plan.pct = pct;
  plan.order = order;
  plan.seed = seed;
  return plan;
}

void write_scores_csv(const std::string& path, const InfluenceReport& report,
                      const std::string& config_hash,
                      const std::string& dataset_checksum) {
  std::ofstream out(path);
  if (!out) throw ParseError("write_scores_csv: cannot open " + path);
  out.precision(17);
  if (!config_hash.empty()) out << "# config " << config_hash << "\n";
  out << "# teacher " << report.teacher_checksum << "\n";
  if (!dataset_checksum.empty()) out << "# dataset " << dataset_checksum << "\n";
  out << "sample_index,score,rank\n";
  const int n = static_cast<int>(report.scores.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return report.scores[static_cast<std::size_t>(a)] >
           report.scores[static_cast<std::size_t>(b)];
  });
  std::vector<int> rank(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;
  for (int i = 0; i < n; ++i)
    out << i << "," << report.scores[static_cast<std::size_t>(i)] << ","
        << rank[static_cast<std::size_t>(i)] << "\n";
}

ScoresFile read_scores_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("read_scores_csv: cannot open " + path);
  ScoresFile file;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line);
      std::string hash_mark, key, value;
      ss >> hash_mark >> key >> value;
      if (key == "config") file.config_hash = value;
      if (key == "teacher") file.report.teacher_checksum = value;
      if (key == "dataset") file.dataset_checksum = value;
      continue;
    }
    if (line.rfind("sample_index", 0) == 0) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<std::string> toks;
    while (std::getline(ss, tok, ',')) toks.push_back(tok);
    if (toks.size() != 3) throw ParseError("read_scores_csv: expected 3 columns", line_no);
    const std::size_t i = static_cast<std::size_t>(std::stol(toks[0]));
    if (file.report.scores.size() <= i) file.report.scores.resize(i + 1);
    file.report.scores[i] = std::stod(toks[1]);
  }
  if (file.report.scores.empty()) throw ParseError("read_scores_csv: no scores in " + path);
  return file;
}

void write_split_plan(const std::string& path, const SplitPlan& plan,
                      const std::string& config_hash) {
  nlohmann::json j;
  j["pct"] = plan.pct;
  j["order"] = to_string(plan.order);
  j["seed"] = plan.seed;
  j["dt_indices"] = plan.dt_indices;
  j["ds_indices"] = plan.ds_indices;
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  std::ofstream out(path);
  if (!out) throw ParseError("write_split_plan: cannot open " + path);
  out << j.dump(2) << "\n";
}

SplitPlan read_split_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("read_split_plan: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("read_split_plan: " + std::string(e.what()));
  }
  SplitPlan plan;
  plan.pct = j.at("pct").get<double>();
  plan.order = split_order_from_string(j.at("order").get<std::string>());
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.dt_indices = j.at("dt_indices").get<std::vector<int>>();
  plan.ds_indices = j.at("ds_indices").get<std::vector<int>>();
  return plan;
}

}  // namespace lrds
