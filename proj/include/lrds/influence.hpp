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
#ifndef LRDS_INFLUENCE_HPP
#define LRDS_INFLUENCE_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "lrds/data.hpp"
#include "lrds/model.hpp"

namespace lrds {

enum class Solver { exact, conjugate_gradient };
enum class Scalarization { param_norm, self_influence };
enum class SplitOrder { highest_first, lowest_first, random };

Solver solver_from_string(const std::string& s);
Scalarization scalarization_from_string(const std::string& s);
SplitOrder split_order_from_string(const std::string& s);
std::string to_string(Solver s);
std::string to_string(Scalarization s);
std::string to_string(SplitOrder o);

struct InfluenceConfig {
  Solver solver = Solver::exact;
  double damping = 1e-3;
  int cg_max_iters = 100;
  double cg_tol = 1e-6;
  Scalarization scalarization = Scalarization::param_norm;
  int exact_threshold = 2000;  // dense-Hessian parameter cap

  void validate() const;
};

struct InfluenceReport {
  std::vector<double> scores;  // one per training sample
  InfluenceConfig config;
  std::string teacher_checksum;
};

struct SplitPlan {
  std::vector<int> dt_indices;  // teacher-supervised, in selection order
  std::vector<int> ds_indices;  // label-supervised
  double pct = 0.8;
  SplitOrder order = SplitOrder::highest_first;
  std::uint64_t seed = 0;
};

/// Matrix-free application of the (undamped) Hessian.
using LinearOp = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Conjugate gradient on (H + damping I) u = v. Throws ConvergenceError
/// (carrying the final relative residual) if the bound
/// ||(H + damping I) u - v|| <= tol ||v|| is not met within max_iters.
Eigen::VectorXd solve_damped_cg(const LinearOp& apply_hessian, double damping,
                                const Eigen::VectorXd& v, int max_iters,
                                double tol);

/// LDLT factorization of H + damping I, built once and reused across
/// right-hand sides. Every solve is residual-checked against tol.
class DenseDampedSolver {
 public:
  DenseDampedSolver(const Eigen::MatrixXd& hessian, double damping, double tol);
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const;

 private:
  Eigen::MatrixXd damped_;
  Eigen::LDLT<Eigen::MatrixXd> ldlt_;
  double tol_;
};

/// Gradient of the CE training loss at a single sample.
Eigen::VectorXd per_sample_grad(const MLPModel& teacher,
                                const Eigen::VectorXd& x, int y);

/// Solves (H + damping I) u = v with H the mean CE Hessian over data.
Eigen::VectorXd inverse_hvp(const MLPModel& teacher, const Dataset& data,
                            const Eigen::VectorXd& v, const InfluenceConfig& cfg);

/// Estimated parameter-change direction for upweighting one sample:
/// -(H + damping I)^{-1} grad(sample).
Eigen::VectorXd param_influence(const MLPModel& teacher, const Dataset& data,
                                const Eigen::VectorXd& x, int y,
                                const InfluenceConfig& cfg);

/// Same, but given an explicit damped system; used for closed-form models.
Eigen::VectorXd param_influence(const Eigen::MatrixXd& hessian,
                                const Eigen::VectorXd& grad,
                                const InfluenceConfig& cfg);

/// Estimated change in test-sample loss when the train sample is
/// upweighted: -grad(test)^T (H + damping I)^{-1} grad(train).
double prediction_influence(const MLPModel& teacher, const Dataset& data,
                            const Eigen::VectorXd& x_train, int y_train,
                            const Eigen::VectorXd& x_test, int y_test,
                            const InfluenceConfig& cfg);

/// Per-sample scalar scores over the whole dataset. The inverse-Hessian
/// context (dense factorization for the exact solver) is built once.
InfluenceReport score_dataset(const MLPModel& teacher, const Dataset& data,
                              const InfluenceConfig& cfg);

/// D^t gets round-half-up(pct * N) samples chosen by order; ties break to
/// the lower sample index; the rest go to D^s.
SplitPlan rank_and_split(const InfluenceReport& report, double pct,
                         SplitOrder order, std::uint64_t seed);

/// Scores file: CSV with columns sample_index, score, rank
/// (rank 0 = selected first under highest_first).
void write_scores_csv(const std::string& path, const InfluenceReport& report,
                      const std::string& config_hash,
                      const std::string& dataset_checksum);
struct ScoresFile {
  InfluenceReport report;
  std::string config_hash;
  std::string dataset_checksum;
};
ScoresFile read_scores_csv(const std::string& path);

void write_split_plan(const std::string& path, const SplitPlan& plan,
                      const std::string& config_hash = "");
SplitPlan read_split_plan(const std::string& path);

}  // namespace lrds

#endif  // LRDS_INFLUENCE_HPP
