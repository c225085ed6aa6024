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
#ifndef LRDS_REVISION_HPP
#define LRDS_REVISION_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "lrds/numcore.hpp"

namespace lrds {

/// How the revision coefficient eta is chosen per sample.
struct EtaMode {
  enum class Kind { fixed, teacher_max_prob, teacher_target_prob };
  Kind kind = Kind::fixed;
  double value = 0.8;  // only used for fixed

  static EtaMode fixed(double v) { return {Kind::fixed, v}; }
  static EtaMode teacher_max_prob() { return {Kind::teacher_max_prob, 0.0}; }
  static EtaMode teacher_target_prob() { return {Kind::teacher_target_prob, 0.0}; }
};

EtaMode eta_mode_from_string(const std::string& s, double fixed_value);
std::string to_string(const EtaMode& m);

struct RevisedLabel {
  Eigen::VectorXd p;     // revised soft label, on the simplex
  double beta = 0.0;     // blend weight actually used
  int target = 0;        // ground-truth class
  int teacher_pred = 0;  // teacher argmax before revision
};

/// eta resolved per sample: fixed value, or the teacher's max / target
/// probability. Values outside (0,1) are rejected: at eta >= 1 the argmax
/// guarantee degenerates to a tie, at eta <= 0 the blend collapses.
double resolve_eta(const EtaMode& mode, const Eigen::VectorXd& p_t, int target);

/// beta = eta / (p_max - p_target + 1). Guarantees beta in (eta/2, eta].
double compute_beta(const Eigen::VectorXd& p_t, int target, double eta);

/// p = beta * p_t + (1 - beta) * onehot(target). The revised argmax always
/// lands on the target, and non-target entries keep their relative order.
RevisedLabel revise_label(const Eigen::VectorXd& p_t, int target,
                          const EtaMode& eta_mode);

/// Sample i is "right" iff argmax(teacher_probs[i]) == labels[i].
/// Both index lists preserve input order.
std::pair<std::vector<int>, std::vector<int>> partition_by_correctness(
    const std::vector<Eigen::VectorXd>& teacher_probs,
    const std::vector<int>& labels);

/// Revised-label cache: CSV with columns sample_index, beta, p_0..p_{C-1}.
void write_revised_cache(const std::string& path,
                         const std::vector<int>& sample_indices,
                         const std::vector<RevisedLabel>& labels,
                         const std::string& config_hash = "");
std::pair<std::vector<int>, std::vector<RevisedLabel>> read_revised_cache(
    const std::string& path);

}  // namespace lrds

#endif  // LRDS_REVISION_HPP
