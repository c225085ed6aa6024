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
#include "lrds/revision.hpp"

#include <fstream>
#include <sstream>

namespace lrds {

EtaMode eta_mode_from_string(const std::string& s, double fixed_value) {
  if (s == "fixed") return EtaMode::fixed(fixed_value);
  if (s == "teacher_max_prob") return EtaMode::teacher_max_prob();
  if (s == "teacher_target_prob") return EtaMode::teacher_target_prob();
  throw std::invalid_argument("unknown eta mode: " + s);
}

std::string to_string(const EtaMode& m) {
  switch (m.kind) {
    case EtaMode::Kind::fixed: return "fixed";
    case EtaMode::Kind::teacher_max_prob: return "teacher_max_prob";
    case EtaMode::Kind::teacher_target_prob: return "teacher_target_prob";
  }
  return "?";
}

double resolve_eta(const EtaMode& mode, const Eigen::VectorXd& p_t, int target) {
  if (target < 0 || target >= p_t.size())
    throw std::invalid_argument("resolve_eta: target out of range");
  double eta = 0.0;
  switch (mode.kind) {
    case EtaMode::Kind::fixed:
      eta = mode.value;
      break;
    case EtaMode::Kind::teacher_max_prob:
      eta = p_t.maxCoeff();
      break;
    case EtaMode::Kind::teacher_target_prob:
      eta = p_t[target];
      break;
  }
  if (!(eta > 0.0) || !(eta < 1.0))
    throw std::invalid_argument("resolve_eta: resolved eta " + std::to_string(eta) +
                                " outside (0,1)");
  return eta;
}

double compute_beta(const Eigen::VectorXd& p_t, int target, double eta) {
  if (!(eta > 0.0) || !(eta < 1.0))
    throw std::invalid_argument("compute_beta: eta must be in (0,1)");
  if (target < 0 || target >= p_t.size())
    throw std::invalid_argument("compute_beta: target out of range");
  if (!is_prob_vector(p_t))
    throw std::invalid_argument("compute_beta: p_t is not a probability vector");
  const double p_max = p_t.maxCoeff();
  return eta / (p_max - p_t[target] + 1.0);
}

RevisedLabel revise_label(const Eigen::VectorXd& p_t, int target,
                          const EtaMode& eta_mode) {
  const double eta = resolve_eta(eta_mode, p_t, target);
  const double beta = compute_beta(p_t, target, eta);
  RevisedLabel out;
  out.p = beta * p_t;
  out.p[target] += 1.0 - beta;
  out.beta = beta;
  out.target = target;
  out.teacher_pred = static_cast<int>(argmax(p_t));
  return out;
}

std::pair<std::vector<int>, std::vector<int>> partition_by_correctness(
    const std::vector<Eigen::VectorXd>& teacher_probs,
    const std::vector<int>& labels) {
  if (teacher_probs.size() != labels.size())
    throw std::invalid_argument("partition_by_correctness: length mismatch");
  std::vector<int> right, wrong;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (argmax(teacher_probs[i]) == labels[i])
      right.push_back(static_cast<int>(i));
    else
      wrong.push_back(static_cast<int>(i));
  }
  return {right, wrong};
}

void write_revised_cache(const std::string& path,
                         const std::vector<int>& sample_indices,
                         const std::vector<RevisedLabel>& labels,
                         const std::string& config_hash) {
  if (sample_indices.size() != labels.size())
    throw std::invalid_argument("write_revised_cache: length mismatch");
  std::ofstream out(path);
  if (!out) throw ParseError("write_revised_cache: cannot open " + path);
  out.precision(17);
  if (!config_hash.empty()) out << "# config " << config_hash << "\n";
  const Eigen::Index c = labels.empty() ? 0 : labels[0].p.size();
  out << "sample_index,beta";
  for (Eigen::Index j = 0; j < c; ++j) out << ",p_" << j;
  out << "\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << sample_indices[i] << "," << labels[i].beta;
    for (Eigen::Index j = 0; j < labels[i].p.size(); ++j) out << "," << labels[i].p[j];
    out << "\n";
  }
}

std::pair<std::vector<int>, std::vector<RevisedLabel>> read_revised_cache(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("read_revised_cache: cannot open " + path);
  std::string line;
  long line_no = 0;
  do {
    if (!std::getline(in, line)) throw ParseError("read_revised_cache: empty file");
    ++line_no;
  } while (!line.empty() && line[0] == '#');

  std::vector<int> indices;
  std::vector<RevisedLabel> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) {
      try {
        vals.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw ParseError("read_revised_cache: not a number: '" + tok + "'", line_no);
      }
    }
    if (vals.size() < 3) throw ParseError("read_revised_cache: too few columns", line_no);
    RevisedLabel r;
    r.beta = vals[1];
    r.p.resize(static_cast<Eigen::Index>(vals.size() - 2));
    for (std::size_t j = 2; j < vals.size(); ++j)
      r.p[static_cast<Eigen::Index>(j - 2)] = vals[j];
    r.target = static_cast<int>(argmax(r.p));
    indices.push_back(static_cast<int>(vals[0]));
    labels.push_back(std::move(r));
  }
  return {indices, labels};
}

}  // namespace lrds
