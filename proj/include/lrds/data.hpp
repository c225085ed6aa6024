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
#ifndef LRDS_DATA_HPP
#define LRDS_DATA_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "lrds/errors.hpp"

namespace lrds {

/// 64-bit FNV-1a, the content hash used for all checksums in this project.
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string to_hex(std::uint64_t h);

struct Dataset {
  Eigen::MatrixXd features;  // N x d, one row per sample
  std::vector<int> labels;   // values in [0, class_count)
  int class_count = 0;
  std::string name;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }

  /// Throws std::invalid_argument if the invariants do not hold.
  void validate() const;

  /// Hash of a canonical little-endian byte serialization of
  /// (N, d, C, features row-major, labels); stable across platforms.
  std::string checksum() const;
};

struct BlobSpec {
  int class_count = 3;
  int samples_per_class = 100;
  std::vector<Eigen::VectorXd> centers;  // empty -> evenly spaced on a circle
  double spread = 1.0;
  double label_noise_rate = 0.0;
  std::uint64_t seed = 0;
};

/// Gaussian clusters, one per class. Exactly round(noise_rate * N) labels
/// are reassigned to a uniformly random different class.
Dataset gen_blobs(const BlobSpec& spec);

/// CSV with header "f0,...,f{d-1},label". class_count is inferred as
/// 1 + max label unless class_count_override > 0.
Dataset load_csv(const std::string& path, int class_count_override = 0);
void save_csv(const Dataset& data, const std::string& path);

/// Big-endian IDX pair (images magic 0x00000803, labels magic 0x00000801).
/// Pixels are flattened row-major and scaled to [0,1] by /255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace lrds

#endif  // LRDS_DATA_HPP
