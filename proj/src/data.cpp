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
#include "lrds/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lrds/numcore.hpp"

namespace lrds {

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string to_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

namespace {

void append_u64_le(std::string& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void append_f64_le(std::string& buf, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, sizeof bits);
  append_u64_le(buf, bits);
}

}  // namespace

void Dataset::validate() const {
  if (features.rows() < 1) throw std::invalid_argument("Dataset: N must be >= 1");
  if (static_cast<Eigen::Index>(labels.size()) != features.rows())
    throw std::invalid_argument("Dataset: label count != sample count");
  if (class_count < 1) throw std::invalid_argument("Dataset: class_count must be >= 1");
  if (!features.allFinite()) throw std::invalid_argument("Dataset: non-finite features");
  for (int y : labels) {
    if (y < 0 || y >= class_count)
      throw std::invalid_argument("Dataset: label out of range");
  }
}

std::string Dataset::checksum() const {
  std::string buf;
  buf.reserve(24 + static_cast<std::size_t>(features.size()) * 8 + labels.size() * 8);
  append_u64_le(buf, static_cast<std::uint64_t>(features.rows()));
  append_u64_le(buf, static_cast<std::uint64_t>(features.cols()));
  append_u64_le(buf, static_cast<std::uint64_t>(class_count));
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    for (Eigen::Index j = 0; j < features.cols(); ++j)
      append_f64_le(buf, features(i, j));
  for (int y : labels) append_u64_le(buf, static_cast<std::uint64_t>(y));
  return to_hex(fnv1a64(buf.data(), buf.size()));
}

Dataset gen_blobs(const BlobSpec& spec) {
  if (spec.class_count < 1 || spec.samples_per_class < 1)
    throw std::invalid_argument("gen_blobs: degenerate class/sample counts");
  if (!(spec.spread > 0.0)) throw std::invalid_argument("gen_blobs: spread must be > 0");
  if (spec.label_noise_rate < 0.0 || spec.label_noise_rate >= 1.0)
    throw std::invalid_argument("gen_blobs: label_noise_rate must be in [0,1)");

  std::vector<Eigen::VectorXd> centers = spec.centers;
  if (centers.empty()) {
    // Evenly spaced on a circle of radius 2 in the plane.
    for (int c = 0; c < spec.class_count; ++c) {
      const double a = 2.0 * M_PI * c / spec.class_count;
      Eigen::VectorXd mu(2);
      mu << 2.0 * std::cos(a), 2.0 * std::sin(a);
      centers.push_back(mu);
    }
  }
  if (static_cast<int>(centers.size()) != spec.class_count)
    throw std::invalid_argument("gen_blobs: centers count != class_count");
  const Eigen::Index d = centers[0].size();
  for (const auto& mu : centers)
    if (mu.size() != d) throw std::invalid_argument("gen_blobs: inconsistent center dims");

  const int n = spec.class_count * spec.samples_per_class;
  Dataset data;
  data.features.resize(n, d);
  data.labels.resize(n);
  data.class_count = spec.class_count;
  data.name = "blobs";

  SeededRng rng(spec.seed);
  int row = 0;
  for (int c = 0; c < spec.class_count; ++c) {
    for (int k = 0; k < spec.samples_per_class; ++k, ++row) {
      for (Eigen::Index j = 0; j < d; ++j)
        data.features(row, j) = centers[c][j] + spec.spread * rng.normal();
      data.labels[row] = c;
    }
  }

  const int n_noisy = static_cast<int>(std::floor(spec.label_noise_rate * n + 0.5));
  if (n_noisy > 0 && spec.class_count > 1) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx);
    for (int k = 0; k < n_noisy; ++k) {
      const int i = idx[k];
      const int shift = 1 + static_cast<int>(rng.index(spec.class_count - 1));
      data.labels[i] = (data.labels[i] + shift) % spec.class_count;
    }
  }
  data.validate();
  return data;
}

Dataset load_csv(const std::string& path, int class_count_override) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_csv: cannot open " + path);

  std::string line;
  long line_no = 0;
  // Skip leading comment lines, then read the header.
  do {
    if (!std::getline(in, line)) throw ParseError("load_csv: empty file " + path);
    ++line_no;
  } while (!line.empty() && line[0] == '#');

  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) cols.push_back(tok);
  }
  if (cols.size() < 2 || cols.back() != "label")
    throw ParseError("load_csv: header must be f0,...,f{d-1},label", line_no);
  const std::size_t d = cols.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    if (cols[j] != "f" + std::to_string(j))
      throw ParseError("load_csv: unexpected header column '" + cols[j] + "'", line_no);
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string tok;
    std::vector<double> row;
    while (std::getline(ss, tok, ',')) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &pos);
      } catch (const std::exception&) {
        throw ParseError("load_csv: not a number: '" + tok + "'", line_no);
      }
      if (pos != tok.size())
        throw ParseError("load_csv: trailing characters in '" + tok + "'", line_no);
      row.push_back(v);
    }
    if (row.size() != d + 1)
      throw ParseError("load_csv: expected " + std::to_string(d + 1) + " columns, got " +
                           std::to_string(row.size()),
                       line_no);
    const double yl = row.back();
    if (yl != std::floor(yl) || yl < 0)
      throw ParseError("load_csv: label must be a non-negative integer", line_no);
    labels.push_back(static_cast<int>(yl));
    row.pop_back();
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("load_csv: no data rows in " + path);

  Dataset data;
  data.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < d; ++j)
      data.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  data.labels = labels;
  data.class_count = class_count_override > 0
                         ? class_count_override
                         : 1 + *std::max_element(labels.begin(), labels.end());
  if (class_count_override > 0) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] >= class_count_override)
        throw ValidationError("load_csv: label " + std::to_string(labels[i]) +
                              " >= declared class count " + std::to_string(class_count_override));
    }
  }
  data.name = path;
  data.validate();
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  data.validate();
  std::ofstream out(path);
  if (!out) throw ParseError("save_csv: cannot open " + path);
  out.precision(17);
  for (Eigen::Index j = 0; j < data.dim(); ++j) out << "f" << j << ",";
  out << "label\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) out << data.features(i, j) << ",";
    out << data.labels[static_cast<std::size_t>(i)] << "\n";
  }
}

namespace {

std::uint32_t read_u32_be(std::ifstream& in, const std::string& what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw ParseError("load_idx: truncated file while reading " + what);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw ParseError("load_idx: cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw ParseError("load_idx: cannot open " + labels_path);

  const std::uint32_t img_magic = read_u32_be(img, "image magic");
  if (img_magic != 0x00000803)
    throw ParseError("load_idx: bad image magic 0x" + to_hex(img_magic).substr(8));
  const std::uint32_t n_img = read_u32_be(img, "image count");
  const std::uint32_t rows = read_u32_be(img, "row count");
  const std::uint32_t cols = read_u32_be(img, "column count");

  const std::uint32_t lab_magic = read_u32_be(lab, "label magic");
  if (lab_magic != 0x00000801)
    throw ParseError("load_idx: bad label magic 0x" + to_hex(lab_magic).substr(8));
  const std::uint32_t n_lab = read_u32_be(lab, "label count");
  if (n_img != n_lab)
    throw ParseError("load_idx: image count " + std::to_string(n_img) +
                     " != label count " + std::to_string(n_lab));
  if (n_img == 0) throw ParseError("load_idx: empty dataset");

  const std::size_t pixels = std::size_t(rows) * cols;
  Dataset data;
  data.features.resize(n_img, static_cast<Eigen::Index>(pixels));
  data.labels.resize(n_img);
  std::vector<unsigned char> buf(pixels);
  for (std::uint32_t i = 0; i < n_img; ++i) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels)))
      throw ParseError("load_idx: truncated image data at sample " + std::to_string(i));
    for (std::size_t j = 0; j < pixels; ++j)
      data.features(i, static_cast<Eigen::Index>(j)) = buf[j] / 255.0;
    char yb;
    if (!lab.read(&yb, 1))
      throw ParseError("load_idx: truncated label data at sample " + std::to_string(i));
    data.labels[i] = static_cast<unsigned char>(yb);
  }
  data.class_count = 1 + *std::max_element(data.labels.begin(), data.labels.end());
  data.name = images_path;
  data.validate();
  return data;
}

}  // namespace lrds
