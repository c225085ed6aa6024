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
#ifndef LRDS_ERRORS_HPP
#define LRDS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lrds {

// Non-finite values, diverging training, singular factorizations.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative solver stopped without meeting its residual bound.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& msg, double residual)
      : NumericalError(msg), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Inputs that fail cross-file / cross-stage consistency checks
// (checksum mismatches, stale score files, dimension mismatches at the
// harness level).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Problem size exceeds a configured dense-algebra threshold.
class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files; carries a 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, long line = -1)
      : std::runtime_error(line >= 0 ? msg + " (line " + std::to_string(line) + ")"
                                     : msg),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

}  // namespace lrds

#endif  // LRDS_ERRORS_HPP
