// Copyright 2026 The truthmark Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRUTHMARK_ERRORS_HPP_
#define TRUTHMARK_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace truthmark {

// Base of every error the library raises. The CLI maps the subclasses onto
// exit codes: config 2, numeric 3, consistency 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters, malformed configuration, violated preconditions.
class DomainError : public Error {
 public:
  using Error::Error;
};

// |rho| = 1: the posterior has infinite precision.
class DegenerateModelError : public DomainError {
 public:
  using DomainError::DomainError;
};

class NumericFailure : public Error {
 public:
  using Error::Error;
};

// No finite discount ratio restores prompt truthfulness.
class DiscountIneffective : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

// A trade log whose records do not chain. `index` is the first bad record.
class ConsistencyError : public Error {
 public:
  ConsistencyError(std::size_t index, const std::string& what)
      : Error("record " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

}  // namespace truthmark

#endif  // TRUTHMARK_ERRORS_HPP_
