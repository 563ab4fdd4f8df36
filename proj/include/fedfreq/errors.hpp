//
// Copyright 2026 The FedFreq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//


#ifndef FEDFREQ_ERRORS_HPP_
#define FEDFREQ_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace fedfreq {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration (bad distribution parameter, w not a
// power of two, unknown config key, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Bad input data: out-of-range items, dimension mismatches, probabilities
// outside [0, 1].
class InputError : public Error {
 public:
  using Error::Error;
};

// An exhaustive enumeration would exceed its work budget.
class EnumerationBudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace fedfreq

#endif  // FEDFREQ_ERRORS_HPP_
