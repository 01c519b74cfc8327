// Copyright 2026 The itdsim Authors.
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

#ifndef ITDSIM_ERROR_H_
#define ITDSIM_ERROR_H_

#include <stdexcept>
#include <string>

namespace itdsim {

// Raised for runtime failures: unreadable files, non-propagating chains,
// out-of-range arguments to the math helpers.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a configuration value violates its documented invariant.
// The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace itdsim

#endif  // ITDSIM_ERROR_H_
