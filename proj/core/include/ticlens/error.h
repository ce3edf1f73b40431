// Copyright 2026 The TicLens Authors
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

#ifndef TICLENS_ERROR_H_
#define TICLENS_ERROR_H_

#include <stdexcept>
#include <string>

namespace ticlens {

// Base of all library errors. The CLI maps each subclass to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input violates a documented contract (bad record, unknown category, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// File could not be read or written, or a remote endpoint failed.
class IoError : public Error {
 public:
  using Error::Error;
};

// An internal invariant did not hold. Indicates a bug, not bad input.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace ticlens

#endif  // TICLENS_ERROR_H_
