/*
 * Copyright 2026 The bla-lab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BLALAB_ERROR_H_
#define BLALAB_ERROR_H_

#include <stdexcept>
#include <string>

namespace blalab {

// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration, malformed input file or violated precondition on
// user-supplied parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A numerical stage failed: singular system, diverging simulation, pole on
// the excitation grid and the like.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace blalab

#endif  // BLALAB_ERROR_H_
