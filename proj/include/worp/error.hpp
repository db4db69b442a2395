//  Copyright 2026 The worp Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace worp {

// Base for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid sketch / pipeline / calibration parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A stream element or sketch update that cannot be accepted
// (non-finite value, empty key, negative value into an l1 sketch).
class RejectedElement : public Error {
 public:
  using Error::Error;
};

class MergeError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

// Input too small for the requested sample (fewer than k+1 keys).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// Statistic function produced a non-finite value at a sampled frequency.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

// Malformed element file, sample JSON, calibration JSON or sketch blob.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace worp
