// Copyright 2026 The mchain Authors
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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mchain {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid arguments: bad sizes, out-of-range sites, malformed windows.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Requested operation exists but not for this input (e.g. N != 1 superoperator).
class UnsupportedError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

// Raised from inside a time integration; carries where it happened.
class IntegrationError : public NumericalError {
public:
    IntegrationError(const std::string& what, std::int64_t step, double time)
        : NumericalError(what + " (step " + std::to_string(step) + ", t=" + std::to_string(time) + ")"),
          step_(step),
          time_(time) {}

    std::int64_t step() const noexcept { return step_; }
    double time() const noexcept { return time_; }

private:
    std::int64_t step_;
    double time_;
};

}  // namespace mchain
