// Copyright 2026 The v2gq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace v2gq {

enum class ErrorCategory {
    input = 1,      // malformed call arguments
    parse = 2,      // unreadable instance / config / assignment file
    invariant = 3,  // data violates a domain invariant
    guard = 4,      // problem too large for an exhaustive method
    io = 5,         // filesystem failure
};

/// Base exception of the library. The category doubles as the CLI exit code.
class Error : public std::runtime_error {
  public:
    Error(ErrorCategory category, const std::string& message)
            : std::runtime_error(message), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

  private:
    ErrorCategory category_;
};

class InputError : public Error {
  public:
    explicit InputError(const std::string& m) : Error(ErrorCategory::input, m) {}
};

class ParseError : public Error {
  public:
    explicit ParseError(const std::string& m) : Error(ErrorCategory::parse, m) {}
};

class InvariantError : public Error {
  public:
    InvariantError(std::string field, const std::string& m)
            : Error(ErrorCategory::invariant, field + ": " + m), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

class GuardError : public Error {
  public:
    explicit GuardError(const std::string& m) : Error(ErrorCategory::guard, m) {}
};

class IoError : public Error {
  public:
    explicit IoError(const std::string& m) : Error(ErrorCategory::io, m) {}
};

}  // namespace v2gq
