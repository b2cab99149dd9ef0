/*
 * Copyright (C) 2026 The ppaudit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace ppaudit {

// Unreadable or malformed caller input. CLI exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Transport or protocol failure talking to a model backend. CLI exit code 2.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition or internal invariant was broken. CLI exit code 3.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Wraps a failure with the pipeline stage it came from.
class StageError : public std::runtime_error {
 public:
  enum class Kind { kInput, kBackend, kInvariant };

  StageError(std::string stage, Kind kind, const std::string& message)
      : std::runtime_error(stage + ": " + message),
        stage_(std::move(stage)),
        kind_(kind) {}

  const std::string& stage() const noexcept { return stage_; }
  Kind kind() const noexcept { return kind_; }

 private:
  std::string stage_;
  Kind kind_;
};

}  // namespace ppaudit
