//
// Copyright 2026 The kingman-condensation Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace kingman {

inline constexpr const char* kArtifactName = "kingman-condensation";
inline constexpr const char* kArtifactVersion = "0.1.0";

// Invalid model or argument: bad beta, eta0 < eta_q, malformed measure.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Schema violation while reading a run configuration. The message starts
// with the offending field path.
class ConfigError : public ModelError {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : ModelError(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// A computation could not be carried out (degenerate mean, pole, singular
// minor, eigensolver failure, z outside the admissible range).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A checked invariant failed on computed output.
class PropertyViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Process exit codes used by the command line front end.
enum class ExitCode : int { ok = 0, config = 1, numeric = 2, property = 3 };

}  // namespace kingman
