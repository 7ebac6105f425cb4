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

#include <algorithm>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "kingman/error.hpp"
#include "kingman/measure.hpp"

namespace kingman {

// Index of `n` modulo the period, always in [0, k).
inline std::size_t residue(long long n, std::size_t k) {
  const auto kk = static_cast<long long>(k);
  return static_cast<std::size_t>(((n % kk) + kk) % kk);
}

// One mutation environment: mutation probability beta and mutant law q.
struct Environment {
  double beta = 0.0;
  Measure q;

  double eta_q() const { return support_max(q); }
};

// The k environments visited periodically. Environment i is applied when
// producing generation n with n = i (mod k).
class EnvironmentCycle {
 public:
  explicit EnvironmentCycle(std::vector<Environment> envs) : envs_(std::move(envs)) {
    if (envs_.empty()) throw ModelError("environment cycle needs at least one environment");
    for (std::size_t i = 0; i < envs_.size(); ++i) {
      const Environment& e = envs_[i];
      if (!(e.beta > 0.0 && e.beta < 1.0)) {
        throw ModelError("environment " + std::to_string(i) + ": beta must lie in (0,1)");
      }
      if (e.q.kind() != MeasureKind::probability || e.q.empty()) {
        throw ModelError("environment " + std::to_string(i) + ": q must be a probability measure");
      }
      if (!(e.eta_q() > 0.0)) {
        throw ModelError("environment " + std::to_string(i) + ": eta_q must be positive");
      }
    }
  }

  std::size_t size() const noexcept { return envs_.size(); }
  const Environment& operator[](std::size_t i) const { return envs_[i]; }
  const std::vector<Environment>& envs() const noexcept { return envs_; }

  // Environment used for generation n.
  const Environment& at_generation(long long n) const { return envs_[residue(n, envs_.size())]; }

  double eta_q() const {
    double m = 0.0;
    for (const Environment& e : envs_) m = std::max(m, e.eta_q());
    return m;
  }

 private:
  std::vector<Environment> envs_;
};

// Cyclic shift: environment i of the result is environment i+1 of `cycle`.
inline EnvironmentCycle rotate(const EnvironmentCycle& cycle) {
  std::vector<Environment> envs(cycle.envs().begin() + 1, cycle.envs().end());
  envs.push_back(cycle[0]);
  return EnvironmentCycle(std::move(envs));
}

// Environment cycle plus initial law, validated against eta0 >= eta_{q_i} > 0.
class ModelInstance {
 public:
  ModelInstance(EnvironmentCycle cycle, Measure p0) : cycle_(std::move(cycle)), p0_(std::move(p0)) {
    if (p0_.kind() != MeasureKind::probability || p0_.empty()) {
      throw ModelError("p0 must be a probability measure");
    }
    eta0_ = support_max(p0_);
    eta_q_ = cycle_.eta_q();
    if (!(eta0_ > 0.0)) throw ModelError("eta0 must be positive");
    if (eta0_ < eta_q_ - kLocationTolerance) throw ModelError("eta0 < eta_q");
  }

  const EnvironmentCycle& cycle() const noexcept { return cycle_; }
  const Measure& p0() const noexcept { return p0_; }
  std::size_t k() const noexcept { return cycle_.size(); }
  double eta0() const noexcept { return eta0_; }
  double eta_q() const noexcept { return eta_q_; }

 private:
  EnvironmentCycle cycle_;
  Measure p0_;
  double eta0_ = 0.0;
  double eta_q_ = 0.0;
};

}  // namespace kingman
