// Copyright 2026 The qfic Authors
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

#pragma once

namespace qfic {

/// Numerical thresholds shared by every module.
struct Tolerances {
    /// Algebraic identities: unitarity, completeness, mixture identities.
    double algebraic = 1e-10;
    /// Norm checks on state vectors and probability distributions.
    double norm = 1e-12;
    /// Outcomes below this probability are flagged invalid; distribution
    /// entries below it are pruned before decomposition.
    double zero_probability = 1e-14;
};

inline constexpr Tolerances kTolerances{};

/// Largest register accepted by the dense simulator.
inline constexpr int kMaxQubits = 24;

}  // namespace qfic
