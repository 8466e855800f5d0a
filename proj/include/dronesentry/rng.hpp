// Copyright 2026 the dronesentry authors
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
#include <random>

namespace dronesentry {

/// Park-Miller LCG (modulus 2^31-1, multiplier 48271). Only the raw
/// recurrence is used; the derived draws below are defined here rather than
/// through std distributions so that other implementations can reproduce
/// every value bit for bit.
class Lcg {
public:
    static constexpr std::uint64_t kModulus = 2147483647;
    static constexpr std::uint64_t kMultiplier = 48271;

    /// Seeds are folded into [1, modulus-1].
    explicit Lcg(std::uint64_t seed) : engine_(static_cast<std::uint32_t>(seed % (kModulus - 1) + 1)) {}

    std::uint32_t next() { return static_cast<std::uint32_t>(engine_()); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() - 1) / static_cast<double>(kModulus - 1); }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        auto span = static_cast<double>(hi - lo + 1);
        auto k = static_cast<std::int64_t>(uniform() * span);
        return lo + (k > hi - lo ? hi - lo : k);
    }

    /// Independent stream for sub-component `index` of a seeded run.
    static Lcg derive(std::uint64_t seed, std::uint64_t index) {
        return Lcg(seed * 16807u + (index + 1) * 2654435761u);
    }

private:
    std::minstd_rand engine_;
};

}  // namespace dronesentry
