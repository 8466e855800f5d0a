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

#include <span>
#include <string_view>

#include "dronesentry/geometry.hpp"
#include "dronesentry/message.hpp"

namespace dronesentry {

inline constexpr double kSpeedOfLight = 299792458.0;

enum class LocateMethod { Tdoa, Bearing };

std::string_view to_string(LocateMethod m);

struct EmitterEstimate {
    Vec2 position;
    double residual = 0.0;  // root of the summed squared residuals, meters
    LocateMethod method = LocateMethod::Tdoa;
    bool converged = true;
    int iterations = 0;
};

/// Hyperbolic multilateration from arrival times at synchronized receivers.
/// Minimizes sum over receiver pairs (i<j) of
///   (c * (t_i - t_j) - (|p - r_i| - |p - r_j|))^2
/// with damped Gauss-Newton iterations started at the receiver centroid.
/// Observations without an arrival time are ignored. Throws
/// SwarmError(CollinearReceivers) for fewer than three receivers or receivers
/// on one line. After 100 iterations the best iterate is returned with
/// `converged == false`.
EmitterEstimate tdoa_locate(std::span<const TriangObservation> observations, double propagation_speed = kSpeedOfLight);

/// Least-squares intersection of bearing lines (degrees clockwise from
/// north). Observations without a bearing are ignored. Throws
/// SwarmError(ParallelBearings) when the lines do not pin down a point.
EmitterEstimate bearing_locate(std::span<const TriangObservation> observations);

}  // namespace dronesentry
