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

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dronesentry/alert.hpp"
#include "dronesentry/geometry.hpp"
#include "dronesentry/telemetry.hpp"

namespace dronesentry {

enum class MessageKind { GroupAlert, LogBatch, TriangObs, AssistRequest };

std::string_view to_string(MessageKind k);

/// What one receiver measured of a rogue emitter.
struct TriangObservation {
    Vec2 receiver;
    std::optional<double> arrival_time_s;
    std::optional<double> bearing_deg;

    bool operator==(const TriangObservation&) const = default;
};

struct SwarmMessage {
    MessageKind kind = MessageKind::GroupAlert;
    std::string sender;
    Timestamp sent;
    // empty for broadcasts
    std::string recipient;
    std::variant<std::monostate, Alert, std::vector<std::string>, TriangObservation> payload;
};

SwarmMessage make_group_alert(const Alert& a, Timestamp sent);
SwarmMessage make_log_batch(std::string sender, std::vector<std::string> lines, Timestamp sent);
SwarmMessage make_triang_obs(std::string sender, std::string recipient, TriangObservation obs, Timestamp sent);
SwarmMessage make_assist_request(std::string sender, Timestamp sent);

/// Throws std::invalid_argument when the payload does not fit the kind
/// (LOG_BATCH lines must parse as telemetry, TRIANG_OBS needs a measurement).
void validate(const SwarmMessage& m);

/// One-line summary used in the message trace.
std::string describe(const SwarmMessage& m);

}  // namespace dronesentry
