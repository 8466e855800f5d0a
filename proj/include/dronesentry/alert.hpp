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
#include <string>
#include <vector>

#include "dronesentry/rules.hpp"
#include "dronesentry/telemetry.hpp"

namespace dronesentry {

/// A completed signature (or trend detector) firing on one drone.
struct Alert {
    std::string drone;
    std::string rule;
    ActionLevel level = ActionLevel::Info;
    Timestamp first;
    Timestamp last;
    std::uint64_t count = 1;
    std::string detail;
    // additional tokens of the most recent contributing event
    std::vector<Token> trigger;

    bool operator==(const Alert&) const = default;
};

/// `<ts> ALERT <drone_id> <level> <rule> count=<n> first=<ts> last=<ts> <detail...>`
std::string format_alert(const Alert& a);

}  // namespace dronesentry
