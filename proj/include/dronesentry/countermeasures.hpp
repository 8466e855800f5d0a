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
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dronesentry/alert.hpp"
#include "dronesentry/analytics.hpp"

namespace dronesentry {

enum class Constellation { Gps, Galileo, Beidou, Irnss, Glonass };
enum class CommChannel { Primary, Cellular3g, Sms, Wimax };
enum class CaptureMode { TimeLapse, ElevatedCapture, Streaming };

std::string_view to_string(Constellation c);
std::string_view to_string(CommChannel c);
std::string_view to_string(CaptureMode c);
std::optional<Constellation> parse_constellation(std::string_view text);

/// Next constellation in fallback order: GPS, Galileo, BeiDou, IRNSS,
/// GLONASS, then back to GPS.
Constellation next_constellation(Constellation c);

struct CountermeasureState {
    Constellation active_gnss = Constellation::Gps;
    CommChannel comm_channel = CommChannel::Primary;
    bool agc_enabled = false;
    CaptureMode capture_mode = CaptureMode::TimeLapse;
    bool log_forwarding = true;

    bool operator==(const CountermeasureState&) const = default;
};

/// Trigger table for the policy. Kept as data so alternates can be tried.
struct CountermeasurePolicy {
    std::set<std::string, std::less<>> gnss_rotation_rules{"gps_spoof", "sat_count_anomaly"};
    std::string lost_link_rule = "lost_link";
    CommChannel emergency_channel = CommChannel::Cellular3g;
};

struct CountermeasureAction {
    Timestamp at;
    std::string field;
    std::string old_value;
    std::string new_value;
    std::string cause;
};

struct PolicyResult {
    CountermeasureState state;
    std::vector<CountermeasureAction> actions;
};

/// Pure transition. `alert` may be null for mode-only changes (quiet-period
/// de-escalation). `mode` is the operating mode after the step.
PolicyResult apply_policy(const CountermeasureState& state, const Alert* alert, Mode mode, Timestamp now,
                          const CountermeasurePolicy& policy = {});

/// `<ts> CM <drone_id> <field> <old> -> <new> cause=<rule|mode>`
std::string format_action(std::string_view drone, const CountermeasureAction& a);

class UnknownBand : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

struct GnssBand {
    Constellation constellation;
    std::string_view band;
    double center_mhz;
};

const std::vector<GnssBand>& gnss_bands();

/// Center frequency in MHz; throws UnknownBand for pairs not in the table.
double gnss_band_lookup(Constellation c, std::string_view band);

}  // namespace dronesentry
