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

#include "dronesentry/countermeasures.hpp"

namespace dronesentry {

namespace {

constexpr Constellation kRotation[] = {Constellation::Gps, Constellation::Galileo, Constellation::Beidou,
                                       Constellation::Irnss, Constellation::Glonass};

std::string bool_text(bool b) { return b ? "true" : "false"; }

bool lost_gps_link(const Alert& a) {
    for (const auto& t : a.trigger)
        if (t.key == "link") return t.value.to_string() == "GPS";
    return false;
}

}  // namespace

std::string_view to_string(Constellation c) {
    switch (c) {
        case Constellation::Gps: return "GPS";
        case Constellation::Galileo: return "GALILEO";
        case Constellation::Beidou: return "BEIDOU";
        case Constellation::Irnss: return "IRNSS";
        case Constellation::Glonass: return "GLONASS";
    }
    return "GPS";
}

std::string_view to_string(CommChannel c) {
    switch (c) {
        case CommChannel::Primary: return "PRIMARY";
        case CommChannel::Cellular3g: return "3G";
        case CommChannel::Sms: return "SMS";
        case CommChannel::Wimax: return "WIMAX";
    }
    return "PRIMARY";
}

std::string_view to_string(CaptureMode c) {
    switch (c) {
        case CaptureMode::TimeLapse: return "TIME_LAPSE";
        case CaptureMode::ElevatedCapture: return "ELEVATED_CAPTURE";
        case CaptureMode::Streaming: return "STREAMING";
    }
    return "TIME_LAPSE";
}

std::optional<Constellation> parse_constellation(std::string_view text) {
    for (Constellation c : kRotation)
        if (to_string(c) == text) return c;
    return std::nullopt;
}

Constellation next_constellation(Constellation c) {
    for (std::size_t i = 0; i < std::size(kRotation); ++i)
        if (kRotation[i] == c) return kRotation[(i + 1) % std::size(kRotation)];
    return Constellation::Gps;
}

PolicyResult apply_policy(const CountermeasureState& state, const Alert* alert, Mode mode, Timestamp now,
                          const CountermeasurePolicy& policy) {
    PolicyResult out{state, {}};
    auto& s = out.state;
    const std::string cause = alert ? alert->rule : std::string(to_string(mode));

    auto record = [&](const char* field, std::string old_v, std::string new_v) {
        if (old_v != new_v) out.actions.push_back({now, field, std::move(old_v), std::move(new_v), cause});
    };
    auto set_gnss = [&](Constellation c) {
        record("active_gnss", std::string(to_string(s.active_gnss)), std::string(to_string(c)));
        s.active_gnss = c;
    };
    auto set_comm = [&](CommChannel c) {
        record("comm_channel", std::string(to_string(s.comm_channel)), std::string(to_string(c)));
        s.comm_channel = c;
    };
    auto set_agc = [&](bool on) {
        record("agc_enabled", bool_text(s.agc_enabled), bool_text(on));
        s.agc_enabled = on;
    };
    auto set_capture = [&](CaptureMode c) {
        record("capture_mode", std::string(to_string(s.capture_mode)), std::string(to_string(c)));
        s.capture_mode = c;
    };

    if (alert) {
        bool rotate = policy.gnss_rotation_rules.count(alert->rule) > 0 ||
                      (alert->rule == policy.lost_link_rule && lost_gps_link(*alert) && rank(mode) >= rank(Mode::Elevated));
        if (rotate) {
            set_gnss(next_constellation(s.active_gnss));
            set_agc(true);
        }
        if (alert->level == ActionLevel::Emergency) {
            set_comm(policy.emergency_channel);
            set_capture(CaptureMode::Streaming);
        }
    }

    if (mode == Mode::Monitor || mode == Mode::SwarmMonitor) {
        set_capture(CaptureMode::ElevatedCapture);
    } else if (mode == Mode::Normal) {
        CountermeasureState defaults;
        set_gnss(defaults.active_gnss);
        set_comm(defaults.comm_channel);
        set_agc(defaults.agc_enabled);
        set_capture(defaults.capture_mode);
    }
    if (!s.log_forwarding) {
        record("log_forwarding", "false", "true");
        s.log_forwarding = true;
    }
    return out;
}

std::string format_action(std::string_view drone, const CountermeasureAction& a) {
    return a.at.to_string() + " CM " + std::string(drone) + " " + a.field + " " + a.old_value + " -> " + a.new_value +
           " cause=" + a.cause;
}

const std::vector<GnssBand>& gnss_bands() {
    static const std::vector<GnssBand> table = {
        {Constellation::Gps, "L1", 1575.42},
        {Constellation::Gps, "L2", 1227.6},
        {Constellation::Glonass, "L1", 1602.0},
        {Constellation::Glonass, "L2", 1246.0},
    };
    return table;
}

double gnss_band_lookup(Constellation c, std::string_view band) {
    for (const auto& b : gnss_bands())
        if (b.constellation == c && b.band == band) return b.center_mhz;
    throw UnknownBand("no " + std::string(band) + " band for " + std::string(to_string(c)));
}

}  // namespace dronesentry
