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
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dronesentry/geometry.hpp"
#include "dronesentry/preprocess.hpp"
#include "dronesentry/swarm.hpp"
#include "dronesentry/telemetry.hpp"

namespace dronesentry {

class InvalidSpec : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class AttackKind { GpsJam, GpsSpoof, WifiDeauth, Ddos, None };

std::string_view to_string(AttackKind k);
std::optional<AttackKind> parse_attack_kind(std::string_view text);

/// Piecewise-constant flight: the leg with the latest start at or before t
/// is in effect. Every drone flies the same plan, so the fleet keeps its
/// layout and neighbor distances stay fixed.
struct FlightLeg {
    std::int64_t start_s = 0;
    double speed_kmh = 0.0;
    double heading_deg = 0.0;
};

/// Active over ticks start_s <= t < end_s.
struct AttackInterval {
    AttackKind kind = AttackKind::None;
    std::int64_t start_s = 0;
    std::int64_t end_s = 0;
    // "*" targets every drone
    std::string target = "*";

    bool targets(std::string_view drone) const { return target == "*" || target == drone; }
    bool active(std::int64_t tick) const { return start_s <= tick && tick < end_s; }
};

struct ScenarioSpec {
    std::string name;
    std::uint64_t seed = 0;
    std::int64_t duration_s = 0;
    Timestamp start{1583091608};  // 2020-03-01T19:40:08Z
    GeoPoint origin;
    FleetTopology fleet;
    std::vector<FlightLeg> legs;
    std::vector<AttackInterval> attacks;
    // drone id -> tick at which it is destroyed and stops producing records
    std::map<std::string, std::int64_t, std::less<>> destroyed;
    // rogue emitter position in the fleet frame, meters
    std::optional<Vec2> emitter;
    // receiver clock error added to simulated arrival times, seconds
    std::map<std::string, double, std::less<>> clock_offset_s;

    std::optional<std::int64_t> destroyed_at(std::string_view drone) const;
};

/// Line-oriented scenario file; see scenarios/*.scenario for the grammar.
/// Throws InvalidSpec with the offending line number.
ScenarioSpec parse_scenario(std::istream& in);
ScenarioSpec load_scenario(const std::filesystem::path& path);

struct DroneStream {
    std::string drone;
    std::vector<RawRecord> records;
    KinematicsTrack track;
};

struct GeneratedScenario {
    std::vector<DroneStream> drones;
};

/// Seeded, byte-reproducible raw records for every drone, one tick per
/// second from `start` for `duration_s` ticks (or until destruction).
GeneratedScenario generate(const ScenarioSpec& spec);

/// Record file text: FLIGHT_STATE then the tick's records, tick by tick.
std::string format_stream(const DroneStream& s);

/// Ground-truth sidecar: attack intervals, destructions, planted emitter.
std::string format_truth(const ScenarioSpec& spec);

/// Writes records/<drone>.records and truth.txt under `out`.
void write_generated(const ScenarioSpec& spec, const GeneratedScenario& g, const std::filesystem::path& out);

}  // namespace dronesentry
