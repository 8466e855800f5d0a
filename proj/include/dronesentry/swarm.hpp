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
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dronesentry/geometry.hpp"
#include "dronesentry/message.hpp"

namespace dronesentry {

class SwarmError : public std::runtime_error {
public:
    enum class Kind { NotBroadcastable, UnknownDrone, BadTopology, CollinearReceivers, ParallelBearings };

    SwarmError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

struct DroneNode {
    std::string id;
    Vec2 position;
    // the drone's radio link is down for every round >= down_at
    std::optional<std::int64_t> down_at;
    std::int64_t latency_rounds = 1;
};

/// Static fleet layout. Two drones are neighbors when they are within
/// `radius_m` of each other; the relation is symmetric by construction.
class FleetTopology {
public:
    explicit FleetTopology(double radius_m = 500.0);

    void add_drone(std::string id, Vec2 position);
    void set_link_down_at(std::string_view id, std::int64_t round);
    void set_latency(std::string_view id, std::int64_t rounds);

    double radius_m() const { return radius_m_; }
    void set_radius(double radius_m);

    const std::vector<DroneNode>& drones() const { return drones_; }
    const DroneNode& node(std::string_view id) const;
    bool contains(std::string_view id) const;

    bool link_up(std::string_view id, std::int64_t round) const;
    bool neighbors(std::string_view a, std::string_view b) const;

private:
    DroneNode& node_mut(std::string_view id);

    double radius_m_;
    std::vector<DroneNode> drones_;
};

/// Topology file: `DRONE <id> <x_m> <y_m>`, `RADIUS <m>`,
/// `LINK <id> DOWN_AT <tick>`, `LINK <id> LATENCY <rounds>`; `#` comments.
/// Returns true when the line was a topology line, false when it is not
/// topology syntax at all (lets scenario files embed topology lines).
bool apply_topology_line(FleetTopology& topo, std::span<const std::string_view> parts, std::size_t line_no);
FleetTopology parse_topology(std::istream& in);

struct Delivery {
    std::string receiver;
    std::int64_t round = 0;
};

struct DeliveryReport {
    std::string origin;
    std::int64_t sent_round = 0;
    std::vector<Delivery> deliveries;
};

/// Lock-step message fabric. Messages sent in round r to a receiver with
/// latency L become visible in round r + L.
class SwarmFabric {
public:
    explicit SwarmFabric(const FleetTopology& topology) : topology_(&topology) {}

    /// Group/Emergency alerts only; throws SwarmError(NotBroadcastable)
    /// otherwise. Reaches every drone within radius whose link to the origin
    /// is up (both radios up in `round`).
    DeliveryReport broadcast_group(std::string_view origin, const Alert& alert, std::int64_t round, Timestamp now);

    /// Generic neighbor broadcast for any message kind; same reach rule.
    DeliveryReport broadcast(const SwarmMessage& msg, std::int64_t round);

    /// Point-to-point send; returns nullopt when out of range or a link is down.
    std::optional<Delivery> send(const SwarmMessage& msg, std::int64_t round);

    /// Messages due for `receiver` in `round`, in send order.
    std::vector<SwarmMessage> collect(std::string_view receiver, std::int64_t round);

    /// Trace of every scheduled delivery, one line each.
    const std::vector<std::string>& trace() const { return trace_; }

private:
    struct Pending {
        std::int64_t round;
        std::uint64_t order;
        std::string receiver;
        SwarmMessage msg;
    };

    void enqueue(const SwarmMessage& msg, const std::string& receiver, std::int64_t sent_round, std::int64_t due);

    const FleetTopology* topology_;
    std::vector<Pending> pending_;
    std::uint64_t order_ = 0;
    std::vector<std::string> trace_;
};

/// Append-only central store of forwarded log lines, in arrival order.
class AuditRepository {
public:
    /// Appends a LOG_BATCH. Throws std::invalid_argument for any other kind.
    void ingest(const SwarmMessage& batch);
    void append(const std::string& drone, const std::string& line);

    std::size_t high_water(std::string_view drone) const;
    std::vector<std::string> lines_of(std::string_view drone) const;
    std::size_t size() const { return entries_.size(); }

    /// `<drone_id> <log line>` per entry.
    void dump(std::ostream& out) const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::map<std::string, std::size_t, std::less<>> high_water_;
};

/// Continuous log shipping for one drone. Lines written while the link is
/// down stay buffered on the drone and are sent once it comes back.
class LogForwarder {
public:
    explicit LogForwarder(std::string drone) : drone_(std::move(drone)) {}

    void write(std::string line) { local_.push_back(std::move(line)); }

    /// One forwarding tick: ships everything past the high-water mark when
    /// the link is up. Returns the new high-water mark.
    std::size_t tick(AuditRepository& repo, bool link_up, Timestamp now);

    const std::vector<std::string>& local_log() const { return local_; }
    std::size_t high_water() const { return high_water_; }
    std::size_t buffered() const { return local_.size() - high_water_; }

private:
    std::string drone_;
    std::vector<std::string> local_;
    std::size_t high_water_ = 0;
};

}  // namespace dronesentry
