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

#include "dronesentry/swarm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace dronesentry {

namespace {

using SK = SwarmError::Kind;

double number_or_throw(std::string_view s, std::size_t line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw SwarmError(SK::BadTopology, "topology line " + std::to_string(line_no) + ": bad number '" +
                                              std::string(s) + "'");
    return v;
}

std::int64_t int_or_throw(std::string_view s, std::size_t line_no) {
    double v = number_or_throw(s, line_no);
    if (v != std::floor(v) || v < 0)
        throw SwarmError(SK::BadTopology, "topology line " + std::to_string(line_no) + ": expected a tick count");
    return static_cast<std::int64_t>(v);
}

}  // namespace

// ---------------------------------------------------------------------------
// Topology

FleetTopology::FleetTopology(double radius_m) : radius_m_(0.0) { set_radius(radius_m); }

void FleetTopology::set_radius(double radius_m) {
    if (!(radius_m > 0.0)) throw SwarmError(SK::BadTopology, "neighbor radius must be positive");
    radius_m_ = radius_m;
}

void FleetTopology::add_drone(std::string id, Vec2 position) {
    if (id.empty()) throw SwarmError(SK::BadTopology, "empty drone id");
    if (contains(id)) throw SwarmError(SK::BadTopology, "duplicate drone id " + id);
    drones_.push_back(DroneNode{std::move(id), position, std::nullopt, 1});
}

const DroneNode& FleetTopology::node(std::string_view id) const {
    for (const auto& d : drones_)
        if (d.id == id) return d;
    throw SwarmError(SK::UnknownDrone, "unknown drone " + std::string(id));
}

DroneNode& FleetTopology::node_mut(std::string_view id) {
    for (auto& d : drones_)
        if (d.id == id) return d;
    throw SwarmError(SK::UnknownDrone, "unknown drone " + std::string(id));
}

bool FleetTopology::contains(std::string_view id) const {
    return std::any_of(drones_.begin(), drones_.end(), [&](const DroneNode& d) { return d.id == id; });
}

void FleetTopology::set_link_down_at(std::string_view id, std::int64_t round) {
    node_mut(id).down_at = round;
}

void FleetTopology::set_latency(std::string_view id, std::int64_t rounds) {
    if (rounds < 1) throw SwarmError(SK::BadTopology, "latency must be at least one round");
    node_mut(id).latency_rounds = rounds;
}

bool FleetTopology::link_up(std::string_view id, std::int64_t round) const {
    const auto& n = node(id);
    return !n.down_at || round < *n.down_at;
}

bool FleetTopology::neighbors(std::string_view a, std::string_view b) const {
    if (a == b) return false;
    return distance(node(a).position, node(b).position) <= radius_m_;
}

bool apply_topology_line(FleetTopology& topo, std::span<const std::string_view> p, std::size_t line_no) {
    if (p.empty()) return false;
    auto bad = [&](const std::string& msg) {
        return SwarmError(SK::BadTopology, "topology line " + std::to_string(line_no) + ": " + msg);
    };
    if (p[0] == "DRONE") {
        if (p.size() != 4) throw bad("expected DRONE <id> <x_m> <y_m>");
        topo.add_drone(std::string(p[1]), {number_or_throw(p[2], line_no), number_or_throw(p[3], line_no)});
        return true;
    }
    if (p[0] == "RADIUS") {
        if (p.size() != 2) throw bad("expected RADIUS <m>");
        topo.set_radius(number_or_throw(p[1], line_no));
        return true;
    }
    if (p[0] == "LINK") {
        if (p.size() != 4) throw bad("expected LINK <id> DOWN_AT <tick>");
        if (p[2] == "DOWN_AT")
            topo.set_link_down_at(p[1], int_or_throw(p[3], line_no));
        else if (p[2] == "LATENCY")
            topo.set_latency(p[1], int_or_throw(p[3], line_no));
        else
            throw bad("unknown LINK attribute '" + std::string(p[2]) + "'");
        return true;
    }
    return false;
}

FleetTopology parse_topology(std::istream& in) {
    FleetTopology topo;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto parts = split_ws(line);
        if (parts.empty()) continue;
        if (!apply_topology_line(topo, parts, n))
            throw SwarmError(SK::BadTopology, "topology line " + std::to_string(n) + ": unknown directive '" +
                                                  std::string(parts[0]) + "'");
    }
    return topo;
}

// ---------------------------------------------------------------------------
// Fabric

void SwarmFabric::enqueue(const SwarmMessage& msg, const std::string& receiver, std::int64_t sent_round,
                          std::int64_t due) {
    pending_.push_back(Pending{due, order_++, receiver, msg});
    trace_.push_back("round=" + std::to_string(sent_round) + " due=" + std::to_string(due) + " to=" + receiver + " " +
                     describe(msg));
}

DeliveryReport SwarmFabric::broadcast(const SwarmMessage& msg, std::int64_t round) {
    DeliveryReport report{msg.sender, round, {}};
    if (!topology_->link_up(msg.sender, round)) return report;
    for (const auto& d : topology_->drones()) {
        if (!topology_->neighbors(msg.sender, d.id) || !topology_->link_up(d.id, round)) continue;
        std::int64_t due = round + d.latency_rounds;
        enqueue(msg, d.id, round, due);
        report.deliveries.push_back({d.id, due});
    }
    return report;
}

DeliveryReport SwarmFabric::broadcast_group(std::string_view origin, const Alert& alert, std::int64_t round,
                                            Timestamp now) {
    if (alert.level != ActionLevel::Group && alert.level != ActionLevel::Emergency)
        throw SwarmError(SK::NotBroadcastable, "only Group and Emergency alerts are broadcast (got " +
                                                   std::string(to_string(alert.level)) + ")");
    SwarmMessage msg = make_group_alert(alert, now);
    msg.sender = std::string(origin);
    return broadcast(msg, round);
}

std::optional<Delivery> SwarmFabric::send(const SwarmMessage& msg, std::int64_t round) {
    if (!topology_->neighbors(msg.sender, msg.recipient)) return std::nullopt;
    if (!topology_->link_up(msg.sender, round) || !topology_->link_up(msg.recipient, round)) return std::nullopt;
    std::int64_t due = round + topology_->node(msg.recipient).latency_rounds;
    enqueue(msg, msg.recipient, round, due);
    return Delivery{msg.recipient, due};
}

std::vector<SwarmMessage> SwarmFabric::collect(std::string_view receiver, std::int64_t round) {
    std::vector<SwarmMessage> out;
    auto keep = pending_.begin();
    for (auto it = pending_.begin(); it != pending_.end(); ++it) {
        if (it->receiver == receiver && it->round <= round) {
            out.push_back(std::move(it->msg));
        } else {
            if (keep != it) *keep = std::move(*it);
            ++keep;
        }
    }
    pending_.erase(keep, pending_.end());
    return out;
}

// ---------------------------------------------------------------------------
// Audit repository

void AuditRepository::ingest(const SwarmMessage& batch) {
    auto lines = std::get_if<std::vector<std::string>>(&batch.payload);
    if (batch.kind != MessageKind::LogBatch || !lines) throw std::invalid_argument("repository accepts LOG_BATCH only");
    for (const auto& l : *lines) append(batch.sender, l);
}

void AuditRepository::append(const std::string& drone, const std::string& line) {
    entries_.emplace_back(drone, line);
    ++high_water_[drone];
}

std::size_t AuditRepository::high_water(std::string_view drone) const {
    auto it = high_water_.find(drone);
    return it == high_water_.end() ? 0 : it->second;
}

std::vector<std::string> AuditRepository::lines_of(std::string_view drone) const {
    std::vector<std::string> out;
    for (const auto& [d, l] : entries_)
        if (d == drone) out.push_back(l);
    return out;
}

void AuditRepository::dump(std::ostream& out) const {
    for (const auto& [d, l] : entries_) out << d << ' ' << l << '\n';
}

std::size_t LogForwarder::tick(AuditRepository& repo, bool link_up, Timestamp now) {
    if (!link_up || high_water_ == local_.size()) return high_water_;
    std::vector<std::string> batch(local_.begin() + static_cast<std::ptrdiff_t>(high_water_), local_.end());
    repo.ingest(make_log_batch(drone_, std::move(batch), now));
    high_water_ = local_.size();
    return high_water_;
}

}  // namespace dronesentry
