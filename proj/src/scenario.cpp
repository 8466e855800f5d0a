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

#include "dronesentry/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dronesentry/rng.hpp"

namespace dronesentry {

namespace {

constexpr double kEarthRadiusM = 6371000.0;
constexpr std::int64_t kMfrPeriodS = 10;

struct LineError {
    std::size_t line;
    [[noreturn]] void operator()(const std::string& msg) const {
        throw InvalidSpec("scenario line " + std::to_string(line) + ": " + msg);
    }
};

double to_double(std::string_view s, const LineError& fail) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        fail("bad number '" + std::string(s) + "'");
    return v;
}

std::int64_t to_int(std::string_view s, const LineError& fail) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail("bad integer '" + std::string(s) + "'");
    return v;
}

// Divides by an integral scale so the result is the double nearest the decimal.
double round_to(double v, double step) {
    const double scale = std::round(1.0 / step);
    return std::round(v * scale) / scale;
}

std::string num(double v) { return format_number(v); }

RawRecord record(SourceKind kind, Timestamp at, std::vector<std::pair<std::string, std::string>> fields) {
    return RawRecord{kind, at, std::move(fields)};
}

}  // namespace

std::string_view to_string(AttackKind k) {
    switch (k) {
        case AttackKind::GpsJam: return "GPS_JAM";
        case AttackKind::GpsSpoof: return "GPS_SPOOF";
        case AttackKind::WifiDeauth: return "WIFI_DEAUTH";
        case AttackKind::Ddos: return "DDOS";
        case AttackKind::None: return "NONE";
    }
    return "NONE";
}

std::optional<AttackKind> parse_attack_kind(std::string_view text) {
    for (auto k : {AttackKind::GpsJam, AttackKind::GpsSpoof, AttackKind::WifiDeauth, AttackKind::Ddos, AttackKind::None})
        if (to_string(k) == text) return k;
    return std::nullopt;
}

std::optional<std::int64_t> ScenarioSpec::destroyed_at(std::string_view drone) const {
    auto it = destroyed.find(drone);
    if (it == destroyed.end()) return std::nullopt;
    return it->second;
}

ScenarioSpec parse_scenario(std::istream& in) {
    ScenarioSpec spec;
    bool have_duration = false;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        LineError fail{n};
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto p = split_ws(line);
        if (p.empty()) continue;
        const auto key = p[0];
        auto arity = [&](std::size_t k) {
            if (p.size() != k) fail("'" + std::string(key) + "' expects " + std::to_string(k - 1) + " value(s)");
        };

        try {
            if (apply_topology_line(spec.fleet, p, n)) continue;
        } catch (const SwarmError& e) {
            fail(e.what());
        }

        if (key == "name") {
            arity(2);
            spec.name = std::string(p[1]);
        } else if (key == "seed") {
            arity(2);
            auto v = to_int(p[1], fail);
            if (v < 0) fail("seed must be non-negative");
            spec.seed = static_cast<std::uint64_t>(v);
        } else if (key == "duration_s") {
            arity(2);
            spec.duration_s = to_int(p[1], fail);
            if (spec.duration_s <= 0) fail("duration_s must be positive");
            have_duration = true;
        } else if (key == "start") {
            arity(2);
            auto ts = Timestamp::parse(p[1]);
            if (!ts) fail("bad start timestamp");
            spec.start = *ts;
        } else if (key == "origin") {
            arity(4);
            spec.origin = {to_double(p[1], fail), to_double(p[2], fail), to_double(p[3], fail)};
            if (!is_valid(spec.origin)) fail("origin out of range");
        } else if (key == "LEG") {
            arity(4);
            FlightLeg leg{to_int(p[1], fail), to_double(p[2], fail), to_double(p[3], fail)};
            if (leg.speed_kmh < 0) fail("negative speed");
            if (!spec.legs.empty() && leg.start_s <= spec.legs.back().start_s) fail("LEG starts must increase");
            spec.legs.push_back(leg);
        } else if (key == "ATTACK") {
            if (p.size() < 4) fail("expected ATTACK <kind> <start_s> <end_s> [key=value...]");
            auto kind = parse_attack_kind(p[1]);
            if (!kind) fail("unknown attack kind '" + std::string(p[1]) + "'");
            AttackInterval a{*kind, to_int(p[2], fail), to_int(p[3], fail), "*"};
            for (std::size_t i = 4; i < p.size(); ++i) {
                auto eq = p[i].find('=');
                if (eq == std::string_view::npos) fail("expected key=value, got '" + std::string(p[i]) + "'");
                auto k = p[i].substr(0, eq);
                auto v = p[i].substr(eq + 1);
                if (k != "target") fail("unknown attack parameter '" + std::string(k) + "'");
                if (v.empty()) fail("empty target");
                a.target = std::string(v);
            }
            spec.attacks.push_back(std::move(a));
        } else if (key == "DESTROY") {
            arity(3);
            if (!spec.fleet.contains(p[1])) fail("DESTROY names unknown drone " + std::string(p[1]));
            auto tick = to_int(p[2], fail);
            if (tick < 0) fail("negative destruction tick");
            spec.destroyed[std::string(p[1])] = tick;
        } else if (key == "CLOCK_OFFSET") {
            arity(3);
            if (!spec.fleet.contains(p[1])) fail("CLOCK_OFFSET names unknown drone " + std::string(p[1]));
            spec.clock_offset_s[std::string(p[1])] = to_double(p[2], fail);
        } else if (key == "EMITTER") {
            arity(3);
            spec.emitter = Vec2{to_double(p[1], fail), to_double(p[2], fail)};
        } else {
            fail("unknown directive '" + std::string(key) + "'");
        }
    }

    if (!have_duration) throw InvalidSpec("scenario has no duration_s");
    if (spec.fleet.drones().empty()) throw InvalidSpec("scenario has no DRONE lines");
    if (spec.name.empty()) throw InvalidSpec("scenario has no name");
    for (const auto& a : spec.attacks) {
        if (a.start_s < 0 || a.end_s > spec.duration_s || a.start_s >= a.end_s)
            throw InvalidSpec("attack " + std::string(to_string(a.kind)) + " interval [" + std::to_string(a.start_s) +
                              ", " + std::to_string(a.end_s) + ") outside [0, duration_s]");
        if (a.target != "*" && !spec.fleet.contains(a.target))
            throw InvalidSpec("attack targets unknown drone " + a.target);
    }
    return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidSpec("cannot open scenario " + path.string());
    return parse_scenario(in);
}

GeneratedScenario generate(const ScenarioSpec& spec) {
    GeneratedScenario out;
    const auto& drones = spec.fleet.drones();
    const double lat0 = spec.origin.latitude_deg * std::numbers::pi / 180.0;
    const double deg_per_m_lat = 180.0 / (std::numbers::pi * kEarthRadiusM);
    const double deg_per_m_lon = deg_per_m_lat / std::max(std::cos(lat0), 1e-9);

    auto leg_at = [&](std::int64_t t) {
        FlightLeg current;
        for (const auto& l : spec.legs)
            if (l.start_s <= t) current = l;
        return current;
    };

    for (std::size_t di = 0; di < drones.size(); ++di) {
        const auto& node = drones[di];
        DroneStream s;
        s.drone = node.id;
        Lcg rng = Lcg::derive(spec.seed, di);
        auto active = [&](AttackKind k, std::int64_t t) {
            return std::any_of(spec.attacks.begin(), spec.attacks.end(),
                               [&](const AttackInterval& a) { return a.kind == k && a.targets(node.id) && a.active(t); });
        };

        Vec2 pos = node.position;
        std::int64_t end = spec.duration_s;
        if (auto d = spec.destroyed_at(node.id)) end = std::min(end, *d);

        for (std::int64_t t = 0; t < end; ++t) {
            const Timestamp now = spec.start + t;
            if (t > 0) {
                FlightLeg prev = leg_at(t - 1);
                double h = prev.heading_deg * std::numbers::pi / 180.0;
                double step_m = prev.speed_kmh / 3.6;
                pos = pos + Vec2{std::sin(h), std::cos(h)} * step_m;
            }
            FlightLeg leg = leg_at(t);
            Kinematics k;
            k.at = now;
            k.speed_kmh = leg.speed_kmh;
            k.heading_deg = leg.heading_deg;
            k.geo = {round_to(spec.origin.latitude_deg + pos.y * deg_per_m_lat, 1e-6),
                     round_to(spec.origin.longitude_deg + pos.x * deg_per_m_lon, 1e-6), spec.origin.altitude_m};
            s.track.add(k);

            // Baseline draws happen every tick in a fixed order so that an
            // attack never shifts the random stream outside its interval.
            const auto sats = rng.uniform_int(4, 8);
            const double interval = round_to(rng.uniform(0.9, 1.1), 1e-4);
            const double gps_l1 = round_to(rng.uniform(-133.0, -127.0), 0.01);
            const double glonass_l1 = round_to(rng.uniform(-133.0, -127.0), 0.01);
            const double wifi = round_to(rng.uniform(-75.0, -65.0), 0.01);
            const auto packets = rng.uniform_int(50, 100);
            const auto bytes_per_packet = rng.uniform_int(64, 1500);
            const double attack_power = rng.uniform(-2.0, 2.0);
            const auto burst = rng.uniform_int(8, 15);
            const auto flood = rng.uniform_int(5000, 6000);
            const auto battery = 100 - (t * 60) / std::max<std::int64_t>(spec.duration_s, 1);

            const bool jam = active(AttackKind::GpsJam, t);
            const bool spoof = active(AttackKind::GpsSpoof, t);
            const bool deauth = active(AttackKind::WifiDeauth, t);
            const bool ddos = active(AttackKind::Ddos, t);

            if (jam) {
                s.records.push_back(record(SourceKind::GpsStatus, now, {{"fix", "false"}}));
            } else if (spoof) {
                s.records.push_back(
                    record(SourceKind::GpsStatus, now, {{"fix", "true"}, {"sat_count", "10"}, {"interval_s", num(1.0)}}));
            } else {
                s.records.push_back(record(SourceKind::GpsStatus, now,
                                           {{"fix", "true"}, {"sat_count", std::to_string(sats)}, {"interval_s", num(interval)}}));
            }

            double l1 = gps_l1;
            double g1 = glonass_l1;
            if (jam) {
                l1 = round_to(-90.0 + attack_power, 0.01);
                g1 = round_to(-90.0 - attack_power, 0.01);
            } else if (spoof) {
                l1 = round_to(-110.0 + attack_power, 0.01);
            }
            s.records.push_back(record(SourceKind::RfSample, now, {{"freq_mhz", num(1575.42)}, {"power_db", num(l1)}}));
            s.records.push_back(record(SourceKind::RfSample, now, {{"freq_mhz", num(1602.0)}, {"power_db", num(g1)}}));
            double w = deauth ? round_to(-30.0 + 1.5 * attack_power, 0.01) : wifi;
            s.records.push_back(record(SourceKind::RfSample, now, {{"freq_mhz", num(2437.0)}, {"power_db", num(w)}}));

            if (deauth)
                s.records.push_back(record(SourceKind::WifiFrame, now,
                                           {{"frame", "DEAUTH"}, {"src", "rogue_ap"}, {"count", std::to_string(burst)}}));
            else
                s.records.push_back(
                    record(SourceKind::WifiFrame, now, {{"frame", "BEACON"}, {"src", "home_ap"}, {"count", "1"}}));

            const auto pk = ddos ? flood : packets;
            s.records.push_back(record(SourceKind::NetCounter, now,
                                       {{"packets", std::to_string(pk)}, {"bytes", std::to_string(pk * bytes_per_packet)}}));

            if (t % kMfrPeriodS == 0)
                s.records.push_back(record(SourceKind::MfrLog, now,
                                           {{"severity", "INFO"}, {"msg", "heartbeat"}, {"battery", std::to_string(battery)}}));
        }
        out.drones.push_back(std::move(s));
    }
    return out;
}

std::string format_stream(const DroneStream& s) {
    std::ostringstream out;
    std::size_t r = 0;
    for (const auto& k : s.track.samples()) {
        out << format_flight_state(k) << '\n';
        while (r < s.records.size() && s.records[r].captured == k.at) out << format_raw_record(s.records[r++]) << '\n';
    }
    for (; r < s.records.size(); ++r) out << format_raw_record(s.records[r]) << '\n';
    return out.str();
}

std::string format_truth(const ScenarioSpec& spec) {
    std::ostringstream out;
    out << "scenario " << spec.name << '\n'
        << "seed " << spec.seed << '\n'
        << "start " << spec.start.to_string() << '\n'
        << "duration_s " << spec.duration_s << '\n';
    for (const auto& a : spec.attacks)
        out << "ATTACK " << to_string(a.kind) << ' ' << a.start_s << ' ' << a.end_s << " target=" << a.target << '\n';
    for (const auto& [id, tick] : spec.destroyed) out << "DESTROY " << id << ' ' << tick << '\n';
    for (const auto& [id, off] : spec.clock_offset_s) out << "CLOCK_OFFSET " << id << ' ' << num(off) << '\n';
    if (spec.emitter) out << "EMITTER " << num(spec.emitter->x) << ' ' << num(spec.emitter->y) << '\n';
    return out.str();
}

void write_generated(const ScenarioSpec& spec, const GeneratedScenario& g, const std::filesystem::path& out) {
    std::filesystem::create_directories(out / "records");
    for (const auto& s : g.drones) {
        std::ofstream f(out / "records" / (s.drone + ".records"), std::ios::binary);
        f << format_stream(s);
        if (!f) throw std::runtime_error("cannot write records for " + s.drone);
    }
    std::ofstream t(out / "truth.txt", std::ios::binary);
    t << format_truth(spec);
    if (!t) throw std::runtime_error("cannot write truth.txt");
}

}  // namespace dronesentry
