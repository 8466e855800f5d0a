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

#include "dronesentry/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <numbers>
#include <sstream>

#include "dronesentry/countermeasures.hpp"
#include "dronesentry/locate.hpp"
#include "dronesentry/rng.hpp"
#include "dronesentry/swarm.hpp"

namespace dronesentry {

namespace {

// Arrival-time jitter of simulated receivers, seconds.
constexpr double kTimingNoiseS = 10e-9;
constexpr double kBearingNoiseDeg = 0.5;
// Stream index for triangulation noise, clear of per-drone generator streams.
constexpr std::uint64_t kTriangStream = 1u << 20;

template <typename F>
auto attributed(std::string_view module, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string(module) + ": " + e.what());
    }
}

class CollectingSink final : public EventSink {
public:
    void accept(const TelemetryEvent& e, std::uint64_t) override { events.push_back(e); }
    std::vector<TelemetryEvent> events;
};

struct DroneContext {
    std::string id;
    std::vector<TelemetryEvent> events;
    std::vector<std::vector<RuleMatch>> matches;
    std::string log_text;
    IngestStats ingest;
    std::size_t cursor = 0;

    AnalyticsEngine engine;
    CountermeasureState cm;
    LogForwarder forwarder;
    std::optional<std::int64_t> destroyed;

    Mode peak = Mode::Normal;
    std::optional<Mode> pre_deescalation;
    std::optional<std::int64_t> swarm_entry_round;
    // countermeasure triggers already handled since the drone was last Normal
    std::set<std::string, std::less<>> handled;
    std::map<CaptureMode, std::int64_t> capture_ticks;

    DroneContext(std::string drone, const AnalyticsConfig& config)
        : id(drone), engine(drone, config), forwarder(drone) {}
};

struct Triangulation {
    std::string origin;
    std::int64_t requested_round = 0;
    std::size_t expected = 0;
    std::vector<TriangObservation> observations;
    std::optional<std::int64_t> solved_round;
    std::optional<EmitterEstimate> tdoa;
    std::optional<EmitterEstimate> bearing;
    std::string failure;
};

std::string or_none(const std::optional<std::int64_t>& v) { return v ? std::to_string(*v) : "none"; }

bool parse_double(std::string_view s, double& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

TriangObservation observe_emitter(Vec2 emitter, Vec2 receiver, double clock_offset_s, Lcg& rng) {
    Vec2 d = emitter - receiver;
    double arrival = d.norm() / kSpeedOfLight + clock_offset_s + rng.uniform(-kTimingNoiseS, kTimingNoiseS);
    double bearing = std::atan2(d.x, d.y) * 180.0 / std::numbers::pi + rng.uniform(-kBearingNoiseDeg, kBearingNoiseDeg);
    return TriangObservation{receiver, arrival, bearing};
}

}  // namespace

// ---------------------------------------------------------------------------
// Report

void RunReport::set(std::string key, std::string value) {
    for (auto& [k, v] : entries_)
        if (k == key) {
            v = std::move(value);
            return;
        }
    entries_.emplace_back(std::move(key), std::move(value));
}

void RunReport::set(std::string key, double value) { set(std::move(key), format_number(value)); }

void RunReport::set(std::string key, std::int64_t value) { set(std::move(key), std::to_string(value)); }

std::optional<std::string> RunReport::get(std::string_view key) const {
    for (const auto& [k, v] : entries_)
        if (k == key) return v;
    return std::nullopt;
}

std::optional<double> RunReport::number(std::string_view key) const {
    auto v = get(key);
    double d = 0.0;
    if (!v || !parse_double(*v, d)) return std::nullopt;
    return d;
}

std::string RunReport::to_text() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + ' ' + v + '\n';
    return out;
}

std::vector<std::string_view> rules_detecting(AttackKind kind) {
    switch (kind) {
        case AttackKind::GpsSpoof: return {"gps_spoof", "sat_count_anomaly", kIntervalConstancyRule};
        case AttackKind::GpsJam: return {"lost_link", "gps_spoof"};
        case AttackKind::WifiDeauth: return {"wifi_deauth", "wifi_power_anomaly"};
        case AttackKind::Ddos: return {"ddos"};
        case AttackKind::None: return {};
    }
    return {};
}

// ---------------------------------------------------------------------------
// Run

RunResult run_scenario(const ScenarioSpec& spec, const std::vector<SignatureRule>& rules,
                       const AnalyticsConfig& config) {
    RunResult result;
    auto& art = result.artifacts;

    GeneratedScenario gen = attributed("scenario", [&] { return generate(spec); });
    art["truth.txt"] = format_truth(spec);
    for (const auto& s : gen.drones) art["records/" + s.drone + ".records"] = format_stream(s);

    // Destroyed drones drop off the fabric at the moment of destruction.
    FleetTopology topo = spec.fleet;
    for (const auto& [id, tick] : spec.destroyed) {
        const auto& n = topo.node(id);
        topo.set_link_down_at(id, n.down_at ? std::min(*n.down_at, tick) : tick);
    }

    std::vector<DroneContext> drones;
    drones.reserve(gen.drones.size());
    for (auto& stream : gen.drones) {
        DroneContext& d = drones.emplace_back(stream.drone, config);
        d.destroyed = spec.destroyed_at(stream.drone);

        attributed("preprocess", [&] {
            std::vector<std::unique_ptr<VectorSource>> sources;
            for (auto kind : {SourceKind::RfSample, SourceKind::GpsStatus, SourceKind::WifiFrame, SourceKind::NetCounter,
                              SourceKind::MfrLog}) {
                std::vector<RawRecord> mine;
                for (const auto& r : stream.records)
                    if (r.kind == kind) mine.push_back(r);
                sources.push_back(std::make_unique<VectorSource>(std::string(to_string(kind)), kind, std::move(mine)));
            }
            std::vector<RecordSource*> ptrs;
            for (auto& s : sources) ptrs.push_back(s.get());
            std::ostringstream log;
            LogWriter writer(log);
            CollectingSink sink;
            d.ingest = run_pipeline(ptrs, stream.track, sink, writer);
            d.events = std::move(sink.events);
            d.log_text = log.str();
        });
        attributed("rules-engine", [&] {
            d.matches.reserve(d.events.size());
            for (const auto& e : d.events) d.matches.push_back(eval_event(rules, e));
        });
        art["logs/" + d.id + ".log"] = d.log_text;
    }

    const CountermeasurePolicy policy;
    // GNSS fallback triggers share one key so a single attack rotates once.
    auto trigger_key = [&](const Alert& a) {
        if (policy.gnss_rotation_rules.count(a.rule) || a.rule == policy.lost_link_rule) return std::string("gnss");
        return a.rule;
    };

    SwarmFabric fabric(topo);
    AuditRepository repo;
    std::string alerts_log, modes_log, actions_log;
    std::vector<Alert> all_alerts;
    std::optional<std::int64_t> first_group_round;
    std::vector<std::string> first_group_reach;
    std::optional<Triangulation> triang;
    Lcg triang_rng = Lcg::derive(spec.seed, kTriangStream);
    auto clock_offset = [&](std::string_view id) {
        auto it = spec.clock_offset_s.find(id);
        return it == spec.clock_offset_s.end() ? 0.0 : it->second;
    };

    auto index_of = [&](std::string_view id) {
        for (std::size_t i = 0; i < drones.size(); ++i)
            if (drones[i].id == id) return i;
        throw std::logic_error("unknown drone " + std::string(id));
    };

    for (std::int64_t t = 0; t < spec.duration_s; ++t) {
        const Timestamp now = spec.start + t;
        for (auto& d : drones) {
            if (d.destroyed && t >= *d.destroyed) continue;
            const Vec2 here = topo.node(d.id).position;

            std::vector<SwarmMessage> swarm_inputs;
            for (auto& msg : attributed("swarm-net", [&] { return fabric.collect(d.id, t); })) {
                if (msg.kind == MessageKind::GroupAlert) {
                    swarm_inputs.push_back(std::move(msg));
                } else if (msg.kind == MessageKind::AssistRequest && spec.emitter) {
                    auto obs = observe_emitter(*spec.emitter, here, clock_offset(d.id), triang_rng);
                    attributed("swarm-net", [&] { return fabric.send(make_triang_obs(d.id, msg.sender, obs, now), t); });
                } else if (msg.kind == MessageKind::TriangObs && triang && triang->origin == d.id) {
                    triang->observations.push_back(std::get<TriangObservation>(msg.payload));
                }
            }

            std::vector<Alert> alerts;
            attributed("analytics-engine", [&] {
                for (; d.cursor < d.events.size() && d.events[d.cursor].timestamp <= now; ++d.cursor) {
                    const auto& e = d.events[d.cursor];
                    for (auto& a : d.engine.observe(e)) alerts.push_back(std::move(a));
                    for (const auto& m : d.matches[d.cursor])
                        for (auto& a : d.engine.ingest_match(m, now, d.engine.odometer_m())) alerts.push_back(std::move(a));
                    d.forwarder.write(format_event(e));
                }
            });

            ModeTransition tr = d.engine.step_mode(alerts, swarm_inputs, now);
            if (tr.changed()) {
                modes_log += format_transition(d.id, tr) + '\n';
                if (rank(tr.to) > rank(d.peak)) d.peak = tr.to;
                if (rank(tr.to) < rank(tr.from) && !d.pre_deescalation) d.pre_deescalation = tr.from;
                if (is_swarm(tr.to) && !d.swarm_entry_round) d.swarm_entry_round = t;
            }

            attributed("countermeasures", [&] {
                auto apply = [&](const Alert* a) {
                    auto res = apply_policy(d.cm, a, d.engine.mode(), now, policy);
                    d.cm = res.state;
                    for (const auto& act : res.actions) actions_log += format_action(d.id, act) + '\n';
                };
                // A sustained attack keeps re-raising the same alert; its
                // countermeasure fires once per escalation episode.
                for (const auto& a : alerts) {
                    if (d.handled.insert(trigger_key(a)).second) apply(&a);
                }
                if (tr.changed()) apply(nullptr);
                if (d.engine.mode() == Mode::Normal) d.handled.clear();
            });

            for (const auto& a : alerts) {
                alerts_log += format_alert(a) + '\n';
                all_alerts.push_back(a);
                if (a.level < ActionLevel::Group) continue;
                auto rep = attributed("swarm-net", [&] { return fabric.broadcast_group(d.id, a, t, now); });
                if (!first_group_round && !rep.deliveries.empty()) {
                    first_group_round = t;
                    for (const auto& del : rep.deliveries) first_group_reach.push_back(del.receiver);
                }
                if (spec.emitter && !triang && topo.link_up(d.id, t)) {
                    Triangulation tri;
                    tri.origin = d.id;
                    tri.requested_round = t;
                    tri.observations.push_back(observe_emitter(*spec.emitter, here, clock_offset(d.id), triang_rng));
                    auto req = attributed("swarm-net", [&] { return fabric.broadcast(make_assist_request(d.id, now), t); });
                    tri.expected = 1 + req.deliveries.size();
                    triang = std::move(tri);
                }
            }

            if (triang && triang->origin == d.id && !triang->solved_round && triang->failure.empty() &&
                triang->observations.size() >= triang->expected) {
                triang->solved_round = t;
                try {
                    triang->tdoa = tdoa_locate(triang->observations);
                    triang->bearing = bearing_locate(triang->observations);
                } catch (const SwarmError& e) {
                    triang->failure = e.what();
                }
            }

            ++d.capture_ticks[d.cm.capture_mode];
            attributed("swarm-net", [&] { return d.forwarder.tick(repo, topo.link_up(d.id, t), now); });
        }
    }

    std::ostringstream repo_dump;
    repo.dump(repo_dump);
    art["repository.log"] = repo_dump.str();
    art["alerts.log"] = alerts_log;
    art["modes.log"] = modes_log;
    art["actions.log"] = actions_log;
    std::string trace;
    for (const auto& l : fabric.trace()) trace += l + '\n';
    art["messages.log"] = trace;

    // -- report --------------------------------------------------------------
    RunReport& rep = result.report;
    rep.set("scenario", spec.name);
    rep.set("seed", std::to_string(spec.seed));
    rep.set("duration_s", spec.duration_s);
    rep.set("drones", drones.size());

    std::uint64_t events_total = 0, dropped = 0;
    for (const auto& d : drones) {
        events_total += d.ingest.total_normalized();
        dropped += d.ingest.total_dropped();
    }
    rep.set("events_total", static_cast<std::int64_t>(events_total));
    rep.set("records_dropped", static_cast<std::int64_t>(dropped));

    rep.set("alerts_total", all_alerts.size());
    std::map<std::string, std::int64_t> per_rule;
    for (const auto& r : rules) per_rule[r.name] = 0;
    per_rule[std::string(kIntervalConstancyRule)] += 0;
    std::int64_t elevated_alerts = 0;
    for (const auto& a : all_alerts) {
        ++per_rule[a.rule];
        if (a.level >= ActionLevel::Elevated) ++elevated_alerts;
    }
    rep.set("alerts_elevated_or_above", elevated_alerts);
    for (const auto& [rule, n] : per_rule) rep.set("alerts." + rule, n);

    auto qualifies = [&](const Alert& a, const AttackInterval& atk) {
        auto names = rules_detecting(atk.kind);
        if (std::find(names.begin(), names.end(), a.rule) == names.end() || !atk.targets(a.drone)) return false;
        auto at = a.last - spec.start;
        return atk.start_s <= at && at <= atk.end_s;
    };

    for (std::size_t i = 0; i < spec.attacks.size(); ++i) {
        const auto& atk = spec.attacks[i];
        const std::string k = "attack." + std::to_string(i) + ".";
        rep.set(k + "kind", std::string(to_string(atk.kind)));
        rep.set(k + "target", atk.target);
        rep.set(k + "start_s", atk.start_s);
        rep.set(k + "end_s", atk.end_s);
        std::optional<std::int64_t> best;
        for (auto rule : rules_detecting(atk.kind)) {
            std::optional<std::int64_t> first;
            for (const auto& a : all_alerts)
                if (a.rule == rule && qualifies(a, atk)) {
                    auto lat = (a.last - spec.start) - atk.start_s;
                    if (!first || lat < *first) first = lat;
                }
            if (first) rep.set(k + "latency_s." + std::string(rule), *first);
            if (first && (!best || *first < *best)) best = first;
        }
        rep.set(k + "detected", std::string(best ? "true" : "false"));
        rep.set(k + "latency_s", or_none(best));
    }

    std::int64_t fp = 0, fp_elevated = 0;
    for (const auto& a : all_alerts) {
        bool explained = std::any_of(spec.attacks.begin(), spec.attacks.end(),
                                     [&](const AttackInterval& atk) { return qualifies(a, atk); });
        if (explained) continue;
        ++fp;
        if (a.level >= ActionLevel::Elevated) ++fp_elevated;
    }
    rep.set("false_positives", fp);
    rep.set("false_positives_elevated", fp_elevated);

    std::size_t log_total = 0, audit_total = 0;
    for (const auto& d : drones) {
        const std::string k = "drone." + d.id + ".";
        rep.set(k + "final_mode", std::string(to_string(d.engine.mode())));
        rep.set(k + "peak_mode", std::string(to_string(d.peak)));
        rep.set(k + "pre_deescalation_mode", std::string(to_string(d.pre_deescalation.value_or(d.engine.mode()))));
        rep.set(k + "swarm_entry_round", or_none(d.swarm_entry_round));
        rep.set(k + "destroyed_at", or_none(d.destroyed));
        rep.set(k + "active_gnss", std::string(to_string(d.cm.active_gnss)));
        rep.set(k + "comm_channel", std::string(to_string(d.cm.comm_channel)));
        rep.set(k + "capture_mode", std::string(to_string(d.cm.capture_mode)));
        for (auto c : {CaptureMode::TimeLapse, CaptureMode::ElevatedCapture, CaptureMode::Streaming}) {
            auto it = d.capture_ticks.find(c);
            rep.set(k + "capture_ticks." + std::string(to_string(c)), it == d.capture_ticks.end() ? 0 : it->second);
        }
        rep.set(k + "log_forwarding", std::string(d.cm.log_forwarding ? "true" : "false"));

        const auto& local = d.forwarder.local_log();
        auto stored = repo.lines_of(d.id);
        bool prefix = stored.size() <= local.size() && std::equal(stored.begin(), stored.end(), local.begin());
        rep.set(k + "log_lines", local.size());
        rep.set(k + "audit_lines", stored.size());
        rep.set(k + "audit_prefix", std::string(prefix ? "true" : "false"));
        // ticks whose lines all reached the repository
        std::int64_t covered = 0;
        if (prefix) {
            std::size_t i = 0;
            for (std::int64_t tick = 0;; ++tick) {
                auto at = spec.start + tick;
                std::size_t j = i;
                while (j < d.events.size() && d.events[j].timestamp == at) ++j;
                if (j == i || j > stored.size()) break;
                i = j;
                covered = tick + 1;
            }
            if (stored.size() != i) covered = -1;  // repository ends mid-tick
        }
        rep.set(k + "audit_ticks", covered);
        log_total += d.events.size();
        audit_total += stored.size();
    }
    rep.set("audit_completeness", log_total ? static_cast<double>(audit_total) / static_cast<double>(log_total) : 1.0);

    rep.set("swarm.first_group_round", or_none(first_group_round));
    rep.set("swarm.reached", first_group_reach.size());
    if (first_group_round) {
        std::optional<std::int64_t> worst = 0;
        for (const auto& id : first_group_reach) {
            const auto& d = drones[index_of(id)];
            if (!d.swarm_entry_round) {
                worst.reset();
                break;
            }
            worst = std::max(*worst, *d.swarm_entry_round - *first_group_round);
        }
        rep.set("swarm.reach_rounds", or_none(worst));
    } else {
        rep.set("swarm.reach_rounds", std::string("none"));
    }

    if (spec.emitter) {
        rep.set("triangulation.planted", std::string("true"));
        if (!triang) {
            rep.set("triangulation.status", std::string("not_requested"));
        } else {
            rep.set("triangulation.origin", triang->origin);
            rep.set("triangulation.requested_round", triang->requested_round);
            rep.set("triangulation.receivers", triang->observations.size());
            if (triang->tdoa) {
                rep.set("triangulation.status", std::string("solved"));
                rep.set("triangulation.solved_round", *triang->solved_round);
                rep.set("triangulation.tdoa_error_m", distance(triang->tdoa->position, *spec.emitter));
                rep.set("triangulation.tdoa_residual_m", triang->tdoa->residual);
                rep.set("triangulation.bearing_error_m", distance(triang->bearing->position, *spec.emitter));
            } else {
                rep.set("triangulation.status", std::string(triang->failure.empty() ? "pending" : "failed"));
            }
        }
    }

    art["report.txt"] = rep.to_text();
    return result;
}

void write_run(const RunResult& r, const std::filesystem::path& out) {
    for (const auto& [rel, text] : r.artifacts) {
        auto path = out / rel;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        f << text;
        if (!f) throw std::runtime_error("cannot write " + path.string());
    }
}

// ---------------------------------------------------------------------------
// Expectations

std::vector<Expectation> parse_expectations(std::istream& in) {
    static const std::vector<std::string_view> ops = {"==", "!=", "<", "<=", ">", ">="};
    std::vector<Expectation> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto p = split_ws(line);
        if (p.empty()) continue;
        if (p.size() != 3 || std::find(ops.begin(), ops.end(), p[1]) == ops.end())
            throw std::invalid_argument("expectation line " + std::to_string(n) + ": expected <key> <op> <value>");
        out.push_back({std::string(p[0]), std::string(p[1]), std::string(p[2]), n});
    }
    return out;
}

std::vector<std::string> check_expectations(const RunReport& report, const std::vector<Expectation>& expectations) {
    std::vector<std::string> failures;
    for (const auto& x : expectations) {
        auto actual = report.get(x.key);
        if (!actual) {
            failures.push_back(x.key + ": missing from report");
            continue;
        }
        double a = 0.0, b = 0.0;
        int c = 0;
        if (parse_double(*actual, a) && parse_double(x.value, b))
            c = a < b ? -1 : (a > b ? 1 : 0);
        else
            c = actual->compare(x.value) < 0 ? -1 : (actual->compare(x.value) > 0 ? 1 : 0);
        bool ok = (x.op == "==" && c == 0) || (x.op == "!=" && c != 0) || (x.op == "<" && c < 0) ||
                  (x.op == "<=" && c <= 0) || (x.op == ">" && c > 0) || (x.op == ">=" && c >= 0);
        if (!ok) failures.push_back(x.key + ": expected " + x.op + " " + x.value + ", got " + *actual);
    }
    return failures;
}

}  // namespace dronesentry
