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

// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are pinned
// here; scenario-level expectations live next to the scenario files.
//
// usage: acceptance <source_dir> [path to the dronesentry CLI]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <unistd.h>

#include "dronesentry/analytics.hpp"
#include "dronesentry/locate.hpp"
#include "dronesentry/rules.hpp"
#include "dronesentry/runner.hpp"
#include "dronesentry/scenario.hpp"
#include "dronesentry/swarm.hpp"
#include "gen.hpp"

using namespace dronesentry;
namespace fs = std::filesystem;

namespace {

// criterion 1
constexpr double kMaxSpoofLatencyS = 5.0;
constexpr double kMaxRuntimeS = 5.0;
// criterion 3
constexpr double kMinBaselineCov = 0.05;
// criterion 4
constexpr int kTdoaTrials = 100;
constexpr double kSquareSideM = 200.0;
constexpr double kNoiselessErrorM = 1e-3;
constexpr double kNoiselessResidual = 1e-6;
constexpr double kTimingNoiseS = 10e-9;
constexpr double kNoisyMedianErrorM = 10.0;
// criterion 5
constexpr double kBearingTolM = 1e-9;
constexpr int kTranslations = 100;
// criterion 6
constexpr int kWindowInserts = 10000;
constexpr std::int64_t kWindowS = 3600;
// criterion 7
constexpr int kRoundTrips = 10000;
constexpr int kFuzzLines = 10000;
// criterion 8
constexpr int kModeCases = 1000;
constexpr std::int64_t kMaxReachRounds = 1;
// criterion 9
constexpr std::int64_t kLinkCutTick = 40;

fs::path g_root;
std::string g_cli;

struct Outcome {
    bool pass = true;
    std::string detail;
    void fail(const std::string& why) {
        if (pass) detail.clear();
        pass = false;
        detail += (detail.empty() ? "" : "; ") + why;
    }
    void note(const std::string& s) {
        if (pass) detail += (detail.empty() ? "" : "; ") + s;
    }
};

ScenarioSpec scenario(const std::string& name) { return load_scenario(g_root / "scenarios" / (name + ".scenario")); }

std::vector<SignatureRule> shipped_rules() {
    std::ifstream in(g_root / "data" / "default.rules");
    std::ostringstream s;
    s << in.rdbuf();
    return parse_rules(s.str());
}

AnalyticsConfig shipped_config() {
    std::ifstream in(g_root / "data" / "default.config");
    return parse_config(in);
}

std::string fmt(double v) {
    std::ostringstream s;
    s << v;
    return s.str();
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) out.push_back(l);
    return out;
}

// -- 1 ---------------------------------------------------------------------
Outcome spoof_detection() {
    Outcome o;
    auto started = std::chrono::steady_clock::now();
    auto r = run_scenario(scenario("gps_spoof"), shipped_rules(), shipped_config());
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    // first Emergency gps_spoof alert, read back from the alert log
    std::optional<double> first;
    const auto spec = scenario("gps_spoof");
    for (const auto& l : lines_of(r.artifacts.at("alerts.log"))) {
        std::istringstream ls(l);
        std::string ts, tag, drone, level, rule;
        ls >> ts >> tag >> drone >> level >> rule;
        if (rule == "gps_spoof" && level == "Emergency") {
            first = static_cast<double>(*Timestamp::parse(ts) - spec.start);
            break;
        }
    }
    const double start = static_cast<double>(spec.attacks.at(0).start_s);
    if (!first)
        o.fail("no gps_spoof Emergency alert");
    else if (*first < start || *first - start > kMaxSpoofLatencyS)
        o.fail("first alert at t=" + fmt(*first));
    auto mode = r.report.get("drone.A.pre_deescalation_mode");
    if (mode != "Evasive") o.fail("pre-de-escalation mode " + mode.value_or("?"));
    if (secs >= kMaxRuntimeS) o.fail("runtime " + fmt(secs) + " s");
    o.note("latency " + (first ? fmt(*first - start) : "-") + " s, mode " + mode.value_or("?") + ", runtime " +
           fmt(secs) + " s");
    return o;
}

// -- 2 ---------------------------------------------------------------------
Outcome baseline_quiet() {
    Outcome o;
    auto r = run_scenario(scenario("baseline"), shipped_rules(), shipped_config());
    auto n = r.report.number("alerts_elevated_or_above");
    if (n != 0.0) o.fail(fmt(n.value_or(-1)) + " alerts at Elevated or above");
    const auto spec = scenario("baseline");
    for (const auto& d : spec.fleet.drones())
        if (r.report.get("drone." + d.id + ".final_mode") != "Normal") o.fail("drone " + d.id + " not Normal");
    o.note("0 Elevated+ alerts, " + r.report.get("alerts_total").value_or("?") + " alerts total");
    return o;
}

// -- 3 ---------------------------------------------------------------------
Outcome gnss_detectors() {
    Outcome o;
    const auto spec = scenario("gps_spoof");
    const auto& atk = spec.attacks.at(0);
    auto r = run_scenario(spec, shipped_rules(), shipped_config());
    if (!r.report.get("attack.0.latency_s.sat_count_anomaly")) o.fail("sat_count_anomaly never fired in the attack");

    // GPS arrival clock rebuilt from the reported intervals, split by segment
    const auto generated = generate(spec);
    const auto& stream = generated.drones.at(0);
    std::vector<double> spoof, before, after;
    double clock = 0;
    for (const auto& rec : stream.records) {
        if (rec.kind != SourceKind::GpsStatus) continue;
        auto e = normalize(rec, stream.track.at(rec.captured));
        auto iv = e.number("interval_s");
        if (!iv) continue;
        if (e.number("sat_count") == 10.0 && !atk.active(rec.captured - spec.start)) o.fail("sat_count 10 outside attack");
        clock += *iv;
        auto tick = rec.captured - spec.start;
        (tick < atk.start_s ? before : atk.active(tick) ? spoof : after).push_back(clock);
    }
    const auto cfg = shipped_config();
    auto s = interval_constancy(spoof, cfg.cov_threshold, cfg.cov_min_samples);
    if (!s.evaluated || !s.indicator) o.fail("spoof segment not flagged (cov " + fmt(s.cov) + ")");
    for (auto* seg : {&before, &after}) {
        auto b = interval_constancy(*seg, cfg.cov_threshold, cfg.cov_min_samples);
        if (!b.evaluated || b.indicator || b.cov < kMinBaselineCov) o.fail("baseline segment cov " + fmt(b.cov));
    }
    o.note("spoof cov " + fmt(s.cov) + ", baseline cov " +
           fmt(interval_constancy(before, cfg.cov_threshold, cfg.cov_min_samples).cov) + " / " +
           fmt(interval_constancy(after, cfg.cov_threshold, cfg.cov_min_samples).cov));
    return o;
}

// -- 4 ---------------------------------------------------------------------
Outcome tdoa_oracle() {
    Outcome o;
    const std::vector<Vec2> rx{{0, 0}, {kSquareSideM, 0}, {kSquareSideM, kSquareSideM}, {0, kSquareSideM}};
    Lcg rng(4);
    double worst = 0, worst_res = 0;
    std::vector<double> noisy;
    for (int i = 0; i < kTdoaTrials; ++i) {
        Vec2 p{rng.uniform(0, kSquareSideM), rng.uniform(0, kSquareSideM)};
        std::vector<TriangObservation> clean, jittered;
        for (auto r : rx) {
            double t = distance(p, r) / kSpeedOfLight;
            clean.push_back({r, t, std::nullopt});
            jittered.push_back({r, t + rng.uniform(-kTimingNoiseS, kTimingNoiseS), std::nullopt});
        }
        auto e = tdoa_locate(clean);
        worst = std::max(worst, distance(e.position, p));
        worst_res = std::max(worst_res, e.residual);
        noisy.push_back(distance(tdoa_locate(jittered).position, p));
    }
    std::nth_element(noisy.begin(), noisy.begin() + kTdoaTrials / 2, noisy.end());
    double median = noisy[kTdoaTrials / 2];
    if (worst >= kNoiselessErrorM) o.fail("noiseless error " + fmt(worst));
    if (worst_res >= kNoiselessResidual) o.fail("noiseless residual " + fmt(worst_res));
    if (median >= kNoisyMedianErrorM) o.fail("noisy median " + fmt(median));
    o.note("max error " + fmt(worst) + " m, max residual " + fmt(worst_res) + ", noisy median " + fmt(median) + " m");
    return o;
}

// -- 5 ---------------------------------------------------------------------
Outcome bearing_intersection() {
    Outcome o;
    std::vector<TriangObservation> obs{{{0, 0}, std::nullopt, 90.0}, {{100, 100}, std::nullopt, 180.0}};
    auto e = bearing_locate(obs);
    double err = distance(e.position, {100, 0});
    if (err >= kBearingTolM) o.fail("analytic error " + fmt(err));
    Lcg rng(5);
    double worst = 0;
    for (int i = 0; i < kTranslations; ++i) {
        Vec2 shift{rng.uniform(-1e4, 1e4), rng.uniform(-1e4, 1e4)};
        auto moved = obs;
        for (auto& m : moved) m.receiver = m.receiver + shift;
        worst = std::max(worst, distance(bearing_locate(moved).position, Vec2{100, 0} + shift));
    }
    if (worst >= kBearingTolM) o.fail("translation error " + fmt(worst));
    o.note("analytic error " + fmt(err) + " m, worst translated " + fmt(worst) + " m");
    return o;
}

// -- 6 ---------------------------------------------------------------------
Outcome window_bound() {
    Outcome o;
    Lcg rng(6);
    MetadataWindow w(kWindowS);
    std::vector<MetadataRecord> history;
    Timestamp now(1583091608);
    for (int i = 0; i < kWindowInserts && o.pass; ++i) {
        now = now + (rng.uniform() < 0.3 ? 0 : rng.uniform_int(0, 2));
        history.push_back({now, kAllSelectors[rng.uniform_int(0, 4)], {{"i", double(i)}}});
        w.insert(history.back());
        // brute-force filter of the full history, compared element by element
        std::size_t k = 0;
        bool same = true;
        for (const auto& h : history) {
            if (now - h.at > kWindowS) continue;
            if (k >= w.size() || !(w.records()[k] == h)) same = false;
            ++k;
        }
        if (!same || k != w.size()) o.fail("mismatch after insert " + std::to_string(i));
        if (!w.empty() && now - w.records().front().at > kWindowS) o.fail("stale record after insert " + std::to_string(i));
    }
    o.note(std::to_string(kWindowInserts) + " inserts over " + std::to_string(now - history.front().at) + " s");
    return o;
}

// -- 7 ---------------------------------------------------------------------
Outcome round_trip_and_totality() {
    Outcome o;
    Lcg rng(7);
    int mismatches = 0;
    for (int i = 0; i < kRoundTrips; ++i) {
        auto e = testgen::event(rng);
        try {
            if (!(parse_event(format_event(e)) == e)) ++mismatches;
        } catch (const ParseError&) {
            ++mismatches;
        }
    }
    if (mismatches) o.fail(std::to_string(mismatches) + " round-trip mismatches");
    int events = 0, errors = 0, other = 0;
    for (int i = 0; i < kFuzzLines; ++i) {
        std::string line;
        auto n = rng.uniform_int(0, 120);
        for (std::int64_t k = 0; k < n; ++k) line += static_cast<char>(rng.uniform_int(0, 255));
        if (i % 2) {
            // splice random bytes into a valid line to get past the first field
            line = format_event(testgen::event(rng));
            auto pos = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(line.size()) - 1));
            line[pos] = static_cast<char>(rng.uniform_int(0, 255));
        }
        try {
            parse_event(line);
            ++events;
        } catch (const ParseError&) {
            ++errors;
        } catch (...) {
            ++other;
        }
    }
    if (other) o.fail(std::to_string(other) + " unstructured failures");
    o.note(std::to_string(kRoundTrips) + " round trips; fuzz " + std::to_string(events) + " events / " +
           std::to_string(errors) + " errors");
    return o;
}

// -- 8 ---------------------------------------------------------------------
Outcome mode_machine() {
    Outcome o;
    Lcg rng(8);
    int violations = 0;
    for (int c = 0; c < kModeCases; ++c) {
        const double quiet = static_cast<double>(rng.uniform_int(5, 300));
        ModeMachine m(quiet);
        Timestamp now(1583091608);
        for (int step = 0; step < 50; ++step) {
            now = now + rng.uniform_int(0, static_cast<std::int64_t>(quiet));
            std::vector<Alert> alerts;
            std::vector<SwarmMessage> swarm;
            if (rng.uniform() < 0.25) {
                Alert a;
                a.rule = "r";
                a.level = static_cast<ActionLevel>(rng.uniform_int(0, 3));
                alerts.push_back(a);
            }
            if (rng.uniform() < 0.1) {
                Alert a;
                a.level = ActionLevel::Group;
                auto msg = make_group_alert(a, now);
                msg.sender = "X";
                swarm.push_back(msg);
            }
            const Mode before = m.mode();
            const auto support = m.last_support();
            const auto tr = m.step(alerts, swarm, now);
            if (rank(tr.to) > rank(before) && alerts.empty() && swarm.empty()) ++violations;
            if (rank(tr.to) < rank(before) &&
                (rank(tr.to) != rank(before) - 1 || !support || static_cast<double>(now - *support) < quiet))
                ++violations;
        }
    }
    if (violations) o.fail(std::to_string(violations) + " rank violations");

    const auto spec = scenario("ddos_swarm");
    auto r = run_scenario(spec, shipped_rules(), shipped_config());
    auto first = r.report.number("swarm.first_group_round");
    if (!first) {
        o.fail("no group broadcast");
        return o;
    }
    std::string origin;
    for (const auto& a : spec.attacks)
        if (a.kind == AttackKind::Ddos) origin = a.target;
    int reached = 0;
    for (const auto& d : spec.fleet.drones()) {
        if (d.id == origin || !spec.fleet.neighbors(origin, d.id)) continue;
        auto entry = r.report.number("drone." + d.id + ".swarm_entry_round");
        if (!entry || *entry - *first > static_cast<double>(kMaxReachRounds))
            o.fail(d.id + " entered swarm mode at " + r.report.get("drone." + d.id + ".swarm_entry_round").value_or("?"));
        else
            ++reached;
    }
    o.note(std::to_string(kModeCases) + " cases clean; " + std::to_string(reached) +
           " in-radius drones in SwarmMonitor within " + std::to_string(kMaxReachRounds) + " round");
    return o;
}

// -- 9 ---------------------------------------------------------------------
Outcome audit_durability() {
    Outcome o;
    const auto spec = scenario("jam_and_destroy");
    auto r = run_scenario(spec, shipped_rules(), shipped_config());
    std::string victim;
    for (const auto& [id, tick] : spec.destroyed) victim = id;
    std::vector<std::string> expected;
    for (const auto& l : lines_of(r.artifacts.at("logs/" + victim + ".log")))
        if (*Timestamp::parse(l.substr(0, 20)) < spec.start + kLinkCutTick) expected.push_back(l);
    std::vector<std::string> stored;
    for (const auto& l : lines_of(r.artifacts.at("repository.log")))
        if (l.starts_with(victim + " ")) stored.push_back(l.substr(victim.size() + 1));
    if (expected.empty()) o.fail("no lines before the cut");
    if (stored != expected)
        o.fail("repository holds " + std::to_string(stored.size()) + " lines, expected " + std::to_string(expected.size()));
    o.note(std::to_string(stored.size()) + " lines, bit-exact prefix of ticks 0-" + std::to_string(kLinkCutTick - 1));
    return o;
}

// -- 10 --------------------------------------------------------------------
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        out[fs::relative(entry.path(), dir).generic_string()] = s.str();
    }
    return out;
}

Outcome determinism() {
    Outcome o;
    const fs::path base = fs::temp_directory_path() / ("dronesentry_acceptance_" + std::to_string(::getpid()));
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(g_root / "scenarios")) {
        if (entry.path().extension() != ".scenario") continue;
        const auto name = entry.path().stem().string();
        std::map<std::string, std::string> runs[2];
        for (int k = 0; k < 2; ++k) {
            auto out = base / name / std::to_string(k);
            fs::remove_all(out);
            if (!g_cli.empty()) {
                std::string cmd = "\"" + g_cli + "\" run --scenario \"" + entry.path().string() + "\" --rules \"" +
                                  (g_root / "data" / "default.rules").string() + "\" --config \"" +
                                  (g_root / "data" / "default.config").string() + "\" --out \"" + out.string() +
                                  "\" > /dev/null";
                if (std::system(cmd.c_str()) != 0) o.fail(name + ": run failed");
            } else {
                write_run(run_scenario(load_scenario(entry.path()), shipped_rules(), shipped_config()), out);
            }
            runs[k] = snapshot(out);
        }
        if (runs[0].empty() || runs[0] != runs[1]) o.fail(name + " differs between runs");
        ++compared;
    }
    fs::remove_all(base);
    if (compared == 0) o.fail("no scenarios found");
    o.note(std::to_string(compared) + " scenarios bit-identical" + (g_cli.empty() ? " (library)" : " (CLI)"));
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: acceptance <source_dir> [dronesentry_cli]\n";
        return 1;
    }
    g_root = argv[1];
    if (argc > 2) g_cli = argv[2];

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"spoof detection", spoof_detection},
        {"zero-false-positive baseline", baseline_quiet},
        {"satellite-count and interval-constancy detectors", gnss_detectors},
        {"TDoA oracle equivalence", tdoa_oracle},
        {"bearing intersection", bearing_intersection},
        {"sliding window bound", window_bound},
        {"round trip and totality", round_trip_and_totality},
        {"mode machine and swarm reach", mode_machine},
        {"audit durability", audit_durability},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        if (!o.pass) ++failed;
        std::cout << "criterion " << (i + 1) << ' ' << (o.pass ? "PASS" : "FAIL") << ' ' << criteria[i].first << ": "
                  << o.detail << std::endl;
    }
    std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << '/' << criteria.size() << " criteria passed"
              << std::endl;
    return failed ? 1 : 0;
}
