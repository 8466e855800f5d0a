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

#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dronesentry/analytics.hpp"
#include "gen.hpp"

using namespace dronesentry;

namespace {

const Timestamp t0 = *Timestamp::parse("2020-03-01T19:40:08Z");

Alert alert(ActionLevel level, std::string rule = "r") {
    Alert a;
    a.drone = "A";
    a.rule = std::move(rule);
    a.level = level;
    return a;
}

SwarmMessage group_from(std::string sender) {
    auto msg = make_group_alert(alert(ActionLevel::Group, "ddos"), t0);
    msg.sender = std::move(sender);
    return msg;
}

TelemetryEvent moving(std::int64_t dt, double kmh) {
    TelemetryEvent e;
    e.timestamp = t0 + dt;
    e.speed_kmh = kmh;
    return e;
}

RuleMatch match(std::string rule, ActionLevel level, const TelemetryEvent& e, std::optional<StatefulModifier> mod = {}) {
    return RuleMatch{std::move(rule), level, e, e.timestamp, std::move(mod)};
}

// Direct two-pass population CoV of the gaps, written independently of the
// library's accumulation.
double direct_cov(const std::vector<double>& ts) {
    std::vector<double> gaps;
    for (std::size_t i = 1; i < ts.size(); ++i) gaps.push_back(ts[i] - ts[i - 1]);
    double mean = 0;
    for (double g : gaps) mean += g;
    mean /= static_cast<double>(gaps.size());
    double ss = 0;
    for (double g : gaps) ss += (g - mean) * (g - mean);
    return std::sqrt(ss / static_cast<double>(gaps.size())) / mean;
}

}  // namespace

TEST_SUITE("analytics") {

TEST_CASE("config parsing") {
    std::istringstream in("# tuned\nwindow_s 600\nquiet_period_s 60 # short\ncov_threshold 0.02\n");
    auto c = parse_config(in);
    CHECK(c.window_s == 600);
    CHECK(c.quiet_period_s == 60.0);
    CHECK(c.cov_threshold == 0.02);
    CHECK(c.cov_min_samples == 10);

    std::istringstream round(format_config(c));
    auto back = parse_config(round);
    CHECK(back.window_s == c.window_s);
    CHECK(back.cov_threshold == c.cov_threshold);

    for (const char* bad : {"window 5\n", "window_s\n", "window_s -1\n", "window_s 1.5\n", "cov_min_samples 2\n",
                            "quiet_period_s soon\n"}) {
        std::istringstream b(bad);
        CHECK_THROWS_AS(parse_config(b), ConfigError);
    }
}

TEST_CASE("window evicts records older than its duration") {
    MetadataWindow w(3600);
    w.insert({t0, Selector::General, {}});
    w.insert({t0 + 3600, Selector::General, {}});
    CHECK(w.size() == 2);
    w.insert({t0 + 3601, Selector::General, {}});
    CHECK(w.size() == 2);
    CHECK(w.records().front().at == t0 + 3600);
}

TEST_CASE("window queries run newest first") {
    MetadataWindow w(100);
    CHECK(w.query(t0, t0 + 1000).empty());
    for (int i = 0; i < 5; ++i) w.insert({t0 + i * 10, Selector::General, {{"i", double(i)}}});
    auto q = w.query(t0 + 10, t0 + 30);
    REQUIRE(q.size() == 3);
    CHECK(q[0].at == t0 + 30);
    CHECK(q[2].at == t0 + 10);
    CHECK_THROWS(w.insert({t0, Selector::General, {}}));
}

TEST_CASE("metadata keeps numbers, drops text") {
    TelemetryEvent e;
    e.timestamp = t0;
    e.selector = Selector::SignalLoss;
    e.additional = {{"link", TokenValue::from_string("GPS")}, {"count", std::int64_t{3}}};
    auto m = metadata_of(e);
    CHECK(m.selector == Selector::SignalLoss);
    REQUIRE(m.numbers.size() == 1);
    CHECK(m.numbers[0] == std::pair<std::string, double>{"count", 3.0});
}

TEST_CASE("property: window equals brute-force filter of history") {
    Lcg rng(6);
    MetadataWindow w(3600);
    std::vector<MetadataRecord> history;
    Timestamp now = t0;
    for (int i = 0; i < 10000; ++i) {
        // about two hours of inserts with bursts and gaps
        now = now + (rng.uniform() < 0.3 ? 0 : rng.uniform_int(0, 2));
        MetadataRecord r{now, kAllSelectors[rng.uniform_int(0, 4)], {{"v", double(i)}}};
        w.insert(r);
        history.push_back(r);

        // brute force over the full history; contents compared every 16th insert
        std::size_t in_window = 0;
        for (const auto& h : history)
            if (now - h.at <= 3600) ++in_window;
        REQUIRE(w.size() == in_window);
        if (i % 16 == 0) {
            std::vector<MetadataRecord> expect;
            for (const auto& h : history)
                if (now - h.at <= 3600) expect.push_back(h);
            REQUIRE(std::equal(expect.begin(), expect.end(), w.records().begin(), w.records().end()));
        }
        REQUIRE(now - w.records().front().at <= 3600);
    }
    CHECK(now - t0 > 3600);
}

TEST_CASE("constancy: exact intervals") {
    std::vector<double> ts;
    for (int i = 0; i < 20; ++i) ts.push_back(i * 1.0);
    auto r = interval_constancy(ts);
    CHECK(r.evaluated);
    CHECK(r.cov == 0.0);
    CHECK(r.indicator);
}

TEST_CASE("constancy: jittered intervals") {
    Lcg rng(42);
    std::vector<double> ts{0.0};
    for (int i = 1; i < 20; ++i) ts.push_back(ts.back() + rng.uniform(0.9, 1.1));
    auto r = interval_constancy(ts);
    CHECK(r.evaluated);
    CHECK(r.cov == doctest::Approx(direct_cov(ts)).epsilon(1e-12));
    CHECK(r.cov > 0.01);
    CHECK_FALSE(r.indicator);

    // the population value for uniform +-10% jitter is 0.1 / sqrt(3)
    std::vector<double> long_ts{0.0};
    for (int i = 0; i < 20000; ++i) long_ts.push_back(long_ts.back() + rng.uniform(0.9, 1.1));
    CHECK(interval_constancy(long_ts).cov == doctest::Approx(0.1 / std::sqrt(3.0)).epsilon(0.03));
}

TEST_CASE("constancy: too few samples and zero mean") {
    std::vector<double> nine{0, 1, 2, 3, 4, 5, 6, 7, 8};
    CHECK_FALSE(interval_constancy(nine).evaluated);
    CHECK_FALSE(interval_constancy(nine).indicator);
    std::vector<double> flat(12, 5.0);
    CHECK_THROWS_AS(interval_constancy(flat), ZeroMeanInterval);
}

TEST_CASE("property: constancy is scale free") {
    Lcg rng(8);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> ts{0.0};
        double jitter = rng.uniform(0.0, 0.3);
        for (int k = 0; k < 15; ++k) ts.push_back(ts.back() + 1.0 + rng.uniform(-jitter, jitter));
        double scale = rng.uniform(0.01, 100.0);
        std::vector<double> scaled;
        for (double t : ts) scaled.push_back(t * scale);
        auto a = interval_constancy(ts);
        auto b = interval_constancy(scaled);
        CHECK(b.cov == doctest::Approx(a.cov).epsilon(1e-9));
        if (std::abs(a.cov - 0.01) > 1e-6) CHECK(a.indicator == b.indicator);
    }
}

TEST_CASE("mode examples") {
    ModeMachine m;
    std::vector<Alert> emergency{alert(ActionLevel::Emergency)};
    CHECK(m.step(emergency, {}, t0).to == Mode::Evasive);

    ModeMachine q;
    std::vector<Alert> info{alert(ActionLevel::Info)};
    CHECK(q.step(info, {}, t0).to == Mode::Monitor);
    CHECK(q.step({}, {}, t0 + 299).to == Mode::Monitor);
    auto tr = q.step({}, {}, t0 + 300);
    CHECK(tr.to == Mode::Normal);
    CHECK(tr.cause == "quiet");

    ModeMachine s;
    std::vector<SwarmMessage> group{group_from("B")};
    auto st = s.step({}, group, t0);
    CHECK(st.to == Mode::SwarmMonitor);
    CHECK(st.cause == "swarm:B");
}

TEST_CASE("de-escalation walks one rank per quiet period") {
    ModeMachine m(300);
    std::vector<Alert> emergency{alert(ActionLevel::Emergency)};
    m.step(emergency, {}, t0);
    std::vector<Mode> seen;
    for (int k = 1; k <= 4; ++k) seen.push_back(m.step({}, {}, t0 + 300 * k).to);
    CHECK(seen == std::vector<Mode>{Mode::Elevated, Mode::Monitor, Mode::Normal, Mode::Normal});
}

TEST_CASE("swarm overlays") {
    ModeMachine m;
    std::vector<Alert> elevated{alert(ActionLevel::Elevated)};
    m.step(elevated, {}, t0);
    std::vector<SwarmMessage> group{group_from("C")};
    CHECK(m.step({}, group, t0 + 1).to == Mode::SwarmElevated);
    CHECK(m.step({}, {}, t0 + 301).to == Mode::SwarmMonitor);
    CHECK(m.step({}, {}, t0 + 601).to == Mode::Normal);

    ModeMachine evasive;
    std::vector<Alert> emergency{alert(ActionLevel::Emergency)};
    evasive.step(emergency, {}, t0);
    CHECK(evasive.step({}, group, t0 + 1).to == Mode::Evasive);
}

TEST_CASE("property: rank moves only for inputs and falls one step per quiet period") {
    Lcg rng(1000);
    for (int c = 0; c < 1000; ++c) {
        const double quiet = static_cast<double>(rng.uniform_int(5, 300));
        ModeMachine m(quiet);
        Timestamp now = t0;
        for (int step = 0; step < 60; ++step) {
            now = now + rng.uniform_int(0, static_cast<std::int64_t>(quiet));
            std::vector<Alert> alerts;
            std::vector<SwarmMessage> swarm;
            if (rng.uniform() < 0.25) alerts.push_back(alert(static_cast<ActionLevel>(rng.uniform_int(0, 3))));
            if (rng.uniform() < 0.1) swarm.push_back(group_from("X"));
            const Mode before = m.mode();
            const auto support = m.last_support();
            const auto tr = m.step(alerts, swarm, now);
            REQUIRE(tr.from == before);
            if (rank(tr.to) > rank(before)) {
                CHECK(!(alerts.empty() && swarm.empty()));
            } else if (rank(tr.to) < rank(before)) {
                CHECK(rank(tr.to) == rank(before) - 1);
                CHECK(tr.to == step_down(before));
                REQUIRE(support);
                CHECK(static_cast<double>(now - *support) >= quiet);
                CHECK(tr.cause == "quiet");
            } else if (tr.to != before) {
                // same rank, overlay switch only from a swarm message
                CHECK(!swarm.empty());
            }
        }
    }
}

TEST_CASE("odometer integrates speed over elapsed time") {
    AnalyticsEngine a("A");
    a.advance_odometer(moving(0, 36));
    CHECK(a.advance_odometer(moving(10, 36)) == doctest::Approx(100.0));

    AnalyticsEngine z("Z");
    z.advance_odometer(moving(0, 0));
    CHECK(z.advance_odometer(moving(1000, 0)) == 0.0);

    AnalyticsEngine p("P");
    p.advance_odometer(moving(0, 36));
    p.advance_odometer(moving(5, 36));
    CHECK(p.advance_odometer(moving(10, 72)) == doctest::Approx(150.0));
    CHECK_THROWS_AS(p.advance_odometer(moving(9, 72)), NonMonotonicTimestamp);
    CHECK(p.rejected_events() == 1);
    CHECK(p.odometer_m() == doctest::Approx(150.0));
}

TEST_CASE("stateless match alerts at once") {
    AnalyticsEngine a("A");
    auto e = moving(0, 0);
    e.additional = {{"power_db", -110.0}};
    auto out = a.ingest_match(match("gps_spoof", ActionLevel::Emergency, e), e.timestamp, 0);
    REQUIRE(out.size() == 1);
    CHECK(out[0].level == ActionLevel::Emergency);
    CHECK(out[0].count == 1);
}

TEST_CASE("repeat needs the minimum distance") {
    RepeatModifier rep{2, 100};
    AnalyticsEngine far("A");
    auto e0 = moving(0, 36);
    auto e1 = moving(15, 36);
    CHECK(far.ingest_match(match("w", ActionLevel::Elevated, e0, rep), e0.timestamp, 0).empty());
    auto out = far.ingest_match(match("w", ActionLevel::Elevated, e1, rep), e1.timestamp, 150);
    REQUIRE(out.size() == 1);
    CHECK(out[0].detail.starts_with("span_m=150.0"));
    CHECK(out[0].first == e0.timestamp);

    AnalyticsEngine near("B");
    near.ingest_match(match("w", ActionLevel::Elevated, e0, rep), e0.timestamp, 0);
    CHECK(near.ingest_match(match("w", ActionLevel::Elevated, e1, rep), e1.timestamp, 50).empty());
}

TEST_CASE("rate counts weights and cools down") {
    RateModifier rate{5, 10};
    AnalyticsEngine a("A");
    auto at = [&](std::int64_t dt, std::int64_t count) {
        auto e = moving(dt, 0);
        e.additional = {{"event", TokenValue::from_string("DEAUTH")}, {"count", count}};
        return a.ingest_match(match("deauth", ActionLevel::Elevated, e, rate), e.timestamp, 0);
    };
    CHECK(at(0, 3).empty());
    CHECK(at(5, 2).empty());       // 5 is not more than 5
    CHECK(at(9, 1).size() == 1);   // 6 > 5 inside (now-10, now]
    CHECK(at(12, 50).empty());     // cooldown until t+10
    CHECK(at(19, 6).size() == 1);  // cooldown over, fresh window
}

TEST_CASE("property: at most one rate alert per window") {
    Lcg rng(12);
    for (int c = 0; c < 100; ++c) {
        RateModifier rate{double(rng.uniform_int(1, 20)), double(rng.uniform_int(1, 30))};
        AnalyticsEngine a("A");
        std::vector<Timestamp> fired;
        std::int64_t t = 0;
        for (int i = 0; i < 300; ++i) {
            t += rng.uniform_int(0, 3);
            auto e = moving(t, 0);
            e.additional = {{"count", rng.uniform_int(1, 10)}};
            if (!a.ingest_match(match("r", ActionLevel::Elevated, e, rate), e.timestamp, 0).empty()) fired.push_back(e.timestamp);
        }
        for (std::size_t i = 1; i < fired.size(); ++i) CHECK(static_cast<double>(fired[i] - fired[i - 1]) >= rate.window_s);
    }
}

TEST_CASE("property: ingest_match is deterministic") {
    Lcg rng(13);
    AnalyticsEngine a("A"), b("A");
    RepeatModifier rep{3, 40};
    double odo = 0;
    for (int i = 0; i < 500; ++i) {
        auto e = moving(i, 36);
        odo += rng.uniform(0, 20);
        auto ma = a.ingest_match(match("w", ActionLevel::Elevated, e, rep), e.timestamp, odo);
        auto mb = b.ingest_match(match("w", ActionLevel::Elevated, e, rep), e.timestamp, odo);
        REQUIRE(ma == mb);
    }
}

TEST_CASE("interval constancy trend alert latches") {
    AnalyticsEngine a("A");
    std::vector<Alert> raised;
    for (int i = 0; i < 30; ++i) {
        TelemetryEvent e = moving(i, 0);
        e.additional = {{"sat_count", std::int64_t{10}}, {"interval_s", 1.0}};
        for (auto& x : a.observe(e)) raised.push_back(x);
    }
    REQUIRE(raised.size() == 1);
    CHECK(raised[0].rule == kIntervalConstancyRule);
    CHECK(raised[0].level == ActionLevel::Emergency);
    CHECK(raised[0].last == t0 + 9);
}

TEST_CASE("mode names round trip") {
    for (auto m : kAllModes) CHECK(parse_mode(to_string(m)) == m);
    CHECK(format_transition("A", {t0, Mode::Normal, Mode::Evasive, "gps_spoof"}) ==
          "2020-03-01T19:40:08Z MODE A Normal -> Evasive cause=gps_spoof");
}

}
