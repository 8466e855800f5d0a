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

#include <sstream>

#include "dronesentry/telemetry.hpp"
#include "gen.hpp"

using namespace dronesentry;

TEST_SUITE("telemetry") {

TEST_CASE("timestamp parses and renders the ISO form") {
    auto ts = Timestamp::parse("2020-03-01T19:40:08Z");
    REQUIRE(ts);
    CHECK(ts->epoch_seconds() == 1583091608);
    CHECK(ts->to_string() == "2020-03-01T19:40:08Z");
    CHECK(Timestamp(0).to_string() == "1970-01-01T00:00:00Z");
}

TEST_CASE("timestamp rejects near misses") {
    for (const char* bad : {"2020-03-01 19:40:08Z", "2020-03-01T19:40:08", "2020-02-30T00:00:00Z",
                            "2020-13-01T00:00:00Z", "2020-03-01T24:00:00Z", "2020-03-01T19:60:08Z",
                            "2020-3-01T19:40:08Z", "+020-03-01T19:40:08Z", ""})
        CHECK_MESSAGE(!Timestamp::parse(bad), bad);
    CHECK(Timestamp::parse("2020-02-29T23:59:59Z"));
    CHECK(!Timestamp::parse("2019-02-29T00:00:00Z"));
}

TEST_CASE("zero event renders with one decimal minimum") {
    TelemetryEvent e;
    e.timestamp = *Timestamp::parse("2020-03-01T19:40:08Z");
    e.selector = Selector::General;
    CHECK(format_event(e) == "2020-03-01T19:40:08Z 0.0 0.0 0.0,0.0,0.0 GENERAL");
}

TEST_CASE("frequency tokens render as reals") {
    TelemetryEvent e;
    e.timestamp = *Timestamp::parse("2020-03-01T19:40:08Z");
    e.selector = Selector::Frequency;
    e.additional = {{"freq_mhz", 1575.42}, {"power_db", -115.0}};
    auto line = format_event(e);
    CHECK(line.ends_with("FREQUENCY freq_mhz=1575.42 power_db=-115.0"));
}

TEST_CASE("signal loss line parses") {
    auto e = parse_event("2020-03-01T19:40:08Z 12.5 90.0 39.1,-76.8,120.0 SIGNAL_LOSS link=GPS");
    CHECK(e.selector == Selector::SignalLoss);
    CHECK(e.speed_kmh == 12.5);
    CHECK(e.heading_deg == 90.0);
    CHECK(e.geo == GeoPoint{39.1, -76.8, 120.0});
    CHECK(e.text("link") == "GPS");
}

TEST_CASE("parse errors carry a kind") {
    auto kind_of = [](std::string_view line) {
        try {
            parse_event(line, 7);
        } catch (const ParseError& e) {
            CHECK(e.line() == 7);
            return e.kind();
        }
        FAIL("no error for " << line);
        return ParseError::Kind::BadNumber;
    };
    using K = ParseError::Kind;
    CHECK(kind_of("2020-03-01T19:40:08Z 1.0 0.0 0,0,0 FOO") == K::UnknownSelector);
    CHECK(kind_of("2020-03-01T19:40:08 1.0 0.0 0,0,0 GENERAL") == K::MalformedTimestamp);
    CHECK(kind_of("2020-03-01T19:40:08Z 1.0 0.0 0,0,0") == K::BadFieldCount);
    CHECK(kind_of("2020-03-01T19:40:08Z 1.0 0.0 0,0 GENERAL") == K::BadFieldCount);
    CHECK(kind_of("2020-03-01T19:40:08Z 1.0 0.0 0,0,0 GENERAL novalue") == K::BadKeyValueToken);
    CHECK(kind_of("2020-03-01T19:40:08Z 1.0 0.0 0,0,0 GENERAL 9x=1") == K::BadKeyValueToken);
    CHECK(kind_of("2020-03-01T19:40:08Z 1.0 0.0 0,0,0 GENERAL k=") == K::BadKeyValueToken);
    CHECK(kind_of("2020-03-01T19:40:08Z fast 0.0 0,0,0 GENERAL") == K::BadNumber);
    CHECK(kind_of("2020-03-01T19:40:08Z -1.0 0.0 0,0,0 GENERAL") == K::OutOfRange);
    CHECK(kind_of("2020-03-01T19:40:08Z 1.0 360.0 0,0,0 GENERAL") == K::OutOfRange);
    CHECK(kind_of("2020-03-01T19:40:08Z 1.0 0.0 91,0,0 GENERAL") == K::OutOfRange);
}

TEST_CASE("selector set is closed at five") {
    CHECK(std::size(kAllSelectors) == 5);
    for (auto s : kAllSelectors) CHECK(parse_selector(to_string(s)) == s);
    CHECK(!parse_selector("general"));
}

TEST_CASE("token values classify by text form") {
    CHECK(TokenValue::from_string("10").is_integer());
    CHECK(TokenValue::from_string("-3").is_integer());
    CHECK(TokenValue::from_string("1.0").is_real());
    CHECK(TokenValue::from_string("1e3").is_real());
    CHECK(TokenValue::from_string("GPS").is_text());
    CHECK(TokenValue::from_string("inf").is_text());
    CHECK(TokenValue::from_string("nan").is_text());
    CHECK(TokenValue(2.0).to_string() == "2.0");
    CHECK(TokenValue(std::int64_t{2}).to_string() == "2");
    CHECK_THROWS_AS(TokenValue::from_string(""), std::invalid_argument);
    CHECK_THROWS_AS(TokenValue::from_string("a b"), std::invalid_argument);
}

TEST_CASE("number rendering") {
    CHECK(format_number(0.0) == "0.0");
    CHECK(format_number(-0.0) == "0.0");
    CHECK(format_number(-115.0) == "-115.0");
    CHECK(format_number(1575.42) == "1575.42");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1e-7) == "0.0000001");
}

TEST_CASE("property: format then parse is the identity") {
    Lcg rng(20200301);
    for (int i = 0; i < 10000; ++i) {
        auto e = testgen::event(rng);
        REQUIRE(is_valid(e));
        auto line = format_event(e);
        auto back = parse_event(line);
        REQUIRE_MESSAGE(back == e, line);
        CHECK(format_event(back) == line);
    }
}

TEST_CASE("property: parsing random lines never crashes") {
    Lcg rng(777);
    const std::string alphabet = "0123456789-:TZ.,= \tabcxyzGENRALFQUCYSIOPDB_\x01\xff";
    auto seed_line = format_event(testgen::event(rng));
    int events = 0, errors = 0;
    for (int i = 0; i < 10000; ++i) {
        std::string line;
        if (i % 2 == 0) {
            auto n = rng.uniform_int(0, 80);
            for (std::int64_t k = 0; k < n; ++k)
                line += alphabet[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(alphabet.size()) - 1))];
        } else {
            // mutate a valid line so many cases get deep into the parser
            line = seed_line;
            auto edits = rng.uniform_int(1, 4);
            for (std::int64_t k = 0; k < edits && !line.empty(); ++k) {
                auto pos = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(line.size()) - 1));
                line[pos] = alphabet[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(alphabet.size()) - 1))];
            }
        }
        try {
            auto e = parse_event(line);
            CHECK(is_valid(e));
            ++events;
        } catch (const ParseError&) {
            ++errors;
        }
    }
    CHECK(events + errors == 10000);
    CHECK(events > 0);
}

TEST_CASE("log writer and reader agree") {
    Lcg rng(5);
    std::vector<TelemetryEvent> events;
    for (int i = 0; i < 50; ++i) events.push_back(testgen::event(rng));
    std::ostringstream out;
    LogWriter w(out);
    for (const auto& e : events) CHECK(w.write(e));
    CHECK(w.lines_written() == 50);
    std::istringstream in(out.str() + "\n\n");
    CHECK(read_log(in) == events);
}

TEST_CASE("read_log reports the failing line number") {
    std::istringstream in("2020-03-01T19:40:08Z 0.0 0.0 0,0,0 GENERAL\n\nbroken\n");
    try {
        read_log(in);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("log writer reports a failed stream") {
    std::ostringstream out;
    out.setstate(std::ios::badbit);
    LogWriter w(out);
    CHECK_FALSE(w.write(TelemetryEvent{}));
}

}
