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

#include "dronesentry/telemetry.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace dronesentry {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

bool parse_digits(std::string_view s, int& out) {
    int v = 0;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return !s.empty();
}

bool looks_integer(std::string_view s) {
    std::size_t i = (!s.empty() && s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

std::optional<double> parse_finite(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Timestamp

std::optional<Timestamp> Timestamp::parse(std::string_view t) {
    if (t.size() != 20 || t[4] != '-' || t[7] != '-' || t[10] != 'T' || t[13] != ':' || t[16] != ':' ||
        t[19] != 'Z')
        return std::nullopt;
    int y, mo, d, h, mi, s;
    if (!parse_digits(t.substr(0, 4), y) || !parse_digits(t.substr(5, 2), mo) || !parse_digits(t.substr(8, 2), d) ||
        !parse_digits(t.substr(11, 2), h) || !parse_digits(t.substr(14, 2), mi) || !parse_digits(t.substr(17, 2), s))
        return std::nullopt;
    if (h > 23 || mi > 59 || s > 59) return std::nullopt;
    using namespace std::chrono;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    auto days_since = sys_days{ymd}.time_since_epoch().count();
    return Timestamp(static_cast<std::int64_t>(days_since) * 86400 + h * 3600 + mi * 60 + s);
}

std::string Timestamp::to_string() const {
    using namespace std::chrono;
    std::int64_t days_count = seconds_ >= 0 ? seconds_ / 86400 : -((-seconds_ + 86399) / 86400);
    std::int64_t rem = seconds_ - days_count * 86400;
    year_month_day ymd{sys_days{days{days_count}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                  static_cast<int>(rem / 60 % 60), static_cast<int>(rem % 60));
    return buf;
}

// ---------------------------------------------------------------------------
// Selector

std::string_view to_string(Selector s) {
    switch (s) {
        case Selector::Debug: return "DEBUG";
        case Selector::Emergency: return "EMERGENCY";
        case Selector::Frequency: return "FREQUENCY";
        case Selector::General: return "GENERAL";
        case Selector::SignalLoss: return "SIGNAL_LOSS";
    }
    return "GENERAL";
}

std::optional<Selector> parse_selector(std::string_view text) {
    for (Selector s : kAllSelectors)
        if (to_string(s) == text) return s;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Tokens

TokenValue TokenValue::from_string(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty token value");
    for (char c : text)
        if (is_space(c)) throw std::invalid_argument("token value contains whitespace");
    if (looks_integer(text)) {
        std::int64_t v = 0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec == std::errc{} && ptr == text.data() + text.size()) return TokenValue(v);
    }
    if (auto d = parse_finite(text)) return TokenValue(*d);
    return TokenValue(std::string(text));
}

std::optional<double> TokenValue::as_number() const {
    if (auto i = std::get_if<std::int64_t>(&value_)) return static_cast<double>(*i);
    if (auto d = std::get_if<double>(&value_)) return *d;
    return std::nullopt;
}

std::string TokenValue::to_string() const {
    if (auto i = std::get_if<std::int64_t>(&value_)) return std::to_string(*i);
    if (auto d = std::get_if<double>(&value_)) return format_number(*d);
    return std::get<std::string>(value_);
}

bool is_valid_key(std::string_view key) {
    if (key.empty()) return false;
    auto ident_start = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    if (!ident_start(key[0])) return false;
    for (char c : key)
        if (!ident_start(c) && !(c >= '0' && c <= '9')) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Event

const TokenValue* TelemetryEvent::find(std::string_view key) const {
    for (const auto& t : additional)
        if (t.key == key) return &t.value;
    return nullptr;
}

std::optional<double> TelemetryEvent::number(std::string_view key) const {
    const TokenValue* v = find(key);
    return v ? v->as_number() : std::nullopt;
}

std::optional<std::string> TelemetryEvent::text(std::string_view key) const {
    const TokenValue* v = find(key);
    return v ? std::optional<std::string>(v->to_string()) : std::nullopt;
}

bool is_valid(const GeoPoint& g) {
    return std::isfinite(g.latitude_deg) && std::isfinite(g.longitude_deg) && std::isfinite(g.altitude_m) &&
           g.latitude_deg >= -90.0 && g.latitude_deg <= 90.0 && g.longitude_deg >= -180.0 &&
           g.longitude_deg <= 180.0;
}

bool is_valid(const TelemetryEvent& e) {
    if (!std::isfinite(e.speed_kmh) || e.speed_kmh < 0.0) return false;
    if (!std::isfinite(e.heading_deg) || e.heading_deg < 0.0 || e.heading_deg >= 360.0) return false;
    if (!is_valid(e.geo)) return false;
    for (const auto& t : e.additional) {
        if (!is_valid_key(t.key)) return false;
        if (auto n = t.value.as_number(); n && !std::isfinite(*n)) return false;
    }
    return true;
}

std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // folds -0.0
    std::array<char, 400> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed);
    std::string out(buf.data(), ec == std::errc{} ? ptr : buf.data());
    if (out.find('.') == std::string::npos) out += ".0";
    return out;
}

std::string format_event(const TelemetryEvent& e) {
    std::string line = e.timestamp.to_string();
    line += ' ';
    line += format_number(e.speed_kmh);
    line += ' ';
    line += format_number(e.heading_deg);
    line += ' ';
    line += format_number(e.geo.latitude_deg);
    line += ',';
    line += format_number(e.geo.longitude_deg);
    line += ',';
    line += format_number(e.geo.altitude_m);
    line += ' ';
    line += to_string(e.selector);
    for (const auto& t : e.additional) {
        line += ' ';
        line += t.key;
        line += '=';
        line += t.value.to_string();
    }
    return line;
}

// ---------------------------------------------------------------------------
// Parsing

ParseError::ParseError(Kind kind, std::string field, std::size_t line, const std::string& detail)
    : std::runtime_error("line " + std::to_string(line) + ": " + std::string(dronesentry::to_string(kind)) + " in " +
                         field + ": " + detail),
      kind_(kind),
      field_(std::move(field)),
      line_(line) {}

std::string_view to_string(ParseError::Kind k) {
    switch (k) {
        case ParseError::Kind::MalformedTimestamp: return "MalformedTimestamp";
        case ParseError::Kind::UnknownSelector: return "UnknownSelector";
        case ParseError::Kind::BadFieldCount: return "BadFieldCount";
        case ParseError::Kind::BadKeyValueToken: return "BadKeyValueToken";
        case ParseError::Kind::BadNumber: return "BadNumber";
        case ParseError::Kind::OutOfRange: return "OutOfRange";
    }
    return "ParseError";
}

std::vector<std::string_view> split_ws(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) out.push_back(text.substr(start, i - start));
    }
    return out;
}

TelemetryEvent parse_event(std::string_view line, std::size_t line_no) {
    using K = ParseError::Kind;
    auto fields = split_ws(line);
    if (fields.size() < 5)
        throw ParseError(K::BadFieldCount, "line", line_no,
                         "expected at least 5 fields, got " + std::to_string(fields.size()));

    TelemetryEvent e;
    auto ts = Timestamp::parse(fields[0]);
    if (!ts) throw ParseError(K::MalformedTimestamp, "timestamp", line_no, std::string(fields[0]));
    e.timestamp = *ts;

    auto number = [&](std::string_view text, const char* field) {
        auto v = parse_finite(text);
        if (!v) throw ParseError(K::BadNumber, field, line_no, std::string(text));
        return *v;
    };

    e.speed_kmh = number(fields[1], "speed_kmh");
    if (e.speed_kmh < 0.0) throw ParseError(K::OutOfRange, "speed_kmh", line_no, std::string(fields[1]));
    e.heading_deg = number(fields[2], "heading_deg");
    if (e.heading_deg < 0.0 || e.heading_deg >= 360.0)
        throw ParseError(K::OutOfRange, "heading_deg", line_no, std::string(fields[2]));

    std::string_view geo = fields[3];
    auto c1 = geo.find(',');
    auto c2 = c1 == std::string_view::npos ? c1 : geo.find(',', c1 + 1);
    if (c2 == std::string_view::npos || geo.find(',', c2 + 1) != std::string_view::npos)
        throw ParseError(K::BadFieldCount, "geo", line_no, "expected lat,lon,alt: " + std::string(geo));
    e.geo.latitude_deg = number(geo.substr(0, c1), "geo.latitude");
    e.geo.longitude_deg = number(geo.substr(c1 + 1, c2 - c1 - 1), "geo.longitude");
    e.geo.altitude_m = number(geo.substr(c2 + 1), "geo.altitude");
    if (!is_valid(e.geo)) throw ParseError(K::OutOfRange, "geo", line_no, std::string(geo));

    auto sel = parse_selector(fields[4]);
    if (!sel) throw ParseError(K::UnknownSelector, "selector", line_no, std::string(fields[4]));
    e.selector = *sel;

    for (std::size_t i = 5; i < fields.size(); ++i) {
        auto tok = fields[i];
        auto eq = tok.find('=');
        if (eq == std::string_view::npos || eq + 1 == tok.size() || !is_valid_key(tok.substr(0, eq)))
            throw ParseError(K::BadKeyValueToken, "additional", line_no, std::string(tok));
        e.additional.push_back(Token{std::string(tok.substr(0, eq)), TokenValue::from_string(tok.substr(eq + 1))});
    }
    return e;
}

bool LogWriter::write(const TelemetryEvent& e) {
    if (!*out_) return false;
    *out_ << format_event(e) << '\n';
    if (!*out_) return false;
    ++lines_;
    return true;
}

std::vector<TelemetryEvent> read_log(std::istream& in) {
    std::vector<TelemetryEvent> events;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (split_ws(line).empty()) continue;
        events.push_back(parse_event(line, n));
    }
    return events;
}

}  // namespace dronesentry
