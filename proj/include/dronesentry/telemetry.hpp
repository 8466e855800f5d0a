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
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dronesentry {

/// UTC instant at one-second resolution, rendered `YYYY-MM-DDThh:mm:ssZ`.
class Timestamp {
public:
    constexpr Timestamp() = default;
    constexpr explicit Timestamp(std::int64_t epoch_seconds) : seconds_(epoch_seconds) {}

    /// Strict parse of the 20-character ISO form. Returns nullopt on any
    /// deviation, including out-of-range calendar fields.
    static std::optional<Timestamp> parse(std::string_view text);

    std::string to_string() const;
    constexpr std::int64_t epoch_seconds() const { return seconds_; }

    constexpr Timestamp operator+(std::int64_t s) const { return Timestamp(seconds_ + s); }
    constexpr std::int64_t operator-(Timestamp other) const { return seconds_ - other.seconds_; }
    constexpr auto operator<=>(const Timestamp&) const = default;

private:
    std::int64_t seconds_ = 0;
};

struct GeoPoint {
    double latitude_deg = 0.0;
    double longitude_deg = 0.0;
    double altitude_m = 0.0;

    bool operator==(const GeoPoint&) const = default;
};

enum class Selector { Debug, Emergency, Frequency, General, SignalLoss };

inline constexpr Selector kAllSelectors[] = {Selector::Debug, Selector::Emergency,
                                             Selector::Frequency, Selector::General,
                                             Selector::SignalLoss};

std::string_view to_string(Selector s);
std::optional<Selector> parse_selector(std::string_view text);

/// Value of an `additional` key=value token. The kind is a function of the
/// text form: integer syntax -> Integer, other finite numbers -> Real,
/// everything else -> Text. Text values therefore never look like numbers.
class TokenValue {
public:
    TokenValue() : value_(std::int64_t{0}) {}
    TokenValue(std::int64_t v) : value_(v) {}
    TokenValue(int v) : value_(std::int64_t{v}) {}
    TokenValue(double v) : value_(v) {}

    /// Classifies the text. Throws std::invalid_argument for empty text or
    /// text containing whitespace.
    static TokenValue from_string(std::string_view text);

    bool is_integer() const { return std::holds_alternative<std::int64_t>(value_); }
    bool is_real() const { return std::holds_alternative<double>(value_); }
    bool is_text() const { return std::holds_alternative<std::string>(value_); }

    std::optional<double> as_number() const;
    std::string to_string() const;

    bool operator==(const TokenValue&) const = default;

private:
    explicit TokenValue(std::string text) : value_(std::move(text)) {}
    std::variant<std::int64_t, double, std::string> value_;
};

struct Token {
    std::string key;
    TokenValue value;

    bool operator==(const Token&) const = default;
};

/// One normalized observation; one line of the telemetry log.
struct TelemetryEvent {
    Timestamp timestamp;
    double speed_kmh = 0.0;
    double heading_deg = 0.0;
    GeoPoint geo;
    Selector selector = Selector::General;
    std::vector<Token> additional;

    const TokenValue* find(std::string_view key) const;
    std::optional<double> number(std::string_view key) const;
    std::optional<std::string> text(std::string_view key) const;

    bool operator==(const TelemetryEvent&) const = default;
};

bool is_valid_key(std::string_view key);
bool is_valid(const GeoPoint& g);
bool is_valid(const TelemetryEvent& e);

/// Shortest round-trip decimal with at least one fractional digit.
std::string format_number(double v);

std::string format_event(const TelemetryEvent& e);

class ParseError : public std::runtime_error {
public:
    enum class Kind { MalformedTimestamp, UnknownSelector, BadFieldCount, BadKeyValueToken, BadNumber, OutOfRange };

    ParseError(Kind kind, std::string field, std::size_t line, const std::string& detail);

    Kind kind() const { return kind_; }
    const std::string& field() const { return field_; }
    std::size_t line() const { return line_; }

private:
    Kind kind_;
    std::string field_;
    std::size_t line_;
};

std::string_view to_string(ParseError::Kind k);

/// Inverse of format_event. `line_no` is only used for error reporting.
TelemetryEvent parse_event(std::string_view line, std::size_t line_no = 0);

/// Splits on runs of ASCII whitespace.
std::vector<std::string_view> split_ws(std::string_view text);

class LogWriter {
public:
    explicit LogWriter(std::ostream& out) : out_(&out) {}

    /// Returns false when the underlying stream has failed.
    bool write(const TelemetryEvent& e);
    std::size_t lines_written() const { return lines_; }

private:
    std::ostream* out_;
    std::size_t lines_ = 0;
};

/// Reads a whole log; blank lines are skipped. Throws ParseError with the
/// 1-based line number of the first bad line.
std::vector<TelemetryEvent> read_log(std::istream& in);

}  // namespace dronesentry
