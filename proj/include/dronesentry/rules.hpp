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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dronesentry/telemetry.hpp"

namespace dronesentry {

/// Action level attached to every signature; ordered.
enum class ActionLevel { Info = 0, Elevated = 1, Group = 2, Emergency = 3 };

std::string_view to_string(ActionLevel l);
std::optional<ActionLevel> parse_level(std::string_view text);

/// Event attributes a rule atom may test.
enum class Field { Selector, FreqMhz, PowerDb, SatCount, IntervalS, Event, Link, Count, SpeedKmh, AltitudeM };

std::string_view to_string(Field f);
std::optional<Field> parse_field(std::string_view text);
bool is_name_field(Field f);

enum class Comparator { Eq, Ne, Lt, Le, Gt, Ge };

std::string_view to_string(Comparator c);

/// Half-width of the tolerance band used by `=` / `!=` on numbers (MHz for
/// frequency constants; the same band applies to every numeric field).
inline constexpr double kNumericEqualityTolerance = 0.005;

struct Atom {
    Field field = Field::Selector;
    Comparator cmp = Comparator::Eq;
    std::variant<double, std::string> constant;

    bool operator==(const Atom&) const = default;
};

/// REPEAT n MINDIST m: n matches spread over at least m meters of travel.
struct RepeatModifier {
    int count = 2;
    double min_distance_m = 0.0;
    bool operator==(const RepeatModifier&) const = default;
};

/// RATE c/w: more than c observations inside a w-second window.
struct RateModifier {
    double count = 0.0;
    double window_s = 1.0;
    bool operator==(const RateModifier&) const = default;
};

using StatefulModifier = std::variant<RepeatModifier, RateModifier>;

struct SignatureRule {
    std::string name;
    ActionLevel level = ActionLevel::Info;
    std::vector<Atom> atoms;
    std::optional<StatefulModifier> stateful;

    bool operator==(const SignatureRule&) const = default;
};

struct RuleMatch {
    std::string rule;
    ActionLevel level = ActionLevel::Info;
    TelemetryEvent event;
    Timestamp at;
    std::optional<StatefulModifier> stateful;
};

class RuleError : public std::runtime_error {
public:
    enum class Kind { SyntaxError, DuplicateRuleName, UnknownField, UnknownLevel, BadModifier };

    RuleError(Kind kind, std::size_t line, std::size_t column, const std::string& detail);

    Kind kind() const { return kind_; }
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    Kind kind_;
    std::size_t line_;
    std::size_t column_;
};

std::vector<SignatureRule> parse_rules(std::string_view text);
std::string format_rule(const SignatureRule& r);
std::string format_rules(const std::vector<SignatureRule>& rules);

bool atom_holds(const Atom& a, const TelemetryEvent& e);

/// One match per rule whose every atom holds on `e`, in rule-file order.
std::vector<RuleMatch> eval_event(const std::vector<SignatureRule>& rules, const TelemetryEvent& e);

/// Text of the shipped `default.rules` file.
std::string_view default_rules_text();
std::vector<SignatureRule> default_ruleset();

}  // namespace dronesentry
