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

#include "dronesentry/rules.hpp"

#include <charconv>
#include <cmath>
#include <set>

namespace dronesentry {

namespace {

constexpr ActionLevel kLevels[] = {ActionLevel::Info, ActionLevel::Elevated, ActionLevel::Group,
                                   ActionLevel::Emergency};

constexpr Field kFields[] = {Field::Selector, Field::FreqMhz,  Field::PowerDb, Field::SatCount,  Field::IntervalS,
                             Field::Event,    Field::Link,     Field::Count,   Field::SpeedKmh,  Field::AltitudeM};

constexpr Comparator kComparators[] = {Comparator::Eq, Comparator::Ne, Comparator::Le,
                                       Comparator::Ge, Comparator::Lt, Comparator::Gt};

struct Lexeme {
    std::string_view text;
    std::size_t column;  // 1-based
};

std::vector<Lexeme> lex(std::string_view line) {
    std::vector<Lexeme> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back({line.substr(start, i - start), start + 1});
    }
    return out;
}

std::optional<double> to_number(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string compact(double v) {
    if (std::abs(v) < 1e15 && v == std::floor(v)) return std::to_string(static_cast<long long>(v));
    return format_number(v);
}

std::string_view token_key(Field f) {
    switch (f) {
        case Field::FreqMhz: return "freq_mhz";
        case Field::PowerDb: return "power_db";
        case Field::SatCount: return "sat_count";
        case Field::IntervalS: return "interval_s";
        case Field::Event: return "event";
        case Field::Link: return "link";
        case Field::Count: return "count";
        default: return "";
    }
}

std::optional<double> numeric_value(Field f, const TelemetryEvent& e) {
    switch (f) {
        case Field::SpeedKmh: return e.speed_kmh;
        case Field::AltitudeM: return e.geo.altitude_m;
        default: return e.number(token_key(f));
    }
}

std::optional<std::string> name_value(Field f, const TelemetryEvent& e) {
    if (f == Field::Selector) return std::string(to_string(e.selector));
    return e.text(token_key(f));
}

class LineParser {
public:
    LineParser(std::vector<Lexeme> lx, std::size_t line_no, std::size_t line_len)
        : lx_(std::move(lx)), line_(line_no), end_col_(line_len + 1) {}

    SignatureRule parse() {
        SignatureRule rule;
        expect("RULE");
        auto name = take("rule name");
        if (!is_valid_key(name.text)) fail(RuleError::Kind::SyntaxError, name, "invalid rule name");
        rule.name = std::string(name.text);
        expect("LEVEL");
        auto lvl = take("level");
        auto level = parse_level(lvl.text);
        if (!level) fail(RuleError::Kind::UnknownLevel, lvl, "unknown level '" + std::string(lvl.text) + "'");
        rule.level = *level;
        expect("WHEN");
        rule.atoms.push_back(atom());
        while (peek_is("AND")) {
            ++pos_;
            rule.atoms.push_back(atom());
        }
        if (peek_is("REPEAT")) {
            ++pos_;
            auto n = take("repeat count");
            auto count = to_number(n.text);
            if (!count || *count != std::floor(*count))
                fail(RuleError::Kind::SyntaxError, n, "REPEAT count must be an integer");
            if (*count < 2) fail(RuleError::Kind::BadModifier, n, "REPEAT count must be at least 2");
            expect("MINDIST");
            auto m = take("minimum distance");
            auto dist = to_number(m.text);
            if (!dist) fail(RuleError::Kind::SyntaxError, m, "MINDIST must be a number");
            if (*dist < 0) fail(RuleError::Kind::BadModifier, m, "MINDIST must be non-negative");
            rule.stateful = RepeatModifier{static_cast<int>(*count), *dist};
        } else if (peek_is("RATE")) {
            ++pos_;
            auto r = take("rate c/w");
            auto slash = r.text.find('/');
            if (slash == std::string_view::npos) fail(RuleError::Kind::SyntaxError, r, "RATE expects c/w");
            auto c = to_number(r.text.substr(0, slash));
            auto w = to_number(r.text.substr(slash + 1));
            if (!c || !w) fail(RuleError::Kind::SyntaxError, r, "RATE expects numeric c/w");
            if (*c < 0) fail(RuleError::Kind::BadModifier, r, "RATE count must be non-negative");
            if (*w <= 0) fail(RuleError::Kind::BadModifier, r, "RATE window must be positive");
            rule.stateful = RateModifier{*c, *w};
        }
        if (pos_ < lx_.size()) fail(RuleError::Kind::SyntaxError, lx_[pos_], "unexpected token '" + std::string(lx_[pos_].text) + "'");
        return rule;
    }

private:
    [[noreturn]] void fail(RuleError::Kind k, const Lexeme& at, const std::string& msg) {
        throw RuleError(k, line_, at.column, msg);
    }

    Lexeme take(const char* what) {
        if (pos_ >= lx_.size()) throw RuleError(RuleError::Kind::SyntaxError, line_, end_col_, std::string("expected ") + what);
        return lx_[pos_++];
    }

    void expect(std::string_view keyword) {
        auto t = take(std::string(keyword).c_str());
        if (t.text != keyword) fail(RuleError::Kind::SyntaxError, t, "expected " + std::string(keyword));
    }

    bool peek_is(std::string_view keyword) const { return pos_ < lx_.size() && lx_[pos_].text == keyword; }

    Atom atom() {
        Atom a;
        auto f = take("field");
        auto field = parse_field(f.text);
        if (!field) fail(RuleError::Kind::UnknownField, f, "unknown field '" + std::string(f.text) + "'");
        a.field = *field;

        auto c = take("comparator");
        std::optional<Comparator> cmp;
        for (Comparator k : kComparators)
            if (to_string(k) == c.text) cmp = k;
        if (!cmp) fail(RuleError::Kind::SyntaxError, c, "unknown comparator '" + std::string(c.text) + "'");
        a.cmp = *cmp;

        auto v = take("constant");
        if (is_name_field(a.field)) {
            if (a.cmp != Comparator::Eq && a.cmp != Comparator::Ne)
                fail(RuleError::Kind::SyntaxError, c, "only = and != apply to " + std::string(to_string(a.field)));
            if (a.field == Field::Selector && !parse_selector(v.text))
                fail(RuleError::Kind::SyntaxError, v, "unknown selector '" + std::string(v.text) + "'");
            a.constant = std::string(v.text);
        } else {
            auto num = to_number(v.text);
            if (!num) fail(RuleError::Kind::SyntaxError, v, "expected a number, got '" + std::string(v.text) + "'");
            a.constant = *num;
        }
        return a;
    }

    std::vector<Lexeme> lx_;
    std::size_t pos_ = 0;
    std::size_t line_;
    std::size_t end_col_;
};

}  // namespace

std::string_view to_string(ActionLevel l) {
    switch (l) {
        case ActionLevel::Info: return "Info";
        case ActionLevel::Elevated: return "Elevated";
        case ActionLevel::Group: return "Group";
        case ActionLevel::Emergency: return "Emergency";
    }
    return "Info";
}

std::optional<ActionLevel> parse_level(std::string_view text) {
    for (ActionLevel l : kLevels)
        if (to_string(l) == text) return l;
    return std::nullopt;
}

std::string_view to_string(Field f) {
    switch (f) {
        case Field::Selector: return "SELECTOR";
        case Field::FreqMhz: return "FREQ_MHZ";
        case Field::PowerDb: return "POWER_DB";
        case Field::SatCount: return "SAT_COUNT";
        case Field::IntervalS: return "INTERVAL_S";
        case Field::Event: return "EVENT";
        case Field::Link: return "LINK";
        case Field::Count: return "COUNT";
        case Field::SpeedKmh: return "SPEED_KMH";
        case Field::AltitudeM: return "ALTITUDE_M";
    }
    return "SELECTOR";
}

std::optional<Field> parse_field(std::string_view text) {
    for (Field f : kFields)
        if (to_string(f) == text) return f;
    return std::nullopt;
}

bool is_name_field(Field f) { return f == Field::Selector || f == Field::Event || f == Field::Link; }

std::string_view to_string(Comparator c) {
    switch (c) {
        case Comparator::Eq: return "=";
        case Comparator::Ne: return "!=";
        case Comparator::Lt: return "<";
        case Comparator::Le: return "<=";
        case Comparator::Gt: return ">";
        case Comparator::Ge: return ">=";
    }
    return "=";
}

RuleError::RuleError(Kind kind, std::size_t line, std::size_t column, const std::string& detail)
    : std::runtime_error("rules:" + std::to_string(line) + ":" + std::to_string(column) + ": " + detail),
      kind_(kind),
      line_(line),
      column_(column) {}

std::vector<SignatureRule> parse_rules(std::string_view text) {
    std::vector<SignatureRule> rules;
    std::set<std::string, std::less<>> names;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto lx = lex(line);
        if (lx.empty()) continue;
        auto name_col = lx.size() > 1 ? lx[1].column : 1;
        SignatureRule rule = LineParser(std::move(lx), line_no, line.size()).parse();
        if (!names.insert(rule.name).second)
            throw RuleError(RuleError::Kind::DuplicateRuleName, line_no, name_col, "duplicate rule name '" + rule.name + "'");
        rules.push_back(std::move(rule));
    }
    return rules;
}

std::string format_rule(const SignatureRule& r) {
    std::string out = "RULE " + r.name + " LEVEL " + std::string(to_string(r.level)) + " WHEN";
    for (std::size_t i = 0; i < r.atoms.size(); ++i) {
        const auto& a = r.atoms[i];
        if (i) out += " AND";
        out += ' ';
        out += to_string(a.field);
        out += ' ';
        out += to_string(a.cmp);
        out += ' ';
        if (auto d = std::get_if<double>(&a.constant))
            out += compact(*d);
        else
            out += std::get<std::string>(a.constant);
    }
    if (r.stateful) {
        if (auto rep = std::get_if<RepeatModifier>(&*r.stateful))
            out += " REPEAT " + std::to_string(rep->count) + " MINDIST " + compact(rep->min_distance_m);
        else {
            const auto& rate = std::get<RateModifier>(*r.stateful);
            out += " RATE " + compact(rate.count) + "/" + compact(rate.window_s);
        }
    }
    return out;
}

std::string format_rules(const std::vector<SignatureRule>& rules) {
    std::string out;
    for (const auto& r : rules) out += format_rule(r) + "\n";
    return out;
}

bool atom_holds(const Atom& a, const TelemetryEvent& e) {
    if (is_name_field(a.field)) {
        auto v = name_value(a.field, e);
        if (!v) return false;
        bool eq = *v == std::get<std::string>(a.constant);
        return a.cmp == Comparator::Eq ? eq : !eq;
    }
    auto v = numeric_value(a.field, e);
    if (!v) return false;
    double k = std::get<double>(a.constant);
    bool near = std::abs(*v - k) <= kNumericEqualityTolerance;
    switch (a.cmp) {
        case Comparator::Eq: return near;
        case Comparator::Ne: return !near;
        case Comparator::Lt: return *v < k;
        case Comparator::Le: return *v <= k;
        case Comparator::Gt: return *v > k;
        case Comparator::Ge: return *v >= k;
    }
    return false;
}

std::vector<RuleMatch> eval_event(const std::vector<SignatureRule>& rules, const TelemetryEvent& e) {
    std::vector<RuleMatch> out;
    for (const auto& r : rules) {
        bool all = true;
        for (const auto& a : r.atoms) {
            if (!atom_holds(a, e)) {
                all = false;
                break;
            }
        }
        if (all) out.push_back(RuleMatch{r.name, r.level, e, e.timestamp, r.stateful});
    }
    return out;
}

std::string_view default_rules_text() {
    return R"(# Drone IDS signatures, one per line:
#   RULE <name> LEVEL <Info|Elevated|Group|Emergency> WHEN <atom> (AND <atom>)*
#        [REPEAT <n> MINDIST <meters> | RATE <count>/<window_s>]
# Thresholds are tunable; edit this file rather than the code.

RULE lost_link LEVEL Info WHEN SELECTOR = SIGNAL_LOSS

# Wi-Fi band power above -40 dB seen twice at least 100 m apart along the route.
RULE wifi_power_anomaly LEVEL Elevated WHEN SELECTOR = FREQUENCY AND FREQ_MHZ >= 2400 AND FREQ_MHZ <= 2500 AND POWER_DB > -40 REPEAT 2 MINDIST 100

RULE wifi_deauth LEVEL Elevated WHEN EVENT = DEAUTH RATE 5/10

# Packet-rate threshold standing in for UAV network DDoS detection.
RULE ddos LEVEL Group WHEN EVENT = NET_PKT RATE 1000/1

# GPS L1 power above the -120 dB noise floor.
RULE gps_spoof LEVEL Emergency WHEN SELECTOR = FREQUENCY AND FREQ_MHZ = 1575.42 AND POWER_DB > -120

# More satellites than the usual 4 to 8 in view.
RULE sat_count_anomaly LEVEL Emergency WHEN SAT_COUNT > 8
)";
}

std::vector<SignatureRule> default_ruleset() { return parse_rules(default_rules_text()); }

}  // namespace dronesentry
