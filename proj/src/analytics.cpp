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

#include "dronesentry/analytics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace dronesentry {

namespace {

std::string join_tokens(const std::vector<Token>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += ' ';
        out += t.key + "=" + t.value.to_string();
    }
    return out;
}

std::string with_trigger(std::string summary, const std::vector<Token>& trigger) {
    auto tokens = join_tokens(trigger);
    if (tokens.empty()) return summary;
    if (summary.empty()) return tokens;
    return summary + " " + tokens;
}

double observation_weight(const TelemetryEvent& e) {
    auto c = e.number("count");
    return c ? std::max(0.0, *c) : 1.0;
}

int target_rank(ActionLevel l) {
    switch (l) {
        case ActionLevel::Info: return 1;
        case ActionLevel::Elevated:
        case ActionLevel::Group: return 2;
        case ActionLevel::Emergency: return 3;
    }
    return 1;
}

Mode solo_mode_for_rank(int r) {
    switch (r) {
        case 1: return Mode::Monitor;
        case 2: return Mode::Elevated;
        case 3: return Mode::Evasive;
        default: return Mode::Normal;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

AnalyticsConfig parse_config(std::istream& in) {
    AnalyticsConfig c;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto parts = split_ws(line);
        if (parts.empty()) continue;
        auto where = "config line " + std::to_string(n) + ": ";
        if (parts.size() != 2) throw ConfigError(where + "expected `key value`");
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), v);
        if (ec != std::errc{} || ptr != parts[1].data() + parts[1].size() || !std::isfinite(v))
            throw ConfigError(where + "value is not a number");
        if (parts[0] == "window_s") {
            if (v <= 0 || v != std::floor(v)) throw ConfigError(where + "window_s must be a positive integer");
            c.window_s = static_cast<std::int64_t>(v);
        } else if (parts[0] == "quiet_period_s") {
            if (v <= 0) throw ConfigError(where + "quiet_period_s must be positive");
            c.quiet_period_s = v;
        } else if (parts[0] == "cov_threshold") {
            if (v <= 0) throw ConfigError(where + "cov_threshold must be positive");
            c.cov_threshold = v;
        } else if (parts[0] == "cov_min_samples") {
            if (v < 3 || v != std::floor(v)) throw ConfigError(where + "cov_min_samples must be an integer >= 3");
            c.cov_min_samples = static_cast<std::size_t>(v);
        } else {
            throw ConfigError(where + "unknown key '" + std::string(parts[0]) + "'");
        }
    }
    return c;
}

std::string format_config(const AnalyticsConfig& c) {
    return "window_s " + std::to_string(c.window_s) + "\nquiet_period_s " + format_number(c.quiet_period_s) +
           "\ncov_threshold " + format_number(c.cov_threshold) + "\ncov_min_samples " +
           std::to_string(c.cov_min_samples) + "\n";
}

// ---------------------------------------------------------------------------
// Window

MetadataRecord metadata_of(const TelemetryEvent& e) {
    MetadataRecord r{e.timestamp, e.selector, {}};
    for (const auto& t : e.additional)
        if (auto n = t.value.as_number()) r.numbers.emplace_back(t.key, *n);
    return r;
}

MetadataWindow::MetadataWindow(std::int64_t duration_s) : duration_s_(duration_s) {
    if (duration_s <= 0) throw std::invalid_argument("window duration must be positive");
}

void MetadataWindow::insert(MetadataRecord r) {
    if (!records_.empty() && r.at < records_.back().at)
        throw std::invalid_argument("metadata window insert out of order");
    const Timestamp cutoff = r.at + (-duration_s_);
    records_.push_back(std::move(r));
    while (records_.front().at < cutoff) records_.pop_front();
}

std::vector<MetadataRecord> MetadataWindow::query(Timestamp from, Timestamp to) const {
    std::vector<MetadataRecord> out;
    for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
        if (it->at < from) break;
        if (it->at <= to) out.push_back(*it);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Interval constancy

ConstancyResult interval_constancy(std::span<const double> ts, double threshold, std::size_t min_samples) {
    ConstancyResult res;
    if (ts.size() < min_samples || ts.size() < 2) return res;
    const std::size_t n = ts.size() - 1;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += ts[i + 1] - ts[i];
    mean /= static_cast<double>(n);
    if (!(mean > 0.0)) throw ZeroMeanInterval("mean inter-arrival interval is not positive");
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = (ts[i + 1] - ts[i]) - mean;
        var += d * d;
    }
    var /= static_cast<double>(n);
    res.evaluated = true;
    res.cov = std::sqrt(var) / mean;
    res.indicator = res.cov < threshold;
    return res;
}

// ---------------------------------------------------------------------------
// Modes

std::string_view to_string(Mode m) {
    switch (m) {
        case Mode::Normal: return "Normal";
        case Mode::Monitor: return "Monitor";
        case Mode::Elevated: return "Elevated";
        case Mode::Evasive: return "Evasive";
        case Mode::SwarmMonitor: return "SwarmMonitor";
        case Mode::SwarmElevated: return "SwarmElevated";
    }
    return "Normal";
}

std::optional<Mode> parse_mode(std::string_view text) {
    for (Mode m : kAllModes)
        if (to_string(m) == text) return m;
    return std::nullopt;
}

int rank(Mode m) {
    switch (m) {
        case Mode::Normal: return 0;
        case Mode::Monitor:
        case Mode::SwarmMonitor: return 1;
        case Mode::Elevated:
        case Mode::SwarmElevated: return 2;
        case Mode::Evasive: return 3;
    }
    return 0;
}

bool is_swarm(Mode m) { return m == Mode::SwarmMonitor || m == Mode::SwarmElevated; }

Mode step_down(Mode m) {
    switch (m) {
        case Mode::Evasive: return Mode::Elevated;
        case Mode::Elevated: return Mode::Monitor;
        case Mode::SwarmElevated: return Mode::SwarmMonitor;
        case Mode::Monitor:
        case Mode::SwarmMonitor:
        case Mode::Normal: return Mode::Normal;
    }
    return Mode::Normal;
}

std::string format_transition(std::string_view drone, const ModeTransition& t) {
    return t.at.to_string() + " MODE " + std::string(drone) + " " + std::string(to_string(t.from)) + " -> " +
           std::string(to_string(t.to)) + " cause=" + t.cause;
}

ModeTransition ModeMachine::step(std::span<const Alert> alerts, std::span<const SwarmMessage> swarm_inputs,
                                 Timestamp now) {
    ModeTransition tr{now, mode_, mode_, {}};
    Mode m = mode_;
    int best_input = -1;

    for (const auto& a : alerts) {
        int r = target_rank(a.level);
        best_input = std::max(best_input, r);
        if (r > rank(m)) {
            m = solo_mode_for_rank(r);
            tr.cause = a.rule;
        }
    }
    for (const auto& msg : swarm_inputs) {
        if (msg.kind != MessageKind::GroupAlert) continue;
        Mode next = m;
        if (rank(m) <= 1)
            next = Mode::SwarmMonitor;
        else if (m == Mode::Elevated || m == Mode::SwarmElevated)
            next = Mode::SwarmElevated;
        // a group alert supports at most SwarmElevated
        best_input = std::max(best_input, rank(m) >= 2 ? 2 : 1);
        if (next != m) {
            m = next;
            tr.cause = "swarm:" + msg.sender;
        }
    }

    if (rank(m) > rank(mode_) || (best_input >= rank(m) && rank(m) > 0)) {
        last_support_ = now;
    } else if (rank(m) > 0 && last_support_ && static_cast<double>(now - *last_support_) >= quiet_period_s_) {
        m = step_down(m);
        tr.cause = "quiet";
        last_support_ = now;
    }

    mode_ = m;
    tr.to = m;
    return tr;
}

// ---------------------------------------------------------------------------
// Engine

AnalyticsEngine::AnalyticsEngine(std::string drone_id, AnalyticsConfig config)
    : drone_(std::move(drone_id)), config_(config), window_(config.window_s), modes_(config.quiet_period_s) {}

double AnalyticsEngine::advance_odometer(const TelemetryEvent& e) {
    if (last_event_) {
        if (e.timestamp < *last_event_) {
            ++rejected_;
            throw NonMonotonicTimestamp("event at " + e.timestamp.to_string() + " precedes " +
                                        last_event_->to_string());
        }
        odometer_m_ += (e.speed_kmh / 3.6) * static_cast<double>(e.timestamp - *last_event_);
    }
    last_event_ = e.timestamp;
    return odometer_m_;
}

std::vector<Alert> AnalyticsEngine::observe(const TelemetryEvent& e) {
    try {
        advance_odometer(e);
    } catch (const NonMonotonicTimestamp&) {
        return {};
    }
    window_.insert(metadata_of(e));
    return track_intervals(e);
}

std::vector<Alert> AnalyticsEngine::track_intervals(const TelemetryEvent& e) {
    if (e.selector != Selector::General) return {};
    auto interval = e.number("interval_s");
    if (!interval) return {};

    gps_clock_s_ += *interval;
    gps_arrivals_.emplace_back(e.timestamp, gps_clock_s_);
    while (gps_arrivals_.size() > config_.cov_min_samples) gps_arrivals_.pop_front();

    std::vector<double> clock;
    clock.reserve(gps_arrivals_.size());
    for (const auto& a : gps_arrivals_) clock.push_back(a.second);

    ConstancyResult res;
    try {
        res = interval_constancy(clock, config_.cov_threshold, config_.cov_min_samples);
    } catch (const ZeroMeanInterval&) {
        return {};
    }
    if (!res.evaluated) return {};
    if (!res.indicator) {
        constancy_latched_ = false;
        return {};
    }
    if (constancy_latched_) return {};
    constancy_latched_ = true;

    Alert a;
    a.drone = drone_;
    a.rule = std::string(kIntervalConstancyRule);
    a.level = ActionLevel::Emergency;
    a.first = gps_arrivals_.front().first;
    a.last = e.timestamp;
    a.count = gps_arrivals_.size();
    a.detail = "cov=" + format_number(res.cov);
    a.trigger = e.additional;
    return {a};
}

std::vector<Alert> AnalyticsEngine::ingest_match(const RuleMatch& m, Timestamp now, double odometer_m) {
    Alert a;
    a.drone = drone_;
    a.rule = m.rule;
    a.level = m.level;
    a.trigger = m.event.additional;

    if (!m.stateful) {
        a.first = a.last = m.at;
        a.count = 1;
        a.detail = join_tokens(a.trigger);
        return {a};
    }

    if (auto rep = std::get_if<RepeatModifier>(&*m.stateful)) {
        auto& st = repeat_[m.rule];
        st.hits.emplace_back(m.at, odometer_m);
        while (!st.hits.empty() && now - st.hits.front().first > config_.window_s) st.hits.pop_front();
        if (st.hits.size() < static_cast<std::size_t>(rep->count)) return {};
        double span = st.hits.back().second - st.hits.front().second;
        if (span < rep->min_distance_m) return {};
        a.first = st.hits.front().first;
        a.last = st.hits.back().first;
        a.count = st.hits.size();
        a.detail = with_trigger("span_m=" + format_number(span), a.trigger);
        st.hits.clear();
        return {a};
    }

    const auto& rate = std::get<RateModifier>(*m.stateful);
    auto& st = rate_[m.rule];
    const double now_s = static_cast<double>(now.epoch_seconds());
    if (st.cooldown_until && now < *st.cooldown_until) return {};
    st.hits.emplace_back(m.at, observation_weight(m.event));
    while (!st.hits.empty() && now_s - static_cast<double>(st.hits.front().first.epoch_seconds()) >= rate.window_s)
        st.hits.pop_front();
    double total = 0.0;
    for (const auto& h : st.hits) total += h.second;
    if (!(total > rate.count)) return {};
    a.first = st.hits.front().first;
    a.last = st.hits.back().first;
    a.count = static_cast<std::uint64_t>(std::max(1.0, std::round(total)));
    a.detail = with_trigger("observed=" + format_number(total) + " window_s=" + format_number(rate.window_s), a.trigger);
    st.hits.clear();
    st.cooldown_until = now + static_cast<std::int64_t>(std::ceil(rate.window_s));
    return {a};
}

}  // namespace dronesentry
