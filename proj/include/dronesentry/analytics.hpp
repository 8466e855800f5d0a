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
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dronesentry/alert.hpp"
#include "dronesentry/message.hpp"
#include "dronesentry/rules.hpp"
#include "dronesentry/telemetry.hpp"

namespace dronesentry {

// ---------------------------------------------------------------------------
// Configuration

struct AnalyticsConfig {
    std::int64_t window_s = 3600;
    double quiet_period_s = 300.0;
    double cov_threshold = 0.01;
    std::size_t cov_min_samples = 10;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Line-oriented `key value`; `#` starts a comment. Unknown keys are errors.
AnalyticsConfig parse_config(std::istream& in);
std::string format_config(const AnalyticsConfig& c);

// ---------------------------------------------------------------------------
// Sliding metadata window

/// Selector plus numeric tokens of one event; the text payload is not kept.
struct MetadataRecord {
    Timestamp at;
    Selector selector = Selector::General;
    std::vector<std::pair<std::string, double>> numbers;

    bool operator==(const MetadataRecord&) const = default;
};

MetadataRecord metadata_of(const TelemetryEvent& e);

class MetadataWindow {
public:
    explicit MetadataWindow(std::int64_t duration_s = 3600);

    /// Records must arrive in non-decreasing time order. Everything older
    /// than `duration` relative to the new record is evicted.
    void insert(MetadataRecord r);

    /// Records with `from <= at <= to`, newest first.
    std::vector<MetadataRecord> query(Timestamp from, Timestamp to) const;

    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    std::int64_t duration_s() const { return duration_s_; }
    const std::deque<MetadataRecord>& records() const { return records_; }

private:
    std::int64_t duration_s_;
    std::deque<MetadataRecord> records_;
};

// ---------------------------------------------------------------------------
// Interval constancy (spoofers emit at an artificially steady cadence)

class ZeroMeanInterval : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct ConstancyResult {
    bool evaluated = false;  // false: too few samples, no indication
    bool indicator = false;
    double cov = 0.0;
};

/// CoV = population stddev / mean of the inter-arrival intervals of
/// `timestamps_s`. Indicator is `cov < threshold`. Throws ZeroMeanInterval
/// when the mean interval is not positive.
ConstancyResult interval_constancy(std::span<const double> timestamps_s, double threshold = 0.01,
                                   std::size_t min_samples = 10);

// ---------------------------------------------------------------------------
// Operating modes

enum class Mode { Normal, Monitor, Elevated, Evasive, SwarmMonitor, SwarmElevated };

inline constexpr Mode kAllModes[] = {Mode::Normal,  Mode::Monitor,      Mode::Elevated,
                                     Mode::Evasive, Mode::SwarmMonitor, Mode::SwarmElevated};

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view text);

/// Escalation rank: swarm overlays share the rank of their solo mode.
int rank(Mode m);
bool is_swarm(Mode m);
/// One rank down; Normal stays Normal.
Mode step_down(Mode m);

struct ModeTransition {
    Timestamp at;
    Mode from = Mode::Normal;
    Mode to = Mode::Normal;
    std::string cause;

    bool changed() const { return from != to; }
};

/// `<ts> MODE <drone_id> <from> -> <to> cause=<cause>`
std::string format_transition(std::string_view drone, const ModeTransition& t);

class ModeMachine {
public:
    explicit ModeMachine(double quiet_period_s = 300.0) : quiet_period_s_(quiet_period_s) {}

    /// Applies one step's inputs. Escalates on alerts and received group
    /// alerts; otherwise steps down one rank once `quiet_period_s` has passed
    /// without any input at or above the current rank.
    ModeTransition step(std::span<const Alert> alerts, std::span<const SwarmMessage> swarm_inputs, Timestamp now);

    Mode mode() const { return mode_; }
    std::optional<Timestamp> last_support() const { return last_support_; }

private:
    double quiet_period_s_;
    Mode mode_ = Mode::Normal;
    std::optional<Timestamp> last_support_;
};

// ---------------------------------------------------------------------------
// Stateful signature completion

class NonMonotonicTimestamp : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RepeatState {
    std::deque<std::pair<Timestamp, double>> hits;  // (time, odometer_m)
};

struct RateState {
    std::deque<std::pair<Timestamp, double>> hits;  // (time, weight)
    std::optional<Timestamp> cooldown_until;
};

/// Name of the alert raised by the interval-constancy trend detector.
inline constexpr std::string_view kIntervalConstancyRule = "interval_constancy";

/// Per-drone stateful stage: odometer, metadata window, pending signature
/// state, trend detectors and the mode machine. Single consumer; not
/// thread-safe.
class AnalyticsEngine {
public:
    AnalyticsEngine(std::string drone_id, AnalyticsConfig config = {});

    /// Integrates distance from speed and elapsed time. Throws
    /// NonMonotonicTimestamp (and counts it) for an event older than the last.
    double advance_odometer(const TelemetryEvent& e);

    /// Per-event state update: odometer, window, trend detectors. Returns any
    /// trend alerts. Out-of-order events are counted and leave state intact.
    std::vector<Alert> observe(const TelemetryEvent& e);

    /// Completes a rule match. Stateless rules alert at once; REPEAT and RATE
    /// rules accumulate first.
    std::vector<Alert> ingest_match(const RuleMatch& m, Timestamp now, double odometer_m);

    ModeTransition step_mode(std::span<const Alert> alerts, std::span<const SwarmMessage> swarm_inputs,
                             Timestamp now) {
        return modes_.step(alerts, swarm_inputs, now);
    }

    const std::string& drone() const { return drone_; }
    const AnalyticsConfig& config() const { return config_; }
    double odometer_m() const { return odometer_m_; }
    Mode mode() const { return modes_.mode(); }
    const MetadataWindow& window() const { return window_; }
    std::uint64_t rejected_events() const { return rejected_; }

private:
    std::vector<Alert> track_intervals(const TelemetryEvent& e);

    std::string drone_;
    AnalyticsConfig config_;
    MetadataWindow window_;
    ModeMachine modes_;

    double odometer_m_ = 0.0;
    std::optional<Timestamp> last_event_;
    std::uint64_t rejected_ = 0;

    std::map<std::string, RepeatState, std::less<>> repeat_;
    std::map<std::string, RateState, std::less<>> rate_;

    // GPS message arrival clock rebuilt from the reported intervals
    double gps_clock_s_ = 0.0;
    std::deque<std::pair<Timestamp, double>> gps_arrivals_;
    bool constancy_latched_ = false;
};

}  // namespace dronesentry
