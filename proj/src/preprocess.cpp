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

#include "dronesentry/preprocess.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace dronesentry {

namespace {

constexpr SourceKind kAllKinds[] = {SourceKind::RfSample, SourceKind::GpsStatus, SourceKind::WifiFrame,
                                    SourceKind::NetCounter, SourceKind::MfrLog};

using PK = PreprocessError::Kind;

const std::string& require(const RawRecord& r, std::string_view key) {
    const std::string* v = r.get(key);
    if (!v)
        throw PreprocessError(PK::MissingField,
                              std::string(to_string(r.kind)) + " record missing field '" + std::string(key) + "'");
    return *v;
}

double require_number(const RawRecord& r, std::string_view key) {
    const std::string& text = require(r, key);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v))
        throw PreprocessError(PK::BadField, "field '" + std::string(key) + "' is not a number: " + text);
    return v;
}

std::int64_t require_int(const RawRecord& r, std::string_view key) {
    const std::string& text = require(r, key);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw PreprocessError(PK::BadField, "field '" + std::string(key) + "' is not an integer: " + text);
    return v;
}

TokenValue text_value(const std::string& text, std::string_view key) {
    try {
        return TokenValue::from_string(text);
    } catch (const std::invalid_argument&) {
        throw PreprocessError(PK::BadField, "field '" + std::string(key) + "' has an unusable value");
    }
}

bool parse_flag(const RawRecord& r, std::string_view key) {
    const std::string& v = require(r, key);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw PreprocessError(PK::BadField, "field '" + std::string(key) + "' is not a boolean: " + v);
}

// Manufacturer log severities, lowest first.
constexpr std::string_view kSeverities[] = {"DEBUG", "INFO", "WARNING", "ERROR", "EMERGENCY"};
constexpr int kEmergencySeverity = 4;

int parse_severity(const std::string& v) {
    for (int i = 0; i < 5; ++i)
        if (kSeverities[i] == v) return i;
    std::int64_t n = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec == std::errc{} && ptr == v.data() + v.size() && n >= 0) return static_cast<int>(std::min<std::int64_t>(n, 4));
    throw PreprocessError(PK::BadField, "unknown severity: " + v);
}

std::pair<std::string_view, std::string_view> split_kv(std::string_view tok) {
    auto eq = tok.find('=');
    if (eq == std::string_view::npos || eq == 0 || eq + 1 == tok.size()) return {};
    return {tok.substr(0, eq), tok.substr(eq + 1)};
}

}  // namespace

std::string_view to_string(SourceKind k) {
    switch (k) {
        case SourceKind::RfSample: return "RF_SAMPLE";
        case SourceKind::GpsStatus: return "GPS_STATUS";
        case SourceKind::WifiFrame: return "WIFI_FRAME";
        case SourceKind::NetCounter: return "NET_COUNTER";
        case SourceKind::MfrLog: return "MFR_LOG";
    }
    return "RF_SAMPLE";
}

std::optional<SourceKind> parse_source_kind(std::string_view text) {
    for (SourceKind k : kAllKinds)
        if (to_string(k) == text) return k;
    return std::nullopt;
}

const std::string* RawRecord::get(std::string_view key) const {
    for (const auto& [k, v] : fields)
        if (k == key) return &v;
    return nullptr;
}

void KinematicsTrack::add(const Kinematics& k) {
    if (!samples_.empty() && k.at < samples_.back().at)
        throw PreprocessError(PK::NonMonotonicCapture, "flight-state samples out of order at " + k.at.to_string());
    samples_.push_back(k);
}

Kinematics KinematicsTrack::at(Timestamp t) const {
    auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                               [](Timestamp lhs, const Kinematics& k) { return lhs < k.at; });
    if (it == samples_.begin()) {
        Kinematics zero;
        zero.at = t;
        return zero;
    }
    return *std::prev(it);
}

TelemetryEvent normalize(const RawRecord& r, const Kinematics& kin) {
    TelemetryEvent e;
    e.timestamp = r.captured;
    e.speed_kmh = kin.speed_kmh;
    e.heading_deg = kin.heading_deg;
    e.geo = kin.geo;

    switch (r.kind) {
        case SourceKind::RfSample: {
            double freq = require_number(r, "freq_mhz");
            double power = require_number(r, "power_db");
            e.selector = Selector::Frequency;
            e.additional = {{"freq_mhz", freq}, {"power_db", power}};
            break;
        }
        case SourceKind::GpsStatus: {
            if (!parse_flag(r, "fix")) {
                e.selector = Selector::SignalLoss;
                e.additional = {{"link", TokenValue::from_string("GPS")}};
            } else {
                auto sats = require_int(r, "sat_count");
                double interval = require_number(r, "interval_s");
                e.selector = Selector::General;
                e.additional = {{"sat_count", sats}, {"interval_s", interval}};
            }
            break;
        }
        case SourceKind::WifiFrame: {
            const std::string& frame = require(r, "frame");
            if (frame == "LINK_LOST") {
                e.selector = Selector::SignalLoss;
                e.additional = {{"link", TokenValue::from_string("WIFI")}};
                break;
            }
            const std::string& src = require(r, "src");
            std::int64_t count = r.get("count") ? require_int(r, "count") : 1;
            e.selector = Selector::General;
            e.additional = {{"event", text_value(frame, "frame")}, {"src", text_value(src, "src")}, {"count", count}};
            break;
        }
        case SourceKind::NetCounter: {
            auto packets = require_int(r, "packets");
            auto bytes = require_int(r, "bytes");
            e.selector = Selector::General;
            e.additional = {{"event", TokenValue::from_string("NET_PKT")}, {"count", packets}, {"bytes", bytes}};
            break;
        }
        case SourceKind::MfrLog: {
            int sev = parse_severity(require(r, "severity"));
            e.selector = sev >= kEmergencySeverity ? Selector::Emergency : Selector::Debug;
            e.additional.push_back({"severity", TokenValue::from_string(kSeverities[sev])});
            for (const auto& [k, v] : r.fields) {
                if (k == "severity") continue;
                if (!is_valid_key(k)) throw PreprocessError(PK::BadField, "bad manufacturer log key: " + k);
                e.additional.push_back({k, text_value(v, k)});
            }
            break;
        }
    }
    return e;
}

std::uint64_t IngestStats::total_read() const {
    std::uint64_t n = 0;
    for (const auto& a : adapters) n += a.read;
    return n;
}

std::uint64_t IngestStats::total_normalized() const {
    std::uint64_t n = 0;
    for (const auto& a : adapters) n += a.normalized;
    return n;
}

std::uint64_t IngestStats::total_dropped() const {
    std::uint64_t n = 0;
    for (const auto& a : adapters) n += a.dropped;
    return n;
}

IngestStats run_pipeline(std::span<RecordSource* const> sources, const KinematicsTrack& track, EventSink& sink,
                         LogWriter& log) {
    IngestStats stats;
    struct Head {
        std::optional<RawRecord> record;
        std::optional<Timestamp> last;
        bool open = true;
    };
    std::vector<Head> heads(sources.size());
    for (auto* s : sources) {
        AdapterStats a;
        a.name = s->name();
        stats.adapters.push_back(std::move(a));
    }

    // Pulls the next usable record of adapter i into its head slot.
    auto refill = [&](std::size_t i) {
        auto& h = heads[i];
        auto& st = stats.adapters[i];
        h.record.reset();
        while (h.open) {
            std::optional<RawRecord> r;
            try {
                r = sources[i]->next();
            } catch (const std::exception& ex) {
                ++st.read;
                ++st.dropped;
                st.failure = ex.what();
                h.open = false;
                return;
            }
            if (!r) {
                h.open = false;
                return;
            }
            ++st.read;
            if (r->kind != sources[i]->kind() || (h.last && r->captured < *h.last)) {
                ++st.dropped;
                continue;
            }
            h.last = r->captured;
            h.record = std::move(r);
            return;
        }
    };

    for (std::size_t i = 0; i < sources.size(); ++i) refill(i);

    std::uint64_t sequence = 0;
    for (;;) {
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < heads.size(); ++i) {
            if (!heads[i].record) continue;
            if (!pick || heads[i].record->captured < heads[*pick].record->captured) pick = i;
        }
        if (!pick) break;

        const std::size_t i = *pick;
        RawRecord rec = std::move(*heads[i].record);
        refill(i);

        TelemetryEvent event;
        try {
            event = normalize(rec, track.at(rec.captured));
        } catch (const PreprocessError&) {
            ++stats.adapters[i].dropped;
            continue;
        }
        if (!log.write(event)) throw PipelineAborted("event log is not writable", stats);
        ++stats.adapters[i].normalized;
        try {
            sink.accept(event, sequence);
        } catch (const PreprocessError& ex) {
            if (ex.kind() != PK::SinkUnavailable) throw;
            throw PipelineAborted(ex.what(), stats);
        }
        ++sequence;
    }
    return stats;
}

RecordFile read_record_file(std::istream& in) {
    RecordFile file;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        auto parts = split_ws(line);
        if (parts.empty() || parts[0].front() == '#') continue;
        auto where = " (line " + std::to_string(n) + ")";
        if (parts.size() < 2) throw PreprocessError(PK::BadField, "record needs a kind and a timestamp" + where);
        auto ts = Timestamp::parse(parts[1]);
        if (!ts) throw PreprocessError(PK::BadField, "bad capture timestamp" + where);

        RawRecord r;
        r.captured = *ts;
        for (std::size_t i = 2; i < parts.size(); ++i) {
            auto [k, v] = split_kv(parts[i]);
            if (k.empty()) throw PreprocessError(PK::BadField, "bad key=value token '" + std::string(parts[i]) + "'" + where);
            r.fields.emplace_back(std::string(k), std::string(v));
        }

        if (parts[0] == "FLIGHT_STATE") {
            Kinematics k;
            k.at = *ts;
            k.speed_kmh = require_number(r, "speed_kmh");
            k.heading_deg = require_number(r, "heading_deg");
            k.geo = {require_number(r, "lat"), require_number(r, "lon"), require_number(r, "alt")};
            file.track.add(k);
            continue;
        }
        auto kind = parse_source_kind(parts[0]);
        if (!kind) throw PreprocessError(PK::UnknownSourceKind, "unknown source kind '" + std::string(parts[0]) + "'" + where);
        r.kind = *kind;
        file.records.push_back(std::move(r));
    }
    return file;
}

std::string format_raw_record(const RawRecord& r) {
    std::string out(to_string(r.kind));
    out += ' ';
    out += r.captured.to_string();
    for (const auto& [k, v] : r.fields) {
        out += ' ';
        out += k;
        out += '=';
        out += v;
    }
    return out;
}

std::string format_flight_state(const Kinematics& k) {
    return "FLIGHT_STATE " + k.at.to_string() + " speed_kmh=" + format_number(k.speed_kmh) +
           " heading_deg=" + format_number(k.heading_deg) + " lat=" + format_number(k.geo.latitude_deg) +
           " lon=" + format_number(k.geo.longitude_deg) + " alt=" + format_number(k.geo.altitude_m);
}

}  // namespace dronesentry
