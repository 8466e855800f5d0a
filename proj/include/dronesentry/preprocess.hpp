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
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dronesentry/telemetry.hpp"

namespace dronesentry {

enum class SourceKind { RfSample, GpsStatus, WifiFrame, NetCounter, MfrLog };

std::string_view to_string(SourceKind k);
std::optional<SourceKind> parse_source_kind(std::string_view text);

/// One record as captured by a source adapter, before normalization.
struct RawRecord {
    SourceKind kind = SourceKind::RfSample;
    Timestamp captured;
    std::vector<std::pair<std::string, std::string>> fields;

    const std::string* get(std::string_view key) const;
    bool operator==(const RawRecord&) const = default;
};

/// Flight-state sample; kinematics for every emitted line come from here.
struct Kinematics {
    Timestamp at;
    double speed_kmh = 0.0;
    double heading_deg = 0.0;
    GeoPoint geo;

    bool operator==(const Kinematics&) const = default;
};

class KinematicsTrack {
public:
    /// Samples must arrive in non-decreasing time order.
    void add(const Kinematics& k);

    /// Latest sample at or before `t`; all-zero kinematics before the first.
    Kinematics at(Timestamp t) const;

    const std::vector<Kinematics>& samples() const { return samples_; }

private:
    std::vector<Kinematics> samples_;
};

class PreprocessError : public std::runtime_error {
public:
    enum class Kind { UnknownSourceKind, MissingField, BadField, NonMonotonicCapture, SourceFailed, SinkUnavailable };

    PreprocessError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Maps one raw record onto the common event format. Throws
/// PreprocessError(MissingField | BadField) when the record must be dropped.
TelemetryEvent normalize(const RawRecord& r, const Kinematics& kin);

/// Pull-based adapter. `next()` returns nullopt at end of stream and may
/// throw to signal a mid-stream failure.
class RecordSource {
public:
    virtual ~RecordSource() = default;
    virtual SourceKind kind() const = 0;
    virtual std::string name() const = 0;
    virtual std::optional<RawRecord> next() = 0;
};

class VectorSource final : public RecordSource {
public:
    VectorSource(std::string name, SourceKind kind, std::vector<RawRecord> records)
        : name_(std::move(name)), kind_(kind), records_(std::move(records)) {}

    SourceKind kind() const override { return kind_; }
    std::string name() const override { return name_; }
    std::optional<RawRecord> next() override {
        if (pos_ >= records_.size()) return std::nullopt;
        return records_[pos_++];
    }

private:
    std::string name_;
    SourceKind kind_;
    std::vector<RawRecord> records_;
    std::size_t pos_ = 0;
};

struct AdapterStats {
    std::string name;
    std::uint64_t read = 0;
    std::uint64_t normalized = 0;
    std::uint64_t dropped = 0;
    std::optional<std::string> failure;
};

struct IngestStats {
    std::vector<AdapterStats> adapters;

    std::uint64_t total_read() const;
    std::uint64_t total_normalized() const;
    std::uint64_t total_dropped() const;
};

/// Downstream inlet (the rules engine in the full pipeline).
class EventSink {
public:
    virtual ~EventSink() = default;
    /// May throw PreprocessError(SinkUnavailable).
    virtual void accept(const TelemetryEvent& e, std::uint64_t sequence) = 0;
};

class PipelineAborted : public std::runtime_error {
public:
    PipelineAborted(const std::string& what, IngestStats partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}
    const IngestStats& partial() const { return partial_; }

private:
    IngestStats partial_;
};

/// Merges all sources into one stream ordered by (timestamp, adapter
/// registration order, per-adapter sequence), normalizes each record,
/// appends it to `log` and only then forwards it to `sink`. A source that
/// throws is closed; the others keep flowing.
IngestStats run_pipeline(std::span<RecordSource* const> sources, const KinematicsTrack& track, EventSink& sink,
                         LogWriter& log);

/// Adapter replay file: `<SOURCE_KIND> <capture_ts> key=value ...` lines plus
/// `FLIGHT_STATE <ts> speed_kmh=.. heading_deg=.. lat=.. lon=.. alt=..`.
struct RecordFile {
    std::vector<RawRecord> records;
    KinematicsTrack track;
};

RecordFile read_record_file(std::istream& in);
std::string format_raw_record(const RawRecord& r);
std::string format_flight_state(const Kinematics& k);

}  // namespace dronesentry
