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

#include "dronesentry/message.hpp"

#include <stdexcept>

namespace dronesentry {

std::string format_alert(const Alert& a) {
    std::string out = a.last.to_string() + " ALERT " + a.drone + " " + std::string(to_string(a.level)) + " " + a.rule +
                      " count=" + std::to_string(a.count) + " first=" + a.first.to_string() +
                      " last=" + a.last.to_string();
    if (!a.detail.empty()) out += " " + a.detail;
    return out;
}

std::string_view to_string(MessageKind k) {
    switch (k) {
        case MessageKind::GroupAlert: return "GROUP_ALERT";
        case MessageKind::LogBatch: return "LOG_BATCH";
        case MessageKind::TriangObs: return "TRIANG_OBS";
        case MessageKind::AssistRequest: return "ASSIST_REQUEST";
    }
    return "GROUP_ALERT";
}

SwarmMessage make_group_alert(const Alert& a, Timestamp sent) {
    return SwarmMessage{MessageKind::GroupAlert, a.drone, sent, {}, a};
}

SwarmMessage make_log_batch(std::string sender, std::vector<std::string> lines, Timestamp sent) {
    return SwarmMessage{MessageKind::LogBatch, std::move(sender), sent, {}, std::move(lines)};
}

SwarmMessage make_triang_obs(std::string sender, std::string recipient, TriangObservation obs, Timestamp sent) {
    return SwarmMessage{MessageKind::TriangObs, std::move(sender), sent, std::move(recipient), obs};
}

SwarmMessage make_assist_request(std::string sender, Timestamp sent) {
    return SwarmMessage{MessageKind::AssistRequest, std::move(sender), sent, {}, std::monostate{}};
}

void validate(const SwarmMessage& m) {
    if (m.sender.empty()) throw std::invalid_argument("message without sender");
    switch (m.kind) {
        case MessageKind::GroupAlert:
        {
            auto a = std::get_if<Alert>(&m.payload);
            if (!a) throw std::invalid_argument("GROUP_ALERT needs an alert");
            if (a->level < ActionLevel::Group) throw std::invalid_argument("GROUP_ALERT carries Group or Emergency alerts only");
            break;
        }
        case MessageKind::LogBatch: {
            auto lines = std::get_if<std::vector<std::string>>(&m.payload);
            if (!lines) throw std::invalid_argument("LOG_BATCH needs log lines");
            for (std::size_t i = 0; i < lines->size(); ++i) parse_event((*lines)[i], i + 1);
            break;
        }
        case MessageKind::TriangObs: {
            auto obs = std::get_if<TriangObservation>(&m.payload);
            if (!obs || (!obs->arrival_time_s && !obs->bearing_deg))
                throw std::invalid_argument("TRIANG_OBS needs an arrival time or a bearing");
            break;
        }
        case MessageKind::AssistRequest: break;
    }
}

std::string describe(const SwarmMessage& m) {
    std::string out = std::string(to_string(m.kind)) + " from=" + m.sender;
    if (auto a = std::get_if<Alert>(&m.payload)) {
        out += " rule=" + a->rule + " level=" + std::string(to_string(a->level));
    } else if (auto lines = std::get_if<std::vector<std::string>>(&m.payload)) {
        out += " lines=" + std::to_string(lines->size());
    } else if (auto obs = std::get_if<TriangObservation>(&m.payload)) {
        out += " rx=" + format_number(obs->receiver.x) + "," + format_number(obs->receiver.y);
        if (obs->arrival_time_s) out += " toa_s=" + format_number(*obs->arrival_time_s);
        if (obs->bearing_deg) out += " bearing_deg=" + format_number(*obs->bearing_deg);
    }
    return out;
}

}  // namespace dronesentry
