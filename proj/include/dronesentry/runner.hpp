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

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dronesentry/analytics.hpp"
#include "dronesentry/rules.hpp"
#include "dronesentry/scenario.hpp"

namespace dronesentry {

/// Flat, ordered `key value` report. Keys are stable so expectation files
/// can refer to them.
class RunReport {
public:
    void set(std::string key, std::string value);
    void set(std::string key, double value);
    void set(std::string key, std::int64_t value);
    void set(std::string key, std::size_t value) { set(std::move(key), static_cast<std::int64_t>(value)); }
    void set(std::string key, int value) { set(std::move(key), static_cast<std::int64_t>(value)); }

    std::optional<std::string> get(std::string_view key) const;
    std::optional<double> number(std::string_view key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    std::string to_text() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

struct RunResult {
    RunReport report;
    // output file (relative path) -> contents
    std::map<std::string, std::string> artifacts;
};

/// End-to-end run: generate, preprocess, rules, analytics, swarm and
/// countermeasures in lock-step one-second rounds. Errors from a module are
/// rethrown as std::runtime_error prefixed with the module name.
RunResult run_scenario(const ScenarioSpec& spec, const std::vector<SignatureRule>& rules,
                       const AnalyticsConfig& config);

/// Writes every artifact under `out`, replacing files of the same name.
void write_run(const RunResult& r, const std::filesystem::path& out);

/// Rules whose alerts count as detecting an attack of `kind`.
std::vector<std::string_view> rules_detecting(AttackKind kind);

// ---------------------------------------------------------------------------
// Expectations: `<key> <op> <value>` per line, op one of == != < <= > >=.
// Values compare numerically when both sides parse as numbers.

struct Expectation {
    std::string key;
    std::string op;
    std::string value;
    std::size_t line = 0;
};

std::vector<Expectation> parse_expectations(std::istream& in);

/// Human-readable failure per unmet expectation; empty when all hold.
std::vector<std::string> check_expectations(const RunReport& report, const std::vector<Expectation>& expectations);

}  // namespace dronesentry
