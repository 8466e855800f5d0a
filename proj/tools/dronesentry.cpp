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

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dronesentry/analytics.hpp"
#include "dronesentry/locate.hpp"
#include "dronesentry/rules.hpp"
#include "dronesentry/runner.hpp"
#include "dronesentry/scenario.hpp"

namespace fs = std::filesystem;
using namespace dronesentry;

namespace {

constexpr int kExitAssertionFailed = 2;

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<SignatureRule> load_rules(const std::string& path) {
    if (path.empty()) return default_ruleset();
    return parse_rules(slurp(path));
}

AnalyticsConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    std::istringstream in(slurp(path));
    return parse_config(in);
}

/// `TDOA x y t`, `BEARING x y deg`, `SPEED c`; `#` comments.
std::vector<TriangObservation> read_observations(const fs::path& p, double& speed) {
    std::istringstream in(slurp(p));
    std::vector<TriangObservation> obs;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind)) continue;
        auto bad = [&] { return std::runtime_error("observation line " + std::to_string(n) + ": malformed"); };
        if (kind == "SPEED") {
            if (!(ls >> speed) || speed <= 0) throw bad();
            continue;
        }
        TriangObservation o;
        double v = 0;
        if (!(ls >> o.receiver.x >> o.receiver.y >> v)) throw bad();
        if (kind == "TDOA")
            o.arrival_time_s = v;
        else if (kind == "BEARING")
            o.bearing_deg = v;
        else
            throw bad();
        std::string extra;
        if (ls >> extra) throw bad();
        obs.push_back(o);
    }
    return obs;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drone RF attack sensing engine and scenario simulator"};
    app.require_subcommand(1);

    std::string scenario, rules_path, config_path, out_dir, assert_path, obs_path, method = "tdoa", log_path;

    auto* run = app.add_subcommand("run", "Run a scenario end to end and write artifacts");
    run->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    run->add_option("--rules", rules_path, "Signature rule file (default: built-in rules)")->check(CLI::ExistingFile);
    run->add_option("--config", config_path, "Analytics config file")->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--assert", assert_path, "Expectations file; exit 2 when any fails")->check(CLI::ExistingFile);

    auto* gen = app.add_subcommand("generate", "Write raw records and the ground-truth sidecar");
    gen->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
    gen->add_option("--out", out_dir, "Output directory")->required();

    auto* locate = app.add_subcommand("locate", "Locate an emitter from observations");
    locate->add_option("--obs", obs_path, "Observation file")->required()->check(CLI::ExistingFile);
    locate->add_option("--method", method, "tdoa or bearing")->check(CLI::IsMember({"tdoa", "bearing"}));

    auto* replay = app.add_subcommand("replay", "Re-run detection over a recorded telemetry log");
    replay->add_option("--log", log_path, "Telemetry log")->required()->check(CLI::ExistingFile);
    replay->add_option("--rules", rules_path, "Signature rule file")->check(CLI::ExistingFile);
    replay->add_option("--config", config_path, "Analytics config file")->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto spec = load_scenario(scenario);
            auto result = run_scenario(spec, load_rules(rules_path), load_config(config_path));
            write_run(result, out_dir);
            std::cout << result.report.to_text();
            if (!assert_path.empty()) {
                std::ifstream in(assert_path);
                auto failures = check_expectations(result.report, parse_expectations(in));
                for (const auto& f : failures) std::cerr << "expectation failed: " << f << '\n';
                if (!failures.empty()) return kExitAssertionFailed;
            }
        } else if (*gen) {
            auto spec = load_scenario(scenario);
            write_generated(spec, generate(spec), out_dir);
        } else if (*locate) {
            double speed = kSpeedOfLight;
            auto obs = read_observations(obs_path, speed);
            auto est = method == "tdoa" ? tdoa_locate(obs, speed) : bearing_locate(obs);
            std::cout << "x " << format_number(est.position.x) << '\n'
                      << "y " << format_number(est.position.y) << '\n'
                      << "residual " << format_number(est.residual) << '\n'
                      << "method " << to_string(est.method) << '\n'
                      << "converged " << (est.converged ? "true" : "false") << '\n';
        } else if (*replay) {
            std::ifstream in(log_path);
            auto events = read_log(in);
            auto rules = load_rules(rules_path);
            AnalyticsEngine engine("replay", load_config(config_path));
            std::size_t i = 0;
            while (i < events.size()) {
                Timestamp now = events[i].timestamp;
                std::vector<Alert> alerts;
                for (; i < events.size() && events[i].timestamp == now; ++i) {
                    for (auto& a : engine.observe(events[i])) alerts.push_back(std::move(a));
                    for (const auto& m : eval_event(rules, events[i]))
                        for (auto& a : engine.ingest_match(m, now, engine.odometer_m())) alerts.push_back(std::move(a));
                }
                for (const auto& a : alerts) std::cout << format_alert(a) << '\n';
                auto tr = engine.step_mode(alerts, {}, now);
                if (tr.changed()) std::cout << format_transition(engine.drone(), tr) << '\n';
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
