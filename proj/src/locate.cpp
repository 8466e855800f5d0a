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

#include "dronesentry/locate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "dronesentry/swarm.hpp"

namespace dronesentry {

namespace {

constexpr int kMaxIterations = 100;

struct Receiver {
    Vec2 pos;
    double t;
};

// 2x2 symmetric solve; returns false when singular relative to `scale`.
bool solve2(double a, double b, double d, Vec2 rhs, double scale, Vec2& out) {
    double det = a * d - b * b;
    if (!(std::abs(det) > 1e-12 * scale * scale)) return false;
    out = {(d * rhs.x - b * rhs.y) / det, (a * rhs.y - b * rhs.x) / det};
    return true;
}

double tdoa_cost(const std::vector<Receiver>& rx, Vec2 p, double c) {
    double s = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i)
        for (std::size_t j = i + 1; j < rx.size(); ++j) {
            double r = c * (rx[i].t - rx[j].t) - (distance(p, rx[i].pos) - distance(p, rx[j].pos));
            s += r * r;
        }
    return s;
}

Vec2 unit_from(Vec2 p, Vec2 r) {
    Vec2 d = p - r;
    double n = d.norm();
    return n > 0.0 ? d * (1.0 / n) : Vec2{};
}

}  // namespace

std::string_view to_string(LocateMethod m) { return m == LocateMethod::Tdoa ? "TDOA" : "BEARING"; }

EmitterEstimate tdoa_locate(std::span<const TriangObservation> observations, double c) {
    std::vector<Receiver> rx;
    for (const auto& o : observations)
        if (o.arrival_time_s) rx.push_back({o.receiver, *o.arrival_time_s});
    if (rx.size() < 3)
        throw SwarmError(SwarmError::Kind::CollinearReceivers, "TDoA needs at least three receivers, got " +
                                                                   std::to_string(rx.size()));

    // Work relative to the centroid and the earliest arrival to keep the
    // differences well conditioned.
    Vec2 centroid;
    double t0 = rx.front().t;
    for (const auto& r : rx) {
        centroid = centroid + r.pos;
        t0 = std::min(t0, r.t);
    }
    centroid = centroid * (1.0 / static_cast<double>(rx.size()));
    double sxx = 0, sxy = 0, syy = 0;
    for (auto& r : rx) {
        r.pos = r.pos - centroid;
        r.t -= t0;
        sxx += r.pos.x * r.pos.x;
        sxy += r.pos.x * r.pos.y;
        syy += r.pos.y * r.pos.y;
    }
    double tr = sxx + syy;
    double disc = std::sqrt(std::max(0.0, (sxx - syy) * (sxx - syy) / 4.0 + sxy * sxy));
    double lmin = tr / 2.0 - disc;
    double lmax = tr / 2.0 + disc;
    if (!(lmax > 0.0) || lmin <= 1e-10 * lmax)
        throw SwarmError(SwarmError::Kind::CollinearReceivers, "TDoA receivers are collinear");
    const double spread = std::sqrt(lmax / static_cast<double>(rx.size()));

    Vec2 p{};
    double cost = tdoa_cost(rx, p, c);
    double lambda = 1e-3;
    EmitterEstimate est;
    est.method = LocateMethod::Tdoa;
    est.converged = false;

    int it = 0;
    for (; it < kMaxIterations; ++it) {
        if (cost == 0.0) {
            est.converged = true;
            break;
        }
        double a = 0, b = 0, d = 0;
        Vec2 g{};
        for (std::size_t i = 0; i < rx.size(); ++i) {
            Vec2 ui = unit_from(p, rx[i].pos);
            for (std::size_t j = i + 1; j < rx.size(); ++j) {
                Vec2 uj = unit_from(p, rx[j].pos);
                Vec2 jrow = ui - uj;
                double r = c * (rx[i].t - rx[j].t) - (distance(p, rx[i].pos) - distance(p, rx[j].pos));
                a += jrow.x * jrow.x;
                b += jrow.x * jrow.y;
                d += jrow.y * jrow.y;
                g = g + jrow * r;
            }
        }

        bool improved = false;
        Vec2 step{};
        while (lambda < 1e12) {
            if (!solve2(a * (1 + lambda), b, d * (1 + lambda), g, 1.0, step)) {
                lambda *= 10;
                continue;
            }
            double next = tdoa_cost(rx, p + step, c);
            if (next < cost) {
                p = p + step;
                cost = next;
                lambda = std::max(lambda / 10.0, 1e-12);
                improved = true;
                break;
            }
            lambda *= 10;
        }
        if (!improved || step.norm() <= 1e-12 * spread) {
            est.converged = true;
            ++it;
            break;
        }
    }

    est.position = p + centroid;
    est.residual = std::sqrt(cost);
    est.iterations = it;
    return est;
}

EmitterEstimate bearing_locate(std::span<const TriangObservation> observations) {
    std::vector<std::pair<Vec2, double>> lines;
    for (const auto& o : observations)
        if (o.bearing_deg) lines.emplace_back(o.receiver, *o.bearing_deg);
    if (lines.size() < 2)
        throw SwarmError(SwarmError::Kind::ParallelBearings, "bearing intersection needs at least two bearings");

    Vec2 centroid;
    for (const auto& l : lines) centroid = centroid + l.first;
    centroid = centroid * (1.0 / static_cast<double>(lines.size()));

    // Each line contributes n.(p - r) = 0 with n the normal to its direction.
    double a = 0, b = 0, d = 0;
    Vec2 rhs{};
    std::vector<std::pair<Vec2, double>> normals;
    for (const auto& [r, deg] : lines) {
        double th = deg * std::numbers::pi / 180.0;
        Vec2 n{std::cos(th), -std::sin(th)};
        double off = n.dot(r - centroid);
        a += n.x * n.x;
        b += n.x * n.y;
        d += n.y * n.y;
        rhs = rhs + n * off;
        normals.emplace_back(n, off);
    }
    Vec2 p{};
    if (!solve2(a, b, d, rhs, 1.0, p))
        throw SwarmError(SwarmError::Kind::ParallelBearings, "bearing lines are parallel");

    double s = 0.0;
    for (const auto& [n, off] : normals) {
        double r = n.dot(p) - off;
        s += r * r;
    }
    EmitterEstimate est;
    est.method = LocateMethod::Bearing;
    est.position = p + centroid;
    est.residual = std::sqrt(s);
    est.iterations = 1;
    return est;
}

}  // namespace dronesentry
