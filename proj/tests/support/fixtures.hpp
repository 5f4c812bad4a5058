/*
 * Copyright (c) 2026 the pxscatter authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Deterministic synthetic datasets shared by the unit and acceptance suites.

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pxscatter/types.hpp"

namespace testsupport {

/// splitmix64; fully deterministic across platforms, unlike <random> engines.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() {  // [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t below(std::uint64_t n) { return next() % n; }

    double gaussian() {  // Box-Muller, one draw per call
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * 3.141592653589793 * u2);
        have_spare_ = true;
        return mag * std::cos(2.0 * 3.141592653589793 * u2);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline void finish(pxscatter::PointSet& ps, std::size_t n_classes) {
    ps.class_names.resize(n_classes);
    for (std::size_t c = 0; c < n_classes; ++c) ps.class_names[c] = "c" + std::to_string(c);
    ps.class_counts.assign(n_classes, 0);
    for (const auto& p : ps.points) ++ps.class_counts[p.cls];
}

/// Gaussian mixture in abstract [0,1]^2 units: `blobs` clusters, each with a
/// dominant class plus a sprinkle of others (the semantic outliers).
inline pxscatter::PointSet gaussian_mixture(std::uint64_t seed, std::size_t n_points,
                                            std::size_t n_classes, std::size_t blobs) {
    Rng rng(seed);
    pxscatter::PointSet ps;
    ps.points.reserve(n_points);
    struct Blob {
        double cx, cy, sigma;
        pxscatter::ClassId dominant;
    };
    std::vector<Blob> spec(blobs);
    for (std::size_t b = 0; b < blobs; ++b)
        spec[b] = Blob{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.015, 0.07),
                       static_cast<pxscatter::ClassId>(b % n_classes)};
    for (std::size_t i = 0; i < n_points; ++i) {
        const Blob& b = spec[rng.below(blobs)];
        pxscatter::Point p;
        p.x = b.cx + b.sigma * rng.gaussian();
        p.y = b.cy + b.sigma * rng.gaussian();
        p.cls = rng.uniform() < 0.92
                    ? b.dominant
                    : static_cast<pxscatter::ClassId>(rng.below(n_classes));
        ps.points.push_back(p);
    }
    finish(ps, n_classes);
    return ps;
}

/// The 10k-point demo fixture used by the determinism and ST1/ST2 checks.
inline pxscatter::PointSet demo_mixture() { return gaussian_mixture(20260810, 10000, 5, 8); }

/// High-dynamic-range fixture: a dense blob, a much sparser blob of a second
/// class, and 20 isolated points of a third class.
inline pxscatter::PointSet hdr_fixture(std::uint64_t seed = 7) {
    Rng rng(seed);
    pxscatter::PointSet ps;
    ps.points.reserve(100000 + 1000 + 20);
    for (std::size_t i = 0; i < 100000; ++i)
        ps.points.push_back({0.28 + 0.035 * rng.gaussian(), 0.30 + 0.035 * rng.gaussian(), 0});
    for (std::size_t i = 0; i < 1000; ++i)
        ps.points.push_back({0.68 + 0.16 * rng.gaussian(), 0.62 + 0.16 * rng.gaussian(), 1});
    for (std::size_t i = 0; i < 20; ++i)
        ps.points.push_back({rng.uniform(0.02, 0.98), rng.uniform(0.02, 0.98), 2});
    finish(ps, 3);
    return ps;
}

/// Uniform noise plus a few tight spikes; exercises refinement in fuzz runs.
inline pxscatter::PointSet random_pointset(std::uint64_t seed, std::size_t max_points,
                                           std::size_t max_classes) {
    Rng rng(seed);
    const std::size_t n = 1 + rng.below(max_points);
    const std::size_t k = 1 + rng.below(max_classes);
    const std::size_t spikes = rng.below(4);
    pxscatter::PointSet ps;
    ps.points.reserve(n);
    std::vector<std::pair<double, double>> spike_at(spikes);
    for (auto& s : spike_at) s = {rng.uniform(), rng.uniform()};
    for (std::size_t i = 0; i < n; ++i) {
        pxscatter::Point p;
        if (spikes > 0 && rng.uniform() < 0.5) {
            const auto& s = spike_at[rng.below(spikes)];
            p.x = s.first + 0.02 * rng.gaussian();
            p.y = s.second + 0.02 * rng.gaussian();
        } else {
            p.x = rng.uniform();
            p.y = rng.uniform();
        }
        p.cls = static_cast<pxscatter::ClassId>(rng.below(k));
        ps.points.push_back(p);
    }
    finish(ps, k);
    return ps;
}

}  // namespace testsupport
