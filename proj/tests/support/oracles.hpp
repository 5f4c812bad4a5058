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

// Slow, obviously-correct reference implementations. These stay independent
// of the library's data structures: ordered maps and flood fills instead of
// hashing and union-find, per-window rescans instead of shared tallies.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "pxscatter/layout.hpp"
#include "pxscatter/types.hpp"

namespace testsupport {

// ---------------------------------------------------------------------------
// Iso-density partition, transcribed directly from the refinement loop:
// grid each pending region, flood-fill 3x3-connected cells, keep splitting
// peaked regions with a halved grid size until gentle or at the level cap.
// ---------------------------------------------------------------------------

inline std::vector<std::vector<std::uint32_t>> oracle_partition(const pxscatter::PointSet& ps,
                                                                double theta_k, int l_init,
                                                                int l_cap) {
    using Key = std::pair<long long, long long>;  // (iy, ix)
    std::vector<std::vector<std::uint32_t>> done;
    std::vector<std::vector<std::uint32_t>> todo(1);
    todo[0].resize(ps.points.size());
    for (std::uint32_t i = 0; i < ps.points.size(); ++i) todo[0][i] = i;

    for (int level = l_init; !todo.empty(); ++level) {
        const double gs = std::pow(2.0, static_cast<double>(-level));
        std::vector<std::vector<std::uint32_t>> next;
        for (const auto& ids : todo) {
            std::map<Key, std::vector<std::uint32_t>> cells;
            for (std::uint32_t id : ids) {
                const auto& p = ps.points[id];
                cells[{static_cast<long long>(std::floor(p.y / gs)),
                       static_cast<long long>(std::floor(p.x / gs))}]
                    .push_back(id);
            }
            std::set<Key> unvisited;
            for (const auto& [k, v] : cells) unvisited.insert(k);
            while (!unvisited.empty()) {
                std::vector<Key> frontier{*unvisited.begin()};
                unvisited.erase(unvisited.begin());
                std::vector<Key> component;
                while (!frontier.empty()) {
                    const Key k = frontier.back();
                    frontier.pop_back();
                    component.push_back(k);
                    for (long long dy = -1; dy <= 1; ++dy)
                        for (long long dx = -1; dx <= 1; ++dx) {
                            const Key nb{k.first + dy, k.second + dx};
                            auto it = unvisited.find(nb);
                            if (it != unvisited.end()) {
                                unvisited.erase(it);
                                frontier.push_back(nb);
                            }
                        }
                }
                std::sort(component.begin(), component.end());  // row-major, like the library
                double sum = 0.0;
                for (const Key& k : component) sum += static_cast<double>(cells[k].size());
                const double mean = sum / static_cast<double>(component.size());
                double m2 = 0.0, m4 = 0.0;
                for (const Key& k : component) {
                    const double d = static_cast<double>(cells[k].size()) - mean;
                    m2 += d * d;
                    m4 += d * d * d * d;
                }
                m2 /= static_cast<double>(component.size());
                m4 /= static_cast<double>(component.size());
                const double kurt =
                    component.size() < 4 || m2 <= 0.0 ? 0.0 : m4 / (m2 * m2);

                std::vector<std::uint32_t> member_ids;
                for (const Key& k : component)
                    member_ids.insert(member_ids.end(), cells[k].begin(), cells[k].end());
                if (level < l_cap && kurt > theta_k) next.push_back(std::move(member_ids));
                else done.push_back(std::move(member_ids));
            }
        }
        todo = std::move(next);
    }
    return done;
}

/// Canonical form for comparing partitions: sorted id lists, sorted.
inline std::vector<std::vector<std::uint32_t>> canonical_clusters(
    std::vector<std::vector<std::uint32_t>> clusters) {
    for (auto& c : clusters) std::sort(c.begin(), c.end());
    std::sort(clusters.begin(), clusters.end());
    return clusters;
}

// ---------------------------------------------------------------------------
// Sliding-window metrics, recounted from raw pixels and points per window.
// ---------------------------------------------------------------------------

struct WindowRect {
    std::int32_t x0, y0, x1, y1;  // half-open
};

inline std::vector<WindowRect> oracle_windows(std::int32_t w, std::int32_t h, std::int32_t ws,
                                              std::int32_t& nx, std::int32_t& ny) {
    nx = (w + ws - 1) / ws;
    ny = (h + ws - 1) / ws;
    std::vector<WindowRect> rects;
    for (std::int32_t wy = 0; wy < ny; ++wy)
        for (std::int32_t wx = 0; wx < nx; ++wx)
            rects.push_back(WindowRect{wx * ws, wy * ws, std::min((wx + 1) * ws, w),
                                       std::min((wy + 1) * ws, h)});
    return rects;
}

inline std::int64_t oracle_colored(const pxscatter::ClassMap& map, const WindowRect& r,
                                   std::int32_t cls /* -1 = any */) {
    std::int64_t n = 0;
    for (std::int32_t y = r.y0; y < r.y1; ++y)
        for (std::int32_t x = r.x0; x < r.x1; ++x) {
            const std::int32_t c = map.at(x, y);
            if (c >= 0 && (cls < 0 || c == cls)) ++n;
        }
    return n;
}

inline std::int64_t oracle_points_in(const pxscatter::PointSet& ps, const WindowRect& r,
                                     std::int32_t cls /* -1 = any */) {
    std::int64_t n = 0;
    for (const auto& p : ps.points) {
        const auto px = static_cast<std::int32_t>(p.x);
        const auto py = static_cast<std::int32_t>(p.y);
        if (px >= r.x0 && px < r.x1 && py >= r.y0 && py < r.y1 &&
            (cls < 0 || static_cast<std::int32_t>(p.cls) == cls))
            ++n;
    }
    return n;
}

inline double oracle_pddr(const pxscatter::ClassMap& map, const pxscatter::PointSet& ps,
                          std::int32_t ws) {
    std::int32_t nx, ny;
    const auto rects = oracle_windows(map.width, map.height, ws, nx, ny);
    double score = 0.0;
    std::int64_t pairs = 0;
    auto consider = [&](std::size_t a, std::size_t b) {
        const std::int64_t ga = oracle_points_in(ps, rects[a], -1);
        const std::int64_t gb = oracle_points_in(ps, rects[b], -1);
        if (ga == gb) return;
        ++pairs;
        const std::int64_t va = oracle_colored(map, rects[a], -1);
        const std::int64_t vb = oracle_colored(map, rects[b], -1);
        if (va == vb) score += 0.5;
        else if ((va < vb) == (ga < gb)) score += 1.0;
    };
    for (std::int32_t wy = 0; wy < ny; ++wy)
        for (std::int32_t wx = 0; wx < nx; ++wx) {
            const std::size_t i = static_cast<std::size_t>(wy) * nx + wx;
            if (wx + 1 < nx) consider(i, i + 1);
            if (wy + 1 < ny) consider(i, i + nx);
        }
    return pairs == 0 ? 1.0 : score / static_cast<double>(pairs);
}

inline double oracle_pcdr(const pxscatter::ClassMap& map, const pxscatter::PointSet& ps,
                          std::int32_t ws) {
    std::int32_t nx, ny;
    const auto rects = oracle_windows(map.width, map.height, ws, nx, ny);
    const auto n_classes = static_cast<std::int32_t>(ps.class_names.size());
    double window_sum = 0.0;
    std::int64_t windows = 0;
    for (const auto& r : rects) {
        double score = 0.0;
        std::int64_t pairs = 0;
        for (std::int32_t a = 0; a < n_classes; ++a) {
            const std::int64_t ga = oracle_points_in(ps, r, a);
            if (ga == 0) continue;
            for (std::int32_t b = a + 1; b < n_classes; ++b) {
                const std::int64_t gb = oracle_points_in(ps, r, b);
                if (gb == 0 || ga == gb) continue;
                ++pairs;
                const std::int64_t va = oracle_colored(map, r, a);
                const std::int64_t vb = oracle_colored(map, r, b);
                if (va == vb) score += 0.5;
                else if ((va < vb) == (ga < gb)) score += 1.0;
            }
        }
        if (pairs == 0) continue;
        ++windows;
        window_sum += score / static_cast<double>(pairs);
    }
    return windows == 0 ? 1.0 : window_sum / static_cast<double>(windows);
}

inline double oracle_ecsr(const pxscatter::ClassMap& map, const pxscatter::PointSet& ps,
                          std::int32_t ws) {
    std::int32_t nx, ny;
    const auto rects = oracle_windows(map.width, map.height, ws, nx, ny);
    const auto n_classes = static_cast<std::int32_t>(ps.class_names.size());
    std::int64_t present = 0, erased = 0;
    for (const auto& r : rects)
        for (std::int32_t c = 0; c < n_classes; ++c) {
            if (oracle_points_in(ps, r, c) == 0) continue;
            ++present;
            if (oracle_colored(map, r, c) == 0) ++erased;
        }
    return present == 0 ? 0.0 : static_cast<double>(erased) / static_cast<double>(present);
}

// ---------------------------------------------------------------------------
// Order-preserving minimum-displacement matching by exhaustive enumeration,
// for leaf-sized dispersion instances.
// ---------------------------------------------------------------------------

inline double oracle_min_displacement(const std::vector<std::pair<double, double>>& sources,
                                      const std::vector<std::pair<double, double>>& cells) {
    const std::size_t p = sources.size(), c = cells.size();
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(p);
    auto rec = [&](auto&& self, std::size_t i, std::size_t from, double cost) -> void {
        if (i == p) {
            best = std::min(best, cost);
            return;
        }
        for (std::size_t j = from; j + (p - i - 1) < c; ++j) {
            const double dx = sources[i].first - cells[j].first;
            const double dy = sources[i].second - cells[j].second;
            self(self, i + 1, j + 1, cost + std::sqrt(dx * dx + dy * dy));
        }
    };
    rec(rec, 0, 0, 0.0);
    return best;
}

}  // namespace testsupport
