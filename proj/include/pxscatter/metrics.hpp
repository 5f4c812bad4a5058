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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pxscatter/layout.hpp"
#include "pxscatter/types.hpp"

namespace pxscatter {

struct LvcParams {
    std::int32_t window_size = 10;
    double theta_grey = 0.3;
};

/// Canvas tiled into window_size squares (edge windows may be smaller), with
/// per-window coverage, per-class colored-pixel counts and per-class
/// ground-truth point counts. Per-class lists are sorted by class id.
struct WindowGrid {
    std::int32_t window_size = 0;
    std::int32_t nx = 0;
    std::int32_t ny = 0;
    std::vector<std::uint32_t> total;     // pixels per window
    std::vector<std::uint32_t> covered;   // colored pixels per window
    std::vector<std::uint32_t> gt_total;  // ground-truth points per window
    std::vector<std::vector<std::pair<ClassId, std::uint32_t>>> colored_by_class;
    std::vector<std::vector<std::pair<ClassId, std::uint32_t>>> gt_by_class;

    std::size_t window_count() const { return static_cast<std::size_t>(nx) * ny; }
};

namespace detail {

inline void group_counts(std::vector<std::uint64_t>& enc,
                         std::vector<std::vector<std::pair<ClassId, std::uint32_t>>>& out) {
    std::sort(enc.begin(), enc.end());
    for (std::size_t i = 0; i < enc.size();) {
        std::size_t j = i;
        while (j < enc.size() && enc[j] == enc[i]) ++j;
        const auto win = static_cast<std::size_t>(enc[i] >> 16);
        const auto cls = static_cast<ClassId>(enc[i] & 0xffff);
        out[win].emplace_back(cls, static_cast<std::uint32_t>(j - i));
        i = j;
    }
}

}  // namespace detail

/// Tiles the canvas and tallies coverage per window. Pass an empty point set
/// when only visual statistics are needed.
inline WindowGrid build_window_grid(const ClassMap& map, const PointSet& points,
                                    std::int32_t window_size) {
    if (window_size < 1) throw ConfigError("window size must be at least 1");
    WindowGrid grid;
    grid.window_size = window_size;
    grid.nx = (map.width + window_size - 1) / window_size;
    grid.ny = (map.height + window_size - 1) / window_size;
    const std::size_t n = grid.window_count();
    grid.total.assign(n, 0);
    grid.covered.assign(n, 0);
    grid.gt_total.assign(n, 0);
    grid.colored_by_class.assign(n, {});
    grid.gt_by_class.assign(n, {});

    for (std::int32_t wy = 0; wy < grid.ny; ++wy)
        for (std::int32_t wx = 0; wx < grid.nx; ++wx) {
            const std::int32_t w = std::min(window_size, map.width - wx * window_size);
            const std::int32_t h = std::min(window_size, map.height - wy * window_size);
            grid.total[static_cast<std::size_t>(wy) * grid.nx + wx] =
                static_cast<std::uint32_t>(w * h);
        }

    std::vector<std::uint64_t> enc;
    for (std::int32_t py = 0; py < map.height; ++py) {
        const std::size_t row = static_cast<std::size_t>(py / window_size) * grid.nx;
        for (std::int32_t px = 0; px < map.width; ++px) {
            const std::int32_t cls = map.cells[static_cast<std::size_t>(py) * map.width + px];
            if (cls < 0) continue;
            const std::size_t win = row + static_cast<std::size_t>(px / window_size);
            ++grid.covered[win];
            enc.push_back((static_cast<std::uint64_t>(win) << 16) | static_cast<std::uint16_t>(cls));
        }
    }
    detail::group_counts(enc, grid.colored_by_class);

    enc.clear();
    for (const Point& p : points.points) {
        const auto px = static_cast<std::int32_t>(p.x);
        const auto py = static_cast<std::int32_t>(p.y);
        if (px < 0 || py < 0 || px >= map.width || py >= map.height)
            throw ConfigError("point outside the metric canvas");
        const std::size_t win = static_cast<std::size_t>(py / window_size) * grid.nx +
                                static_cast<std::size_t>(px / window_size);
        ++grid.gt_total[win];
        enc.push_back((static_cast<std::uint64_t>(win) << 16) | p.cls);
    }
    detail::group_counts(enc, grid.gt_by_class);
    return grid;
}

/// Fraction of a window's pixels that are colored, in [0, 1].
inline double visual_density(const WindowGrid& grid, std::size_t window) {
    return grid.total[window] == 0
               ? 0.0
               : static_cast<double>(grid.covered[window]) / grid.total[window];
}

namespace detail {

template <typename PairFn>
void for_each_window_pair(const WindowGrid& grid, PairFn&& fn) {
    for (std::int32_t wy = 0; wy < grid.ny; ++wy)
        for (std::int32_t wx = 0; wx < grid.nx; ++wx) {
            const std::size_t i = static_cast<std::size_t>(wy) * grid.nx + wx;
            if (wx + 1 < grid.nx) fn(i, i + 1);
            if (wy + 1 < grid.ny) fn(i, i + static_cast<std::size_t>(grid.nx));
        }
}

inline std::uint32_t count_of(const std::vector<std::pair<ClassId, std::uint32_t>>& list,
                              ClassId cls) {
    auto it = std::lower_bound(list.begin(), list.end(), cls,
                               [](const auto& a, ClassId c) { return a.first < c; });
    return it != list.end() && it->first == cls ? it->second : 0;
}

}  // namespace detail

/// Legible Visual Contrast: the mean normalized visual-density difference
/// over 4-neighbor window pairs, ignoring pairs whose densities both fall at
/// or below theta_grey. Returns 0 when no pair is perceivable.
inline double lvc(const WindowGrid& grid, double theta_grey) {
    double sum = 0.0;
    std::uint64_t perceivable = 0;
    detail::for_each_window_pair(grid, [&](std::size_t i, std::size_t j) {
        const double di = visual_density(grid, i), dj = visual_density(grid, j);
        if (std::max(di, dj) <= theta_grey) return;
        ++perceivable;
        const double mean = (di + dj) * 0.5;
        if (mean > 0.0) sum += std::abs(di - mean) / mean;
    });
    return perceivable == 0 ? 0.0 : sum / static_cast<double>(perceivable);
}

inline double lvc(const ClassMap& map, const LvcParams& params = {}) {
    PointSet empty;
    return lvc(build_window_grid(map, empty, params.window_size), params.theta_grey);
}

/// Perceived Data Densities Ratio: over 4-neighbor window pairs whose
/// ground-truth point counts differ, the fraction whose ordering the colored
/// pixel counts preserve (visual ties score one half). 1 when no pair
/// qualifies.
inline double pddr(const WindowGrid& grid) {
    double score = 0.0;
    std::uint64_t pairs = 0;
    detail::for_each_window_pair(grid, [&](std::size_t i, std::size_t j) {
        const std::uint32_t gi = grid.gt_total[i], gj = grid.gt_total[j];
        if (gi == gj) return;
        ++pairs;
        const std::uint32_t vi = grid.covered[i], vj = grid.covered[j];
        if (vi == vj) score += 0.5;
        else if ((vi < vj) == (gi < gj)) score += 1.0;
    });
    return pairs == 0 ? 1.0 : score / static_cast<double>(pairs);
}

/// Perceived Class Densities Ratio: per window, the fraction of
/// present-class pairs with differing ground-truth counts whose order the
/// per-class colored pixels preserve (ties one half), averaged over windows
/// with at least one such pair. 1 when no window qualifies.
inline double pcdr(const WindowGrid& grid) {
    double window_sum = 0.0;
    std::uint64_t windows = 0;
    for (std::size_t w = 0; w < grid.window_count(); ++w) {
        const auto& gt = grid.gt_by_class[w];
        if (gt.size() < 2) continue;
        double score = 0.0;
        std::uint64_t pairs = 0;
        for (std::size_t a = 0; a < gt.size(); ++a)
            for (std::size_t b = a + 1; b < gt.size(); ++b) {
                if (gt[a].second == gt[b].second) continue;
                ++pairs;
                const std::uint32_t va = detail::count_of(grid.colored_by_class[w], gt[a].first);
                const std::uint32_t vb = detail::count_of(grid.colored_by_class[w], gt[b].first);
                if (va == vb) score += 0.5;
                else if ((va < vb) == (gt[a].second < gt[b].second)) score += 1.0;
            }
        if (pairs == 0) continue;
        ++windows;
        window_sum += score / static_cast<double>(pairs);
    }
    return windows == 0 ? 1.0 : window_sum / static_cast<double>(windows);
}

/// Erased Class Sample ratio: over all (window, class) pairs with at least
/// one ground-truth point, the fraction left with zero colored pixels.
/// Lower is better.
inline double ecsr(const WindowGrid& grid) {
    std::uint64_t present = 0, erased = 0;
    for (std::size_t w = 0; w < grid.window_count(); ++w)
        for (const auto& [cls, count] : grid.gt_by_class[w]) {
            ++present;
            if (detail::count_of(grid.colored_by_class[w], cls) == 0) ++erased;
        }
    return present == 0 ? 0.0 : static_cast<double>(erased) / static_cast<double>(present);
}

/// Convenience wrappers taking the raster-side class map and ground truth.
inline double pddr(const ClassMap& map, const PointSet& points, std::int32_t window_size) {
    return pddr(build_window_grid(map, points, window_size));
}
inline double pcdr(const ClassMap& map, const PointSet& points, std::int32_t window_size) {
    return pcdr(build_window_grid(map, points, window_size));
}
inline double ecsr(const ClassMap& map, const PointSet& points, std::int32_t window_size) {
    return ecsr(build_window_grid(map, points, window_size));
}

}  // namespace pxscatter
