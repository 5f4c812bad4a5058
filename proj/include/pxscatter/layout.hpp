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
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pxscatter/allocate.hpp"
#include "pxscatter/equalize.hpp"
#include "pxscatter/partition.hpp"
#include "pxscatter/types.hpp"

namespace pxscatter {

/// One class pixel waiting for a canvas cell. px/py is the footprint pixel
/// it is stacked on in the initial layout.
struct Placement {
    std::int32_t px = 0;
    std::int32_t py = 0;
    ClassId cls = 0;
};

/// Initial, possibly overlapping layout of a cluster's class pixels.
struct InitialLayout {
    std::vector<Placement> placements;
};

/// One colored canvas cell. pixel is packed row-major (py * W + px).
struct PixelAssignment {
    std::uint32_t pixel = 0;
    ClassId cls = 0;
};

/// Injective global assignment of class pixels to canvas cells.
struct PixelLayout {
    std::vector<PixelAssignment> assignments;  // sorted by pixel
};

namespace detail {

struct CellPos {
    std::int32_t px = 0;
    std::int32_t py = 0;
};

inline double cell_distance(const Placement& p, const CellPos& c) {
    const double dx = static_cast<double>(p.px) - c.px;
    const double dy = static_cast<double>(p.py) - c.py;
    return std::sqrt(dx * dx + dy * dy);
}

/// Order-preserving minimum-displacement matching for small leaves. Both
/// spans must already be sorted along the leaf's split order.
inline void match_sorted(std::span<const Placement> pl, std::span<const CellPos> cells,
                         std::uint32_t width, std::vector<PixelAssignment>& out) {
    const std::size_t p = pl.size(), c = cells.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // f[i][j]: min cost of matching pl[i..p) into cells[j..c).
    std::array<std::array<double, 10>, 10> f{};
    for (std::size_t j = 0; j <= c; ++j) f[p][j] = 0.0;
    for (std::size_t i = p; i-- > 0;) {
        f[i][c] = kInf;
        for (std::size_t j = c; j-- > 0;) {
            const double skip = f[i][j + 1];
            const double take = p - i > c - j - 1
                                    ? cell_distance(pl[i], cells[j]) + f[i + 1][j + 1]
                                    : std::min(skip, cell_distance(pl[i], cells[j]) + f[i + 1][j + 1]);
            f[i][j] = p - i > c - j ? kInf : std::min(skip, take);
        }
    }
    std::size_t i = 0, j = 0;
    while (i < p) {
        const double take = cell_distance(pl[i], cells[j]) + f[i + 1][j + 1];
        if (take <= f[i][j + 1]) {  // prefer the earlier cell on ties
            out.push_back(PixelAssignment{
                static_cast<std::uint32_t>(cells[j].py) * width + static_cast<std::uint32_t>(cells[j].px),
                pl[i].cls});
            ++i;
        }
        ++j;
    }
}

inline void sort_leaf(std::span<Placement> pl, std::span<CellPos> cells) {
    std::int32_t min_x = std::numeric_limits<std::int32_t>::max(), max_x = -1;
    std::int32_t min_y = min_x, max_y = -1;
    for (const CellPos& c : cells) {
        min_x = std::min(min_x, c.px);
        max_x = std::max(max_x, c.px);
        min_y = std::min(min_y, c.py);
        max_y = std::max(max_y, c.py);
    }
    const bool split_x = max_x - min_x >= max_y - min_y;
    auto cell_lt = [split_x](const CellPos& a, const CellPos& b) {
        const auto ka = split_x ? std::pair(a.px, a.py) : std::pair(a.py, a.px);
        const auto kb = split_x ? std::pair(b.px, b.py) : std::pair(b.py, b.px);
        return ka < kb;
    };
    auto pl_lt = [split_x](const Placement& a, const Placement& b) {
        const auto ka = split_x ? std::tuple(a.px, a.py, a.cls) : std::tuple(a.py, a.px, a.cls);
        const auto kb = split_x ? std::tuple(b.px, b.py, b.cls) : std::tuple(b.py, b.px, b.cls);
        return ka < kb;
    };
    std::sort(cells.begin(), cells.end(), cell_lt);
    std::sort(pl.begin(), pl.end(), pl_lt);
}

inline void disperse_rec(std::span<Placement> pl, std::span<CellPos> cells, std::uint32_t width,
                         std::vector<PixelAssignment>& out) {
    if (pl.empty()) return;
    if (pl.size() > cells.size())
        throw InternalError("kd_disperse: placements exceed available cells");
    const std::size_t c = cells.size();
    if (c <= 8) {
        sort_leaf(pl, cells);
        match_sorted(pl, cells, width, out);
        return;
    }

    std::int32_t min_x = std::numeric_limits<std::int32_t>::max(), max_x = -1;
    std::int32_t min_y = min_x, max_y = -1;
    for (const CellPos& cc : cells) {
        min_x = std::min(min_x, cc.px);
        max_x = std::max(max_x, cc.px);
        min_y = std::min(min_y, cc.py);
        max_y = std::max(max_y, cc.py);
    }
    const bool split_x = max_x - min_x >= max_y - min_y;  // ties split along x
    auto pl_axis = [split_x](const Placement& a) { return split_x ? a.px : a.py; };
    auto pl_lt = [split_x](const Placement& a, const Placement& b) {
        const auto ka = split_x ? std::tuple(a.px, a.py, a.cls) : std::tuple(a.py, a.px, a.cls);
        const auto kb = split_x ? std::tuple(b.px, b.py, b.cls) : std::tuple(b.py, b.px, b.cls);
        return ka < kb;
    };
    auto cell_lt = [split_x](const CellPos& a, const CellPos& b) {
        const auto ka = split_x ? std::pair(a.px, a.py) : std::pair(a.py, a.px);
        const auto kb = split_x ? std::pair(b.px, b.py) : std::pair(b.py, b.px);
        return ka < kb;
    };

    const std::size_t p = pl.size();
    // Split the placements at their median coordinate, ties going low.
    std::nth_element(pl.begin(), pl.begin() + (p - 1) / 2, pl.end(), pl_lt);
    const std::int32_t median = pl_axis(pl[(p - 1) / 2]);
    auto mid = std::partition(pl.begin(), pl.end(),
                              [&](const Placement& a) { return pl_axis(a) <= median; });
    std::size_t n_lo = static_cast<std::size_t>(mid - pl.begin());
    if (n_lo == c) {  // only possible when p == c; push the largest one up
        std::nth_element(pl.begin(), pl.end() - 1, pl.end(), pl_lt);
        n_lo = p - 1;
    }
    // Cells split near their median, nudged just enough to fit both halves.
    const std::size_t lo_b = std::max<std::size_t>(n_lo, 1);
    const std::size_t hi_b = std::min(c - 1, c - (p - n_lo));
    const std::size_t c_lo = std::clamp(c / 2, lo_b, hi_b);
    std::nth_element(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(c_lo), cells.end(),
                     cell_lt);

    disperse_rec(pl.subspan(0, n_lo), cells.subspan(0, c_lo), width, out);
    disperse_rec(pl.subspan(n_lo), cells.subspan(c_lo), width, out);
}

}  // namespace detail

/// Builds the initial overlapping layout for one cluster: classes are placed
/// in ascending urgent-index order (placeable pixels / pixels to place) onto
/// the footprint pixels holding their own points, densest first, stacking
/// leftovers cyclically. Classes with no placeable pixel stack onto the
/// footprint pixel nearest their centroid.
inline InitialLayout initial_layout(const ClusterFootprint& fp, const ClassSplit& split,
                                    const Cluster& cluster, const PointSet& ps,
                                    const CanvasSpec& canvas) {
    const auto width = static_cast<std::uint32_t>(canvas.width);
    const std::size_t n_classes = split.classes.size();
    std::uint64_t total_budget = split.total();
    if (total_budget > fp.pixels.size())
        throw InternalError("initial_layout: budget exceeds footprint area");

    InitialLayout out;
    out.placements.reserve(total_budget);

    auto class_slot = [&](ClassId c) -> std::size_t {
        auto it = std::lower_bound(split.classes.begin(), split.classes.end(), c);
        return it != split.classes.end() && *it == c
                   ? static_cast<std::size_t>(it - split.classes.begin())
                   : n_classes;
    };

    // (class slot, footprint pixel) -> point count, plus per-class centroids.
    struct Entry {
        std::uint32_t slot;
        std::uint32_t pixel_idx;
        std::uint32_t count;
    };
    std::vector<Entry> entries;
    std::vector<double> sum_x(n_classes, 0.0), sum_y(n_classes, 0.0);
    std::vector<std::uint32_t> pts_of_class(n_classes, 0);
    {
        std::vector<std::pair<std::uint32_t, std::uint32_t>> hits;  // (slot, pixel_idx)
        hits.reserve(cluster.point_ids.size());
        for (std::uint32_t pid : cluster.point_ids) {
            const Point& pt = ps.points[pid];
            const std::size_t slot = class_slot(pt.cls);
            if (slot == n_classes) continue;  // class present but got no budget
            sum_x[slot] += pt.x;
            sum_y[slot] += pt.y;
            ++pts_of_class[slot];
            const auto px = static_cast<std::uint32_t>(pt.x);
            const auto py = static_cast<std::uint32_t>(pt.y);
            const std::uint32_t key = py * width + px;
            auto it = std::lower_bound(fp.pixels.begin(), fp.pixels.end(), key);
            if (it != fp.pixels.end() && *it == key)
                hits.emplace_back(static_cast<std::uint32_t>(slot),
                                  static_cast<std::uint32_t>(it - fp.pixels.begin()));
        }
        std::sort(hits.begin(), hits.end());
        for (std::size_t i = 0; i < hits.size();) {
            std::size_t j = i;
            while (j < hits.size() && hits[j] == hits[i]) ++j;
            entries.push_back(Entry{hits[i].first, hits[i].second, static_cast<std::uint32_t>(j - i)});
            i = j;
        }
    }
    std::vector<std::uint32_t> entry_begin(n_classes + 1, 0);
    for (const Entry& e : entries) ++entry_begin[e.slot + 1];
    for (std::size_t s = 0; s < n_classes; ++s) entry_begin[s + 1] += entry_begin[s];

    // Pixel-major view of the entries, so claiming a pixel can decrement the
    // placeable counters of every class with points there.
    std::vector<std::uint32_t> by_pixel(entries.size());
    std::iota(by_pixel.begin(), by_pixel.end(), 0u);
    std::sort(by_pixel.begin(), by_pixel.end(), [&](std::uint32_t a, std::uint32_t b) {
        return entries[a].pixel_idx < entries[b].pixel_idx;
    });

    std::vector<bool> claimed(fp.pixels.size(), false);
    std::vector<bool> placed(n_classes, false);
    std::vector<std::uint32_t> placeable(n_classes, 0);
    for (std::size_t s = 0; s < n_classes; ++s) placeable[s] = entry_begin[s + 1] - entry_begin[s];

    auto claim = [&](std::uint32_t pixel_idx) {
        if (claimed[pixel_idx]) return;
        claimed[pixel_idx] = true;
        auto lo = std::lower_bound(by_pixel.begin(), by_pixel.end(), pixel_idx,
                                   [&](std::uint32_t e, std::uint32_t v) {
                                       return entries[e].pixel_idx < v;
                                   });
        for (; lo != by_pixel.end() && entries[*lo].pixel_idx == pixel_idx; ++lo)
            if (!placed[entries[*lo].slot]) --placeable[entries[*lo].slot];
    };

    auto pixel_pos = [&](std::uint32_t pixel_idx) {
        const std::uint32_t packed = fp.pixels[pixel_idx];
        return detail::CellPos{static_cast<std::int32_t>(packed % width),
                               static_cast<std::int32_t>(packed / width)};
    };

    std::size_t remaining = 0;
    for (std::size_t s = 0; s < n_classes; ++s)
        if (split.per_class[s] > 0) ++remaining;
        else placed[s] = true;

    while (remaining > 0) {
        // Most urgent class: minimum placeable-to-budget ratio, lowest id first.
        std::size_t pick = n_classes;
        double best_ui = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < n_classes; ++s) {
            if (placed[s]) continue;
            const double ui = static_cast<double>(placeable[s]) / split.per_class[s];
            if (ui < best_ui) {
                best_ui = ui;
                pick = s;
            }
        }
        const std::uint32_t budget = split.per_class[pick];
        std::vector<std::uint32_t> avail;  // entry indices with unclaimed pixels
        for (std::uint32_t e = entry_begin[pick]; e < entry_begin[pick + 1]; ++e)
            if (!claimed[entries[e].pixel_idx]) avail.push_back(e);

        placed[pick] = true;
        --remaining;

        if (avail.empty()) {
            // All of this class's pixels were lost; anchor at the footprint
            // pixel nearest the class centroid.
            double cx = 0.0, cy = 0.0;
            if (pts_of_class[pick] > 0) {
                cx = sum_x[pick] / pts_of_class[pick];
                cy = sum_y[pick] / pts_of_class[pick];
            }
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < fp.pixels.size(); ++i) {
                const detail::CellPos pos = pixel_pos(static_cast<std::uint32_t>(i));
                const double dx = pos.px + 0.5 - cx, dy = pos.py + 0.5 - cy;
                const double d = dx * dx + dy * dy;
                if (d < best_d) {
                    best_d = d;
                    best = i;
                }
            }
            const detail::CellPos pos = pixel_pos(static_cast<std::uint32_t>(best));
            for (std::uint32_t k = 0; k < budget; ++k)
                out.placements.push_back(Placement{pos.px, pos.py, split.classes[pick]});
            claim(static_cast<std::uint32_t>(best));
            continue;
        }

        std::sort(avail.begin(), avail.end(), [&](std::uint32_t a, std::uint32_t b) {
            if (entries[a].count != entries[b].count) return entries[a].count > entries[b].count;
            return entries[a].pixel_idx < entries[b].pixel_idx;
        });
        const std::uint32_t filled = std::min<std::uint32_t>(budget, static_cast<std::uint32_t>(avail.size()));
        for (std::uint32_t k = 0; k < filled; ++k) {
            const detail::CellPos pos = pixel_pos(entries[avail[k]].pixel_idx);
            out.placements.push_back(Placement{pos.px, pos.py, split.classes[pick]});
            claim(entries[avail[k]].pixel_idx);
        }
        // Stack leftovers cyclically, densest pixels first.
        for (std::uint32_t k = 0; k < budget - filled; ++k) {
            const detail::CellPos pos = pixel_pos(entries[avail[k % filled]].pixel_idx);
            out.placements.push_back(Placement{pos.px, pos.py, split.classes[pick]});
        }
    }
    return out;
}

/// Disperses an initial layout to an injective assignment with a median-split
/// kd-tree over the footprint's cells. Splits follow the longer side of the
/// cell bounding rectangle; leaves of at most 8 cells are matched directly
/// with an order-preserving minimum-displacement pass.
inline std::vector<PixelAssignment> kd_disperse(const InitialLayout& init,
                                                const ClusterFootprint& fp,
                                                const CanvasSpec& canvas) {
    const auto width = static_cast<std::uint32_t>(canvas.width);
    if (init.placements.size() > fp.pixels.size())
        throw InternalError("kd_disperse: more placements than footprint cells");
    std::vector<Placement> pl = init.placements;
    std::vector<detail::CellPos> cells;
    cells.reserve(fp.pixels.size());
    for (std::uint32_t packed : fp.pixels)
        cells.push_back(detail::CellPos{static_cast<std::int32_t>(packed % width),
                                        static_cast<std::int32_t>(packed / width)});
    std::vector<PixelAssignment> out;
    out.reserve(pl.size());
    detail::disperse_rec(pl, cells, width, out);
    return out;
}

/// Disjoint union of per-cluster assignments into the global layout.
/// Footprint disjointness makes the union injective; a duplicate pixel is an
/// internal invariant violation.
inline PixelLayout assemble(std::vector<std::vector<PixelAssignment>> per_cluster) {
    PixelLayout layout;
    std::size_t total = 0;
    for (const auto& v : per_cluster) total += v.size();
    layout.assignments.reserve(total);
    for (auto& v : per_cluster)
        layout.assignments.insert(layout.assignments.end(), v.begin(), v.end());
    std::sort(layout.assignments.begin(), layout.assignments.end(),
              [](const PixelAssignment& a, const PixelAssignment& b) { return a.pixel < b.pixel; });
    for (std::size_t i = 1; i < layout.assignments.size(); ++i)
        if (layout.assignments[i].pixel == layout.assignments[i - 1].pixel)
            throw InternalError("assemble: pixel assigned twice");
    return layout;
}

/// Dense canvas view of a layout: class id per pixel, -1 for background.
struct ClassMap {
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::vector<std::int32_t> cells;  // row-major, -1 = empty

    std::int32_t at(std::int32_t px, std::int32_t py) const {
        return cells[static_cast<std::size_t>(py) * width + px];
    }
};

inline ClassMap class_map_from_layout(const PixelLayout& layout, const CanvasSpec& canvas) {
    ClassMap map;
    map.width = canvas.width;
    map.height = canvas.height;
    map.cells.assign(static_cast<std::size_t>(canvas.pixel_count()), -1);
    for (const PixelAssignment& a : layout.assignments) map.cells[a.pixel] = a.cls;
    return map;
}

}  // namespace pxscatter
