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
#include <ostream>
#include <span>
#include <vector>

#include "pxscatter/parallel.hpp"
#include "pxscatter/partition.hpp"
#include "pxscatter/types.hpp"

namespace pxscatter {

/// A cluster's disjoint pixel footprint on the canvas. Pixels are packed
/// row-major (py * W + px) and sorted ascending.
struct ClusterFootprint {
    std::uint32_t cluster_id = 0;
    std::vector<std::uint32_t> pixels;
    std::uint32_t point_count = 0;
    std::uint16_t class_count = 1;
    double data_density = 0.0;

    std::uint32_t area_px() const { return static_cast<std::uint32_t>(pixels.size()); }
};

struct FootprintSet {
    std::vector<ClusterFootprint> footprints;
    std::size_t dropped_clusters = 0;
    std::size_t dropped_points = 0;
};

/// Area-weighted empirical CDF over footprint data densities. cdf(d) is the
/// fraction of total footprint area whose density is <= d.
struct DensityMapping {
    std::vector<double> densities;  // distinct, ascending
    std::vector<double> cdf;        // cumulative normalized area, same length
    double total_weight = 0.0;

    double operator()(double density) const {
        auto it = std::upper_bound(densities.begin(), densities.end(), density);
        if (it == densities.begin()) return 0.0;
        return cdf[static_cast<std::size_t>(it - densities.begin()) - 1];
    }
};

/// The number of canvas pixels a cluster may color after equalization.
struct PixelBudget {
    std::uint32_t cluster_id = 0;
    double visual_density = 0.0;
    std::uint32_t budget = 0;
};

namespace detail {

// Pixels covered by a cluster's cells, clipped to the canvas: sub-pixel
// cells collapse onto their covering pixel, super-pixel cells expand.
inline std::vector<std::uint32_t> cluster_pixel_cover(const Cluster& cluster,
                                                      const CanvasSpec& canvas) {
    const auto w = static_cast<std::uint32_t>(canvas.width);
    const auto h = static_cast<std::uint32_t>(canvas.height);
    std::vector<std::uint32_t> cover;
    if (cluster.level >= 0) {
        cover.reserve(cluster.cells.size());
        for (const GridCell& cell : cluster.cells) {
            const auto px = static_cast<std::uint32_t>(cell.ix >> cluster.level);
            const auto py = static_cast<std::uint32_t>(cell.iy >> cluster.level);
            if (px < w && py < h) cover.push_back(py * w + px);
        }
    } else {
        const std::uint32_t s = 1u << (-cluster.level);
        cover.reserve(cluster.cells.size() * s * s);
        for (const GridCell& cell : cluster.cells) {
            const std::uint64_t x0 = static_cast<std::uint64_t>(cell.ix) * s;
            const std::uint64_t y0 = static_cast<std::uint64_t>(cell.iy) * s;
            for (std::uint64_t py = y0; py < y0 + s && py < h; ++py)
                for (std::uint64_t px = x0; px < x0 + s && px < w; ++px)
                    cover.push_back(static_cast<std::uint32_t>(py * w + px));
        }
    }
    std::sort(cover.begin(), cover.end());
    cover.erase(std::unique(cover.begin(), cover.end()), cover.end());
    return cover;
}

inline std::uint16_t distinct_classes(const Cluster& cluster, const PointSet& ps,
                                      std::vector<std::uint32_t>& stamp, std::uint32_t epoch) {
    std::uint16_t distinct = 0;
    for (std::uint32_t pid : cluster.point_ids) {
        const ClassId c = ps.points[pid].cls;
        if (stamp[c] != epoch) {
            stamp[c] = epoch;
            ++distinct;
        }
    }
    return distinct;
}

}  // namespace detail

/// Maps every cluster onto the canvas pixels it covers and resolves pixel
/// conflicts: a contested pixel goes to the cluster with the smallest
/// area-to-class-number ratio (ties to the smaller cluster id). Clusters
/// left with no pixels are dropped and their points counted as lost.
inline FootprintSet rasterize_footprints(std::span<const Cluster> clusters, const PointSet& ps,
                                         const CanvasSpec& canvas, int threads = 1) {
    validate(canvas);
    const std::size_t n = clusters.size();
    std::vector<std::vector<std::uint32_t>> covers(n);
    std::vector<std::uint16_t> n_classes(n, 1);
    std::vector<double> ratio(n, 0.0);

    parallel_for(n, threads, [&](std::size_t i) {
        covers[i] = detail::cluster_pixel_cover(clusters[i], canvas);
    });
    {
        std::vector<std::uint32_t> stamp(ps.class_names.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            n_classes[i] = std::max<std::uint16_t>(
                1, detail::distinct_classes(clusters[i], ps, stamp, static_cast<std::uint32_t>(i + 1)));
            ratio[i] = covers[i].empty()
                           ? std::numeric_limits<double>::infinity()
                           : static_cast<double>(covers[i].size()) / n_classes[i];
        }
    }

    // Global claim table; ascending cluster id keeps ties with the earlier id.
    std::vector<std::int32_t> owner(static_cast<std::size_t>(canvas.pixel_count()), -1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::uint32_t px : covers[i]) {
            const std::int32_t prev = owner[px];
            if (prev < 0 || ratio[i] < ratio[static_cast<std::size_t>(prev)])
                owner[px] = static_cast<std::int32_t>(i);
        }
    }

    FootprintSet out;
    out.footprints.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::uint32_t> owned;
        owned.reserve(covers[i].size());
        for (std::uint32_t px : covers[i])
            if (owner[px] == static_cast<std::int32_t>(i)) owned.push_back(px);
        if (owned.empty()) {
            ++out.dropped_clusters;
            out.dropped_points += clusters[i].point_ids.size();
            continue;
        }
        ClusterFootprint fp;
        fp.cluster_id = static_cast<std::uint32_t>(i);
        fp.point_count = static_cast<std::uint32_t>(clusters[i].point_ids.size());
        fp.class_count = n_classes[i];
        fp.data_density = static_cast<double>(fp.point_count) / static_cast<double>(owned.size());
        fp.pixels = std::move(owned);
        out.footprints.push_back(std::move(fp));
    }
    return out;
}

/// Builds the exact area-weighted empirical CDF over the footprints' data
/// densities (the bin-width->0 limit of the density histogram).
inline DensityMapping build_density_mapping(std::span<const ClusterFootprint> fps) {
    if (fps.empty()) throw ConfigError("density mapping needs at least one footprint");
    std::vector<std::pair<double, double>> support;  // (density, area)
    support.reserve(fps.size());
    for (const ClusterFootprint& fp : fps)
        support.emplace_back(fp.data_density, static_cast<double>(fp.area_px()));
    std::sort(support.begin(), support.end());

    DensityMapping mapping;
    for (const auto& [density, area] : support) {
        mapping.total_weight += area;
        if (!mapping.densities.empty() && mapping.densities.back() == density)
            mapping.cdf.back() = mapping.total_weight;
        else {
            mapping.densities.push_back(density);
            mapping.cdf.push_back(mapping.total_weight);
        }
    }
    for (double& c : mapping.cdf) c /= mapping.total_weight;
    return mapping;
}

/// Equalizes: visual density = cdf(data density); budget = the visual share
/// of the footprint area, rounded half-up and clamped to [1, area].
inline std::vector<PixelBudget> assign_budgets(std::span<const ClusterFootprint> fps,
                                               const DensityMapping& mapping) {
    std::vector<PixelBudget> budgets;
    budgets.reserve(fps.size());
    for (const ClusterFootprint& fp : fps) {
        PixelBudget b;
        b.cluster_id = fp.cluster_id;
        b.visual_density = mapping(fp.data_density);
        auto raw = static_cast<std::int64_t>(std::llround(b.visual_density * fp.area_px()));
        const std::int64_t lo = fp.point_count > 0 ? 1 : 0;
        b.budget = static_cast<std::uint32_t>(std::clamp<std::int64_t>(raw, lo, fp.area_px()));
        budgets.push_back(b);
    }
    return budgets;
}

/// Debug dump mirroring the equalization mapping:
/// `cluster_id,area_px,data_density,visual_density,budget`.
inline void dump_budgets_csv(std::span<const ClusterFootprint> fps,
                             std::span<const PixelBudget> budgets, std::ostream& out) {
    out << "cluster_id,area_px,data_density,visual_density,budget\n";
    for (std::size_t i = 0; i < fps.size(); ++i)
        out << fps[i].cluster_id << ',' << fps[i].area_px() << ',' << fps[i].data_density << ','
            << budgets[i].visual_density << ',' << budgets[i].budget << '\n';
}

}  // namespace pxscatter
