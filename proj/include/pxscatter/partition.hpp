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
#include <numeric>
#include <span>
#include <vector>

#include "pxscatter/parallel.hpp"
#include "pxscatter/types.hpp"

namespace pxscatter {

/// Partition level. Grid size halves per level: grid_size(0) = 1 pixel,
/// grid_size(-1) = 2 pixels, grid_size(1) = half a pixel.
using PartitionLevel = int;

inline double grid_size(PartitionLevel level) { return std::exp2(static_cast<double>(-level)); }

/// Hard cap on refinement depth (grid size 1/64 px); keeps the loop bounded.
inline constexpr PartitionLevel kLevelCap = 6;

/// One non-empty square cell of the gridding at some level.
struct GridCell {
    std::int32_t ix = 0;
    std::int32_t iy = 0;
    std::uint32_t count = 0;
};

/// An iso-density region: 3x3-connected cells at one level plus the points
/// they contain. Cells are sorted row-major; point ids keep input order.
struct Cluster {
    PartitionLevel level = 0;
    double kurtosis = 0.0;
    std::vector<GridCell> cells;
    std::vector<std::uint32_t> point_ids;

    std::size_t point_count() const { return point_ids.size(); }
};

namespace detail {

inline std::uint64_t cell_key(std::int32_t ix, std::int32_t iy) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy)) << 32) |
           static_cast<std::uint32_t>(ix);
}

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Open-addressing map from packed cell keys to dense cell slots. The
/// all-ones key is reserved as the empty sentinel (cell indices never
/// saturate both halves).
class CellMap {
public:
    static constexpr std::uint64_t kEmpty = ~std::uint64_t{0};

    explicit CellMap(std::size_t expected) {
        std::size_t cap = 16;
        while (cap < expected * 2) cap <<= 1;
        keys_.assign(cap, kEmpty);
        vals_.resize(cap);
        mask_ = cap - 1;
    }

    // Returns the slot value, inserting next_id for unseen keys.
    std::uint32_t find_or_insert(std::uint64_t key, std::uint32_t next_id, bool& inserted) {
        if (size_ * 2 >= keys_.size()) grow();
        std::size_t i = mix64(key) & mask_;
        while (keys_[i] != kEmpty) {
            if (keys_[i] == key) {
                inserted = false;
                return vals_[i];
            }
            i = (i + 1) & mask_;
        }
        keys_[i] = key;
        vals_[i] = next_id;
        ++size_;
        inserted = true;
        return next_id;
    }

    // Returns pointer to the value slot or nullptr if absent.
    const std::uint32_t* find(std::uint64_t key) const {
        std::size_t i = mix64(key) & mask_;
        while (keys_[i] != kEmpty) {
            if (keys_[i] == key) return &vals_[i];
            i = (i + 1) & mask_;
        }
        return nullptr;
    }

private:
    void grow() {
        std::vector<std::uint64_t> old_keys = std::move(keys_);
        std::vector<std::uint32_t> old_vals = std::move(vals_);
        std::size_t cap = old_keys.size() * 2;
        keys_.assign(cap, kEmpty);
        vals_.assign(cap, 0);
        mask_ = cap - 1;
        for (std::size_t i = 0; i < old_keys.size(); ++i) {
            if (old_keys[i] == kEmpty) continue;
            std::size_t j = mix64(old_keys[i]) & mask_;
            while (keys_[j] != kEmpty) j = (j + 1) & mask_;
            keys_[j] = old_keys[i];
            vals_[j] = old_vals[i];
        }
    }

    std::vector<std::uint64_t> keys_;
    std::vector<std::uint32_t> vals_;
    std::uint64_t mask_ = 0;
    std::size_t size_ = 0;
};

struct UnionFind {
    explicit UnionFind(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0u);
    }
    std::uint32_t find(std::uint32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::uint32_t a, std::uint32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<std::uint32_t> parent;
};

/// Buckets points into non-empty cells at `level`. Outputs cells in
/// first-appearance order plus each point's cell slot.
struct GriddingResult {
    std::vector<GridCell> cells;
    std::vector<std::uint32_t> point_cell;  // parallel to the input id span
};

inline GriddingResult grid_points(const PointSet& ps, std::span<const std::uint32_t> ids,
                                  PartitionLevel level) {
    GriddingResult out;
    out.point_cell.resize(ids.size());
    const double scale = std::exp2(static_cast<double>(level));
    CellMap map(ids.size());
    out.cells.reserve(std::min<std::size_t>(ids.size(), 1 << 16));
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const Point& p = ps.points[ids[i]];
        if (!(p.x >= 0.0 && p.y >= 0.0))
            throw InternalError("gridding: point outside canvas space");
        auto ix = static_cast<std::int32_t>(p.x * scale);
        auto iy = static_cast<std::int32_t>(p.y * scale);
        bool inserted = false;
        std::uint32_t slot = map.find_or_insert(cell_key(ix, iy),
                                                static_cast<std::uint32_t>(out.cells.size()),
                                                inserted);
        if (inserted) out.cells.push_back(GridCell{ix, iy, 0});
        ++out.cells[slot].count;
        out.point_cell[i] = slot;
    }
    return out;
}

/// Labels cells with component ids under 8-adjacency (Chebyshev distance 1).
/// Components are numbered by their minimum row-major cell key, so the
/// labelling is canonical regardless of cell order.
inline std::uint32_t label_components(std::span<const GridCell> cells,
                                      std::vector<std::uint32_t>& comp_of_cell) {
    const std::size_t n = cells.size();
    comp_of_cell.assign(n, 0);
    if (n == 0) return 0;
    CellMap map(n);
    for (std::size_t i = 0; i < n; ++i) {
        bool inserted = false;
        map.find_or_insert(cell_key(cells[i].ix, cells[i].iy), static_cast<std::uint32_t>(i),
                           inserted);
    }
    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t ix = cells[i].ix, iy = cells[i].iy;
        // Forward half of the 3x3 neighborhood; each pair is visited once.
        const std::int32_t nb[4][2] = {{ix + 1, iy}, {ix - 1, iy + 1}, {ix, iy + 1}, {ix + 1, iy + 1}};
        for (const auto& d : nb) {
            if (const std::uint32_t* j = map.find(cell_key(d[0], d[1])))
                uf.unite(static_cast<std::uint32_t>(i), *j);
        }
    }
    // Canonical component order: ascending minimum cell key.
    std::vector<std::uint64_t> min_key(n, CellMap::kEmpty);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t r = uf.find(static_cast<std::uint32_t>(i));
        min_key[r] = std::min(min_key[r], cell_key(cells[i].ix, cells[i].iy));
    }
    std::vector<std::uint32_t> roots;
    for (std::size_t i = 0; i < n; ++i)
        if (uf.find(static_cast<std::uint32_t>(i)) == i) roots.push_back(static_cast<std::uint32_t>(i));
    std::sort(roots.begin(), roots.end(),
              [&](std::uint32_t a, std::uint32_t b) { return min_key[a] < min_key[b]; });
    std::vector<std::uint32_t> comp_of_root(n, 0);
    for (std::size_t c = 0; c < roots.size(); ++c) comp_of_root[roots[c]] = static_cast<std::uint32_t>(c);
    for (std::size_t i = 0; i < n; ++i)
        comp_of_cell[i] = comp_of_root[uf.find(static_cast<std::uint32_t>(i))];
    return static_cast<std::uint32_t>(roots.size());
}

inline double kurtosis_of_counts(std::span<const std::uint32_t> counts) {
    const std::size_t n = counts.size();
    if (n < 4) return 0.0;
    double sum = 0.0;
    for (std::uint32_t c : counts) sum += c;
    const double mean = sum / static_cast<double>(n);
    double m2 = 0.0, m4 = 0.0;
    for (std::uint32_t c : counts) {
        const double d = static_cast<double>(c) - mean;
        const double d2 = d * d;
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    if (m2 <= 0.0) return 0.0;
    return m4 / (m2 * m2);
}

/// One SinglePartition step over one parent: grid at `level`, split into
/// 3x3-connected components, compute kurtosis. Children come out in
/// canonical (min cell key) order with cells sorted row-major.
inline std::vector<Cluster> split_parent(const PointSet& ps, std::span<const std::uint32_t> ids,
                                         PartitionLevel level) {
    GriddingResult g = grid_points(ps, ids, level);
    std::vector<std::uint32_t> comp_of_cell;
    const std::uint32_t n_comp = label_components(g.cells, comp_of_cell);

    std::vector<Cluster> children(n_comp);
    std::vector<std::uint32_t> cell_total(n_comp, 0), point_total(n_comp, 0);
    for (std::size_t i = 0; i < g.cells.size(); ++i) {
        ++cell_total[comp_of_cell[i]];
        point_total[comp_of_cell[i]] += g.cells[i].count;
    }
    for (std::uint32_t c = 0; c < n_comp; ++c) {
        children[c].level = level;
        children[c].cells.reserve(cell_total[c]);
        children[c].point_ids.reserve(point_total[c]);
    }
    for (std::size_t i = 0; i < g.cells.size(); ++i)
        children[comp_of_cell[i]].cells.push_back(g.cells[i]);
    for (std::size_t i = 0; i < ids.size(); ++i)
        children[comp_of_cell[g.point_cell[i]]].point_ids.push_back(ids[i]);

    std::vector<std::uint32_t> counts;
    for (Cluster& child : children) {
        std::sort(child.cells.begin(), child.cells.end(), [](const GridCell& a, const GridCell& b) {
            return cell_key(a.ix, a.iy) < cell_key(b.ix, b.iy);
        });
        counts.clear();
        for (const GridCell& cell : child.cells) counts.push_back(cell.count);
        child.kurtosis = kurtosis_of_counts(counts);
    }
    return children;
}

}  // namespace detail

/// Buckets the given points into non-empty grid cells at `level`, sorted
/// row-major. Cell (ix,iy) covers [ix*GS,(ix+1)*GS) x [iy*GS,(iy+1)*GS).
inline std::vector<GridCell> gridding(const PointSet& ps, std::span<const std::uint32_t> ids,
                                      PartitionLevel level) {
    std::vector<GridCell> cells = detail::grid_points(ps, ids, level).cells;
    std::sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
        return detail::cell_key(a.ix, a.iy) < detail::cell_key(b.ix, b.iy);
    });
    return cells;
}

/// Groups cells (all at one level) into connected components under the
/// "within a 3x3 grid area" relation, i.e. Chebyshev distance <= 1.
inline std::vector<std::vector<GridCell>> clustering(std::span<const GridCell> cells) {
    std::vector<std::uint32_t> comp_of_cell;
    const std::uint32_t n_comp = detail::label_components(cells, comp_of_cell);
    std::vector<std::vector<GridCell>> groups(n_comp);
    for (std::size_t i = 0; i < cells.size(); ++i) groups[comp_of_cell[i]].push_back(cells[i]);
    for (auto& group : groups)
        std::sort(group.begin(), group.end(), [](const GridCell& a, const GridCell& b) {
            return detail::cell_key(a.ix, a.iy) < detail::cell_key(b.ix, b.iy);
        });
    return groups;
}

/// Pearson kurtosis (mu4 / sigma^4) of the per-cell point counts. Returns 0
/// for clusters with fewer than 4 cells or zero variance; such clusters are
/// treated as iso-density and never split.
inline double kurtosis(const Cluster& cluster) {
    std::vector<std::uint32_t> counts;
    counts.reserve(cluster.cells.size());
    for (const GridCell& cell : cluster.cells) counts.push_back(cell.count);
    return detail::kurtosis_of_counts(counts);
}

struct PartitionOptions {
    PartitionLevel level_cap = kLevelCap;
    int threads = 1;
};

/// Iso-density region partition. Seeds with the whole point set at l_init,
/// then repeatedly re-grids peaked clusters (kurtosis > theta_k) with a
/// halved grid size until every cluster is gentle or the level cap is hit.
/// Emits clusters covering all points exactly once.
inline std::vector<Cluster> iso_density_partition(const PointSet& ps, double theta_k,
                                                  PartitionLevel l_init,
                                                  const PartitionOptions& opts = {}) {
    if (!(theta_k > 0.0)) throw ConfigError("theta_k must be positive");
    if (l_init > opts.level_cap)
        throw ConfigError("l_init exceeds the level cap " + std::to_string(opts.level_cap));
    if (ps.points.empty()) return {};

    std::vector<Cluster> emitted;
    std::vector<Cluster> parents(1);
    parents[0].point_ids.resize(ps.points.size());
    std::iota(parents[0].point_ids.begin(), parents[0].point_ids.end(), 0u);

    for (PartitionLevel level = l_init; !parents.empty(); ++level) {
        std::vector<std::vector<Cluster>> per_parent(parents.size());
        parallel_for(parents.size(), opts.threads, [&](std::size_t i) {
            per_parent[i] = detail::split_parent(ps, parents[i].point_ids, level);
        });
        parents.clear();
        const bool last_round = level == opts.level_cap;
        for (auto& children : per_parent) {
            for (Cluster& child : children) {
                if (!last_round && child.kurtosis > theta_k) parents.push_back(std::move(child));
                else emitted.push_back(std::move(child));
            }
        }
        if (last_round) break;
    }
    return emitted;
}

/// Writes the partition debug dump: one `level,cell_count,point_count,kurtosis`
/// line per cluster.
inline void dump_clusters_csv(std::span<const Cluster> clusters, std::ostream& out) {
    out << "level,cell_count,point_count,kurtosis\n";
    for (const Cluster& c : clusters)
        out << c.level << ',' << c.cells.size() << ',' << c.point_ids.size() << ',' << c.kurtosis
            << '\n';
}

}  // namespace pxscatter
