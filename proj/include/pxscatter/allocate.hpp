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
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "pxscatter/types.hpp"

namespace pxscatter {

/// Outlier emphasis pattern: ST1 floors every outlier class at one pixel;
/// ST2 additionally scales outlier areas by h, bounded by the per-cluster
/// density-reversal threshold h_max.
enum class EmphasisPattern { ST1, ST2 };

inline const char* to_string(EmphasisPattern p) {
    return p == EmphasisPattern::ST1 ? "ST1" : "ST2";
}

inline EmphasisPattern emphasis_pattern_from_string(std::string_view s) {
    if (s == "ST1" || s == "st1") return EmphasisPattern::ST1;
    if (s == "ST2" || s == "st2") return EmphasisPattern::ST2;
    throw ConfigError("unknown emphasis pattern: " + std::string(s));
}

/// Point count of one class inside a cluster.
struct ClassCount {
    ClassId cls = 0;
    std::uint32_t count = 0;
};

/// Outcome of outlier filtering for one cluster.
struct OutlierFilter {
    std::vector<bool> is_outlier;  // parallel to the class-count list
    double tau_o = 0.0;
};

/// Per-cluster pixel split across classes.
struct ClassSplit {
    std::vector<ClassId> classes;          // ascending class id
    std::vector<std::uint32_t> per_class;  // pixels per class, parallel
    std::vector<bool> outlier_flags;       // parallel
    double h_used = 1.0;
    double h_max = std::numeric_limits<double>::infinity();
    bool infeasible_budget = false;

    std::uint64_t total() const {
        return std::accumulate(per_class.begin(), per_class.end(), std::uint64_t{0});
    }
};

namespace detail {

inline std::int64_t round_half_up(double v) { return std::llround(v); }

/// Largest-remainder apportionment of `total` across `weights`, with every
/// entry floored at one. Requires total >= weights.size().
inline std::vector<std::uint32_t> apportion_with_floor(std::span<const double> weights,
                                                       std::uint64_t total) {
    const std::size_t n = weights.size();
    std::vector<std::uint32_t> alloc(n, 1);
    std::uint64_t rest = total - n;
    if (rest == 0) return alloc;
    double weight_sum = 0.0;
    for (double w : weights) weight_sum += w;
    if (weight_sum <= 0.0) weight_sum = 1.0;

    std::vector<double> remainder(n);
    std::uint64_t given = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double quota = static_cast<double>(rest) * weights[i] / weight_sum;
        const auto base = static_cast<std::uint64_t>(std::floor(quota));
        alloc[i] += static_cast<std::uint32_t>(base);
        given += base;
        remainder[i] = quota - static_cast<double>(base);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
        if (weights[a] != weights[b]) return weights[a] > weights[b];
        return a < b;
    });
    for (std::uint64_t k = 0; k < rest - given; ++k) ++alloc[order[k % n]];
    return alloc;
}

}  // namespace detail

/// Splits a cluster's classes into outliers and non-outliers. A class is an
/// outlier iff its count <= tau_o * N_avg with tau_o = (1 - tau_ns) * n/(n-1).
/// Single-class clusters have no outliers; if the rule would flag every
/// class, the largest one (ties: lowest id) is forced non-outlier.
inline OutlierFilter filter_outliers(std::span<const ClassCount> counts, double tau_ns) {
    if (counts.empty()) throw ConfigError("filter_outliers: no classes present");
    if (tau_ns < 0.5 || tau_ns > 1.0) throw ConfigError("tau_ns must lie in [0.5, 1]");
    const std::size_t n = counts.size();
    OutlierFilter out;
    out.is_outlier.assign(n, false);
    if (n == 1) return out;

    out.tau_o = (1.0 - tau_ns) * static_cast<double>(n) / static_cast<double>(n - 1);
    std::uint64_t total = 0;
    for (const ClassCount& cc : counts) total += cc.count;
    const double n_avg = static_cast<double>(total) / static_cast<double>(n);
    const double threshold = out.tau_o * n_avg;

    bool all_outliers = true;
    for (std::size_t i = 0; i < n; ++i) {
        out.is_outlier[i] = static_cast<double>(counts[i].count) <= threshold;
        all_outliers = all_outliers && out.is_outlier[i];
    }
    if (all_outliers) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (counts[i].count > counts[best].count) best = i;
        out.is_outlier[best] = false;
    }
    return out;
}

/// Density-reversal threshold: the closed-form h_max with
/// max(op)*h_max = (min(np)/sum(np)) * (1 - h_max*sum(op)).
/// Returns +infinity when there are no outlier proportions.
inline double compute_h_max(std::span<const double> op, std::span<const double> np) {
    if (op.empty()) return std::numeric_limits<double>::infinity();
    if (np.empty()) throw ConfigError("compute_h_max: no non-outlier proportions");
    double max_op = 0.0, sum_op = 0.0;
    for (double v : op) {
        max_op = std::max(max_op, v);
        sum_op += v;
    }
    double min_np = std::numeric_limits<double>::infinity(), sum_np = 0.0;
    for (double v : np) {
        min_np = std::min(min_np, v);
        sum_np += v;
    }
    return min_np / (max_op * sum_np + min_np * sum_op);
}

/// Splits a cluster's pixel budget m across its classes. Outlier classes get
/// max(1, [h' * p_i * m]) with h' = min(h, h_max) (h' = 1 for ST1); the rest
/// goes to non-outlier classes by largest-remainder with a one-pixel floor.
/// Totals equal m exactly and outlier allocations never exceed the smallest
/// non-outlier allocation.
inline ClassSplit split_budget(std::span<const ClassCount> counts, std::uint64_t budget,
                               EmphasisPattern pattern, double h, double tau_ns = 0.5) {
    if (counts.empty()) throw ConfigError("split_budget: no classes present");
    if (budget < 1) throw ConfigError("split_budget: budget must be at least 1");
    if (h < 1.0) throw ConfigError("split_budget: h must be >= 1");
    const std::size_t n = counts.size();

    ClassSplit split;
    split.classes.resize(n);
    split.per_class.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) split.classes[i] = counts[i].cls;

    OutlierFilter filter = filter_outliers(counts, tau_ns);
    split.outlier_flags = filter.is_outlier;

    // Infeasible: fewer pixels than classes. Densest classes get one each.
    if (budget < n) {
        split.infeasible_budget = true;
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (counts[a].count != counts[b].count) return counts[a].count > counts[b].count;
            return counts[a].cls < counts[b].cls;
        });
        for (std::uint64_t k = 0; k < budget; ++k) split.per_class[order[k]] = 1;
        return split;
    }

    std::uint64_t total_points = 0;
    for (const ClassCount& cc : counts) total_points += cc.count;

    std::vector<std::size_t> outliers, non_outliers;
    std::vector<double> op, np;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = static_cast<double>(counts[i].count) / static_cast<double>(total_points);
        if (filter.is_outlier[i]) {
            outliers.push_back(i);
            op.push_back(p);
        } else {
            non_outliers.push_back(i);
            np.push_back(p);
        }
    }

    split.h_max = compute_h_max(op, np);
    const double h_eff = pattern == EmphasisPattern::ST1 ? 1.0 : std::min(h, split.h_max);
    split.h_used = h_eff;

    if (outliers.empty()) {
        std::vector<double> weights(n);
        for (std::size_t i = 0; i < n; ++i) weights[i] = static_cast<double>(counts[i].count);
        split.per_class = detail::apportion_with_floor(weights, budget);
        return split;
    }

    std::vector<std::uint32_t> on(outliers.size());
    std::uint64_t on_sum = 0;
    for (std::size_t k = 0; k < outliers.size(); ++k) {
        const double scaled = h_eff * op[k] * static_cast<double>(budget);
        on[k] = scaled < 1.0 ? 1u
                             : static_cast<std::uint32_t>(detail::round_half_up(scaled));
        on_sum += on[k];
    }
    // Leave room for the non-outlier one-pixel floors; scale down if needed.
    const std::uint64_t cap = budget - non_outliers.size();
    if (on_sum > cap) {
        std::vector<double> weights(on.begin(), on.end());
        on = detail::apportion_with_floor(weights, cap);
        on_sum = cap;
    }
    for (std::size_t k = 0; k < outliers.size(); ++k) split.per_class[outliers[k]] = on[k];

    const std::uint64_t rest = budget - on_sum;
    std::vector<double> weights(non_outliers.size());
    for (std::size_t k = 0; k < non_outliers.size(); ++k)
        weights[k] = static_cast<double>(counts[non_outliers[k]].count);
    std::vector<std::uint32_t> rest_alloc = detail::apportion_with_floor(weights, rest);
    for (std::size_t k = 0; k < non_outliers.size(); ++k)
        split.per_class[non_outliers[k]] = rest_alloc[k];

    // Rounding can nudge an outlier past the smallest non-outlier; shift
    // pixels until the density order is restored.
    while (true) {
        std::size_t max_out = outliers[0], min_non = non_outliers[0];
        for (std::size_t i : outliers)
            if (split.per_class[i] > split.per_class[max_out]) max_out = i;
        for (std::size_t i : non_outliers)
            if (split.per_class[i] < split.per_class[min_non]) min_non = i;
        if (split.per_class[max_out] <= split.per_class[min_non]) break;
        --split.per_class[max_out];
        ++split.per_class[min_non];
    }
    return split;
}

/// Debug dump: `cluster_id,class_id,points,pixels,is_outlier,h_max`.
inline void dump_split_csv(std::uint32_t cluster_id, std::span<const ClassCount> counts,
                           const ClassSplit& split, std::ostream& out) {
    for (std::size_t i = 0; i < counts.size(); ++i)
        out << cluster_id << ',' << counts[i].cls << ',' << counts[i].count << ','
            << split.per_class[i] << ',' << (split.outlier_flags[i] ? 1 : 0) << ',' << split.h_max
            << '\n';
}

}  // namespace pxscatter
