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

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "pxscatter/allocate.hpp"
#include "pxscatter/dataset.hpp"
#include "pxscatter/equalize.hpp"
#include "pxscatter/layout.hpp"
#include "pxscatter/metrics.hpp"
#include "pxscatter/parallel.hpp"
#include "pxscatter/partition.hpp"
#include "pxscatter/render.hpp"
#include "pxscatter/types.hpp"

namespace pxscatter {

enum class OutputFormat { Ppm, Png };

inline const char* to_string(OutputFormat f) { return f == OutputFormat::Ppm ? "ppm" : "png"; }

inline OutputFormat output_format_from_string(std::string_view s) {
    if (s == "ppm") return OutputFormat::Ppm;
    if (s == "png") return OutputFormat::Png;
    throw ConfigError("unknown output format: " + std::string(s));
}

/// Full pipeline configuration with the method defaults: theta_k 10,
/// tau_ns 0.5, pattern ST2 with h 10, L_init automated from canvas size.
struct RunConfig {
    std::string input;
    PointFormat format = PointFormat::Csv;
    CanvasSpec canvas{1000, 1000};
    double theta_k = 10.0;
    double tau_ns = 0.5;
    EmphasisPattern pattern = EmphasisPattern::ST2;
    double h = 10.0;
    std::optional<int> l_init;  // empty = AUTO
    double margin = 0.0;
    std::string palette_path;
    std::string out_path;
    OutputFormat out_format = OutputFormat::Ppm;
    std::uint64_t seed = 0;  // reserved; the pipeline itself is deterministic
    int threads = 1;
    bool compute_metrics = false;
    std::int32_t metrics_window = 0;  // 0 = canvas/10
    LvcParams lvc_params{};
    std::string dump_clusters_path;
    std::string dump_budgets_path;
    std::string dump_allocs_path;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline void validate(const RunConfig& cfg) {
    validate(cfg.canvas);
    if (!(cfg.theta_k > 0.0)) throw ConfigError("theta_k must be positive");
    if (cfg.tau_ns < 0.5 || cfg.tau_ns > 1.0) throw ConfigError("tau_ns must lie in [0.5, 1]");
    if (cfg.h < 1.0) throw ConfigError("h must be >= 1");
    if (cfg.margin < 0.0 || cfg.margin >= 0.5) throw ConfigError("margin must lie in [0, 0.5)");
    if (cfg.metrics_window < 0) throw ConfigError("metrics window must be positive");
}

/// Automates the initial partition level from the canvas size: -1 for a
/// 1000-canvas baseline, one coarser per doubling, one finer per halving.
inline int auto_l_init(const CanvasSpec& canvas) {
    validate(canvas);
    const double longest = static_cast<double>(std::max(canvas.width, canvas.height));
    return static_cast<int>(std::lround(-1.0 - std::log2(longest / 1000.0)));
}

struct StageTiming {
    std::string stage;
    double ms = 0.0;
};

struct MetricsReport {
    double lvc = 0.0;
    double pddr = 0.0;
    double pcdr = 0.0;
    double ecsr = 0.0;
    std::int32_t window = 0;
};

struct PipelineResult {
    PointSet points;  // normalized into canvas space
    std::size_t cluster_count = 0;
    std::size_t dropped_clusters = 0;
    std::size_t dropped_points = 0;
    std::size_t infeasible_splits = 0;
    std::uint64_t total_budget = 0;
    PixelLayout layout;
    RasterImage image;
    std::optional<MetricsReport> metrics;
    std::vector<StageTiming> timings;
    double wall_ms = 0.0;
};

/// Pipeline failure tagged with the stage it happened in.
struct StageError : std::runtime_error {
    StageError(std::string stage_name, const std::string& message)
        : std::runtime_error("stage " + stage_name + ": " + message), stage(std::move(stage_name)) {}
    std::string stage;
};

/// Computes per-class point counts of a cluster, ascending by class id.
inline std::vector<ClassCount> class_counts_of(const Cluster& cluster, const PointSet& ps) {
    std::vector<ClassCount> counts;
    std::vector<std::uint32_t> tally(ps.class_names.size(), 0);
    for (std::uint32_t pid : cluster.point_ids) ++tally[ps.points[pid].cls];
    for (std::size_t c = 0; c < tally.size(); ++c)
        if (tally[c] > 0) counts.push_back(ClassCount{static_cast<ClassId>(c), tally[c]});
    return counts;
}

namespace detail {

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

    template <typename Fn>
    auto run(const char* stage, Fn&& fn) -> decltype(fn()) {
        const auto start = std::chrono::steady_clock::now();
        try {
            if constexpr (std::is_void_v<decltype(fn())>) {
                fn();
                record(stage, start);
            } else {
                auto result = fn();
                record(stage, start);
                return result;
            }
        } catch (const StageError&) {
            throw;
        } catch (const std::exception& e) {
            throw StageError(stage, e.what());
        }
    }

private:
    void record(const char* stage, std::chrono::steady_clock::time_point start) {
        const auto end = std::chrono::steady_clock::now();
        sink_.push_back(StageTiming{stage, std::chrono::duration<double, std::milli>(end - start).count()});
    }
    std::vector<StageTiming>& sink_;
};

inline std::ofstream open_dump(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path + " for writing");
    return out;
}

}  // namespace detail

/// Runs partition -> equalize -> allocate -> layout -> render on an already
/// loaded point set. The input set may be in any coordinate system; it is
/// normalized into canvas space first.
inline PipelineResult run_pipeline_on(const PointSet& input, const RunConfig& cfg) {
    validate(cfg);
    const auto wall_start = std::chrono::steady_clock::now();
    PipelineResult result;
    detail::StageClock clock(result.timings);

    result.points = clock.run("normalize", [&] { return normalize(input, cfg.canvas, cfg.margin); });

    const int l_init = cfg.l_init ? *cfg.l_init : auto_l_init(cfg.canvas);
    std::vector<Cluster> clusters = clock.run("partition", [&] {
        PartitionOptions opts;
        opts.threads = cfg.threads;
        return iso_density_partition(result.points, cfg.theta_k, l_init, opts);
    });
    result.cluster_count = clusters.size();
    if (!cfg.dump_clusters_path.empty()) {
        auto out = detail::open_dump(cfg.dump_clusters_path);
        dump_clusters_csv(clusters, out);
    }

    FootprintSet fps = clock.run("equalize", [&] {
        return rasterize_footprints(clusters, result.points, cfg.canvas, cfg.threads);
    });
    result.dropped_clusters = fps.dropped_clusters;
    result.dropped_points = fps.dropped_points;

    DensityMapping mapping;
    std::vector<PixelBudget> budgets;
    clock.run("budget", [&] {
        mapping = build_density_mapping(fps.footprints);
        budgets = assign_budgets(fps.footprints, mapping);
    });
    if (!cfg.dump_budgets_path.empty()) {
        auto out = detail::open_dump(cfg.dump_budgets_path);
        dump_budgets_csv(fps.footprints, budgets, out);
    }
    for (const PixelBudget& b : budgets) result.total_budget += b.budget;

    std::vector<std::vector<ClassCount>> counts(fps.footprints.size());
    std::vector<ClassSplit> splits(fps.footprints.size());
    clock.run("allocate", [&] {
        parallel_for(fps.footprints.size(), cfg.threads, [&](std::size_t i) {
            const Cluster& cluster = clusters[fps.footprints[i].cluster_id];
            counts[i] = class_counts_of(cluster, result.points);
            splits[i] = split_budget(counts[i], budgets[i].budget, cfg.pattern, cfg.h, cfg.tau_ns);
        });
    });
    for (const ClassSplit& s : splits)
        if (s.infeasible_budget) ++result.infeasible_splits;
    if (!cfg.dump_allocs_path.empty()) {
        auto out = detail::open_dump(cfg.dump_allocs_path);
        out << "cluster_id,class_id,points,pixels,is_outlier,h_max\n";
        for (std::size_t i = 0; i < fps.footprints.size(); ++i)
            dump_split_csv(fps.footprints[i].cluster_id, counts[i], splits[i], out);
    }

    std::vector<std::vector<PixelAssignment>> per_cluster(fps.footprints.size());
    clock.run("layout", [&] {
        parallel_for(fps.footprints.size(), cfg.threads, [&](std::size_t i) {
            const ClusterFootprint& fp = fps.footprints[i];
            const Cluster& cluster = clusters[fp.cluster_id];
            InitialLayout init = initial_layout(fp, splits[i], cluster, result.points, cfg.canvas);
            per_cluster[i] = kd_disperse(init, fp, cfg.canvas);
        });
        result.layout = assemble(std::move(per_cluster));
    });

    clock.run("render", [&] {
        const Palette palette = cfg.palette_path.empty()
                                    ? make_default_palette(result.points.class_names.size())
                                    : load_palette(cfg.palette_path, result.points.class_names.size());
        result.image = render(result.layout, cfg.canvas, palette);
    });

    if (!cfg.out_path.empty()) {
        clock.run("encode", [&] {
            if (cfg.out_format == OutputFormat::Ppm) encode_ppm(result.image, cfg.out_path);
            else encode_png(result.image, cfg.out_path);
        });
    }

    if (cfg.compute_metrics) {
        clock.run("metrics", [&] {
            const std::int32_t window =
                cfg.metrics_window > 0
                    ? cfg.metrics_window
                    : std::max<std::int32_t>(
                          1, static_cast<std::int32_t>(std::lround(
                                 std::max(cfg.canvas.width, cfg.canvas.height) / 10.0)));
            const ClassMap map = class_map_from_layout(result.layout, cfg.canvas);
            const WindowGrid grid = build_window_grid(map, result.points, window);
            MetricsReport report;
            report.window = window;
            report.lvc = lvc(map, cfg.lvc_params);
            report.pddr = pddr(grid);
            report.pcdr = pcdr(grid);
            report.ecsr = ecsr(grid);
            result.metrics = report;
        });
    }

    const auto wall_end = std::chrono::steady_clock::now();
    result.wall_ms = std::chrono::duration<double, std::milli>(wall_end - wall_start).count();
    return result;
}

/// Loads the configured input file and runs the full pipeline.
inline PipelineResult run_pipeline(const RunConfig& cfg) {
    validate(cfg);
    std::vector<StageTiming> load_timing;
    detail::StageClock clock(load_timing);
    PointSet ps = clock.run("load", [&] { return load_points(cfg.input, cfg.format); });
    PipelineResult result = run_pipeline_on(ps, cfg);
    result.wall_ms += load_timing.front().ms;
    result.timings.insert(result.timings.begin(), load_timing.front());
    return result;
}

}  // namespace pxscatter
