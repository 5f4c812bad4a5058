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

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pxscatter/config_io.hpp"
#include "pxscatter/metrics.hpp"
#include "pxscatter/pipeline.hpp"

namespace {

pxscatter::CanvasSpec parse_canvas(const std::string& spec) {
    const std::size_t x = spec.find('x');
    if (x == std::string::npos)
        throw pxscatter::ConfigError("canvas must be WxH, e.g. 1200x1200");
    try {
        return pxscatter::CanvasSpec{std::stoi(spec.substr(0, x)), std::stoi(spec.substr(x + 1))};
    } catch (const std::exception&) {
        throw pxscatter::ConfigError("cannot parse canvas spec '" + spec + "'");
    }
}

void apply_thread_env(pxscatter::RunConfig& cfg) {
    if (const char* env = std::getenv("PXSC_THREADS")) {
        try {
            cfg.threads = std::stoi(env);
        } catch (const std::exception&) {
            throw pxscatter::ConfigError("PXSC_THREADS is not an integer");
        }
    }
}

void print_summary(const pxscatter::PipelineResult& result) {
    std::fprintf(stderr, "clusters: %zu (%zu dropped, %zu points lost)\n", result.cluster_count,
                 result.dropped_clusters, result.dropped_points);
    std::fprintf(stderr, "pixel budget: %llu colored of %zu assigned\n",
                 static_cast<unsigned long long>(result.total_budget),
                 result.layout.assignments.size());
    if (result.infeasible_splits > 0)
        std::fprintf(stderr, "warning: %zu clusters had budgets below their class count\n",
                     result.infeasible_splits);
    double sum = 0.0;
    for (const auto& t : result.timings) {
        std::fprintf(stderr, "  %-10s %9.2f ms\n", t.stage.c_str(), t.ms);
        sum += t.ms;
    }
    std::fprintf(stderr, "  %-10s %9.2f ms (stages %.2f ms)\n", "total", result.wall_ms, sum);
}

void print_metrics(const pxscatter::MetricsReport& report) {
    std::printf("metric,value\n");
    std::printf("lvc,%.10g\n", report.lvc);
    std::printf("pddr,%.10g\n", report.pddr);
    std::printf("pcdr,%.10g\n", report.pcdr);
    std::printf("ecsr,%.10g\n", report.ecsr);
}

int run_command(const pxscatter::RunConfig& cfg) {
    pxscatter::PipelineResult result = pxscatter::run_pipeline(cfg);
    print_summary(result);
    if (result.metrics) print_metrics(*result.metrics);
    return 0;
}

int metrics_command(const std::string& input, pxscatter::PointFormat format,
                    const std::string& image_path, const std::string& palette_path,
                    std::int32_t window, const pxscatter::LvcParams& lvc_params) {
    using namespace pxscatter;
    PointSet raw = load_points(input, format);
    RasterImage img = decode_ppm(image_path);
    CanvasSpec canvas{img.width, img.height};
    PointSet points = normalize(raw, canvas, 0.0);
    Palette palette = palette_path.empty() ? make_default_palette(raw.class_names.size())
                                           : load_palette(palette_path, raw.class_names.size());
    ClassMap map = class_map_from_raster(img, palette);
    if (window <= 0)
        window = std::max(1, static_cast<int>(std::lround(std::max(img.width, img.height) / 10.0)));

    WindowGrid grid = build_window_grid(map, points, window);
    MetricsReport report;
    report.window = window;
    report.lvc = lvc(map, lvc_params);
    report.pddr = pddr(grid);
    report.pcdr = pcdr(grid);
    report.ecsr = ecsr(grid);
    print_metrics(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pxscatter: pixelated abstraction of large multiclass scatterplots"};
    app.require_subcommand(1);

    // --- run ---
    auto* run = app.add_subcommand("run", "run the full abstraction pipeline");
    std::string input, format = "csv", canvas = "1000x1000", pattern = "ST2", out_format;
    std::string palette, out = "out.ppm", config_path, save_config_path;
    std::string dump_clusters, dump_budgets, dump_allocs;
    double theta_k = 10.0, tau_ns = 0.5, h = 10.0, margin = 0.0;
    std::string l_init = "auto";
    int threads = 1, metrics_window = 0;
    std::uint64_t seed = 0;
    bool with_metrics = false;

    run->add_option("--input", input, "input point file");
    run->add_option("--format", format, "input format: csv, tsv, binary-f32")->capture_default_str();
    run->add_option("--canvas", canvas, "canvas size WxH")->capture_default_str();
    run->add_option("--theta-k", theta_k, "kurtosis split threshold")->capture_default_str();
    run->add_option("--tau-ns", tau_ns, "minimum non-outlier proportion")->capture_default_str();
    run->add_option("--pattern", pattern, "outlier emphasis: ST1 or ST2")->capture_default_str();
    run->add_option("--h", h, "outlier emphasis ratio (ST2)")->capture_default_str();
    run->add_option("--l-init", l_init, "initial partition level or 'auto'")->capture_default_str();
    run->add_option("--margin", margin, "canvas margin fraction")->capture_default_str();
    run->add_option("--palette", palette, "palette CSV class,r,g,b");
    run->add_option("--out", out, "output image path")->capture_default_str();
    run->add_option("--out-format", out_format, "ppm or png (default from extension)");
    run->add_flag("--metrics", with_metrics, "compute metrics after rendering");
    run->add_option("--metrics-window", metrics_window, "sliding window size (0 = canvas/10)");
    run->add_option("--dump-clusters", dump_clusters, "write partition debug CSV");
    run->add_option("--dump-budgets", dump_budgets, "write equalization debug CSV");
    run->add_option("--dump-allocs", dump_allocs, "write allocation debug CSV");
    run->add_option("--threads", threads, "worker threads (0 = hardware)")->capture_default_str();
    run->add_option("--seed", seed, "reserved for synthetic data generation");
    run->add_option("--config", config_path, "load a run config JSON (flags override)");
    run->add_option("--save-config", save_config_path, "write the effective config JSON");

    // --- metrics ---
    auto* met = app.add_subcommand("metrics", "score an existing image against point data");
    std::string m_input, m_format = "csv", m_image, m_palette;
    int m_window = 0, m_lvc_window = 10;
    double m_theta_grey = 0.3;
    met->add_option("--input", m_input, "ground-truth point file")->required();
    met->add_option("--format", m_format, "input format: csv, tsv, binary-f32")->capture_default_str();
    met->add_option("--image", m_image, "rendered PPM image")->required();
    met->add_option("--palette", m_palette, "palette CSV used for the render");
    met->add_option("--window", m_window, "sliding window size (0 = canvas/10)");
    met->add_option("--lvc-window", m_lvc_window, "LVC window size")->capture_default_str();
    met->add_option("--theta-grey", m_theta_grey, "LVC perceptibility threshold")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            pxscatter::RunConfig cfg;
            if (!config_path.empty()) cfg = pxscatter::load_config(config_path);
            auto set = [&](const char* flag) { return run->count(flag) > 0; };
            if (set("--input")) cfg.input = input;
            if (set("--format")) cfg.format = pxscatter::point_format_from_string(format);
            if (set("--canvas") || config_path.empty()) cfg.canvas = parse_canvas(canvas);
            if (set("--theta-k")) cfg.theta_k = theta_k;
            if (set("--tau-ns")) cfg.tau_ns = tau_ns;
            if (set("--pattern")) cfg.pattern = pxscatter::emphasis_pattern_from_string(pattern);
            if (set("--h")) cfg.h = h;
            if (set("--l-init")) {
                if (l_init == "auto") cfg.l_init.reset();
                else cfg.l_init = std::stoi(l_init);
            }
            if (set("--margin")) cfg.margin = margin;
            if (set("--palette")) cfg.palette_path = palette;
            if (set("--out") || cfg.out_path.empty()) cfg.out_path = out;
            if (set("--out-format")) cfg.out_format = pxscatter::output_format_from_string(out_format);
            else if (cfg.out_path.size() > 4 && cfg.out_path.ends_with(".png"))
                cfg.out_format = pxscatter::OutputFormat::Png;
            if (set("--metrics")) cfg.compute_metrics = with_metrics;
            if (set("--metrics-window")) cfg.metrics_window = metrics_window;
            if (set("--dump-clusters")) cfg.dump_clusters_path = dump_clusters;
            if (set("--dump-budgets")) cfg.dump_budgets_path = dump_budgets;
            if (set("--dump-allocs")) cfg.dump_allocs_path = dump_allocs;
            if (set("--threads")) cfg.threads = threads;
            if (set("--seed")) cfg.seed = seed;
            apply_thread_env(cfg);
            if (cfg.input.empty())
                throw pxscatter::ConfigError("--input (or a config file naming one) is required");
            if (!save_config_path.empty()) pxscatter::save_config(cfg, save_config_path);
            return run_command(cfg);
        }
        pxscatter::LvcParams lvc_params{m_lvc_window, m_theta_grey};
        return metrics_command(m_input, pxscatter::point_format_from_string(m_format), m_image,
                               m_palette, m_window, lvc_params);
    } catch (const pxscatter::StageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
