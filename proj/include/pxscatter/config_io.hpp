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

#include <fstream>
#include <string>

#include <json.hpp>

#include "pxscatter/pipeline.hpp"

namespace pxscatter {

/// JSON form of a RunConfig; round-trips exactly.
inline nlohmann::json to_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["input"] = cfg.input;
    j["format"] = to_string(cfg.format);
    j["canvas"] = {cfg.canvas.width, cfg.canvas.height};
    j["theta_k"] = cfg.theta_k;
    j["tau_ns"] = cfg.tau_ns;
    j["pattern"] = to_string(cfg.pattern);
    j["h"] = cfg.h;
    if (cfg.l_init) j["l_init"] = *cfg.l_init;
    else j["l_init"] = "auto";
    j["margin"] = cfg.margin;
    j["palette"] = cfg.palette_path;
    j["out"] = cfg.out_path;
    j["out_format"] = to_string(cfg.out_format);
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    j["metrics"] = cfg.compute_metrics;
    j["metrics_window"] = cfg.metrics_window;
    j["lvc_window"] = cfg.lvc_params.window_size;
    j["theta_grey"] = cfg.lvc_params.theta_grey;
    j["dump_clusters"] = cfg.dump_clusters_path;
    j["dump_budgets"] = cfg.dump_budgets_path;
    j["dump_allocs"] = cfg.dump_allocs_path;
    return j;
}

inline RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    cfg.input = j.value("input", cfg.input);
    if (j.contains("format")) cfg.format = point_format_from_string(j["format"].get<std::string>());
    if (j.contains("canvas")) {
        cfg.canvas.width = j["canvas"].at(0).get<int>();
        cfg.canvas.height = j["canvas"].at(1).get<int>();
    }
    cfg.theta_k = j.value("theta_k", cfg.theta_k);
    cfg.tau_ns = j.value("tau_ns", cfg.tau_ns);
    if (j.contains("pattern"))
        cfg.pattern = emphasis_pattern_from_string(j["pattern"].get<std::string>());
    cfg.h = j.value("h", cfg.h);
    if (j.contains("l_init") && j["l_init"].is_number_integer())
        cfg.l_init = j["l_init"].get<int>();
    cfg.margin = j.value("margin", cfg.margin);
    cfg.palette_path = j.value("palette", cfg.palette_path);
    cfg.out_path = j.value("out", cfg.out_path);
    if (j.contains("out_format"))
        cfg.out_format = output_format_from_string(j["out_format"].get<std::string>());
    cfg.seed = j.value("seed", cfg.seed);
    cfg.threads = j.value("threads", cfg.threads);
    cfg.compute_metrics = j.value("metrics", cfg.compute_metrics);
    cfg.metrics_window = j.value("metrics_window", cfg.metrics_window);
    cfg.lvc_params.window_size = j.value("lvc_window", cfg.lvc_params.window_size);
    cfg.lvc_params.theta_grey = j.value("theta_grey", cfg.lvc_params.theta_grey);
    cfg.dump_clusters_path = j.value("dump_clusters", cfg.dump_clusters_path);
    cfg.dump_budgets_path = j.value("dump_budgets", cfg.dump_budgets_path);
    cfg.dump_allocs_path = j.value("dump_allocs", cfg.dump_allocs_path);
    return cfg;
}

inline void save_config(const RunConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out << to_json(cfg).dump(2) << '\n';
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path);
    nlohmann::json j;
    in >> j;
    return run_config_from_json(j);
}

}  // namespace pxscatter
