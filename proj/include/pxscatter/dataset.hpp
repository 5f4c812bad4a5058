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
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pxscatter/types.hpp"

namespace pxscatter {

enum class PointFormat { Csv, Tsv, BinaryF32 };

inline const char* to_string(PointFormat f) {
    switch (f) {
        case PointFormat::Csv: return "csv";
        case PointFormat::Tsv: return "tsv";
        case PointFormat::BinaryF32: return "binary-f32";
    }
    return "?";
}

inline PointFormat point_format_from_string(std::string_view s) {
    if (s == "csv") return PointFormat::Csv;
    if (s == "tsv") return PointFormat::Tsv;
    if (s == "binary-f32" || s == "bin" || s == "pxsc") return PointFormat::BinaryF32;
    throw ConfigError("unknown point format: " + std::string(s));
}

namespace detail {

inline constexpr char kBinaryMagic[5] = {'P', 'X', 'S', 'C', '1'};

inline double parse_double(std::string_view tok, std::size_t line_no, const char* what) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw InputError("line " + std::to_string(line_no) + ": cannot parse " + what +
                         " value '" + std::string(tok) + "'");
    if (!std::isfinite(v))
        throw InputError("line " + std::to_string(line_no) + ": non-finite " + what + " value");
    return v;
}

inline void rebuild_class_counts(PointSet& ps) {
    ps.class_counts.assign(ps.class_names.size(), 0);
    for (const Point& p : ps.points) ++ps.class_counts[p.cls];
}

inline PointSet load_delimited(std::istream& in, char delim) {
    PointSet ps;
    std::unordered_map<std::string, ClassId> class_ids;
    std::string line;
    std::size_t line_no = 0;

    auto split3 = [delim](std::string_view s, std::string_view cols[3], int idx[3]) {
        int found = 0;
        std::size_t start = 0;
        int col = 0;
        while (found < 3) {
            std::size_t end = s.find(delim, start);
            std::string_view tok =
                end == std::string_view::npos ? s.substr(start) : s.substr(start, end - start);
            if (col == idx[0] || col == idx[1] || col == idx[2]) {
                cols[col == idx[0] ? 0 : (col == idx[1] ? 1 : 2)] = tok;
                ++found;
            }
            if (end == std::string_view::npos) break;
            start = end + 1;
            ++col;
        }
        return found == 3;
    };

    if (!std::getline(in, line)) throw InputError("empty dataset: file has no header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    int idx[3] = {-1, -1, -1};  // x, y, class column positions
    {
        std::size_t start = 0;
        int col = 0;
        while (true) {
            std::size_t end = line.find(delim, start);
            std::string_view tok = std::string_view(line).substr(
                start, end == std::string::npos ? std::string::npos : end - start);
            if (tok == "x") idx[0] = col;
            else if (tok == "y") idx[1] = col;
            else if (tok == "class") idx[2] = col;
            if (end == std::string::npos) break;
            start = end + 1;
            ++col;
        }
        if (idx[0] < 0 || idx[1] < 0 || idx[2] < 0)
            throw InputError("line 1: header must name columns x, y and class");
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::string_view cols[3];
        if (!split3(line, cols, idx))
            throw InputError("line " + std::to_string(line_no) + ": too few columns");
        Point p;
        p.x = parse_double(cols[0], line_no, "x");
        p.y = parse_double(cols[1], line_no, "y");
        std::string label(cols[2]);
        auto [it, inserted] = class_ids.try_emplace(label, static_cast<ClassId>(ps.class_names.size()));
        if (inserted) {
            if (ps.class_names.size() >= std::numeric_limits<ClassId>::max())
                throw InputError("line " + std::to_string(line_no) + ": too many classes");
            ps.class_names.push_back(std::move(label));
        }
        p.cls = it->second;
        ps.points.push_back(p);
    }
    if (ps.points.empty()) throw InputError("empty dataset: no data rows");
    rebuild_class_counts(ps);
    return ps;
}

inline PointSet load_binary(std::istream& in) {
    char magic[5];
    if (!in.read(magic, 5) || std::memcmp(magic, kBinaryMagic, 5) != 0)
        throw InputError("bad magic: not a PXSC1 point file");
    std::uint64_t count = 0;
    unsigned char hdr[8];
    if (!in.read(reinterpret_cast<char*>(hdr), 8)) throw InputError("truncated PXSC1 header");
    for (int i = 7; i >= 0; --i) count = (count << 8) | hdr[i];
    if (count == 0) throw InputError("empty dataset: PXSC1 file holds zero points");

    PointSet ps;
    ps.points.reserve(count);
    ClassId max_cls = 0;
    std::vector<unsigned char> rec(10);
    for (std::uint64_t i = 0; i < count; ++i) {
        if (!in.read(reinterpret_cast<char*>(rec.data()), 10))
            throw InputError("truncated PXSC1 file at record " + std::to_string(i));
        float fx, fy;
        std::memcpy(&fx, rec.data(), 4);
        std::memcpy(&fy, rec.data() + 4, 4);
        ClassId c = static_cast<ClassId>(rec[8] | (static_cast<unsigned>(rec[9]) << 8));
        max_cls = std::max(max_cls, c);
        ps.points.push_back(Point{static_cast<double>(fx), static_cast<double>(fy), c});
    }
    ps.class_names.resize(static_cast<std::size_t>(max_cls) + 1);
    for (std::size_t c = 0; c < ps.class_names.size(); ++c)
        ps.class_names[c] = std::to_string(c);
    rebuild_class_counts(ps);
    return ps;
}

}  // namespace detail

/// Loads a point set from CSV/TSV (header columns x,y,class) or from the
/// PXSC1 binary format. Class labels are mapped to dense ids in
/// first-appearance order.
inline PointSet load_points(const std::string& path, PointFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    switch (format) {
        case PointFormat::Csv: return detail::load_delimited(in, ',');
        case PointFormat::Tsv: return detail::load_delimited(in, '\t');
        case PointFormat::BinaryF32: return detail::load_binary(in);
    }
    throw ConfigError("unhandled point format");
}

/// Writes the PXSC1 binary format: magic "PXSC1", u64 little-endian count,
/// then packed (f32 x, f32 y, u16 class) records.
inline void save_points_binary(const PointSet& ps, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out.write(detail::kBinaryMagic, 5);
    std::uint64_t count = ps.points.size();
    unsigned char hdr[8];
    for (int i = 0; i < 8; ++i) hdr[i] = static_cast<unsigned char>((count >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(hdr), 8);
    for (const Point& p : ps.points) {
        float fx = static_cast<float>(p.x), fy = static_cast<float>(p.y);
        unsigned char rec[10];
        std::memcpy(rec, &fx, 4);
        std::memcpy(rec + 4, &fy, 4);
        rec[8] = static_cast<unsigned char>(p.cls & 0xff);
        rec[9] = static_cast<unsigned char>(p.cls >> 8);
        out.write(reinterpret_cast<const char*>(rec), 10);
    }
    if (!out) throw InputError("write failed: " + path);
}

/// Fits the data bounding box into the canvas with a uniform scale, keeping
/// the aspect ratio and centering the slack axis. Output coordinates lie in
/// [margin*W, (1-margin)*W) x [margin*H, (1-margin)*H); a degenerate axis
/// maps to the canvas center on that axis.
inline PointSet normalize(const PointSet& ps, const CanvasSpec& canvas, double margin = 0.0) {
    validate(canvas);
    if (ps.points.empty()) throw InputError("cannot normalize an empty point set");
    if (margin < 0.0 || margin >= 0.5) throw ConfigError("margin must lie in [0, 0.5)");

    double min_x = std::numeric_limits<double>::infinity(), max_x = -min_x;
    double min_y = min_x, max_y = max_x;
    for (const Point& p : ps.points) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const double w = canvas.width, h = canvas.height;
    const double span_x = max_x - min_x, span_y = max_y - min_y;
    const double box_w = (1.0 - 2.0 * margin) * w, box_h = (1.0 - 2.0 * margin) * h;

    double scale = 0.0;
    if (span_x > 0.0 && span_y > 0.0) scale = std::min(box_w / span_x, box_h / span_y);
    else if (span_x > 0.0) scale = box_w / span_x;
    else if (span_y > 0.0) scale = box_h / span_y;

    // Center the slack left by the uniform scale (all of it on a degenerate axis).
    const double off_x = margin * w + (box_w - span_x * scale) * 0.5;
    const double off_y = margin * h + (box_h - span_y * scale) * 0.5;
    const double lim_x = std::nextafter(w, 0.0), lim_y = std::nextafter(h, 0.0);

    PointSet out;
    out.class_names = ps.class_names;
    out.class_counts = ps.class_counts;
    out.points.reserve(ps.points.size());
    for (const Point& p : ps.points) {
        double x = span_x > 0.0 ? (p.x - min_x) * scale + off_x : w * 0.5;
        double y = span_y > 0.0 ? (p.y - min_y) * scale + off_y : h * 0.5;
        // Points landing exactly on the right/top edge clamp to the last pixel.
        x = std::clamp(x, 0.0, lim_x);
        y = std::clamp(y, 0.0, lim_y);
        out.points.push_back(Point{x, y, p.cls});
    }
    return out;
}

}  // namespace pxscatter
