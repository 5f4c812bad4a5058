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
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <zlib.h>

#include "pxscatter/layout.hpp"
#include "pxscatter/types.hpp"

namespace pxscatter {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
    friend auto operator<=>(const Rgb&, const Rgb&) = default;
};

/// Categorical class palette plus the background color. Class colors are
/// pairwise distinct and never blended.
struct Palette {
    std::vector<Rgb> colors;
    Rgb background{0xF5, 0xF5, 0xF5};
};

/// Row-major 8-bit RGB canvas.
struct RasterImage {
    std::int32_t width = 0;
    std::int32_t height = 0;
    std::vector<std::uint8_t> pixels;  // 3 * width * height bytes

    Rgb at(std::int32_t px, std::int32_t py) const {
        const std::size_t o = 3 * (static_cast<std::size_t>(py) * width + px);
        return Rgb{pixels[o], pixels[o + 1], pixels[o + 2]};
    }
};

namespace detail {

inline Rgb hsv_to_rgb(double h, double s, double v) {
    h = std::fmod(h, 360.0) / 60.0;
    const int sector = static_cast<int>(h) % 6;
    const double f = h - std::floor(h);
    const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
    double r = 0, g = 0, b = 0;
    switch (sector) {
        case 0: r = v; g = t; b = p; break;
        case 1: r = q; g = v; b = p; break;
        case 2: r = p; g = v; b = t; break;
        case 3: r = p; g = q; b = v; break;
        case 4: r = t; g = p; b = v; break;
        default: r = v; g = p; b = q; break;
    }
    auto to8 = [](double x) { return static_cast<std::uint8_t>(std::lround(x * 255.0)); };
    return Rgb{to8(r), to8(g), to8(b)};
}

}  // namespace detail

/// Deterministic default palette: golden-angle hue stepping at fixed
/// saturation/value, nudged where 8-bit quantization would collide.
inline Palette make_default_palette(std::size_t class_count) {
    constexpr double kGoldenAngle = 137.50776405003785;
    Palette pal;
    std::set<Rgb> used{pal.background};
    for (std::size_t k = 0; k < class_count; ++k) {
        const double hue = std::fmod(static_cast<double>(k) * kGoldenAngle, 360.0);
        double value = 0.92, saturation = 0.72;
        Rgb color = detail::hsv_to_rgb(hue, saturation, value);
        while (used.count(color)) {
            value -= 0.04;
            if (value < 0.2) {
                value = 0.92;
                saturation -= 0.1;
            }
            color = detail::hsv_to_rgb(hue, saturation, value);
        }
        used.insert(color);
        pal.colors.push_back(color);
    }
    return pal;
}

/// Reads a palette CSV `class,r,g,b` (header optional). Rows may appear in
/// any order; missing class rows fall back to the generated palette.
inline Palette load_palette(const std::string& path, std::size_t class_count) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open palette file " + path);
    Palette pal = make_default_palette(class_count);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line == "class,r,g,b") continue;
        unsigned cls = 0, r = 0, g = 0, b = 0;
        if (std::sscanf(line.c_str(), "%u,%u,%u,%u", &cls, &r, &g, &b) != 4 || r > 255 ||
            g > 255 || b > 255)
            throw InputError("palette line " + std::to_string(line_no) + ": expected class,r,g,b");
        if (cls < pal.colors.size())
            pal.colors[cls] = Rgb{static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                                  static_cast<std::uint8_t>(b)};
    }
    for (std::size_t i = 0; i < pal.colors.size(); ++i)
        for (std::size_t j = i + 1; j < pal.colors.size(); ++j)
            if (pal.colors[i] == pal.colors[j])
                throw ConfigError("palette classes " + std::to_string(i) + " and " +
                                  std::to_string(j) + " share a color");
    return pal;
}

/// Paints the layout onto a fresh canvas: assigned pixels take their class
/// color, everything else the background. No blending ever occurs.
inline RasterImage render(const PixelLayout& layout, const CanvasSpec& canvas,
                          const Palette& palette) {
    validate(canvas);
    RasterImage img;
    img.width = canvas.width;
    img.height = canvas.height;
    img.pixels.resize(static_cast<std::size_t>(canvas.pixel_count()) * 3);
    for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
        img.pixels[i] = palette.background.r;
        img.pixels[i + 1] = palette.background.g;
        img.pixels[i + 2] = palette.background.b;
    }
    for (const PixelAssignment& a : layout.assignments) {
        if (a.cls >= palette.colors.size())
            throw ConfigError("class id " + std::to_string(a.cls) + " has no palette color");
        const Rgb c = palette.colors[a.cls];
        const std::size_t o = static_cast<std::size_t>(a.pixel) * 3;
        img.pixels[o] = c.r;
        img.pixels[o + 1] = c.g;
        img.pixels[o + 2] = c.b;
    }
    return img;
}

/// Writes bit-exact binary PPM: "P6\n{W} {H}\n255\n" then raw RGB rows.
inline void encode_ppm(const RasterImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path + " for writing");
    out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw InputError("write failed: " + path);
}

/// Reads back a binary PPM written by encode_ppm (or any P6 with maxval 255).
inline RasterImage decode_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path);
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    if (magic != "P6" || w <= 0 || h <= 0 || maxval != 255)
        throw InputError(path + ": not an 8-bit P6 PPM");
    in.get();  // single whitespace after header
    RasterImage img;
    img.width = w;
    img.height = h;
    img.pixels.resize(static_cast<std::size_t>(w) * h * 3);
    if (!in.read(reinterpret_cast<char*>(img.pixels.data()),
                 static_cast<std::streamsize>(img.pixels.size())))
        throw InputError(path + ": truncated pixel data");
    return img;
}

/// Inverts a rendered image back into a class map via exact palette lookup.
/// Background pixels map to -1; unknown colors are an input error.
inline ClassMap class_map_from_raster(const RasterImage& img, const Palette& palette) {
    std::map<Rgb, std::int32_t> lookup;
    lookup[palette.background] = -1;
    for (std::size_t c = 0; c < palette.colors.size(); ++c)
        lookup[palette.colors[c]] = static_cast<std::int32_t>(c);
    ClassMap map;
    map.width = img.width;
    map.height = img.height;
    map.cells.resize(static_cast<std::size_t>(img.width) * img.height);
    for (std::int32_t py = 0; py < img.height; ++py)
        for (std::int32_t px = 0; px < img.width; ++px) {
            auto it = lookup.find(img.at(px, py));
            if (it == lookup.end())
                throw InputError("image pixel color not found in the palette");
            map.cells[static_cast<std::size_t>(py) * img.width + px] = it->second;
        }
    return map;
}

namespace detail {

inline void png_chunk(std::ofstream& out, const char type[4], const std::vector<std::uint8_t>& data) {
    auto be32 = [&](std::uint32_t v) {
        const std::uint8_t b[4] = {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16),
                                   static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    be32(static_cast<std::uint32_t>(data.size()));
    out.write(type, 4);
    if (!data.empty()) out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    std::uint32_t crc = static_cast<std::uint32_t>(crc32(0, reinterpret_cast<const Bytef*>(type), 4));
    if (!data.empty()) crc = static_cast<std::uint32_t>(crc32(crc, data.data(), static_cast<uInt>(data.size())));
    be32(crc);
}

}  // namespace detail

/// Writes an 8-bit truecolor PNG (filter 0 rows, zlib-deflated IDAT).
inline void encode_png(const RasterImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path + " for writing");
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    out.write(reinterpret_cast<const char*>(sig), 8);

    std::vector<std::uint8_t> ihdr(13);
    auto put32 = [](std::vector<std::uint8_t>& v, std::size_t at, std::uint32_t x) {
        v[at] = static_cast<std::uint8_t>(x >> 24);
        v[at + 1] = static_cast<std::uint8_t>(x >> 16);
        v[at + 2] = static_cast<std::uint8_t>(x >> 8);
        v[at + 3] = static_cast<std::uint8_t>(x);
    };
    put32(ihdr, 0, static_cast<std::uint32_t>(img.width));
    put32(ihdr, 4, static_cast<std::uint32_t>(img.height));
    ihdr[8] = 8;   // bit depth
    ihdr[9] = 2;   // truecolor
    ihdr[10] = ihdr[11] = ihdr[12] = 0;
    detail::png_chunk(out, "IHDR", ihdr);

    const std::size_t stride = static_cast<std::size_t>(img.width) * 3;
    std::vector<std::uint8_t> raw((stride + 1) * static_cast<std::size_t>(img.height));
    for (std::int32_t y = 0; y < img.height; ++y) {
        raw[y * (stride + 1)] = 0;  // filter type none
        std::copy_n(img.pixels.data() + y * stride, stride, raw.data() + y * (stride + 1) + 1);
    }
    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    if (compress2(compressed.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw InternalError("png: zlib compression failed");
    compressed.resize(bound);
    detail::png_chunk(out, "IDAT", compressed);
    detail::png_chunk(out, "IEND", {});
    if (!out) throw InputError("write failed: " + path);
}

}  // namespace pxscatter
