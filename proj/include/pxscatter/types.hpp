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

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pxscatter {

/// Dense class index. Ids run 0..K-1 over the classes of a dataset.
using ClassId = std::uint16_t;

/// A 2D point in canvas units with its class label.
struct Point {
    double x;
    double y;
    ClassId cls;
};

/// Immutable multiclass point set. Duplicate coordinates are retained;
/// downstream grid counting treats them as multiplicity.
struct PointSet {
    std::vector<Point> points;
    std::vector<std::string> class_names;
    std::vector<std::size_t> class_counts;

    std::size_t size() const { return points.size(); }
    std::size_t class_count() const { return class_names.size(); }
};

/// Output canvas dimensions in pixels.
struct CanvasSpec {
    int width = 0;
    int height = 0;

    std::int64_t pixel_count() const {
        return static_cast<std::int64_t>(width) * height;
    }
};

/// Raised for malformed or unusable input files.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised for invalid parameter combinations.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Raised when an internal pipeline invariant is violated.
struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

inline void validate(const CanvasSpec& canvas) {
    if (canvas.width < 8 || canvas.height < 8)
        throw ConfigError("canvas too small: need at least 8x8 pixels, got " +
                          std::to_string(canvas.width) + "x" + std::to_string(canvas.height));
    if (canvas.pixel_count() > (std::int64_t{1} << 31))
        throw ConfigError("canvas too large: pixel count exceeds 2^31");
}

}  // namespace pxscatter
