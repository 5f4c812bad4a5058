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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pxscatter/dataset.hpp"
#include "support/fixtures.hpp"

using namespace pxscatter;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& body) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << body;
    return path;
}

}  // namespace

TEST_CASE("load_points parses a minimal CSV") {
    const auto path = write_temp("pxs_min.csv", "x,y,class\n0,0,a\n1,1,b\n");
    const PointSet ps = load_points(path.string(), PointFormat::Csv);
    REQUIRE(ps.size() == 2);
    REQUIRE(ps.class_count() == 2);
    CHECK(ps.class_names[0] == "a");
    CHECK(ps.class_names[1] == "b");
    CHECK(ps.points[1].x == 1.0);
    CHECK(ps.points[1].cls == 1);
}

TEST_CASE("load_points counts integer class labels") {
    const auto path = write_temp("pxs_int.csv", "x,y,class\n0,0,0\n1,0,0\n2,0,1\n");
    const PointSet ps = load_points(path.string(), PointFormat::Csv);
    REQUIRE(ps.class_counts == std::vector<std::size_t>{2, 1});
}

TEST_CASE("load_points keeps duplicate coordinates") {
    const auto path = write_temp("pxs_dup.csv", "x,y,class\n5,5,a\n5,5,a\n1,2,b\n");
    const PointSet ps = load_points(path.string(), PointFormat::Csv);
    REQUIRE(ps.size() == 3);
}

TEST_CASE("load_points reads TSV and tolerates extra columns") {
    const auto path = write_temp("pxs.tsv", "id\tx\ty\tclass\n9\t1.5\t2.5\tm\n");
    const PointSet ps = load_points(path.string(), PointFormat::Tsv);
    REQUIRE(ps.size() == 1);
    CHECK(ps.points[0].x == 1.5);
    CHECK(ps.points[0].y == 2.5);
}

TEST_CASE("load_points failure modes") {
    SECTION("parse error names the line") {
        const auto path = write_temp("pxs_bad.csv", "x,y,class\n1,1,a\noops,2,b\n");
        CHECK_THROWS_WITH(load_points(path.string(), PointFormat::Csv),
                          Catch::Matchers::ContainsSubstring("line 3"));
    }
    SECTION("header-only file is an empty dataset") {
        const auto path = write_temp("pxs_empty.csv", "x,y,class\n");
        CHECK_THROWS_WITH(load_points(path.string(), PointFormat::Csv),
                          Catch::Matchers::ContainsSubstring("empty dataset"));
    }
    SECTION("missing column") {
        const auto path = write_temp("pxs_nocol.csv", "x,y\n1,1\n");
        CHECK_THROWS_AS(load_points(path.string(), PointFormat::Csv), InputError);
    }
    SECTION("missing file") {
        CHECK_THROWS_AS(load_points("/nonexistent/nowhere.csv", PointFormat::Csv), InputError);
    }
}

TEST_CASE("binary PXSC1 round trip") {
    PointSet ps = testsupport::random_pointset(42, 500, 7);
    const auto path = std::filesystem::temp_directory_path() / "pxs_bin.pxsc";
    save_points_binary(ps, path.string());
    const PointSet back = load_points(path.string(), PointFormat::BinaryF32);
    REQUIRE(back.size() == ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        CHECK(back.points[i].x == static_cast<double>(static_cast<float>(ps.points[i].x)));
        CHECK(back.points[i].cls == ps.points[i].cls);
    }
    SECTION("bad magic") {
        const auto bad = write_temp("pxs_badmagic.bin", "NOPE!aaaaaaaaaaaaaa");
        CHECK_THROWS_AS(load_points(bad.string(), PointFormat::BinaryF32), InputError);
    }
}

TEST_CASE("normalize maps the bounding box midpoint to the canvas midpoint") {
    PointSet ps;
    ps.points = {{0, 0, 0}, {10, 10, 0}, {5, 5, 0}};
    testsupport::finish(ps, 1);
    const PointSet out = normalize(ps, CanvasSpec{100, 100}, 0.0);
    CHECK(out.points[2].x == Catch::Approx(50.0));
    CHECK(out.points[2].y == Catch::Approx(50.0));
}

TEST_CASE("normalize sends a single point to the canvas center") {
    PointSet ps;
    ps.points = {{123.4, -77.0, 0}};
    testsupport::finish(ps, 1);
    const PointSet out = normalize(ps, CanvasSpec{64, 48}, 0.0);
    CHECK(out.points[0].x == 32.0);
    CHECK(out.points[0].y == 24.0);
}

TEST_CASE("normalize scales uniformly and centers the slack axis") {
    // bbox [0,10]x[0,5] onto a 100x100 canvas: uniform scale 10, y centered.
    PointSet ps;
    ps.points = {{0, 0, 0}, {10, 5, 0}};
    testsupport::finish(ps, 1);
    const PointSet out = normalize(ps, CanvasSpec{100, 100}, 0.0);
    CHECK(out.points[0].x == Catch::Approx(0.0));
    CHECK(out.points[0].y == Catch::Approx(25.0));
    CHECK(out.points[1].x < 100.0);
    CHECK(out.points[1].x > 100.0 - 1e-9);
    CHECK(out.points[1].y == Catch::Approx(75.0));
}

TEST_CASE("normalize is idempotent to 1e-9") {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const PointSet ps = testsupport::random_pointset(seed, 2000, 5);
        const CanvasSpec canvas{640, 480};
        const PointSet once = normalize(ps, canvas, 0.0);
        const PointSet twice = normalize(once, canvas, 0.0);
        double worst = 0.0;
        for (std::size_t i = 0; i < once.size(); ++i) {
            worst = std::max(worst, std::abs(once.points[i].x - twice.points[i].x));
            worst = std::max(worst, std::abs(once.points[i].y - twice.points[i].y));
        }
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("normalize respects margins and canvas bounds") {
    const PointSet ps = testsupport::random_pointset(9, 3000, 4);
    const CanvasSpec canvas{200, 120};
    const PointSet out = normalize(ps, canvas, 0.1);
    for (const Point& p : out.points) {
        CHECK(p.x >= 0.1 * 200 - 1e-9);
        CHECK(p.x < 0.9 * 200 + 1e-9);
        CHECK(p.y >= 0.1 * 120 - 1e-9);
        CHECK(p.y < 120.0);
    }
    CHECK_THROWS_AS(normalize(ps, canvas, 0.5), ConfigError);
    CHECK_THROWS_AS(normalize(ps, CanvasSpec{4, 4}, 0.0), ConfigError);
}

TEST_CASE("class_counts always match a brute-force recount") {
    for (std::uint64_t seed = 10; seed < 16; ++seed) {
        const PointSet ps = testsupport::random_pointset(seed, 4000, 9);
        std::vector<std::size_t> recount(ps.class_count(), 0);
        for (const Point& p : ps.points) ++recount[p.cls];
        CHECK(ps.class_counts == recount);
    }
}
