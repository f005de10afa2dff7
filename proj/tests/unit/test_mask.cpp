#include <catch2/catch_amalgamated.hpp>

#include "smallobj/mask.hpp"
#include "smallobj/rng.hpp"

#include "oracles.hpp"

using namespace smallobj;

TEST_CASE("rasterize axis-aligned square") {
    const PolygonSet polys{{0, 0, 4, 0, 4, 4, 0, 4}};
    const BinaryMask m = rasterize_polygons(polys, 8, 8);
    CHECK(mask_area(m) == 16);
    CHECK(m == oracles::rasterize_reference(polys, 8, 8));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) CHECK(m.get(x, y) == (x < 4 && y < 4));
}

TEST_CASE("rasterize empty polygon list") {
    const BinaryMask m = rasterize_polygons({}, 8, 8);
    CHECK_FALSE(m.any());
}

TEST_CASE("rasterize triangle matches point-in-polygon oracle") {
    const PolygonSet polys{{0, 0, 8, 0, 0, 8}};
    const BinaryMask m = rasterize_polygons(polys, 8, 8);
    const BinaryMask ref = oracles::rasterize_reference(polys, 8, 8);
    CHECK(m == ref);
    CHECK(mask_area(m) == mask_area(ref));
}

TEST_CASE("rasterize rejects degenerate polygons") {
    CHECK_THROWS_AS(rasterize_polygons({{0, 0, 1, 1}}, 4, 4), DegeneratePolygon);
    CHECK_THROWS_AS(rasterize_polygons({{0, 0, 1, 1, 2}}, 4, 4), DegeneratePolygon);
}

TEST_CASE("rasterization equals oracle on random simple polygons") {
    SplitMix64 rng(101);
    for (int it = 0; it < 300; ++it) {
        const int w = static_cast<int>(rng.uniform_int(1, 32));
        const int h = static_cast<int>(rng.uniform_int(1, 32));
        const PolygonSet polys{oracles::random_simple_polygon(rng, w, h)};
        const BinaryMask got = rasterize_polygons(polys, w, h);
        const BinaryMask want = oracles::rasterize_reference(polys, w, h);
        REQUIRE(got == want);
    }
}

TEST_CASE("rasterization clamps vertices outside the grid") {
    const PolygonSet polys{{-5, -5, 12, -5, 12, 12, -5, 12}};
    const BinaryMask m = rasterize_polygons(polys, 8, 8);
    CHECK(mask_area(m) == 64);
    CHECK(m == oracles::rasterize_reference(polys, 8, 8));
}

TEST_CASE("rle_decode basics") {
    CHECK_FALSE(rle_decode({2, 2, {4}}).any());

    const BinaryMask ones = rle_decode({2, 2, {0, 4}});
    CHECK(mask_area(ones) == 4);
    CHECK(ones == oracles::rle_decode_reference({2, 2, {0, 4}}));

    const BinaryMask single = rle_decode({3, 3, {1, 1, 7}});
    CHECK(mask_area(single) == 1);
    CHECK(single.get(0, 1));
    CHECK(single == oracles::rle_decode_reference({3, 3, {1, 1, 7}}));
}

TEST_CASE("rle_decode rejects bad sums") {
    CHECK_THROWS_AS(rle_decode({2, 2, {3}}), LengthMismatch);
    CHECK_THROWS_AS(rle_decode({2, 2, {5}}), LengthMismatch);
}

TEST_CASE("rle_encode basics") {
    CHECK(rle_encode(BinaryMask(3, 3)).counts == std::vector<std::uint32_t>{9});
    BinaryMask m(3, 3);
    m.set(0, 1);
    CHECK(rle_encode(m).counts == std::vector<std::uint32_t>{1, 1, 7});
}

TEST_CASE("rle roundtrip on random masks") {
    SplitMix64 rng(202);
    for (int it = 0; it < 1000; ++it) {
        const BinaryMask m = oracles::random_mask(rng, 64);
        const RunLengthCounts r = rle_encode(m);
        REQUIRE(rle_decode(r) == m);
        // canonical: counts[0] counts zeros, interior runs are positive
        if (m.any() && m.get(0, 0)) REQUIRE(r.counts[0] == 0);
        for (std::size_t i = 1; i < r.counts.size(); ++i) REQUIRE(r.counts[i] > 0);
    }
}

struct RleVector {
    int height, width;
    const char* bits;  // row-major
    const char* expected;
};
#include "rle_vectors.inc"

TEST_CASE("COCO compressed counts string matches frozen reference vectors") {
    for (const RleVector& v : kRleVectors) {
        BinaryMask m(v.width, v.height);
        for (int y = 0; y < v.height; ++y)
            for (int x = 0; x < v.width; ++x)
                if (v.bits[y * v.width + x] == '1') m.set(x, y);
        const RunLengthCounts counts = rle_encode(m);
        CHECK(rle_to_string(counts) == v.expected);
        const RunLengthCounts back = rle_from_string(v.expected, v.height, v.width);
        CHECK(back == counts);
        CHECK(rle_decode(back) == m);
    }
}

TEST_CASE("counts string roundtrip on random masks") {
    SplitMix64 rng(303);
    for (int it = 0; it < 500; ++it) {
        const BinaryMask m = oracles::random_mask(rng, 48);
        const RunLengthCounts r = rle_encode(m);
        const std::string s = rle_to_string(r);
        REQUIRE(rle_from_string(s, r.height, r.width) == r);
    }
}

TEST_CASE("counts string rejects malformed input") {
    CHECK_THROWS_AS(rle_from_string("\x20", 2, 2), MaskError);   // below offset
    CHECK_THROWS_AS(rle_from_string("aaaaaaaaaaaaaaaa", 4, 4), MaskError);  // unterminated varint
}

TEST_CASE("mask_bbox") {
    const BinaryMask block = rasterize_polygons({{0, 0, 4, 0, 4, 4, 0, 4}}, 8, 8);
    CHECK(mask_bbox(block) == PixelBox{0, 0, 4, 4});
    CHECK_FALSE(mask_bbox(BinaryMask(5, 5)).has_value());

    SplitMix64 rng(404);
    for (int it = 0; it < 200; ++it) {
        const BinaryMask m = oracles::random_mask(rng, 48);
        REQUIRE(mask_bbox(m) == oracles::bbox_reference(m));
    }
}

TEST_CASE("mask_area") {
    CHECK(mask_area(BinaryMask(4, 4)) == 0);
    BinaryMask full(5, 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x) full.set(x, y);
    CHECK(mask_area(full) == 25);

    SplitMix64 rng(505);
    for (int it = 0; it < 200; ++it) {
        const BinaryMask m = oracles::random_mask(rng, 48);
        REQUIRE(mask_area(m) == oracles::area_reference(m));
    }
}

static BinaryMask full_mask(int w, int h) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) m.set(x, y);
    return m;
}

TEST_CASE("scale_mask") {
    SECTION("identity") {
        SplitMix64 rng(606);
        const BinaryMask m = oracles::random_mask(rng, 20);
        CHECK(scale_mask(m, 1.0) == m);
    }
    SECTION("solid block up and down") {
        const BinaryMask up = scale_mask(full_mask(10, 10), 1.2);
        CHECK(up.width() == 12);
        CHECK(up.height() == 12);
        CHECK(mask_area(up) == 144);
        const BinaryMask down = scale_mask(full_mask(10, 10), 0.8);
        CHECK(down.width() == 8);
        CHECK(mask_area(down) == 64);
    }
    SECTION("solid rectangles scale to round(w*f) * round(h*f) exactly") {
        SplitMix64 rng(707);
        for (int it = 0; it < 200; ++it) {
            const int w = static_cast<int>(rng.uniform_int(1, 30));
            const int h = static_cast<int>(rng.uniform_int(1, 30));
            const double f = rng.uniform(0.3, 2.5);
            if (std::llround(w * f) < 1 || std::llround(h * f) < 1) continue;
            const BinaryMask scaled = scale_mask(full_mask(w, h), f);
            REQUIRE(mask_area(scaled) ==
                    static_cast<std::size_t>(std::llround(w * f)) *
                        static_cast<std::size_t>(std::llround(h * f)));
        }
    }
    SECTION("degenerate output") {
        CHECK_THROWS_AS(scale_mask(full_mask(1, 1), 0.2), DegenerateOutput);
        CHECK_THROWS_AS(scale_mask(full_mask(4, 4), -1.0), DegenerateOutput);
    }
}

TEST_CASE("rotate_mask") {
    SECTION("zero angle is identity") {
        SplitMix64 rng(808);
        const BinaryMask m = oracles::random_mask(rng, 20);
        CHECK(rotate_mask(m, 0.0) == m);
    }
    SECTION("90 degrees is a lattice symmetry") {
        const BinaryMask sq = full_mask(13, 13);
        const BinaryMask rot = rotate_mask(sq, 90.0);
        CHECK(rot.width() == 13);
        CHECK(rot.height() == 13);
        CHECK(mask_area(rot) == mask_area(sq));
        SplitMix64 rng(909);
        const BinaryMask m = oracles::random_mask(rng, 17);
        CHECK(mask_area(rotate_mask(m, 90.0)) == mask_area(m));
        CHECK(mask_area(rotate_mask(m, -90.0)) == mask_area(m));
        CHECK(mask_area(rotate_mask(m, 180.0)) == mask_area(m));
    }
    SECTION("15 degrees keeps a solid square's area within 5%") {
        const BinaryMask rot = rotate_mask(full_mask(20, 20), 15.0);
        const double area = static_cast<double>(mask_area(rot));
        CHECK(area > 0.95 * 400);
        CHECK(area < 1.05 * 400);
    }
    SECTION("every set output pixel inverse-maps to a set input pixel") {
        SplitMix64 rng(1010);
        for (int it = 0; it < 50; ++it) {
            const BinaryMask m = oracles::random_mask(rng, 24);
            const double angle = rng.uniform(-180.0, 180.0);
            const BinaryMask rot = rotate_mask(m, angle);
            const RotationGeometry g = rotation_geometry(m.width(), m.height(), angle);
            for (int y = 0; y < rot.height(); ++y)
                for (int x = 0; x < rot.width(); ++x) {
                    if (!rot.get(x, y)) continue;
                    const auto [ix, iy] = rotation_source_point(g, x, y);
                    const int xi = static_cast<int>(std::floor(ix));
                    const int yi = static_cast<int>(std::floor(iy));
                    REQUIRE(xi >= 0);
                    REQUIRE(yi >= 0);
                    REQUIRE(xi < m.width());
                    REQUIRE(yi < m.height());
                    REQUIRE(m.get(xi, yi));
                }
        }
    }
}

TEST_CASE("masks_overlap") {
    const BinaryMask a = full_mask(4, 4);
    CHECK(masks_overlap(a, 3, 3, a, 3, 3));
    CHECK_FALSE(masks_overlap(a, 0, 0, a, 4, 0));
    CHECK_FALSE(masks_overlap(a, 0, 0, a, 0, 4));

    SECTION("interleaved pixels inside touching boxes") {
        BinaryMask odd(4, 4), even(4, 4);
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 4; ++x)
                ((x + y) % 2 ? odd : even).set(x, y);
        CHECK_FALSE(masks_overlap(odd, 0, 0, even, 0, 0));
        CHECK(masks_overlap(odd, 1, 0, even, 0, 0));
    }

    SECTION("matches brute force and is symmetric") {
        SplitMix64 rng(1111);
        for (int it = 0; it < 300; ++it) {
            const BinaryMask a2 = oracles::random_mask(rng, 16);
            const BinaryMask b2 = oracles::random_mask(rng, 16);
            const int ax = static_cast<int>(rng.uniform_int(-8, 8));
            const int ay = static_cast<int>(rng.uniform_int(-8, 8));
            const int bx = static_cast<int>(rng.uniform_int(-8, 8));
            const int by = static_cast<int>(rng.uniform_int(-8, 8));
            const bool got = masks_overlap(a2, ax, ay, b2, bx, by);
            REQUIRE(got == oracles::overlap_reference(a2, ax, ay, b2, bx, by));
            REQUIRE(got == masks_overlap(b2, bx, by, a2, ax, ay));
        }
    }
}

TEST_CASE("embed and or_into clip to the destination") {
    BinaryMask src = full_mask(3, 3);
    const BinaryMask embedded = embed_mask(src, 4, 4, 2, 2);
    CHECK(mask_area(embedded) == 4);
    CHECK(embedded.get(2, 2));
    CHECK(embedded.get(3, 3));
    BinaryMask dst(4, 4);
    mask_or_into(dst, src, -1, -1);
    CHECK(mask_area(dst) == 4);
    CHECK(dst.get(0, 0));
    CHECK(dst.get(1, 1));
}
