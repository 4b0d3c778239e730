#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "comet/error.hpp"
#include "comet/geojson.hpp"
#include "comet/geometry.hpp"
#include "comet/graph.hpp"
#include "comet/rng.hpp"
#include "comet/spatial.hpp"
#include "comet/stats.hpp"
#include "testutil.hpp"

#include <cmath>

using namespace comet;
using testutil::TempDir;
using testutil::write_file;

namespace {

geometry::Shape rect(double x0, double y0, double x1, double y1) {
    geometry::Shape s;
    s.polygons.push_back({{{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}}});
    return s;
}

} // namespace

// ----------------------------------------------------------------- geometry

TEST_CASE("centroid: unit square, right triangle, L-shape, square with hole") {
    CHECK(geometry::centroid(rect(0, 0, 1, 1)).x == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(geometry::centroid(rect(0, 0, 1, 1)).y == doctest::Approx(0.5).epsilon(1e-12));

    geometry::Shape tri;
    tri.polygons.push_back({{{{0, 0}, {2, 0}, {0, 2}}}});
    const auto tc = geometry::centroid(tri);
    CHECK(tc.x == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(tc.y == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // Union of [0,2]x[0,1] and [0,1]x[1,2]: area 3, centroid (2.5/3, 2.5/3).
    geometry::Shape ell;
    ell.polygons.push_back({{{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}}});
    const auto lc = geometry::centroid(ell);
    CHECK(lc.x == doctest::Approx(2.5 / 3.0).epsilon(1e-12));
    CHECK(lc.y == doctest::Approx(2.5 / 3.0).epsilon(1e-12));
    CHECK(geometry::shape_area(ell) == doctest::Approx(3.0).epsilon(1e-12));

    // 4x4 square minus a unit hole centered at (1,1): centroid (31/15, 31/15).
    geometry::Shape holed = rect(0, 0, 4, 4);
    holed.polygons[0].rings.push_back({{0.5, 0.5}, {1.5, 0.5}, {1.5, 1.5}, {0.5, 1.5}});
    const auto hc = geometry::centroid(holed);
    CHECK(hc.x == doctest::Approx(31.0 / 15.0).epsilon(1e-12));
    CHECK(hc.y == doctest::Approx(31.0 / 15.0).epsilon(1e-12));
    CHECK(geometry::shape_area(holed) == doctest::Approx(15.0).epsilon(1e-12));

    // Hole winding must not matter: reversed hole ring gives the same answer.
    geometry::Shape holed2 = rect(0, 0, 4, 4);
    holed2.polygons[0].rings.push_back({{0.5, 1.5}, {1.5, 1.5}, {1.5, 0.5}, {0.5, 0.5}});
    CHECK(geometry::centroid(holed2).x == doctest::Approx(31.0 / 15.0).epsilon(1e-12));
}

TEST_CASE("centroid of a degenerate (zero-area) shape throws") {
    geometry::Shape line;
    line.polygons.push_back({{{{0, 0}, {1, 1}, {2, 2}}}});
    try {
        geometry::centroid(line);
        FAIL("expected DegenerateGeometry");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateGeometry);
    }
}

TEST_CASE("multipolygon centroid weights parts by area") {
    // Two unit squares, centers (0.5, 0.5) and (4.5, 0.5): centroid midway.
    geometry::Shape two = rect(0, 0, 1, 1);
    two.polygons.push_back(rect(4, 0, 5, 1).polygons[0]);
    const auto c = geometry::centroid(two);
    CHECK(c.x == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(c.y == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("point_in_shape: even-odd with holes, boundary counts inside") {
    geometry::Shape holed = rect(0, 0, 4, 4);
    holed.polygons[0].rings.push_back({{1, 1}, {2, 1}, {2, 2}, {1, 2}});
    CHECK(geometry::point_in_shape({3, 3}, holed));
    CHECK_FALSE(geometry::point_in_shape({1.5, 1.5}, holed)); // inside the hole
    CHECK_FALSE(geometry::point_in_shape({5, 5}, holed));
    CHECK(geometry::point_in_shape({0, 0}, holed));   // corner
    CHECK(geometry::point_in_shape({2, 0}, holed));   // edge
    CHECK(geometry::point_in_shape({4, 4}, holed));   // far corner
}

TEST_CASE("segments_intersect: crossing, touching, collinear, disjoint") {
    using geometry::Point;
    CHECK(geometry::segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
    CHECK(geometry::segments_intersect({0, 0}, {1, 1}, {1, 1}, {2, 0}));     // shared endpoint
    CHECK(geometry::segments_intersect({0, 0}, {2, 0}, {1, 0}, {3, 0}));     // collinear overlap
    CHECK_FALSE(geometry::segments_intersect({0, 0}, {1, 0}, {2, 0}, {3, 0})); // collinear gap
    CHECK_FALSE(geometry::segments_intersect({0, 0}, {1, 1}, {0, 1}, {1, 2})); // parallel
    CHECK(geometry::segments_intersect({0, 0}, {4, 0}, {2, 0}, {2, 3}));     // T contact
}

TEST_CASE("shapes_intersect: basic configurations") {
    CHECK(geometry::shapes_intersect(rect(0, 0, 2, 2), rect(1, 1, 3, 3)));   // overlap
    CHECK(geometry::shapes_intersect(rect(0, 0, 2, 2), rect(2, 0, 4, 2)));   // shared edge
    CHECK(geometry::shapes_intersect(rect(0, 0, 2, 2), rect(2, 2, 3, 3)));   // corner touch
    CHECK(geometry::shapes_intersect(rect(0, 0, 4, 4), rect(1, 1, 2, 2)));   // containment
    CHECK(geometry::shapes_intersect(rect(1, 1, 2, 2), rect(0, 0, 4, 4)));   // containment, flipped
    CHECK_FALSE(geometry::shapes_intersect(rect(0, 0, 1, 1), rect(5, 5, 6, 6))); // bbox-disjoint
    CHECK_FALSE(geometry::shapes_intersect(rect(0, 0, 1, 1), rect(1.1, 0, 2, 1)));
}

TEST_CASE("shapes_intersect agrees with a grid-sampling oracle") {
    Rng rng(2024);
    auto random_rect = [&] {
        const double x0 = rng.uniform() * 4.0;
        const double y0 = rng.uniform() * 4.0;
        return rect(x0, y0, x0 + 0.3 + rng.uniform() * 2.0, y0 + 0.3 + rng.uniform() * 2.0);
    };
    for (int trial = 0; trial < 200; ++trial) {
        const auto a = random_rect();
        const auto b = random_rect();
        bool sampled = false;
        for (double x = 0.0; x <= 7.0 && !sampled; x += 0.05)
            for (double y = 0.0; y <= 7.0; y += 0.05)
                if (geometry::point_in_shape({x, y}, a) && geometry::point_in_shape({x, y}, b)) {
                    sampled = true;
                    break;
                }
        // A witnessed common point forces an intersection verdict. The
        // converse can differ only by sub-grid contacts, so it stays one-way.
        if (sampled) CHECK(geometry::shapes_intersect(a, b));
        const auto ba = geometry::bounding_box(a);
        const auto bb = geometry::bounding_box(b);
        if (ba.max_x < bb.min_x || bb.max_x < ba.min_x || ba.max_y < bb.min_y ||
            bb.max_y < ba.min_y)
            CHECK_FALSE(geometry::shapes_intersect(a, b));
    }
}

TEST_CASE("bounding_box spans all polygons") {
    geometry::Shape two = rect(0, 0, 1, 1);
    two.polygons.push_back(rect(4, -2, 5, 1).polygons[0]);
    const auto bb = geometry::bounding_box(two);
    CHECK(bb.min_x == 0.0);
    CHECK(bb.min_y == -2.0);
    CHECK(bb.max_x == 5.0);
    CHECK(bb.max_y == 1.0);
}

// ------------------------------------------------------------------ geojson

namespace {

const char* kTwoSets = R"({
  "type": "FeatureCollection",
  "features": [
    {"type": "Feature", "properties": {"set_id": "alpha", "note": "a"},
     "geometry": {"type": "Polygon", "coordinates": [[[0,0],[1,0],[1,1],[0,1],[0,0]]]}},
    {"type": "Feature", "properties": {"set_id": "beta"},
     "geometry": {"type": "MultiPolygon", "coordinates":
       [[[[2,0],[3,0],[3,1],[2,1],[2,0]]], [[[4,0],[5,0],[5,1],[4,1],[4,0]]]]}}
  ]
})";

} // namespace

TEST_CASE("geojson: polygons and multipolygons load; closing vertices drop") {
    auto fc = geo::parse_feature_collection(nlohmann::json::parse(kTwoSets), "set_id");
    REQUIRE(fc.features.size() == 2);
    CHECK(fc.features[0].id == "alpha");
    REQUIRE(fc.features[0].shape.polygons.size() == 1);
    CHECK(fc.features[0].shape.polygons[0].rings[0].size() == 4); // closing vertex dropped
    CHECK(fc.features[1].shape.polygons.size() == 2);
    CHECK(fc.features[0].properties.at("note") == "a");
}

TEST_CASE("geojson: missing or duplicate ids are malformed") {
    auto doc = nlohmann::json::parse(kTwoSets);
    doc["features"][1]["properties"].erase("set_id");
    CHECK_THROWS_AS(geo::parse_feature_collection(doc, "set_id"), Error);

    auto dup = nlohmann::json::parse(kTwoSets);
    dup["features"][1]["properties"]["set_id"] = "alpha";
    try {
        geo::parse_feature_collection(dup, "set_id");
        FAIL("expected MalformedRecord");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MalformedRecord);
    }

    auto point = nlohmann::json::parse(kTwoSets);
    point["features"][0]["geometry"] = {{"type", "Point"}, {"coordinates", {0, 0}}};
    CHECK_THROWS_AS(geo::parse_feature_collection(point, "set_id"), Error);
}

TEST_CASE("geojson round-trip preserves ids, rings and properties") {
    TempDir dir("geojson_rt");
    write_file(dir.file("sets.geojson"), kTwoSets);
    auto fc = geo::load_feature_collection(dir.file("sets.geojson"), "set_id");
    std::map<std::string, nlohmann::json> extra;
    extra["alpha"] = {{"affiliates", 12}};
    geo::save_feature_collection(dir.file("out.geojson"), fc, extra);
    auto back = geo::load_feature_collection(dir.file("out.geojson"), "set_id");
    REQUIRE(back.features.size() == 2);
    CHECK(back.features[0].id == fc.features[0].id);
    CHECK(back.features[0].shape.polygons[0].rings[0].size() == 4);
    CHECK(back.features[0].properties.at("affiliates") == 12);
    CHECK(back.features[0].properties.at("note") == "a");
    // Same geometry after the round trip.
    const auto c1 = geometry::centroid(fc.features[1].shape);
    const auto c2 = geometry::centroid(back.features[1].shape);
    CHECK(c1.x == doctest::Approx(c2.x).epsilon(1e-12));
    CHECK(c1.y == doctest::Approx(c2.y).epsilon(1e-12));
}

// -------------------------------------------------------------------- stats

TEST_CASE("pearson: hand-checked r = 0.6 and exact negatives") {
    auto res = stats::pearson({1, 2, 3, 4}, {2, 1, 4, 3});
    CHECK(res.r == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(res.n == 4);
    // t = r * sqrt((n-2)/(1-r^2)) = 0.6 * sqrt(2/0.64) = 1.06066...
    CHECK(res.t == doctest::Approx(0.6 * std::sqrt(2.0 / 0.64)).epsilon(1e-12));

    auto neg = stats::pearson({1, 2, 3, 4, 5}, {5, 4, 3, 2, 1});
    CHECK(neg.r == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(neg.p_value < 1e-6);
}

TEST_CASE("pearson input validation") {
    CHECK_THROWS_AS(stats::pearson({1, 1, 1}, {1, 2, 3}), Error);      // zero variance
    CHECK_THROWS_AS(stats::pearson({1, 2}, {1, 2, 3}), Error);         // length mismatch
    CHECK_THROWS_AS(stats::pearson({1, 2}, {3, 4}), Error);            // n < 3
    try {
        stats::pearson({2, 2, 2, 2}, {1, 2, 3, 4});
        FAIL("expected ZeroVariance");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ZeroVariance);
    }
}

TEST_CASE("incomplete beta and t-distribution identities") {
    CHECK(stats::incomplete_beta(0.5, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(stats::incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(stats::incomplete_beta(2.0, 3.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(stats::log_gamma(5.0) == doctest::Approx(std::log(24.0)).epsilon(1e-10));
    CHECK(stats::log_gamma(0.5) == doctest::Approx(0.5 * std::log(3.14159265358979323846)).epsilon(1e-10));

    CHECK(stats::t_test_p_value(0.0, 10.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(stats::t_test_p_value(2.5, 12.0) ==
          doctest::Approx(stats::t_test_p_value(-2.5, 12.0)).epsilon(1e-12));
    CHECK(stats::t_test_p_value(50.0, 20.0) < 1e-10);
    // Cauchy special case: df = 1, p = 2 * (1 - atan(t)/pi - 1/2) at t = 1 -> 0.5.
    CHECK(stats::t_test_p_value(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("mean and population sd") {
    CHECK(stats::mean({1, 2, 3, 4}) == doctest::Approx(2.5));
    CHECK(stats::population_sd({1, 2, 3}) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
}

// ------------------------------------------------------------------ spatial

TEST_CASE("point distances: projected 3-4-5 and geographic degree arcs") {
    using spatial::CrsKind;
    CHECK(spatial::point_distance_m({0, 0}, {3, 4}, CrsKind::projected_meters, 0.0) ==
          doctest::Approx(5.0).epsilon(1e-12));
    // Translation invariance in projected coordinates.
    CHECK(spatial::point_distance_m({100, 100}, {103, 104}, CrsKind::projected_meters, 0.0) ==
          doctest::Approx(5.0).epsilon(1e-12));
    // 0.01 degrees of latitude.
    CHECK(spatial::point_distance_m({0, 0}, {0, 0.01}, CrsKind::geographic_degrees, 0.005) ==
          doctest::Approx(1111.95).epsilon(1e-9));
    // 0.01 degrees of longitude at latitude 60: scaled by cos(60 deg) = 0.5.
    CHECK(spatial::point_distance_m({0, 60}, {0.01, 60}, CrsKind::geographic_degrees, 60.0) ==
          doctest::Approx(555.975).epsilon(1e-9));
}

namespace {

geo::FeatureCollection three_squares() {
    // Unit squares with centroids (0.5, 0.5), (3.5, 0.5), (0.5, 4.5).
    geo::FeatureCollection fc;
    fc.features.push_back({"a", rect(0, 0, 1, 1), {{"set_id", "a"}}});
    fc.features.push_back({"b", rect(3, 0, 4, 1), {{"set_id", "b"}}});
    fc.features.push_back({"c", rect(0, 4, 1, 5), {{"set_id", "c"}}});
    return fc;
}

} // namespace

TEST_CASE("distance_matrix: projected centroids, missing ids rejected") {
    auto fc = three_squares();
    auto m = spatial::distance_matrix(fc, spatial::CrsKind::projected_meters, {"a", "b", "c"});
    CHECK(m.at("a", "b") == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m.at("a", "c") == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(m.at("b", "c") == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(m.at("b", "a") == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(m.at("a", "a") == 0.0);
    try {
        spatial::distance_matrix(fc, spatial::CrsKind::projected_meters, {"a", "zz"});
        FAIL("expected MissingSet");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MissingSet);
    }
}

TEST_CASE("layer_centroids picks up every feature") {
    auto cents = spatial::layer_centroids(three_squares());
    REQUIRE(cents.size() == 3);
    CHECK(cents.at("b").x == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(cents.at("c").y == doctest::Approx(4.5).epsilon(1e-12));
}

TEST_CASE("set_comention_matrix normalizes by person pairs") {
    affiliation::Roster roster;
    roster.members = {{"a1", "alpha", "x", 0.9, 8},
                      {"a2", "alpha", "x", 0.9, 8},
                      {"b1", "beta", "x", 0.9, 8},
                      {"b2", "beta", "x", 0.9, 8},
                      {"b3", "beta", "x", 0.9, 8}};
    roster.sets = {{"alpha", "x", 2, true}, {"beta", "x", 3, true}};
    graph::ComentionGraph g;
    for (const auto& m : roster.members) g.add_node({m.alias_key, m.set_id, m.nation_id, {}});
    g.add_comention(0, 2, 3); // a1-b1 weight 3
    g.add_comention(1, 4, 2); // a2-b3 weight 2
    g.add_comention(0, 1, 9); // within alpha; must not leak across
    auto m = spatial::set_comention_matrix(g, roster);
    CHECK(m.at("alpha", "beta") == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(m.at("beta", "alpha") == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(m.at("alpha", "alpha") == 0.0);
}

TEST_CASE("upper_triangle_correlation matches a direct pearson call") {
    spatial::SetMatrix a, b;
    a.set_ids = b.set_ids = {"p", "q", "r", "s"};
    a.values = {{0, 1, 2, 3}, {1, 0, 4, 5}, {2, 4, 0, 6}, {3, 5, 6, 0}};
    b.values = {{0, 2, 1, 4}, {2, 0, 3, 7}, {1, 3, 0, 5}, {4, 7, 5, 0}};
    auto res = spatial::upper_triangle_correlation(a, b);
    auto direct = stats::pearson({1, 2, 3, 4, 5, 6}, {2, 1, 4, 3, 7, 5});
    CHECK(res.r == doctest::Approx(direct.r).epsilon(1e-12));
    CHECK(res.n == 6);
}

TEST_CASE("beat_validation: modal beats, ties, unknown beats") {
    geo::FeatureCollection sets;
    sets.features.push_back({"alpha", rect(0, 0, 2, 2), {{"set_id", "alpha"}}});
    sets.features.push_back({"beta", rect(10, 10, 12, 12), {{"set_id", "beta"}}});
    geo::FeatureCollection beats;
    beats.features.push_back({"b1", rect(1, 1, 3, 3), {{"beat_id", "b1"}}});   // meets alpha
    beats.features.push_back({"b2", rect(5, 5, 6, 6), {{"beat_id", "b2"}}});   // meets nothing
    beats.features.push_back({"b3", rect(11, 11, 13, 13), {{"beat_id", "b3"}}}); // meets beta

    std::vector<spatial::ArrestRow> arrests = {
        {"p1", "alpha", "b1"}, {"p2", "alpha", "b1"}, {"p3", "alpha", "b2"},
        {"p4", "beta", "b2"},  {"p5", "beta", "b3"},
        {"p6", "ghost", "b1"}, // set not in the layer: ignored
    };
    auto rows = spatial::beat_validation(sets, beats, arrests);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].set_id == "alpha");
    REQUIRE(rows[0].modal_beats.size() == 1);
    CHECK(rows[0].modal_beats[0] == "b1");
    CHECK(rows[0].modal_count == 2);
    CHECK_FALSE(rows[0].ambiguous);
    CHECK(rows[0].intersects);
    CHECK(rows[0].total_arrests == 3);

    CHECK(rows[1].set_id == "beta");
    CHECK(rows[1].ambiguous); // b2 and b3 tie at one arrest each
    REQUIRE(rows[1].modal_beats.size() == 2);
    CHECK(rows[1].modal_beats[0] == "b2");
    CHECK(rows[1].modal_beats[1] == "b3");
    CHECK(rows[1].intersects); // b3 touches beta

    arrests.push_back({"p7", "alpha", "nowhere"});
    try {
        spatial::beat_validation(sets, beats, arrests);
        FAIL("expected UnknownBeatId");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UnknownBeatId);
    }
}

TEST_CASE("load_arrests accepts a header and column reordering") {
    TempDir dir("arrests");
    write_file(dir.file("arrests.csv"),
               "beat_id,person_id,set_id\nb1,p1,alpha\nb2,p2,beta\n");
    auto rows = spatial::load_arrests(dir.file("arrests.csv"));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].person_id == "p1");
    CHECK(rows[0].set_id == "alpha");
    CHECK(rows[0].beat_id == "b1");
}
