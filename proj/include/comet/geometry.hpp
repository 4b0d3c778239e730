#pragma once

#include <vector>

namespace comet::geometry {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// One ring, without the closing duplicate vertex. First ring of a polygon is
// the exterior; any further rings are holes (even-odd semantics).
using Ring = std::vector<Point>;

struct Polygon {
    std::vector<Ring> rings;
};

// Multipolygon support: a shape is one or more polygons.
struct Shape {
    std::vector<Polygon> polygons;
};

double ring_signed_area(const Ring& ring);

// Area-weighted centroid via the shoelace formula; holes subtract.
// Throws DegenerateGeometry when the net area vanishes.
Point centroid(const Shape& shape);

double shape_area(const Shape& shape);

// Even-odd test over all rings of all polygons; boundary points count as
// inside for this toolkit's purposes.
bool point_in_shape(const Point& p, const Shape& shape);

// True when the interiors or boundaries meet: any edge crossing, or either
// shape holding a vertex of the other. Bounding boxes prefilter.
bool shapes_intersect(const Shape& a, const Shape& b);

struct BoundingBox {
    double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
};

BoundingBox bounding_box(const Shape& shape);

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2);

} // namespace comet::geometry
