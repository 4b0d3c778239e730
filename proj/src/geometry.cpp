#include "comet/geometry.hpp"

#include "comet/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace comet::geometry {

double ring_signed_area(const Ring& ring) {
    const std::size_t n = ring.size();
    if (n < 3) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % n];
        acc += a.x * b.y - b.x * a.y;
    }
    return 0.5 * acc;
}

namespace {

// Signed-area-weighted first moment of one ring.
void ring_moment(const Ring& ring, double& area, double& mx, double& my) {
    const std::size_t n = ring.size();
    area = 0.0;
    mx = 0.0;
    my = 0.0;
    if (n < 3) return;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& a = ring[i];
        const Point& b = ring[(i + 1) % n];
        const double cross = a.x * b.y - b.x * a.y;
        area += cross;
        mx += (a.x + b.x) * cross;
        my += (a.y + b.y) * cross;
    }
    area *= 0.5;
    mx /= 6.0;
    my /= 6.0;
}

} // namespace

Point centroid(const Shape& shape) {
    double total_area = 0.0;
    double total_mx = 0.0;
    double total_my = 0.0;
    for (const Polygon& poly : shape.polygons) {
        for (std::size_t r = 0; r < poly.rings.size(); ++r) {
            double area, mx, my;
            ring_moment(poly.rings[r], area, mx, my);
            // Exterior rings should be positive, holes negative; normalize by
            // ring role so malformed winding still behaves.
            const double sign = (r == 0) ? 1.0 : -1.0;
            const double mag = std::abs(area);
            total_area += sign * mag;
            if (area != 0.0) {
                const double flip = sign * (area > 0.0 ? 1.0 : -1.0);
                total_mx += flip * mx;
                total_my += flip * my;
            }
        }
    }
    if (std::abs(total_area) < 1e-12) {
        throw Error(ErrorKind::DegenerateGeometry, "shape has zero net area; centroid undefined");
    }
    return {total_mx / total_area, total_my / total_area};
}

double shape_area(const Shape& shape) {
    double total = 0.0;
    for (const Polygon& poly : shape.polygons) {
        for (std::size_t r = 0; r < poly.rings.size(); ++r) {
            const double mag = std::abs(ring_signed_area(poly.rings[r]));
            total += (r == 0) ? mag : -mag;
        }
    }
    return total;
}

namespace {

bool point_on_segment(const Point& p, const Point& a, const Point& b) {
    const double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
    if (std::abs(cross) > 1e-12) return false;
    const double dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
    if (dot < -1e-12) return false;
    const double len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
    return dot <= len2 + 1e-12;
}

bool point_in_ring(const Point& p, const Ring& ring) {
    const std::size_t n = ring.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = ring[i];
        const Point& b = ring[j];
        if (point_on_segment(p, a, b)) return true; // boundary counts
        const bool crosses = (a.y > p.y) != (b.y > p.y);
        if (crosses) {
            const double x_at = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x_at) inside = !inside;
        }
    }
    return inside;
}

} // namespace

bool point_in_shape(const Point& p, const Shape& shape) {
    for (const Polygon& poly : shape.polygons) {
        if (poly.rings.empty()) continue;
        if (!point_in_ring(p, poly.rings[0])) continue;
        bool in_hole = false;
        for (std::size_t r = 1; r < poly.rings.size(); ++r) {
            Ring const& hole = poly.rings[r];
            // Boundary of a hole still touches the polygon.
            bool on_hole_edge = false;
            const std::size_t n = hole.size();
            for (std::size_t i = 0, j = n ? n - 1 : 0; i < n; j = i++) {
                if (point_on_segment(p, hole[i], hole[j])) { on_hole_edge = true; break; }
            }
            if (on_hole_edge) continue;
            if (point_in_ring(p, hole)) { in_hole = true; break; }
        }
        if (!in_hole) return true;
    }
    return false;
}

namespace {

int orientation(const Point& a, const Point& b, const Point& c) {
    const double v = (b.y - a.y) * (c.x - b.x) - (b.x - a.x) * (c.y - b.y);
    if (std::abs(v) < 1e-12) return 0;
    return v > 0.0 ? 1 : 2;
}

bool on_segment_colinear(const Point& a, const Point& b, const Point& c) {
    return b.x <= std::max(a.x, c.x) + 1e-12 && b.x >= std::min(a.x, c.x) - 1e-12 &&
           b.y <= std::max(a.y, c.y) + 1e-12 && b.y >= std::min(a.y, c.y) - 1e-12;
}

} // namespace

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment_colinear(p1, q1, p2)) return true;
    if (o2 == 0 && on_segment_colinear(p1, q2, p2)) return true;
    if (o3 == 0 && on_segment_colinear(q1, p1, q2)) return true;
    if (o4 == 0 && on_segment_colinear(q1, p2, q2)) return true;
    return false;
}

BoundingBox bounding_box(const Shape& shape) {
    BoundingBox box;
    box.min_x = box.min_y = std::numeric_limits<double>::infinity();
    box.max_x = box.max_y = -std::numeric_limits<double>::infinity();
    for (const Polygon& poly : shape.polygons) {
        for (const Ring& ring : poly.rings) {
            for (const Point& p : ring) {
                box.min_x = std::min(box.min_x, p.x);
                box.min_y = std::min(box.min_y, p.y);
                box.max_x = std::max(box.max_x, p.x);
                box.max_y = std::max(box.max_y, p.y);
            }
        }
    }
    return box;
}

namespace {

bool boxes_overlap(const BoundingBox& a, const BoundingBox& b) {
    return a.min_x <= b.max_x && b.min_x <= a.max_x && a.min_y <= b.max_y && b.min_y <= a.max_y;
}

} // namespace

bool shapes_intersect(const Shape& a, const Shape& b) {
    if (!boxes_overlap(bounding_box(a), bounding_box(b))) return false;
    // Any edge pair crossing?
    for (const Polygon& pa : a.polygons) {
        for (const Ring& ra : pa.rings) {
            const std::size_t na = ra.size();
            for (std::size_t i = 0; i < na; ++i) {
                const Point& a1 = ra[i];
                const Point& a2 = ra[(i + 1) % na];
                for (const Polygon& pb : b.polygons) {
                    for (const Ring& rb : pb.rings) {
                        const std::size_t nb = rb.size();
                        for (std::size_t j = 0; j < nb; ++j) {
                            if (segments_intersect(a1, a2, rb[j], rb[(j + 1) % nb])) return true;
                        }
                    }
                }
            }
        }
    }
    // Full containment: either shape holds a vertex of the other.
    for (const Polygon& pa : a.polygons) {
        for (const Ring& ra : pa.rings) {
            if (!ra.empty() && point_in_shape(ra[0], b)) return true;
        }
    }
    for (const Polygon& pb : b.polygons) {
        for (const Ring& rb : pb.rings) {
            if (!rb.empty() && point_in_shape(rb[0], a)) return true;
        }
    }
    return false;
}

} // namespace comet::geometry
