#pragma once

#include "comet/geojson.hpp"
#include "comet/geometry.hpp"
#include "comet/stats.hpp"

#include <map>
#include <string>
#include <vector>

namespace comet::graph {
class ComentionGraph;
}
namespace comet::affiliation {
struct Roster;
}

namespace comet::spatial {

enum class CrsKind { geographic_degrees, projected_meters };

// Meridian arc length per degree; also used for longitude after scaling by
// cos(mean latitude).
inline constexpr double kMetersPerDegree = 111195.0;

struct SetMatrix {
    std::vector<std::string> set_ids;   // sorted; row/col order
    std::vector<std::vector<double>> values;

    double at(const std::string& s, const std::string& t) const;
};

// Area-weighted centroid per feature id.
std::map<std::string, geometry::Point> layer_centroids(const geo::FeatureCollection& layer);

// Pairwise centroid distance in meters. `required_ids` must all have a
// feature (MissingSet otherwise); the matrix covers exactly those ids.
SetMatrix distance_matrix(const geo::FeatureCollection& layer, CrsKind crs,
                          const std::vector<std::string>& required_ids);

double point_distance_m(const geometry::Point& a, const geometry::Point& b, CrsKind crs,
                        double mean_lat_deg);

// Entry (s,t), s != t: total cross-set edge weight divided by |s|*|t| person
// pairs (absent pairs count as 0). Diagonal is 0.
SetMatrix set_comention_matrix(const graph::ComentionGraph& g, const affiliation::Roster& roster);

// Pearson correlation between the upper triangles of two matrices over the
// same id order.
stats::PearsonResult upper_triangle_correlation(const SetMatrix& a, const SetMatrix& b);

struct ArrestRow {
    std::string person_id;
    std::string set_id;
    std::string beat_id;
};

std::vector<ArrestRow> load_arrests(const std::string& path);

struct BeatValidationRow {
    std::string set_id;
    std::vector<std::string> modal_beats;  // argmax arrest beats, sorted
    int modal_count = 0;
    bool ambiguous = false;                // > 1 beat ties for the maximum
    bool intersects = false;               // set polygon meets any modal beat
    int total_arrests = 0;
};

// For each set in the set layer with at least one arrest row: modal beat(s)
// and polygon intersection. Arrest rows naming beats absent from the beat
// layer raise UnknownBeatId; rows for sets absent from the set layer are
// ignored.
std::vector<BeatValidationRow> beat_validation(const geo::FeatureCollection& set_layer,
                                               const geo::FeatureCollection& beat_layer,
                                               const std::vector<ArrestRow>& arrests);

} // namespace comet::spatial
