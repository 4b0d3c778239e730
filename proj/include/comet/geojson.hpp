#pragma once

#include "comet/geometry.hpp"

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace comet::geo {

struct Feature {
    std::string id;                   // pulled from the id property named at load time
    geometry::Shape shape;
    nlohmann::json properties;        // passthrough for round-trips
};

struct FeatureCollection {
    std::vector<Feature> features;
};

// Parses a GeoJSON FeatureCollection, accepting Polygon and MultiPolygon
// geometries. `id_property` names the property carrying the feature id
// (e.g. "set_id" or "beat_id"). Closing duplicate vertices are dropped.
// Throws MalformedRecord on malformed input or missing ids.
FeatureCollection load_feature_collection(const std::string& path, const std::string& id_property);

FeatureCollection parse_feature_collection(const nlohmann::json& doc, const std::string& id_property);

// Serializes back to GeoJSON, re-closing each ring. `extra` maps feature id to
// properties merged into the output (used for choropleth value columns).
nlohmann::json to_geojson(const FeatureCollection& fc,
                          const std::map<std::string, nlohmann::json>& extra = {});

void save_feature_collection(const std::string& path, const FeatureCollection& fc,
                             const std::map<std::string, nlohmann::json>& extra = {});

} // namespace comet::geo
