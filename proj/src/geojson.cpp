#include "comet/geojson.hpp"

#include "comet/error.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace comet::geo {

namespace {

geometry::Ring parse_ring(const nlohmann::json& arr) {
    if (!arr.is_array() || arr.size() < 4) {
        throw Error(ErrorKind::MalformedRecord, "ring must be an array of at least 4 positions");
    }
    geometry::Ring ring;
    for (const auto& pos : arr) {
        if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
            throw Error(ErrorKind::MalformedRecord, "position must be [x, y]");
        }
        ring.push_back({pos[0].get<double>(), pos[1].get<double>()});
    }
    // Drop the closing duplicate if present.
    if (ring.size() >= 2) {
        const auto& first = ring.front();
        const auto& last = ring.back();
        if (std::abs(first.x - last.x) < 1e-12 && std::abs(first.y - last.y) < 1e-12) {
            ring.pop_back();
        }
    }
    if (ring.size() < 3) {
        throw Error(ErrorKind::MalformedRecord, "ring has fewer than 3 distinct vertices");
    }
    return ring;
}

geometry::Polygon parse_polygon(const nlohmann::json& coords) {
    if (!coords.is_array() || coords.empty()) {
        throw Error(ErrorKind::MalformedRecord, "polygon coordinates must be a non-empty array of rings");
    }
    geometry::Polygon poly;
    for (const auto& ring : coords) poly.rings.push_back(parse_ring(ring));
    return poly;
}

} // namespace

FeatureCollection parse_feature_collection(const nlohmann::json& doc, const std::string& id_property) {
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection") {
        throw Error(ErrorKind::MalformedRecord, "document is not a FeatureCollection");
    }
    if (!doc.contains("features") || !doc["features"].is_array()) {
        throw Error(ErrorKind::MalformedRecord, "FeatureCollection missing features array");
    }
    FeatureCollection fc;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < doc["features"].size(); ++i) {
        const auto& f = doc["features"][i];
        const std::string where = "feature " + std::to_string(i);
        if (!f.is_object() || f.value("type", "") != "Feature") {
            throw Error(ErrorKind::MalformedRecord, where + ": not a Feature");
        }
        Feature feat;
        feat.properties = f.value("properties", nlohmann::json::object());
        if (!feat.properties.contains(id_property)) {
            throw Error(ErrorKind::MalformedRecord, where + ": missing property '" + id_property + "'");
        }
        const auto& idv = feat.properties[id_property];
        feat.id = idv.is_string() ? idv.get<std::string>() : idv.dump();
        if (feat.id.empty()) {
            throw Error(ErrorKind::MalformedRecord, where + ": empty '" + id_property + "'");
        }
        if (!seen.insert(feat.id).second) {
            throw Error(ErrorKind::MalformedRecord, where + ": duplicate '" + id_property + "' value " + feat.id);
        }
        if (!f.contains("geometry") || !f["geometry"].is_object()) {
            throw Error(ErrorKind::MalformedRecord, where + ": missing geometry");
        }
        const auto& g = f["geometry"];
        const std::string gtype = g.value("type", "");
        if (!g.contains("coordinates")) {
            throw Error(ErrorKind::MalformedRecord, where + ": geometry missing coordinates");
        }
        if (gtype == "Polygon") {
            feat.shape.polygons.push_back(parse_polygon(g["coordinates"]));
        } else if (gtype == "MultiPolygon") {
            if (!g["coordinates"].is_array() || g["coordinates"].empty()) {
                throw Error(ErrorKind::MalformedRecord, where + ": empty MultiPolygon");
            }
            for (const auto& pc : g["coordinates"]) feat.shape.polygons.push_back(parse_polygon(pc));
        } else {
            throw Error(ErrorKind::MalformedRecord, where + ": unsupported geometry type '" + gtype + "'");
        }
        fc.features.push_back(std::move(feat));
    }
    return fc;
}

FeatureCollection load_feature_collection(const std::string& path, const std::string& id_property) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedRecord, path + ": " + e.what());
    }
    return parse_feature_collection(doc, id_property);
}

nlohmann::json to_geojson(const FeatureCollection& fc,
                          const std::map<std::string, nlohmann::json>& extra) {
    nlohmann::ordered_json doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = nlohmann::ordered_json::array();
    for (const Feature& feat : fc.features) {
        nlohmann::ordered_json f;
        f["type"] = "Feature";
        nlohmann::ordered_json props = feat.properties;
        auto it = extra.find(feat.id);
        if (it != extra.end()) {
            for (auto& [k, v] : it->second.items()) props[k] = v;
        }
        f["properties"] = props;
        nlohmann::ordered_json geom;
        auto ring_to_json = [](const geometry::Ring& ring) {
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const auto& p : ring) arr.push_back({p.x, p.y});
            arr.push_back({ring.front().x, ring.front().y});
            return arr;
        };
        if (feat.shape.polygons.size() == 1) {
            geom["type"] = "Polygon";
            nlohmann::ordered_json coords = nlohmann::ordered_json::array();
            for (const auto& ring : feat.shape.polygons[0].rings) coords.push_back(ring_to_json(ring));
            geom["coordinates"] = coords;
        } else {
            geom["type"] = "MultiPolygon";
            nlohmann::ordered_json coords = nlohmann::ordered_json::array();
            for (const auto& poly : feat.shape.polygons) {
                nlohmann::ordered_json pc = nlohmann::ordered_json::array();
                for (const auto& ring : poly.rings) pc.push_back(ring_to_json(ring));
                coords.push_back(pc);
            }
            geom["coordinates"] = coords;
        }
        f["geometry"] = geom;
        doc["features"].push_back(f);
    }
    return doc;
}

void save_feature_collection(const std::string& path, const FeatureCollection& fc,
                             const std::map<std::string, nlohmann::json>& extra) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    out << to_geojson(fc, extra).dump(2) << "\n";
}

} // namespace comet::geo
