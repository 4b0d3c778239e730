#include "comet/spatial.hpp"

#include "comet/affiliation.hpp"
#include "comet/csv.hpp"
#include "comet/error.hpp"
#include "comet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace comet::spatial {

double SetMatrix::at(const std::string& s, const std::string& t) const {
    auto find = [&](const std::string& id) {
        auto it = std::lower_bound(set_ids.begin(), set_ids.end(), id);
        if (it == set_ids.end() || *it != id) {
            throw Error(ErrorKind::MissingSet, "set not in matrix: " + id);
        }
        return static_cast<std::size_t>(it - set_ids.begin());
    };
    return values[find(s)][find(t)];
}

std::map<std::string, geometry::Point> layer_centroids(const geo::FeatureCollection& layer) {
    std::map<std::string, geometry::Point> out;
    for (const auto& f : layer.features) out[f.id] = geometry::centroid(f.shape);
    return out;
}

double point_distance_m(const geometry::Point& a, const geometry::Point& b, CrsKind crs,
                        double mean_lat_deg) {
    if (crs == CrsKind::projected_meters) {
        return std::hypot(a.x - b.x, a.y - b.y);
    }
    const double cos_lat = std::cos(mean_lat_deg * M_PI / 180.0);
    const double dx = (a.x - b.x) * kMetersPerDegree * cos_lat;
    const double dy = (a.y - b.y) * kMetersPerDegree;
    return std::hypot(dx, dy);
}

SetMatrix distance_matrix(const geo::FeatureCollection& layer, CrsKind crs,
                          const std::vector<std::string>& required_ids) {
    std::map<std::string, geometry::Point> cents = layer_centroids(layer);
    SetMatrix m;
    m.set_ids = required_ids;
    std::sort(m.set_ids.begin(), m.set_ids.end());
    m.set_ids.erase(std::unique(m.set_ids.begin(), m.set_ids.end()), m.set_ids.end());
    std::vector<geometry::Point> pts;
    for (const auto& id : m.set_ids) {
        auto it = cents.find(id);
        if (it == cents.end()) {
            throw Error(ErrorKind::MissingSet, "no polygon for set " + id);
        }
        pts.push_back(it->second);
    }
    double mean_lat = 0.0;
    if (crs == CrsKind::geographic_degrees && !pts.empty()) {
        for (const auto& p : pts) mean_lat += p.y;
        mean_lat /= static_cast<double>(pts.size());
    }
    const std::size_t n = pts.size();
    m.values.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = point_distance_m(pts[i], pts[j], crs, mean_lat);
            m.values[i][j] = d;
            m.values[j][i] = d;
        }
    }
    return m;
}

SetMatrix set_comention_matrix(const graph::ComentionGraph& g, const affiliation::Roster& roster) {
    SetMatrix m;
    for (const auto& s : roster.sets) m.set_ids.push_back(s.set_id);
    std::sort(m.set_ids.begin(), m.set_ids.end());
    const std::size_t n = m.set_ids.size();
    std::map<std::string, std::size_t> set_index;
    for (std::size_t i = 0; i < n; ++i) set_index[m.set_ids[i]] = i;

    std::vector<double> sizes(n, 0.0);
    std::map<std::string, std::size_t> node_set; // alias_key -> set row
    for (const auto& member : roster.members) {
        auto it = set_index.find(member.set_id);
        if (it == set_index.end()) continue;
        sizes[it->second] += 1.0;
        node_set[member.alias_key] = it->second;
    }

    m.values.assign(n, std::vector<double>(n, 0.0));
    for (const auto& [pair, weight] : g.edges()) {
        const std::string& ua = g.node(pair.first).alias_key;
        const std::string& va = g.node(pair.second).alias_key;
        auto iu = node_set.find(ua);
        auto iv = node_set.find(va);
        if (iu == node_set.end() || iv == node_set.end()) continue;
        if (iu->second == iv->second) continue; // within-set: diagonal stays 0
        m.values[iu->second][iv->second] += static_cast<double>(weight);
        m.values[iv->second][iu->second] += static_cast<double>(weight);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double denom = sizes[i] * sizes[j];
            if (denom > 0.0) m.values[i][j] /= denom;
        }
    }
    return m;
}

stats::PearsonResult upper_triangle_correlation(const SetMatrix& a, const SetMatrix& b) {
    if (a.set_ids != b.set_ids) {
        throw Error(ErrorKind::DimensionMismatch, "matrices cover different set ids");
    }
    std::vector<double> x, y;
    const std::size_t n = a.set_ids.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            x.push_back(a.values[i][j]);
            y.push_back(b.values[i][j]);
        }
    }
    return stats::pearson(x, y);
}

std::vector<ArrestRow> load_arrests(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::vector<ArrestRow> rows;
    std::vector<std::string> fields;
    bool first = true;
    std::size_t person_col = 0, set_col = 1, beat_col = 2;
    while (csv::read_row(in, fields)) {
        if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
        if (first) {
            first = false;
            bool header = false;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (fields[i] == "person_id") { person_col = i; header = true; }
                if (fields[i] == "set_id") { set_col = i; header = true; }
                if (fields[i] == "beat_id") { beat_col = i; header = true; }
            }
            if (header) continue;
        }
        const std::size_t need = std::max({person_col, set_col, beat_col});
        if (fields.size() <= need) {
            throw Error(ErrorKind::MalformedRecord, path + ": arrest row with too few columns");
        }
        rows.push_back({fields[person_col], fields[set_col], fields[beat_col]});
    }
    return rows;
}

std::vector<BeatValidationRow> beat_validation(const geo::FeatureCollection& set_layer,
                                               const geo::FeatureCollection& beat_layer,
                                               const std::vector<ArrestRow>& arrests) {
    std::map<std::string, const geo::Feature*> beats;
    for (const auto& f : beat_layer.features) beats[f.id] = &f;
    std::map<std::string, const geo::Feature*> sets;
    for (const auto& f : set_layer.features) sets[f.id] = &f;

    // set -> beat -> arrest count
    std::map<std::string, std::map<std::string, int>> counts;
    for (const auto& row : arrests) {
        if (beats.find(row.beat_id) == beats.end()) {
            throw Error(ErrorKind::UnknownBeatId, "arrest references unknown beat " + row.beat_id);
        }
        if (sets.find(row.set_id) == sets.end()) continue; // not a study set
        counts[row.set_id][row.beat_id] += 1;
    }

    std::vector<BeatValidationRow> report;
    for (const auto& [set_id, by_beat] : counts) {
        BeatValidationRow r;
        r.set_id = set_id;
        int best = 0;
        for (const auto& [beat_id, c] : by_beat) {
            (void)beat_id;
            r.total_arrests += c;
            best = std::max(best, c);
        }
        r.modal_count = best;
        for (const auto& [beat_id, c] : by_beat) {
            if (c == best) r.modal_beats.push_back(beat_id);
        }
        std::sort(r.modal_beats.begin(), r.modal_beats.end());
        r.ambiguous = r.modal_beats.size() > 1;
        const geo::Feature* set_feat = sets.at(set_id);
        for (const auto& beat_id : r.modal_beats) {
            if (geometry::shapes_intersect(set_feat->shape, beats.at(beat_id)->shape)) {
                r.intersects = true;
                break;
            }
        }
        report.push_back(std::move(r));
    }
    return report;
}

} // namespace comet::spatial
