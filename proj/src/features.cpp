#include "comet/features.hpp"

#include "comet/csv.hpp"
#include "comet/error.hpp"
#include "comet/stats.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace comet::features {

const std::vector<std::string> kMainCovariates = {
    "degree_centrality", "pct_deceased_neighbors", "mean_weight_to_deceased", "pct_within_gang"};

const std::vector<std::string> kExtendedCovariates = {
    "degree_centrality", "pct_deceased_neighbors", "mean_weight_to_deceased", "pct_within_gang",
    "within_set_centrality", "within_nation_centrality"};

std::vector<PersonFeatures> compute_features(const graph::ComentionGraph& g,
                                             const std::map<std::string, bool>& deceased,
                                             const std::set<std::string>& dropped) {
    const std::size_t n = g.node_count();
    const auto adj = g.adjacency();

    std::vector<bool> dead(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& key = g.node(static_cast<int>(i)).alias_key;
        auto it = deceased.find(key);
        if (it == deceased.end()) {
            throw Error(ErrorKind::DimensionMismatch, "no mortality flag for node " + key);
        }
        dead[i] = it->second;
    }

    // Subgroup sizes for the within-centrality denominators.
    std::map<std::string, std::size_t> set_size, nation_size;
    for (const auto& node : g.nodes()) {
        set_size[node.set_id] += 1;
        nation_size[node.nation_id] += 1;
    }

    std::vector<PersonFeatures> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& node = g.node(static_cast<int>(i));
        PersonFeatures& f = out[i];
        f.alias_key = node.alias_key;
        f.set_id = node.set_id;
        f.nation_id = node.nation_id;
        f.deceased = dead[i];
        f.in_sample = dropped.find(node.alias_key) == dropped.end();
        f.degree = adj[i].size();

        if (n > 1) {
            f.degree_centrality = static_cast<double>(f.degree) / static_cast<double>(n - 1);
        }
        if (f.degree == 0) continue;

        std::size_t dead_nbrs = 0, same_set = 0, same_nation = 0;
        double dead_weight = 0.0;
        for (const auto& [j, w] : adj[i]) {
            const auto& other = g.node(j);
            if (dead[static_cast<std::size_t>(j)]) {
                ++dead_nbrs;
                dead_weight += static_cast<double>(w);
            }
            if (other.set_id == node.set_id) ++same_set;
            if (other.nation_id == node.nation_id) ++same_nation;
        }
        const double deg = static_cast<double>(f.degree);
        f.pct_deceased_neighbors = static_cast<double>(dead_nbrs) / deg;
        if (dead_nbrs > 0) f.mean_weight_to_deceased = dead_weight / static_cast<double>(dead_nbrs);
        f.pct_within_gang = static_cast<double>(same_set) / deg;

        const std::size_t ss = set_size[node.set_id];
        if (ss > 1) {
            f.within_set_centrality = static_cast<double>(same_set) / static_cast<double>(ss - 1);
        }
        const std::size_t ns = nation_size[node.nation_id];
        if (ns > 1) {
            f.within_nation_centrality =
                static_cast<double>(same_nation) / static_cast<double>(ns - 1);
        }
    }
    return out;
}

double feature_value(const PersonFeatures& f, const std::string& name) {
    if (name == "degree_centrality") return f.degree_centrality;
    if (name == "pct_deceased_neighbors") return f.pct_deceased_neighbors;
    if (name == "mean_weight_to_deceased") return f.mean_weight_to_deceased;
    if (name == "pct_within_gang") return f.pct_within_gang;
    if (name == "within_set_centrality") return f.within_set_centrality;
    if (name == "within_nation_centrality") return f.within_nation_centrality;
    throw Error(ErrorKind::ConfigInvalid, "unknown feature column " + name);
}

StandardizeResult standardize(const std::vector<std::vector<double>>& rows,
                              const std::vector<std::string>& columns) {
    const std::size_t n = rows.size();
    const std::size_t k = columns.size();
    if (n < 2) {
        throw Error(ErrorKind::DimensionMismatch, "standardize needs at least 2 rows");
    }
    for (const auto& r : rows) {
        if (r.size() != k) {
            throw Error(ErrorKind::DimensionMismatch, "ragged feature matrix");
        }
    }
    StandardizeResult res;
    res.columns = columns;
    res.means.resize(k);
    res.sds.resize(k);
    res.zero_variance.assign(k, false);
    res.z.assign(n, std::vector<double>(k, 0.0));
    for (std::size_t c = 0; c < k; ++c) {
        std::vector<double> col(n);
        for (std::size_t r = 0; r < n; ++r) col[r] = rows[r][c];
        res.means[c] = stats::mean(col);
        res.sds[c] = stats::population_sd(col);
        if (res.sds[c] <= 0.0) {
            res.zero_variance[c] = true; // column stays all-zero
            continue;
        }
        for (std::size_t r = 0; r < n; ++r) {
            res.z[r][c] = (col[r] - res.means[c]) / res.sds[c];
        }
    }
    return res;
}

std::vector<std::vector<double>> apply_scaling(const std::vector<std::vector<double>>& rows,
                                               const StandardizeResult& scaling) {
    const std::size_t k = scaling.columns.size();
    std::vector<std::vector<double>> z(rows.size(), std::vector<double>(k, 0.0));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != k) {
            throw Error(ErrorKind::DimensionMismatch, "ragged feature matrix");
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (scaling.zero_variance[c]) continue;
            z[r][c] = (rows[r][c] - scaling.means[c]) / scaling.sds[c];
        }
    }
    return z;
}

void write_features_csv(const std::vector<PersonFeatures>& feats,
                        const StandardizeResult& std_result,
                        const std::string& csv_path, const std::string& sidecar_path) {
    std::ofstream out(csv_path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + csv_path);
    std::vector<std::string> header = {"alias", "set_id", "nation_id", "deceased",
                                       "in_sample", "degree"};
    for (const auto& c : std_result.columns) header.push_back(c);
    for (const auto& c : std_result.columns) header.push_back("z_" + c);
    csv::write_row(out, header);
    for (std::size_t i = 0; i < feats.size(); ++i) {
        const auto& f = feats[i];
        std::vector<std::string> row = {f.alias_key, f.set_id, f.nation_id,
                                        f.deceased ? "1" : "0", f.in_sample ? "1" : "0",
                                        std::to_string(f.degree)};
        char buf[64];
        for (const auto& c : std_result.columns) {
            std::snprintf(buf, sizeof(buf), "%.10g", feature_value(f, c));
            row.emplace_back(buf);
        }
        for (std::size_t c = 0; c < std_result.columns.size(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.10g", std_result.z[i][c]);
            row.emplace_back(buf);
        }
        csv::write_row(out, row);
    }

    nlohmann::ordered_json sidecar;
    for (std::size_t c = 0; c < std_result.columns.size(); ++c) {
        nlohmann::ordered_json entry;
        entry["mean"] = std_result.means[c];
        entry["sd"] = std_result.sds[c];
        entry["zero_variance"] = static_cast<bool>(std_result.zero_variance[c]);
        sidecar[std_result.columns[c]] = entry;
    }
    std::ofstream side(sidecar_path);
    if (!side) throw Error(ErrorKind::IoError, "cannot write " + sidecar_path);
    side << sidecar.dump(2) << "\n";
}

} // namespace comet::features
