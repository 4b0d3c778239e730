#pragma once

#include "comet/graph.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace comet::features {

struct PersonFeatures {
    std::string alias_key;
    std::string set_id;
    std::string nation_id;
    std::size_t degree = 0;
    double degree_centrality = 0.0;       // degree / (N-1)
    double pct_deceased_neighbors = 0.0;  // 0 when isolated
    double mean_weight_to_deceased = 0.0; // 0 when no deceased neighbor
    double pct_within_gang = 0.0;         // same-set neighbors / degree
    double within_set_centrality = 0.0;   // induced-subgraph degree share
    double within_nation_centrality = 0.0;
    bool deceased = false;
    bool in_sample = true;                // false for mortality-join drops
};

// Canonical covariate order used by every model specification.
extern const std::vector<std::string> kMainCovariates;      // 4 columns
extern const std::vector<std::string> kExtendedCovariates;  // + 2 within-centralities

// `deceased` must cover every graph node; members of `dropped` get
// in_sample = false but still contribute to neighbors' counts as alive.
std::vector<PersonFeatures> compute_features(const graph::ComentionGraph& g,
                                             const std::map<std::string, bool>& deceased,
                                             const std::set<std::string>& dropped = {});

double feature_value(const PersonFeatures& f, const std::string& name);

struct StandardizeResult {
    std::vector<std::string> columns;
    std::vector<double> means;
    std::vector<double> sds;               // population sd
    std::vector<bool> zero_variance;       // column zeroed out + warned
    std::vector<std::vector<double>> z;    // row-major, rows match input
};

// Column-wise (x - mean)/sd; constant columns map to all zeros.
StandardizeResult standardize(const std::vector<std::vector<double>>& rows,
                              const std::vector<std::string>& columns);

// Re-applies previously computed scaling constants (e.g. to rows outside the
// analytic sample so the CSV stays on one scale).
std::vector<std::vector<double>> apply_scaling(const std::vector<std::vector<double>>& rows,
                                               const StandardizeResult& scaling);

// features.csv: raw and z-scored columns; sidecar JSON records the scaling
// constants needed to convert per-SD odds ratios back to raw units.
void write_features_csv(const std::vector<PersonFeatures>& feats,
                        const StandardizeResult& std_result,
                        const std::string& csv_path, const std::string& sidecar_path);

} // namespace comet::features
