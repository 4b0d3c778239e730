#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace comet::config {

// Flat key = value file (TOML-scalar style): '#' comments, optional quotes,
// no sections. Unknown keys are rejected so typos fail loudly.
struct PipelineConfig {
    // inputs
    std::string posts;
    std::string posts_format = "jsonl";   // jsonl | csv
    std::string lexicon;
    std::string annotations;              // optional
    std::string allowlist;
    std::string sets_geojson;
    std::string beats_geojson;
    std::string arrests;
    std::string mortality;
    std::string ground_truth;             // optional; triggers recovery scoring

    // outputs
    std::string out_dir = "out";

    // parameters
    double threshold = 0.70;
    std::size_t min_mentions = 5;
    std::size_t min_affiliates = 10;
    double louvain_resolution = 1.0;
    std::uint64_t seed = 42;
    std::size_t permutation_iterations = 10000;
    int bootstrap_b = 1000;
    std::string crs = "geographic_degrees"; // or projected_meters
    double ergm_decay = 0.5;
    long ergm_burn_in = 20000;
    int ergm_samples = 200;
    long ergm_thin = 500;
    int ergm_rounds = 25;
    std::vector<double> sensitivity_thresholds = {0.51, 0.90};
};

PipelineConfig load_config(const std::string& path);

// Parses the same key/value syntax from an already-read map (CLI overrides).
void apply_key(PipelineConfig& cfg, const std::string& key, const std::string& value);

// Every provided input path must exist; throws ConfigInvalid naming the
// first missing file. `require` lists keys that must be non-empty.
void validate_paths(const PipelineConfig& cfg, const std::vector<std::string>& require);

} // namespace comet::config
