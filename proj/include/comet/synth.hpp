#pragma once

#include "comet/affiliation.hpp"
#include "comet/graph.hpp"
#include "comet/ingest.hpp"
#include "comet/lexicon.hpp"
#include "comet/stats.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace comet::synth {

struct SynthConfig {
    int n_sets = 9;
    int n_nations = 3;
    int persons_per_set = 15;
    int tagged_posts_per_person = 20;   // fixed count per person
    double tag_noise_rate = 0.2;        // rho: wrong-set tag probability
    double resolution_threshold = 0.70; // used only to validate rho identifiability
    double p_in = 0.5;                  // within-set pair co-mention Poisson mean
    double p_between_base = 0.2;        // cross-set base rate before decay
    double lambda_m = 800.0;            // distance-decay length in meters
    double anchor_rate = 0.15;          // stage-1 mortality, structure-independent
    double wave_base_rate = 0.20;       // stage-2 baseline; alpha = logit(this)
    double beta_star = 1.0;             // planted coefficient on the anchor share
    double grid_origin_lon = -87.72;
    double grid_origin_lat = 41.75;
    double block_deg = 0.01;            // set-block pitch, degrees
    std::uint64_t seed = 1;
};

void validate_config(const SynthConfig& cfg);

struct GroundTruth {
    std::map<std::string, std::string> affiliation;   // alias_key -> set_id
    std::map<std::string, std::vector<std::string>> surface_forms;
    std::map<std::string, std::string> nation_of_set; // set_id -> nation_id
    std::map<std::pair<std::string, std::string>, std::int64_t> edges; // keys ordered
    std::set<std::string> anchors;      // stage-1 deceased
    std::set<std::string> deceased;     // anchors + wave
    std::map<std::string, double> anchor_share; // x_i: anchor-deceased neighbor share
    double alpha = 0.0;
    double beta_star = 0.0;
    SynthConfig config;
};

// Writes posts.jsonl, annotations.jsonl, lexicon.json, sets.geojson,
// beats.geojson, arrests.csv, mortality.csv, allowlist.csv and
// ground_truth.json under out_dir. Byte-identical re-runs for a fixed seed.
GroundTruth generate(const SynthConfig& cfg, const std::string& out_dir);

void save_ground_truth(const GroundTruth& truth, const std::string& path);
GroundTruth load_ground_truth(const std::string& path);

struct RecoveryReport {
    std::size_t persons = 0;
    std::size_t resolved = 0;        // roster members with a truth entry
    std::size_t correct = 0;         // resolved to the true set
    double affiliation_precision = 0.0; // correct / resolved
    double affiliation_recall = 0.0;    // correct / persons
    double community_nmi = 0.0;      // vs planted set blocks, roster members
    double beta_hat = 0.0;
    double beta_se = 0.0;
    double beta_star = 0.0;
    bool beta_ci_covers = false;     // 95% Wald interval covers the truth
    double distance_comention_r = 0.0;
    double distance_comention_p = 1.0;
    bool negative_correlation = false;
    bool have_geo = false;
};

// `community_of_member` runs parallel to roster.members. `geo_corr` is the
// upper-triangle distance/co-mention correlation when the geo stage ran.
RecoveryReport score_recovery(const GroundTruth& truth, const affiliation::Roster& roster,
                              const std::vector<int>& community_of_member,
                              const stats::PearsonResult* geo_corr);

void save_recovery_report(const RecoveryReport& report, const std::string& path);

} // namespace comet::synth
