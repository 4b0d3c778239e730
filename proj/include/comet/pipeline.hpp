#pragma once

#include "comet/affiliation.hpp"
#include "comet/community.hpp"
#include "comet/config.hpp"
#include "comet/features.hpp"
#include "comet/geojson.hpp"
#include "comet/graph.hpp"
#include "comet/ingest.hpp"
#include "comet/lexicon.hpp"
#include "comet/mention.hpp"
#include "comet/mortality.hpp"
#include "comet/spatial.hpp"
#include "comet/stats.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace comet::pipeline {

// In-memory state shared by the stages. Everything is computed lazily from
// the raw inputs, so any stage can run standalone; `pipeline` chains them all
// and reuses the cached upstream state.
struct Context {
    config::PipelineConfig cfg;

    std::vector<ingest::PostRecord> posts;
    ingest::CorpusStats corpus_stats;
    lexicon::LexiconConfig lex;
    mention::AnnotationMap annotations;
    std::vector<mention::MentionEvent> mentions;
    std::vector<affiliation::AliasProfile> profiles;
    std::vector<affiliation::AffiliationAssignment> assignments;
    std::map<std::string, std::string> allowlist;
    affiliation::Roster roster;
    graph::ComentionGraph net;
    community::CommunityPartition partition;
    community::PermutationBaseline baseline;
    geo::FeatureCollection set_layer;
    geo::FeatureCollection beat_layer;
    spatial::SetMatrix distance;
    spatial::SetMatrix comention;
    std::optional<stats::PearsonResult> geo_corr;
    std::vector<mortality::MortalityRecord> mortality_records;
    mortality::JoinResult join;
    std::vector<features::PersonFeatures> feats;
    features::StandardizeResult scaling;     // in-sample rows, extended covariates
    features::StandardizeResult csv_scaling; // same constants, z rows for all nodes

    bool have_posts = false;
    bool have_lexicon = false;
    bool have_mentions = false;
    bool have_profiles = false;
    bool have_assignments = false;
    bool have_roster = false;
    bool have_graph = false;
    bool have_partition = false;
    bool have_baseline = false;
    bool have_layers = false;
    bool have_geo = false;
    bool have_join = false;
    bool have_features = false;
};

// Stage names in `pipeline` execution order (geo and recovery are skipped
// when their optional inputs are not configured).
const std::vector<std::string>& stage_names();

// Compute-and-cache steps; no artifacts written.
void ensure_posts(Context& ctx);
void ensure_lexicon(Context& ctx);
void ensure_mentions(Context& ctx);
void ensure_profiles(Context& ctx);
void ensure_assignments(Context& ctx);
void ensure_roster(Context& ctx);
void ensure_graph(Context& ctx);
void ensure_partition(Context& ctx);
void ensure_layers(Context& ctx);
void ensure_geo(Context& ctx);
void ensure_join(Context& ctx);
void ensure_features(Context& ctx);

// One stage = compute + write its artifacts and manifest under cfg.out_dir.
void run_ingest(Context& ctx);
void run_extract(Context& ctx);
void run_affiliate(Context& ctx);
void run_graph(Context& ctx);
void run_communities(Context& ctx);
void run_geo(Context& ctx);
void run_mortality(Context& ctx);
void run_features(Context& ctx);
void run_model(Context& ctx);
void run_ergm(Context& ctx);
void run_recovery(Context& ctx);

void run_stage(Context& ctx, const std::string& name);
void run_all(Context& ctx);

// FNV-1a 64-bit digest of a file's bytes; manifests record one per artifact.
std::uint64_t fnv1a64_file(const std::string& path);

} // namespace comet::pipeline
