#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "comet/error.hpp"
#include "comet/features.hpp"
#include "comet/graph.hpp"
#include "comet/mortality.hpp"
#include "comet/rng.hpp"
#include "testutil.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

using namespace comet;
using testutil::TempDir;
using testutil::write_file;

namespace {

affiliation::Roster small_roster() {
    affiliation::Roster roster;
    roster.members = {{"duke", "alpha", "folk", 0.9, 8},
                      {"lilmac", "alpha", "folk", 0.8, 6},
                      {"mouse", "beta", "people", 0.95, 12},
                      {"smokey", "beta", "people", 0.85, 7}};
    roster.sets = {{"alpha", "folk", 2, true}, {"beta", "people", 2, true}};
    return roster;
}

} // namespace

// ----------------------------------------------------------------- mortality

TEST_CASE("join_mortality: the three disambiguation rules plus no-match") {
    auto roster = small_roster();
    std::vector<mortality::MortalityRecord> records = {
        {"Duke", "", "Marcus D.", "http://x/1"},            // unique row -> joins
        {"Lil' Mac", "alpha", "M. Mack", "http://x/2"},     // two rows, one agrees on set
        {"Lil Mac", "gamma", "Other M.", "http://x/3"},
        {"Mouse", "delta", "A. Mouse", "http://x/4"},       // two rows, none agrees -> dropped
        {"MOUSE", "gamma", "B. Mouse", "http://x/5"},
    };
    auto res = mortality::join_mortality(roster, records);

    REQUIRE(res.audit.size() == 4);
    CHECK(res.audit[0].alias_key == "duke");
    CHECK(res.audit[0].outcome == mortality::JoinOutcome::UniqueMatch);
    CHECK(res.audit[0].deceased);
    CHECK_FALSE(res.audit[0].set_conflict); // empty set_id on the row: no conflict

    CHECK(res.audit[1].alias_key == "lilmac");
    CHECK(res.audit[1].outcome == mortality::JoinOutcome::SetMatch);
    CHECK(res.audit[1].matched_rows == 2);
    CHECK(res.audit[1].deceased);

    CHECK(res.audit[2].alias_key == "mouse");
    CHECK(res.audit[2].outcome == mortality::JoinOutcome::DroppedNoSetMatch);
    CHECK(res.audit[2].dropped);
    CHECK_FALSE(res.audit[2].deceased);

    CHECK(res.audit[3].alias_key == "smokey");
    CHECK(res.audit[3].outcome == mortality::JoinOutcome::NoMatch);

    CHECK(res.deceased_count == 2);
    CHECK(res.sample_size == 3);
    CHECK(res.dropped.count("mouse") == 1);
    CHECK(res.deceased.at("duke"));
    CHECK(res.deceased.at("lilmac"));
    CHECK_FALSE(res.deceased.at("smokey"));
    CHECK(res.deceased.count("mouse") == 0); // dropped members leave the map
}

TEST_CASE("join_mortality: duplicate rows agreeing on the set join as one death") {
    auto roster = small_roster();
    std::vector<mortality::MortalityRecord> records = {
        {"Duke", "alpha", "Marcus D.", "u1"},
        {"duke", "alpha", "Marcus D.", "u2"},
    };
    auto res = mortality::join_mortality(roster, records);
    CHECK(res.audit[0].outcome == mortality::JoinOutcome::MultipleSetMatches);
    CHECK(res.audit[0].deceased);
    CHECK(res.audit[0].matched_rows == 2);
    CHECK(res.deceased_count == 1);
}

TEST_CASE("join_mortality: single row with disagreeing set joins but flags a conflict") {
    auto roster = small_roster();
    std::vector<mortality::MortalityRecord> records = {{"Duke", "beta", "Marcus D.", "u"}};
    auto res = mortality::join_mortality(roster, records);
    CHECK(res.audit[0].outcome == mortality::JoinOutcome::UniqueMatch);
    CHECK(res.audit[0].deceased);
    CHECK(res.audit[0].set_conflict);
}

TEST_CASE("join_mortality is independent of record order") {
    auto roster = small_roster();
    std::vector<mortality::MortalityRecord> records = {
        {"Duke", "", "a", "u"},          {"Lil' Mac", "alpha", "b", "u"},
        {"Lil Mac", "gamma", "c", "u"},  {"Mouse", "delta", "d", "u"},
        {"MOUSE", "gamma", "e", "u"},    {"Smokey", "beta", "f", "u"},
    };
    auto base = mortality::join_mortality(roster, records);
    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        rng.shuffle(records);
        auto res = mortality::join_mortality(roster, records);
        CHECK(res.deceased == base.deceased);
        CHECK(res.dropped == base.dropped);
        CHECK(res.deceased_count == base.deceased_count);
        for (std::size_t i = 0; i < res.audit.size(); ++i)
            CHECK(res.audit[i].outcome == base.audit[i].outcome);
    }
}

TEST_CASE("load_mortality: header, quoting, missing alias column") {
    TempDir dir("mortality_csv");
    write_file(dir.file("m.csv"),
               "alias,set_id,government_name,source_url\n"
               "\"Lil' Mac\",alpha,\"Mack, M.\",http://x\n"
               "Duke,,D. Marcus,\n");
    auto recs = mortality::load_mortality(dir.file("m.csv"));
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].alias == "Lil' Mac");
    CHECK(recs[0].government_name == "Mack, M.");
    CHECK(recs[1].set_id.empty());

    write_file(dir.file("bad.csv"), "alias,set_id\n,alpha\n");
    CHECK_THROWS_AS(mortality::load_mortality(dir.file("bad.csv")), Error);
}

TEST_CASE("write_audit_jsonl emits one well-formed line per member") {
    TempDir dir("audit");
    auto roster = small_roster();
    std::vector<mortality::MortalityRecord> records = {{"Duke", "", "a", "u"}};
    auto res = mortality::join_mortality(roster, records);
    mortality::write_audit_jsonl(res, dir.file("audit.jsonl"));
    std::ifstream in(dir.file("audit.jsonl"));
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        auto obj = nlohmann::json::parse(line);
        CHECK(obj.contains("alias"));
        CHECK(obj.contains("outcome"));
        CHECK(obj.contains("matched_rows"));
        ++rows;
    }
    CHECK(rows == roster.members.size());
}

TEST_CASE("join outcome strings are stable artifact vocabulary") {
    using mortality::JoinOutcome;
    CHECK(mortality::to_string(JoinOutcome::NoMatch) == "no_match");
    CHECK(mortality::to_string(JoinOutcome::UniqueMatch) == "unique_match");
    CHECK(mortality::to_string(JoinOutcome::SetMatch) == "set_match");
    CHECK(mortality::to_string(JoinOutcome::MultipleSetMatches) == "multiple_set_matches");
    CHECK(mortality::to_string(JoinOutcome::DroppedNoSetMatch) == "dropped_no_set_match");
}

// ------------------------------------------------------------------ features

namespace {

graph::ComentionGraph feature_graph() {
    // a(alpha) - b(alpha) weight 2, a - c(beta) weight 3, c - d(beta) weight 1.
    graph::ComentionGraph g;
    g.add_node({"a", "alpha", "x", {}});
    g.add_node({"b", "alpha", "x", {}});
    g.add_node({"c", "beta", "x", {}});
    g.add_node({"d", "beta", "x", {}});
    g.add_comention(0, 1, 2);
    g.add_comention(0, 2, 3);
    g.add_comention(2, 3, 1);
    return g;
}

const std::map<std::string, bool> kFlags = {
    {"a", false}, {"b", false}, {"c", true}, {"d", false}};

} // namespace

TEST_CASE("compute_features: hand-computed four-node case") {
    auto g = feature_graph();
    auto feats = features::compute_features(g, kFlags);
    REQUIRE(feats.size() == 4);

    const auto& a = feats[0];
    CHECK(a.degree == 2);
    CHECK(a.degree_centrality == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(a.pct_deceased_neighbors == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.mean_weight_to_deceased == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(a.pct_within_gang == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(a.within_set_centrality == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.within_nation_centrality == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK_FALSE(a.deceased);
    CHECK(a.in_sample);

    const auto& b = feats[1];
    CHECK(b.degree == 1);
    CHECK(b.pct_deceased_neighbors == 0.0);
    CHECK(b.mean_weight_to_deceased == 0.0);
    CHECK(b.pct_within_gang == doctest::Approx(1.0));
    CHECK(b.within_set_centrality == doctest::Approx(1.0));
    CHECK(b.within_nation_centrality == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    const auto& c = feats[2];
    CHECK(c.deceased);
    CHECK(c.pct_deceased_neighbors == 0.0); // neighbors a, d are alive
    CHECK(c.pct_within_gang == doctest::Approx(0.5));

    const auto& d = feats[3];
    CHECK(d.pct_deceased_neighbors == doctest::Approx(1.0));
    CHECK(d.mean_weight_to_deceased == doctest::Approx(1.0));
}

TEST_CASE("compute_features: isolated nodes stay at zero") {
    graph::ComentionGraph g;
    g.add_node({"solo", "alpha", "x", {}});
    g.add_node({"pair1", "alpha", "x", {}});
    g.add_node({"pair2", "beta", "x", {}});
    g.add_comention(1, 2, 4);
    auto feats = features::compute_features(
        g, {{"solo", false}, {"pair1", false}, {"pair2", true}});
    CHECK(feats[0].degree == 0);
    CHECK(feats[0].degree_centrality == 0.0);
    CHECK(feats[0].pct_deceased_neighbors == 0.0);
    CHECK(feats[0].mean_weight_to_deceased == 0.0);
    CHECK(feats[0].pct_within_gang == 0.0);
    CHECK(feats[0].within_set_centrality == 0.0);
}

TEST_CASE("compute_features: dropped members count as alive neighbors") {
    auto g = feature_graph();
    auto flags = kFlags;
    flags.at("c") = false; // the join dropped c rather than resolving it
    auto feats = features::compute_features(g, flags, {"c"});
    CHECK_FALSE(feats[2].in_sample);
    CHECK(feats[0].pct_deceased_neighbors == 0.0); // c no longer deceased for a
    CHECK(feats[3].pct_deceased_neighbors == 0.0);
    CHECK(feats[0].in_sample);
}

TEST_CASE("compute_features requires a flag for every node") {
    auto g = feature_graph();
    std::map<std::string, bool> partial = {{"a", false}, {"b", false}, {"c", true}};
    try {
        features::compute_features(g, partial);
        FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DimensionMismatch);
    }
}

TEST_CASE("feature_value exposes exactly the covariate vocabulary") {
    features::PersonFeatures f;
    f.degree_centrality = 0.25;
    f.within_nation_centrality = 0.75;
    CHECK(features::feature_value(f, "degree_centrality") == 0.25);
    CHECK(features::feature_value(f, "within_nation_centrality") == 0.75);
    CHECK_THROWS_AS(features::feature_value(f, "no_such_column"), Error);
    REQUIRE(features::kMainCovariates.size() == 4);
    REQUIRE(features::kExtendedCovariates.size() == 6);
    for (const auto& name : features::kExtendedCovariates) CHECK_NOTHROW(features::feature_value(f, name));
}

TEST_CASE("standardize: exact z-scores, zero-variance handling, idempotence") {
    auto res = features::standardize({{1.0, 5.0}, {2.0, 5.0}, {3.0, 5.0}}, {"x", "const"});
    REQUIRE(res.z.size() == 3);
    const double s = std::sqrt(3.0 / 2.0);
    CHECK(res.z[0][0] == doctest::Approx(-s).epsilon(1e-12));
    CHECK(res.z[1][0] == doctest::Approx(0.0));
    CHECK(res.z[2][0] == doctest::Approx(s).epsilon(1e-12));
    CHECK(res.means[0] == doctest::Approx(2.0));
    CHECK(res.sds[0] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    CHECK_FALSE(res.zero_variance[0]);
    // Constant column: all zeros, flagged.
    CHECK(res.zero_variance[1]);
    CHECK(res.z[0][1] == 0.0);
    CHECK(res.z[2][1] == 0.0);

    // Standardizing an already-standard column is the identity.
    auto again = features::standardize(res.z, {"x", "const"});
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(again.z[i][0] == doctest::Approx(res.z[i][0]).epsilon(1e-12));
}

TEST_CASE("apply_scaling reuses stored constants for out-of-sample rows") {
    auto res = features::standardize({{1.0}, {2.0}, {3.0}}, {"x"});
    auto mapped = features::apply_scaling({{4.0}, {2.0}}, res);
    REQUIRE(mapped.size() == 2);
    CHECK(mapped[0][0] == doctest::Approx((4.0 - 2.0) / std::sqrt(2.0 / 3.0)).epsilon(1e-12));
    CHECK(mapped[1][0] == doctest::Approx(0.0));
}

TEST_CASE("write_features_csv writes every node plus a scaling sidecar") {
    TempDir dir("feat_csv");
    auto g = feature_graph();
    auto feats = features::compute_features(g, kFlags);
    std::vector<std::vector<double>> rows;
    for (const auto& f : feats) {
        std::vector<double> row;
        for (const auto& name : features::kExtendedCovariates)
            row.push_back(features::feature_value(f, name));
        rows.push_back(row);
    }
    auto scaling = features::standardize(rows, features::kExtendedCovariates);
    features::write_features_csv(feats, scaling, dir.file("features.csv"),
                                 dir.file("scaling.json"));

    std::ifstream in(dir.file("features.csv"));
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header.find("alias") != std::string::npos);
    CHECK(header.find("degree_centrality") != std::string::npos);
    CHECK(header.find("z_degree_centrality") != std::string::npos);
    std::size_t body = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++body;
    CHECK(body == feats.size());

    auto sidecar = nlohmann::json::parse(testutil::read_file(dir.file("scaling.json")));
    REQUIRE(sidecar.contains("degree_centrality"));
    CHECK(sidecar.size() == features::kExtendedCovariates.size());
    CHECK(sidecar["degree_centrality"].contains("mean"));
    CHECK(sidecar["degree_centrality"].contains("sd"));
    CHECK(sidecar["degree_centrality"].contains("zero_variance"));
}
