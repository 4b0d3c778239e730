#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "comet/error.hpp"
#include "comet/mention.hpp"
#include "comet/pipeline.hpp"
#include "comet/synth.hpp"
#include "testutil.hpp"

#include <filesystem>
#include <vector>

using namespace comet;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kArtifacts = {
    "posts.jsonl",  "annotations.jsonl", "lexicon.json",  "sets.geojson",
    "beats.geojson", "arrests.csv",      "mortality.csv", "allowlist.csv",
    "ground_truth.json"};

synth::SynthConfig small_synth(std::uint64_t seed) {
    synth::SynthConfig cfg;
    cfg.n_sets = 3;
    cfg.n_nations = 2;
    cfg.persons_per_set = 4;
    cfg.tagged_posts_per_person = 6;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("synth config validation rejects out-of-range parameters") {
    CHECK_NOTHROW(synth::validate_config(synth::SynthConfig{}));

    auto expect_invalid = [](synth::SynthConfig cfg) {
        try {
            synth::validate_config(cfg);
            FAIL("expected ConfigInvalid");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::ConfigInvalid);
        }
    };

    synth::SynthConfig c;
    c.n_sets = 1;
    expect_invalid(c);
    c = synth::SynthConfig{};
    c.n_nations = c.n_sets + 1;
    expect_invalid(c);
    c = synth::SynthConfig{};
    c.persons_per_set = 0;
    expect_invalid(c);
    c = synth::SynthConfig{};
    c.tag_noise_rate = 1.0;
    expect_invalid(c);
    c = synth::SynthConfig{};
    c.tag_noise_rate = 0.85; // identifiability: rho must stay below 1.5 - threshold
    c.resolution_threshold = 0.70;
    expect_invalid(c);
    c = synth::SynthConfig{};
    c.p_in = 0.0;
    expect_invalid(c);
    c = synth::SynthConfig{};
    c.anchor_rate = 0.0;
    expect_invalid(c);
    c = synth::SynthConfig{};
    c.wave_base_rate = 1.0;
    expect_invalid(c);
    c = synth::SynthConfig{};
    c.block_deg = 0.0;
    expect_invalid(c);
}

TEST_CASE("generation is byte-identical for a fixed seed and writes every artifact") {
    testutil::TempDir a("synth_a"), b("synth_b"), c("synth_c");
    const auto cfg = small_synth(11);
    auto truth_a = synth::generate(cfg, a.path());
    auto truth_b = synth::generate(cfg, b.path());

    for (const auto& name : kArtifacts) {
        CAPTURE(name);
        REQUIRE(fs::exists(a.file(name)));
        REQUIRE(fs::exists(b.file(name)));
        CHECK(testutil::read_file(a.file(name)) == testutil::read_file(b.file(name)));
    }
    CHECK(truth_a.affiliation == truth_b.affiliation);
    CHECK(truth_a.deceased == truth_b.deceased);

    auto cfg2 = small_synth(12);
    synth::generate(cfg2, c.path());
    CHECK(testutil::read_file(a.file("posts.jsonl")) != testutil::read_file(c.file("posts.jsonl")));

    // Planted population size matches the config.
    CHECK(truth_a.affiliation.size() ==
          static_cast<std::size_t>(cfg.n_sets * cfg.persons_per_set));
    // Every alias has at least one surface form and a valid set.
    for (const auto& [alias, set] : truth_a.affiliation) {
        CHECK(truth_a.surface_forms.count(alias) == 1);
        CHECK(truth_a.nation_of_set.count(set) == 1);
    }
    // Anchors are a subset of the deceased.
    for (const auto& alias : truth_a.anchors) CHECK(truth_a.deceased.count(alias) == 1);

    // The annotation sidecar parses and refers to generated posts.
    auto ann = mention::load_annotations(a.file("annotations.jsonl"));
    CHECK(!ann.empty());
}

TEST_CASE("ground truth JSON round-trips exactly") {
    testutil::TempDir dir("synth_gt");
    auto truth = synth::generate(small_synth(13), dir.path());

    const std::string again = dir.file("copy.json");
    synth::save_ground_truth(truth, again);
    auto loaded = synth::load_ground_truth(again);

    CHECK(loaded.affiliation == truth.affiliation);
    CHECK(loaded.surface_forms == truth.surface_forms);
    CHECK(loaded.nation_of_set == truth.nation_of_set);
    CHECK(loaded.edges == truth.edges);
    CHECK(loaded.anchors == truth.anchors);
    CHECK(loaded.deceased == truth.deceased);
    CHECK(loaded.anchor_share == truth.anchor_share);
    CHECK(loaded.alpha == truth.alpha);
    CHECK(loaded.beta_star == truth.beta_star);
    CHECK(loaded.config.seed == truth.config.seed);
    CHECK(loaded.config.tag_noise_rate == truth.config.tag_noise_rate);

    // And the generator's own artifact loads to the same truth.
    auto from_run = synth::load_ground_truth(dir.file("ground_truth.json"));
    CHECK(from_run.affiliation == truth.affiliation);
    CHECK(from_run.anchor_share == truth.anchor_share);
}

TEST_CASE("noise-free corpus resolves every planted member correctly") {
    testutil::TempDir dir("synth_rho0");
    synth::SynthConfig scfg;
    scfg.n_sets = 3;
    scfg.n_nations = 3;
    scfg.persons_per_set = 6;
    scfg.tagged_posts_per_person = 10;
    scfg.tag_noise_rate = 0.0;
    scfg.seed = 17;
    auto truth = synth::generate(scfg, dir.path());

    pipeline::Context ctx;
    ctx.cfg.posts = dir.file("posts.jsonl");
    ctx.cfg.lexicon = dir.file("lexicon.json");
    ctx.cfg.allowlist = dir.file("allowlist.csv");
    ctx.cfg.threshold = 0.70;
    ctx.cfg.min_mentions = 5;
    ctx.cfg.min_affiliates = 3;
    pipeline::ensure_roster(ctx);

    std::vector<int> zeros(ctx.roster.members.size(), 0);
    auto rep = synth::score_recovery(truth, ctx.roster, zeros, nullptr);
    CHECK(rep.persons == truth.affiliation.size());
    CHECK(rep.resolved == rep.persons);
    CHECK(rep.affiliation_precision == doctest::Approx(1.0));
    CHECK(rep.affiliation_recall == doctest::Approx(1.0));
    CHECK_FALSE(rep.have_geo);
}

TEST_CASE("score_recovery arithmetic on a hand-built truth") {
    synth::GroundTruth truth;
    truth.affiliation = {{"a", "s0"}, {"b", "s0"}, {"c", "s1"}, {"d", "s1"}};
    truth.anchor_share = {{"a", 0.1}, {"b", 0.4}, {"c", 0.2}, {"d", 0.3}};
    truth.beta_star = 1.0;

    affiliation::Roster roster;
    roster.members.push_back({"a", "s0", "x", 1.0, 8});
    roster.members.push_back({"b", "s1", "x", 1.0, 8}); // wrong set
    roster.members.push_back({"c", "s1", "x", 1.0, 8});
    roster.members.push_back({"e", "s0", "x", 1.0, 8}); // no planted entry

    std::vector<int> comm = {0, 0, 1, 0};
    auto rep = synth::score_recovery(truth, roster, comm, nullptr);
    CHECK(rep.persons == 4);
    CHECK(rep.resolved == 3);
    CHECK(rep.correct == 2);
    CHECK(rep.affiliation_precision == doctest::Approx(2.0 / 3.0));
    CHECK(rep.affiliation_recall == doctest::Approx(0.5));
    CHECK(rep.beta_star == doctest::Approx(1.0));
    CHECK(rep.beta_hat == 0.0); // too few rows for the planted-model refit
    CHECK_FALSE(rep.beta_ci_covers);
    CHECK_FALSE(rep.have_geo);

    // Perfect roster + matching communities give precision, recall, NMI of 1.
    affiliation::Roster perfect;
    perfect.members.push_back({"a", "s0", "x", 1.0, 8});
    perfect.members.push_back({"b", "s0", "x", 1.0, 8});
    perfect.members.push_back({"c", "s1", "x", 1.0, 8});
    perfect.members.push_back({"d", "s1", "x", 1.0, 8});
    std::vector<int> split = {0, 0, 1, 1};
    stats::PearsonResult geo;
    geo.r = -0.42;
    geo.t = -2.0;
    geo.p_value = 0.01;
    geo.n = 21;
    auto rep2 = synth::score_recovery(truth, perfect, split, &geo);
    CHECK(rep2.affiliation_precision == doctest::Approx(1.0));
    CHECK(rep2.affiliation_recall == doctest::Approx(1.0));
    CHECK(rep2.community_nmi == doctest::Approx(1.0));
    CHECK(rep2.have_geo);
    CHECK(rep2.distance_comention_r == doctest::Approx(-0.42));
    CHECK(rep2.negative_correlation);
}

TEST_CASE("stage vocabulary and digest helper") {
    const auto& names = pipeline::stage_names();
    REQUIRE(names.size() == 12);
    CHECK(names.front() == "ingest");
    CHECK(names.back() == "pipeline");

    pipeline::Context ctx;
    try {
        pipeline::run_stage(ctx, "nonsense");
        FAIL("expected ConfigInvalid");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigInvalid);
        CHECK(std::string(e.what()).find("nonsense") != std::string::npos);
    }

    // FNV-1a 64 published vectors: empty -> offset basis, "abc" -> e71fa2190541574b.
    testutil::TempDir dir("fnv");
    testutil::write_file(dir.file("empty.bin"), "");
    testutil::write_file(dir.file("abc.bin"), "abc");
    CHECK(pipeline::fnv1a64_file(dir.file("empty.bin")) == 0xcbf29ce484222325ULL);
    CHECK(pipeline::fnv1a64_file(dir.file("abc.bin")) == 0xe71fa2190541574bULL);
}

TEST_CASE("full pipeline reruns reproduce every artifact byte for byte") {
    testutil::TempDir corpus("pipe_corpus"), out1("pipe_out1"), out2("pipe_out2");
    synth::SynthConfig scfg;
    scfg.n_sets = 4;
    scfg.n_nations = 2;
    scfg.persons_per_set = 8;
    scfg.tagged_posts_per_person = 12;
    scfg.tag_noise_rate = 0.1;
    scfg.seed = 21;
    synth::generate(scfg, corpus.path());

    auto make_cfg = [&](const std::string& out_dir) {
        config::PipelineConfig cfg;
        cfg.posts = corpus.file("posts.jsonl");
        cfg.lexicon = corpus.file("lexicon.json");
        cfg.allowlist = corpus.file("allowlist.csv");
        cfg.sets_geojson = corpus.file("sets.geojson");
        cfg.beats_geojson = corpus.file("beats.geojson");
        cfg.arrests = corpus.file("arrests.csv");
        cfg.mortality = corpus.file("mortality.csv");
        cfg.ground_truth = corpus.file("ground_truth.json");
        cfg.out_dir = out_dir;
        cfg.threshold = 0.70;
        cfg.min_mentions = 5;
        cfg.min_affiliates = 4;
        cfg.seed = 7;
        cfg.permutation_iterations = 800;
        cfg.bootstrap_b = 60;
        cfg.ergm_burn_in = 2000;
        cfg.ergm_samples = 80;
        cfg.ergm_thin = 60;
        cfg.ergm_rounds = 10;
        return cfg;
    };

    pipeline::Context c1;
    c1.cfg = make_cfg(out1.path());
    pipeline::run_all(c1);

    pipeline::Context c2;
    c2.cfg = make_cfg(out2.path());
    pipeline::run_all(c2);

    const std::vector<std::string> stages = {"ingest",   "extract",  "affiliate", "graph",
                                             "communities", "geo",   "mortality", "features",
                                             "model",    "ergm",     "recovery"};
    for (const auto& s : stages) {
        const std::string name = "manifest_" + s + ".json";
        CAPTURE(name);
        REQUIRE(fs::exists(out1.file(name)));
        REQUIRE(fs::exists(out2.file(name)));
        CHECK(testutil::read_file(out1.file(name)) == testutil::read_file(out2.file(name)));
    }
    for (const auto& art : {"edges.csv", "features.csv", "communities_summary.json",
                            "composition.csv", "ergm_report.json", "recovery_report.json"}) {
        CAPTURE(art);
        REQUIRE(fs::exists(out1.file(art)));
        CHECK(pipeline::fnv1a64_file(out1.file(art)) == pipeline::fnv1a64_file(out2.file(art)));
    }

    // Roster state got populated along the way and respects the floors.
    CHECK(c1.have_roster);
    CHECK(c1.roster.members.size() >= 16);
    for (const auto& set : c1.roster.sets) CHECK(set.affiliate_count >= 4);
}
