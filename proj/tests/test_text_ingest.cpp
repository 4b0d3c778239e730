#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "comet/config.hpp"
#include "comet/csv.hpp"
#include "comet/error.hpp"
#include "comet/ingest.hpp"
#include "comet/lexicon.hpp"
#include "comet/mention.hpp"
#include "comet/text.hpp"
#include "testutil.hpp"

#include <sstream>

using namespace comet;
using testutil::TempDir;
using testutil::write_file;

// ---------------------------------------------------------------- text utils

TEST_CASE("bracket spans: outermost pairs, left to right") {
    auto spans = text::find_bracket_spans("RIP Lil Mac (Mac World) [051 YM]");
    REQUIRE(spans.size() == 2);
    CHECK(spans[0].kind == '(');
    CHECK(spans[0].open == 12);
    CHECK(spans[0].close == 22);
    CHECK(spans[1].kind == '[');
}

TEST_CASE("bracket spans: nesting counts same type only") {
    auto spans = text::find_bracket_spans("a (b (c) d) e");
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].open == 2);
    CHECK(spans[0].close == 10);
}

TEST_CASE("bracket spans: unmatched openers are literal text") {
    CHECK(text::find_bracket_spans("no pair ( here").empty());
    CHECK(text::find_bracket_spans("]...(").empty());
    CHECK_FALSE(text::has_balanced_pair("half [ open"));
    CHECK(text::has_balanced_pair("one [pair]"));
}

TEST_CASE("extract_tag_strings trims and drops empties") {
    auto tags = text::extract_tag_strings("title ( first tag ) [] (2nd)");
    REQUIRE(tags.size() == 2);
    CHECK(tags[0] == "first tag");
    CHECK(tags[1] == "2nd");
}

TEST_CASE("tokenize_outside_brackets: bracket pairs split segments") {
    const std::string title = "Big Folks (tag) ride tonight";
    auto toks = text::tokenize_outside_brackets(title);
    REQUIRE(toks.size() == 4);
    CHECK(text::stripped(title, toks[0]) == "Big");
    CHECK(text::stripped(title, toks[1]) == "Folks");
    CHECK(text::stripped(title, toks[2]) == "ride");
    CHECK(toks[0].segment == toks[1].segment);
    CHECK(toks[2].segment != toks[1].segment);
}

TEST_CASE("tokenize strips leading/trailing punctuation but keeps raw bounds") {
    const std::string title = "\"Duke,\" said so";
    auto toks = text::tokenize_outside_brackets(title);
    REQUIRE(toks.size() == 3);
    CHECK(text::stripped(title, toks[0]) == "Duke");
    CHECK(title.substr(toks[0].raw_begin, toks[0].raw_end - toks[0].raw_begin) == "\"Duke,\"");
}

TEST_CASE("canonical_key lowercases and strips non-alphanumerics") {
    CHECK(text::canonical_key("Lil' Mac") == "lilmac");
    CHECK(text::canonical_key("  O'Block-051 ") == "oblock051");
    CHECK(text::canonical_key("...") == "");
}

TEST_CASE("trim removes surrounding whitespace only") {
    CHECK(text::trim("  a b \t") == "a b");
    CHECK(text::trim("\n") == "");
}

// ----------------------------------------------------------------------- csv

TEST_CASE("csv round-trips quoted fields with commas, quotes and newlines") {
    std::ostringstream out;
    csv::write_row(out, {"a,b", "say \"hi\"", "two\nlines", "plain"});
    std::istringstream in(out.str());
    std::vector<std::string> fields;
    REQUIRE(csv::read_row(in, fields));
    REQUIRE(fields.size() == 4);
    CHECK(fields[0] == "a,b");
    CHECK(fields[1] == "say \"hi\"");
    CHECK(fields[2] == "two\nlines");
    CHECK(fields[3] == "plain");
    CHECK_FALSE(csv::read_row(in, fields));
}

TEST_CASE("csv read handles crlf and empty trailing field") {
    std::istringstream in("a,b,\r\nc,d,e\n");
    std::vector<std::string> fields;
    REQUIRE(csv::read_row(in, fields));
    REQUIRE(fields.size() == 3);
    CHECK(fields[2] == "");
    REQUIRE(csv::read_row(in, fields));
    CHECK(fields[2] == "e");
}

// -------------------------------------------------------------------- ingest

TEST_CASE("load_posts jsonl: stats, empty-title drops, duplicate ids") {
    TempDir dir("ingest_jsonl");
    write_file(dir.file("posts.jsonl"),
               "{\"post_id\":\"p1\",\"created_at\":100,\"title\":\"RIP Duke [051]\"}\n"
               "\n"
               "{\"post_id\":\"p2\",\"created_at\":50,\"title\":\"   \"}\n"
               "{\"post_id\":\"p3\",\"created_at\":200,\"title\":\"no tags here\"}\n");
    ingest::CorpusStats stats;
    auto posts = ingest::load_posts(dir.file("posts.jsonl"), ingest::PostFormat::Jsonl, stats);
    REQUIRE(posts.size() == 2);
    CHECK(posts[0].post_id == "p1");
    CHECK(stats.total_posts == 2);
    CHECK(stats.tagged_posts == 1);
    CHECK(stats.dropped_empty_titles == 1);
    CHECK(stats.min_created_at == 100);
    CHECK(stats.max_created_at == 200);

    write_file(dir.file("dup.jsonl"),
               "{\"post_id\":\"p1\",\"created_at\":1,\"title\":\"a\"}\n"
               "{\"post_id\":\"p1\",\"created_at\":2,\"title\":\"b\"}\n");
    ingest::CorpusStats s2;
    CHECK_THROWS_AS(ingest::load_posts(dir.file("dup.jsonl"), ingest::PostFormat::Jsonl, s2),
                    Error);

    write_file(dir.file("bad.jsonl"), "{\"post_id\":\"p9\",\"created_at\":1}\n");
    ingest::CorpusStats s3;
    try {
        ingest::load_posts(dir.file("bad.jsonl"), ingest::PostFormat::Jsonl, s3);
        FAIL("expected MalformedRecord");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::MalformedRecord);
        CHECK(std::string(e.what()).find("row 1") != std::string::npos);
    }
}

TEST_CASE("load_posts csv matches jsonl on the same logical rows") {
    TempDir dir("ingest_csv");
    write_file(dir.file("posts.csv"),
               "post_id,created_at,title\n"
               "p1,100,\"RIP Duke [051]\"\n"
               "p2,200,plain title\n");
    ingest::CorpusStats stats;
    auto posts = ingest::load_posts(dir.file("posts.csv"), ingest::PostFormat::Csv, stats);
    REQUIRE(posts.size() == 2);
    CHECK(posts[0].title == "RIP Duke [051]");
    CHECK(posts[1].created_at == 200);
    CHECK(stats.tagged_posts == 1);
}

TEST_CASE("format_from_name maps the two supported names") {
    CHECK(ingest::format_from_name("jsonl") == ingest::PostFormat::Jsonl);
    CHECK(ingest::format_from_name("csv") == ingest::PostFormat::Csv);
    try {
        ingest::format_from_name("parquet");
        FAIL("expected ConfigInvalid");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigInvalid);
    }
}

TEST_CASE("filter_tagged_titles keeps balanced-pair titles only") {
    std::vector<ingest::PostRecord> posts = {
        {"a", 1, "has [tag]"}, {"b", 2, "no tag"}, {"c", 3, "broken ["}};
    auto tagged = ingest::filter_tagged_titles(posts);
    REQUIRE(tagged.size() == 1);
    CHECK(tagged[0].post_id == "a");
}

// ------------------------------------------------------------------- lexicon

TEST_CASE("lexicon round-trip preserves canonicalized entries") {
    TempDir dir("lexicon");
    lexicon::LexiconConfig lex;
    lex.merge_map["lilmac"] = "bigmac";
    lex.exclude_list.insert("spamword");
    lex.tag_alias_map["051ym"] = "051";
    lex.tag_exclude_list.insert("video");
    lex.stopwords.insert("rip");
    lexicon::save_lexicon(lex, dir.file("lex.json"));
    auto loaded = lexicon::load_lexicon(dir.file("lex.json"));
    CHECK(loaded.merge_map == lex.merge_map);
    CHECK(loaded.exclude_list == lex.exclude_list);
    CHECK(loaded.tag_alias_map == lex.tag_alias_map);
    CHECK(loaded.tag_exclude_list == lex.tag_exclude_list);
    CHECK(loaded.stopwords == lex.stopwords);
}

TEST_CASE("lexicon load canonicalizes keys from raw spellings") {
    TempDir dir("lexicon_canon");
    write_file(dir.file("lex.json"),
               "{\"merge_map\":{\"Lil' Mac\":\"bigmac\"},\"tag_alias_map\":{\"051 YM\":\"051\"}}");
    auto lex = lexicon::load_lexicon(dir.file("lex.json"));
    CHECK(lex.merge_map.count("lilmac") == 1);
    CHECK(lex.tag_alias_map.count("051ym") == 1);
}

TEST_CASE("lexicon validate rejects merge targets on the exclude list") {
    lexicon::LexiconConfig lex;
    lex.merge_map["a"] = "b";
    lex.exclude_list.insert("b");
    CHECK_THROWS_AS(lexicon::validate(lex), Error);
    lex.exclude_list.clear();
    CHECK_NOTHROW(lexicon::validate(lex));
}

// ------------------------------------------------------------------- mention

static lexicon::LexiconConfig basic_lex() {
    lexicon::LexiconConfig lex;
    lex.stopwords = {"rip", "the", "a", "and", "free"};
    return lex;
}

TEST_CASE("extract_aliases: maximal capitalized runs outside brackets") {
    auto lex = basic_lex();
    auto s = mention::extract_aliases("RIP Lil Mac (Mac World) the realest", lex);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == "Lil Mac");
}

TEST_CASE("extract_aliases: sentence-initial lone capital followed by lowercase drops") {
    auto lex = basic_lex();
    CHECK(mention::extract_aliases("Somebody got caught lacking", lex).empty());
    // Not title-initial: kept.
    auto s = mention::extract_aliases("they say Duke got caught", lex);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == "Duke");
    // Two-token run at the start: kept.
    auto s2 = mention::extract_aliases("Lil Duke got caught", lex);
    REQUIRE(s2.size() == 1);
    CHECK(s2[0] == "Lil Duke");
}

TEST_CASE("extract_aliases: stopwords break runs, brackets bound segments") {
    auto lex = basic_lex();
    auto s = mention::extract_aliases("Tre Duke and Mouse [051] Smokey", lex);
    REQUIRE(s.size() == 3);
    CHECK(s[0] == "Tre Duke");
    CHECK(s[1] == "Mouse");
    CHECK(s[2] == "Smokey");
    // A lone initial capital followed by a lowercase word drops even when
    // more names follow later in the title.
    auto s2 = mention::extract_aliases("Duke and Mouse still beefing", lex);
    REQUIRE(s2.size() == 1);
    CHECK(s2[0] == "Mouse");
}

TEST_CASE("extract_aliases: annotations bypass heuristics verbatim") {
    auto lex = basic_lex();
    const std::string title = "rip lil mac from tha block";
    std::vector<mention::AnnotationSpan> spans = {{4, 11}};
    auto s = mention::extract_aliases(title, lex, &spans);
    REQUIRE(s.size() == 1);
    CHECK(s[0] == "lil mac");
    // Out-of-range span is skipped rather than throwing.
    std::vector<mention::AnnotationSpan> bad = {{4, 99}};
    CHECK(mention::extract_aliases(title, lex, &bad).empty());
}

TEST_CASE("canonicalize_alias merges, excludes and rejects empty keys") {
    lexicon::LexiconConfig lex;
    lex.merge_map["lilmac"] = "Big Mac";
    lex.exclude_list.insert("spam");
    CHECK(mention::canonicalize_alias("Lil' Mac", lex) == std::string("bigmac"));
    CHECK(mention::canonicalize_alias("SPAM", lex) == std::nullopt);
    CHECK_THROWS_AS(mention::canonicalize_alias("!!!", lex), Error);
}

TEST_CASE("canonicalize_tag aliases and excludes") {
    lexicon::LexiconConfig lex;
    lex.tag_alias_map["051ym"] = "051";
    lex.tag_exclude_list.insert("video");
    CHECK(mention::canonicalize_tag("051 YM", lex) == std::string("051"));
    CHECK(mention::canonicalize_tag("[video]", lex) == std::nullopt);
    CHECK(mention::canonicalize_tag("  ", lex) == std::nullopt);
    CHECK(mention::canonicalize_tag("300", lex) == std::string("300"));
}

TEST_CASE("emit_mentions: one event per (post, alias), tags shared, dedup by key") {
    auto lex = basic_lex();
    lex.merge_map["mac"] = "lilmac";
    std::vector<ingest::PostRecord> posts = {
        {"p1", 1, "Lil Mac and Mac beefing (051 YM)"}, // both canonicalize to lilmac -> 1 event
        {"p2", 2, "word is Duke rode on Mouse"},
        {"p3", 3, "untagged Duke sighting"},
    };
    auto events = mention::emit_mentions(posts, lex);
    REQUIRE(events.size() == 4);
    CHECK(events[0].post_id == "p1");
    CHECK(events[0].alias_key == "lilmac");
    CHECK(events[0].surface_form == "Lil Mac");
    REQUIRE(events[0].tags.size() == 1);
    CHECK(events[0].tags[0] == "051 YM");
    CHECK(events[1].alias_key == "duke");
    CHECK(events[2].alias_key == "mouse");
    CHECK(events[3].post_id == "p3");
    CHECK(events[3].tags.empty());
}

TEST_CASE("annotations jsonl loads spans per post") {
    TempDir dir("annotations");
    write_file(dir.file("ann.jsonl"),
               "{\"post_id\":\"p1\",\"spans\":[{\"start\":0,\"end\":4}]}\n"
               "{\"post_id\":\"p2\",\"spans\":[]}\n");
    auto map = mention::load_annotations(dir.file("ann.jsonl"));
    REQUIRE(map.size() == 2);
    REQUIRE(map.at("p1").size() == 1);
    CHECK(map.at("p1")[0].end == 4);
    write_file(dir.file("bad.jsonl"), "{\"post_id\":\"p1\"}\n");
    CHECK_THROWS_AS(mention::load_annotations(dir.file("bad.jsonl")), Error);
}

// -------------------------------------------------------------------- config

TEST_CASE("config: parse, comments, quotes, unknown keys") {
    TempDir dir("config");
    write_file(dir.file("c.toml"),
               "# comment\n"
               "posts = \"data/posts.jsonl\"\n"
               "threshold = 0.75\n"
               "seed = 7\n"
               "sensitivity_thresholds = \"0.51, 0.80\"\n"
               "\n");
    auto cfg = config::load_config(dir.file("c.toml"));
    CHECK(cfg.posts == "data/posts.jsonl");
    CHECK(cfg.threshold == doctest::Approx(0.75));
    CHECK(cfg.seed == 7);
    REQUIRE(cfg.sensitivity_thresholds.size() == 2);
    CHECK(cfg.sensitivity_thresholds[1] == doctest::Approx(0.80));

    write_file(dir.file("bad.toml"), "no_such_key = 1\n");
    try {
        config::load_config(dir.file("bad.toml"));
        FAIL("expected ConfigInvalid");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigInvalid);
        CHECK(std::string(e.what()).find("no_such_key") != std::string::npos);
    }
}

TEST_CASE("config: threshold must sit in (0.5, 1.0]") {
    TempDir dir("config_thr");
    write_file(dir.file("lo.toml"), "threshold = 0.5\n");
    CHECK_THROWS_AS(config::load_config(dir.file("lo.toml")), Error);
    write_file(dir.file("hi.toml"), "threshold = 1.0\n");
    CHECK_NOTHROW(config::load_config(dir.file("hi.toml")));
    config::PipelineConfig cfg;
    CHECK_THROWS_AS(config::apply_key(cfg, "threshold", "1.01"), Error);
    CHECK_THROWS_AS(config::apply_key(cfg, "seed", "12x"), Error);
    CHECK_THROWS_AS(config::apply_key(cfg, "crs", "mercator"), Error);
}

TEST_CASE("config: validate_paths names the missing file and key") {
    TempDir dir("config_paths");
    write_file(dir.file("posts.jsonl"), "");
    config::PipelineConfig cfg;
    cfg.posts = dir.file("posts.jsonl");
    cfg.lexicon = dir.file("nope.json");
    try {
        config::validate_paths(cfg, {"posts", "lexicon"});
        FAIL("expected ConfigInvalid");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigInvalid);
        const std::string msg = e.what();
        CHECK(msg.find("lexicon") != std::string::npos);
        CHECK(msg.find("nope.json") != std::string::npos);
    }
    // Required key left empty is also a config error.
    config::PipelineConfig empty_cfg;
    CHECK_THROWS_AS(config::validate_paths(empty_cfg, {"posts"}), Error);
}
