#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace comet::ingest {

// One forum post title; the atomic corpus unit.
struct PostRecord {
    std::string post_id;
    std::int64_t created_at = 0; // UTC epoch seconds
    std::string title;
};

struct CorpusStats {
    std::size_t total_posts = 0;
    std::size_t tagged_posts = 0; // titles with at least one balanced bracket pair
    std::size_t dropped_empty_titles = 0;
    std::int64_t min_created_at = std::numeric_limits<std::int64_t>::max();
    std::int64_t max_created_at = std::numeric_limits<std::int64_t>::min();
};

enum class PostFormat { Jsonl, Csv };

PostFormat format_from_name(const std::string& name);

// Loads records in file order. Rows with an empty (post-trim) title are
// dropped and counted in `stats`; a missing field or duplicate post_id is an
// error naming the offending row.
std::vector<PostRecord> load_posts(const std::string& path, PostFormat format, CorpusStats& stats);

// Keeps exactly the posts whose title contains at least one balanced bracket
// pair. Unbalanced brackets pass nothing here; they simply never form a pair.
std::vector<PostRecord> filter_tagged_titles(const std::vector<PostRecord>& posts);

CorpusStats compute_stats(const std::vector<PostRecord>& posts);

} // namespace comet::ingest
