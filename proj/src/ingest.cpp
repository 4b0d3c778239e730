#include "comet/ingest.hpp"

#include "comet/csv.hpp"
#include "comet/error.hpp"
#include "comet/text.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <unordered_set>

namespace comet::ingest {

namespace {

using nlohmann::json;

void note_record(CorpusStats& stats, const PostRecord& rec) {
    ++stats.total_posts;
    if (text::has_balanced_pair(rec.title)) ++stats.tagged_posts;
    stats.min_created_at = std::min(stats.min_created_at, rec.created_at);
    stats.max_created_at = std::max(stats.max_created_at, rec.created_at);
}

std::int64_t parse_epoch(const std::string& s, std::size_t row) {
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::MalformedRecord,
                    "row " + std::to_string(row) + ": created_at is not an integer: '" + s + "'");
    }
}

} // namespace

PostFormat format_from_name(const std::string& name) {
    if (name == "jsonl") return PostFormat::Jsonl;
    if (name == "csv") return PostFormat::Csv;
    throw Error(ErrorKind::ConfigInvalid, "unknown post format '" + name + "' (expected jsonl or csv)");
}

std::vector<PostRecord> load_posts(const std::string& path, PostFormat format, CorpusStats& stats) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open posts file: " + path);

    std::vector<PostRecord> posts;
    std::unordered_set<std::string> seen_ids;
    stats = CorpusStats{};

    auto add = [&](PostRecord rec, std::size_t row) {
        if (rec.post_id.empty())
            throw Error(ErrorKind::MalformedRecord, "row " + std::to_string(row) + ": empty post_id");
        if (!seen_ids.insert(rec.post_id).second)
            throw Error(ErrorKind::DuplicateId,
                        "row " + std::to_string(row) + ": duplicate post_id '" + rec.post_id + "'");
        if (text::trim(rec.title).empty()) {
            ++stats.dropped_empty_titles;
            return;
        }
        note_record(stats, rec);
        posts.push_back(std::move(rec));
    };

    if (format == PostFormat::Jsonl) {
        std::string line;
        std::size_t row = 0;
        while (std::getline(in, line)) {
            ++row;
            if (text::trim(line).empty()) continue;
            json obj;
            try {
                obj = json::parse(line);
            } catch (const json::parse_error& e) {
                throw Error(ErrorKind::MalformedRecord, "row " + std::to_string(row) + ": " + e.what());
            }
            for (const char* field : {"post_id", "created_at", "title"}) {
                if (!obj.contains(field))
                    throw Error(ErrorKind::MalformedRecord,
                                "row " + std::to_string(row) + ": missing field '" + field + "'");
            }
            if (!obj["post_id"].is_string() || !obj["title"].is_string() ||
                !obj["created_at"].is_number_integer())
                throw Error(ErrorKind::MalformedRecord,
                            "row " + std::to_string(row) + ": wrong field type");
            add({obj["post_id"].get<std::string>(), obj["created_at"].get<std::int64_t>(),
                 obj["title"].get<std::string>()},
                row);
        }
    } else {
        std::vector<std::string> header;
        if (!csv::read_row(in, header))
            throw Error(ErrorKind::MalformedRecord, "empty csv file: " + path);
        int idx_id = -1, idx_ts = -1, idx_title = -1;
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == "post_id") idx_id = static_cast<int>(i);
            else if (header[i] == "created_at") idx_ts = static_cast<int>(i);
            else if (header[i] == "title") idx_title = static_cast<int>(i);
        }
        if (idx_id < 0 || idx_ts < 0 || idx_title < 0)
            throw Error(ErrorKind::MalformedRecord,
                        "csv header must contain post_id, created_at, title");
        std::vector<std::string> fields;
        std::size_t row = 1;
        while (csv::read_row(in, fields)) {
            ++row;
            if (fields.size() == 1 && fields[0].empty()) continue; // blank line
            const std::size_t needed =
                static_cast<std::size_t>(std::max({idx_id, idx_ts, idx_title})) + 1;
            if (fields.size() < needed)
                throw Error(ErrorKind::MalformedRecord,
                            "row " + std::to_string(row) + ": expected at least " +
                                std::to_string(needed) + " fields, got " + std::to_string(fields.size()));
            add({fields[idx_id], parse_epoch(fields[idx_ts], row), fields[idx_title]}, row);
        }
    }
    return posts;
}

std::vector<PostRecord> filter_tagged_titles(const std::vector<PostRecord>& posts) {
    std::vector<PostRecord> kept;
    for (const PostRecord& p : posts)
        if (text::has_balanced_pair(p.title)) kept.push_back(p);
    return kept;
}

CorpusStats compute_stats(const std::vector<PostRecord>& posts) {
    CorpusStats stats;
    for (const PostRecord& p : posts) note_record(stats, p);
    return stats;
}

} // namespace comet::ingest
