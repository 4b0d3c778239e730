#include "comet/mention.hpp"

#include "comet/error.hpp"
#include "comet/text.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>

namespace comet::mention {

namespace {

using text::Token;

// Capitalized token usable inside an alias run: starts with an ASCII capital,
// continues with letters/digits/hyphens/apostrophes.
bool qualifies(std::string_view stripped, const lexicon::LexiconConfig& lex) {
    if (stripped.empty() || !text::is_ascii_upper(stripped[0])) return false;
    for (char c : stripped.substr(1)) {
        const bool ok = text::is_ascii_upper(c) || text::is_ascii_lower(c) ||
                        (c >= '0' && c <= '9') || c == '-' || c == '\'';
        if (!ok) return false;
    }
    std::string lower(stripped);
    for (char& c : lower)
        if (text::is_ascii_upper(c)) c = static_cast<char>(c - 'A' + 'a');
    return lex.stopwords.count(lower) == 0;
}

} // namespace

AnnotationMap load_annotations(const std::string& path) {
    using nlohmann::json;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open annotations file: " + path);
    AnnotationMap map;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (text::trim(line).empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(ErrorKind::MalformedRecord,
                        "annotations row " + std::to_string(row) + ": " + e.what());
        }
        if (!obj.contains("post_id") || !obj.contains("spans"))
            throw Error(ErrorKind::MalformedRecord,
                        "annotations row " + std::to_string(row) + ": need post_id and spans");
        std::vector<AnnotationSpan>& spans = map[obj["post_id"].get<std::string>()];
        for (auto& s : obj["spans"])
            spans.push_back({s.at("start").get<std::size_t>(), s.at("end").get<std::size_t>()});
    }
    return map;
}

std::vector<std::string> extract_tags(const std::string& title) {
    return text::extract_tag_strings(title);
}

std::vector<std::string> extract_aliases(const std::string& title,
                                         const lexicon::LexiconConfig& lex,
                                         const std::vector<AnnotationSpan>* annotations) {
    std::vector<std::string> surfaces;
    if (annotations) {
        for (const AnnotationSpan& span : *annotations) {
            if (span.end <= span.start || span.end > title.size()) continue;
            surfaces.push_back(title.substr(span.start, span.end - span.start));
        }
        return surfaces;
    }

    const std::vector<Token> tokens = text::tokenize_outside_brackets(title);
    std::size_t i = 0;
    while (i < tokens.size()) {
        if (!qualifies(text::stripped(title, tokens[i]), lex)) {
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < tokens.size() && tokens[j].segment == tokens[i].segment &&
               qualifies(text::stripped(title, tokens[j]), lex))
            ++j;

        bool keep = true;
        if (j == i + 1 && tokens[i].raw_begin == 0) {
            // Lone capitalized word opening the title, directly followed by a
            // lowercase word in the same segment: sentence capitalization.
            if (j < tokens.size() && tokens[j].segment == tokens[i].segment) {
                const std::string_view next = text::stripped(title, tokens[j]);
                if (!next.empty() && text::is_ascii_lower(next[0])) keep = false;
            }
        }
        if (keep)
            surfaces.push_back(
                title.substr(tokens[i].begin, tokens[j - 1].end - tokens[i].begin));
        i = j;
    }
    return surfaces;
}

std::optional<std::string> canonicalize_alias(const std::string& surface,
                                              const lexicon::LexiconConfig& lex) {
    std::string key = text::canonical_key(surface);
    if (key.empty())
        throw Error(ErrorKind::EmptyAfterCanonicalization,
                    "surface '" + surface + "' has no alphanumeric content");
    auto merged = lex.merge_map.find(key);
    if (merged != lex.merge_map.end()) key = text::canonical_key(merged->second);
    if (lex.exclude_list.count(key)) return std::nullopt;
    return key;
}

std::optional<std::string> canonicalize_tag(const std::string& raw_tag,
                                            const lexicon::LexiconConfig& lex) {
    const std::string key = text::canonical_key(raw_tag);
    if (key.empty()) return std::nullopt;
    if (lex.tag_exclude_list.count(key)) return std::nullopt;
    auto aliased = lex.tag_alias_map.find(key);
    if (aliased != lex.tag_alias_map.end()) return aliased->second;
    return key;
}

std::vector<MentionEvent> emit_mentions(const std::vector<ingest::PostRecord>& posts,
                                        const lexicon::LexiconConfig& lex,
                                        const AnnotationMap* annotations) {
    std::vector<MentionEvent> events;
    for (const ingest::PostRecord& post : posts) {
        const std::vector<AnnotationSpan>* spans = nullptr;
        if (annotations) {
            auto it = annotations->find(post.post_id);
            if (it != annotations->end()) spans = &it->second;
        }
        const std::vector<std::string> tags = extract_tags(post.title);
        std::set<std::string> seen;
        for (const std::string& surface : extract_aliases(post.title, lex, spans)) {
            std::optional<std::string> key;
            try {
                key = canonicalize_alias(surface, lex);
            } catch (const Error&) {
                continue; // annotation span with no alphanumeric content
            }
            if (!key || !seen.insert(*key).second) continue;
            events.push_back({post.post_id, *key, surface, tags});
        }
    }
    return events;
}

} // namespace comet::mention
