#include "comet/text.hpp"

namespace comet::text {

namespace {

bool is_ascii_alnum(char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

} // namespace

bool is_ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_ascii_lower(char c) { return c >= 'a' && c <= 'z'; }

std::vector<BracketSpan> find_bracket_spans(std::string_view title) {
    std::vector<BracketSpan> spans;
    std::size_t i = 0;
    while (i < title.size()) {
        const char c = title[i];
        if (c != '(' && c != '[') {
            ++i;
            continue;
        }
        const char closer = (c == '(') ? ')' : ']';
        int depth = 1;
        std::size_t j = i + 1;
        for (; j < title.size(); ++j) {
            if (title[j] == c) ++depth;
            else if (title[j] == closer && --depth == 0) break;
        }
        if (j < title.size()) {
            spans.push_back({i, j, c});
            i = j + 1;
        } else {
            ++i; // unmatched opener: literal text
        }
    }
    return spans;
}

bool has_balanced_pair(std::string_view title) {
    return !find_bracket_spans(title).empty();
}

std::vector<std::string> extract_tag_strings(std::string_view title) {
    std::vector<std::string> tags;
    for (const BracketSpan& span : find_bracket_spans(title)) {
        std::string content = trim(title.substr(span.open + 1, span.close - span.open - 1));
        if (!content.empty()) tags.push_back(std::move(content));
    }
    return tags;
}

std::vector<Token> tokenize_outside_brackets(std::string_view title) {
    const std::vector<BracketSpan> spans = find_bracket_spans(title);
    std::vector<Token> tokens;

    std::size_t cursor = 0;
    int segment = 0;
    auto scan_segment = [&](std::size_t lo, std::size_t hi) {
        std::size_t i = lo;
        while (i < hi) {
            while (i < hi && is_space(title[i])) ++i;
            if (i >= hi) break;
            std::size_t raw_end = i;
            while (raw_end < hi && !is_space(title[raw_end])) ++raw_end;
            Token tok;
            tok.raw_begin = i;
            tok.raw_end = raw_end;
            tok.segment = segment;
            std::size_t b = i, e = raw_end;
            while (b < e && !is_ascii_alnum(title[b])) ++b;
            while (e > b && !is_ascii_alnum(title[e - 1])) --e;
            tok.begin = b;
            tok.end = e;
            if (e > b) tokens.push_back(tok);
            i = raw_end;
        }
        ++segment;
    };

    for (const BracketSpan& span : spans) {
        scan_segment(cursor, span.open);
        cursor = span.close + 1;
    }
    scan_segment(cursor, title.size());
    return tokens;
}

std::string canonical_key(std::string_view s) {
    std::string key;
    key.reserve(s.size());
    for (char c : s) {
        if (c >= 'a' && c <= 'z') key.push_back(c);
        else if (c >= '0' && c <= '9') key.push_back(c);
        else if (c >= 'A' && c <= 'Z') key.push_back(static_cast<char>(c - 'A' + 'a'));
    }
    return key;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

} // namespace comet::text
