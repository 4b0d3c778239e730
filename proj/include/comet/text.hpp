#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace comet::text {

// Byte range of one outermost balanced bracket pair, `open`/`close` pointing
// at the bracket characters themselves.
struct BracketSpan {
    std::size_t open = 0;
    std::size_t close = 0;
    char kind = '(';
};

// Outermost balanced () and [] pairs, left to right. A pair closes with the
// same bracket type, counting nesting of that type only; openers without a
// matching closer are treated as literal text.
std::vector<BracketSpan> find_bracket_spans(std::string_view title);

bool has_balanced_pair(std::string_view title);

// Contents of each outermost pair, trimmed; empties dropped.
std::vector<std::string> extract_tag_strings(std::string_view title);

// One whitespace-delimited token outside any bracket pair. `begin`/`end`
// bound the stripped form (leading/trailing non-alphanumerics removed);
// `raw_begin`/`raw_end` bound the raw whitespace-delimited chunk.
struct Token {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t raw_begin = 0;
    std::size_t raw_end = 0;
    int segment = 0; // which inter-bracket segment the token lies in
};

// Tokens of the title text outside bracket pairs. Bracket pairs split the
// title into segments; token runs never cross a segment boundary.
std::vector<Token> tokenize_outside_brackets(std::string_view title);

// Lowercased ASCII alphanumerics only; every other byte is stripped.
std::string canonical_key(std::string_view s);

inline std::string_view stripped(std::string_view title, const Token& t) {
    return title.substr(t.begin, t.end - t.begin);
}

std::string trim(std::string_view s);

bool is_ascii_upper(char c);
bool is_ascii_lower(char c);

} // namespace comet::text
