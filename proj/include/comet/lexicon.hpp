#pragma once

#include <map>
#include <set>
#include <string>

namespace comet::lexicon {

// Manual curation lists. Surface-side keys are stored canonicalized
// (lowercase alphanumeric) so lookups are insensitive to punctuation and
// spelling variants of the same key.
struct LexiconConfig {
    std::map<std::string, std::string> merge_map;   // canonical surface key -> alias_key
    std::set<std::string> exclude_list;             // alias_keys to drop
    std::map<std::string, std::string> tag_alias_map; // canonical raw tag -> set name
    std::set<std::string> tag_exclude_list;         // canonical raw tags to drop
    std::set<std::string> stopwords;                // lowercase tokens that never start/extend an alias
};

LexiconConfig load_lexicon(const std::string& path);
void save_lexicon(const LexiconConfig& lex, const std::string& path);

// Checks the merge/exclude consistency rule: merge targets may not be excluded.
void validate(const LexiconConfig& lex);

} // namespace comet::lexicon
