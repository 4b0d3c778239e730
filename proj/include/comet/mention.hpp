#pragma once

#include "comet/ingest.hpp"
#include "comet/lexicon.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace comet::mention {

// One (post, alias) pairing with the raw tags seen in that post's title.
struct MentionEvent {
    std::string post_id;
    std::string alias_key;    // canonical: lowercase alphanumeric
    std::string surface_form; // verbatim substring of the source title
    std::vector<std::string> tags; // raw tag strings, title order
};

// Pre-annotated proper-noun spans for one post; byte offsets into the title.
struct AnnotationSpan {
    std::size_t start = 0;
    std::size_t end = 0;
};

using AnnotationMap = std::map<std::string, std::vector<AnnotationSpan>>;

AnnotationMap load_annotations(const std::string& path);

// Contents of every outermost balanced (..) / [..] pair, left to right,
// trimmed, empties dropped.
std::vector<std::string> extract_tags(const std::string& title);

// Alias surface forms of a title. With annotations the spans are returned
// verbatim (heuristics bypassed). Otherwise: a surface form is a maximal run
// of capitalized tokens outside bracket pairs, skipping stopwords, with a
// guard that drops a lone sentence-initial capitalized word followed by
// lowercase text (ordinary sentence capitalization, not a name).
std::vector<std::string> extract_aliases(const std::string& title,
                                         const lexicon::LexiconConfig& lex,
                                         const std::vector<AnnotationSpan>* annotations = nullptr);

// lowercase + strip non-alphanumerics, then merge_map; nullopt when the
// resulting key is on the exclude list. Throws EmptyAfterCanonicalization
// when nothing alphanumeric survives.
std::optional<std::string> canonicalize_alias(const std::string& surface,
                                              const lexicon::LexiconConfig& lex);

// Canonical set name for a raw tag string; nullopt when excluded or empty.
std::optional<std::string> canonicalize_tag(const std::string& raw_tag,
                                            const lexicon::LexiconConfig& lex);

// One MentionEvent per (post, alias); tags attach to every alias in the same
// title. Aliases de-duplicate within a post by canonical key.
std::vector<MentionEvent> emit_mentions(const std::vector<ingest::PostRecord>& posts,
                                        const lexicon::LexiconConfig& lex,
                                        const AnnotationMap* annotations = nullptr);

} // namespace comet::mention
