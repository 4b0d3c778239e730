#pragma once

#include "comet/lexicon.hpp"
#include "comet/mention.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace comet::affiliation {

// Per-alias aggregate over the tagged-title mention stream.
struct AliasProfile {
    std::string alias_key;
    std::set<std::string> surface_forms;
    std::size_t mention_count = 0;     // distinct posts mentioning the alias
    std::size_t tagged_post_count = 0; // distinct posts carrying >= 1 usable tag
    std::map<std::string, std::size_t> tag_histogram; // set name -> tagged posts
};

enum class AffiliationStatus { Resolved, Unresolved, TooFewMentions };

std::string to_string(AffiliationStatus s);

struct AffiliationAssignment {
    std::string alias_key;
    std::string set_id;     // empty unless resolved
    double confidence = 0.0; // top-set share of tagged posts
    AffiliationStatus status = AffiliationStatus::Unresolved;
    std::size_t mention_count = 0;
};

struct GangSet {
    std::string set_id;
    std::string nation_id;
    std::size_t affiliate_count = 0;
    bool verified = false; // present in the external allowlist
};

// A resolved individual that survived the set-level filters.
struct RosterMember {
    std::string alias_key;
    std::string set_id;
    std::string nation_id;
    double confidence = 0.0;
    std::size_t mention_count = 0;
};

struct Roster {
    std::vector<RosterMember> members; // sorted by alias_key
    std::vector<GangSet> sets;         // sorted by set_id
    std::size_t dropped_small_sets = 0;
    std::size_t dropped_unverified_sets = 0;
    std::size_t dropped_individuals = 0;
};

// Tags are canonicalized per post; a post contributes at most one count to
// each set it tags for a given alias.
std::vector<AliasProfile> build_profiles(const std::vector<mention::MentionEvent>& mentions,
                                         const lexicon::LexiconConfig& lex);

AffiliationAssignment resolve(const AliasProfile& profile, double threshold = 0.70,
                              std::size_t min_mentions = 5);

std::vector<AffiliationAssignment> resolve_all(const std::vector<AliasProfile>& profiles,
                                               double threshold = 0.70,
                                               std::size_t min_mentions = 5);

// allowlist: set_id -> nation_id (the external verification surrogate).
// Sets with fewer than `min_affiliates` resolved members are dropped first,
// then sets absent from the allowlist; members of dropped sets leave the
// analytic sample.
Roster filter_sets(const std::vector<AffiliationAssignment>& assignments,
                   const std::map<std::string, std::string>& allowlist,
                   std::size_t min_affiliates = 10);

std::map<std::string, std::string> load_allowlist(const std::string& path);

} // namespace comet::affiliation
