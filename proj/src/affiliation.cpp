#include "comet/affiliation.hpp"

#include "comet/csv.hpp"
#include "comet/error.hpp"

#include <algorithm>
#include <fstream>

namespace comet::affiliation {

std::string to_string(AffiliationStatus s) {
    switch (s) {
    case AffiliationStatus::Resolved: return "resolved";
    case AffiliationStatus::Unresolved: return "unresolved";
    case AffiliationStatus::TooFewMentions: return "too_few_mentions";
    }
    return "unknown";
}

std::vector<AliasProfile> build_profiles(const std::vector<mention::MentionEvent>& mentions,
                                         const lexicon::LexiconConfig& lex) {
    std::map<std::string, AliasProfile> by_alias;
    for (const mention::MentionEvent& ev : mentions) {
        AliasProfile& prof = by_alias[ev.alias_key];
        prof.alias_key = ev.alias_key;
        prof.surface_forms.insert(ev.surface_form);
        ++prof.mention_count; // emit_mentions already de-duplicates per post

        std::set<std::string> sets_this_post;
        for (const std::string& raw : ev.tags) {
            auto set_name = mention::canonicalize_tag(raw, lex);
            if (set_name) sets_this_post.insert(*set_name);
        }
        if (!sets_this_post.empty()) {
            ++prof.tagged_post_count;
            for (const std::string& s : sets_this_post) ++prof.tag_histogram[s];
        }
    }
    std::vector<AliasProfile> out;
    out.reserve(by_alias.size());
    for (auto& [key, prof] : by_alias) out.push_back(std::move(prof));
    return out;
}

AffiliationAssignment resolve(const AliasProfile& profile, double threshold,
                              std::size_t min_mentions) {
    if (!(threshold > 0.5 && threshold <= 1.0))
        throw Error(ErrorKind::ConfigInvalid,
                    "threshold must lie in (0.5, 1.0], got " + std::to_string(threshold));

    AffiliationAssignment a;
    a.alias_key = profile.alias_key;
    a.mention_count = profile.mention_count;

    if (profile.mention_count < min_mentions) {
        a.status = AffiliationStatus::TooFewMentions;
        return a;
    }
    if (profile.tag_histogram.empty() || profile.tagged_post_count == 0) {
        a.status = AffiliationStatus::Unresolved;
        return a;
    }

    std::size_t top_count = 0;
    std::string top_set;
    bool tie = false;
    for (const auto& [set_id, count] : profile.tag_histogram) {
        if (count > top_count) {
            top_count = count;
            top_set = set_id;
            tie = false;
        } else if (count == top_count) {
            tie = true;
        }
    }
    a.confidence = static_cast<double>(top_count) / static_cast<double>(profile.tagged_post_count);
    if (!tie && a.confidence >= threshold) {
        a.status = AffiliationStatus::Resolved;
        a.set_id = top_set;
    } else {
        a.status = AffiliationStatus::Unresolved;
    }
    return a;
}

std::vector<AffiliationAssignment> resolve_all(const std::vector<AliasProfile>& profiles,
                                               double threshold, std::size_t min_mentions) {
    std::vector<AffiliationAssignment> out;
    out.reserve(profiles.size());
    for (const AliasProfile& p : profiles) out.push_back(resolve(p, threshold, min_mentions));
    return out;
}

Roster filter_sets(const std::vector<AffiliationAssignment>& assignments,
                   const std::map<std::string, std::string>& allowlist,
                   std::size_t min_affiliates) {
    std::map<std::string, std::size_t> counts;
    for (const AffiliationAssignment& a : assignments)
        if (a.status == AffiliationStatus::Resolved) ++counts[a.set_id];

    Roster roster;
    std::set<std::string> kept_sets;
    for (const auto& [set_id, count] : counts) {
        if (count < min_affiliates) {
            ++roster.dropped_small_sets;
            continue;
        }
        auto entry = allowlist.find(set_id);
        if (entry == allowlist.end()) {
            ++roster.dropped_unverified_sets;
            continue;
        }
        kept_sets.insert(set_id);
        roster.sets.push_back({set_id, entry->second, count, true});
    }
    if (kept_sets.empty())
        throw Error(ErrorKind::EmptyRoster, "no set passed the affiliate-count and allowlist filters");

    for (const AffiliationAssignment& a : assignments) {
        if (a.status != AffiliationStatus::Resolved) continue;
        if (!kept_sets.count(a.set_id)) {
            ++roster.dropped_individuals;
            continue;
        }
        roster.members.push_back(
            {a.alias_key, a.set_id, allowlist.at(a.set_id), a.confidence, a.mention_count});
    }
    std::sort(roster.members.begin(), roster.members.end(),
              [](const RosterMember& l, const RosterMember& r) { return l.alias_key < r.alias_key; });
    return roster;
}

std::map<std::string, std::string> load_allowlist(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open allowlist file: " + path);
    std::map<std::string, std::string> allow;
    std::vector<std::string> fields;
    bool first = true;
    while (csv::read_row(in, fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (first) {
            first = false;
            if (!fields.empty() && fields[0] == "set_id") continue; // header
        }
        if (fields.size() < 2)
            throw Error(ErrorKind::MalformedRecord, "allowlist rows need set_id, nation_id");
        allow[fields[0]] = fields[1];
    }
    return allow;
}

} // namespace comet::affiliation
