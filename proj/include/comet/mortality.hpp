#pragma once

#include "comet/affiliation.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace comet::mortality {

struct MortalityRecord {
    std::string alias;      // raw surface form; canonicalized at join time
    std::string set_id;     // may be empty
    std::string government_name;
    std::string source_url;
};

enum class JoinOutcome {
    NoMatch,            // alive
    UniqueMatch,        // single mortality row for the alias
    SetMatch,           // multiple rows, exactly one agrees on set
    MultipleSetMatches, // multiple rows, several agree on set (duplicates)
    DroppedNoSetMatch,  // multiple rows, none agrees -> out of the sample
};

std::string to_string(JoinOutcome o);

struct JoinAuditEntry {
    std::string alias_key;
    std::string set_id;
    JoinOutcome outcome = JoinOutcome::NoMatch;
    bool deceased = false;
    bool dropped = false;
    std::size_t matched_rows = 0;   // mortality rows sharing the alias
    bool set_conflict = false;      // single row disagreed on set but joined anyway
};

struct JoinResult {
    std::map<std::string, bool> deceased;  // alias_key -> flag, joined members only
    std::set<std::string> dropped;         // alias_key, removed from the sample
    std::vector<JoinAuditEntry> audit;     // one entry per roster member, roster order
    std::size_t deceased_count = 0;
    std::size_t sample_size = 0;           // roster minus dropped
};

std::vector<MortalityRecord> load_mortality(const std::string& path);

// Disambiguation rules: unique alias row joins; among multiple rows only a
// set-id agreement joins; multiple rows with no set agreement drop the member
// from the analytic sample. Row order never matters.
JoinResult join_mortality(const affiliation::Roster& roster,
                          const std::vector<MortalityRecord>& records);

void write_audit_jsonl(const JoinResult& result, const std::string& path);

} // namespace comet::mortality
