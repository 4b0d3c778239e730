#include "comet/mortality.hpp"

#include "comet/csv.hpp"
#include "comet/error.hpp"
#include "comet/text.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

namespace comet::mortality {

std::string to_string(JoinOutcome o) {
    switch (o) {
        case JoinOutcome::NoMatch: return "no_match";
        case JoinOutcome::UniqueMatch: return "unique_match";
        case JoinOutcome::SetMatch: return "set_match";
        case JoinOutcome::MultipleSetMatches: return "multiple_set_matches";
        case JoinOutcome::DroppedNoSetMatch: return "dropped_no_set_match";
    }
    return "unknown";
}

std::vector<MortalityRecord> load_mortality(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
    std::vector<MortalityRecord> out;
    std::vector<std::string> fields;
    bool first = true;
    std::size_t alias_col = 0, set_col = 1, name_col = 2, url_col = 3;
    std::size_t row = 0;
    while (csv::read_row(in, fields)) {
        ++row;
        if (fields.empty() || (fields.size() == 1 && fields[0].empty())) continue;
        if (first) {
            first = false;
            bool header = false;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (fields[i] == "alias") { alias_col = i; header = true; }
                if (fields[i] == "set_id") { set_col = i; header = true; }
                if (fields[i] == "government_name") { name_col = i; header = true; }
                if (fields[i] == "source_url") { url_col = i; header = true; }
            }
            if (header) continue;
        }
        MortalityRecord rec;
        if (alias_col >= fields.size() || fields[alias_col].empty()) {
            throw Error(ErrorKind::MalformedRecord,
                        path + " row " + std::to_string(row) + ": empty alias");
        }
        rec.alias = fields[alias_col];
        if (set_col < fields.size()) rec.set_id = fields[set_col];
        if (name_col < fields.size()) rec.government_name = fields[name_col];
        if (url_col < fields.size()) rec.source_url = fields[url_col];
        out.push_back(std::move(rec));
    }
    return out;
}

JoinResult join_mortality(const affiliation::Roster& roster,
                          const std::vector<MortalityRecord>& records) {
    // Canonical alias -> matching mortality rows. std::map keeps the join
    // independent of the table's row order.
    std::map<std::string, std::vector<const MortalityRecord*>> by_alias;
    for (const auto& rec : records) {
        const std::string key = text::canonical_key(rec.alias);
        if (key.empty()) continue;
        by_alias[key].push_back(&rec);
    }

    JoinResult result;
    for (const auto& member : roster.members) {
        JoinAuditEntry entry;
        entry.alias_key = member.alias_key;
        entry.set_id = member.set_id;
        auto it = by_alias.find(member.alias_key);
        if (it == by_alias.end()) {
            entry.outcome = JoinOutcome::NoMatch;
            result.deceased[member.alias_key] = false;
        } else {
            const auto& rows = it->second;
            entry.matched_rows = rows.size();
            if (rows.size() == 1) {
                entry.outcome = JoinOutcome::UniqueMatch;
                entry.deceased = true;
                if (!rows[0]->set_id.empty() && rows[0]->set_id != member.set_id) {
                    entry.set_conflict = true;
                }
                result.deceased[member.alias_key] = true;
            } else {
                std::size_t set_matches = 0;
                for (const auto* r : rows) {
                    if (r->set_id == member.set_id) ++set_matches;
                }
                if (set_matches == 1) {
                    entry.outcome = JoinOutcome::SetMatch;
                    entry.deceased = true;
                    result.deceased[member.alias_key] = true;
                } else if (set_matches > 1) {
                    // Duplicate rows naming the same alias and set: treat as
                    // one deceased person, not an ambiguity.
                    entry.outcome = JoinOutcome::MultipleSetMatches;
                    entry.deceased = true;
                    result.deceased[member.alias_key] = true;
                } else {
                    entry.outcome = JoinOutcome::DroppedNoSetMatch;
                    entry.dropped = true;
                    result.dropped.insert(member.alias_key);
                }
            }
        }
        if (entry.deceased) ++result.deceased_count;
        result.audit.push_back(std::move(entry));
    }
    result.sample_size = roster.members.size() - result.dropped.size();
    return result;
}

void write_audit_jsonl(const JoinResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
    for (const auto& entry : result.audit) {
        nlohmann::ordered_json j;
        j["alias"] = entry.alias_key;
        j["set_id"] = entry.set_id;
        j["outcome"] = to_string(entry.outcome);
        j["deceased"] = entry.deceased;
        j["dropped"] = entry.dropped;
        j["matched_rows"] = entry.matched_rows;
        j["set_conflict"] = entry.set_conflict;
        out << j.dump() << "\n";
    }
}

} // namespace comet::mortality
