#include "comet/lexicon.hpp"

#include "comet/error.hpp"
#include "comet/text.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

namespace comet::lexicon {

using nlohmann::json;
using nlohmann::ordered_json;

LexiconConfig load_lexicon(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoError, "cannot open lexicon file: " + path);
    json obj;
    try {
        in >> obj;
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ConfigInvalid, std::string("lexicon parse failure: ") + e.what());
    }

    LexiconConfig lex;
    if (obj.contains("merge_map"))
        for (auto& [k, v] : obj["merge_map"].items())
            lex.merge_map[text::canonical_key(k)] = v.get<std::string>();
    if (obj.contains("exclude_list"))
        for (auto& v : obj["exclude_list"])
            lex.exclude_list.insert(text::canonical_key(v.get<std::string>()));
    if (obj.contains("tag_alias_map"))
        for (auto& [k, v] : obj["tag_alias_map"].items())
            lex.tag_alias_map[text::canonical_key(k)] = v.get<std::string>();
    if (obj.contains("tag_exclude_list"))
        for (auto& v : obj["tag_exclude_list"])
            lex.tag_exclude_list.insert(text::canonical_key(v.get<std::string>()));
    if (obj.contains("stopwords"))
        for (auto& v : obj["stopwords"]) {
            std::string word = v.get<std::string>();
            for (char& c : word)
                if (text::is_ascii_upper(c)) c = static_cast<char>(c - 'A' + 'a');
            lex.stopwords.insert(std::move(word));
        }

    validate(lex);
    return lex;
}

void save_lexicon(const LexiconConfig& lex, const std::string& path) {
    ordered_json obj;
    obj["merge_map"] = ordered_json::object();
    for (const auto& [k, v] : lex.merge_map) obj["merge_map"][k] = v;
    obj["exclude_list"] = lex.exclude_list;
    obj["tag_alias_map"] = ordered_json::object();
    for (const auto& [k, v] : lex.tag_alias_map) obj["tag_alias_map"][k] = v;
    obj["tag_exclude_list"] = lex.tag_exclude_list;
    obj["stopwords"] = lex.stopwords;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write lexicon file: " + path);
    out << obj.dump(2) << '\n';
}

void validate(const LexiconConfig& lex) {
    for (const auto& [surface, target] : lex.merge_map) {
        if (lex.exclude_list.count(text::canonical_key(target)))
            throw Error(ErrorKind::ConfigInvalid,
                        "merge_map target '" + target + "' (from '" + surface +
                            "') appears in exclude_list");
    }
}

} // namespace comet::lexicon
